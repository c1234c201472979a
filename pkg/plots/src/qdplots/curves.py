"""Metric-versus-evaluations comparison curves."""
from __future__ import annotations

from dataclasses import dataclass

import pandas as pd

from .io import METRIC_CHOICES, load_members
from .render import new_figure, save_png, style_context


@dataclass(frozen=True)
class FigureSpec:
    inputs: tuple[str, ...]
    metric: str
    out: str
    title: str | None = None

    def __post_init__(self):
        if not self.inputs:
            raise ValueError("FigureSpec needs at least one result directory")
        if self.metric not in METRIC_CHOICES:
            raise ValueError(
                f"metric must be one of {METRIC_CHOICES}, got {self.metric!r}")


def aggregate(df: pd.DataFrame, metric: str) -> pd.DataFrame:
    """Median and interquartile bounds of one metric per checkpoint.

    Rows indexed by the evaluations axis; a single replication yields a
    zero-width band (lo == med == hi).
    """
    g = df.groupby("evaluations")[metric]
    return pd.DataFrame({
        "med": g.median(),
        "lo": g.quantile(0.25),
        "hi": g.quantile(0.75),
    })


def plot_metric_curves(spec: FigureSpec):
    members = load_members(spec.inputs)
    pretty = spec.metric.replace("_", " ")
    with style_context():
        fig, ax = new_figure(7.0, 4.5)
        for label, df in members:
            band = aggregate(df, spec.metric)
            ax.plot(band.index, band["med"], label=label, linewidth=1.8)
            ax.fill_between(band.index, band["lo"], band["hi"],
                            alpha=0.25, linewidth=0)
        ax.set_xlabel("evaluations")
        ax.set_ylabel(pretty)
        ax.set_title(spec.title
                     or f"{pretty} — median and interquartile band")
        ax.legend()
        fig.tight_layout()
        return save_png(fig, spec.out)
