"""Shared figure construction with a pinned style.

Figures are built directly on an Agg canvas under a fixed rc context,
so output is deterministic for fixed inputs regardless of the caller's
matplotlib configuration.
"""
from __future__ import annotations

from pathlib import Path

import matplotlib as mpl
from cycler import cycler
from matplotlib.backends.backend_agg import FigureCanvasAgg
from matplotlib.figure import Figure

STYLE = {
    "figure.dpi": 100,
    "savefig.dpi": 100,
    "font.family": "DejaVu Sans",
    "font.size": 10,
    "axes.grid": True,
    "grid.alpha": 0.3,
    "axes.prop_cycle": cycler(color=[
        "#1b6ca8", "#d1495b", "#3e885b", "#e3901a", "#6f5494", "#4f6d7a",
    ]),
}


def new_figure(width: float, height: float):
    fig = Figure(figsize=(width, height))
    FigureCanvasAgg(fig)
    return fig, fig.add_subplot()


def save_png(fig: Figure, out) -> Path:
    out = Path(out)
    if out.parent != Path(""):
        out.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(out, format="png")
    return out


def style_context():
    return mpl.rc_context(STYLE)
