"""Loading and validation of the harness's result files.

Everything here consumes the documented file formats only: the metrics
CSV, the grid snapshot CSV, the corrected-container CSV, and the
resolved-config JSON.  Loaders fail with a descriptive ``SchemaError``
rather than plotting from half-understood input.
"""
from __future__ import annotations

import json
import re
from pathlib import Path

import pandas as pd

METRICS_COLUMNS = [
    "task",
    "variant",
    "replication",
    "evaluations",
    "correct_bd",
    "corrected_collection_size",
    "total_corrected_quality",
    "wallclock_seconds",
]
CORRECTED_COLUMNS = ["cell_index", "source_cell", "fitness", "bd0", "bd1"]
METRIC_CHOICES = (
    "correct_bd",
    "corrected_collection_size",
    "total_corrected_quality",
)


class SchemaError(ValueError):
    """An input file does not match the documented format."""


def _check_columns(path, got: list[str], want: list[str], what: str) -> None:
    if got != want:
        raise SchemaError(f"{path}: {what} columns {got} do not match {want}")


def load_metrics(path) -> pd.DataFrame:
    df = pd.read_csv(path)
    _check_columns(path, list(df.columns), METRICS_COLUMNS, "metrics")
    return df


def member_label(directory) -> str:
    """Display label of a result directory: its resolved config's label,
    with the directory name as fallback."""
    cfg = Path(directory) / "config_resolved.json"
    if cfg.exists():
        try:
            label = json.loads(cfg.read_text()).get("label")
        except (OSError, json.JSONDecodeError):
            label = None
        if label:
            return str(label)
    return Path(directory).name


def load_members(directories) -> list[tuple[str, pd.DataFrame]]:
    """(label, metrics frame) per result directory, in input order."""
    members = []
    for d in directories:
        df = load_metrics(Path(d) / "metrics.csv")
        if df.empty:
            raise SchemaError(f"{d}: metrics.csv holds no replication rows")
        members.append((member_label(d), df))
    return members


def load_snapshot(path) -> pd.DataFrame:
    df = pd.read_csv(path)
    cols = list(df.columns)
    genes = sum(1 for c in cols if re.fullmatch(r"g\d+", c))
    want = (["cell_index", "slot"] + [f"g{i}" for i in range(genes)]
            + ["fitness", "bd0", "bd1", "sample_count"])
    _check_columns(path, cols, want, "snapshot")
    return df


def load_corrected(path) -> pd.DataFrame:
    df = pd.read_csv(path)
    _check_columns(path, list(df.columns), CORRECTED_COLUMNS, "corrected container")
    if df["cell_index"].duplicated().any():
        raise SchemaError(f"{path}: corrected container repeats a cell_index")
    return df


def load_grid_config(path) -> dict:
    try:
        cfg = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise SchemaError(f"{path}: not valid JSON ({exc})") from exc
    grid = cfg.get("grid") if isinstance(cfg, dict) else None
    if not isinstance(grid, dict) or "kind" not in grid:
        raise SchemaError(f"{path}: no grid section with a 'kind' entry")
    kind = grid["kind"]
    if kind == "cartesian":
        missing = {"lower", "upper", "shape"} - grid.keys()
    elif kind == "polar":
        missing = {"center", "radius", "rings"} - grid.keys()
    else:
        raise SchemaError(f"{path}: unknown grid kind {kind!r}")
    if missing:
        raise SchemaError(f"{path}: grid lacks {sorted(missing)}")
    return grid
