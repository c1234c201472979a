"""Figure generation and rank-sum reports for deepgrid result CSVs."""

from .curves import FigureSpec, aggregate, plot_metric_curves
from .heatmap import MODES, cell_values, normalize, plot_container_heatmap
from .io import (
    CORRECTED_COLUMNS,
    METRIC_CHOICES,
    METRICS_COLUMNS,
    SchemaError,
    load_corrected,
    load_grid_config,
    load_members,
    load_metrics,
    load_snapshot,
    member_label,
)
from .ranksum import MIN_REPLICATIONS, RefusalError, final_values, ranksum_report

__version__ = "0.1.0"

__all__ = [
    "CORRECTED_COLUMNS",
    "FigureSpec",
    "METRICS_COLUMNS",
    "METRIC_CHOICES",
    "MIN_REPLICATIONS",
    "MODES",
    "RefusalError",
    "SchemaError",
    "aggregate",
    "cell_values",
    "final_values",
    "load_corrected",
    "load_grid_config",
    "load_members",
    "load_metrics",
    "load_snapshot",
    "member_label",
    "normalize",
    "plot_container_heatmap",
    "plot_metric_curves",
    "ranksum_report",
]
