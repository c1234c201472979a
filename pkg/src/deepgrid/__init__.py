"""Depth-based MAP-Elites variants for noisy quality-diversity
optimization, with a seeded experiment harness and corrected-container
metrics."""

from .algorithms import AlgorithmSpec, adaptive_challenge, build_loop
from .core import DeepCell, Evaluation, Grid, Individual
from .grids import CartesianGrid, PolarGrid
from .metrics import CellEntity, MetricsRecord, measure_grid
from .selection import MutationSpec, SelectorSpec
from .tasks import ArmTask, NoiseSpec, NoisyEvaluator, RastriginTask, make_task

__version__ = "0.1.0"

__all__ = [
    "AlgorithmSpec",
    "ArmTask",
    "CartesianGrid",
    "CellEntity",
    "DeepCell",
    "Evaluation",
    "Grid",
    "Individual",
    "MetricsRecord",
    "MutationSpec",
    "NoiseSpec",
    "NoisyEvaluator",
    "PolarGrid",
    "RastriginTask",
    "SelectorSpec",
    "adaptive_challenge",
    "build_loop",
    "make_task",
    "measure_grid",
    "__version__",
]
