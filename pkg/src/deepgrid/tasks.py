"""Benchmark tasks and the budget-charging noisy evaluator.

Each task exposes its genotype box, descriptor bounds, the fitness range
used for quality normalization, and deterministic single/batch evaluation.
Noise is additive Gaussian, applied on top of the deterministic values by
NoisyEvaluator, which is also the only place evaluations are counted.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import Evaluation
from .grids import CartesianGrid, Geometry, PolarGrid

TWO_PI = 2.0 * math.pi


class RastriginTask:
    """Inverted 6-D Rastrigin, maximum 0 at the origin.

    f(x) = -60 - sum(x_i^2 - 10 cos(2 pi x_i)); descriptor is (x_0, x_1).
    """

    name = "rastrigin"
    genotype_dim = 6
    bd_dim = 2

    def __init__(self, genotype_dim: int = 6):
        if genotype_dim < 2:
            raise ValueError("descriptor needs at least two genes")
        self.genotype_dim = genotype_dim
        self.gene_lower = np.full(genotype_dim, -5.12)
        self.gene_upper = np.full(genotype_dim, 5.12)
        self.bd_lower = np.array([-5.12, -5.12])
        self.bd_upper = np.array([5.12, 5.12])
        self.fitness_bounds = (-277.2, 0.0)

    def evaluate(self, x: np.ndarray) -> Evaluation:
        f = -60.0 - float((x * x - 10.0 * np.cos(TWO_PI * x)).sum())
        return Evaluation(f, x[:2].copy())

    def evaluate_batch(self, X: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        f = -60.0 - (X * X - 10.0 * np.cos(TWO_PI * X)).sum(axis=1)
        return f, X[:, :2].copy()

    def default_geometry(self) -> Geometry:
        return CartesianGrid(
            lower=(-5.12, -5.12), upper=(5.12, 5.12), shape=(100, 100)
        )


class ArmTask:
    """Planar redundant arm with equal-length links summing to 1.

    Fitness is the negated variance of the joint angles (0 when all joints
    share one angle); descriptor is the end-effector position from forward
    kinematics, so it lives in the unit disk.
    """

    name = "arm"
    bd_dim = 2

    def __init__(self, n_joints: int = 8):
        if n_joints < 1:
            raise ValueError("arm needs at least one joint")
        self.genotype_dim = n_joints
        self.link_length = 1.0 / n_joints
        self.gene_lower = np.full(n_joints, -math.pi)
        self.gene_upper = np.full(n_joints, math.pi)
        self.bd_lower = np.array([-1.0, -1.0])
        self.bd_upper = np.array([1.0, 1.0])
        self.fitness_bounds = (-math.pi ** 2, 0.0)

    def evaluate(self, x: np.ndarray) -> Evaluation:
        d = x - x.mean()
        f = -float((d * d).sum()) / self.genotype_dim
        heading = np.cumsum(x)
        bd = np.array(
            [
                self.link_length * float(np.cos(heading).sum()),
                self.link_length * float(np.sin(heading).sum()),
            ]
        )
        return Evaluation(f, bd)

    def evaluate_batch(self, X: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        d = X - X.mean(axis=1, keepdims=True)
        f = -(d * d).sum(axis=1) / self.genotype_dim
        heading = np.cumsum(X, axis=1)
        bd = np.stack(
            [
                self.link_length * np.cos(heading).sum(axis=1),
                self.link_length * np.sin(heading).sum(axis=1),
            ],
            axis=1,
        )
        return f, bd

    def default_geometry(self) -> Geometry:
        return PolarGrid(center=(0.0, 0.0), radius=1.0, rings=71)


Task = RastriginTask | ArmTask

_TASKS = {"rastrigin": RastriginTask, "arm": ArmTask}


def make_task(name: str) -> Task:
    try:
        cls = _TASKS[name]
    except KeyError:
        raise ValueError(f"unknown task {name!r}; choose from {sorted(_TASKS)}") from None
    return cls()


@dataclass(frozen=True)
class NoiseSpec:
    """Additive Gaussian noise on fitness and on each descriptor axis.

    ``interpretation`` controls whether the two constants are read as
    standard deviations (default) or variances.
    """

    fitness: float = 0.05
    bd: float = 0.01
    interpretation: str = "std"

    def __post_init__(self):
        if self.fitness < 0 or self.bd < 0:
            raise ValueError("noise magnitudes cannot be negative")
        if self.interpretation not in ("std", "variance"):
            raise ValueError("interpretation must be 'std' or 'variance'")

    @property
    def fitness_sigma(self) -> float:
        return self.fitness if self.interpretation == "std" else math.sqrt(self.fitness)

    @property
    def bd_sigma(self) -> float:
        return self.bd if self.interpretation == "std" else math.sqrt(self.bd)


ZERO_NOISE = NoiseSpec(0.0, 0.0)


class BudgetExhausted(RuntimeError):
    """Raised when an evaluation would overshoot the evaluation budget."""


class NoisyEvaluator:
    """Evaluates genotypes under the task's noise model and counts the cost.

    Every noisy draw charges one evaluation.  ``budget=None`` disables the
    cap (used for measurement-time evaluators with their own rng stream).
    """

    def __init__(
        self,
        task: Task,
        noise: NoiseSpec,
        rng: np.random.Generator,
        budget: int | None = None,
    ):
        self.task = task
        self.noise = noise
        self.rng = rng
        self.budget = budget
        self.count = 0
        self._sf = noise.fitness_sigma
        self._sb = noise.bd_sigma

    def can_afford(self, n: int) -> bool:
        return self.budget is None or self.count + n <= self.budget

    def _charge(self, n: int) -> None:
        if not self.can_afford(n):
            raise BudgetExhausted(
                f"{n} evaluations requested with {self.remaining()} remaining"
            )
        self.count += n

    def remaining(self) -> int | None:
        return None if self.budget is None else self.budget - self.count

    def evaluate(self, x: np.ndarray) -> Evaluation:
        """One noisy evaluation; charges 1."""
        self._charge(1)
        ev = self.task.evaluate(x)
        f = ev.fitness
        bd = ev.descriptor
        if self._sf > 0.0:
            f = f + self.rng.normal(0.0, self._sf)
        if self._sb > 0.0:
            bd = bd + self.rng.normal(0.0, self._sb, bd.shape)
        return Evaluation(f, bd)

    def evaluate_repeated(self, x: np.ndarray, n: int) -> Evaluation:
        """Mean of n noisy evaluations of one genotype; charges n."""
        if n < 1:
            raise ValueError("need at least one evaluation")
        self._charge(n)
        ev = self.task.evaluate(x)
        f = ev.fitness
        bd = ev.descriptor
        if self._sf > 0.0:
            f = f + float(self.rng.normal(0.0, self._sf, n).mean())
        if self._sb > 0.0:
            bd = bd + self.rng.normal(0.0, self._sb, (n, bd.shape[0])).mean(axis=0)
        return Evaluation(f, bd)

    def evaluate_batch(self, X: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """One noisy evaluation per row; charges X.shape[0]."""
        self._charge(X.shape[0])
        f, bd = self.task.evaluate_batch(X)
        if self._sf > 0.0:
            f = f + self.rng.normal(0.0, self._sf, f.shape)
        if self._sb > 0.0:
            bd = bd + self.rng.normal(0.0, self._sb, bd.shape)
        return f, bd
