"""Parent selection and mutation.

Selection is two-step: a uniformly random occupied cell, then one occupant
of that cell under the variant's in-cell rule.  The fitness-proportional
rule shifts fitnesses so the cell's worst occupant keeps a small floor
weight instead of dropping to zero.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import DeepCell, Individual

IN_CELL_RULES = ("single", "best", "proportional")


@dataclass(frozen=True)
class SelectorSpec:
    """In-cell selection rule plus the floor fraction for the
    proportional rule: weight_i = f_i - f_min + epsilon_fraction * (f_max - f_min).
    """

    rule: str = "proportional"
    epsilon_fraction: float = 0.1

    def __post_init__(self):
        if self.rule not in IN_CELL_RULES:
            raise ValueError(f"rule must be one of {IN_CELL_RULES}")
        if self.epsilon_fraction <= 0:
            raise ValueError("epsilon_fraction must be positive")


@dataclass(frozen=True)
class MutationSpec:
    """Per-gene Gaussian mutation: each gene independently mutates with
    probability ``per_gene_rate``; the step is N(0, (sigma_fraction * range)^2),
    clipped back to the gene bounds.
    """

    per_gene_rate: float
    sigma_fraction: float = 0.1

    def __post_init__(self):
        if not 0.0 < self.per_gene_rate <= 1.0:
            raise ValueError("per_gene_rate must lie in (0, 1]")
        if self.sigma_fraction <= 0:
            raise ValueError("sigma_fraction must be positive")


def select_cell(occupied: list[int], rng: np.random.Generator) -> int:
    """Uniform draw over the non-empty cells."""
    if not occupied:
        raise ValueError("no occupied cells to select from")
    return occupied[int(rng.integers(len(occupied)))]


def best_occupant(occupants: list[Individual]) -> Individual:
    out = occupants[0]
    for ind in occupants[1:]:
        if ind.fitness > out.fitness:
            out = ind
    return out


def select_in_cell(
    cell: DeepCell, spec: SelectorSpec, rng: np.random.Generator
) -> Individual:
    occ = cell.occupants
    if not occ:
        raise ValueError(f"cell {cell.index} is empty")
    if spec.rule == "single":
        if len(occ) != 1:
            raise ValueError(
                f"rule 'single' expects one occupant, cell {cell.index} holds {len(occ)}"
            )
        return occ[0]
    if spec.rule == "best":
        return best_occupant(occ)
    # proportional
    n = len(occ)
    if n == 1:
        return occ[0]
    fmin = fmax = occ[0].fitness
    total = 0.0
    for ind in occ:
        f = ind.fitness
        total += f
        if f < fmin:
            fmin = f
        elif f > fmax:
            fmax = f
    spread = fmax - fmin
    if spread <= 0.0:  # all equal: proportional degenerates to uniform
        return occ[int(rng.integers(n))]
    eps = spec.epsilon_fraction * spread
    total = total - n * fmin + n * eps
    r = rng.random() * total
    acc = 0.0
    for ind in occ:
        acc += ind.fitness - fmin + eps
        if r < acc:
            return ind
    return occ[-1]  # float round-off on the last boundary


def select_in_cell_indices(
    fitnesses: np.ndarray, spec: SelectorSpec, rng: np.random.Generator, n_draws: int
) -> np.ndarray:
    """Vectorized in-cell selection: ``n_draws`` independent draws over a
    cell whose occupants have the given fitnesses.  Same law as
    ``select_in_cell``, used where many draws per cell are needed.
    """
    k = fitnesses.shape[0]
    if k == 0:
        raise ValueError("cell is empty")
    if spec.rule == "single":
        if k != 1:
            raise ValueError(f"rule 'single' expects one occupant, got {k}")
        return np.zeros(n_draws, dtype=np.int64)
    if spec.rule == "best":
        return np.full(n_draws, int(np.argmax(fitnesses)), dtype=np.int64)
    if k == 1:
        return np.zeros(n_draws, dtype=np.int64)
    fmin = fitnesses.min()
    spread = fitnesses.max() - fmin
    if spread <= 0.0:
        return rng.integers(k, size=n_draws)
    w = fitnesses - fmin + spec.epsilon_fraction * spread
    cdf = np.cumsum(w)
    r = rng.random(n_draws) * cdf[-1]
    return np.minimum(np.searchsorted(cdf, r, side="right"), k - 1)


def mutate_batch(
    parents: np.ndarray,
    spec: MutationSpec,
    lower: np.ndarray,
    upper: np.ndarray,
    rng: np.random.Generator,
) -> np.ndarray:
    """Mutate each row independently.  Untouched genes keep the parent's
    exact values; mutated genes are clipped to the bounds.
    """
    sigma = spec.sigma_fraction * (upper - lower)
    fire = rng.random(parents.shape) < spec.per_gene_rate
    steps = rng.normal(0.0, 1.0, parents.shape) * sigma
    out = np.where(fire, np.clip(parents + steps, lower, upper), parents)
    return out


def mutate(
    parent: np.ndarray,
    spec: MutationSpec,
    lower: np.ndarray,
    upper: np.ndarray,
    rng: np.random.Generator,
) -> np.ndarray:
    return mutate_batch(parent[None, :], spec, lower, upper, rng)[0]
