"""The compared algorithm variants behind one generation-loop interface.

All variants share the same skeleton: draw parents by two-step selection,
mutate the batch, then admit each offspring one at a time.  They differ in
how an offspring is evaluated and how it enters the grid:

- deep_grid: one noisy evaluation, unconditional insertion into a depth-D
  cell with uniform random replacement when full.
- naive: mean of N_samples noisy evaluations, elitist depth-1 insertion.
- adaptive: one noisy evaluation, then a sequential sampling duel against
  the incumbent; elites stay in the cell where they were first placed.
- adaptive_drift: as adaptive, but cells hold a fitness-ranked list of up
  to D individuals, challenge losers may join the list, and any individual
  whose re-sampled mean descriptor leaves its cell is relocated.

Budgets are enforced cooperatively: every path checks affordability before
evaluating, so a loop never overdraws its evaluator.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass

import numpy as np

from .core import Grid, Individual
from .grids import Geometry
from .selection import (
    MutationSpec,
    SelectorSpec,
    mutate_batch,
    select_cell,
    select_in_cell,
)
from .tasks import NoisyEvaluator, Task

VARIANTS = ("deep_grid", "naive", "adaptive", "adaptive_drift")

# In-cell parent selection per variant; the same rule drives measurement
# draws, so it lives with the variant rather than in configuration.
IN_CELL_RULE = {
    "deep_grid": "proportional",
    "naive": "single",
    "adaptive": "single",
    "adaptive_drift": "best",
}


@dataclass(frozen=True)
class AlgorithmSpec:
    variant: str
    depth: int
    mutation: MutationSpec
    batch_size: int = 100
    n_samples: int = 1
    epsilon_fraction: float = 0.1

    def __post_init__(self):
        if self.variant not in VARIANTS:
            raise ValueError(f"variant must be one of {VARIANTS}")
        if self.batch_size < 1:
            raise ValueError("batch_size must be >= 1")
        if self.n_samples < 1:
            raise ValueError("n_samples must be >= 1")
        if self.variant != "naive" and self.n_samples != 1:
            raise ValueError("n_samples only applies to the naive variant")
        if self.depth < 1:
            raise ValueError("depth must be >= 1")
        if self.variant in ("naive", "adaptive") and self.depth != 1:
            raise ValueError(f"variant {self.variant!r} requires depth 1")
        if self.variant == "adaptive_drift" and self.depth < 2:
            raise ValueError("adaptive_drift requires depth >= 2")

    @property
    def selector(self) -> SelectorSpec:
        return SelectorSpec(IN_CELL_RULE[self.variant], self.epsilon_fraction)


def adaptive_challenge(
    elite: Individual, challenger: Individual, evaluator: NoisyEvaluator
) -> str:
    """Sequential sampling duel, one re-evaluation at a time.

    The challenger is re-evaluated while its running mean stays at or above
    the elite's and its sample count lags behind; the moment its mean dips
    below, it loses and the elite is re-evaluated once.  With matched counts
    the challenger wins only on a strictly higher mean.  Returns "replace"
    or "reject".  Every re-evaluation charges the evaluator; if the budget
    runs dry mid-duel the challenge resolves as a rejection (without the
    consolation re-sample if that is unaffordable too).
    """
    while (
        challenger.fitness >= elite.fitness
        and challenger.sample_count < elite.sample_count
    ):
        if not evaluator.can_afford(1):
            return "reject"
        challenger.absorb(evaluator.evaluate(challenger.genotype))
    if challenger.fitness < elite.fitness:
        if evaluator.can_afford(1):
            elite.absorb(evaluator.evaluate(elite.genotype))
        return "reject"
    if challenger.fitness > elite.fitness:
        return "replace"
    return "reject"  # exact tie keeps the incumbent


class GenerationLoop:
    """Shared run state and generation skeleton for all variants."""

    def __init__(
        self,
        task: Task,
        geometry: Geometry,
        spec: AlgorithmSpec,
        evaluator: NoisyEvaluator,
        variation_rng: np.random.Generator,
        selection_rng: np.random.Generator,
    ):
        self.task = task
        self.geometry = geometry
        self.spec = spec
        self.evaluator = evaluator
        self.variation_rng = variation_rng
        self.selection_rng = selection_rng
        self.grid = Grid(geometry, spec.depth)
        self.selector = spec.selector
        self.generations = 0

    @property
    def evaluations_used(self) -> int:
        return self.evaluator.count

    def admit_cost(self) -> int:
        """Minimum evaluations needed to admit one offspring."""
        return 1

    def generation_cost(self) -> int:
        """Minimum evaluations needed to start a generation."""
        return self.spec.batch_size * self.admit_cost()

    def admit(self, genotype: np.ndarray) -> bool:
        """Evaluate one candidate per the variant's rule and insert it.
        Returns whether it was stored."""
        raise NotImplementedError

    def initialize(self, n: int) -> None:
        """Admit n uniform random genotypes.  Counts as the first generation."""
        if n < 1:
            raise ValueError("initialization needs at least one genotype")
        X = self.variation_rng.uniform(
            self.task.gene_lower, self.task.gene_upper, (n, self.task.genotype_dim)
        )
        self._admit_all(X)
        self.generations += 1

    def run_generation(self) -> None:
        spec = self.spec
        occupied = self.grid.occupied_cells()
        parents = np.empty((spec.batch_size, self.task.genotype_dim))
        for i in range(spec.batch_size):
            ci = select_cell(occupied, self.selection_rng)
            ind = select_in_cell(self.grid.cell(ci), self.selector, self.selection_rng)
            parents[i] = ind.genotype
        offspring = mutate_batch(
            parents,
            spec.mutation,
            self.task.gene_lower,
            self.task.gene_upper,
            self.variation_rng,
        )
        self._admit_all(offspring)
        self.generations += 1

    def _admit_all(self, X: np.ndarray) -> None:
        cost = self.admit_cost()
        for row in X:
            # challenges can drain the budget mid-batch; stop cleanly
            if not self.evaluator.can_afford(cost):
                break
            self.admit(row)


class DeepGridLoop(GenerationLoop):
    def admit(self, genotype: np.ndarray) -> bool:
        ev = self.evaluator.evaluate(genotype)
        ind = Individual(np.array(genotype), ev.fitness, ev.descriptor)
        ci = self.geometry.locate(ev.descriptor)
        self.grid.insert_replace_random(ci, ind, self.selection_rng)
        return True


class NaiveLoop(GenerationLoop):
    def admit_cost(self) -> int:
        return self.spec.n_samples

    def admit(self, genotype: np.ndarray) -> bool:
        n = self.spec.n_samples
        ev = self.evaluator.evaluate_repeated(genotype, n)
        ind = Individual(np.array(genotype), ev.fitness, ev.descriptor, n)
        ci = self.geometry.locate(ev.descriptor)
        return self.grid.insert_elitist(ci, ind)


class AdaptiveLoop(GenerationLoop):
    """Duel-based acceptance with elites pinned to their original cell."""

    def admit(self, genotype: np.ndarray) -> bool:
        ev = self.evaluator.evaluate(genotype)
        ind = Individual(np.array(genotype), ev.fitness, ev.descriptor)
        ci = self.geometry.locate(ev.descriptor)
        occ = self.grid.occupants(ci)
        if not occ:
            self.grid.add_occupant(ci, ind)
            return True
        if adaptive_challenge(occ[0], ind, self.evaluator) == "replace":
            occ[0] = ind
            return True
        return False


class AdaptiveDriftLoop(GenerationLoop):
    """Duel-based acceptance over fitness-ranked depth-D cells, with
    relocation of individuals whose mean descriptor leaves their cell.

    ``_where`` tracks each stored individual's cell by object identity;
    entries are deleted the moment an individual leaves storage, so stale
    ids can never alias a live object.
    """

    def __init__(self, *args):
        super().__init__(*args)
        self._where: dict[int, int] = {}
        self._queue: deque[Individual] = deque()
        self.drift_count = 0

    def admit(self, genotype: np.ndarray) -> bool:
        ev = self.evaluator.evaluate(genotype)
        ind = Individual(np.array(genotype), ev.fitness, ev.descriptor)
        stored = self._place(ind, self.geometry.locate(ev.descriptor))
        self._settle_drifts()
        return stored

    # -- ranked-cell bookkeeping ----------------------------------------

    def _ranked_insert(self, ci: int, ind: Individual) -> bool:
        """Insert at fitness rank; on overflow the worst occupant drops.
        Ties rank below incumbents, so matching the worst of a full cell
        is not enough to enter."""
        occ = self.grid.occupants(ci)
        if not occ:
            self.grid.add_occupant(ci, ind)
            self._where[id(ind)] = ci
            return True
        pos = 0
        while pos < len(occ) and occ[pos].fitness >= ind.fitness:
            pos += 1
        occ.insert(pos, ind)
        self._where[id(ind)] = ci
        if len(occ) > self.grid.depth:
            worst = occ.pop()
            del self._where[id(worst)]
            if worst is ind:
                return False
        return True

    def _unstore(self, ci: int, ind: Individual) -> None:
        self.grid.remove_occupant(ci, ind)
        del self._where[id(ind)]

    def _rerank(self, ci: int, ind: Individual) -> None:
        """Restore rank order after ``ind``'s mean fitness changed."""
        occ = self.grid.occupants(ci)
        if len(occ) < 2:
            return
        for i, cand in enumerate(occ):
            if cand is ind:
                del occ[i]
                break
        pos = 0
        while pos < len(occ) and occ[pos].fitness >= ind.fitness:
            pos += 1
        occ.insert(pos, ind)

    # -- placement ------------------------------------------------------

    def _place(self, ind: Individual, ci: int) -> bool:
        occ = self.grid.occupants(ci)
        if not occ:
            self.grid.add_occupant(ci, ind)
            self._where[id(ind)] = ci
            return True
        elite = occ[0]
        elite_count = elite.sample_count
        ind_count = ind.sample_count
        outcome = adaptive_challenge(elite, ind, self.evaluator)
        if outcome == "replace":
            self._unstore(ci, elite)
            stored = self._ranked_insert(ci, ind)
            self._ranked_insert(ci, elite)  # dethroned, not discarded
        else:
            if elite.sample_count != elite_count:
                self._rerank(ci, elite)
                self._queue.append(elite)
            stored = self._ranked_insert(ci, ind)
        if stored and ind.sample_count != ind_count:
            self._queue.append(ind)
        return stored

    def _settle_drifts(self) -> None:
        """Relocate every re-sampled individual whose mean descriptor now
        maps to a different cell; cascades run to a fixed point."""
        while self._queue:
            ind = self._queue.popleft()
            ci = self._where.get(id(ind))
            if ci is None:
                continue  # dropped from storage since it was queued
            target = self.geometry.locate(ind.descriptor)
            if target == ci:
                continue
            self.drift_count += 1
            self._unstore(ci, ind)
            self._place(ind, target)


_LOOPS = {
    "deep_grid": DeepGridLoop,
    "naive": NaiveLoop,
    "adaptive": AdaptiveLoop,
    "adaptive_drift": AdaptiveDriftLoop,
}


def build_loop(
    task: Task,
    geometry: Geometry,
    spec: AlgorithmSpec,
    evaluator: NoisyEvaluator,
    variation_rng: np.random.Generator,
    selection_rng: np.random.Generator,
) -> GenerationLoop:
    cls = _LOOPS[spec.variant]
    return cls(task, geometry, spec, evaluator, variation_rng, selection_rng)
