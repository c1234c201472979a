"""Core containers: individuals, depth-D cells, and the behavioural grid.

A grid maps each cell index to a bounded list of occupants.  Depth 1 gives
the classic elitist archive; depth D > 1 keeps D slots per cell and replaces
a uniformly random occupant once the cell is full.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


@dataclass(frozen=True, slots=True)
class Evaluation:
    """Outcome of evaluating one genotype once (possibly under noise)."""

    fitness: float
    descriptor: np.ndarray


@dataclass(slots=True, eq=False)
class Individual:
    """A stored solution.

    fitness/descriptor hold the mean over ``sample_count`` evaluations; for
    single-evaluation variants that is just the one noisy draw.
    """

    genotype: np.ndarray
    fitness: float
    descriptor: np.ndarray
    sample_count: int = 1

    def absorb(self, ev: Evaluation) -> None:
        """Fold one more evaluation into the running means.

        Incremental form (mean += (x - mean)/n) stays numerically stable
        when sample counts grow large.
        """
        n = self.sample_count + 1
        self.sample_count = n
        self.fitness += (ev.fitness - self.fitness) / n
        self.descriptor = self.descriptor + (ev.descriptor - self.descriptor) / n


@dataclass(slots=True)
class DeepCell:
    """Occupants of one grid cell, at most ``depth`` of them."""

    index: int
    occupants: list[Individual] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.occupants)

    def best(self) -> Individual:
        """Highest-fitness occupant; earliest slot wins ties."""
        if not self.occupants:
            raise ValueError(f"cell {self.index} is empty")
        out = self.occupants[0]
        for ind in self.occupants[1:]:
            if ind.fitness > out.fitness:
                out = ind
        return out


class Grid:
    """Sparse collection of DeepCells over a fixed cell geometry.

    Only non-empty cells are materialized.  ``occupied_cells`` keeps an
    index list alongside a position map so uniform cell selection and
    cell removal are both O(1).
    """

    def __init__(self, geometry, depth: int):
        if depth < 1:
            raise ValueError("cell depth must be >= 1")
        self.geometry = geometry
        self.n_cells = geometry.n_cells
        self.depth = depth
        self._cells: dict[int, DeepCell] = {}
        self._occupied: list[int] = []
        self._occupied_pos: dict[int, int] = {}

    # -- read side -------------------------------------------------------

    def cell(self, index: int) -> DeepCell | None:
        return self._cells.get(index)

    def occupants(self, index: int) -> list[Individual]:
        c = self._cells.get(index)
        return c.occupants if c is not None else []

    def occupied_cells(self) -> list[int]:
        """Indices of non-empty cells, in insertion order.  Do not mutate."""
        return self._occupied

    def coverage(self) -> int:
        return len(self._occupied)

    def total_occupants(self) -> int:
        return sum(len(c.occupants) for c in self._cells.values())

    def __contains__(self, index: int) -> bool:
        return index in self._cells

    # -- write side ------------------------------------------------------

    def _materialize(self, index: int) -> DeepCell:
        c = self._cells.get(index)
        if c is None:
            if not 0 <= index < self.n_cells:
                raise IndexError(f"cell index {index} outside [0, {self.n_cells})")
            c = DeepCell(index)
            self._cells[index] = c
            self._occupied_pos[index] = len(self._occupied)
            self._occupied.append(index)
        return c

    def _drop_if_empty(self, index: int) -> None:
        c = self._cells.get(index)
        if c is None or c.occupants:
            return
        del self._cells[index]
        # swap-remove from the occupied list, patching the moved entry's position
        pos = self._occupied_pos.pop(index)
        last = self._occupied.pop()
        if last != index:
            self._occupied[pos] = last
            self._occupied_pos[last] = pos

    def add_occupant(self, index: int, ind: Individual) -> None:
        """Append to a cell with free capacity."""
        c = self._materialize(index)
        if len(c.occupants) >= self.depth:
            raise ValueError(f"cell {index} already holds {self.depth} occupants")
        c.occupants.append(ind)

    def remove_occupant(self, index: int, ind: Individual) -> None:
        """Remove this exact occupant (identity, not value equality)."""
        c = self._cells.get(index)
        if c is None:
            raise KeyError(f"cell {index} is empty")
        for i, cand in enumerate(c.occupants):
            if cand is ind:
                del c.occupants[i]
                self._drop_if_empty(index)
                return
        raise ValueError(f"occupant not present in cell {index}")

    def insert_replace_random(
        self, index: int, ind: Individual, rng: np.random.Generator
    ) -> Individual | None:
        """Unconditional insert: fill a free slot, else evict a uniformly
        random occupant.  Returns the evictee, or None if none was displaced.
        """
        c = self._materialize(index)
        occ = c.occupants
        if len(occ) < self.depth:
            occ.append(ind)
            return None
        k = int(rng.integers(len(occ)))
        evicted = occ[k]
        occ[k] = ind
        return evicted

    def insert_elitist(self, index: int, ind: Individual) -> bool:
        """Depth-1 rule: keep the strictly better of incumbent and candidate.

        Returns True when the candidate was stored (empty cell or strict
        improvement).  Ties keep the incumbent.
        """
        if self.depth != 1:
            raise ValueError("elitist insertion requires depth 1")
        c = self._cells.get(index)
        if c is None or not c.occupants:
            self._materialize(index).occupants.append(ind)
            return True
        if ind.fitness > c.occupants[0].fitness:
            c.occupants[0] = ind
            return True
        return False
