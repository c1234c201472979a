import numpy as np
import pytest
from scipy import stats

from deepgrid.core import DeepCell, Evaluation, Grid, Individual
from deepgrid.grids import CartesianGrid


def small_geometry(cells_per_axis=4):
    return CartesianGrid((0.0, 0.0), (1.0, 1.0), (cells_per_axis, cells_per_axis))


def make_ind(fitness, bd=(0.5, 0.5)):
    return Individual(np.zeros(3), fitness, np.array(bd))


class TestIndividual:
    def test_absorb_tracks_arithmetic_mean(self):
        ind = Individual(np.zeros(2), 1.0, np.array([1.0, 0.0]))
        samples = [(3.0, (0.0, 1.0)), (5.0, (2.0, 2.0)), (-1.0, (1.0, 1.0))]
        for f, bd in samples:
            ind.absorb(Evaluation(f, np.array(bd)))
        all_f = [1.0, 3.0, 5.0, -1.0]
        all_bd = np.array([[1, 0], [0, 1], [2, 2], [1, 1]], dtype=float)
        assert ind.sample_count == 4
        assert ind.fitness == pytest.approx(np.mean(all_f), rel=1e-12)
        np.testing.assert_allclose(ind.descriptor, all_bd.mean(axis=0), rtol=1e-12)

    def test_absorb_stable_over_many_samples(self):
        ind = Individual(np.zeros(1), 10.0, np.zeros(2))
        for _ in range(9999):
            ind.absorb(Evaluation(10.0, np.zeros(2)))
        assert ind.fitness == pytest.approx(10.0, abs=1e-9)
        assert ind.sample_count == 10000


class TestDeepCell:
    def test_best_prefers_highest_fitness(self):
        cell = DeepCell(0, [make_ind(-5.0), make_ind(-1.0), make_ind(-3.0)])
        assert cell.best().fitness == -1.0

    def test_best_tie_keeps_earliest_slot(self):
        first = make_ind(-2.0)
        cell = DeepCell(0, [first, make_ind(-2.0)])
        assert cell.best() is first

    def test_best_of_empty_cell_raises(self):
        with pytest.raises(ValueError):
            DeepCell(3).best()


class TestGridBasics:
    def test_fresh_grid_coverage_zero(self):
        assert Grid(small_geometry(), 1).coverage() == 0

    def test_one_insertion_coverage_one(self):
        grid = Grid(small_geometry(), 1)
        grid.add_occupant(5, make_ind(-1.0))
        assert grid.coverage() == 1

    def test_three_individuals_two_cells(self):
        grid = Grid(small_geometry(), 4)
        grid.add_occupant(2, make_ind(-1.0))
        grid.add_occupant(2, make_ind(-2.0))
        grid.add_occupant(7, make_ind(-3.0))
        assert grid.coverage() == 2
        assert grid.total_occupants() == 3

    def test_depth_below_one_rejected(self):
        with pytest.raises(ValueError):
            Grid(small_geometry(), 0)

    def test_add_beyond_capacity_rejected(self):
        grid = Grid(small_geometry(), 1)
        grid.add_occupant(0, make_ind(-1.0))
        with pytest.raises(ValueError):
            grid.add_occupant(0, make_ind(-2.0))

    def test_out_of_range_cell_rejected(self):
        grid = Grid(small_geometry(), 1)
        with pytest.raises(IndexError):
            grid.add_occupant(16, make_ind(-1.0))

    def test_remove_occupant_by_identity(self):
        grid = Grid(small_geometry(), 2)
        a, b = make_ind(-1.0), make_ind(-1.0)  # equal values, distinct objects
        grid.add_occupant(3, a)
        grid.add_occupant(3, b)
        grid.remove_occupant(3, a)
        assert grid.occupants(3) == [b]
        grid.remove_occupant(3, b)
        assert grid.coverage() == 0
        assert 3 not in grid


class TestInsertReplaceRandom:
    def test_below_capacity_appends_without_eviction(self):
        grid = Grid(small_geometry(), 50)
        ind = make_ind(-1.0)
        assert grid.insert_replace_random(4, ind, np.random.default_rng(0)) is None
        assert grid.occupants(4) == [ind]

    def test_full_depth_one_cell_swaps_sole_occupant(self):
        grid = Grid(small_geometry(), 1)
        old, new = make_ind(-1.0), make_ind(-9.0)
        grid.insert_replace_random(4, old, np.random.default_rng(0))
        evicted = grid.insert_replace_random(4, new, np.random.default_rng(0))
        assert evicted is old
        assert grid.occupants(4) == [new]

    def test_fitness_never_consulted(self):
        # a terrible newcomer still always enters a full depth-1 cell
        grid = Grid(small_geometry(), 1)
        grid.insert_replace_random(0, make_ind(0.0), np.random.default_rng(1))
        evicted = grid.insert_replace_random(0, make_ind(-1e9), np.random.default_rng(1))
        assert evicted is not None
        assert grid.occupants(0)[0].fitness == -1e9

    def test_eviction_uniform_over_slots(self):
        # 1e5 insertions into a full depth-4 cell: per-slot eviction
        # frequency 0.25 +- 0.01 and chi-square p > 0.01
        rng = np.random.default_rng(42)
        grid = Grid(small_geometry(), 4)
        for k in range(4):
            grid.add_occupant(0, make_ind(-float(k)))
        trials = 100_000
        counts = np.zeros(4)
        for _ in range(trials):
            occupants_before = list(grid.occupants(0))
            grid.insert_replace_random(0, make_ind(-1.0), rng)
            evicted_slot = next(
                i for i, ind in enumerate(occupants_before)
                if grid.occupants(0)[i] is not ind
            )
            counts[evicted_slot] += 1
        freqs = counts / trials
        assert np.all(np.abs(freqs - 0.25) <= 0.01)
        assert stats.chisquare(counts).pvalue > 0.01

    def test_capacity_invariant_over_random_operations(self):
        # 1e4 mixed inserts across a small grid never overfill any cell
        rng = np.random.default_rng(7)
        grid = Grid(small_geometry(), 3)
        for _ in range(10_000):
            ci = int(rng.integers(16))
            grid.insert_replace_random(ci, make_ind(float(rng.normal())), rng)
            assert len(grid.occupants(ci)) <= 3
        assert grid.total_occupants() <= 16 * 3
        assert grid.coverage() == 16
        # cells that saw >= depth insertions sit exactly at depth
        assert all(len(grid.occupants(ci)) == 3 for ci in range(16))


class TestInsertElitist:
    def test_empty_cell_accepts(self):
        grid = Grid(small_geometry(), 1)
        assert grid.insert_elitist(2, make_ind(-5.0)) is True
        assert grid.occupants(2)[0].fitness == -5.0

    def test_strict_improvement_replaces(self):
        grid = Grid(small_geometry(), 1)
        grid.insert_elitist(2, make_ind(-5.0))
        assert grid.insert_elitist(2, make_ind(-3.0)) is True
        assert grid.occupants(2)[0].fitness == -3.0

    def test_tie_keeps_incumbent(self):
        grid = Grid(small_geometry(), 1)
        incumbent = make_ind(-5.0)
        grid.insert_elitist(2, incumbent)
        assert grid.insert_elitist(2, make_ind(-5.0)) is False
        assert grid.occupants(2)[0] is incumbent

    def test_incumbent_fitness_never_decreases(self):
        rng = np.random.default_rng(3)
        grid = Grid(small_geometry(), 1)
        best = {}
        for _ in range(2000):
            ci = int(rng.integers(16))
            f = float(rng.normal())
            grid.insert_elitist(ci, make_ind(f))
            best[ci] = max(best.get(ci, -np.inf), f)
            assert grid.occupants(ci)[0].fitness == best[ci]

    def test_depth_above_one_rejected(self):
        grid = Grid(small_geometry(), 2)
        with pytest.raises(ValueError):
            grid.insert_elitist(0, make_ind(-1.0))


def test_occupied_cells_stay_consistent_under_churn():
    rng = np.random.default_rng(11)
    grid = Grid(small_geometry(8), 2)
    alive = {}
    for _ in range(5000):
        ci = int(rng.integers(64))
        if rng.random() < 0.7 or not alive.get(ci):
            ind = make_ind(float(rng.normal()))
            if len(grid.occupants(ci)) < 2:
                grid.add_occupant(ci, ind)
                alive.setdefault(ci, []).append(ind)
            else:
                evicted = grid.insert_replace_random(ci, ind, rng)
                alive[ci].remove(evicted)
                alive[ci].append(ind)
        else:
            victim = alive[ci].pop()
            grid.remove_occupant(ci, victim)
    expected = {ci for ci, occ in alive.items() if occ}
    assert set(grid.occupied_cells()) == expected
    assert grid.coverage() == len(expected)
    assert grid.total_occupants() == sum(len(v) for v in alive.values())
