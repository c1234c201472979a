import math

import numpy as np
import pytest

from deepgrid.grids import CartesianGrid, PolarGrid
from deepgrid.tasks import (
    ZERO_NOISE,
    ArmTask,
    BudgetExhausted,
    NoiseSpec,
    NoisyEvaluator,
    RastriginTask,
    make_task,
)


def fb(task, x):
    ev = task.evaluate(x)
    return ev.fitness, ev.descriptor


class TestRastrigin:
    def setup_method(self):
        self.task = RastriginTask()

    def test_global_optimum_at_origin(self):
        f, bd = fb(self.task, np.zeros(6))
        assert f == 0.0
        np.testing.assert_array_equal(bd, [0.0, 0.0])

    def test_single_offset_half(self):
        # one gene at 0.5: -(0.25 - 10*cos(pi)) = -(0.25 + 10) offset by -60+40... = -20.25
        x = np.zeros(6)
        x[0] = 0.5
        f, bd = fb(self.task, x)
        assert f == pytest.approx(-20.25, abs=1e-12)
        np.testing.assert_array_equal(bd, [0.5, 0.0])

    def test_single_offset_one(self):
        x = np.zeros(6)
        x[3] = 1.0
        f, _ = fb(self.task, x)
        assert f == pytest.approx(-1.0, abs=1e-12)

    def test_descriptor_is_first_two_genes(self):
        rng = np.random.default_rng(0)
        for _ in range(50):
            x = rng.uniform(-5.12, 5.12, 6)
            _, bd = fb(self.task, x)
            np.testing.assert_array_equal(bd, x[:2])

    def test_descriptor_is_a_copy(self):
        x = np.zeros(6)
        _, bd = fb(self.task, x)
        bd[0] = 99.0
        assert x[0] == 0.0

    def test_fitness_within_declared_bounds(self):
        rng = np.random.default_rng(1)
        lo, hi = self.task.fitness_bounds
        X = rng.uniform(-5.12, 5.12, size=(5000, 6))
        F, _ = self.task.evaluate_batch(X)
        assert np.all(F >= lo) and np.all(F <= hi)

    def test_batch_matches_scalar(self):
        rng = np.random.default_rng(2)
        X = rng.uniform(-5.12, 5.12, size=(200, 6))
        F, B = self.task.evaluate_batch(X)
        for i, x in enumerate(X):
            f, bd = fb(self.task, x)
            assert F[i] == f
            np.testing.assert_array_equal(B[i], bd)

    def test_default_geometry(self):
        geo = self.task.default_geometry()
        assert isinstance(geo, CartesianGrid)
        assert geo.n_cells == 10_000
        assert geo.lower == (-5.12, -5.12)
        assert geo.upper == (5.12, 5.12)


class TestArm:
    def setup_method(self):
        self.task = ArmTask()

    def test_straight_up_first_joint(self):
        # first angle pi/2, rest zero: variance of (pi/2, 0 x7) = 7*pi^2/256
        x = np.zeros(8)
        x[0] = math.pi / 2
        f, bd = fb(self.task, x)
        assert f == pytest.approx(-7 * math.pi**2 / 256, abs=1e-12)
        assert bd[0] == pytest.approx(0.0, abs=1e-12)
        assert bd[1] == pytest.approx(1.0, abs=1e-12)

    def test_all_zero_reaches_straight_right(self):
        f, bd = fb(self.task, np.zeros(8))
        assert f == 0.0
        np.testing.assert_allclose(bd, [1.0, 0.0], atol=1e-12)

    def test_equal_angles_have_perfect_fitness(self):
        # zero variance whenever all angles match, regardless of the value
        for c in (-2.0, -0.3, 0.7, 3.0):
            f, _ = fb(self.task, np.full(8, c))
            assert f == pytest.approx(0.0, abs=1e-15)

    def test_endpoint_never_leaves_unit_disk(self):
        rng = np.random.default_rng(3)
        X = rng.uniform(-math.pi, math.pi, size=(5000, 8))
        _, B = self.task.evaluate_batch(X)
        assert np.all(np.hypot(B[:, 0], B[:, 1]) <= 1.0 + 1e-12)

    def test_fitness_within_declared_bounds(self):
        rng = np.random.default_rng(4)
        lo, hi = self.task.fitness_bounds
        X = rng.uniform(-math.pi, math.pi, size=(5000, 8))
        F, _ = self.task.evaluate_batch(X)
        assert np.all(F >= lo) and np.all(F <= hi)

    def test_batch_matches_scalar(self):
        rng = np.random.default_rng(5)
        X = rng.uniform(-math.pi, math.pi, size=(200, 8))
        F, B = self.task.evaluate_batch(X)
        for i, x in enumerate(X):
            f, bd = fb(self.task, x)
            assert F[i] == f
            np.testing.assert_array_equal(B[i], bd)

    def test_default_geometry(self):
        geo = self.task.default_geometry()
        assert isinstance(geo, PolarGrid)
        assert geo.n_cells == 10_082
        assert geo.radius == 1.0

    def test_configurable_joint_count(self):
        task = ArmTask(n_joints=4)
        assert task.genotype_dim == 4
        f, bd = fb(task, np.zeros(4))
        assert f == 0.0
        np.testing.assert_allclose(bd, [1.0, 0.0], atol=1e-12)


def test_make_task():
    assert isinstance(make_task("rastrigin"), RastriginTask)
    assert isinstance(make_task("arm"), ArmTask)
    with pytest.raises(ValueError):
        make_task("unknown")


class TestNoiseSpec:
    def test_std_interpretation_passes_through(self):
        spec = NoiseSpec(fitness=0.05, bd=0.01)
        assert spec.fitness_sigma == 0.05
        assert spec.bd_sigma == 0.01

    def test_variance_interpretation_takes_sqrt(self):
        spec = NoiseSpec(fitness=0.04, bd=0.01, interpretation="variance")
        assert spec.fitness_sigma == pytest.approx(0.2)
        assert spec.bd_sigma == pytest.approx(0.1)

    def test_negative_magnitude_rejected(self):
        with pytest.raises(ValueError):
            NoiseSpec(fitness=-0.1, bd=0.01)

    def test_unknown_interpretation_rejected(self):
        with pytest.raises(ValueError):
            NoiseSpec(fitness=0.1, bd=0.01, interpretation="stddev")


class TestNoisyEvaluator:
    def test_zero_noise_is_exact(self):
        task = RastriginTask()
        ev = NoisyEvaluator(task, ZERO_NOISE, np.random.default_rng(0))
        x = np.array([0.5, 0.0, 0.0, 0.0, 0.0, 0.0])
        res = ev.evaluate(x)
        assert res.fitness == -20.25
        np.testing.assert_array_equal(res.descriptor, [0.5, 0.0])

    def test_fitness_noise_moments(self):
        # 1e5 draws at one point: mean error ~ N(0, sigma/sqrt(n))
        task = RastriginTask()
        spec = NoiseSpec(fitness=0.05, bd=0.01)
        ev = NoisyEvaluator(task, spec, np.random.default_rng(8))
        x = np.zeros(6)
        n = 100_000
        F, B = ev.evaluate_batch(np.tile(x, (n, 1)))
        assert abs(F.mean()) <= 4 * 0.05 / math.sqrt(n)
        assert F.std() == pytest.approx(0.05, rel=0.02)
        for k in range(2):
            assert abs(B[:, k].mean()) <= 4 * 0.01 / math.sqrt(n)
            assert B[:, k].std() == pytest.approx(0.01, rel=0.02)

    def test_bd_noise_independent_across_dimensions(self):
        task = RastriginTask()
        ev = NoisyEvaluator(task, NoiseSpec(0.0, 0.5), np.random.default_rng(9))
        _, B = ev.evaluate_batch(np.zeros((50_000, 6)))
        corr = np.corrcoef(B[:, 0], B[:, 1])[0, 1]
        assert abs(corr) < 0.02

    def test_repeated_evaluation_averages_noise(self):
        task = RastriginTask()
        spec = NoiseSpec(fitness=0.05, bd=0.01)
        ev = NoisyEvaluator(task, spec, np.random.default_rng(10))
        means = np.array([ev.evaluate_repeated(np.zeros(6), 50).fitness for _ in range(2000)])
        # std of the 50-sample mean shrinks by sqrt(50)
        assert means.std() == pytest.approx(0.05 / math.sqrt(50), rel=0.07)

    def test_repeated_zero_noise_matches_single(self):
        task = ArmTask()
        ev = NoisyEvaluator(task, ZERO_NOISE, np.random.default_rng(11))
        x = np.full(8, 0.25)
        single = ev.evaluate(x)
        repeated = ev.evaluate_repeated(x, 50)
        assert repeated.fitness == single.fitness
        np.testing.assert_array_equal(repeated.descriptor, single.descriptor)

    def test_count_tracks_conceptual_evaluations(self):
        task = RastriginTask()
        ev = NoisyEvaluator(task, ZERO_NOISE, np.random.default_rng(12))
        ev.evaluate(np.zeros(6))
        ev.evaluate_repeated(np.zeros(6), 50)
        ev.evaluate_batch(np.zeros((30, 6)))
        assert ev.count == 1 + 50 + 30

    def test_budget_enforced(self):
        task = RastriginTask()
        ev = NoisyEvaluator(task, ZERO_NOISE, np.random.default_rng(13), budget=10)
        assert ev.can_afford(10)
        assert not ev.can_afford(11)
        ev.evaluate_batch(np.zeros((10, 6)))
        assert ev.remaining() == 0
        with pytest.raises(BudgetExhausted):
            ev.evaluate(np.zeros(6))
        assert ev.count == 10  # the failed call charges nothing

    def test_budget_rejects_unaffordable_batch_without_partial_charge(self):
        task = RastriginTask()
        ev = NoisyEvaluator(task, ZERO_NOISE, np.random.default_rng(14), budget=5)
        with pytest.raises(BudgetExhausted):
            ev.evaluate_repeated(np.zeros(6), 6)
        assert ev.count == 0

    def test_unlimited_budget_by_default(self):
        task = RastriginTask()
        ev = NoisyEvaluator(task, ZERO_NOISE, np.random.default_rng(15))
        assert ev.can_afford(10**9)
        assert ev.remaining() is None

    def test_same_seed_reproduces_noise(self):
        task = RastriginTask()
        spec = NoiseSpec(fitness=0.05, bd=0.01)
        a = NoisyEvaluator(task, spec, np.random.default_rng(77))
        b = NoisyEvaluator(task, spec, np.random.default_rng(77))
        x = np.linspace(-1, 1, 6)
        ra, rb = a.evaluate(x), b.evaluate(x)
        assert ra.fitness == rb.fitness
        np.testing.assert_array_equal(ra.descriptor, rb.descriptor)
