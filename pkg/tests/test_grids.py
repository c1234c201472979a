import math

import numpy as np
import pytest

from deepgrid.grids import CartesianGrid, PolarGrid


class TestCartesianGrid:
    def setup_method(self):
        self.grid = CartesianGrid((-5.12, -5.12), (5.12, 5.12), (100, 100))

    def test_cell_count(self):
        assert self.grid.n_cells == 10_000

    def test_lower_corner_maps_to_zero(self):
        assert self.grid.locate(np.array([-5.12, -5.12])) == 0

    def test_upper_corner_maps_to_last_cell(self):
        assert self.grid.locate(np.array([5.12, 5.12])) == 9999

    def test_origin_lands_in_upper_half_cell(self):
        # 0.0 sits exactly on the midline; half-open bins put it in bin 50
        assert self.grid.locate(np.array([0.0, 0.0])) == 5050

    def test_row_major_ordering(self):
        # stepping the second coordinate by one cell width moves index by 1,
        # stepping the first moves it by 100
        width = 10.24 / 100
        base = self.grid.locate(np.array([0.0, 0.0]))
        assert self.grid.locate(np.array([0.0, width])) == base + 1
        assert self.grid.locate(np.array([width, 0.0])) == base + 100

    def test_out_of_range_clamps_to_edge_cells(self):
        assert self.grid.locate(np.array([-99.0, -99.0])) == 0
        assert self.grid.locate(np.array([99.0, 99.0])) == 9999
        assert self.grid.locate(np.array([-99.0, 99.0])) == 99
        assert self.grid.locate(np.array([99.0, -99.0])) == 9900

    def test_cell_centers_round_trip(self):
        # the analytic center of every cell must map back to that cell
        grid = CartesianGrid((-1.0, 2.0), (3.0, 4.0), (7, 11))
        widths = (4.0 / 7, 2.0 / 11)
        for i in range(7):
            for j in range(11):
                center = np.array([
                    -1.0 + (i + 0.5) * widths[0],
                    2.0 + (j + 0.5) * widths[1],
                ])
                assert grid.locate(center) == i * 11 + j

    def test_batch_matches_scalar(self):
        rng = np.random.default_rng(5)
        pts = rng.uniform(-6.5, 6.5, size=(5000, 2))
        batch = self.grid.locate_batch(pts)
        scalar = np.array([self.grid.locate(p) for p in pts])
        np.testing.assert_array_equal(batch, scalar)

    def test_mismatched_bounds_rejected(self):
        with pytest.raises(ValueError):
            CartesianGrid((0.0,), (1.0, 1.0), (4, 4))
        with pytest.raises(ValueError):
            CartesianGrid((0.0, 0.0), (0.0, 1.0), (4, 4))
        with pytest.raises(ValueError):
            CartesianGrid((0.0, 0.0), (1.0, 1.0), (4, 0))


def brute_force_polar_locate(bd, center, radius, rings):
    """Independent re-derivation used as the oracle for PolarGrid.locate."""
    dx = bd[0] - center[0]
    dy = bd[1] - center[1]
    r = math.hypot(dx, dy)
    ring = min(int(r / radius * rings), rings - 1)
    sectors = 2 * (2 * ring + 1)
    phi = math.atan2(dy, dx) % (2 * math.pi)
    sector = min(int(phi / (2 * math.pi) * sectors), sectors - 1)
    # cells in rings 0..ring-1: sum of 2(2k+1) = 2*ring^2
    return 2 * ring * ring + sector


class TestPolarGrid:
    def setup_method(self):
        self.grid = PolarGrid(center=(0.0, 0.0), radius=1.0, rings=71)

    def test_cell_count(self):
        assert self.grid.n_cells == 2 * 71 * 71 == 10_082

    def test_sector_counts_follow_odd_rule(self):
        for i in range(71):
            assert self.grid.sectors_in_ring(i) == 2 * (2 * i + 1)
        assert sum(self.grid.sectors_in_ring(i) for i in range(71)) == 10_082

    def test_all_cells_have_equal_area(self):
        # ring i spans radii [i*w, (i+1)*w]; its annulus area pi*w^2*(2i+1)
        # divides over 2(2i+1) sectors into pi*w^2/2 regardless of i
        w = 1.0 / 71
        areas = [
            math.pi * w * w * (2 * i + 1) / self.grid.sectors_in_ring(i)
            for i in range(71)
        ]
        np.testing.assert_allclose(areas, math.pi * w * w / 2, rtol=1e-12)

    def test_origin_maps_to_cell_zero(self):
        assert self.grid.locate(np.array([0.0, 0.0])) == 0

    def test_unit_point_on_positive_axis(self):
        # r = 1.0 clamps into the outer ring; phi = 0 is sector 0 there
        assert self.grid.locate(np.array([1.0, 0.0])) == 2 * 70 * 70

    def test_known_interior_point(self):
        assert self.grid.locate(np.array([0.5, 0.5])) == 5025

    def test_matches_brute_force_oracle(self):
        rng = np.random.default_rng(17)
        pts = rng.uniform(-1.1, 1.1, size=(20_000, 2))
        for p in pts[:2000]:
            expected = brute_force_polar_locate(p, (0.0, 0.0), 1.0, 71)
            assert self.grid.locate(p) == expected

    def test_batch_matches_scalar(self):
        rng = np.random.default_rng(23)
        pts = rng.uniform(-1.2, 1.2, size=(20_000, 2))
        batch = self.grid.locate_batch(pts)
        scalar = np.array([self.grid.locate(p) for p in pts])
        np.testing.assert_array_equal(batch, scalar)

    def test_cell_centers_round_trip(self):
        w = 1.0 / 71
        for ring in range(71):
            m = self.grid.sectors_in_ring(ring)
            r_mid = (ring + 0.5) * w
            for sector in range(m):
                phi_mid = (sector + 0.5) * 2 * math.pi / m
                p = np.array([r_mid * math.cos(phi_mid), r_mid * math.sin(phi_mid)])
                assert self.grid.locate(p) == 2 * ring * ring + sector

    def test_points_outside_radius_clamp_to_outer_ring(self):
        rng = np.random.default_rng(29)
        for _ in range(500):
            phi = rng.uniform(0, 2 * math.pi)
            r = rng.uniform(1.0, 3.0)
            idx = self.grid.locate(np.array([r * math.cos(phi), r * math.sin(phi)]))
            assert idx >= 2 * 70 * 70

    def test_shifted_center(self):
        grid = PolarGrid(center=(2.0, -1.0), radius=0.5, rings=3)
        assert grid.n_cells == 18
        assert grid.locate(np.array([2.0, -1.0])) == 0
        # directly right of center, a third of the radius out: ring 1, phi 0
        assert grid.locate(np.array([2.0 + 0.5 / 2, -1.0])) == 2

    def test_invalid_parameters_rejected(self):
        with pytest.raises(ValueError):
            PolarGrid(radius=0.0)
        with pytest.raises(ValueError):
            PolarGrid(rings=0)
