"""Grids, weighted/Sobolev norms, and spectral operators."""

import numpy as np
import pytest

from conftest import band_limited_field
from sbnk.grid import Distribution, GridError, PhaseGrid, WeightParams
from sbnk.norms import (
    l2_norm,
    sobolev_norm,
    weighted_sup_norm,
    weighted_w1inf_norm,
)
from sbnk.operators import advect, divergence, gradient, laplacian


def maxwellian_1d_profile(v: np.ndarray, T: float = 1.0) -> np.ndarray:
    return np.exp(-(v**2) / (2.0 * T)) / np.sqrt(2.0 * np.pi * T)


class TestPhaseGrid:
    def test_rejects_bad_dimension(self):
        with pytest.raises(GridError):
            PhaseGrid(d=4, nx=8, nv=8)

    def test_rejects_odd_counts(self):
        with pytest.raises(GridError):
            PhaseGrid(d=1, nx=7, nv=8)
        with pytest.raises(GridError):
            PhaseGrid(d=1, nx=8, nv=9)
        with pytest.raises(GridError):
            PhaseGrid(d=1, nx=8, nv=2)

    def test_spacings(self):
        g = PhaseGrid(d=1, nx=8, nv=16, Lx=2.0, Vmax=4.0)
        assert g.dx == 0.25
        # endpoints at +-Vmax inclusive
        assert g.dv * (g.nv - 1) == pytest.approx(2.0 * g.Vmax)
        assert g.v_nodes[0] == -4.0 and g.v_nodes[-1] == 4.0
        assert np.allclose(g.v_nodes, -g.v_nodes[::-1])

    def test_weight_params_dimension_guard(self):
        WeightParams(q=6.0).validate_for_dim(1)
        with pytest.raises(ValueError):
            WeightParams(q=4.0).validate_for_dim(3)


class TestWeightedSupNorm:
    def test_weight_cancels_profile(self, grid1d):
        vals = np.broadcast_to(
            (1.0 + grid1d.v_mag) ** (-6.0), grid1d.shape_phase
        ).copy()
        f = Distribution(grid1d, vals)
        assert weighted_sup_norm(f, 6.0) == pytest.approx(1.0, abs=1e-14)

    def test_zero_field(self, grid1d):
        f = Distribution(grid1d, np.zeros(grid1d.shape_phase))
        assert weighted_sup_norm(f, 6.0) == 0.0

    def test_maxwellian_against_refined_oracle(self):
        # independent dense scan at 4x resolution
        g = PhaseGrid(d=1, nx=8, nv=128, Vmax=10.0)
        vals = np.broadcast_to(
            maxwellian_1d_profile(g.v_nodes), g.shape_phase
        ).copy()
        norm = weighted_sup_norm(Distribution(g, vals), 6.0)
        v_fine = np.linspace(-10.0, 10.0, 4 * 128)
        oracle = np.max((1.0 + np.abs(v_fine)) ** 6 * maxwellian_1d_profile(v_fine))
        assert norm == pytest.approx(oracle, rel=1e-3)

    def test_homogeneity(self, grid1d, rng):
        vals = rng.random(grid1d.shape_phase)
        f = Distribution(grid1d, vals)
        cf = Distribution(grid1d, 3.5 * vals)
        assert weighted_sup_norm(cf, 6.0) == pytest.approx(
            3.5 * weighted_sup_norm(f, 6.0), rel=1e-15
        )

    def test_monotonicity(self, grid1d, rng):
        a = rng.random(grid1d.shape_phase)
        b = a + rng.random(grid1d.shape_phase)
        na = weighted_sup_norm(Distribution(grid1d, a), 6.0)
        nb = weighted_sup_norm(Distribution(grid1d, b), 6.0)
        assert na <= nb

    def test_nonfinite_rejected(self, grid1d):
        vals = np.zeros(grid1d.shape_phase)
        vals[0, 0] = np.nan
        with pytest.raises(ValueError, match="non-finite field"):
            weighted_sup_norm(Distribution(grid1d, vals), 6.0)


class TestWeightedW1InfNorm:
    def test_zero_field(self, grid1d):
        f = Distribution(grid1d, np.zeros(grid1d.shape_phase))
        assert weighted_w1inf_norm(f, 6.0) == 0.0

    def test_maxwellian_against_refined_oracle(self):
        g = PhaseGrid(d=1, nx=8, nv=128, Vmax=10.0)
        vals = np.broadcast_to(
            maxwellian_1d_profile(g.v_nodes), g.shape_phase
        ).copy()
        norm = weighted_w1inf_norm(Distribution(g, vals), 6.0)
        v_fine = np.linspace(-10.0, 10.0, 4 * 128)
        prof = maxwellian_1d_profile(v_fine)
        w = (1.0 + np.abs(v_fine)) ** 6
        # x-derivatives vanish; v-derivative analytic: -v * M(v)
        oracle = np.max(w * prof) + np.max(w * np.abs(-v_fine * prof))
        assert norm == pytest.approx(oracle, rel=1e-2)


class TestSobolevNorm:
    def test_constant_field(self, grid2d):
        g = grid2d
        c = 2.5
        field = np.full(g.shape_x, c)
        for s in (0, 1, 2, 3):
            assert sobolev_norm(field, s, g) == pytest.approx(
                c * g.Lx ** (g.d / 2.0), rel=1e-12
            )

    def test_single_mode_analytic(self):
        g = PhaseGrid(d=1, nx=32, nv=8, Lx=1.0)
        x = g.x_nodes
        field = np.sin(2.0 * np.pi * x)
        k = 2.0 * np.pi
        expected = np.sqrt(0.5 + k**2 * 0.5)
        assert sobolev_norm(field, 1, g) == pytest.approx(expected, rel=1e-12)

    def test_s0_equals_l2(self, grid2d, rng):
        field = band_limited_field(grid2d, rng)
        assert sobolev_norm(field, 0, grid2d) == pytest.approx(
            l2_norm(field, grid2d), rel=1e-12
        )

    def test_band_limited_vs_refined_fd_quadrature(self, rng):
        g = PhaseGrid(d=1, nx=32, nv=8)
        field = band_limited_field(g, rng, kmax=3)
        norm = sobolev_norm(field, 2, g)
        # finite-difference oracle at 4x resolution, trapezoid-free periodic sum
        g4 = PhaseGrid(d=1, nx=128, nv=8)
        f4 = band_limited_field(g4, np.random.default_rng(12345), kmax=3)
        dx = g4.dx
        d1 = (np.roll(f4, -1) - np.roll(f4, 1)) / (2 * dx)
        d2 = (np.roll(f4, -1) - 2 * f4 + np.roll(f4, 1)) / dx**2
        oracle = np.sqrt(np.sum(f4**2 + d1**2 + d2**2) * dx)
        assert norm == pytest.approx(oracle, rel=1e-3)

    def test_unsupported_order(self, grid1d):
        with pytest.raises(ValueError, match="unsupported Sobolev order"):
            sobolev_norm(np.zeros(grid1d.shape_x), 4, grid1d)


class TestSpectralOperators:
    def test_constants_annihilated(self, grid2d):
        g = grid2d
        u = np.full((g.d,) + g.shape_x, 3.0)
        assert np.max(np.abs(divergence(u, g))) < 1e-13
        assert np.max(np.abs(gradient(np.full(g.shape_x, 2.0), g))) < 1e-13
        assert np.max(np.abs(laplacian(u, g))) < 1e-12

    def test_single_mode_exact(self):
        g = PhaseGrid(d=2, nx=16, nv=8)
        k = 2.0 * np.pi / g.Lx
        u = np.zeros((2,) + g.shape_x)
        u[0] = np.sin(k * g.x_axis(0)) * np.ones(g.shape_x)
        div = divergence(u, g)
        expected = k * np.cos(k * g.x_axis(0)) * np.ones(g.shape_x)
        assert np.max(np.abs(div - expected)) < 1e-11

    def test_band_limited_modewise_oracle(self, rng):
        g = PhaseGrid(d=1, nx=32, nv=8)
        ks = [1, 3, 5]
        cs = rng.normal(size=3)
        x = g.x_nodes
        field = sum(c * np.sin(2 * np.pi * k * x) for c, k in zip(cs, ks))
        grad = gradient(field, g)[0]
        oracle = sum(
            c * 2 * np.pi * k * np.cos(2 * np.pi * k * x) for c, k in zip(cs, ks)
        )
        assert np.max(np.abs(grad - oracle)) < 1e-12 * max(1.0, np.max(np.abs(oracle)))

    def test_advect_matches_manual(self, grid2d, rng):
        g = grid2d
        u = np.stack([band_limited_field(g, rng), band_limited_field(g, rng)])
        ua = np.stack([band_limited_field(g, rng), band_limited_field(g, rng)])
        out = advect(ua, u, g)
        for i in range(2):
            gi = gradient(u[i], g)
            manual = ua[0] * gi[0] + ua[1] * gi[1]
            assert np.allclose(out[i], manual, atol=1e-12)
