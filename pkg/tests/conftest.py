"""Shared fixtures: small grids and seeded random fields."""

from __future__ import annotations

import numpy as np
import pytest

from sbnk.grid import PhaseGrid


@pytest.fixture
def grid1d() -> PhaseGrid:
    return PhaseGrid(d=1, nx=16, nv=64, Vmax=10.0)


@pytest.fixture
def grid2d() -> PhaseGrid:
    return PhaseGrid(d=2, nx=16, nv=16, Vmax=6.0)


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(12345)


def band_limited_field(
    grid: PhaseGrid, rng: np.random.Generator, kmax: int = 3, amp: float = 1.0
) -> np.ndarray:
    """Random real band-limited periodic scalar field on the spatial grid."""
    out = np.zeros(grid.shape_x)
    for _ in range(4):
        ks = rng.integers(-kmax, kmax + 1, size=grid.d)
        phase = rng.uniform(0, 2 * np.pi)
        c = rng.normal() * amp
        arg = phase
        for j in range(grid.d):
            arg = arg + 2 * np.pi * ks[j] * grid.x_axis(j) / grid.Lx
        out = out + c * np.cos(arg) * np.ones(grid.shape_x)
    return out


def divergence_free_field(
    grid: PhaseGrid, rng: np.random.Generator, kmax: int = 3, amp: float = 1.0
) -> np.ndarray:
    """Random band-limited divergence-free vector field (d=1: constant)."""
    if grid.d == 1:
        return np.full((1,) + grid.shape_x, rng.normal() * amp)
    if grid.d == 2:
        psi = band_limited_field(grid, rng, kmax, amp)
        ph = np.fft.fftn(psi)
        u = np.empty((2,) + grid.shape_x)
        u[0] = np.fft.ifftn(1j * grid.wavenumbers(1) * ph).real
        u[1] = -np.fft.ifftn(1j * grid.wavenumbers(0) * ph).real
        return u
    raise NotImplementedError
