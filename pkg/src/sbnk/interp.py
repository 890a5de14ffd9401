"""Tensor-product spline interpolation helpers for semi-Lagrangian updates."""

from __future__ import annotations

import numpy as np
from scipy.ndimage import map_coordinates

from sbnk.grid import PhaseGrid

_VPAD = 4  # zero cells padded on each side of every velocity axis


def spatial_interp(
    field: np.ndarray, grid: PhaseGrid, points: np.ndarray, order: int = 3
) -> np.ndarray:
    """Interpolate a periodic scalar spatial field at physical points (d, M)."""
    coords = points / grid.dx  # grid-wrap handles the wrap-around
    return map_coordinates(field, coords, order=order, mode="grid-wrap")


def vector_spatial_interp(
    u: np.ndarray, grid: PhaseGrid, points: np.ndarray, order: int = 3
) -> np.ndarray:
    """Interpolate a periodic vector field (d, *shape_x) at points (d, M)."""
    return np.stack([spatial_interp(u[j], grid, points, order) for j in range(grid.d)])


def phase_interp(
    values: np.ndarray,
    grid: PhaseGrid,
    X: np.ndarray,
    V: np.ndarray,
    order: int = 3,
) -> tuple[np.ndarray, np.ndarray]:
    """Interpolate a phase-space field at points (X, V), each (d, M).

    The field is extended by zero outside the velocity box.  Returns
    ``(samples, out_mask)`` where ``out_mask`` flags points whose velocity
    lies outside the box; their samples are forced to zero.
    """
    padded = np.pad(
        values,
        [(0, 0)] * grid.d + [(_VPAD, _VPAD)] * grid.d,
        mode="constant",
    )
    coords = np.empty((2 * grid.d,) + X.shape[1:])
    for j in range(grid.d):
        coords[j] = X[j] / grid.dx
    out_mask = np.zeros(X.shape[1:], dtype=bool)
    for j in range(grid.d):
        out_mask |= np.abs(V[j]) > grid.Vmax
        cv = (V[j] + grid.Vmax) / grid.dv + _VPAD
        coords[grid.d + j] = np.clip(cv, 0.0, values.shape[grid.d + j] - 1 + 2 * _VPAD)
    samples = map_coordinates(padded, coords, order=order, mode="grid-wrap")
    samples[out_mask] = 0.0
    return samples, out_mask
