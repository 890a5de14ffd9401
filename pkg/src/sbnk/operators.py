"""Spectral differential operators on periodic spatial fields.

Scalar fields have shape ``grid.shape_x``; vector fields carry a leading
component axis of length ``grid.d``.  All operators are exact on resolved
Fourier modes and annihilate constants exactly.
"""

from __future__ import annotations

import numpy as np

from sbnk.grid import PhaseGrid


def _check_finite(field: np.ndarray) -> None:
    if not np.all(np.isfinite(field)):
        raise ValueError("non-finite field")


def gradient(field: np.ndarray, grid: PhaseGrid) -> np.ndarray:
    """Spectral gradient of a scalar field; returns shape (d, *shape_x)."""
    _check_finite(field)
    fh = np.fft.fftn(field)
    out = np.empty((grid.d,) + grid.shape_x)
    for j in range(grid.d):
        out[j] = np.fft.ifftn(1j * grid.wavenumbers(j) * fh).real
    return out


def divergence(u: np.ndarray, grid: PhaseGrid) -> np.ndarray:
    """Spectral divergence of a vector field (d, *shape_x) -> scalar field."""
    _check_finite(u)
    out = np.zeros(grid.shape_x)
    for j in range(grid.d):
        out += np.fft.ifftn(1j * grid.wavenumbers(j) * np.fft.fftn(u[j])).real
    return out


def laplacian(field: np.ndarray, grid: PhaseGrid) -> np.ndarray:
    """Spectral Laplacian; applies componentwise to vector fields."""
    _check_finite(field)
    if field.shape == (grid.d,) + grid.shape_x:
        return np.stack([laplacian(field[j], grid) for j in range(grid.d)])
    fh = np.fft.fftn(field)
    return np.fft.ifftn(-grid.k_squared * fh).real


def advect(u_adv: np.ndarray, u: np.ndarray, grid: PhaseGrid) -> np.ndarray:
    """(u_adv . grad) u for vector fields, spectral derivatives."""
    grads = [gradient(u[i], grid) for i in range(grid.d)]
    out = np.zeros_like(u)
    for i in range(grid.d):
        for j in range(grid.d):
            out[i] += u_adv[j] * grads[i][j]
    return out
