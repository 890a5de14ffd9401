"""Weighted sup norms on phase space and Sobolev norms on the torus."""

from __future__ import annotations

import itertools

import numpy as np

from sbnk.grid import Distribution, PhaseGrid


def _check_finite(a: np.ndarray) -> None:
    if not np.all(np.isfinite(a)):
        raise ValueError("non-finite field")


def weighted_sup_norm(f: Distribution, q: float) -> float:
    """sup over grid nodes of (1 + |v|)^q |f(x, v)|."""
    _check_finite(f.values)
    w = f.grid.velocity_weight(q)
    return float(np.max(np.abs(f.values) * w))


def phase_gradients(f: Distribution) -> tuple[np.ndarray, np.ndarray]:
    """First finite-difference derivatives of f in x and in v.

    Returns (grad_x, grad_v), each of shape (d, *shape_phase).  Spatial
    derivatives are centered and periodic; velocity derivatives are centered
    in the interior with second-order one-sided stencils at the box edges.
    """
    g = f.grid
    vals = f.values
    grad_x = np.empty((g.d,) + g.shape_phase)
    for j in range(g.d):
        grad_x[j] = (np.roll(vals, -1, axis=j) - np.roll(vals, 1, axis=j)) / (2.0 * g.dx)
    grad_v = np.empty((g.d,) + g.shape_phase)
    for j in range(g.d):
        grad_v[j] = np.gradient(vals, g.dv, axis=g.d + j, edge_order=2)
    return grad_x, grad_v


def weighted_w1inf_norm(f: Distribution, q: float) -> float:
    """Weighted sup norm of f plus those of all first x- and v-derivatives."""
    _check_finite(f.values)
    g = f.grid
    if g.nx < 4 or g.nv < 4:
        raise ValueError("grid too coarse for finite-difference derivatives")
    w = g.velocity_weight(q)
    total = float(np.max(np.abs(f.values) * w))
    grad_x, grad_v = phase_gradients(f)
    for j in range(g.d):
        total += float(np.max(np.abs(grad_x[j]) * w))
        total += float(np.max(np.abs(grad_v[j]) * w))
    return total


def l2_norm(field: np.ndarray, grid: PhaseGrid) -> float:
    """Discrete L^2(T^d) norm; accepts scalar or vector (leading-axis) fields."""
    _check_finite(field)
    return float(np.sqrt(np.sum(field**2) * grid.cell_volume_x))


def sobolev_norm(field: np.ndarray, s: int, grid: PhaseGrid) -> float:
    """H^s norm: (sum over multi-indices |alpha| <= s of ||d^alpha g||_L2^2)^(1/2).

    Derivatives are evaluated spectrally.  ``field`` may be scalar
    (shape_x) or vector ((d, *shape_x)); vector norms sum over components.
    """
    if s not in (0, 1, 2, 3):
        raise ValueError(f"unsupported Sobolev order {s}")
    _check_finite(field)
    if field.shape == (grid.d,) + grid.shape_x:
        return float(np.sqrt(sum(sobolev_norm(field[j], s, grid) ** 2 for j in range(grid.d))))
    if field.shape != grid.shape_x:
        raise ValueError(f"field shape {field.shape} does not match grid {grid.shape_x}")

    fh = np.fft.fftn(field)
    power = np.abs(fh) ** 2
    # Parseval: sum |g|^2 dx^d == sum |gh|^2 dx^d / N
    norm_factor = grid.cell_volume_x / field.size
    total = 0.0
    ks = [grid.wavenumbers(j) for j in range(grid.d)]
    for order in range(s + 1):
        for alpha in itertools.product(range(order + 1), repeat=grid.d):
            if sum(alpha) != order:
                continue
            sym = np.ones(grid.shape_x)
            for j, aj in enumerate(alpha):
                if aj:
                    sym = sym * ks[j] ** (2 * aj)
            total += float(np.sum(sym * power)) * norm_factor
    return float(np.sqrt(total))
