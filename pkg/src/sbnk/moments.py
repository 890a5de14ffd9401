"""Macroscopic moments, local Maxwellian projection, and the relaxation right-hand side.

All formulas are dimension-generic: the temperature normalization divides the
centered second moment by d * rho, and the Gaussian normalization uses
(2 pi T)^(d/2).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from sbnk.grid import Distribution, PhaseGrid

RHO_FLOOR = 1e-12


@dataclass
class MacroFields:
    """Density, bulk velocity and temperature of a kinetic density.

    ``rho`` has shape ``shape_x``; ``U`` has shape ``(d, *shape_x)``;
    ``T`` has shape ``shape_x``.  Where ``rho`` vanishes, ``U`` and ``T``
    are zero by convention.
    """

    rho: np.ndarray
    U: np.ndarray
    T: np.ndarray


@dataclass(frozen=True)
class GammaParam:
    """Exponent-sharpening parameter of the generalized Maxwellian (> 0)."""

    gamma: float = 1.0

    def __post_init__(self) -> None:
        if self.gamma <= 0:
            raise ValueError("gamma must be positive")


def _moment(values: np.ndarray, weight: np.ndarray, grid: PhaseGrid) -> np.ndarray:
    """Trapezoidal velocity integral of values * weight, per spatial node."""
    v_axes = tuple(range(grid.d, 2 * grid.d))
    return np.tensordot(values * weight, grid.v_quad_weights, axes=(v_axes, tuple(range(grid.d))))


def compute_moments(f: Distribution, rho_floor: float = RHO_FLOOR) -> MacroFields:
    """Density, bulk velocity and temperature by trapezoidal velocity quadrature."""
    g = f.grid
    vals = f.values
    if not np.all(np.isfinite(vals)):
        raise ValueError("non-finite field")
    if np.min(vals) < -1e-14:
        raise ValueError("negative distribution")

    ones = np.ones(g.shape_v)
    rho = _moment(vals, ones, g)
    live = rho > rho_floor
    safe_rho = np.where(live, rho, 1.0)

    U = np.zeros((g.d,) + g.shape_x)
    for j in range(g.d):
        U[j] = np.where(live, _moment(vals, g.v_axis(j), g) / safe_rho, 0.0)

    # centered second moment: int |v - U|^2 f dv = int |v|^2 f - rho |U|^2
    m2 = _moment(vals, g.v_mag**2, g)
    u_sq = np.sum(U**2, axis=0)
    T = np.where(live, np.maximum(m2 / safe_rho - u_sq, 0.0) / g.d, 0.0)
    rho = np.where(live, rho, np.maximum(rho, 0.0))
    return MacroFields(rho=rho, U=U, T=T)


def maxwellian(
    m: MacroFields,
    grid: PhaseGrid,
    gamma: GammaParam | float = 1.0,
    rho_floor: float = RHO_FLOOR,
) -> Distribution:
    """Local (generalized) Maxwellian with the given macroscopic fields.

    M_gamma = rho / (2 pi T)^(d/2) * exp(-gamma |v - U|^2 / (2 T)); identically
    zero at nodes where rho is below the floor.
    """
    gam = gamma.gamma if isinstance(gamma, GammaParam) else float(gamma)
    live = m.rho > rho_floor
    if np.any(live & (m.T <= 0.0)):
        raise ValueError("degenerate temperature")
    safe_T = np.where(live, m.T, 1.0)

    # broadcast: spatial arrays get trailing v axes
    sl = (...,) + (None,) * grid.d
    dev_sq = np.zeros(grid.shape_x + grid.shape_v)
    for j in range(grid.d):
        vj = grid.v_axis(j)[(None,) * grid.d + (...,)]
        dev_sq += (vj - m.U[j][sl]) ** 2
    amp = np.where(live, m.rho / (2.0 * np.pi * safe_T) ** (grid.d / 2.0), 0.0)
    vals = amp[sl] * np.exp(-gam * dev_sq / (2.0 * safe_T[sl]))
    return Distribution(grid, vals)


def collision_rhs(
    f: Distribution, m_source: MacroFields | None = None
) -> tuple[np.ndarray, np.ndarray]:
    """Inhomogeneous part of the relaxation operator built from a source iterate.

    Returns ``(rate, source)`` where ``rate = rho_f`` (spatial field) and
    ``source = rho_f * M(f)`` (phase-space field); the full right-hand side of
    the kinetic equation is ``source - rate * f_new``.
    """
    if m_source is None:
        m_source = compute_moments(f)
    mx = maxwellian(m_source, f.grid)
    sl = (...,) + (None,) * f.grid.d
    source = m_source.rho[sl] * mx.values
    return m_source.rho, source
