"""Linearized continuity and momentum solver with drag forcing on the torus.

Continuity is advanced semi-Lagrangian (discrete max principle by clipping).
Momentum uses first-order splitting: explicit advection and drag, implicit
diffusion solved spectrally with a fixed-point sweep around the mean density,
then a variable-coefficient pressure projection solved by preconditioned
conjugate gradients.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from sbnk.grid import Distribution, PhaseGrid
from sbnk.interp import spatial_interp
from sbnk.moments import MacroFields, compute_moments
from sbnk.operators import advect, divergence, gradient
from sbnk.transport import VelocityHistory


class ProjectionError(RuntimeError):
    """Pressure solve failed to converge."""


@dataclass
class FluidState:
    """Fluid density, divergence-free velocity and zero-mean pressure."""

    rho: np.ndarray
    u: np.ndarray
    p: np.ndarray


def drag_force(
    f: Distribution, u: np.ndarray, m: MacroFields | None = None
) -> np.ndarray:
    """Momentum-exchange force -int (u - v) f dv = rho_f (U_f - u), from moments."""
    if m is None:
        m = compute_moments(f)
    return m.rho[None, ...] * (m.U - u)


def continuity_step(
    rho: np.ndarray, u_hist: VelocityHistory, t: float, dt: float
) -> np.ndarray:
    """Semi-Lagrangian transport of rho along u over [t, t + dt].

    Departure points by RK2 midpoint; cubic interpolation clipped to the
    input min/max (discrete max principle, exact by construction).
    """
    u_hist.check_cover(t, t + dt)
    grid = u_hist.grid
    mesh = np.meshgrid(*([grid.x_nodes] * grid.d), indexing="ij")
    X = np.stack([a.ravel() for a in mesh])
    k1 = u_hist.eval(X, t + dt)
    X_mid = grid.wrap(X - 0.5 * dt * k1)
    k2 = u_hist.eval(X_mid, t + 0.5 * dt)
    X_dep = grid.wrap(X - dt * k2)
    vals = spatial_interp(rho, grid, X_dep)
    np.clip(vals, np.min(rho), np.max(rho), out=vals)
    return vals.reshape(grid.shape_x)


def _pressure_solve(
    div_target: np.ndarray,
    rho: np.ndarray,
    grid: PhaseGrid,
    tol: float,
    maxiter: int,
) -> np.ndarray:
    """Solve div((1/rho) grad p) = div_target with zero-mean p.

    Preconditioned CG on the SPD operator -div((1/rho) grad .), spectral
    constant-coefficient preconditioner; converges until the sup-norm
    residual drops below tol.
    """
    inv_rho = 1.0 / rho
    rho_bar = float(np.mean(rho))
    k2 = grid.k_squared.copy()
    k2.flat[0] = 1.0

    def apply_A(p: np.ndarray) -> np.ndarray:
        return -divergence(inv_rho[None, ...] * gradient(p, grid), grid)

    def precond(r: np.ndarray) -> np.ndarray:
        rh = np.fft.fftn(r)
        rh.flat[0] = 0.0
        return np.fft.ifftn(rho_bar * rh / k2).real

    b = -(div_target - np.mean(div_target))
    p = np.zeros_like(b)
    r = b.copy()
    if np.max(np.abs(r)) <= tol:
        return p
    z = precond(r)
    d = z.copy()
    rz = float(np.sum(r * z))
    for _ in range(maxiter):
        Ad = apply_A(d)
        alpha = rz / float(np.sum(d * Ad))
        p += alpha * d
        r -= alpha * Ad
        if np.max(np.abs(r)) <= tol:
            p -= np.mean(p)
            return p
        z = precond(r)
        rz_new = float(np.sum(r * z))
        d = z + (rz_new / rz) * d
        rz = rz_new
    raise ProjectionError(
        f"pressure CG did not converge in {maxiter} iterations; residual {np.max(np.abs(r)):.3e}"
    )


def leray_project(
    u: np.ndarray,
    rho: np.ndarray,
    grid: PhaseGrid,
    tol: float = 1e-10,
    maxiter: int = 500,
) -> tuple[np.ndarray, np.ndarray]:
    """Project u onto discretely divergence-free fields; returns (u_proj, p).

    u_proj = u - (1/rho) grad p with div((1/rho) grad p) = div u; idempotent
    to the solver tolerance.
    """
    div_u = divergence(u, grid)
    p = _pressure_solve(div_u, rho, grid, tol, maxiter)
    u_proj = u - (1.0 / rho)[None, ...] * gradient(p, grid)
    return u_proj, p


def _implicit_diffusion(
    u_star: np.ndarray,
    rho: np.ndarray,
    grid: PhaseGrid,
    dt: float,
    mu: float,
    sweeps: int = 2,
) -> np.ndarray:
    """Solve (rho/dt - mu Lap) u = (rho/dt) u_star by fixed point around mean rho."""
    rho_bar = float(np.mean(rho))
    denom = rho_bar / dt + mu * grid.k_squared
    rhs0 = (rho / dt)[None, ...] * u_star
    u = u_star
    for _ in range(sweeps + 1):
        rhs = rhs0 + ((rho_bar - rho) / dt)[None, ...] * u
        u = np.stack(
            [np.fft.ifftn(np.fft.fftn(rhs[j]) / denom).real for j in range(grid.d)]
        )
    return u


def momentum_step(
    u: np.ndarray,
    rho_new: np.ndarray,
    u_adv: np.ndarray,
    drag: np.ndarray,
    grid: PhaseGrid,
    dt: float,
    mu: float = 1.0,
    cg_tol: float = 1e-10,
    cg_maxiter: int = 500,
) -> tuple[np.ndarray, np.ndarray]:
    """One momentum update rho du/dt + rho (u_adv . grad) u - mu Lap u + grad p = drag.

    ``rho_new`` is the density already advanced to the end of the step;
    advection and drag are explicit, diffusion implicit, then pressure
    projection.  Returns (u_new, p).

    In d=1 incompressibility forces u spatially uniform and the update reduces
    to the exact mean-momentum balance (int rho) du/dt = int drag; the
    pressure gradient carries the spatial imbalance.
    """
    if grid.d == 1:
        mass = float(np.sum(rho_new)) * grid.cell_volume_x
        force = float(np.sum(drag)) * grid.cell_volume_x
        dudt = force / mass
        u_new = u + dt * dudt
        # p' = drag - rho * du/dt, zero-mean spectral antiderivative
        rhs = drag[0] - rho_new * dudt
        rh = np.fft.fftn(rhs)
        k = grid.wavenumbers(0)
        kk = np.where(k == 0.0, 1.0, k)
        ph = np.where(k == 0.0, 0.0, rh / (1j * kk))
        return u_new, np.fft.ifftn(ph).real

    u_star = u + dt * (-advect(u_adv, u, grid) + drag / rho_new[None, ...])
    u_diff = _implicit_diffusion(u_star, rho_new, grid, dt, mu)
    div_u = divergence(u_diff, grid)
    p = _pressure_solve(div_u / dt, rho_new, grid, cg_tol, cg_maxiter)
    u_new = u_diff - dt * (1.0 / rho_new)[None, ...] * gradient(p, grid)
    return u_new, p
