"""Executable forms of the quantitative moment/Maxwellian inequalities.

Each check computes the ratio of the inequality's left-hand side to its
right-hand side with the unknown constant stripped; an inequality "holds" on
an ensemble if the ratio never exceeds the empirical constant recorded in the
versioned constants file (generated by :func:`generate_constants` from a
seeded randomized ensemble).

All exponents are dimension-generic: every 3 of the d=3 statements is d.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

import numpy as np

from sbnk.grid import Distribution, PhaseGrid
from sbnk.moments import RHO_FLOOR, compute_moments, maxwellian
from sbnk.norms import phase_gradients, weighted_sup_norm

_TINY = 1e-300


def constant_key(lemma: str, q: float, gamma: float, d: int) -> str:
    """Canonical constants-file key for one inequality instance."""
    return f"{lemma}.q{q:g}.g{gamma:g}.d{d}"


@dataclass(frozen=True)
class Lemma21Report:
    """Max-over-x ratios of the three moment bounds, or vacuous for zero density."""

    ratio_i: float
    ratio_ii: float
    ratio_iii: float
    vacuous: bool

    def ratios(self) -> tuple[float, float, float]:
        return (self.ratio_i, self.ratio_ii, self.ratio_iii)


def lemma21_check(f: Distribution, q: float) -> Lemma21Report:
    """Ratios of the three density/velocity/temperature moment bounds.

    (i)   rho <= C ||f||_q T^(d/2)
    (ii)  rho (T + |U|^2)^((q-d)/2) <= C ||f||_q
    (iii) rho |U|^(q+d) ((T + |U|^2) T)^(-d/2) <= C ||f||_q
    """
    d = f.grid.d
    m = compute_moments(f)
    norm = weighted_sup_norm(f, q)
    live = m.rho > RHO_FLOOR
    if norm < _TINY or not np.any(live):
        return Lemma21Report(0.0, 0.0, 0.0, vacuous=True)
    rho = np.where(live, m.rho, 0.0)
    T = np.where(live, m.T, 1.0)
    u_sq = np.sum(m.U**2, axis=0)
    r1 = rho / (np.maximum(T, _TINY) ** (d / 2.0) * norm)
    r2 = rho * (T + u_sq) ** ((q - d) / 2.0) / norm
    r3 = (
        rho
        * np.sqrt(u_sq) ** (q + d)
        / (np.maximum((T + u_sq) * T, _TINY) ** (d / 2.0) * norm)
    )
    return Lemma21Report(
        float(np.max(r1)), float(np.max(r2)), float(np.max(r3)), vacuous=False
    )


def lemma22_ratio(f: Distribution, q: float, gamma: float = 1.0) -> float:
    """||M_gamma(f)||_q / ||f||_q (0 for the zero distribution)."""
    norm = weighted_sup_norm(f, q)
    if norm < _TINY:
        return 0.0
    mx = maxwellian(compute_moments(f), f.grid, gamma)
    return weighted_sup_norm(mx, q) / norm


@dataclass(frozen=True)
class HypothesisThresholds:
    """Bounds C1-C3 under which the Maxwellian Lipschitz estimate is claimed.

    ``c1``: upper bound on ||h||_q; ``c2``: upper bound on rho + |U| + T;
    ``c3``: lower bound on rho and T.
    """

    c1: float = 10.0
    c2: float = 10.0
    c3: float = 1e-3


def _check_lipschitz_hypotheses(
    f: Distribution, q: float, hyp: HypothesisThresholds, label: str
) -> None:
    norm = weighted_sup_norm(f, q)
    if norm >= hyp.c1:
        raise ValueError(f"hypothesis violated: ||{label}||_q = {norm:.3e} >= C1")
    m = compute_moments(f)
    combo = float(np.max(m.rho + np.sqrt(np.sum(m.U**2, axis=0)) + m.T))
    if combo >= hyp.c2:
        raise ValueError(
            f"hypothesis violated: rho+|U|+T of {label} = {combo:.3e} >= C2"
        )
    low = min(float(np.min(m.rho)), float(np.min(m.T)))
    if low <= hyp.c3:
        raise ValueError(
            f"hypothesis violated: min(rho, T) of {label} = {low:.3e} <= C3"
        )


def lemma23_lipschitz_check(
    f: Distribution,
    g: Distribution,
    q: float,
    hyp: HypothesisThresholds = HypothesisThresholds(),
) -> float | str:
    """||M(f) - M(g)||_q / ||f - g||_q, or "identical" for a vanishing denominator.

    Raises if either argument violates the hypothesis thresholds.
    """
    _check_lipschitz_hypotheses(f, q, hyp, "f")
    _check_lipschitz_hypotheses(g, q, hyp, "g")
    diff = Distribution(f.grid, f.values - g.values)
    denom = weighted_sup_norm(diff, q)
    if denom < 1e-14:
        return "identical"
    mf = maxwellian(compute_moments(f), f.grid)
    mg = maxwellian(compute_moments(g), g.grid)
    mdiff = Distribution(f.grid, mf.values - mg.values)
    return weighted_sup_norm(mdiff, q) / denom


def lemma24_gradient_check(
    f: Distribution,
    q: float,
    hyp: HypothesisThresholds = HypothesisThresholds(),
) -> float:
    """||grad_{x,v} M(f)||_q / ((||grad_x f||_q + 1) ||f||_q)."""
    _check_lipschitz_hypotheses(f, q, hyp, "f")
    g = f.grid
    w = g.velocity_weight(q)
    mx = maxwellian(compute_moments(f), g)
    gx_m, gv_m = phase_gradients(mx)
    num = 0.0
    for j in range(g.d):
        num += float(np.max(np.abs(gx_m[j]) * w))
        num += float(np.max(np.abs(gv_m[j]) * w))
    gx_f, _ = phase_gradients(f)
    grad_f_norm = sum(float(np.max(np.abs(gx_f[j]) * w)) for j in range(g.d))
    return num / ((grad_f_norm + 1.0) * weighted_sup_norm(f, q))


# -- randomized ensemble and constants file --------------------------------


def ensemble_member(
    rng: np.random.Generator, grid: PhaseGrid
) -> Distribution:
    """One random positive kinetic density: Maxwellian mixture times a
    positive band-limited spatial modulation."""
    d = grid.d
    n_comp = int(rng.integers(1, 4))
    vals = np.zeros(grid.shape_phase)
    sl = (None,) * d + (...,)
    for _ in range(n_comp):
        rho = rng.uniform(0.2, 2.0)
        T = rng.uniform(0.2, 2.0)
        U = rng.uniform(-2.0, 2.0, size=d)
        dev_sq = sum((grid.v_axis(j) - U[j]) ** 2 for j in range(d))
        gauss = rho / (2.0 * np.pi * T) ** (d / 2.0) * np.exp(-dev_sq / (2.0 * T))
        mod = np.ones(grid.shape_x)
        for j in range(d):
            k = int(rng.integers(1, 4))
            amp = rng.uniform(0.0, 0.8)
            phase = rng.uniform(0.0, 2.0 * np.pi)
            mod *= 1.0 + amp * np.cos(2.0 * np.pi * k * grid.x_axis(j) / grid.Lx + phase)
        mod_sl = mod[(...,) + (None,) * d]
        vals += mod_sl * gauss[sl]
    return Distribution(grid, vals)


def generate_constants(
    size: int,
    q: float,
    gammas: tuple[float, ...],
    d: int,
    seed: int,
    nx: int = 8,
    nv: int = 64,
    Vmax: float = 16.0,
) -> dict[str, float]:
    """Empirical maxima of all lemma ratios over a seeded random ensemble."""
    rng = np.random.default_rng(seed)
    grid = PhaseGrid(d=d, nx=nx, nv=nv, Vmax=Vmax)
    maxima: dict[str, float] = {}
    for name in ("lemma21i", "lemma21ii", "lemma21iii", "lemma23", "lemma24"):
        maxima[constant_key(name, q, 1.0, d)] = 0.0
    for gam in gammas:
        maxima[constant_key("lemma22", q, gam, d)] = 0.0
    hyp = HypothesisThresholds(c1=math.inf, c2=math.inf, c3=0.0)
    prev: Distribution | None = None
    for _ in range(size):
        f = ensemble_member(rng, grid)
        r21 = lemma21_check(f, q)
        key = constant_key("lemma21i", q, 1.0, d)
        maxima[key] = max(maxima[key], r21.ratio_i)
        key = constant_key("lemma21ii", q, 1.0, d)
        maxima[key] = max(maxima[key], r21.ratio_ii)
        key = constant_key("lemma21iii", q, 1.0, d)
        maxima[key] = max(maxima[key], r21.ratio_iii)
        for gam in gammas:
            key = constant_key("lemma22", q, gam, d)
            maxima[key] = max(maxima[key], lemma22_ratio(f, q, gam))
        key = constant_key("lemma24", q, 1.0, d)
        maxima[key] = max(maxima[key], lemma24_gradient_check(f, q, hyp))
        if prev is not None:
            r23 = lemma23_lipschitz_check(f, prev, q, hyp)
            if r23 != "identical":
                key = constant_key("lemma23", q, 1.0, d)
                maxima[key] = max(maxima[key], float(r23))
        prev = f
    return maxima


def write_constants(
    path: str | Path, constants: dict[str, float], meta: dict[str, str] | None = None
) -> None:
    """Write the key = value constants table with leading # metadata comments."""
    lines = ["# empirical lemma constants (max ratios over a seeded random ensemble)"]
    for k, v in (meta or {}).items():
        lines.append(f"# {k} = {v}")
    for key in sorted(constants):
        lines.append(f"{key} = {constants[key]:.17g}")
    Path(path).write_text("\n".join(lines) + "\n")


def read_constants(path: str | Path | None = None) -> dict[str, float]:
    """Read a constants table; defaults to the file shipped with the package."""
    if path is None:
        text = (resources.files("sbnk") / "data" / "constants.txt").read_text()
    else:
        text = Path(path).read_text()
    out: dict[str, float] = {}
    for line in text.splitlines():
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        key, _, value = line.partition("=")
        out[key.strip()] = float(value)
    return out
