"""Function-space (whole-interval) Picard iteration for the coupled system.

Each iterate solves the linearized kinetic equation, the linear continuity
equation and the linear momentum equation over the full time interval, with
relaxation rate, relaxation source and advecting velocity taken from the
previous iterate.  The driver measures the Cauchy differences between
successive iterates and evaluates the smallness gates that the contraction
argument rests on.  A direct (nonlinear, time-marching) solver with the same
sub-solvers serves as the limit oracle.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from sbnk.fluid import continuity_step, drag_force, momentum_step
from sbnk.grid import Distribution, PhaseGrid, WeightParams
from sbnk.moments import compute_moments, maxwellian
from sbnk.norms import l2_norm, sobolev_norm, weighted_sup_norm, weighted_w1inf_norm
from sbnk.operators import gradient
from sbnk.transport import (
    VelocityHistory,
    backward_characteristic,
    kinetic_solve_interval,
)


@dataclass(frozen=True)
class ScenarioParams:
    """All knobs of one solver scenario.

    The exponents must satisfy 0 < alpha < alpha_star < min(beta, 3*alpha/2)
    and 0 < alpha < beta < 1, the ordering under which the norm gates close.
    """

    d: int = 1
    nx: int = 32
    nv: int = 64
    Lx: float = 1.0
    Vmax: float = 10.0
    q: float = 6.0
    a: float = 0.5
    eps1: float = 1e-3
    eps: float = 0.05
    beta: float = 0.8
    alpha: float = 0.5
    alpha_star: float = 0.7
    T: float = 0.5
    dt: float = 1.0 / 256.0
    mode: str = "picard"
    max_n: int = 12
    stop_tol: float = 1e-8
    mu: float = 1.0
    trunc_tol: float = 1e-10

    def __post_init__(self) -> None:
        if self.mode not in ("picard", "direct"):
            raise ValueError(f"mode must be 'picard' or 'direct', got {self.mode!r}")
        if not (0.0 < self.alpha < self.beta < 1.0):
            raise ValueError("exponents must satisfy 0 < alpha < beta < 1")
        if not (self.alpha < self.alpha_star < min(self.beta, 1.5 * self.alpha)):
            raise ValueError(
                "exponents must satisfy alpha < alpha_star < min(beta, 3*alpha/2)"
            )
        if self.T <= 0 or self.dt <= 0:
            raise ValueError("T and dt must be positive")
        if abs(round(self.T / self.dt) * self.dt - self.T) > 1e-9 * max(self.T, 1.0):
            raise ValueError("T must be an integer multiple of dt")
        self.weights.validate_for_dim(self.d)

    @property
    def grid(self) -> PhaseGrid:
        return PhaseGrid(d=self.d, nx=self.nx, nv=self.nv, Lx=self.Lx, Vmax=self.Vmax)

    @property
    def weights(self) -> WeightParams:
        return WeightParams(q=self.q, a=self.a, eps1=self.eps1)

    @property
    def n_steps(self) -> int:
        return int(round(self.T / self.dt))


@dataclass
class InitialData:
    """Initial fields plus the smallness/positivity verification report."""

    f0: Distribution
    rho0: np.ndarray
    u0: np.ndarray
    report: dict[str, float | bool]


def floor_profile(grid: PhaseGrid, w: WeightParams) -> np.ndarray:
    """The positivity barrier eps1 * (1 + |v|)^-(q + d + a) over the velocity box."""
    return w.eps1 * (1.0 + grid.v_mag) ** (-(w.q + grid.d + w.a))


def make_initial_data(params: ScenarioParams) -> InitialData:
    """Small smooth initial data satisfying the three admission conditions.

    (i)   rho0 bounded below away from zero;
    (ii)  ||f0||_{W_q^{1,inf}} + ||u0||_{H^2} < eps;
    (iii) f0 strictly above the eps1 * (1+|v|)^-(q+d+a) barrier.
    """
    g = params.grid
    w = params.weights
    if w.eps1 <= 0:
        raise ValueError("eps1 must be positive: condition (iii) needs a strict barrier")

    sl_x = (...,) + (None,) * g.d

    barrier = floor_profile(g, w)
    barrier_field = np.broadcast_to(
        barrier[(None,) * g.d + (...,)], g.shape_phase
    ).copy()
    floor_norm = weighted_w1inf_norm(Distribution(g, barrier_field), w.q)

    # divergence-free u0: constant in d=1, a stream-function curl in d>=2
    if g.d == 1:
        u0_raw = np.ones((1,) + g.shape_x)
    else:
        two_pi = 2.0 * np.pi / g.Lx
        sx = np.sin(two_pi * g.x_axis(0)) * np.ones(g.shape_x)
        sy = np.sin(two_pi * g.x_axis(1)) * np.ones(g.shape_x)
        cx = np.cos(two_pi * g.x_axis(0)) * np.ones(g.shape_x)
        cy = np.cos(two_pi * g.x_axis(1)) * np.ones(g.shape_x)
        u0_raw = np.zeros((g.d,) + g.shape_x)
        u0_raw[0] = sx * cy
        u0_raw[1] = -cx * sy
    u0_budget = 0.65 * params.eps
    u0 = u0_raw * (u0_budget / sobolev_norm(u0_raw, 2, g))

    # smooth bump times Gaussian velocity profile
    bump = np.ones(g.shape_x)
    for j in range(g.d):
        bump *= 1.0 + 0.5 * np.cos(2.0 * np.pi * g.x_axis(j) / g.Lx) * np.ones(
            g.shape_x
        )
    T0 = 1.0
    gauss = np.exp(-g.v_mag**2 / (2.0 * T0)) / (2.0 * np.pi * T0) ** (g.d / 2.0)
    kinetic_raw = bump[sl_x] * gauss[(None,) * g.d + (...,)]
    kinetic_norm = weighted_w1inf_norm(Distribution(g, kinetic_raw), w.q)

    budget = 0.9 * params.eps - floor_norm - u0_budget
    if budget <= 0:
        raise ValueError(
            f"eps = {params.eps:g} too small to fit the positivity floor "
            f"(floor norm {floor_norm:.3e}); reduce eps1"
        )
    kinetic_part = (budget / kinetic_norm) * kinetic_raw
    f0_vals = kinetic_part + barrier_field
    f0 = Distribution(g, f0_vals)
    f0.check_initial(params.trunc_tol)

    rho0 = np.ones(g.shape_x)
    for j in range(g.d):
        rho0 += 0.01 * np.cos(2.0 * np.pi * g.x_axis(j) / g.Lx) * np.ones(g.shape_x)

    cond_ii_value = weighted_w1inf_norm(f0, w.q) + sobolev_norm(u0, 2, g)
    report: dict[str, float | bool] = {
        "cond_i_min_rho0": float(np.min(rho0)),
        "cond_i_pass": bool(np.min(rho0) > 0.0),
        "cond_ii_value": cond_ii_value,
        "cond_ii_bound": params.eps,
        "cond_ii_pass": bool(cond_ii_value < params.eps),
        # excess measured on the kinetic component: at far-tail nodes it can
        # round away entirely when added to the barrier in double precision
        "cond_iii_min_excess": float(np.min(kinetic_part)),
        "cond_iii_pass": bool(np.min(kinetic_part) > 0.0),
    }
    return InitialData(f0=f0, rho0=rho0, u0=u0, report=report)


@dataclass
class IterateTrajectory:
    """Full space-time record of one iterate at spacing dt over [0, T]."""

    n: int
    grid: PhaseGrid
    dt: float
    f_snaps: list[Distribution]
    rho_snaps: np.ndarray  # (nt+1, *shape_x)
    u_snaps: np.ndarray  # (nt+1, d, *shape_x)
    p_snaps: np.ndarray  # (nt+1, *shape_x)
    outflow: int = 0

    @property
    def n_steps(self) -> int:
        return len(self.f_snaps) - 1

    @property
    def times(self) -> np.ndarray:
        return np.arange(len(self.f_snaps)) * self.dt

    def u_history(self) -> VelocityHistory:
        return VelocityHistory(self.grid, 0.0, self.dt, self.u_snaps)


def constant_trajectory(params: ScenarioParams, init: InitialData) -> IterateTrajectory:
    """Iterate 0: the initial data held constant in time."""
    nt = params.n_steps
    g = params.grid
    return IterateTrajectory(
        n=0,
        grid=g,
        dt=params.dt,
        f_snaps=[init.f0.copy() for _ in range(nt + 1)],
        rho_snaps=np.broadcast_to(init.rho0, (nt + 1,) + g.shape_x).copy(),
        u_snaps=np.broadcast_to(init.u0, (nt + 1, g.d) + g.shape_x).copy(),
        p_snaps=np.zeros((nt + 1,) + g.shape_x),
    )


def solve_linearized(
    params: ScenarioParams, prev: IterateTrajectory, init: InitialData
) -> IterateTrajectory:
    """One Picard update: solve the linear system driven by the previous iterate."""
    g = params.grid
    nt = params.n_steps
    dt = params.dt
    u_hist = prev.u_history()

    rate_hist = np.empty((nt + 1,) + g.shape_x)
    source_hist = np.empty((nt + 1,) + g.shape_phase)
    sl = (...,) + (None,) * g.d
    for k in range(nt + 1):
        m = compute_moments(prev.f_snaps[k])
        rate_hist[k] = m.rho
        source_hist[k] = m.rho[sl] * maxwellian(m, g).values

    f_snaps, outflow = kinetic_solve_interval(
        init.f0, rate_hist, source_hist, u_hist, params.T, dt
    )

    rho_snaps = np.empty((nt + 1,) + g.shape_x)
    rho_snaps[0] = init.rho0
    for k in range(nt):
        rho_snaps[k + 1] = continuity_step(rho_snaps[k], u_hist, k * dt, dt)

    u_snaps = np.empty((nt + 1, g.d) + g.shape_x)
    p_snaps = np.zeros((nt + 1,) + g.shape_x)
    u_snaps[0] = init.u0
    for k in range(nt):
        # trapezoid-in-time drag: matches the kinetic step's continuous
        # momentum exchange to second order
        drag = 0.5 * (
            drag_force(f_snaps[k], prev.u_snaps[k])
            + drag_force(f_snaps[k + 1], prev.u_snaps[k + 1])
        )
        u_snaps[k + 1], p_snaps[k + 1] = momentum_step(
            u_snaps[k],
            rho_snaps[k + 1],
            prev.u_snaps[k],
            drag,
            g,
            dt,
            mu=params.mu,
        )
    return IterateTrajectory(
        n=prev.n + 1,
        grid=g,
        dt=dt,
        f_snaps=f_snaps,
        rho_snaps=rho_snaps,
        u_snaps=u_snaps,
        p_snaps=p_snaps,
        outflow=outflow,
    )


def direct_solve(
    params: ScenarioParams, init: InitialData | None = None
) -> IterateTrajectory:
    """Nonlinear time-marching with the same sub-solvers, coefficients lagged one step."""
    if init is None:
        init = make_initial_data(params)
    g = params.grid
    nt = params.n_steps
    dt = params.dt
    sl = (...,) + (None,) * g.d

    f_snaps = [init.f0.copy()]
    rho_snaps = np.empty((nt + 1,) + g.shape_x)
    u_snaps = np.empty((nt + 1, g.d) + g.shape_x)
    p_snaps = np.zeros((nt + 1,) + g.shape_x)
    rho_snaps[0] = init.rho0
    u_snaps[0] = init.u0
    outflow = 0
    from sbnk.transport import kinetic_step

    for k in range(nt):
        t = k * dt
        u_hist = VelocityHistory.constant(g, u_snaps[k], t, t + dt)
        m = compute_moments(f_snaps[k])
        source = m.rho[sl] * maxwellian(m, g).values
        f_new, n_out = kinetic_step(f_snaps[k], m.rho, source, u_hist, t, dt)
        outflow += n_out
        rho_snaps[k + 1] = continuity_step(rho_snaps[k], u_hist, t, dt)
        drag = 0.5 * (
            drag_force(f_snaps[k], u_snaps[k]) + drag_force(f_new, u_snaps[k])
        )
        u_snaps[k + 1], p_snaps[k + 1] = momentum_step(
            u_snaps[k], rho_snaps[k + 1], u_snaps[k], drag, g, dt, mu=params.mu
        )
        f_snaps.append(f_new)
    return IterateTrajectory(
        n=0,
        grid=g,
        dt=dt,
        f_snaps=f_snaps,
        rho_snaps=rho_snaps,
        u_snaps=u_snaps,
        p_snaps=p_snaps,
        outflow=outflow,
    )


# -- Cauchy differences -----------------------------------------------------


@dataclass
class CauchyReport:
    """Per-iteration Cauchy differences between successive iterates.

    ``delta(n)`` indexes the difference between iterates n+1 and n; ``ratio``
    is delta(n) / delta(n-1) of the summed sup-in-time differences.
    """

    n: list[int] = field(default_factory=list)
    delta_f_q: list[float] = field(default_factory=list)
    delta_rho_h2: list[float] = field(default_factory=list)
    delta_u_h1: list[float] = field(default_factory=list)
    l2h1_grad_u: list[float] = field(default_factory=list)

    def append_pair(
        self, new: IterateTrajectory, old: IterateTrajectory, q: float
    ) -> float:
        g = new.grid
        dt = new.dt
        df = max(
            weighted_sup_norm(
                Distribution(g, new.f_snaps[k].values - old.f_snaps[k].values), q
            )
            for k in range(len(new.f_snaps))
        )
        drho = max(
            sobolev_norm(new.rho_snaps[k] - old.rho_snaps[k], 2, g)
            for k in range(len(new.rho_snaps))
        )
        du_fields = new.u_snaps - old.u_snaps
        du = max(sobolev_norm(du_fields[k], 1, g) for k in range(len(du_fields)))
        # int_0^T ||grad(du)||_{H^1}^2 dt by trapezoid in time
        grad_sq = np.array(
            [
                sum(
                    sobolev_norm(gradient(du_fields[k][i], g), 1, g) ** 2
                    for i in range(g.d)
                )
                for k in range(len(du_fields))
            ]
        )
        l2h1 = float(np.trapezoid(grad_sq, dx=dt))
        self.n.append(old.n)
        self.delta_f_q.append(df)
        self.delta_rho_h2.append(drho)
        self.delta_u_h1.append(du)
        self.l2h1_grad_u.append(l2h1)
        return df + drho + du

    def totals(self) -> list[float]:
        return [
            f + r + u
            for f, r, u in zip(self.delta_f_q, self.delta_rho_h2, self.delta_u_h1)
        ]

    def ratios(self) -> list[float]:
        tot = self.totals()
        out = [math.nan]
        for k in range(1, len(tot)):
            out.append(tot[k] / tot[k - 1] if tot[k - 1] > 0 else 0.0)
        return out

    def factorial_fit(self) -> tuple[float, float, float]:
        """Least-squares fit of log delta(n) = (n+1) log C - log n!.

        Returns (C_ls, r_squared, C_dom) where C_dom is the smallest constant
        whose factorial curve dominates every measured delta.
        """
        tot = self.totals()
        pts = [(n, t) for n, t in zip(self.n, tot) if t > 0]
        if len(pts) < 3:
            raise ValueError("need at least 3 positive Cauchy differences to fit")
        ns = np.array([p[0] for p in pts], dtype=float)
        ys = np.log([p[1] for p in pts])
        lf = np.array([math.lgamma(n + 1.0) for n in ns])
        # single-parameter LSQ in x = log C: y + log n! = (n+1) x
        x = float(np.sum((ns + 1.0) * (ys + lf)) / np.sum((ns + 1.0) ** 2))
        pred = (ns + 1.0) * x - lf
        ss_res = float(np.sum((ys - pred) ** 2))
        ss_tot = float(np.sum((ys - np.mean(ys)) ** 2))
        r2 = 1.0 - ss_res / ss_tot if ss_tot > 0 else 1.0
        c_dom = max(
            (t * math.exp(lgf)) ** (1.0 / (n + 1.0))
            for (n, t), lgf in zip(pts, lf)
        )
        return math.exp(x), r2, c_dom


# -- norm gates and diagnostics --------------------------------------------


@dataclass(frozen=True)
class GateReport:
    """Measured values of the two smallness gates for one iterate."""

    n: int
    f_norm: float
    f_gate: float
    u_norm: float
    u_gate: float

    @property
    def f_pass(self) -> bool:
        return self.f_norm < self.f_gate

    @property
    def u_pass(self) -> bool:
        return self.u_norm < self.u_gate

    @property
    def all_pass(self) -> bool:
        return self.f_pass and self.u_pass


def u_norm_bundle(traj: IterateTrajectory) -> float:
    """||d_t u||_{C;L2} + ||d_t u||_{L2 H1} + ||u||_{C;H2} + ||u||_{L2 H3}."""
    g = traj.grid
    dt = traj.dt
    u = traj.u_snaps
    dudt = (u[1:] - u[:-1]) / dt
    c_l2 = max(l2_norm(dudt[k], g) for k in range(len(dudt)))
    l2_h1 = math.sqrt(sum(sobolev_norm(dudt[k], 1, g) ** 2 * dt for k in range(len(dudt))))
    c_h2 = max(sobolev_norm(u[k], 2, g) for k in range(len(u)))
    h3_sq = np.array([sobolev_norm(u[k], 3, g) ** 2 for k in range(len(u))])
    l2_h3 = math.sqrt(float(np.trapezoid(h3_sq, dx=dt)))
    return c_l2 + l2_h1 + c_h2 + l2_h3


def evaluate_gates(traj: IterateTrajectory, params: ScenarioParams) -> GateReport:
    """The two iteration-invariance gates: kinetic W_q^{1,inf} and fluid norms."""
    f_norm = max(weighted_w1inf_norm(f, params.q) for f in traj.f_snaps)
    return GateReport(
        n=traj.n,
        f_norm=f_norm,
        f_gate=params.eps**params.beta,
        u_norm=u_norm_bundle(traj),
        u_gate=params.eps**params.alpha,
    )


@dataclass
class PicardResult:
    """Everything picard_iterate produces."""

    initial: InitialData
    trajectories: list[IterateTrajectory]
    cauchy: CauchyReport
    gates: list[GateReport]
    converged: bool

    @property
    def final(self) -> IterateTrajectory:
        return self.trajectories[-1]


def picard_iterate(
    params: ScenarioParams,
    max_n: int | None = None,
    init: InitialData | None = None,
    keep_all: bool = True,
) -> PicardResult:
    """Run the function-space iteration until stop_tol or max_n iterations."""
    if init is None:
        init = make_initial_data(params)
    if max_n is None:
        max_n = params.max_n
    prev = constant_trajectory(params, init)
    trajectories = [prev]
    cauchy = CauchyReport()
    gates = [evaluate_gates(prev, params)]
    converged = False
    for _ in range(max_n):
        try:
            new = solve_linearized(params, prev, init)
        except Exception as exc:
            raise RuntimeError(f"iterate {prev.n + 1} failed: {exc}") from exc
        total = cauchy.append_pair(new, prev, params.q)
        gates.append(evaluate_gates(new, params))
        if keep_all:
            trajectories.append(new)
        else:
            trajectories = [new]
        prev = new
        if total < params.stop_tol:
            converged = True
            break
    return PicardResult(
        initial=init,
        trajectories=trajectories,
        cauchy=cauchy,
        gates=gates,
        converged=converged,
    )


# -- trajectory diagnostics -------------------------------------------------


def total_mass(f: Distribution) -> float:
    g = f.grid
    m = compute_moments(f)
    return float(np.sum(m.rho)) * g.cell_volume_x


def total_momentum(f: Distribution, rho: np.ndarray, u: np.ndarray) -> np.ndarray:
    """int v f dx dv + int rho u dx, one component per dimension."""
    g = f.grid
    m = compute_moments(f)
    kin = np.array([float(np.sum(m.rho * m.U[j])) for j in range(g.d)])
    fl = np.array([float(np.sum(rho * u[j])) for j in range(g.d)])
    return (kin + fl) * g.cell_volume_x

def total_energy(f: Distribution, rho: np.ndarray, u: np.ndarray) -> float:
    """E = 1/2 int |v|^2 f dx dv + 1/2 int rho |u|^2 dx."""
    g = f.grid
    v_axes = tuple(range(g.d, 2 * g.d))
    m2 = np.tensordot(
        f.values * g.v_mag[(None,) * g.d + (...,)] ** 2,
        g.v_quad_weights,
        axes=(v_axes, tuple(range(g.d))),
    )
    kin = 0.5 * float(np.sum(m2)) * g.cell_volume_x
    fl = 0.5 * float(np.sum(rho * np.sum(u**2, axis=0))) * g.cell_volume_x
    return kin + fl


def characteristic_growth_constant(
    traj: IterateTrajectory, n_samples: int = 1000, seed: int = 0
) -> float:
    """Empirical C with |V(s)| <= C (1 + |v|) over sampled backward characteristics."""
    g = traj.grid
    rng = np.random.default_rng(seed)
    u_hist = traj.u_history()
    T = traj.n_steps * traj.dt
    X = rng.uniform(0.0, g.Lx, size=(g.d, n_samples))
    V = rng.uniform(-g.Vmax, g.Vmax, size=(g.d, n_samples))
    base = 1.0 + np.sqrt(np.sum(V**2, axis=0))
    c_max = 1.0
    n_check = max(traj.n_steps // 8, 1)
    for k in range(0, traj.n_steps + 1, n_check):
        s = k * traj.dt
        _, Vs = backward_characteristic((X, V), T, s, u_hist)
        mag = np.sqrt(np.sum(Vs**2, axis=0))
        c_max = max(c_max, float(np.max(mag / base)))
    return c_max


def rho_f_lower_bound(
    traj: IterateTrajectory, params: ScenarioParams, c_growth: float
) -> tuple[np.ndarray, np.ndarray]:
    """Instantiated kinetic-density lower bound per snapshot time.

    bound(t) = exp((d - max rho_f) t) * eps1 * int_box (1 + C (1+|v|))^-(q+d+a) dv
    with C the measured characteristic growth constant.  Returns
    (measured min_x rho_f(t), bound(t)) arrays.
    """
    g = traj.grid
    w = params.weights
    measured = np.array(
        [float(np.min(compute_moments(f).rho)) for f in traj.f_snaps]
    )
    rate_max = max(
        float(np.max(compute_moments(f).rho)) for f in traj.f_snaps
    )
    integrand = (1.0 + c_growth * (1.0 + g.v_mag)) ** (-(w.q + g.d + w.a))
    integral = float(np.sum(integrand * g.v_quad_weights))
    times = traj.times
    bound = np.exp((g.d - rate_max) * times) * w.eps1 * integral
    return measured, bound


@dataclass
class DiagnosticRow:
    lemma_id: str
    t: float
    measured: float
    gate: float
    passed: bool


def diagnostics_suite(
    traj: IterateTrajectory, params: ScenarioParams
) -> list[DiagnosticRow]:
    """Evaluate every lemma-conclusion gate on a completed trajectory."""
    rows: list[DiagnosticRow] = []
    times = traj.times

    # fluid density max principle: min_x rho(t) >= min_x rho0
    rho0_min = float(np.min(traj.rho_snaps[0]))
    for k, t in enumerate(times):
        m = float(np.min(traj.rho_snaps[k]))
        rows.append(
            DiagnosticRow("rho_min_principle", float(t), m, rho0_min - 1e-12, m >= rho0_min - 1e-12)
        )

    # characteristic growth |V(s)| <= C (1 + |v|)
    c_growth = characteristic_growth_constant(traj)
    rows.append(
        DiagnosticRow("char_growth_const", float(times[-1]), c_growth, math.inf, True)
    )

    # kinetic density lower bound
    measured, bound = rho_f_lower_bound(traj, params, c_growth)
    for k, t in enumerate(times):
        rows.append(
            DiagnosticRow(
                "rho_f_lower_bound",
                float(t),
                float(measured[k]),
                float(bound[k]),
                bool(measured[k] >= bound[k]),
            )
        )

    # norm gates
    gate = evaluate_gates(traj, params)
    rows.append(
        DiagnosticRow("f_w1q_gate", float(times[-1]), gate.f_norm, gate.f_gate, gate.f_pass)
    )
    rows.append(
        DiagnosticRow("u_norm_gate", float(times[-1]), gate.u_norm, gate.u_gate, gate.u_pass)
    )
    return rows
