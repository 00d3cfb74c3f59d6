"""Sub-solvers for the two linear building blocks, with monitors for their
a-priori estimates.

Heat:       d_t u - Lap u = G     exponential integrator, exact linear part;
                                  the Duhamel integral uses the exponential
                                  trapezoid (ETD2) rule, second order in dt.
Transport:  d_t f + v.grad f = g  pseudo-spectral RK4 with dealiased
                                  advection; v divergence-free.

Each monitor evaluates the corresponding estimate with an empirical
constant: the smallest C making the inequality hold over the run.  The
constants are regression material, not theory; both sides are measured.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import cumulative_trapezoid

from .littlewood_paley import (
    BesovSpec,
    FilterBank,
    TimeSeriesField,
    besov_norm,
    chemin_lerner_norm,
    chemin_lerner_trace,
)
from .paraproduct import EstimateReport
from .spectral import (
    Field,
    FrequencyGrid,
    SpectralField,
    _derivative_multiplier,
    divergence,
    jacobian,
    lp_norm,
)

__all__ = [
    "HeatProblem",
    "TransportProblem",
    "EstimateMonitor",
    "solve_heat",
    "heat_estimate_report",
    "solve_transport",
    "transport_estimate_report",
    "etd_phi1",
    "etd_phi2",
]


def _n_steps(T: float, dt: float) -> int:
    if dt <= 0.0:
        raise ValueError(f"dt must be positive, got {dt}")
    if T < dt:
        raise ValueError(f"need T >= dt, got T={T}, dt={dt}")
    n = round(T / dt)
    if abs(T - n * dt) > 1e-8 * dt:
        raise ValueError(f"T={T} is not a multiple of dt={dt}")
    return int(n)


def _initial_coeffs(grid: FrequencyGrid, f0) -> np.ndarray:
    if isinstance(f0, SpectralField):
        return f0.coeffs.copy()
    if isinstance(f0, Field):
        return grid.fft(f0.samples)
    raise TypeError(f"initial data must be Field or SpectralField, got {type(f0).__name__}")


@dataclass
class HeatProblem:
    """Initial data, forcing, horizon and step for d_t u - Lap u = G.

    ``forcing`` may be None (G = 0), a TimeSeriesField covering [0, T], or a
    callable t -> Field giving closed-form forcing.
    """

    u0: object
    forcing: object
    T: float
    dt: float
    cadence: int = 1

    def __post_init__(self):
        if not isinstance(self.u0, (Field, SpectralField)):
            raise TypeError(
                f"initial data must be Field or SpectralField, got {type(self.u0).__name__}"
            )
        self.n_steps = _n_steps(self.T, self.dt)
        if self.cadence < 1:
            raise ValueError(f"cadence must be >= 1, got {self.cadence}")
        if isinstance(self.forcing, TimeSeriesField):
            if self.forcing.T < self.T - 1e-12:
                raise ValueError(
                    f"forcing series covers [0, {self.forcing.T}], run needs [0, {self.T}]"
                )

    @property
    def grid(self) -> FrequencyGrid:
        return self.u0.grid


def etd_phi1(z: np.ndarray) -> np.ndarray:
    """(e^z - 1)/z, with the limit 1 at z = 0."""
    z = np.asarray(z, dtype=np.float64)
    small = np.abs(z) < 1e-12
    safe = np.where(small, 1.0, z)
    return np.where(small, 1.0 + z / 2.0, np.expm1(safe) / safe)


def etd_phi2(z: np.ndarray) -> np.ndarray:
    """(e^z - 1 - z)/z^2, with the limit 1/2 at z = 0.

    Below |z| ~ 4e-4 the subtraction loses digits, so a Taylor tail takes
    over; both branches agree to about 1e-12 relative at the switch.
    """
    z = np.asarray(z, dtype=np.float64)
    small = np.abs(z) < 4e-4
    safe = np.where(small, 1.0, z)
    series = 0.5 + z / 6.0 + z**2 / 24.0 + z**3 / 120.0
    return np.where(small, series, (np.expm1(safe) - safe) / safe**2)


def _forcing_coeffs(grid: FrequencyGrid, forcing, t: float, c: int) -> np.ndarray:
    if forcing is None:
        return np.zeros((c,) + grid.shape, dtype=np.complex128)
    snap = forcing(t) if callable(forcing) else forcing.sample_at(t)
    if isinstance(snap, SpectralField):
        out = snap.coeffs
    elif isinstance(snap, Field):
        out = grid.fft(snap.samples)
    else:
        raise TypeError(f"forcing returned {type(snap).__name__}")
    if out.shape[0] != c:
        raise ValueError(
            f"forcing has {out.shape[0]} components, initial data has {c}"
        )
    return out


def solve_heat(problem: HeatProblem) -> TimeSeriesField:
    """March the heat equation with the exponential-trapezoid rule.

    Per step, with z = -|k|^2 dt:

        u_next = e^z u + dt*(phi1(z) G_n + phi2(z) (G_{n+1} - G_n)),

    which integrates the linear part exactly and the Duhamel term exactly
    for forcing linear in t.  Snapshots are stored every ``cadence`` steps
    and at the final time.
    """
    grid = problem.grid
    uhat = _initial_coeffs(grid, problem.u0)
    c = uhat.shape[0]
    dt = problem.dt
    z = -grid.k_sq * dt
    decay = np.exp(z)
    phi1 = etd_phi1(z)
    phi2 = etd_phi2(z)
    have_g = problem.forcing is not None
    g_n = _forcing_coeffs(grid, problem.forcing, 0.0, c) if have_g else None
    times = [0.0]
    snaps = [Field(grid, grid.ifft(uhat).real)]
    for n in range(1, problem.n_steps + 1):
        t_next = n * dt
        if have_g:
            g_next = _forcing_coeffs(grid, problem.forcing, t_next, c)
            uhat = decay * uhat + dt * (phi1 * g_n + phi2 * (g_next - g_n))
            g_n = g_next
        else:
            uhat = decay * uhat
        if n % problem.cadence == 0 or n == problem.n_steps:
            times.append(t_next)
            snaps.append(Field(grid, grid.ifft(uhat).real))
    return TimeSeriesField(np.array(times), snaps)


def _materialize_forcing(problem: HeatProblem, times: np.ndarray) -> TimeSeriesField | None:
    if problem.forcing is None:
        return None
    if isinstance(problem.forcing, TimeSeriesField):
        return problem.forcing
    grid = problem.grid
    snaps = []
    for t in times:
        snap = problem.forcing(float(t))
        if isinstance(snap, SpectralField):
            snap = Field(grid, grid.ifft(snap.coeffs).real)
        snaps.append(snap)
    return TimeSeriesField(times.copy(), snaps)


def heat_estimate_report(
    solution: TimeSeriesField,
    problem: HeatProblem,
    q: float,
    q1: float,
    s: float,
    p: float,
    r: float,
    bank: FilterBank,
) -> EstimateReport:
    """Measure the smoothing estimate of the heat flow:

        lhs = ||u|| in L~^q(B^{s+2/q}_{p,r}),
        rhs factors = ||u0|| in B^s_{p,r} and ||G|| in L~^q1(B^{s-2+2/q1}_{p,r}),

    with q1 <= q.  Zero data is flagged degenerate.
    """
    if q1 > q:
        raise ValueError(f"need q1 <= q, got q1={q1}, q={q}")
    grid = problem.grid
    u0 = problem.u0
    if isinstance(u0, SpectralField):
        u0 = Field(grid, grid.ifft(u0.coeffs).real)
    lhs_exp = s + (0.0 if math.isinf(q) else 2.0 / q)
    lhs = chemin_lerner_norm(solution, BesovSpec(lhs_exp, p, r, q), bank)
    u0_norm = besov_norm(u0, BesovSpec(s, p, r), bank)
    g_series = _materialize_forcing(problem, solution.times)
    if g_series is None:
        g_norm = 0.0
    else:
        g_exp = s - 2.0 + (0.0 if math.isinf(q1) else 2.0 / q1)
        g_norm = chemin_lerner_norm(g_series, BesovSpec(g_exp, p, r, q1), bank)
    indices = {"s": s, "p": p, "r": r, "q": q, "q1": q1}
    rhs = u0_norm + g_norm
    if rhs == 0.0:
        return EstimateReport(
            variant="heat",
            indices=indices,
            lhs=lhs,
            factors=[("u0_norm", 0.0), ("G_norm", 0.0)],
            ratio=0.0,
            degenerate=True,
        )
    return EstimateReport(
        variant="heat",
        indices=indices,
        lhs=lhs,
        factors=[("u0_plus_G", rhs)],
        ratio=lhs / rhs,
        degenerate=False,
    )


@dataclass
class TransportProblem:
    """Initial data, advecting velocity, source, horizon and step for
    d_t f + v.grad f = g.

    The velocity is a divergence-free TimeSeriesField covering [0, T];
    construction checks the divergence defect (<= 1e-8 relative) and the
    advective CFL number dt*max|v|*N/L <= 0.5.
    """

    f0: object
    velocity: TimeSeriesField
    source: TimeSeriesField | None
    T: float
    dt: float
    cadence: int = 1

    def __post_init__(self):
        self.n_steps = _n_steps(self.T, self.dt)
        if self.cadence < 1:
            raise ValueError(f"cadence must be >= 1, got {self.cadence}")
        grid = self.velocity.grid
        if self.velocity.components != grid.d:
            raise ValueError("velocity must be a vector field")
        if self.velocity.T < self.T - 1e-12:
            raise ValueError(
                f"velocity series covers [0, {self.velocity.T}], run needs [0, {self.T}]"
            )
        if self.source is not None and self.source.T < self.T - 1e-12:
            raise ValueError(
                f"source series covers [0, {self.source.T}], run needs [0, {self.T}]"
            )
        vmax = 0.0
        for snap in self.velocity.snapshots:
            div_norm = lp_norm(divergence(snap), 2.0)
            scale = max(1.0, lp_norm(snap, 2.0))
            if div_norm > 1e-8 * scale:
                raise ValueError(
                    f"velocity is not divergence-free: |div v|_L2 = {div_norm:.3e}"
                )
            vmax = max(vmax, lp_norm(snap, math.inf))
        cfl = self.dt * vmax * grid.N / grid.L
        if cfl > 0.5 + 1e-12:
            raise ValueError(
                f"CFL violation: dt*max|v|*N/L = {cfl:.3f} > 0.5 with dt={self.dt}"
            )
        self.vmax = vmax

    @property
    def grid(self) -> FrequencyGrid:
        return self.velocity.grid


def _advection_rhs(
    grid: FrequencyGrid,
    fhat: np.ndarray,
    v_samples: np.ndarray,
    g_hat: np.ndarray | None,
) -> np.ndarray:
    """Spectral right side -mask*F[v.grad f] + g_hat for one RK stage."""
    c = fhat.shape[0]
    adv = np.zeros((c,) + grid.shape, dtype=np.float64)
    for a in range(grid.d):
        df = grid.ifft(fhat * _derivative_multiplier(grid, a)).real
        adv += v_samples[a] * df
    out = -grid.fft(adv) * grid.dealias_mask
    if g_hat is not None:
        out = out + g_hat
    return out


def solve_transport(problem: TransportProblem) -> TimeSeriesField:
    """Classical RK4 on the dealiased advection equation.

    Velocity and source are linearly interpolated at the half steps; the
    initial spectrum is dealiased once so every later product stays inside
    the 2/3 mask.
    """
    grid = problem.grid
    fhat = _initial_coeffs(grid, problem.f0) * grid.dealias_mask
    c = fhat.shape[0]
    dt = problem.dt

    def v_at(t: float) -> np.ndarray:
        return problem.velocity.sample_at(t).samples

    def g_at(t: float) -> np.ndarray | None:
        if problem.source is None:
            return None
        return grid.fft(problem.source.sample_at(t).samples) * grid.dealias_mask

    times = [0.0]
    snaps = [Field(grid, grid.ifft(fhat).real)]
    for n in range(problem.n_steps):
        t = n * dt
        v0, vh, v1 = v_at(t), v_at(t + dt / 2.0), v_at(t + dt)
        g0, gh, g1 = g_at(t), g_at(t + dt / 2.0), g_at(t + dt)
        k1 = _advection_rhs(grid, fhat, v0, g0)
        k2 = _advection_rhs(grid, fhat + 0.5 * dt * k1, vh, gh)
        k3 = _advection_rhs(grid, fhat + 0.5 * dt * k2, vh, gh)
        k4 = _advection_rhs(grid, fhat + dt * k3, v1, g1)
        fhat = fhat + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        step = n + 1
        if step % problem.cadence == 0 or step == problem.n_steps:
            times.append(step * dt)
            snaps.append(Field(grid, grid.ifft(fhat).real))
    return TimeSeriesField(np.array(times), snaps)


@dataclass
class EstimateMonitor:
    """Per-snapshot traces of the transport estimate.

    V is the accumulated strength of the advecting gradient; lhs / rhs are
    both sides of the inequality at the minimal admissible constant.
    """

    times: np.ndarray
    V: np.ndarray
    lhs: np.ndarray
    rhs: np.ndarray
    minimal_c: float
    endpoint: bool
    indices: dict

    def ratio_trace(self) -> np.ndarray:
        with np.errstate(divide="ignore", invalid="ignore"):
            out = np.where(self.rhs > 0.0, self.lhs / self.rhs, 0.0)
        return out

    def report(self) -> EstimateReport:
        lhs_sup = float(np.max(self.lhs))
        rhs_sup = float(np.max(self.rhs))
        degenerate = rhs_sup == 0.0
        return EstimateReport(
            variant="transport",
            indices=dict(self.indices),
            lhs=lhs_sup,
            factors=[("rhs_at_minimal_C", rhs_sup), ("minimal_C", self.minimal_c)],
            ratio=self.minimal_c,
            degenerate=degenerate,
        )


def transport_estimate_report(
    solution: TimeSeriesField,
    problem: TransportProblem,
    s: float,
    p: float,
    r: float,
    bank: FilterBank,
) -> EstimateMonitor:
    """Measure the transport estimate

        ||f|| in L~^inf_t(B^s_{p,r})
            <= e^{C V(t)} (||f0|| + int_0^t e^{-C V} ||g|| dtau),
        V(t) = int_0^t max(||grad v||_{B^{d/p}_{p,r}}, ||grad v||_Linf) dtau,

    returning traces at the smallest C for which it holds on the whole run.
    Admissible s: -d*min(1/p, 1-1/p) - 1 < s < 1 + d/p, with the upper
    endpoint allowed exactly when r = 1.
    """
    grid = problem.grid
    d = grid.d
    s_lo = -d * min(1.0 / p, 1.0 - 1.0 / p) - 1.0
    s_hi = 1.0 + d / p
    endpoint = (s == s_hi) and (r == 1.0)
    if not (s_lo < s < s_hi or endpoint):
        raise ValueError(
            f"s={s} outside the admissible range ({s_lo}, {s_hi})"
            f" (endpoint s={s_hi} only with r=1)"
        )
    times = solution.times
    grad_strength = np.empty(times.size)
    for i, t in enumerate(times):
        v = problem.velocity.sample_at(float(t))
        gv = jacobian(v).as_field()
        grad_strength[i] = max(
            besov_norm(gv, BesovSpec(d / p, p, r), bank), lp_norm(gv, math.inf)
        )
    V = cumulative_trapezoid(grad_strength, times, initial=0.0)
    lhs = chemin_lerner_trace(solution, BesovSpec(s, p, r, math.inf), bank)
    f0_field = problem.f0
    if isinstance(f0_field, SpectralField):
        f0_field = Field(grid, grid.ifft(f0_field.coeffs).real)
    f0_norm = besov_norm(f0_field, BesovSpec(s, p, r), bank)
    if problem.source is None:
        g_norms = np.zeros(times.size)
    else:
        g_norms = np.array(
            [
                besov_norm(problem.source.sample_at(float(t)), BesovSpec(s, p, r), bank)
                for t in times
            ]
        )

    def rhs_at(c_val: float) -> np.ndarray:
        with np.errstate(over="ignore"):
            damped = np.exp(-c_val * V) * g_norms
            integral = cumulative_trapezoid(damped, times, initial=0.0)
            return np.exp(c_val * V) * (f0_norm + integral)

    def holds(c_val: float) -> bool:
        rhs = rhs_at(c_val)
        return bool(np.all(lhs <= rhs * (1.0 + 1e-12) + 1e-30))

    if holds(0.0):
        c_min = 0.0
    else:
        hi = 1.0
        while not holds(hi):
            hi *= 2.0
            if hi > 1e9:
                c_min = math.inf
                break
        else:
            lo = 0.0
            for _ in range(60):
                mid = 0.5 * (lo + hi)
                if holds(mid):
                    hi = mid
                else:
                    lo = mid
            c_min = hi
    rhs = rhs_at(c_min) if math.isfinite(c_min) else np.full(times.size, math.inf)
    return EstimateMonitor(
        times=times.copy(),
        V=V,
        lhs=np.asarray(lhs),
        rhs=rhs,
        minimal_c=float(c_min),
        endpoint=endpoint,
        indices={"s": s, "p": p, "r": r, "d": d},
    )
