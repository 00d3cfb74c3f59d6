"""Constructive small-data machinery for viscous, non-resistive MHD on the
periodic box:

    d_t u - Lap u = P div(B (x) B - u (x) u),    div u = 0,
    d_t B + u.grad B = (B.grad) u,               div B = 0.

The solution is built as the limit of a decoupled iteration: u^{n+1} solves
a forced heat equation whose forcing is assembled from iterate n, and
B^{n+1} solves a transport equation advected by u^n.  Initial data enter
truncated at dyadic level n+1, so each iterate is spectrally localized.

The module provides the iteration itself, monitors for the two uniform
bounds that drive it,

    (H1)  ||u^n||_{L~inf(B^{d/p-1}_{p,1})} + ||B^n||_{L~inf(B^{d/p}_{p,1})}
              <= C0 * E0,
    (H2)  ||u^n||_{L~1(B^{d/p+1}_{p,1})} + ||u^n||_{L~2(B^{d/p}_{p,1})}
              <= eta,

a time-horizon selector (largest T whose free heat evolution of u0 keeps
the H2-type norms below eta^2), convergence tracking in norms one
derivative weaker than the solution spaces, and a twin-run uniqueness
gauge that measures the difference of two runs in the spaces

    rho(t)   = ||delta uic||_{L~1_t(B^{d/p}_{p,inf})},
    delta B  in L~inf_t(B^{d/p-1}_{p,inf}),

and verifies an Osgood-type integral inequality
rho <= offset + A_T int rho log(e + C_T/rho).
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field as dc_field

import numpy as np
from scipy.integrate import cumulative_trapezoid

from .littlewood_paley import (
    BesovSpec,
    FilterBank,
    TimeSeriesField,
    besov_norm,
    build_filter_bank,
    chemin_lerner_norm,
    chemin_lerner_trace,
)
from .linear_solvers import HeatProblem, TransportProblem, solve_heat, solve_transport
from .paraproduct import log_interpolation_ratio
from .spectral import (
    Field,
    FrequencyGrid,
    SpectralField,
    divergence,
    leray_project,
    lp_norm,
    make_grid,
    mean_mode,
    tensor_divergence,
    to_physical,
    to_spectral,
)

__all__ = [
    "IterationConfig",
    "MhdInitialData",
    "IterationState",
    "BoundsReport",
    "Horizon",
    "IterationRecord",
    "IterationDiagnostics",
    "UniquenessReport",
    "OsgoodResult",
    "SweepResult",
    "prepare_initial_data",
    "taylor_green_data",
    "perturb_initial_data",
    "truncate_initial_data",
    "select_time_horizon",
    "init_iterate",
    "iterate_once",
    "check_uniform_bounds",
    "run_iteration",
    "system_residual",
    "twin_run_uniqueness",
    "perturbation_sweep",
    "osgood_check",
]


@dataclass
class IterationConfig:
    """Grid, Besov index, stepping and smallness knobs for one iteration run.

    p is restricted to [1, 2d]; eta < 1 and C0 > 1 are the smallness and
    bound constants of the uniform estimates.  ``tolerance`` stops the
    iteration once the successive-difference norm falls below it;
    ``gauge_slack`` scales the perturbation allowance of the uniqueness
    gauge and is not part of the run-config file grammar.
    """

    d: int = 2
    N: int = 64
    L: float = 2.0 * math.pi
    p: float = 2.0
    dt: float = 2e-3
    t_max: float = 0.5
    cadence: int = 1
    eta: float = 0.1
    c0: float = 16.0
    max_iterations: int = 12
    tolerance: float = 1e-10
    seed: int = 0
    j_min: int | None = None
    j_max: int | None = None
    gauge_slack: float = 4.0

    def __post_init__(self):
        if not (1.0 <= self.p <= 2.0 * self.d):
            raise ValueError(f"p must lie in [1, 2*d] = [1, {2 * self.d}], got {self.p}")
        if not (0.0 < self.eta < 1.0):
            raise ValueError(f"eta must lie in (0, 1), got {self.eta}")
        if not self.c0 > 1.0:
            raise ValueError(f"C0 must be > 1, got {self.c0}")
        if self.dt <= 0.0:
            raise ValueError(f"dt must be positive, got {self.dt}")
        if self.t_max < self.dt:
            raise ValueError(f"T_max must be >= dt, got T_max={self.t_max}, dt={self.dt}")
        if self.cadence < 1:
            raise ValueError(f"cadence must be >= 1, got {self.cadence}")
        if self.max_iterations < 0:
            raise ValueError(f"max_iterations must be >= 0, got {self.max_iterations}")
        if self.tolerance < 0.0:
            raise ValueError(f"tolerance must be >= 0, got {self.tolerance}")

    def grid(self) -> FrequencyGrid:
        return make_grid(self.d, self.N, self.L)

    def bank(self, grid: FrequencyGrid | None = None) -> FilterBank:
        return build_filter_bank(grid or self.grid(), self.j_min, self.j_max)


@dataclass
class MhdInitialData:
    """Divergence-free, mean-free velocity and magnetic initial fields.

    Construction validates the invariants; use ``prepare_initial_data`` to
    project raw fields into compliance.
    """

    u0: Field
    b0: Field

    def __post_init__(self):
        grid = self.u0.grid
        if self.b0.grid != grid:
            raise ValueError("u0 and B0 live on different grids")
        d = grid.d
        if self.u0.components != d or self.b0.components != d:
            raise ValueError(f"initial fields must have {d} components")
        for name, f in (("u0", self.u0), ("B0", self.b0)):
            scale = max(1.0, lp_norm(f, 2.0))
            div_norm = lp_norm(divergence(f), 2.0)
            if div_norm > 1e-10 * scale:
                raise ValueError(f"{name} is not divergence-free: |div|_L2 = {div_norm:.3e}")
            mean = np.max(np.abs(mean_mode(f)))
            if mean > 1e-12 * scale:
                raise ValueError(f"{name} has a nonzero mean mode: {mean:.3e}")

    @property
    def grid(self) -> FrequencyGrid:
        return self.u0.grid


def prepare_initial_data(u0: Field, b0: Field) -> MhdInitialData:
    """Leray-project and de-mean raw fields into valid initial data."""
    out = []
    for f in (u0, b0):
        hat = leray_project(to_spectral(f)).coeffs
        hat[(slice(None),) + (0,) * f.grid.d] = 0.0
        out.append(Field(f.grid, f.grid.ifft(hat).real))
    return MhdInitialData(out[0], out[1])


def taylor_green_data(grid: FrequencyGrid, amplitude: float = 0.05) -> MhdInitialData:
    """Small-amplitude cellular data: u0 and B0 are phase-shifted
    Taylor-Green vortices, both exactly divergence-free and mean-free."""
    if grid.d != 2:
        raise ValueError("the cellular data family is two-dimensional")
    x1, x2 = grid.coords()
    u0 = Field(
        grid,
        amplitude * np.stack([np.sin(x1) * np.cos(x2), -np.cos(x1) * np.sin(x2)]),
    )
    b0 = Field(
        grid,
        amplitude * np.stack([np.cos(x1) * np.sin(x2), -np.sin(x1) * np.cos(x2)]),
    )
    return MhdInitialData(u0, b0)


def perturb_initial_data(
    data: MhdInitialData, size: float, seed: int, bank: FilterBank
) -> MhdInitialData:
    """Add a reproducible divergence-free perturbation of L2 size ``size``.

    The noise is band-limited to the interior shells, Leray-projected and
    normalized before scaling, and applied to both fields.  size = 0
    returns data bit-identical to the input.
    """
    if size < 0.0:
        raise ValueError(f"perturbation size must be >= 0, got {size}")
    grid = data.grid
    rng = np.random.default_rng(seed)
    sel = (grid.k_mag >= 2.0 ** (bank.j_min + 1)) & (grid.k_mag <= 2.0 ** (bank.j_max - 1))
    fields = []
    for base in (data.u0, data.b0):
        hat = np.zeros((grid.d,) + grid.shape, dtype=np.complex128)
        vals = rng.normal(size=(grid.d, int(sel.sum()))) + 1j * rng.normal(
            size=(grid.d, int(sel.sum()))
        )
        hat[:, sel] = vals
        noise = to_physical(leray_project(SpectralField(grid, hat)))
        noise = Field(grid, noise.samples - mean_mode(noise)[(...,) + (None,) * grid.d])
        scale = lp_norm(noise, 2.0)
        shaped = noise.samples / scale if scale > 0 else noise.samples
        fields.append(Field(grid, base.samples + size * shaped))
    return MhdInitialData(fields[0], fields[1])


def _clamped_level(bank: FilterBank, n: int) -> int:
    # S_n saturates to the identity (plus mean) once n exceeds the top
    # shell, so levels above j_max+1 truncate nothing on this lattice.
    return min(n, bank.j_max + 1)


def _truncated_coeffs(data: MhdInitialData, level: int, bank: FilterBank):
    mult = bank.lowpass_multiplier(level)
    grid = data.grid
    return (
        SpectralField(grid, grid.fft(data.u0.samples) * mult),
        SpectralField(grid, grid.fft(data.b0.samples) * mult),
    )


def truncate_initial_data(data: MhdInitialData, n: int, bank: FilterBank) -> MhdInitialData:
    """Low-pass both initial fields at dyadic level n (S_n).

    n must lie in [j_min, j_max + 1]; the multiplier is radial, so
    divergence-freeness survives exactly.
    """
    if not bank.j_min <= n <= bank.j_max + 1:
        raise ValueError(f"level {n} outside the dyadic band [{bank.j_min}, {bank.j_max + 1}]")
    u_hat, b_hat = _truncated_coeffs(data, n, bank)
    return MhdInitialData(to_physical(u_hat), to_physical(b_hat))


@dataclass
class Horizon:
    """Selected horizon T plus the free-evolution norm that certified it."""

    T: float
    condition_met: bool
    lhs: float
    threshold: float


def _free_evolution_traces(
    u0: Field, dt: float, t_max: float, p: float, bank: FilterBank
) -> tuple:
    """Combined L~1(B^{d/p+1}) + L~2(B^{d/p}) running norms of e^{t Lap}u0."""
    grid = u0.grid
    d = grid.d
    n_steps = int(round(t_max / dt))
    times = np.arange(n_steps + 1) * dt
    hat0 = grid.fft(u0.samples)
    mat = np.empty((bank.n_shells, times.size))
    for i, t in enumerate(times):
        hat = hat0 * np.exp(-grid.k_sq * t)
        for idx in range(bank.n_shells):
            block = Field(grid, grid.ifft(hat * bank.phi[idx]).real)
            mat[idx, i] = lp_norm(block, p)
    shells = np.asarray(bank.shells, dtype=np.float64)
    l1 = cumulative_trapezoid(mat, times, axis=1, initial=0.0)
    l2 = cumulative_trapezoid(mat**2, times, axis=1, initial=0.0) ** 0.5
    w_hi = 2.0 ** ((d / p + 1.0) * shells)[:, None]
    w_mid = 2.0 ** ((d / p) * shells)[:, None]
    combined = np.sum(l1 * w_hi, axis=0) + np.sum(l2 * w_mid, axis=0)
    return times, combined


def select_time_horizon(
    u0: Field, eta: float, dt: float, t_max: float, p: float, bank: FilterBank
) -> Horizon:
    """Largest multiple of dt <= T_max at which the free heat evolution of
    u0 still satisfies

        ||e^{t Lap}u0||_{L~1_T(B^{d/p+1}_{p,1})}
            + ||e^{t Lap}u0||_{L~2_T(B^{d/p}_{p,1})} <= eta^2.

    Both norms grow monotonically in T, so the threshold index is found by
    bisection on the running-norm trace.  If even one step violates the
    condition, T = dt is returned flagged.
    """
    if not (0.0 < eta < 1.0):
        raise ValueError(f"eta must lie in (0, 1), got {eta}")
    times, combined = _free_evolution_traces(u0, dt, t_max, p, bank)
    threshold = eta * eta
    # combined is nondecreasing; searchsorted is the monotone bisection.
    idx = int(np.searchsorted(combined, threshold, side="right")) - 1
    if idx < 1:
        return Horizon(T=dt, condition_met=False, lhs=float(combined[1]), threshold=threshold)
    return Horizon(
        T=float(times[idx]),
        condition_met=True,
        lhs=float(combined[idx]),
        threshold=threshold,
    )


@dataclass
class IterationState:
    """One iterate of the scheme: series for (u^n, B^n) on [0, T], the
    previous iterate for differencing, and the fixed data/geometry."""

    n: int
    u_series: TimeSeriesField
    b_series: TimeSeriesField
    prev_u: TimeSeriesField | None
    prev_b: TimeSeriesField | None
    data: MhdInitialData
    T: float
    e0: float
    grid: FrequencyGrid
    bank: FilterBank
    p: float

    def u_integral_trace(self) -> np.ndarray:
        """U^n(t) = int_0^t ||u^n||_{B^{d/p+1}_{p,1}} dtau on the snapshot grid."""
        d = self.grid.d
        vals = np.array(
            [
                besov_norm(s, BesovSpec(d / self.p + 1.0, self.p, 1.0), self.bank)
                for s in self.u_series.snapshots
            ]
        )
        return cumulative_trapezoid(vals, self.u_series.times, initial=0.0)


def compute_e0(data: MhdInitialData, p: float, bank: FilterBank) -> float:
    d = data.grid.d
    return besov_norm(data.u0, BesovSpec(d / p - 1.0, p, 1.0), bank) + besov_norm(
        data.b0, BesovSpec(d / p, p, 1.0), bank
    )


def init_iterate(
    data: MhdInitialData,
    config: IterationConfig,
    T: float,
    grid: FrequencyGrid | None = None,
    bank: FilterBank | None = None,
) -> IterationState:
    """Iterate 0: free heat evolution of the level-0 truncated data."""
    grid = grid or data.grid
    bank = bank or config.bank(grid)
    level = _clamped_level(bank, max(0, bank.j_min))
    u_hat, b_hat = _truncated_coeffs(data, level, bank)
    u_series = solve_heat(HeatProblem(u_hat, None, T, config.dt))
    b_series = solve_heat(HeatProblem(b_hat, None, T, config.dt))
    return IterationState(
        n=0,
        u_series=u_series,
        b_series=b_series,
        prev_u=None,
        prev_b=None,
        data=data,
        T=T,
        e0=compute_e0(data, config.p, bank),
        grid=grid,
        bank=bank,
        p=config.p,
    )


def _forcing_series(
    u_series: TimeSeriesField, b_series: TimeSeriesField
) -> TimeSeriesField:
    """P div(B (x) B - u (x) u) snapshot by snapshot."""
    grid = u_series.grid
    snaps = []
    for u, b in zip(u_series.snapshots, b_series.snapshots):
        raw = tensor_divergence(b, b) - tensor_divergence(u, u)
        snaps.append(to_physical(leray_project(to_spectral(raw))))
    return TimeSeriesField(u_series.times.copy(), snaps)


def _stretching_series(
    u_series: TimeSeriesField, b_series: TimeSeriesField
) -> TimeSeriesField:
    """div(u (x) B) = (B.grad)u snapshot by snapshot."""
    snaps = [
        tensor_divergence(u, b)
        for u, b in zip(u_series.snapshots, b_series.snapshots)
    ]
    return TimeSeriesField(u_series.times.copy(), snaps)


def iterate_once(state: IterationState, config: IterationConfig) -> IterationState:
    """Advance the scheme one index:

    u^{n+1}: heat solve from level-(n+1) truncated u0 under the
             Leray-projected tensor forcing of iterate n,
    B^{n+1}: transport solve advected by u^n from level-(n+1) truncated B0
             with the stretching source (B^n.grad)u^n.
    """
    n_next = state.n + 1
    level = _clamped_level(state.bank, max(n_next, state.bank.j_min))
    u_hat, b_hat = _truncated_coeffs(state.data, level, state.bank)
    forcing = _forcing_series(state.u_series, state.b_series)
    u_next = solve_heat(HeatProblem(u_hat, forcing, state.T, config.dt))
    source = _stretching_series(state.u_series, state.b_series)
    b_next = solve_transport(
        TransportProblem(b_hat, state.u_series, source, state.T, config.dt)
    )
    return IterationState(
        n=n_next,
        u_series=u_next,
        b_series=b_next,
        prev_u=state.u_series,
        prev_b=state.b_series,
        data=state.data,
        T=state.T,
        e0=state.e0,
        grid=state.grid,
        bank=state.bank,
        p=state.p,
    )


@dataclass
class BoundsReport:
    """Both uniform bounds of one iterate, as lhs/rhs pairs."""

    h1_lhs: float
    h1_rhs: float
    h2_lhs: float
    h2_rhs: float

    @property
    def h1_margin(self) -> float:
        return self.h1_rhs - self.h1_lhs

    @property
    def h2_margin(self) -> float:
        return self.h2_rhs - self.h2_lhs


def check_uniform_bounds(state: IterationState, config: IterationConfig) -> BoundsReport:
    """Evaluate (H1) and (H2) for the current iterate."""
    d = state.grid.d
    p = config.p
    bank = state.bank
    inf = math.inf
    h1 = chemin_lerner_norm(
        state.u_series, BesovSpec(d / p - 1.0, p, 1.0, inf), bank
    ) + chemin_lerner_norm(state.b_series, BesovSpec(d / p, p, 1.0, inf), bank)
    h2 = chemin_lerner_norm(
        state.u_series, BesovSpec(d / p + 1.0, p, 1.0, 1.0), bank
    ) + chemin_lerner_norm(state.u_series, BesovSpec(d / p, p, 1.0, 2.0), bank)
    return BoundsReport(
        h1_lhs=float(h1),
        h1_rhs=float(config.c0 * state.e0),
        h2_lhs=float(h2),
        h2_rhs=float(config.eta),
    )


def _difference_norm(state: IterationState) -> float:
    """Successive-difference norm one derivative below the solution spaces:
    ||u^{n}-u^{n-1}|| in L~inf(B^{d/p-3/2}_{p,1}) plus
    ||B^{n}-B^{n-1}|| in L~inf(B^{d/p-1}_{p,1})."""
    if state.prev_u is None:
        return math.nan
    d = state.grid.d
    p = state.p
    bank = state.bank
    du = state.u_series - state.prev_u
    db = state.b_series - state.prev_b
    return float(
        chemin_lerner_norm(du, BesovSpec(d / p - 1.5, p, 1.0, math.inf), bank)
        + chemin_lerner_norm(db, BesovSpec(d / p - 1.0, p, 1.0, math.inf), bank)
    )


@dataclass
class IterationRecord:
    """One diagnostics row: iterate index, bound values, difference norm."""

    n: int
    h1_lhs: float
    h1_rhs: float
    h2_lhs: float
    h2_rhs: float
    d_n: float
    wallclock_s: float


@dataclass
class IterationDiagnostics:
    """Everything a run produces: per-iterate records, convergence flags,
    the decay fit of the difference norms, and the final iterate."""

    T: float
    e0: float
    horizon: Horizon
    records: list
    converged: bool
    decay_ratio: float | None
    final_state: IterationState

    @property
    def difference_norms(self) -> list:
        return [r.d_n for r in self.records if math.isfinite(r.d_n)]


def _decay_ratio(d_values: list) -> float | None:
    """Geometric-decay ratio of the difference norms, fitted log-linearly
    over the decaying prefix (entries above the roundoff floor)."""
    vals = np.array([v for v in d_values if math.isfinite(v)])
    vals = vals[vals > 0.0]
    if vals.size < 2:
        return None
    floor = np.max(vals) * 1e-13
    keep = vals > floor
    vals = vals[keep]
    if vals.size < 2:
        return None
    n = np.arange(vals.size)
    slope = np.polyfit(n, np.log(vals), 1)[0]
    return float(math.exp(slope))


def run_iteration(
    data: MhdInitialData,
    config: IterationConfig,
    T_override: float | None = None,
) -> IterationDiagnostics:
    """Drive the iteration to ``max_iterations`` or tolerance.

    The horizon comes from ``select_time_horizon`` unless overridden.  Row
    n carries the bounds of iterate n and the difference norm D_n between
    iterates n+1 and n (nan on the last row).  Non-convergence is reported
    through the flags, never raised.
    """
    grid = data.grid
    bank = config.bank(grid)
    if T_override is None:
        horizon = select_time_horizon(
            data.u0, config.eta, config.dt, config.t_max, config.p, bank
        )
    else:
        times, combined = _free_evolution_traces(
            data.u0, config.dt, T_override, config.p, bank
        )
        horizon = Horizon(
            T=float(T_override),
            condition_met=bool(combined[-1] <= config.eta**2),
            lhs=float(combined[-1]),
            threshold=config.eta**2,
        )
    t_start = time.perf_counter()
    state = init_iterate(data, config, horizon.T, grid, bank)
    bounds = check_uniform_bounds(state, config)
    records = [
        IterationRecord(
            n=0,
            h1_lhs=bounds.h1_lhs,
            h1_rhs=bounds.h1_rhs,
            h2_lhs=bounds.h2_lhs,
            h2_rhs=bounds.h2_rhs,
            d_n=math.nan,
            wallclock_s=time.perf_counter() - t_start,
        )
    ]
    converged = False
    for _ in range(config.max_iterations):
        t0 = time.perf_counter()
        state = iterate_once(state, config)
        d_n = _difference_norm(state)
        records[-1].d_n = d_n
        bounds = check_uniform_bounds(state, config)
        records.append(
            IterationRecord(
                n=state.n,
                h1_lhs=bounds.h1_lhs,
                h1_rhs=bounds.h1_rhs,
                h2_lhs=bounds.h2_lhs,
                h2_rhs=bounds.h2_rhs,
                d_n=math.nan,
                wallclock_s=time.perf_counter() - t0,
            )
        )
        if config.tolerance > 0.0 and d_n < config.tolerance:
            converged = True
            break
    d_values = [r.d_n for r in records]
    return IterationDiagnostics(
        T=horizon.T,
        e0=state.e0,
        horizon=horizon,
        records=records,
        converged=converged,
        decay_ratio=_decay_ratio(d_values),
        final_state=state,
    )


def system_residual(u_series: TimeSeriesField, b_series: TimeSeriesField) -> dict:
    """L2 residuals of both equations at interior snapshots, with the time
    derivative from central differences and all space terms spectral.

    Returns arrays keyed "u" and "b", one value per interior snapshot.
    This is an independent consistency probe: it never reuses solver state.
    """
    grid = u_series.grid
    times = u_series.times
    res_u, res_b = [], []
    for i in range(1, times.size - 1):
        dt2 = times[i + 1] - times[i - 1]
        du_dt = (u_series.snapshots[i + 1].samples - u_series.snapshots[i - 1].samples) / dt2
        db_dt = (b_series.snapshots[i + 1].samples - b_series.snapshots[i - 1].samples) / dt2
        u = u_series.snapshots[i]
        b = b_series.snapshots[i]
        lap_u = grid.ifft(grid.fft(u.samples) * (-grid.k_sq)).real
        forcing = to_physical(
            leray_project(
                to_spectral(tensor_divergence(b, b) - tensor_divergence(u, u))
            )
        )
        r_u = Field(grid, du_dt - lap_u - forcing.samples)
        advect = tensor_divergence(b, u)
        stretch = tensor_divergence(u, b)
        r_b = Field(grid, db_dt + advect.samples - stretch.samples)
        res_u.append(lp_norm(r_u, 2.0))
        res_b.append(lp_norm(r_b, 2.0))
    return {"u": np.array(res_u), "b": np.array(res_b), "times": times[1:-1]}


@dataclass
class OsgoodResult:
    """Verdict of the integral inequality, with the worst pointwise margin."""

    passed: bool
    worst_margin: float
    margins: np.ndarray


def osgood_check(
    times: np.ndarray, rho: np.ndarray, a_t: float, c_t: float, offset: float
) -> OsgoodResult:
    """Check rho(t) <= offset + A_T * int_0^t rho log(e + C_T/rho) dtau
    pointwise under trapezoid quadrature, with the integrand 0 where
    rho = 0."""
    rho = np.asarray(rho, dtype=np.float64)
    if np.any(rho < 0.0):
        raise ValueError("rho must be nonnegative")
    with np.errstate(divide="ignore", invalid="ignore"):
        integrand = np.where(
            rho > 0.0, rho * np.log(math.e + c_t / np.where(rho > 0.0, rho, 1.0)), 0.0
        )
    rhs = offset + a_t * cumulative_trapezoid(integrand, times, initial=0.0)
    margins = rhs - rho
    slack = 1e-15 * max(1.0, offset, float(np.max(rho, initial=0.0)))
    return OsgoodResult(
        passed=bool(np.all(margins >= -slack)),
        worst_margin=float(np.min(margins)),
        margins=margins,
    )


@dataclass
class UniquenessReport:
    """Twin-run gauge output: the difference growth rho, the measured
    inequality data (A_T, C_T, empirical constant), and the verdict."""

    perturbation_size: float
    T: float
    times: np.ndarray
    rho: np.ndarray
    delta_b_trace: np.ndarray
    a_t: float
    c_t: float
    c_emp: float
    offset: float
    solution_scale: float
    osgood_passed: bool
    worst_margin: float


def _twin_report(
    base: IterationDiagnostics,
    data: MhdInitialData,
    config: IterationConfig,
    size: float,
) -> UniquenessReport:
    grid = data.grid
    bank = base.final_state.bank
    d = grid.d
    p = config.p
    pert = perturb_initial_data(data, size, config.seed + 7919, bank)
    twin = run_iteration(pert, config, T_override=base.T)
    du = base.final_state.u_series - twin.final_state.u_series
    db = base.final_state.b_series - twin.final_state.b_series
    times = du.times
    rho = chemin_lerner_trace(du, BesovSpec(d / p, p, math.inf, 1.0), bank)
    db_trace = chemin_lerner_trace(db, BesovSpec(d / p - 1.0, p, math.inf, math.inf), bank)
    u1 = base.final_state.u_series
    b1 = base.final_state.b_series
    b2 = twin.final_state.b_series
    u1_vals = np.array(
        [besov_norm(s, BesovSpec(d / p + 1.0, p, 1.0), bank) for s in u1.snapshots]
    )
    u1_l1 = float(np.trapezoid(u1_vals, times))
    b1_sup = chemin_lerner_norm(b1, BesovSpec(d / p, p, 1.0, math.inf), bank)
    b2_sup = chemin_lerner_norm(b2, BesovSpec(d / p, p, 1.0, math.inf), bank)
    bridge = log_interpolation_ratio(du, d / p, p, 1.0, 1.0, bank)
    c_emp = 1.0 if bridge.degenerate else max(1.0, bridge.ratio)
    a_t = c_emp * math.exp(c_emp * u1_l1) * b2_sup * (b1_sup + b2_sup)
    c_t = float(
        chemin_lerner_norm(du, BesovSpec(d / p - 1.0, p, math.inf, 1.0), bank)
        + chemin_lerner_norm(du, BesovSpec(d / p + 1.0, p, math.inf, 1.0), bank)
    )
    du0_norm = besov_norm(du.snapshots[0], BesovSpec(d / p, p, math.inf), bank)
    db0_norm = besov_norm(db.snapshots[0], BesovSpec(d / p - 1.0, p, math.inf), bank)
    scale = chemin_lerner_norm(
        u1, BesovSpec(d / p - 1.0, p, 1.0, math.inf), bank
    ) + chemin_lerner_norm(b1, BesovSpec(d / p, p, 1.0, math.inf), bank)
    offset = (
        config.gauge_slack * base.T * (du0_norm + a_t * db0_norm)
        + 1e-14 * base.T * (1.0 + scale)
    )
    verdict = osgood_check(times, rho, a_t, c_t, offset)
    return UniquenessReport(
        perturbation_size=size,
        T=base.T,
        times=times.copy(),
        rho=np.asarray(rho),
        delta_b_trace=np.asarray(db_trace),
        a_t=a_t,
        c_t=c_t,
        c_emp=c_emp,
        offset=offset,
        solution_scale=float(scale),
        osgood_passed=verdict.passed,
        worst_margin=verdict.worst_margin,
    )


def twin_run_uniqueness(
    data: MhdInitialData, config: IterationConfig, perturbation_size: float
) -> UniquenessReport:
    """Run the iteration twice (base data, perturbed data) on one shared
    horizon and gauge the difference against the Osgood inequality."""
    base = run_iteration(data, config)
    return _twin_report(base, data, config, perturbation_size)


@dataclass
class SweepResult:
    """rho(T) against perturbation size, with the fitted log-log slope."""

    sizes: np.ndarray
    rho_final: np.ndarray
    slope: float
    reports: list


def perturbation_sweep(
    data: MhdInitialData, config: IterationConfig, sizes
) -> SweepResult:
    """One base run, one twin per size; fits log rho(T) against log size."""
    base = run_iteration(data, config)
    reports = [_twin_report(base, data, config, float(s)) for s in sizes]
    sizes = np.asarray(sizes, dtype=np.float64)
    rho_final = np.array([r.rho[-1] for r in reports])
    keep = (sizes > 0.0) & (rho_final > 0.0)
    if keep.sum() >= 2:
        slope = float(np.polyfit(np.log(sizes[keep]), np.log(rho_final[keep]), 1)[0])
    else:
        slope = math.nan
    return SweepResult(sizes=sizes, rho_final=rho_final, slope=slope, reports=reports)
