"""Seeded verification suites behind the ``verify`` command.

Each suite runs a reproducible corpus through one family of checkers and
returns a SuiteResult: a pass/fail verdict, human-readable failure
messages, summary statistics, and the raw per-sample reports for CSV
export.  Empirical ratio distributions are regression-checked against the
windows committed in ``baselines.json``; a missing window is a failure,
never a silent skip.
"""

from __future__ import annotations

import importlib.resources
import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field as dc_field

import numpy as np

from .littlewood_paley import (
    BesovSpec,
    FilterBank,
    TimeSeriesField,
    bernstein_ratios,
    build_filter_bank,
)
from .linear_solvers import (
    HeatProblem,
    TransportProblem,
    heat_estimate_report,
    solve_heat,
    solve_transport,
    transport_estimate_report,
)
from .paraproduct import (
    bony_decompose,
    log_interpolation_ratio,
    product_law_ratio,
)
from .random_fields import (
    decaying_series,
    divergence_free_field,
    interior_field,
    ring_field,
    sample_rng,
)
from .spectral import Field, FrequencyGrid, dealiased_product, lp_norm, make_grid

__all__ = [
    "SuiteResult",
    "load_baselines",
    "run_bernstein_suite",
    "run_bony_suite",
    "run_products_suite",
    "run_loginterp_suite",
    "run_heat_suite",
    "run_transport_suite",
    "SUITES",
]

DEFAULT_SAMPLES = 100


@dataclass
class SuiteResult:
    """Outcome of one verification suite."""

    name: str
    passed: bool
    n_samples: int
    failures: list = dc_field(default_factory=list)
    stats: dict = dc_field(default_factory=dict)
    reports: list = dc_field(default_factory=list)

    def summary(self) -> str:
        verdict = "pass" if self.passed else "FAIL"
        stat_str = ", ".join(f"{k}={v:.6g}" for k, v in self.stats.items())
        return f"[{verdict}] {self.name}: {self.n_samples} samples ({stat_str})"


def load_baselines() -> dict:
    """Committed empirical windows, shipped alongside the package."""
    text = importlib.resources.files("lpmhd").joinpath("baselines.json").read_text()
    return json.loads(text)


def _map(fn, items, threads: int):
    if threads <= 1:
        return [fn(item) for item in items]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, items))


def _default_geometry(grid: FrequencyGrid | None, bank: FilterBank | None):
    grid = grid or make_grid(2, 64, 2.0 * math.pi)
    bank = bank or build_filter_bank(grid)
    return grid, bank


def _window_check(value: float, window, label: str, failures: list):
    lo, hi = window
    if not (lo <= value <= hi):
        failures.append(f"{label} = {value:.6g} outside committed window [{lo}, {hi}]")


def run_bernstein_suite(
    grid: FrequencyGrid | None = None,
    bank: FilterBank | None = None,
    seed: int = 0,
    n_samples: int = DEFAULT_SAMPLES,
    threads: int = 1,
    baselines: dict | None = None,
) -> SuiteResult:
    """Two-sided derivative-ratio measurements on exactly ring-supported
    fields, across shells, derivative orders, and (p, q) pairs."""
    grid, bank = _default_geometry(grid, bank)
    baselines = baselines if baselines is not None else load_baselines()
    window = baselines["bernstein"]
    levels = [j for j in range(bank.j_min, bank.j_max + 1)
              if (8.0 / 3.0) * 2.0**j <= grid.k_nyquist and 2.0**j >= grid.k_min]
    pq_pairs = [(2.0, 2.0), (2.0, math.inf), (1.0, 2.0)]
    orders = [1, 2]

    def one(i: int):
        rng = sample_rng(seed, i)
        lam = 2.0 ** levels[i % len(levels)]
        p, q = pq_pairs[i % len(pq_pairs)]
        k_order = orders[i % len(orders)]
        f = ring_field(grid, lam, rng)
        return bernstein_ratios(f, lam, k_order, p, q, "ring", window=window)

    reports = _map(one, range(n_samples), threads)
    failures = []
    uppers = np.array([r.upper_ratio for r in reports])
    lowers = np.array([r.lower_ratio for r in reports])
    for r in reports:
        if r.in_window is False:
            failures.append(
                f"lam={r.lam} k={r.k_order} p={r.p} q={r.q}: upper={r.upper_ratio:.6g} "
                f"lower={r.lower_ratio:.6g} outside window"
            )
    stats = {
        "upper_min": float(uppers.min()),
        "upper_max": float(uppers.max()),
        "upper_median": float(np.median(uppers)),
        "lower_min": float(lowers.min()),
        "lower_max": float(lowers.max()),
        "lower_median": float(np.median(lowers)),
    }
    return SuiteResult("bernstein", not failures, n_samples, failures, stats, reports)


def run_bony_suite(
    grid: FrequencyGrid | None = None,
    bank: FilterBank | None = None,
    seed: int = 0,
    n_samples: int = DEFAULT_SAMPLES,
    threads: int = 1,
    tolerance: float = 1e-10,
    baselines: dict | None = None,
) -> SuiteResult:
    """Reconstruction residual of the three-part product splitting over
    random band-limited pairs."""
    grid, bank = _default_geometry(grid, bank)

    def one(i: int):
        rng = sample_rng(seed, i)
        u = interior_field(grid, bank, rng)
        v = interior_field(grid, bank, rng)
        parts = bony_decompose(bank, u, v)
        resid = parts.reconstruction() - dealiased_product(u, v)
        return lp_norm(resid, 2.0) / (lp_norm(u, 2.0) * lp_norm(v, 2.0))

    residuals = np.array(_map(one, range(n_samples), threads))
    failures = [
        f"sample {i}: relative residual {r:.3e} > {tolerance:.0e}"
        for i, r in enumerate(residuals)
        if r > tolerance
    ]
    stats = {"max_relative_residual": float(residuals.max())}
    return SuiteResult("bony", not failures, n_samples, failures, stats, [])


_VARIANTS = ("T", "R", "full", "mixed")


def _variant_indices(variant: str, d: int, p: float) -> tuple:
    base = d / p
    if variant == "mixed":
        return base, base - 0.5
    return base, base


def run_products_suite(
    grid: FrequencyGrid | None = None,
    bank: FilterBank | None = None,
    seed: int = 0,
    n_samples: int = DEFAULT_SAMPLES,
    threads: int = 1,
    p: float = 2.0,
    s1: float | None = None,
    s2: float | None = None,
    variants: tuple = _VARIANTS,
    baselines: dict | None = None,
) -> SuiteResult:
    """Empirical constants of the paraproduct, remainder, and full product
    estimates over a random corpus, one distribution per variant.

    Index overrides are validated by the checker itself; an inadmissible
    pair raises with the violated condition named.
    """
    grid, bank = _default_geometry(grid, bank)
    baselines = baselines if baselines is not None else load_baselines()
    windows = baselines["products"]
    failures = []
    stats = {}
    all_reports = []
    for variant in variants:
        v1, v2 = _variant_indices(variant, grid.d, p)
        use_s1 = v1 if s1 is None else s1
        use_s2 = v2 if s2 is None else s2

        def one(i: int, variant=variant, use_s1=use_s1, use_s2=use_s2):
            rng = sample_rng(seed, i)
            f = interior_field(grid, bank, rng)
            g = interior_field(grid, bank, rng)
            return product_law_ratio(
                bank, f, g, use_s1, use_s2, p, variant, seed=seed
            )

        reports = _map(one, range(n_samples), threads)
        all_reports.extend(reports)
        ratios = np.array([r.ratio for r in reports])
        if not np.all(np.isfinite(ratios)):
            failures.append(f"variant {variant}: non-finite ratio in corpus")
            continue
        r_max = float(ratios.max())
        r_med = float(np.median(ratios))
        stats[f"{variant}_max"] = r_max
        stats[f"{variant}_median"] = r_med
        if r_med > 0 and r_max / r_med >= 10.0:
            failures.append(
                f"variant {variant}: max/median = {r_max / r_med:.3g} >= 10"
            )
        _window_check(r_max, windows[variant], f"variant {variant} max ratio", failures)
    return SuiteResult(
        "products", not failures, n_samples * len(variants), failures, stats, all_reports
    )


def run_loginterp_suite(
    grid: FrequencyGrid | None = None,
    bank: FilterBank | None = None,
    seed: int = 0,
    n_samples: int = DEFAULT_SAMPLES,
    threads: int = 1,
    p: float = 2.0,
    baselines: dict | None = None,
) -> SuiteResult:
    """Logarithmic shell-summation bridge measured on decaying series."""
    grid, bank = _default_geometry(grid, bank)
    baselines = baselines if baselines is not None else load_baselines()
    window = baselines["loginterp"]["max_ratio"]
    times = np.linspace(0.0, 0.1, 11)
    eps_cycle = (0.25, 0.5, 1.0)
    s = grid.d / p

    def one(i: int):
        rng = sample_rng(seed, i)
        series = decaying_series(grid, bank, rng, times)
        eps = eps_cycle[i % len(eps_cycle)]
        return log_interpolation_ratio(series, s, p, 1.0, eps, bank, seed=seed)

    reports = _map(one, range(n_samples), threads)
    failures = []
    ratios = []
    for i, rep in enumerate(reports):
        if rep.degenerate:
            failures.append(f"sample {i}: unexpectedly degenerate")
        elif not math.isfinite(rep.ratio):
            failures.append(f"sample {i}: non-finite ratio")
        else:
            ratios.append(rep.ratio)
    stats = {"max_ratio": float(np.max(ratios)), "median_ratio": float(np.median(ratios))}
    _window_check(stats["max_ratio"], window, "max ratio", failures)
    return SuiteResult("loginterp", not failures, n_samples, failures, stats, reports)


def run_heat_suite(
    grid: FrequencyGrid | None = None,
    bank: FilterBank | None = None,
    seed: int = 0,
    n_samples: int = DEFAULT_SAMPLES,
    threads: int = 1,
    baselines: dict | None = None,
) -> SuiteResult:
    """Deterministic exactness and order checks for the heat marcher, plus
    the smoothing-estimate ratio distribution over a random corpus."""
    grid, bank = _default_geometry(grid, bank)
    baselines = baselines if baselines is not None else load_baselines()
    window = baselines["heat"]["max_ratio"]
    failures = []
    stats = {}
    d = grid.d

    # Single-mode decay is exact for the exponential integrator.
    axes = grid.coords()
    u0 = Field(grid, np.cos(2.0 * axes[0] + axes[1])[None])
    T, dt = 0.1, 2e-3
    sol = solve_heat(HeatProblem(u0, None, T, dt))
    ksq = 5.0 * (2.0 * math.pi / grid.L) ** 2
    exact = math.exp(-ksq * T)
    err = float(np.max(np.abs(sol.snapshots[-1].samples - exact * u0.samples)))
    stats["single_mode_error"] = err
    if err > 1e-13:
        failures.append(f"single-mode decay error {err:.3e} > 1e-13")

    # Self-convergence of the two-stage forcing rule on a nonlinear-in-time
    # forcing; halving dt should cut the error by about four.
    forcing_rng = sample_rng(seed, 10_000)
    g_shape = interior_field(grid, bank, forcing_rng)

    def forcing(t: float) -> Field:
        return Field(grid, math.sin(3.0 * t) * g_shape.samples)

    u0_rand = interior_field(grid, bank, sample_rng(seed, 10_001))
    finals = []
    for divider in (1, 2, 4):
        sol_k = solve_heat(HeatProblem(u0_rand, forcing, 0.1, 0.02 / divider))
        finals.append(sol_k.snapshots[-1].samples)
    e1 = float(np.max(np.abs(finals[0] - finals[2])))
    e2 = float(np.max(np.abs(finals[1] - finals[2])))
    order = math.log2(e1 / e2) if e2 > 0 else math.inf
    stats["etd_order"] = order
    if order < 2.0:
        failures.append(f"self-convergence order {order:.3f} < 2")

    # Scale invariance of the estimate ratio, homogeneous and forced.
    series_times = np.linspace(0.0, 0.1, 6)
    g_series = decaying_series(grid, bank, sample_rng(seed, 10_002), series_times)
    for label, forcing_used in (("homogeneous", None), ("forced", g_series)):
        prob = HeatProblem(u0_rand, forcing_used, 0.1, 2e-3)
        base_rep = heat_estimate_report(
            solve_heat(prob), prob, 1.0, 1.0, d / 2.0 - 1.0, 2.0, 1.0, bank
        )
        scaled_forcing = (
            None
            if forcing_used is None
            else TimeSeriesField(
                forcing_used.times.copy(),
                [Field(grid, 10.0 * s.samples) for s in forcing_used.snapshots],
            )
        )
        prob10 = HeatProblem(
            Field(grid, 10.0 * u0_rand.samples), scaled_forcing, 0.1, 2e-3
        )
        scaled_rep = heat_estimate_report(
            solve_heat(prob10), prob10, 1.0, 1.0, d / 2.0 - 1.0, 2.0, 1.0, bank
        )
        rel = abs(scaled_rep.ratio - base_rep.ratio) / base_rep.ratio
        stats[f"scale_drift_{label}"] = rel
        if rel > 1e-12:
            failures.append(f"{label} ratio drifts {rel:.3e} under 10x data scaling")

    # Ratio distribution over random forced problems.
    def one(i: int):
        rng = sample_rng(seed, i)
        u_init = interior_field(grid, bank, rng)
        g = decaying_series(grid, bank, rng, series_times)
        prob = HeatProblem(u_init, g, 0.1, 2e-3)
        return heat_estimate_report(
            solve_heat(prob), prob, 1.0, 1.0, d / 2.0 - 1.0, 2.0, 1.0, bank
        )

    reports = _map(one, range(n_samples), threads)
    ratios = np.array([r.ratio for r in reports])
    stats["max_ratio"] = float(ratios.max())
    if not np.all(np.isfinite(ratios)):
        failures.append("non-finite smoothing-estimate ratio in corpus")
    _window_check(stats["max_ratio"], window, "max ratio", failures)
    return SuiteResult("heat", not failures, n_samples, failures, stats, reports)


def _constant_velocity_series(grid: FrequencyGrid, vec, T: float) -> TimeSeriesField:
    v = Field(grid, np.broadcast_to(
        np.asarray(vec, dtype=np.float64).reshape((grid.d,) + (1,) * grid.d),
        (grid.d,) + grid.shape,
    ).copy())
    return TimeSeriesField(np.array([0.0, T]), [v, v.copy()])


def _steady_series(v: Field, T: float) -> TimeSeriesField:
    return TimeSeriesField(np.array([0.0, T]), [v, v.copy()])


def run_transport_suite(
    grid: FrequencyGrid | None = None,
    bank: FilterBank | None = None,
    seed: int = 0,
    n_samples: int = DEFAULT_SAMPLES,
    threads: int = 1,
    baselines: dict | None = None,
) -> SuiteResult:
    """Exact-translation and conservation checks for the advection marcher,
    the committed shear-flow estimate constant, and the minimal-constant
    distribution over random divergence-free flows."""
    grid, bank = _default_geometry(grid, bank)
    baselines = baselines if baselines is not None else load_baselines()
    shear_window = baselines["transport"]["shear_minimal_c"]
    corpus_window = baselines["transport"]["max_minimal_c"]
    failures = []
    stats = {}
    axes = grid.coords()

    # Constant velocity translates the field; compare against the exact
    # spectral shift.  Space is exact here, so what remains is the RK4
    # phase error, about (dt |k.v|)^5 / 120 per step.
    vec = (1.0, -0.5) if grid.d == 2 else (1.0, -0.5, 0.25)
    T, dt = 0.5, 2e-3
    f0 = Field(grid, (np.sin(axes[0]) * np.cos(2.0 * axes[1]))[None])
    sol = solve_transport(
        TransportProblem(f0, _constant_velocity_series(grid, vec, T), None, T, dt)
    )
    hat = grid.fft(f0.samples)
    phase = np.zeros(grid.shape, dtype=np.complex128)
    for a in range(grid.d):
        shape = [1] * grid.d
        shape[a] = grid.N
        phase = phase + grid.k1d.reshape(shape) * vec[a]
    shifted = Field(grid, grid.ifft(hat * np.exp(-1j * phase * T)).real)
    err = float(np.max(np.abs(sol.snapshots[-1].samples - shifted.samples)))
    stats["translation_error"] = err
    if err > 1e-11:
        failures.append(f"translation error {err:.3e} > 1e-11 at T={T}")

    # Divergence-free shear advection conserves the L2 norm.
    shear = Field(grid, np.stack(
        [np.sin(axes[1])] + [np.zeros(grid.shape)] * (grid.d - 1)
    ))
    f_shear = Field(grid, (np.sin(axes[0]) * np.cos(2.0 * axes[1]))[None])
    sol_shear = solve_transport(
        TransportProblem(f_shear, _steady_series(shear, 1.0), None, 1.0, 2e-3)
    )
    drift = abs(lp_norm(sol_shear.snapshots[-1], 2.0) - lp_norm(f_shear, 2.0))
    stats["l2_drift"] = drift
    if drift > 1e-6:
        failures.append(f"L2 drift {drift:.3e} > 1e-6 over T=1")

    # Minimal estimate constant for the committed shear configuration.
    prob_c = TransportProblem(f_shear, _steady_series(shear, 0.5), None, 0.5, 2e-3)
    monitor = transport_estimate_report(
        solve_transport(prob_c), prob_c, 1.0, 2.0, 1.0, bank
    )
    stats["shear_minimal_c"] = monitor.minimal_c
    _window_check(monitor.minimal_c, shear_window, "shear minimal C", failures)

    # Random divergence-free steady flows: the minimal constant exists and
    # stays within the committed window.
    def one(i: int):
        rng = sample_rng(seed, i)
        v = divergence_free_field(grid, bank, rng)
        f_init = interior_field(grid, bank, rng)
        prob = TransportProblem(f_init, _steady_series(v, 0.25), None, 0.25, 2e-3)
        return transport_estimate_report(
            solve_transport(prob), prob, 1.0, 2.0, 1.0, bank
        )

    monitors = _map(one, range(n_samples), threads)
    cs = np.array([m.minimal_c for m in monitors])
    stats["max_minimal_c"] = float(cs.max())
    if not np.all(np.isfinite(cs)):
        failures.append("non-finite minimal constant in corpus")
    _window_check(stats["max_minimal_c"], corpus_window, "max minimal C", failures)
    reports = [m.report() for m in monitors]
    return SuiteResult("transport", not failures, n_samples, failures, stats, reports)


SUITES = {
    "bernstein": run_bernstein_suite,
    "bony": run_bony_suite,
    "products": run_products_suite,
    "loginterp": run_loginterp_suite,
    "heat": run_heat_suite,
    "transport": run_transport_suite,
}
