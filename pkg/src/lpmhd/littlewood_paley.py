"""Dyadic (Littlewood-Paley) frequency decomposition on the periodic lattice,
and the Besov / Chemin-Lerner norms built on top of it.

The bank is generated by one smooth radial profile phi supported in the
annulus 3/4 <= |xi| <= 8/3, with

    phi(xi) = psi(|xi|) / sum_k psi(2^-k |xi|),
    psi(rho) = exp(-1/(x(1-x))),  x = (rho - 3/4) / (8/3 - 3/4),

so that sum_j phi(2^-j xi) = 1 for every xi != 0.  On a finite lattice only
shells j_min..j_max are kept; the partition identity then holds exactly on
the interior band 2^(j_min+1) <= |k| <= 2^(j_max-1), which is where all
quantitative claims are made.  The k = 0 mean mode belongs to no shell; it
rides along as a separate diagnostic (``spectral.mean_mode``) and is
re-attached by the low-pass operator.

Shell j multiplier:   phi_j(k)  = phi(2^-j k)        (annulus 2^j * [3/4, 8/3])
Low-pass j:           S_j       = 1_{k=0} + sum_{j' <= j-1} phi_j'
Besov norm:           || 2^(js) ||Delta_j f||_Lp ||_{l^r over j}
Chemin-Lerner norm:   time L^q per shell first, then the l^r shell sum.
"""

from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass
from itertools import combinations_with_replacement

import numpy as np
from scipy.integrate import cumulative_trapezoid

from .spectral import Field, FrequencyGrid, SpectralField, lp_norm, to_physical

__all__ = [
    "ANNULUS_LO",
    "ANNULUS_HI",
    "FilterBank",
    "BesovSpec",
    "TimeSeriesField",
    "BernsteinReport",
    "default_band",
    "build_filter_bank",
    "dyadic_block",
    "low_pass",
    "besov_norm",
    "shell_lp_matrix",
    "chemin_lerner_norm",
    "chemin_lerner_trace",
    "lq_besov_norm",
    "bernstein_ratios",
]

ANNULUS_LO = 0.75
ANNULUS_HI = 8.0 / 3.0


def _bump(rho: np.ndarray) -> np.ndarray:
    """Smooth bump on the annulus, exactly zero outside (3/4, 8/3)."""
    x = (np.asarray(rho, dtype=np.float64) - ANNULUS_LO) / (ANNULUS_HI - ANNULUS_LO)
    out = np.zeros_like(x)
    inside = (x > 0.0) & (x < 1.0)
    xi = x[inside]
    with np.errstate(over="ignore", divide="ignore"):
        out[inside] = np.exp(-1.0 / (xi * (1.0 - xi)))
    return out


def _denominator(rho: np.ndarray) -> np.ndarray:
    """sum_k psi(2^-k rho) over every k that can contribute on this lattice.

    The sum is invariant under rho -> 2*rho, and positive wherever rho > 0
    because the annulus is wider than one octave.
    """
    pos = rho[rho > 0.0]
    if pos.size == 0:
        return np.zeros_like(rho)
    k_lo = math.floor(math.log2(pos.min() / ANNULUS_HI))
    k_hi = math.ceil(math.log2(pos.max() / ANNULUS_LO))
    den = np.zeros_like(rho)
    for k in range(k_lo, k_hi + 1):
        den += _bump(rho * 2.0 ** (-k))
    return den


def default_band(grid: FrequencyGrid) -> tuple:
    """Widest shell range (j_min, j_max) resolved by the grid.

    j_max is the last shell whose annulus fits under the Nyquist radius;
    j_min sits low enough that shell j_min contains no lattice point, which
    makes S_{j_min} exactly the mean mode.
    """
    j_max = math.floor(math.log2(3.0 * grid.k_nyquist / 8.0) + 1e-12)
    j_min = math.floor(math.log2(3.0 * grid.k_min / 8.0) + 1e-12)
    return min(j_min, j_max - 3), j_max


class FilterBank:
    """Dyadic shell multipliers phi_j on a fixed grid, j in [j_min, j_max]."""

    def __init__(self, grid: FrequencyGrid, j_min: int, j_max: int):
        if j_max - j_min < 3:
            raise ValueError(
                f"need j_max - j_min >= 3, got j_min={j_min}, j_max={j_max}"
            )
        if ANNULUS_HI * 2.0**j_max > grid.k_nyquist * (1.0 + 1e-12):
            raise ValueError(
                f"top shell exceeds Nyquist: (8/3)*2^{j_max} > pi*N/L = {grid.k_nyquist:g}"
            )
        self.grid = grid
        self.j_min = int(j_min)
        self.j_max = int(j_max)
        rho = grid.k_mag
        den = _denominator(rho)
        if np.any((rho > 0.0) & (den <= 0.0)):
            raise ValueError("partition denominator vanished on a lattice shell")
        den_safe = np.where(den > 0.0, den, 1.0)
        shells = []
        for j in self.shells:
            shells.append(np.where(rho > 0.0, _bump(rho * 2.0 ** (-j)) / den_safe, 0.0))
        self.phi = np.stack(shells)
        self.mean_indicator = (rho == 0.0).astype(np.float64)
        self._lowpass_cache: dict = {}

    @property
    def shells(self) -> range:
        return range(self.j_min, self.j_max + 1)

    @property
    def n_shells(self) -> int:
        return self.j_max - self.j_min + 1

    def index(self, j: int) -> int:
        if not self.j_min <= j <= self.j_max:
            raise ValueError(f"shell {j} outside [{self.j_min}, {self.j_max}]")
        return j - self.j_min

    def block_multiplier(self, j: int) -> np.ndarray:
        return self.phi[self.index(j)]

    def lowpass_multiplier(self, j: int) -> np.ndarray:
        """Multiplier of S_j: the mean mode plus all shells j' <= j - 1."""
        if not self.j_min <= j <= self.j_max + 1:
            raise ValueError(f"low-pass level {j} outside [{self.j_min}, {self.j_max + 1}]")
        if j not in self._lowpass_cache:
            mult = self.mean_indicator.copy()
            for jp in range(self.j_min, j):
                mult += self.phi[self.index(jp)]
            self._lowpass_cache[j] = mult
        return self._lowpass_cache[j]

    def interior_mask(self) -> np.ndarray:
        """Lattice points where the kept shells form an exact partition of unity."""
        rho = self.grid.k_mag
        return (rho >= 2.0 ** (self.j_min + 1)) & (rho <= 2.0 ** (self.j_max - 1))

    def partition_defect(self) -> float:
        """max |sum_j phi_j - 1| over the interior band."""
        total = self.phi.sum(axis=0)
        mask = self.interior_mask()
        if not mask.any():
            return 0.0
        return float(np.max(np.abs(total[mask] - 1.0)))

    def fingerprint(self) -> dict:
        """Deterministic summary of the bank, with a hash of the lattice values."""
        digest = hashlib.sha256(np.ascontiguousarray(self.phi).tobytes()).hexdigest()
        return {
            "j_min": self.j_min,
            "j_max": self.j_max,
            "annulus": [ANNULUS_LO, ANNULUS_HI],
            "grid": {"d": self.grid.d, "N": self.grid.N, "L": self.grid.L},
            "phi_sha256": digest,
        }

    def __repr__(self):
        return f"FilterBank(j_min={self.j_min}, j_max={self.j_max}, grid={self.grid!r})"


def build_filter_bank(
    grid: FrequencyGrid, j_min: int | None = None, j_max: int | None = None
) -> FilterBank:
    """Construct the shell bank; omitted bounds fall back to ``default_band``."""
    lo, hi = default_band(grid)
    if j_min is None:
        j_min = lo
    if j_max is None:
        j_max = hi
    return FilterBank(grid, j_min, j_max)


def _apply_multiplier(mult: np.ndarray, f):
    if isinstance(f, SpectralField):
        return SpectralField(f.grid, f.coeffs * mult)
    if isinstance(f, Field):
        return Field(f.grid, f.grid.ifft(f.grid.fft(f.samples) * mult).real)
    raise TypeError(f"expected Field or SpectralField, got {type(f).__name__}")


def dyadic_block(bank: FilterBank, j: int, f):
    """Shell projection Delta_j f.  Spectral input composes without roundoff
    leaving the multiplier supports, so disjoint shells annihilate exactly."""
    return _apply_multiplier(bank.block_multiplier(j), f)


def low_pass(bank: FilterBank, j: int, f):
    """S_j f: mean mode plus every shell strictly below j."""
    return _apply_multiplier(bank.lowpass_multiplier(j), f)


@dataclass(frozen=True)
class BesovSpec:
    """Index triple of a homogeneous Besov space, plus an optional time
    exponent q for mixed space-time norms."""

    s: float
    p: float
    r: float
    q: float | None = None

    def __post_init__(self):
        if not (self.p >= 1.0):
            raise ValueError(f"p must be >= 1, got {self.p}")
        if not (self.r >= 1.0):
            raise ValueError(f"r must be >= 1, got {self.r}")
        if self.q is not None and not (self.q >= 1.0):
            raise ValueError(f"q must be >= 1, got {self.q}")

    def with_q(self, q: float) -> "BesovSpec":
        return BesovSpec(self.s, self.p, self.r, q)


def _aggregate(values: np.ndarray, r: float, axis: int = 0) -> np.ndarray:
    if math.isinf(r):
        return np.max(values, axis=axis)
    return np.sum(values**r, axis=axis) ** (1.0 / r)


def _shell_weights(bank: FilterBank, s: float) -> np.ndarray:
    return 2.0 ** (s * np.asarray(bank.shells, dtype=np.float64))


def besov_norm(f, spec: BesovSpec, bank: FilterBank) -> float:
    """Homogeneous Besov norm; the mean mode belongs to no shell and drops out."""
    if isinstance(f, Field):
        hat = f.grid.fft(f.samples)
    elif isinstance(f, SpectralField):
        hat = f.coeffs
    else:
        raise TypeError(f"expected Field or SpectralField, got {type(f).__name__}")
    grid = bank.grid
    if f.grid != grid:
        raise ValueError("field and bank live on different grids")
    vals = np.empty(bank.n_shells)
    for idx, j in enumerate(bank.shells):
        block = Field(grid, grid.ifft(hat * bank.phi[idx]).real)
        vals[idx] = lp_norm(block, spec.p)
    return float(_aggregate(vals * _shell_weights(bank, spec.s), spec.r))


@dataclass
class TimeSeriesField:
    """Snapshots of one field on a strictly increasing time axis from t = 0."""

    times: np.ndarray
    snapshots: list

    def __post_init__(self):
        self.times = np.asarray(self.times, dtype=np.float64)
        if self.times.ndim != 1 or self.times.size == 0:
            raise ValueError("times must be a nonempty 1-d array")
        if len(self.snapshots) != self.times.size:
            raise ValueError("times and snapshots disagree in length")
        if self.times[0] != 0.0:
            raise ValueError(f"time axis must start at 0, got {self.times[0]}")
        if self.times.size > 1 and not np.all(np.diff(self.times) > 0.0):
            raise ValueError("times must be strictly increasing")
        g = self.snapshots[0].grid
        c = self.snapshots[0].components
        for snap in self.snapshots[1:]:
            if snap.grid != g or snap.components != c:
                raise ValueError("snapshots must share one grid and component count")

    @property
    def grid(self) -> FrequencyGrid:
        return self.snapshots[0].grid

    @property
    def components(self) -> int:
        return self.snapshots[0].components

    @property
    def n_times(self) -> int:
        return int(self.times.size)

    @property
    def T(self) -> float:
        return float(self.times[-1])

    def sample_at(self, t: float) -> Field:
        """Linear interpolation in time; exact at stored snapshots."""
        slack = 1e-12 * max(1.0, self.T)
        if t < -slack or t > self.T + slack:
            raise ValueError(f"t={t} outside [0, {self.T}]")
        t = min(max(t, 0.0), self.T)
        i = int(np.searchsorted(self.times, t, side="right")) - 1
        i = min(max(i, 0), self.n_times - 1)
        if i == self.n_times - 1 or abs(self.times[i] - t) <= slack:
            return self.snapshots[i]
        t0, t1 = self.times[i], self.times[i + 1]
        w = (t - t0) / (t1 - t0)
        return Field(
            self.grid,
            (1.0 - w) * self.snapshots[i].samples + w * self.snapshots[i + 1].samples,
        )

    def __sub__(self, other: "TimeSeriesField") -> "TimeSeriesField":
        if self.n_times != other.n_times or not np.allclose(
            self.times, other.times, rtol=0.0, atol=1e-12
        ):
            raise ValueError("series have different time axes")
        return TimeSeriesField(
            self.times.copy(),
            [a - b for a, b in zip(self.snapshots, other.snapshots)],
        )


def shell_lp_matrix(series: TimeSeriesField, p: float, bank: FilterBank) -> np.ndarray:
    """||Delta_j f(t_i)||_Lp as an (n_shells, n_times) matrix."""
    grid = bank.grid
    if series.grid != grid:
        raise ValueError("series and bank live on different grids")
    out = np.empty((bank.n_shells, series.n_times))
    for i, snap in enumerate(series.snapshots):
        hat = grid.fft(snap.samples)
        for idx in range(bank.n_shells):
            block = Field(grid, grid.ifft(hat * bank.phi[idx]).real)
            out[idx, i] = lp_norm(block, p)
    return out


def _time_aggregate_full(mat: np.ndarray, times: np.ndarray, q: float) -> np.ndarray:
    if math.isinf(q):
        return np.max(mat, axis=1)
    return np.trapezoid(mat**q, times, axis=1) ** (1.0 / q)


def _time_aggregate_prefix(mat: np.ndarray, times: np.ndarray, q: float) -> np.ndarray:
    if math.isinf(q):
        return np.maximum.accumulate(mat, axis=1)
    acc = cumulative_trapezoid(mat**q, times, axis=1, initial=0.0)
    return acc ** (1.0 / q)


def chemin_lerner_norm(series: TimeSeriesField, spec: BesovSpec, bank: FilterBank) -> float:
    """Shell-first mixed norm: L^q in time per shell, then the l^r shell sum.

    Trapezoid quadrature on the snapshot grid; q = inf takes the max over
    snapshots.  The ordering differs from the time-outer norm
    (``lq_besov_norm``) exactly as Minkowski's inequality dictates.
    """
    if spec.q is None:
        raise ValueError("spec.q is required for a time-mixed norm")
    if series.n_times < 2 and not math.isinf(spec.q):
        raise ValueError("finite q needs at least two snapshots")
    mat = shell_lp_matrix(series, spec.p, bank)
    per_shell = _time_aggregate_full(mat, series.times, spec.q)
    return float(_aggregate(per_shell * _shell_weights(bank, spec.s), spec.r))


def chemin_lerner_trace(
    series: TimeSeriesField, spec: BesovSpec, bank: FilterBank
) -> np.ndarray:
    """Running values of the mixed norm on [0, t_i], one entry per snapshot."""
    if spec.q is None:
        raise ValueError("spec.q is required for a time-mixed norm")
    mat = shell_lp_matrix(series, spec.p, bank)
    pref = _time_aggregate_prefix(mat, series.times, spec.q)
    weighted = pref * _shell_weights(bank, spec.s)[:, None]
    return np.asarray(_aggregate(weighted, spec.r, axis=0))


def lq_besov_norm(series: TimeSeriesField, spec: BesovSpec, bank: FilterBank) -> float:
    """Time-outer norm: Besov norm at each snapshot, then L^q over time."""
    if spec.q is None:
        raise ValueError("spec.q is required for a time-mixed norm")
    vals = np.array([besov_norm(snap, spec, bank) for snap in series.snapshots])
    if math.isinf(spec.q):
        return float(np.max(vals))
    if series.n_times < 2:
        raise ValueError("finite q needs at least two snapshots")
    return float(np.trapezoid(vals**spec.q, series.times) ** (1.0 / spec.q))


@dataclass
class BernsteinReport:
    """Measured constants for the derivative estimates of a band-limited field.

    upper_ratio: sup_{|a|=k} ||d^a f||_Lq / (lam^(k + d(1/p - 1/q)) ||f||_Lp),
    finite for ball or annulus support.  lower_ratio: the same sup with q = p,
    which for annulus support is also bounded below; None for ball support.
    """

    lam: float
    k_order: int
    p: float
    q: float
    support: str
    upper_ratio: float
    lower_ratio: float | None
    in_window: bool | None = None


def bernstein_ratios(
    f: Field,
    lam: float,
    k_order: int = 1,
    p: float = 2.0,
    q: float = 2.0,
    support: str = "ring",
    window: dict | None = None,
) -> BernsteinReport:
    """Measure the derivative-estimate constants of a band-limited field.

    ``support`` declares where the spectrum lives: "ring" for the annulus
    lam * [3/4, 8/3], "ball" for |k| <= lam.  The declaration is checked,
    and violated support raises.  ``window`` may hold "upper"/"lower"
    (lo, hi) pairs; the report then carries an in-window verdict.
    """
    if lam <= 0:
        raise ValueError(f"lam must be positive, got {lam}")
    if k_order < 1:
        raise ValueError(f"k_order must be >= 1, got {k_order}")
    if q < p:
        raise ValueError(f"need q >= p, got p={p}, q={q}")
    if support not in ("ring", "ball"):
        raise ValueError(f"support must be 'ring' or 'ball', got {support!r}")
    grid = f.grid
    hat = grid.fft(f.samples)
    amax = float(np.max(np.abs(hat)))
    if amax == 0.0:
        raise ValueError("zero field has no Bernstein ratio")
    slack = 1e-9
    if support == "ring":
        outside = (grid.k_mag < ANNULUS_LO * lam * (1.0 - slack)) | (
            grid.k_mag > ANNULUS_HI * lam * (1.0 + slack)
        )
    else:
        outside = grid.k_mag > lam * (1.0 + slack)
    leak = float(np.max(np.abs(hat[:, outside]))) if outside.any() else 0.0
    if leak > 1e-13 * amax:
        raise ValueError(
            f"spectrum leaks outside the declared {support} support "
            f"(relative leak {leak / amax:.2e})"
        )

    def deriv_sup(norm_p: float) -> float:
        best = 0.0
        for alpha in combinations_with_replacement(range(grid.d), k_order):
            mult = np.ones(grid.shape, dtype=np.complex128)
            for a in alpha:
                shape = [1] * grid.d
                shape[a] = grid.N
                mult = mult * (1j * grid.k1d.reshape(shape))
            g = Field(grid, grid.ifft(hat * mult).real)
            best = max(best, lp_norm(g, norm_p))
        return best

    base = lp_norm(f, p)
    gain = k_order + grid.d * (1.0 / p - (0.0 if math.isinf(q) else 1.0 / q))
    upper = deriv_sup(q) / (lam**gain * base)
    lower = deriv_sup(p) / (lam**k_order * base) if support == "ring" else None
    verdict = None
    if window is not None:
        verdict = True
        if "upper" in window:
            lo, hi = window["upper"]
            verdict = verdict and (lo <= upper <= hi)
        if "lower" in window and lower is not None:
            lo, hi = window["lower"]
            verdict = verdict and (lo <= lower <= hi)
    return BernsteinReport(
        lam=float(lam),
        k_order=int(k_order),
        p=float(p),
        q=float(q),
        support=support,
        upper_ratio=float(upper),
        lower_ratio=None if lower is None else float(lower),
        in_window=verdict,
    )
