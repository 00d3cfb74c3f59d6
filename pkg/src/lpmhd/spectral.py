"""Periodic-box spectral substrate: grids, fields, transforms, and the
constant-coefficient operators everything else is built from.

Conventions fixed here, once, for the whole package:

* the box is [0, L)^d sampled on a uniform N^d lattice, N a power of two;
* the forward transform is numpy's unnormalized ``fftn`` over the spatial
  axes and the inverse divides by N**d, so physical samples and spectral
  coefficients round-trip exactly up to floating roundoff;
* wavenumbers are k = (2*pi/L) * m with integer m in [-N/2, N/2), stored
  in FFT order;
* L^p norms use the normalized measure (1/L^d) dx, so the constant field
  1 has unit norm for every p;
* pointwise products of band-limited data are dealiased with the 2/3
  rule: modes with |m_i| > floor(N/3) on any axis are zeroed in the
  factors and in the product.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "FrequencyGrid",
    "Field",
    "SpectralField",
    "TensorField",
    "make_grid",
    "to_spectral",
    "to_physical",
    "spectral_derivative",
    "gradient",
    "jacobian",
    "divergence",
    "laplacian",
    "leray_project",
    "heat_semigroup",
    "lp_norm",
    "mean_mode",
    "dealias",
    "dealiased_product",
    "outer_product",
    "tensor_divergence",
]


class FrequencyGrid:
    """Uniform periodic lattice with cached wavenumber arrays.

    Parameters
    ----------
    d : int
        Spatial dimension, 2 or 3.
    N : int
        Samples per axis; a power of two, at least 8.
    L : float
        Box side length.
    """

    def __init__(self, d: int, N: int, L: float = 2.0 * math.pi):
        if d not in (2, 3):
            raise ValueError(f"d must be 2 or 3, got {d}")
        if N < 8 or (N & (N - 1)) != 0:
            raise ValueError(f"N must be a power of two >= 8, got {N}")
        if not (L > 0):
            raise ValueError(f"L must be positive, got {L}")
        self.d = int(d)
        self.N = int(N)
        self.L = float(L)
        # fftfreq(N) is m/N with N a power of two, so m1d is exact.
        self.m1d = np.rint(np.fft.fftfreq(self.N) * self.N).astype(np.int64)
        self.k1d = (2.0 * math.pi / self.L) * self.m1d.astype(np.float64)
        axes = []
        for a in range(self.d):
            shape = [1] * self.d
            shape[a] = self.N
            axes.append(self.k1d.reshape(shape))
        self.k_axes = tuple(axes)
        self.k_sq = sum(ka.astype(np.float64) ** 2 for ka in self.k_axes)
        self.k_mag = np.sqrt(self.k_sq)
        self.k_min = 2.0 * math.pi / self.L
        self.k_nyquist = math.pi * self.N / self.L
        m_cut = self.N // 3
        mask = np.ones((self.N,) * self.d, dtype=bool)
        for a in range(self.d):
            shape = [1] * self.d
            shape[a] = self.N
            mask &= np.abs(self.m1d).reshape(shape) <= m_cut
        self.dealias_mask = mask
        self._spatial_axes = tuple(range(1, self.d + 1))

    @property
    def shape(self) -> tuple:
        return (self.N,) * self.d

    def coords(self) -> tuple:
        """Coordinate arrays x_i of shape (N,)*d."""
        x1d = np.arange(self.N) * (self.L / self.N)
        return tuple(np.meshgrid(*([x1d] * self.d), indexing="ij"))

    def fft(self, samples: np.ndarray) -> np.ndarray:
        """Forward transform over the spatial axes of a (c, N, ..., N) array."""
        return np.fft.fftn(samples, axes=self._spatial_axes)

    def ifft(self, coeffs: np.ndarray) -> np.ndarray:
        return np.fft.ifftn(coeffs, axes=self._spatial_axes)

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, FrequencyGrid)
            and self.d == other.d
            and self.N == other.N
            and self.L == other.L
        )

    def __hash__(self):
        return hash((self.d, self.N, self.L))

    def __repr__(self):
        return f"FrequencyGrid(d={self.d}, N={self.N}, L={self.L!r})"


def make_grid(d: int, N: int, L: float = 2.0 * math.pi) -> FrequencyGrid:
    """Build a FrequencyGrid, validating d, N and L."""
    return FrequencyGrid(d, N, L)


@dataclass
class Field:
    """Real space-domain samples with shape (c, N, ..., N).

    c is the component count: 1 for scalars, d for vectors; larger values
    (flattened tensors) are allowed wherever only norms are taken.
    """

    grid: FrequencyGrid
    samples: np.ndarray

    def __post_init__(self):
        self.samples = np.asarray(self.samples, dtype=np.float64)
        expect = self.grid.shape
        if self.samples.ndim != self.grid.d + 1 or self.samples.shape[1:] != expect:
            raise ValueError(
                f"samples must have shape (c,{','.join(str(n) for n in expect)}), "
                f"got {self.samples.shape}"
            )
        if self.samples.shape[0] < 1:
            raise ValueError("field needs at least one component")
        if not np.all(np.isfinite(self.samples)):
            raise ValueError("field samples must be finite")

    @property
    def components(self) -> int:
        return self.samples.shape[0]

    def copy(self) -> "Field":
        return Field(self.grid, self.samples.copy())

    def __add__(self, other: "Field") -> "Field":
        _check_same_grid(self, other)
        return Field(self.grid, self.samples + other.samples)

    def __sub__(self, other: "Field") -> "Field":
        _check_same_grid(self, other)
        return Field(self.grid, self.samples - other.samples)

    def __mul__(self, a: float) -> "Field":
        return Field(self.grid, self.samples * float(a))

    __rmul__ = __mul__

    def __neg__(self) -> "Field":
        return Field(self.grid, -self.samples)


@dataclass
class SpectralField:
    """Complex Fourier coefficients of a real field, FFT layout, shape (c, N, ..., N).

    Coefficients of real data satisfy conjugate symmetry F(-k) = conj(F(k));
    transforms of real input keep the defect at roundoff level, and
    ``conjugate_symmetry_defect`` measures it.
    """

    grid: FrequencyGrid
    coeffs: np.ndarray

    def __post_init__(self):
        self.coeffs = np.asarray(self.coeffs, dtype=np.complex128)
        expect = self.grid.shape
        if self.coeffs.ndim != self.grid.d + 1 or self.coeffs.shape[1:] != expect:
            raise ValueError(
                f"coeffs must have shape (c,{','.join(str(n) for n in expect)}), "
                f"got {self.coeffs.shape}"
            )
        if self.coeffs.shape[0] < 1:
            raise ValueError("field needs at least one component")

    @property
    def components(self) -> int:
        return self.coeffs.shape[0]

    def copy(self) -> "SpectralField":
        return SpectralField(self.grid, self.coeffs.copy())

    def conjugate_symmetry_defect(self) -> float:
        """max |F(-k) - conj(F(k))| relative to max |F|; ~1e-16 for real data."""
        flipped = self.coeffs
        for a in range(1, self.grid.d + 1):
            flipped = np.roll(np.flip(flipped, axis=a), 1, axis=a)
        top = np.max(np.abs(flipped - np.conj(self.coeffs)))
        scale = np.max(np.abs(self.coeffs))
        return float(top / scale) if scale > 0 else 0.0

    def __add__(self, other: "SpectralField") -> "SpectralField":
        _check_same_grid(self, other)
        return SpectralField(self.grid, self.coeffs + other.coeffs)

    def __sub__(self, other: "SpectralField") -> "SpectralField":
        _check_same_grid(self, other)
        return SpectralField(self.grid, self.coeffs - other.coeffs)

    def __mul__(self, a: float) -> "SpectralField":
        return SpectralField(self.grid, self.coeffs * a)

    __rmul__ = __mul__


@dataclass
class TensorField:
    """Rank-2 tensor samples M_ij(x), shape (d, d, N, ..., N)."""

    grid: FrequencyGrid
    entries: np.ndarray

    def __post_init__(self):
        self.entries = np.asarray(self.entries, dtype=np.float64)
        d = self.grid.d
        if self.entries.shape != (d, d) + self.grid.shape:
            raise ValueError(
                f"entries must have shape ({d},{d},...), got {self.entries.shape}"
            )

    def as_field(self) -> Field:
        """Flatten to a d*d-component Field (row-major entry order)."""
        d = self.grid.d
        return Field(self.grid, self.entries.reshape((d * d,) + self.grid.shape))


def _check_same_grid(a, b) -> None:
    if a.grid != b.grid:
        raise ValueError("fields live on different grids")


def to_spectral(f: Field) -> SpectralField:
    """Forward FFT of every component."""
    return SpectralField(f.grid, f.grid.fft(f.samples))


def to_physical(F: SpectralField) -> Field:
    """Inverse FFT, keeping the real part."""
    return Field(F.grid, F.grid.ifft(F.coeffs).real)


def _derivative_multiplier(grid: FrequencyGrid, axis: int) -> np.ndarray:
    # The m = -N/2 column has no +N/2 partner, so an odd derivative there
    # breaks conjugate symmetry; zero it, as is standard for FFT derivatives.
    shape = [1] * grid.d
    shape[axis] = grid.N
    k = grid.k1d.copy()
    k[grid.m1d == -grid.N // 2] = 0.0
    return 1j * k.reshape(shape)


def spectral_derivative(F: SpectralField, axis: int) -> SpectralField:
    """d/dx_axis as the multiplier i*k_axis (Nyquist column zeroed)."""
    if not 0 <= axis < F.grid.d:
        raise ValueError(f"axis must be in [0,{F.grid.d}), got {axis}")
    return SpectralField(F.grid, F.coeffs * _derivative_multiplier(F.grid, axis))


def gradient(f: Field) -> Field:
    """Gradient of a scalar field as a d-component vector field."""
    if f.components != 1:
        raise ValueError("gradient expects a scalar field; see jacobian for vectors")
    F = to_spectral(f)
    parts = [F.coeffs[0] * _derivative_multiplier(f.grid, a) for a in range(f.grid.d)]
    return Field(f.grid, f.grid.ifft(np.stack(parts)).real)


def jacobian(f: Field) -> TensorField:
    """Entries (i, j) -> d f_i / d x_j of a vector field."""
    d = f.grid.d
    if f.components != d:
        raise ValueError(f"jacobian expects a {d}-component field, got {f.components}")
    F = f.grid.fft(f.samples)
    out = np.empty((d, d) + f.grid.shape, dtype=np.float64)
    for j in range(d):
        mult = _derivative_multiplier(f.grid, j)
        out[:, j] = f.grid.ifft(F * mult).real
    return TensorField(f.grid, out)


def divergence(f: Field) -> Field:
    """Divergence of a vector field, as a scalar field."""
    d = f.grid.d
    if f.components != d:
        raise ValueError(f"divergence expects a {d}-component field, got {f.components}")
    F = f.grid.fft(f.samples)
    acc = np.zeros((1,) + f.grid.shape, dtype=np.complex128)
    for a in range(d):
        acc[0] += F[a] * _derivative_multiplier(f.grid, a)
    return Field(f.grid, f.grid.ifft(acc).real)


def laplacian(f: Field) -> Field:
    """Componentwise Laplacian via the -|k|^2 multiplier."""
    F = f.grid.fft(f.samples)
    return Field(f.grid, f.grid.ifft(F * (-f.grid.k_sq)).real)


def leray_project(F: SpectralField) -> SpectralField:
    """Divergence-free (Leray) projection of a vector field, mode by mode.

    At each k != 0 the coefficient vector loses its component along k; the
    k = 0 mode is untouched.
    """
    d = F.grid.d
    if F.components != d:
        raise ValueError(f"projection expects a {d}-component field, got {F.components}")
    k_sq_safe = F.grid.k_sq.copy()
    zero = F.grid.k_sq == 0.0
    k_sq_safe[zero] = 1.0
    dot = np.zeros(F.grid.shape, dtype=np.complex128)
    for a in range(d):
        dot += F.grid.k_axes[a] * F.coeffs[a]
    dot /= k_sq_safe
    out = F.coeffs.copy()
    for a in range(d):
        out[a] -= F.grid.k_axes[a] * dot
    return SpectralField(F.grid, out)


def heat_semigroup(F: SpectralField, t: float) -> SpectralField:
    """Apply e^{t Laplacian}, i.e. multiply by exp(-|k|^2 t); requires t >= 0."""
    if t < 0:
        raise ValueError(f"heat semigroup needs t >= 0, got {t}")
    return SpectralField(F.grid, F.coeffs * np.exp(-F.grid.k_sq * t))


def lp_norm(f: Field, p: float) -> float:
    """L^p norm with the normalized measure; vector fields use |f(x)|_2 pointwise.

    p may be any float >= 1 or inf; the constant field 1 has norm 1.
    """
    if not (p >= 1.0):
        raise ValueError(f"p must be >= 1, got {p}")
    mag_sq = np.sum(f.samples * f.samples, axis=0)
    if math.isinf(p):
        return float(np.sqrt(np.max(mag_sq)))
    if p == 2.0:
        return float(np.sqrt(np.mean(mag_sq)))
    return float(np.mean(mag_sq ** (p / 2.0)) ** (1.0 / p))


def mean_mode(f: Field) -> np.ndarray:
    """Per-component spatial means, i.e. the k = 0 coefficients over N^d."""
    return f.samples.mean(axis=tuple(range(1, f.grid.d + 1)))


def dealias(F: SpectralField) -> SpectralField:
    """Zero all modes with |m_i| > floor(N/3) on any axis."""
    return SpectralField(F.grid, F.coeffs * F.grid.dealias_mask)


def _dealiased_samples(grid: FrequencyGrid, samples: np.ndarray) -> np.ndarray:
    return grid.ifft(grid.fft(samples) * grid.dealias_mask).real


def dealiased_product(f: Field, g: Field) -> Field:
    """2/3-rule product: mask the factors, multiply pointwise, mask the result.

    Components: equal counts multiply pairwise; a scalar factor broadcasts.
    """
    _check_same_grid(f, g)
    cf, cg = f.components, g.components
    if not (cf == cg or cf == 1 or cg == 1):
        raise ValueError(f"incompatible component counts {cf} and {cg}")
    a = _dealiased_samples(f.grid, f.samples)
    b = _dealiased_samples(g.grid, g.samples)
    prod = a * b
    return Field(f.grid, _dealiased_samples(f.grid, prod))


def outer_product(a: Field, b: Field) -> TensorField:
    """Dealiased outer product (a x b)_ij = a_i b_j of two vector fields."""
    _check_same_grid(a, b)
    d = a.grid.d
    if a.components != d or b.components != d:
        raise ValueError("outer product expects two vector fields")
    am = _dealiased_samples(a.grid, a.samples)
    bm = _dealiased_samples(b.grid, b.samples)
    entries = np.einsum("i...,j...->ij...", am, bm)
    flat = entries.reshape((d * d,) + a.grid.shape)
    flat = _dealiased_samples(a.grid, flat)
    return TensorField(a.grid, flat.reshape((d, d) + a.grid.shape))


def tensor_divergence(a: Field, b: Field) -> Field:
    """Row-wise divergence of the dealiased outer product:
    out_i = sum_j d/dx_j (a_i b_j).
    """
    _check_same_grid(a, b)
    d = a.grid.d
    if a.components != d or b.components != d:
        raise ValueError("tensor divergence expects two vector fields")
    grid = a.grid
    am = _dealiased_samples(grid, a.samples)
    bm = _dealiased_samples(grid, b.samples)
    out = np.zeros((d,) + grid.shape, dtype=np.complex128)
    for j in range(d):
        prod_hat = grid.fft(am * bm[j]) * grid.dealias_mask
        out += prod_hat * _derivative_multiplier(grid, j)
    return Field(grid, grid.ifft(out).real)
