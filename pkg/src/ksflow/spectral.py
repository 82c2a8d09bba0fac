"""Uniform grids on the periodic box and the spectral toolbox built on them.

Conventions used throughout the package:

* the domain is [0, 2*pi)^d sampled on n points per dimension (n a power of
  two), values stored row-major as float64;
* forward coefficients follow fhat(k) = (1/n^d) * sum_x f(x) exp(-i k.x), so
  a constant field c has fhat(0) = c;
* coefficient sums relate to grid quadrature by
  lp_norm(f, 2)^2 = (2*pi)^d * sum_k |fhat(k)|^2;
* homogeneous Sobolev norms are coefficient sums over k != 0 only, i.e. the
  mean mode never contributes.
"""

from __future__ import annotations

import functools
import math
import warnings
from dataclasses import dataclass
from typing import Callable, Union

import numpy as np
import scipy.fft as _fft


@dataclass(frozen=True)
class TorusGrid:
    """Uniform grid with n points per dimension on the d-torus.

    n must be even so the Nyquist plane k_j = -n/2 is unambiguous; highly
    composite n (powers of two, or 3*2^m) keep the transforms fast.
    """

    d: int
    n: int

    def __post_init__(self):
        if self.d not in (2, 3):
            raise ValueError(f"grid dimension must be 2 or 3, got {self.d}")
        if self.n < 8 or self.n % 2 != 0:
            raise ValueError(f"grid size must be even and >= 8, got {self.n}")

    @property
    def spacing(self) -> float:
        return 2.0 * math.pi / self.n

    @property
    def shape(self) -> tuple:
        return (self.n,) * self.d

    @property
    def npoints(self) -> int:
        return self.n**self.d

    @property
    def cell_volume(self) -> float:
        return self.spacing**self.d

    def axis(self) -> np.ndarray:
        """1D coordinate array [0, 2*pi)."""
        return np.arange(self.n) * self.spacing

    def meshgrid(self) -> tuple:
        x = self.axis()
        return np.meshgrid(*([x] * self.d), indexing="ij")


@functools.lru_cache(maxsize=32)
def _wavevectors(d: int, n: int) -> np.ndarray:
    """Integer wavevector components, shape (d,) + (n,)*d, FFT ordering."""
    k1 = np.fft.fftfreq(n, d=1.0 / n)
    axes = np.meshgrid(*([k1] * d), indexing="ij")
    return np.stack(axes)


@functools.lru_cache(maxsize=32)
def _ksq(d: int, n: int) -> np.ndarray:
    k = _wavevectors(d, n)
    return np.sum(k * k, axis=0)


@functools.lru_cache(maxsize=32)
def _nyquist_mask(d: int, n: int) -> np.ndarray:
    """True on modes free of any Nyquist component k_j = -n/2."""
    k = _wavevectors(d, n)
    return np.all(k != -(n // 2), axis=0)


def wavevectors(grid: TorusGrid) -> np.ndarray:
    return _wavevectors(grid.d, grid.n)


def wavenumber_sq(grid: TorusGrid) -> np.ndarray:
    return _ksq(grid.d, grid.n)


@dataclass
class ScalarField:
    """Real-valued sample of a density on a TorusGrid."""

    grid: TorusGrid
    values: np.ndarray

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=np.float64)
        if self.values.shape != self.grid.shape:
            raise ValueError(
                f"field shape {self.values.shape} does not match grid {self.grid.shape}"
            )

    @classmethod
    def from_function(cls, grid: TorusGrid, fn: Callable) -> "ScalarField":
        return cls(grid, fn(*grid.meshgrid()))

    @classmethod
    def constant(cls, grid: TorusGrid, c: float) -> "ScalarField":
        return cls(grid, np.full(grid.shape, float(c)))

    def mean(self) -> float:
        return float(self.values.mean())

    def is_mean_free(self) -> bool:
        scale = max(1.0, float(np.max(np.abs(self.values))) if self.values.size else 1.0)
        return abs(self.mean()) <= 1e-12 * scale

    def copy(self) -> "ScalarField":
        return ScalarField(self.grid, self.values.copy())


@dataclass
class SpectralField:
    """Fourier coefficients over the full integer wavevector cube.

    Coefficients are indexed by k in {-n/2, ..., n/2 - 1}^d in FFT ordering;
    fields representing real data satisfy coeffs(-k) = conj(coeffs(k)).
    """

    grid: TorusGrid
    coeffs: np.ndarray

    def __post_init__(self):
        self.coeffs = np.asarray(self.coeffs, dtype=np.complex128)
        if self.coeffs.shape != self.grid.shape:
            raise ValueError(
                f"coefficient shape {self.coeffs.shape} does not match grid {self.grid.shape}"
            )

    def copy(self) -> "SpectralField":
        return SpectralField(self.grid, self.coeffs.copy())

    def hermitian_defect(self) -> float:
        """Max |coeffs(-k) - conj(coeffs(k))| over the cube."""
        c = self.coeffs
        rev = c[tuple(slice(None, None, -1) for _ in range(self.grid.d))]
        mirrored = np.roll(rev, 1, axis=tuple(range(self.grid.d)))
        return float(np.max(np.abs(mirrored - np.conj(c))))


@dataclass(frozen=True)
class Multiplier:
    """Fourier multiplier, scalar or d-vector, with the k=0 value explicit.

    `values` holds the symbol evaluated on the full wavevector cube (one array
    for scalar symbols, a tuple of d arrays for gradient-like operators); the
    zero-mode entry is already set to the declared zero_mode value.
    """

    grid: TorusGrid
    values: Union[np.ndarray, tuple]
    zero_mode: complex = 0.0

    def is_vector(self) -> bool:
        return isinstance(self.values, tuple)

    @classmethod
    def from_symbol(
        cls,
        grid: TorusGrid,
        symbol: Callable[[np.ndarray], np.ndarray],
        zero_mode: complex = 0.0,
    ) -> "Multiplier":
        """Scalar symbol as a function of the (d, ...) wavevector array."""
        k = wavevectors(grid)
        with np.errstate(divide="ignore", invalid="ignore"):
            vals = np.asarray(symbol(k), dtype=np.complex128)
        vals[(0,) * grid.d] = zero_mode
        if not np.all(np.isfinite(vals)):
            raise ValueError("multiplier symbol is not finite away from k=0")
        return cls(grid, vals, zero_mode)

    @classmethod
    def gradient(cls, grid: TorusGrid) -> "Multiplier":
        """The symbol i*k, mapping a field to its d first partials."""
        k = wavevectors(grid)
        return cls(grid, tuple(1j * k[j] for j in range(grid.d)), 0.0)


def forward_transform(f: ScalarField) -> SpectralField:
    """Forward DFT in the fhat(k) = (1/n^d) sum_x f(x) exp(-ik.x) convention."""
    if not np.all(np.isfinite(f.values)):
        raise ValueError("forward_transform: input field contains non-finite values")
    coeffs = _fft.fftn(f.values) / f.grid.npoints
    return SpectralField(f.grid, coeffs)


def inverse_transform(F: SpectralField) -> ScalarField:
    """Inverse of forward_transform; discards the imaginary round-off part."""
    values = _fft.ifftn(F.coeffs).real * F.grid.npoints
    return ScalarField(F.grid, values)


def apply_multiplier(F: SpectralField, m: Multiplier):
    """Pointwise product coeffs(k) * m(k); k=0 uses the declared zero mode.

    Any mode carrying a Nyquist component is zeroed afterwards so odd symbols
    cannot break Hermitian symmetry. Vector multipliers return a tuple of
    SpectralFields.
    """
    if m.grid != F.grid:
        raise ValueError("apply_multiplier: multiplier and field grids differ")
    mask = _nyquist_mask(F.grid.d, F.grid.n)
    if m.is_vector():
        return tuple(
            SpectralField(F.grid, F.coeffs * comp * mask) for comp in m.values
        )
    return SpectralField(F.grid, F.coeffs * m.values * mask)


def frac_laplacian(f: ScalarField, alpha: float) -> ScalarField:
    """Fractional dissipation operator with symbol |k|^alpha.

    The zero mode follows the degenerate-damping convention: for alpha > 0 the
    mean is annihilated (sigma(0) = 0), while alpha = 0 yields the identity
    operator (sigma(0) = 1), i.e. pure damping acts on the mean as well.
    """
    if not 0.0 <= alpha <= 2.0:
        raise ValueError(f"alpha must lie in [0, 2], got {alpha}")
    if alpha == 0.0:
        # literally the identity, bypassing even the Nyquist zeroing
        return f.copy()
    m = Multiplier.from_symbol(
        f.grid,
        lambda k: np.sum(k * k, axis=0) ** (alpha / 2.0),
        zero_mode=0.0,
    )
    return inverse_transform(apply_multiplier(forward_transform(f), m))


def dissipation_symbol(grid: TorusGrid, alpha: float) -> np.ndarray:
    """Real array sigma(k) = |k|^alpha with the frac_laplacian zero-mode rule."""
    if not 0.0 <= alpha <= 2.0:
        raise ValueError(f"alpha must lie in [0, 2], got {alpha}")
    ksq = wavenumber_sq(grid)
    sigma = ksq ** (alpha / 2.0)
    sigma[(0,) * grid.d] = 1.0 if alpha == 0.0 else 0.0
    return sigma


def sobolev_norm(f: Union[ScalarField, SpectralField], s: float) -> float:
    """Homogeneous Sobolev norm (sum_{k!=0} |k|^{2s} |fhat(k)|^2)^{1/2}.

    Coefficient convention: no (2*pi)^{d/2} quadrature factor; the k=0 mode is
    always excluded, so constants have norm zero for every order s.
    """
    F = forward_transform(f) if isinstance(f, ScalarField) else f
    ksq = wavenumber_sq(F.grid)
    power = np.abs(F.coeffs) ** 2
    nz = ksq > 0
    if s == 0.0:
        total = power[nz].sum()
    else:
        total = (ksq[nz] ** s * power[nz]).sum()
    return float(np.sqrt(total))


def project_low_modes(f: Union[ScalarField, SpectralField], N: int):
    """Orthogonal projection onto Fourier modes |k| <= N (Euclidean norm).

    Idempotent and self-adjoint in the coefficient inner product; the k=0
    mode is kept. Returns the same representation it was given.
    """
    if N < 1:
        raise ValueError(f"projection radius must be >= 1, got {N}")
    spectral_in = isinstance(f, SpectralField)
    F = f if spectral_in else forward_transform(f)
    if N >= F.grid.n // 2:
        warnings.warn(
            f"projection radius N={N} covers every resolved mode (n={F.grid.n}); "
            "the projection is the identity",
            stacklevel=2,
        )
    mask = wavenumber_sq(F.grid) <= N * N
    out = SpectralField(F.grid, F.coeffs * mask)
    return out if spectral_in else inverse_transform(out)


def low_mode_energy(F: SpectralField, N: int) -> float:
    """sum_{0<|k|<=N} |fhat(k)|^2 (mean mode excluded)."""
    ksq = wavenumber_sq(F.grid)
    sel = (ksq > 0) & (ksq <= N * N)
    return float(np.sum(np.abs(F.coeffs[sel]) ** 2))


def lp_norm(f: ScalarField, p) -> float:
    """L^p norm by uniform quadrature; p is 1, 2, or inf (max |f|)."""
    if p == math.inf or p == np.inf:
        return float(np.max(np.abs(f.values)))
    if p == 1:
        return float(np.sum(np.abs(f.values)) * f.grid.cell_volume)
    if p == 2:
        return float(np.sqrt(np.sum(f.values**2) * f.grid.cell_volume))
    raise ValueError(f"lp_norm supports p in {{1, 2, inf}}, got {p}")


def tail_energy_fraction(F: SpectralField) -> float:
    """Energy fraction of mean-free modes with Euclidean |k| > n/3.

    Returns 0 for a constant field (no mean-free energy).
    """
    ksq = wavenumber_sq(F.grid)
    cutoff_sq = (F.grid.n / 3.0) ** 2
    power = np.abs(F.coeffs) ** 2
    total = power[ksq > 0].sum()
    if total == 0.0:
        return 0.0
    return float(power[ksq > cutoff_sq].sum() / total)
