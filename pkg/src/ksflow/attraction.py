"""The nonlocal attractive drift and its kernel certificates.

The drift B(rho) is defined spectrally on the torus by the multiplier
Bhat_j(k) = i k_j |k|^{-(d+2-beta)} rhohat(k) with the zero mode annihilated;
this is the gradient of the inverse fractional Laplacian of order d+2-beta
applied to rho. Defining the kernel through its multiplier keeps it exact and
smooth away from the origin while matching the |x|^{1-beta} near-origin
profile of the singular kernel it models.

The implied convolution kernel has Fourier coefficients
khat(k) = |k|^{-(d+2-beta)} / (2*pi)^d (integral-convolution convention),
which is what the L1 certificates and the brute-force oracles reconstruct.
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass

import numpy as np

from ksflow.spectral import (
    Multiplier,
    ScalarField,
    SpectralField,
    TorusGrid,
    apply_multiplier,
    forward_transform,
    inverse_transform,
    wavenumber_sq,
    wavevectors,
)


@dataclass(frozen=True)
class KernelSpec:
    """Attraction parameters in the weak-singularity regime 2 <= beta < d."""

    d: int
    beta: float

    def __post_init__(self):
        if not 2.0 <= self.beta < self.d:
            raise ValueError(
                f"weak-singularity regime violated: need 2 <= beta < d, "
                f"got beta={self.beta}, d={self.d}"
            )

    @property
    def s_B(self) -> float:
        """Inverse-derivative order d + 2 - beta, in (2, d]."""
        return self.d + 2.0 - self.beta


def _check_grid(spec: KernelSpec, grid: TorusGrid):
    if grid.d != spec.d:
        raise ValueError(f"kernel dimension {spec.d} does not match grid {grid.d}")


def drift_multiplier(spec: KernelSpec, grid: TorusGrid) -> Multiplier:
    """Vector symbol i k |k|^{-(d+2-beta)}, zero at k=0."""
    _check_grid(spec, grid)
    k = wavevectors(grid)
    ksq = wavenumber_sq(grid)
    with np.errstate(divide="ignore"):
        radial = ksq ** (-spec.s_B / 2.0)
    radial[(0,) * grid.d] = 0.0
    return Multiplier(grid, tuple(1j * k[j] * radial for j in range(grid.d)), 0.0)


def conv_laplacian_multiplier(spec: KernelSpec, grid: TorusGrid) -> Multiplier:
    """Scalar symbol -|k|^{beta-d}, zero at k=0 (divergence of the drift)."""
    _check_grid(spec, grid)
    ksq = wavenumber_sq(grid)
    with np.errstate(divide="ignore"):
        vals = -(ksq ** ((spec.beta - spec.d) / 2.0))
    vals[(0,) * grid.d] = 0.0
    return Multiplier(grid, vals.astype(np.complex128), 0.0)


def attract_field(rho: ScalarField, spec: KernelSpec) -> tuple:
    """Drift velocity components (d ScalarFields); output is exactly mean-free."""
    parts = apply_multiplier(forward_transform(rho), drift_multiplier(spec, rho.grid))
    return tuple(inverse_transform(p) for p in parts)


def laplacian_kernel_conv(rho: ScalarField, spec: KernelSpec) -> ScalarField:
    """Convolution of rho with the kernel's Laplacian; equals div(attract_field)."""
    F = apply_multiplier(
        forward_transform(rho), conv_laplacian_multiplier(spec, rho.grid)
    )
    return inverse_transform(F)


@dataclass(frozen=True)
class KernelNorms:
    """L1 certificates of the kernel derivatives with a refinement sensitivity.

    norm_gradK / norm_lapK are quadrature values on the fine reconstruction
    grid (2x the requested resolution); the coarse_* values come from the
    requested resolution itself, and rel_change_* report |fine-coarse|/fine.
    """

    norm_gradK: float
    norm_lapK: float
    coarse_gradK: float
    coarse_lapK: float
    rel_change_gradK: float
    rel_change_lapK: float
    fine_n: int
    coarse_n: int


def _kernel_derivative_l1(spec: KernelSpec, n: int) -> tuple:
    """(||gradK||_L1, ||lapK||_L1) reconstructed at resolution n per dimension."""
    grid = TorusGrid(spec.d, n)
    norm = (2.0 * math.pi) ** spec.d
    k = wavevectors(grid)
    ksq = wavenumber_sq(grid)
    origin = (0,) * grid.d
    with np.errstate(divide="ignore"):
        radial = ksq ** (-spec.s_B / 2.0)
    radial[origin] = 0.0
    grad_sq = np.zeros(grid.shape)
    for j in range(grid.d):
        comp = inverse_transform(
            SpectralField(grid, 1j * k[j] * radial / norm)
        ).values
        grad_sq += comp**2
    grad_l1 = float(np.sum(np.sqrt(grad_sq)) * grid.cell_volume)

    with np.errstate(divide="ignore"):
        lap = -(ksq ** ((spec.beta - spec.d) / 2.0))
    lap[origin] = 0.0
    lap_field = inverse_transform(SpectralField(grid, lap.astype(complex) / norm))
    lap_l1 = float(np.sum(np.abs(lap_field.values)) * grid.cell_volume)
    return grad_l1, lap_l1


@functools.lru_cache(maxsize=16)
def _kernel_l1_norms_cached(d: int, beta: float, n: int) -> KernelNorms:
    spec = KernelSpec(d, beta)
    coarse_grad, coarse_lap = _kernel_derivative_l1(spec, n)
    fine_grad, fine_lap = _kernel_derivative_l1(spec, 2 * n)
    return KernelNorms(
        norm_gradK=fine_grad,
        norm_lapK=fine_lap,
        coarse_gradK=coarse_grad,
        coarse_lapK=coarse_lap,
        rel_change_gradK=abs(fine_grad - coarse_grad) / fine_grad,
        rel_change_lapK=abs(fine_lap - coarse_lap) / fine_lap,
        fine_n=2 * n,
        coarse_n=n,
    )


def kernel_l1_norms(spec: KernelSpec, grid: TorusGrid) -> KernelNorms:
    """Quadrature L1 norms of gradK and lapK on a refined grid (2x given).

    beta < d keeps |x|^{-beta} integrable, so the truncated reconstructions
    converge; the reported rel_change_* quantify the remaining sensitivity.
    """
    _check_grid(spec, grid)
    return _kernel_l1_norms_cached(spec.d, spec.beta, grid.n)
