"""NumPy reference implementations of the stepper's hot kernels.

The compiled module ksflow._kernels provides the same callables with fused
loops; this module is the fallback selected at import time when the extension
is unavailable (see ksflow.backend). All kernels write into a preallocated
`out` array and operate on flat contiguous views.
"""

import numpy as np

BACKEND_NAME = "python"


def exp_factors(sigma, dt, e_half, e_full):
    """e_half = exp(-sigma*dt/2), e_full = e_half**2."""
    np.multiply(sigma, -0.5 * dt, out=e_half)
    np.exp(e_half, out=e_half)
    np.multiply(e_half, e_half, out=e_full)


def rk4_stage2(rho, n1, dt, e_half, out):
    """out = e_half * (rho + (dt/2) * n1)."""
    out[...] = e_half * (rho + (0.5 * dt) * n1)


def rk4_stage3(rho, n2, dt, e_half, out):
    """out = e_half * rho + (dt/2) * n2."""
    out[...] = e_half * rho + (0.5 * dt) * n2


def rk4_stage4(rho, n3, dt, e_half, e_full, out):
    """out = e_full * rho + dt * e_half * n3."""
    out[...] = e_full * rho + dt * (e_half * n3)


def rk4_combine(rho, n1, n2, n3, n4, dt, e_half, e_full, out):
    """out = e_full * rho + (dt/6) * (e_full*n1 + 2*e_half*(n2+n3) + n4)."""
    out[...] = e_full * rho + (dt / 6.0) * (
        e_full * n1 + 2.0 * e_half * (n2 + n3) + n4
    )


def imag_multiplier(coeffs, mult, out):
    """out = 1j * mult * coeffs, with mult real (derivative-like symbols)."""
    out[...] = 1j * mult * coeffs


def real_multiplier(coeffs, mult, out):
    """out = mult * coeffs, with mult real (masks, dissipation symbols)."""
    out[...] = mult * coeffs


def scaled_flux(rho, u, amp, b, out):
    """out = rho * (amp * u + b), all real fields."""
    out[...] = rho * (amp * u + b)


def scaled_product(rho, u, amp, out):
    """out = amp * rho * u, all real fields."""
    out[...] = amp * rho * u


def flux_divergence(flux_hats, kvec, mask, scale, out):
    """out = scale * mask * sum_j (1j * kvec[j] * flux_hats[j]).

    flux_hats: (d, m) complex, kvec: (d, m) real, mask: (m,) real 0/1.
    """
    acc = 1j * kvec[0] * flux_hats[0]
    for j in range(1, flux_hats.shape[0]):
        acc += 1j * kvec[j] * flux_hats[j]
    out[...] = scale * mask * acc
