# cython: boundscheck=False, wraparound=False, cdivision=True
"""Fused loops for the stepper's hot kernels.

Same call signatures and semantics as ksflow._kernels_py; each kernel makes a
single pass and writes into the preallocated `out`, avoiding the temporaries
the NumPy expressions allocate.
"""

from libc.math cimport exp

import numpy as np
cimport numpy as cnp

cnp.import_array()

BACKEND_NAME = "cython"


def exp_factors(double[::1] sigma, double dt, double[::1] e_half,
                double[::1] e_full):
    cdef Py_ssize_t i, m = sigma.shape[0]
    cdef double eh
    for i in range(m):
        eh = exp(-0.5 * dt * sigma[i])
        e_half[i] = eh
        e_full[i] = eh * eh


def rk4_stage2(double complex[::1] rho, double complex[::1] n1, double dt,
               double[::1] e_half, double complex[::1] out):
    cdef Py_ssize_t i, m = rho.shape[0]
    cdef double h = 0.5 * dt
    for i in range(m):
        out[i] = e_half[i] * (rho[i] + h * n1[i])


def rk4_stage3(double complex[::1] rho, double complex[::1] n2, double dt,
               double[::1] e_half, double complex[::1] out):
    cdef Py_ssize_t i, m = rho.shape[0]
    cdef double h = 0.5 * dt
    for i in range(m):
        out[i] = e_half[i] * rho[i] + h * n2[i]


def rk4_stage4(double complex[::1] rho, double complex[::1] n3, double dt,
               double[::1] e_half, double[::1] e_full,
               double complex[::1] out):
    cdef Py_ssize_t i, m = rho.shape[0]
    for i in range(m):
        out[i] = e_full[i] * rho[i] + dt * (e_half[i] * n3[i])


def rk4_combine(double complex[::1] rho, double complex[::1] n1,
                double complex[::1] n2, double complex[::1] n3,
                double complex[::1] n4, double dt, double[::1] e_half,
                double[::1] e_full, double complex[::1] out):
    cdef Py_ssize_t i, m = rho.shape[0]
    cdef double w = dt / 6.0
    for i in range(m):
        out[i] = e_full[i] * rho[i] + w * (
            e_full[i] * n1[i] + 2.0 * e_half[i] * (n2[i] + n3[i]) + n4[i]
        )


def imag_multiplier(double complex[::1] coeffs, double[::1] mult,
                    double complex[::1] out):
    cdef Py_ssize_t i, m = coeffs.shape[0]
    cdef double re, im
    for i in range(m):
        re = coeffs[i].real
        im = coeffs[i].imag
        out[i].real = -mult[i] * im
        out[i].imag = mult[i] * re


def real_multiplier(double complex[::1] coeffs, double[::1] mult,
                    double complex[::1] out):
    cdef Py_ssize_t i, m = coeffs.shape[0]
    for i in range(m):
        out[i].real = mult[i] * coeffs[i].real
        out[i].imag = mult[i] * coeffs[i].imag


def scaled_flux(double[::1] rho, double[::1] u, double amp, double[::1] b,
                double[::1] out):
    cdef Py_ssize_t i, m = rho.shape[0]
    for i in range(m):
        out[i] = rho[i] * (amp * u[i] + b[i])


def scaled_product(double[::1] rho, double[::1] u, double amp,
                   double[::1] out):
    cdef Py_ssize_t i, m = rho.shape[0]
    for i in range(m):
        out[i] = amp * rho[i] * u[i]


def flux_divergence(double complex[:, ::1] flux_hats, double[:, ::1] kvec,
                    double[::1] mask, double scale, double complex[::1] out):
    cdef Py_ssize_t j, i
    cdef Py_ssize_t d = flux_hats.shape[0], m = flux_hats.shape[1]
    cdef double re, im
    for i in range(m):
        re = 0.0
        im = 0.0
        for j in range(d):
            # accumulate i * k_j * flux_j
            re -= kvec[j, i] * flux_hats[j, i].imag
            im += kvec[j, i] * flux_hats[j, i].real
        out[i].real = scale * mask[i] * re
        out[i].imag = scale * mask[i] * im
