#!/usr/bin/env python3
"""Benchmark: compiled kernels vs the NumPy fallback.

Times the individual hot kernels and full integrator steps on both backends.
Run as: python benchmarks/bench_backends.py [--n 32 48] [--steps 40]
"""

import argparse
import time

import numpy as np

import ksflow.dynamics as dyn
from ksflow import _kernels_py
from ksflow.attraction import KernelSpec
from ksflow.config import SimConfig, build_initial_field
from ksflow.dynamics import Stepper, initial_state
from ksflow.flows import FlowSpec, make_flow
from ksflow.spectral import TorusGrid

try:
    from ksflow import _kernels as _kernels_cy
except ImportError:
    _kernels_cy = None


def time_kernels(m=110_592, repeats=200):
    rng = np.random.default_rng(0)
    rho = rng.standard_normal(m) + 1j * rng.standard_normal(m)
    n1, n2, n3, n4 = (rng.standard_normal(m) + 1j * rng.standard_normal(m)
                      for _ in range(4))
    sigma = np.abs(rng.standard_normal(m))
    eh, ef = np.empty(m), np.empty(m)
    out = np.empty(m, complex)
    d = 3
    flux = np.stack([rho] * d)
    kvec = np.stack([np.abs(rng.standard_normal(m)) for _ in range(d)])
    mask = (rng.standard_normal(m) > 0).astype(np.float64)

    cases = {
        "exp_factors": lambda k: k.exp_factors(sigma, 0.01, eh, ef),
        "rk4_combine": lambda k: k.rk4_combine(rho, n1, n2, n3, n4, 0.01,
                                               eh, ef, out),
        "imag_multiplier": lambda k: k.imag_multiplier(rho, sigma, out),
        "flux_divergence": lambda k: k.flux_divergence(flux, kvec, mask,
                                                       -1.0, out),
    }
    print(f"\nper-kernel timings ({m} points, best of {repeats}):")
    print(f"{'kernel':18s} {'numpy':>10s} {'cython':>10s} {'speedup':>8s}")
    for name, fn in cases.items():
        times = {}
        for label, mod in (("numpy", _kernels_py), ("cython", _kernels_cy)):
            if mod is None:
                times[label] = float("nan")
                continue
            fn(mod)  # warm up
            best = min(
                _timed(fn, mod) for _ in range(repeats)
            )
            times[label] = best
        speed = times["numpy"] / times["cython"] if _kernels_cy else float("nan")
        print(f"{name:18s} {times['numpy']*1e6:9.1f}us "
              f"{times['cython']*1e6:9.1f}us {speed:7.2f}x")


def _timed(fn, mod):
    t0 = time.perf_counter()
    fn(mod)
    return time.perf_counter() - t0


def time_steps(n, steps, kernel_module, label):
    grid = TorusGrid(3, n)
    cfg = SimConfig(
        dim=3, n=n, alpha=0.0, beta=2.5, A=16.0, T=10.0,
        flow=FlowSpec(kind="alternating-shear", A=16.0, seed=7, tau_sw=0.05, m=2),
        ic_kind="gaussian-bump", ic_params={"amplitude": 2.0, "width": 0.5},
    )
    rho0 = build_initial_field(cfg, grid)
    flow = make_flow(cfg.flow, grid)
    original = dyn.kernels
    dyn.kernels = kernel_module
    try:
        stepper = Stepper(grid, 0.0, KernelSpec(3, 2.5), flow, cfg.A)
        state = initial_state(rho0)
        state, _ = stepper.step(state, dt_fixed=1e-4)  # warm up
        t0 = time.perf_counter()
        for _ in range(steps):
            state, _ = stepper.step(state, dt_fixed=1e-4)
        elapsed = time.perf_counter() - t0
    finally:
        dyn.kernels = original
    per = elapsed / steps * 1e3
    print(f"  n={n}: {label:7s} {per:7.2f} ms/step")
    return per


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--n", type=int, nargs="+", default=[32, 48])
    parser.add_argument("--steps", type=int, default=40)
    args = parser.parse_args()

    time_kernels()

    print("\nfull integrator step (3D, nonlinear + alternating shear):")
    for n in args.n:
        numpy_ms = time_steps(n, args.steps, _kernels_py, "numpy")
        if _kernels_cy is not None:
            cython_ms = time_steps(n, args.steps, _kernels_cy, "cython")
            print(f"  n={n}: speedup {numpy_ms / cython_ms:.2f}x")
        else:
            print("  compiled backend unavailable")


if __name__ == "__main__":
    main()
