"""Measurements taken on densities and record streams.

Norm conventions: phi, the negative-order norms, and the low-mode fractions
are coefficient sums (no quadrature factor), sup norms come from the grid.
All unspecified universal constants in the certificate formulas are fixed to
explicit conventions: C = 1 for the Young-type bounds entering C0, tau0 and
tau1, and C = 2 for the empirical transport semigroup check; reports label
them as conventions, not derived values.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from ksflow.attraction import KernelSpec, kernel_l1_norms
from ksflow.spectral import (
    ScalarField,
    SpectralField,
    TorusGrid,
    forward_transform,
    inverse_transform,
    low_mode_energy,
    lp_norm,
    sobolev_norm,
    tail_energy_fraction,
    wavenumber_sq,
    wavevectors,
)


@dataclass
class DiagnosticsRecord:
    """One time sample of every monitored norm and mixing functional."""

    t: float
    mean: float
    l1: float
    l2: float
    linf: float
    min_value: float
    l2_meanfree: float  # coefficient convention, k != 0
    neg_sobolev: float  # coefficient norm of order beta - d
    phi: float | None  # None when the field is constant
    low_mode_fraction: float
    tail_fraction: float
    grad_sup: float
    max_location: tuple = ()


def compute_record(
    t: float, f: ScalarField, beta: float, low_mode_N: int
) -> DiagnosticsRecord:
    grid = f.grid
    F = forward_transform(f)
    ksq = wavenumber_sq(grid)
    power = np.abs(F.coeffs) ** 2
    nz = ksq > 0
    mf_energy = float(power[nz].sum())
    s = beta - grid.d
    neg = math.sqrt(float((ksq[nz] ** s * power[nz]).sum()))
    phi = neg**2 / mf_energy if mf_energy > 0 else None
    low = low_mode_energy(F, low_mode_N)
    k = wavevectors(grid)
    grad_sup = 0.0
    for j in range(grid.d):
        dj = inverse_transform(SpectralField(grid, 1j * k[j] * F.coeffs))
        grad_sup = max(grad_sup, float(np.max(np.abs(dj.values))))
    flat_argmax = int(np.argmax(f.values))
    return DiagnosticsRecord(
        t=t,
        mean=f.mean(),
        l1=lp_norm(f, 1),
        l2=lp_norm(f, 2),
        linf=lp_norm(f, math.inf),
        min_value=float(f.values.min()),
        l2_meanfree=math.sqrt(mf_energy),
        neg_sobolev=neg,
        phi=phi,
        low_mode_fraction=(low / mf_energy if mf_energy > 0 else 0.0),
        tail_fraction=tail_energy_fraction(F),
        grad_sup=grad_sup,
        max_location=tuple(np.unravel_index(flat_argmax, grid.shape)),
    )


# ---------------------------------------------------------------------------
# mixing functionals
# ---------------------------------------------------------------------------


def phi(rho: ScalarField, spec: KernelSpec) -> float:
    """Mixing ratio: negative-order coefficient energy over mean-free energy.

    phi lies in (0, 1] for nonconstant fields since beta < d makes the
    negative-order weights |k|^{2(beta-d)} <= 1 on integer modes; small values
    mean the mean-free mass lives at high frequencies.
    """
    num = sobolev_norm(rho, spec.beta - spec.d)
    den = sobolev_norm(rho, 0.0)
    if den == 0.0:
        raise ValueError("phi is undefined for constant fields")
    return num**2 / den**2


def phi_threshold(N: int, spec: KernelSpec) -> float:
    """Flagging level 2 * N^{2(beta-d)} for the mixing ratio at radius N."""
    return phi_threshold_exponent(N, spec.beta - spec.d)


def phi_threshold_exponent(N: int, s: float) -> float:
    """Same flagging level from the raw negative order s = beta - d."""
    if N < 1:
        raise ValueError("N must be >= 1")
    return 2.0 * float(N) ** (2.0 * s)


def phi_time_stats(records, threshold: float) -> tuple:
    """(time-weighted mean of phi, fraction of time with phi >= threshold).

    Interval-weighted over consecutive records; records with undefined phi
    are skipped.
    """
    samples = [(r.t, r.phi) for r in records if r.phi is not None]
    if not samples:
        return math.nan, math.nan
    if len(samples) == 1:
        p = samples[0][1]
        return p, 1.0 if p >= threshold else 0.0
    total = 0.0
    weighted = 0.0
    flagged = 0.0
    for (t0, p0), (t1, p1) in zip(samples, samples[1:]):
        w = t1 - t0
        total += w
        weighted += 0.5 * (p0 + p1) * w
        flagged += w * (0.5 * ((p0 >= threshold) + (p1 >= threshold)))
    if total == 0.0:
        p = samples[0][1]
        return p, 1.0 if p >= threshold else 0.0
    return weighted / total, flagged / total


# ---------------------------------------------------------------------------
# transport-based diagnostics
# ---------------------------------------------------------------------------


def _transport_config(grid: TorusGrid, flow_spec, A: float, T: float,
                      every: int = 1, low_mode_N: int = 2):
    from ksflow.config import SimConfig

    return SimConfig(
        dim=grid.d,
        n=grid.n,
        alpha=0.0,
        beta=2.0 if grid.d == 2 else 2.5,  # unused: nonlinearity disabled
        A=A,
        T=T,
        flow=flow_spec,
        ic_kind="file",
        dt_max=math.inf,
        disable_nonlinear=True,
        disable_dissipation=True,
        output_every=every,
        low_mode_N=low_mode_N,
    )


def rage_average(flow_spec, A: float, phi0: ScalarField, N: int, T: float) -> float:
    """Time average (1/T) integral of ||P_N phi(t)||^2 under pure transport.

    phi0 must be mean-free with unit coefficient norm; anything else is
    normalized with a warning. The average is accumulated by the trapezoid
    rule over per-step records.
    """
    vals = phi0.values
    mean = vals.mean()
    norm = sobolev_norm(ScalarField(phi0.grid, vals - mean), 0.0)
    if norm == 0.0:
        raise ValueError("rage_average needs a nonconstant field")
    if abs(mean) > 1e-12 * max(1.0, float(np.max(np.abs(vals)))) or abs(norm - 1.0) > 1e-9:
        warnings.warn(
            "rage_average input was not mean-free with unit coefficient norm; "
            "normalizing",
            stacklevel=2,
        )
    phi0 = ScalarField(phi0.grid, (vals - mean) / norm)

    from ksflow.dynamics import transport_run

    cfg = _transport_config(phi0.grid, flow_spec, A, T, low_mode_N=N)
    _, records = transport_run(cfg, phi0=phi0)

    samples = [(r.t, r.low_mode_fraction * r.l2_meanfree**2) for r in records]
    total = 0.0
    for (t0, e0), (t1, e1) in zip(samples, samples[1:]):
        total += 0.5 * (e0 + e1) * (t1 - t0)
    return total / (samples[-1][0] - samples[0][0])


@dataclass
class SemigroupReport:
    max_ratio: float
    per_N: dict
    times: tuple


def semigroup_bound_check(flow_spec, A: float, f: ScalarField, N_values,
                          t_max: float) -> SemigroupReport:
    """Ratios ||P_N f(t)|| / (e^{N^2 t} ||P_N f(0)||) under pure transport.

    The growth allowance e^{N^2 t} comes with an empirical constant: the
    acceptance convention is that ratios stay below 2.
    """
    if isinstance(N_values, int):
        N_values = [N_values]
    F0 = forward_transform(f)
    base = {N: math.sqrt(low_mode_energy(F0, N)) for N in N_values}
    scale = sobolev_norm(F0, 0.0)
    for N, b in base.items():
        if b <= 1e-12 * scale:
            raise ValueError(f"||P_N f|| vanishes at N={N}")

    cfg = _transport_config(f.grid, flow_spec, A, t_max)
    per_N, times = _semigroup_ratios(cfg, f, N_values, base)
    return SemigroupReport(
        max_ratio=max(per_N.values()), per_N=per_N, times=tuple(times)
    )


def _semigroup_ratios(cfg, f: ScalarField, N_values, base):
    from ksflow.dynamics import Stepper, initial_state
    from ksflow.flows import make_flow

    grid = f.grid
    flow = make_flow(cfg.flow, grid)
    stepper = Stepper(
        grid, 0.0, None, flow, cfg.A,
        c_cfl=cfg.c_cfl, dt_max=cfg.dt_max,
        disable_nonlinear=True, disable_dissipation=True,
    )
    state = initial_state(f)
    ratios = {N: 1.0 for N in N_values}
    times = [0.0]
    t_eps = 1e-12 * max(1.0, cfg.T)
    while state.t < cfg.T - t_eps:
        t_limit = min(cfg.T, flow.next_switch(state.t))
        state, _ = stepper.step(state, t_limit=t_limit)
        F = state.spectral()
        times.append(state.t)
        for N in N_values:
            proj = math.sqrt(low_mode_energy(F, N))
            ratio = proj / (math.exp(N * N * state.t) * base[N])
            ratios[N] = max(ratios[N], ratio)
    return ratios, times


# ---------------------------------------------------------------------------
# decay, interpolation, and certificate checks
# ---------------------------------------------------------------------------


def mean_decay_residual(records) -> float:
    """max over records of |mean(t) - e^{-t} mean(0)|; damped-mean law."""
    if not records:
        raise ValueError("no records")
    mean0 = records[0].mean
    return max(abs(r.mean - math.exp(-r.t) * mean0) for r in records)


def gn_ratio(f: ScalarField, spec: KernelSpec) -> float:
    """Interpolation ratio ||L^{s/2} f||_inf / (||L^s f||_2^{1-theta} ||f||_inf^theta).

    Here L^s is the |k|^s multiplier with the mean excluded, s = beta - d, and
    theta = (2d - beta)/(3d - 2*beta). Scaling-invariant (degree 0).
    """
    grid = f.grid
    if lp_norm(f, math.inf) == 0.0:
        raise ValueError("gn_ratio is undefined for the zero field")
    mean = f.mean()
    g = ScalarField(grid, f.values - mean)
    s = spec.beta - spec.d
    F = forward_transform(g)
    ksq = wavenumber_sq(grid)
    half = F.coeffs.copy()
    nz = ksq > 0
    half[nz] *= ksq[nz] ** (s / 4.0)  # |k|^{s/2}
    half[~nz] = 0.0
    num = lp_norm(inverse_transform(SpectralField(grid, half)), math.inf)
    theta = gn_theta(spec)
    den = sobolev_norm(g, s) ** (1.0 - theta) * lp_norm(g, math.inf) ** theta
    return num / den


def gn_theta(spec: KernelSpec) -> float:
    """theta = (2d - beta) / (3d - 2 beta), in (0, 1) for 2 <= beta < d."""
    return (2.0 * spec.d - spec.beta) / (3.0 * spec.d - 2.0 * spec.beta)


@dataclass(frozen=True)
class Certificate:
    """Local-existence constants computed from the initial data (C = 1)."""

    C0: float  # ||lapK||_L1
    C_inf: float  # ||rho0||_inf
    B_0: float  # coefficient l2 norm of rho0, mean included
    tau0: float  # 1 / (2 C0 C_inf); local-existence time treated as unbounded
    tau1: float  # min(tau0, 2 ln 2 / (C_inf + mean0))
    theta: float


def certificate(rho0: ScalarField, spec: KernelSpec, grid: TorusGrid) -> Certificate:
    """Deterministic certificate from (rho0, spec, grid); rejects negative data."""
    scale = max(1.0, float(np.max(np.abs(rho0.values))))
    if float(rho0.values.min()) < -1e-12 * scale:
        raise ValueError("certificate requires nonnegative initial data")
    norms = kernel_l1_norms(spec, grid)
    c_inf = lp_norm(rho0, math.inf)
    mean0 = rho0.mean()
    b0 = math.sqrt(mean0**2 + sobolev_norm(rho0, 0.0) ** 2)
    c0 = norms.norm_lapK
    tau0 = 1.0 / (2.0 * c0 * c_inf) if c_inf > 0 else math.inf
    tau1 = min(tau0, 2.0 * math.log(2.0) / (c_inf + mean0)) if c_inf + mean0 > 0 else tau0
    return Certificate(
        C0=c0, C_inf=c_inf, B_0=b0, tau0=tau0, tau1=tau1, theta=gn_theta(spec)
    )


@dataclass
class GradGrowthReport:
    """Least-squares fit of log ||D rho||_inf against t (monitoring only)."""

    rate: float
    intercept: float
    rate_per_amplitude: float | None
    max_residual: float


def grad_sup_track(records, A: float | None = None) -> GradGrowthReport:
    pts = [(r.t, r.grad_sup) for r in records if r.grad_sup > 0]
    if len(pts) < 2:
        raise ValueError("need at least two records with positive grad_sup")
    t = np.array([p[0] for p in pts])
    y = np.log([p[1] for p in pts])
    slope, intercept = np.polyfit(t, y, 1)
    resid = float(np.max(np.abs(y - (slope * t + intercept))))
    return GradGrowthReport(
        rate=float(slope),
        intercept=float(intercept),
        rate_per_amplitude=(float(slope) / A if A else None),
        max_residual=resid,
    )


def slope_bound_violation(records, C0: float, tol_slope: float,
                          min_level: float = 0.0) -> float:
    """Worst excess of the measured d/dt max(rho) over -m + C0 m^2 + tol.

    Returns max over record intervals of
    (forward difference) - (max of the bound at the two endpoints) - tol;
    a nonpositive value means the growth bound held along the trajectory.
    Uses linf as the running maximum, which matches max(rho) for the
    nonnegative densities this check is about.

    Intervals where the maximum sits below min_level are skipped: once the
    amplitude has decayed to the filament-sampling ripple of the grid, the
    chord of the sampled sup measures noise, not the sup dynamics.
    """
    worst = -math.inf
    for r0, r1 in zip(records, records[1:]):
        h = r1.t - r0.t
        if h <= 0 or min(r0.linf, r1.linf) < min_level:
            continue
        diff = (r1.linf - r0.linf) / h
        bound = max(-r0.linf + C0 * r0.linf**2, -r1.linf + C0 * r1.linf**2)
        worst = max(worst, diff - bound - tol_slope)
    return worst
