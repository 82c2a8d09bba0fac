"""Right-hand-side assembly, dealiased products, stiff-exact stepping, and
run classification.

The evolution is d(rho)/dt = -sigma rho - A u.grad(rho) - div(rho B(rho)),
integrated with an integrating-factor RK4: the dissipation symbol sigma(k) is
advanced exactly through exp(-sigma dt) factors, so the linear subproblems
(pure damping, damped transport means) are reproduced to round-off, while the
transport and aggregation fluxes are advanced by the classical four-stage
rule on the transformed variable.

Since div u = 0, the stepper assembles the whole non-stiff part in
conservative form -div(rho (A u + B)); within the dealiased band this agrees
with A u.grad(rho) + div(rho B) exactly, and it makes every mode k=0
contribution vanish identically, which is what keeps the mean evolution
exact. Shipped flows are piecewise constant in time and steps never straddle
a switching time, so sampling the flow once per step is exact.

State lives on the Hermitian half-spectrum (rfft layout); the public term
operators below work on full-cube ScalarFields and are the oracle surface.
"""

from __future__ import annotations

import functools
import math
import os
from dataclasses import dataclass, field

import numpy as np
import scipy.fft as _fft

from ksflow.attraction import KernelSpec, drift_multiplier
from ksflow.backend import kernels
from ksflow.config import SimConfig, build_initial_field, validate_initial_field
from ksflow.flows import FlowSampler, make_flow
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

_WORKERS = int(os.environ.get("KSFLOW_FFT_WORKERS", "1"))

# blow-up / resolution thresholds used by the run classifier
BLOWUP_LINF_FACTOR = 50.0
TAIL_FRACTION_LIMIT = 1e-3


def dealias_keep_max(n: int) -> int:
    """Largest |k_j| kept by the 2/3-rule mask.

    3*k_max < n is required so that no aliased image of a quadratic product
    lands back inside the kept band (at n divisible by 3 the naive n/3 cutoff
    would let the corner mode alias onto itself).
    """
    return (n - 1) // 3


def dealias_mask_full(grid: TorusGrid) -> np.ndarray:
    """Boolean mask over the full wavevector cube: all |k_j| <= k_max."""
    k = wavevectors(grid)
    keep = dealias_keep_max(grid.n)
    return np.all(np.abs(k) <= keep, axis=0)


def dealias(F: SpectralField) -> SpectralField:
    return SpectralField(F.grid, F.coeffs * dealias_mask_full(F.grid))


# ---------------------------------------------------------------------------
# public term operators (full-cube, oracle surface)
# ---------------------------------------------------------------------------


def nonlinear_term(rho: ScalarField, spec: KernelSpec) -> ScalarField:
    """div(rho * B(rho)) with 2/3-rule dealiasing; exactly mean-free."""
    grid = rho.grid
    mask = dealias_mask_full(grid)
    rho_hat = forward_transform(rho)
    bparts = apply_multiplier(rho_hat, drift_multiplier(spec, grid))
    rho_d = inverse_transform(SpectralField(grid, rho_hat.coeffs * mask))
    k = wavevectors(grid)
    out = np.zeros(grid.shape, dtype=np.complex128)
    for j in range(grid.d):
        bj = inverse_transform(SpectralField(grid, bparts[j].coeffs * mask))
        flux_hat = forward_transform(ScalarField(grid, rho_d.values * bj.values))
        out += 1j * k[j] * flux_hat.coeffs * mask
    out[(0,) * grid.d] = 0.0
    return inverse_transform(SpectralField(grid, out))


def advection_term(rho: ScalarField, u, A: float) -> ScalarField:
    """A * u.grad(rho) with dealiased products; mean zeroed (div u = 0)."""
    grid = rho.grid
    mask = dealias_mask_full(grid)
    rho_hat = forward_transform(rho)
    grads = apply_multiplier(rho_hat, Multiplier.gradient(grid))
    total = np.zeros(grid.shape)
    for j in range(grid.d):
        uj = u[j] if isinstance(u[j], np.ndarray) else u[j].values
        uj_d = inverse_transform(
            SpectralField(grid, forward_transform(ScalarField(grid, uj)).coeffs * mask)
        )
        gj = inverse_transform(SpectralField(grid, grads[j].coeffs * mask))
        total += uj_d.values * gj.values
    out_hat = forward_transform(ScalarField(grid, total)).coeffs * mask
    out_hat[(0,) * grid.d] = 0.0
    return ScalarField(grid, A * inverse_transform(SpectralField(grid, out_hat)).values)


def cfl_dt(u, A: float, B, grid: TorusGrid, c_cfl: float = 0.4,
           dt_max: float = math.inf, eps: float = 1e-12) -> float:
    """dt = c_cfl * (2*pi/n) / (A*max|u| + max|B| + eps), capped at dt_max."""
    max_u = _max_magnitude(u, grid) if u is not None else 0.0
    max_b = _max_magnitude(B, grid) if B is not None else 0.0
    return min(c_cfl * grid.spacing / (A * max_u + max_b + eps), dt_max)


def _max_magnitude(comps, grid: TorusGrid) -> float:
    mag_sq = np.zeros(grid.shape)
    for c in comps:
        vals = c if isinstance(c, np.ndarray) else c.values
        mag_sq += vals * vals
    return math.sqrt(float(mag_sq.max()))


# ---------------------------------------------------------------------------
# half-spectrum geometry
# ---------------------------------------------------------------------------


@functools.lru_cache(maxsize=16)
def _half_geometry(d: int, n: int):
    """Flat-array geometry for the Hermitian half-spectrum layout."""
    rshape = (n,) * (d - 1) + (n // 2 + 1,)
    k1 = np.fft.fftfreq(n, d=1.0 / n)
    kr = np.fft.rfftfreq(n, d=1.0 / n)
    axes = np.meshgrid(*([k1] * (d - 1) + [kr]), indexing="ij")
    kvec = np.ascontiguousarray(
        np.stack([a.ravel() for a in axes]), dtype=np.float64
    )
    ksq = np.sum(kvec * kvec, axis=0)
    keep = dealias_keep_max(n)
    mask = np.ones(kvec.shape[1])
    for j in range(d):
        mask[np.abs(kvec[j]) > keep] = 0.0
    # each stored mode represents itself and its conjugate unless the last
    # axis sits on a self-conjugate plane
    kz = kvec[-1]
    weights = np.where((kz == 0) | (kz == n // 2), 1.0, 2.0)
    tail = (ksq > (n / 3.0) ** 2).astype(np.float64)
    return rshape, kvec, ksq, mask, weights, tail


def _rfft(values: np.ndarray, npoints: int) -> np.ndarray:
    return _fft.rfftn(values, workers=_WORKERS) / npoints


def _irfft(coeffs_flat: np.ndarray, rshape, shape, npoints: int) -> np.ndarray:
    return _fft.irfftn(coeffs_flat.reshape(rshape), s=shape, workers=_WORKERS) * npoints


# ---------------------------------------------------------------------------
# stepper
# ---------------------------------------------------------------------------


@dataclass
class StepperState:
    """Integrator state; rho_hat is the flat half-spectrum coefficient array."""

    t: float
    rho_hat: np.ndarray
    dt: float
    step_index: int
    grid: TorusGrid

    def field(self) -> ScalarField:
        rshape, *_ = _half_geometry(self.grid.d, self.grid.n)
        vals = _irfft(self.rho_hat, rshape, self.grid.shape, self.grid.npoints)
        return ScalarField(self.grid, vals)

    def spectral(self) -> SpectralField:
        return forward_transform(self.field())


@dataclass
class StepMonitor:
    """Cheap per-step observables used by the run classifier."""

    max_rho: float  # max of the dealiased density entering the step
    max_drift: float
    meanfree_energy: float  # coefficient energy of the advanced state, k != 0
    tail_energy: float  # part of it beyond Euclidean |k| = n/3
    finite: bool
    dt: float


@dataclass
class OutcomeReport:
    classification: str  # resolved-horizon | blowup-suspected | under-resolved | nan-abort
    t_final: float
    peak_linf: float
    tail_fraction_at_stop: float
    tail_abs_at_stop: float
    steps: int
    min_value: float
    detail: str = ""


class Stepper:
    """Integrating-factor RK4 on the half-spectrum with fused backend kernels."""

    def __init__(
        self,
        grid: TorusGrid,
        alpha: float,
        kernel_spec: KernelSpec | None,
        flow: FlowSampler,
        A: float,
        c_cfl: float = 0.4,
        dt_max: float = math.inf,
        disable_nonlinear: bool = False,
        disable_dissipation: bool = False,
    ):
        self.grid = grid
        self.flow = flow
        self.A = float(A)
        self.c_cfl = c_cfl
        self.dt_max = dt_max
        self.nonlinear = not disable_nonlinear
        if self.nonlinear and kernel_spec is None:
            raise ValueError("kernel_spec is required while the nonlinearity is on")

        rshape, kvec, ksq, mask, weights, tail = _half_geometry(grid.d, grid.n)
        self.rshape = rshape
        self.kvec = kvec
        self.mask = mask
        self.weights = weights
        self.tail = tail
        m = kvec.shape[1]

        if disable_dissipation:
            self.sigma = np.zeros(m)
        else:
            sigma = ksq ** (alpha / 2.0) if alpha > 0 else np.ones(m)
            if alpha > 0:
                sigma[0] = 0.0  # mean conserved for genuine fractional dissipation
            self.sigma = np.ascontiguousarray(sigma)
        # alpha = 0 and disabled dissipation have a uniform symbol, so the
        # integrating factors are scalars
        self._sigma_uniform = (
            float(self.sigma[0]) if np.all(self.sigma == self.sigma[0]) else None
        )

        if self.nonlinear:
            with np.errstate(divide="ignore"):
                radial = ksq ** (-kernel_spec.s_B / 2.0)
            radial[0] = 0.0
            self.drift_mults = [
                np.ascontiguousarray(mask * kvec[j] * radial) for j in range(grid.d)
            ]

        self._advect = flow.spec.kind != "zero" and self.A > 0.0

        # preallocated work arrays
        self._hat = [np.empty(m, dtype=np.complex128) for _ in range(5)]
        self._stages = [np.empty(m, dtype=np.complex128) for _ in range(4)]
        self._flux_hats = np.empty((grid.d, m), dtype=np.complex128)
        self._e_half = np.empty(m)
        self._e_full = np.empty(m)
        self._flux_phys = np.empty(grid.shape)
        self._interval = None
        self._u = None
        self._max_u = 0.0

    # -- flow caching -----------------------------------------------------

    def _flow_at(self, t: float):
        idx = self.flow.interval_index(t)
        if idx != self._interval:
            grid = self.grid
            comps = []
            for c in self.flow.fields(t):
                # products below are dealiased, so band-limit u once per interval
                chat = _rfft(c, grid.npoints).ravel()
                chat *= self.mask
                comps.append(_irfft(chat, self.rshape, grid.shape, grid.npoints))
            self._u = tuple(comps)
            self._max_u = _max_magnitude(self._u, grid) if self._advect else 0.0
            self._interval = idx
        return self._u

    # -- right-hand side ---------------------------------------------------

    def _rhs(self, rho_hat: np.ndarray, u, out: np.ndarray,
             want_max: bool = False):
        """out = -div(rho (A u + B))^hat, dealiased; optionally stage maxima."""
        grid = self.grid
        work = self._hat[4]
        kernels.real_multiplier(rho_hat, self.mask, work)
        rho_phys = _irfft(work, self.rshape, grid.shape, grid.npoints)
        max_rho = float(np.max(np.abs(rho_phys))) if want_max else 0.0

        max_drift = 0.0
        if self.nonlinear:
            drift_mag = None
            for j in range(grid.d):
                kernels.imag_multiplier(rho_hat, self.drift_mults[j], work)
                bj = _irfft(work, self.rshape, grid.shape, grid.npoints)
                if want_max:
                    drift_mag = bj * bj if drift_mag is None else drift_mag + bj * bj
                if self._advect:
                    kernels.scaled_flux(
                        rho_phys.ravel(), u[j].ravel(), self.A, bj.ravel(),
                        self._flux_phys.ravel(),
                    )
                else:
                    kernels.scaled_product(
                        rho_phys.ravel(), bj.ravel(), 1.0, self._flux_phys.ravel()
                    )
                self._flux_hats[j] = _rfft(self._flux_phys, grid.npoints).ravel()
            if want_max and drift_mag is not None:
                max_drift = math.sqrt(float(drift_mag.max()))
        elif self._advect:
            for j in range(grid.d):
                kernels.scaled_product(
                    rho_phys.ravel(), u[j].ravel(), self.A, self._flux_phys.ravel()
                )
                self._flux_hats[j] = _rfft(self._flux_phys, grid.npoints).ravel()
        else:
            out[:] = 0.0
            return max_rho, max_drift

        kernels.flux_divergence(self._flux_hats, self.kvec, self.mask, -1.0, out)
        return max_rho, max_drift

    # -- one step ------------------------------------------------------------

    def step(self, state: StepperState, t_limit: float = math.inf,
             dt_fixed: float | None = None) -> tuple:
        """Advance one step; dt honors CFL, dt_max, and the t_limit clip."""
        rho = state.rho_hat
        u = self._flow_at(state.t) if self._advect else None

        n1, n2, n3, n4 = self._stages
        max_rho, max_drift = self._rhs(rho, u, n1, want_max=True)

        if dt_fixed is not None:
            dt = dt_fixed
        else:
            denom = self.A * self._max_u + max_drift + 1e-12
            dt = min(self.c_cfl * self.grid.spacing / denom, self.dt_max)
        if t_limit < math.inf:
            dt = min(dt, t_limit - state.t)
        if dt <= 0:
            raise RuntimeError(f"non-positive step size dt={dt} at t={state.t}")

        if self._sigma_uniform is not None:
            eh = math.exp(-0.5 * dt * self._sigma_uniform)
            self._e_half.fill(eh)
            self._e_full.fill(eh * eh)
        else:
            kernels.exp_factors(self.sigma, dt, self._e_half, self._e_full)

        s2, s3, out = self._hat[0], self._hat[1], self._hat[2]
        kernels.rk4_stage2(rho, n1, dt, self._e_half, s2)
        self._rhs(s2, u, n2)
        kernels.rk4_stage3(rho, n2, dt, self._e_half, s3)
        self._rhs(s3, u, n3)
        kernels.rk4_stage4(rho, n3, dt, self._e_half, self._e_full, s2)
        self._rhs(s2, u, n4)
        kernels.rk4_combine(rho, n1, n2, n3, n4, dt, self._e_half, self._e_full, out)

        with np.errstate(over="ignore", invalid="ignore"):
            power = self.weights * (out.real**2 + out.imag**2)
            total = float(power.sum())
            meanfree = total - float(power[0])
            tail = float((power * self.tail).sum())

        new_state = StepperState(
            t=state.t + dt,
            rho_hat=out.copy(),
            dt=dt,
            step_index=state.step_index + 1,
            grid=state.grid,
        )
        monitor = StepMonitor(
            max_rho=max_rho,
            max_drift=max_drift,
            meanfree_energy=meanfree,
            tail_energy=tail,
            finite=bool(np.isfinite(total)),
            dt=dt,
        )
        return new_state, monitor


def initial_state(rho0: ScalarField) -> StepperState:
    grid = rho0.grid
    rho_hat = _rfft(rho0.values, grid.npoints).ravel()
    return StepperState(t=0.0, rho_hat=rho_hat, dt=0.0, step_index=0, grid=grid)


# ---------------------------------------------------------------------------
# full runs
# ---------------------------------------------------------------------------


def run(cfg: SimConfig, rho0: ScalarField | None = None, on_final=None):
    """Integrate to the horizon or an early stop; returns (report, records).

    `on_final`, when given, receives the final ScalarField (skipped after a
    nan-abort, where no finite field exists).

    Classification: nan-abort on a non-finite state; blowup-suspected when
    the density max reaches 50x its initial value while the instantaneous
    tail fraction (energy beyond Euclidean |k| = n/3 over current mean-free
    energy) exceeds 1e-3; under-resolved when, at stop, the tail energy
    exceeds 1e-3 of the *initial* total energy -- the initial normalization
    keeps exponentially damped, well-mixed states (whose relative spectral
    distribution is flat but whose amplitude has decayed away) from being
    misflagged; resolved-horizon otherwise.
    """
    from ksflow.diagnostics import compute_record

    grid = cfg.grid()
    if rho0 is None:
        rho0 = build_initial_field(cfg, grid)
    elif rho0.grid != grid:
        raise ValueError("supplied initial field does not match the config grid")
    validate_initial_field(cfg, rho0)

    kernel_spec = None if cfg.disable_nonlinear else KernelSpec(cfg.dim, cfg.beta)
    flow = make_flow(cfg.flow, grid)
    stepper = Stepper(
        grid,
        cfg.alpha,
        kernel_spec,
        flow,
        cfg.A,
        c_cfl=cfg.c_cfl,
        dt_max=cfg.dt_max,
        disable_nonlinear=cfg.disable_nonlinear,
        disable_dissipation=cfg.disable_dissipation,
    )

    linf0 = float(np.max(np.abs(rho0.values)))
    state = initial_state(rho0)
    power0 = stepper.weights * np.abs(state.rho_hat) ** 2
    energy0 = float(power0.sum())  # includes the mean mode

    records = [compute_record(0.0, rho0, cfg.beta, cfg.low_mode_N)]
    classification = None
    detail = ""
    monitor = None
    next_record_t = cfg.output_every_t if cfg.output_every_t else math.inf

    T = cfg.T
    t_eps = 1e-12 * max(1.0, T)
    while state.t < T - t_eps:
        t_limit = min(T, flow.next_switch(state.t))
        state, monitor = stepper.step(state, t_limit=t_limit)

        if not monitor.finite:
            classification = "nan-abort"
            detail = "non-finite state"
            break
        tail_rel = (
            monitor.tail_energy / monitor.meanfree_energy
            if monitor.meanfree_energy > 0
            else 0.0
        )
        if monitor.max_rho >= BLOWUP_LINF_FACTOR * linf0 and tail_rel > TAIL_FRACTION_LIMIT:
            classification = "blowup-suspected"
            detail = (
                f"max density reached {monitor.max_rho / linf0:.1f}x initial "
                f"with tail fraction {tail_rel:.2e}"
            )
            break

        due_by_steps = (
            cfg.output_every_t is None and state.step_index % cfg.output_every == 0
        )
        due_by_time = state.t >= next_record_t - t_eps
        if due_by_steps or due_by_time:
            records.append(
                compute_record(state.t, state.field(), cfg.beta, cfg.low_mode_N)
            )
            if due_by_time:
                next_record_t += cfg.output_every_t

    state_recordable = classification != "nan-abort"
    if state_recordable and (records[-1].t < state.t - t_eps or len(records) == 1):
        records.append(
            compute_record(state.t, state.field(), cfg.beta, cfg.low_mode_N)
        )
    if on_final is not None and state_recordable:
        on_final(state.field())

    if monitor is not None:
        tail_rel = (
            monitor.tail_energy / monitor.meanfree_energy
            if monitor.meanfree_energy > 0
            else 0.0
        )
        tail_abs = monitor.tail_energy / energy0 if energy0 > 0 else 0.0
    else:
        tail_rel = tail_abs = 0.0

    if classification is None:
        if tail_abs > TAIL_FRACTION_LIMIT:
            classification = "under-resolved"
            detail = f"tail energy is {tail_abs:.2e} of the initial total"
        else:
            classification = "resolved-horizon"

    report = OutcomeReport(
        classification=classification,
        t_final=state.t,
        peak_linf=max(r.linf for r in records),
        tail_fraction_at_stop=tail_rel,
        tail_abs_at_stop=tail_abs,
        steps=state.step_index,
        min_value=min(r.min_value for r in records),
        detail=detail,
    )
    return report, records


def transport_run(cfg: SimConfig, phi0: ScalarField | None = None):
    """Pure advection runs for the mixing diagnostics (both terms disabled)."""
    if not (cfg.disable_nonlinear and cfg.disable_dissipation):
        raise ValueError(
            "transport_run requires disable_nonlinear and disable_dissipation"
        )
    return run(cfg, rho0=phi0)
