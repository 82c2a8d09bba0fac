"""Incompressible velocity field families.

Every shipped flow is normalized to unit sup norm so the advection amplitude
A carries all of the strength. Stationary kinds (zero, shear, relaxed-linear,
from-file) return the same snapshot for every t; the alternating-shear kind
is piecewise constant in time, switching axis and phase every tau_sw.

A smooth autonomous field whose transport operator has purely continuous
spectrum is not representable exactly on a finite grid, so the alternating
shear with seeded random phases serves as the mixing surrogate; how well it
mixes is measured a posteriori by the diagnostics, never assumed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ksflow.snapshots import read_snapshot
from ksflow.spectral import (
    Multiplier,
    ScalarField,
    TorusGrid,
    apply_multiplier,
    forward_transform,
    inverse_transform,
)

FLOW_KINDS = ("zero", "shear", "relaxed-linear", "alternating-shear", "from-file")

# surrogate irrational frequency ratio for the relaxed-linear baseline
GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0

# relative divergence tolerance every shipped flow must satisfy
DIV_TOL = 1e-10


@dataclass(frozen=True)
class FlowSpec:
    """Flow family selector plus its kind-specific parameters.

    m: shear profile wavenumber; tau_sw: alternation half-period;
    seed: phase-sequence seed (required for alternating-shear);
    files: per-component snapshot paths (required for from-file).
    """

    kind: str
    A: float = 0.0
    m: int = 1
    tau_sw: float = 1.0
    seed: int | None = None
    files: tuple = field(default_factory=tuple)

    def __post_init__(self):
        if self.kind not in FLOW_KINDS:
            raise ValueError(
                f"unknown flow kind {self.kind!r}; expected one of {FLOW_KINDS}"
            )
        if self.A < 0:
            raise ValueError("advection amplitude A must be >= 0")
        if self.kind == "alternating-shear":
            if self.seed is None:
                raise ValueError("alternating-shear requires an explicit seed")
            if self.tau_sw <= 0:
                raise ValueError("alternation half-period tau_sw must be positive")
        if self.kind == "shear" and self.m < 1:
            raise ValueError("shear wavenumber m must be a positive integer")


class FlowSampler:
    """Samples t -> d unit-normalized velocity components on a fixed grid."""

    def __init__(self, spec: FlowSpec, grid: TorusGrid):
        self.spec = spec
        self.grid = grid
        self.stationary = spec.kind != "alternating-shear"
        self._static = None
        self._cached_interval = None
        self._cached_fields = None
        if self.stationary:
            self._static = self._build_static()

    # -- time structure ------------------------------------------------

    def interval_index(self, t: float) -> int:
        if self.stationary:
            return 0
        return int(math.floor((t + 1e-12) / self.spec.tau_sw))

    def next_switch(self, t: float) -> float:
        """Next time the field changes; inf for stationary kinds."""
        if self.stationary:
            return math.inf
        return (self.interval_index(t) + 1) * self.spec.tau_sw

    # -- field construction ---------------------------------------------

    def fields(self, t: float) -> tuple:
        """Unit-normalized velocity components at time t (d arrays)."""
        if self.stationary:
            return self._static
        idx = self.interval_index(t)
        if idx != self._cached_interval:
            self._cached_fields = self._build_alternating(idx)
            self._cached_interval = idx
        return self._cached_fields

    def _zero_components(self):
        return tuple(np.zeros(self.grid.shape) for _ in range(self.grid.d))

    def _build_static(self) -> tuple:
        spec, grid = self.spec, self.grid
        if spec.kind == "zero":
            return self._zero_components()
        if spec.kind == "shear":
            mesh = grid.meshgrid()
            profile = np.sin(spec.m * mesh[1])
            comps = [profile] + [np.zeros(grid.shape) for _ in range(grid.d - 1)]
            return _normalized(tuple(comps))
        if spec.kind == "relaxed-linear":
            ratios = [1.0, GOLDEN, GOLDEN**2][: grid.d]
            comps = tuple(np.full(grid.shape, r) for r in ratios)
            return _normalized(comps)
        if spec.kind == "from-file":
            if len(spec.files) != grid.d:
                raise ValueError(
                    f"from-file flow needs {grid.d} component files, "
                    f"got {len(spec.files)}"
                )
            comps = tuple(read_snapshot(p, grid).values for p in spec.files)
            maxu = max(float(np.max(np.abs(c))) for c in comps)
            if maxu == 0.0:
                raise ValueError("from-file flow is identically zero")
            div = divergence_check(comps, grid)
            if div > DIV_TOL * maxu:
                raise ValueError(
                    f"from-file flow is not divergence-free: max |div u| = {div:.3e} "
                    f"exceeds {DIV_TOL:.0e} * max|u|"
                )
            return _normalized(comps)
        raise ValueError(f"unknown flow kind {spec.kind!r}")

    def _build_alternating(self, idx: int) -> tuple:
        """Axis-cycling shear with a per-interval phase from the seeded stream."""
        grid, spec = self.grid, self.spec
        phase = np.random.default_rng([spec.seed, idx]).uniform(0.0, 2.0 * math.pi)
        mesh = grid.meshgrid()
        axis = idx % grid.d  # which component is active
        # the active component shears along the "next" coordinate
        coord = mesh[(axis + 1) % grid.d]
        profile = np.sin(spec.m * coord + phase)
        comps = [np.zeros(grid.shape) for _ in range(grid.d)]
        comps[axis] = profile
        return _normalized(tuple(comps))


def _normalized(comps: tuple) -> tuple:
    mag_sq = np.zeros(comps[0].shape)
    for c in comps:
        mag_sq += c * c
    maxu = math.sqrt(float(mag_sq.max()))
    return tuple(c / maxu for c in comps)


def make_flow(spec: FlowSpec, grid: TorusGrid) -> FlowSampler:
    """Build the velocity sampler; from-file inputs are validated here."""
    return FlowSampler(spec, grid)


def divergence_check(u, grid: TorusGrid) -> float:
    """Max pointwise |div u| by spectral differentiation."""
    grad = Multiplier.gradient(grid)
    div = np.zeros(grid.shape)
    for j in range(grid.d):
        comp = u[j] if isinstance(u[j], np.ndarray) else u[j].values
        parts = apply_multiplier(forward_transform(ScalarField(grid, comp)), grad)
        div += inverse_transform(parts[j]).values
    return float(np.max(np.abs(div)))
