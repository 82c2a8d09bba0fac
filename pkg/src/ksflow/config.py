"""Experiment configuration: flat key=value documents, validation, initial data.

The config format is a plain-text document with one key per line, `#`
comments, and a single nesting level spelled with dotted keys
(flow.kind, ic.seed, output.dir, ...). Unknown keys are errors, never
silently ignored, and every violated constraint is reported with the key
it belongs to. Seeds are mandatory wherever randomness enters.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ksflow.flows import FLOW_KINDS, FlowSpec
from ksflow.snapshots import read_snapshot
from ksflow.spectral import ScalarField, TorusGrid, project_low_modes

IC_KINDS = ("gaussian-bump", "random-band", "file")


class ConfigError(Exception):
    """Raised with one message line per violated constraint."""

    def __init__(self, errors):
        if isinstance(errors, str):
            errors = [errors]
        self.errors = list(errors)
        super().__init__("\n".join(self.errors))


@dataclass
class SimConfig:
    """Full experiment description."""

    dim: int
    n: int
    alpha: float
    beta: float
    A: float
    T: float
    flow: FlowSpec
    ic_kind: str
    ic_params: dict = field(default_factory=dict)
    dt_max: float = math.inf
    c_cfl: float = 0.4
    disable_nonlinear: bool = False
    disable_dissipation: bool = False
    output_dir: str | None = None
    output_every: int = 10
    output_every_t: float | None = None
    output_snapshots: bool = False
    low_mode_N: int = 2

    def grid(self) -> TorusGrid:
        return TorusGrid(self.dim, self.n)


def _parse_lines(text: str) -> dict:
    pairs = {}
    errors = []
    for ln, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            errors.append(f"line {ln}: expected key=value, got {raw.strip()!r}")
            continue
        key, value = (part.strip() for part in line.split("=", 1))
        if key in pairs:
            errors.append(f"line {ln}: duplicate key {key!r}")
            continue
        pairs[key] = value
    if errors:
        raise ConfigError(errors)
    return pairs


def _coerce(kind, key, value, errors):
    try:
        if kind is bool:
            if value in ("true", "false"):
                return value == "true"
            raise ValueError
        return kind(value)
    except ValueError:
        errors.append(f"{key}: cannot parse {value!r} as {kind.__name__}")
        return None


_KNOWN_KEYS = {
    "dim": int,
    "n": int,
    "alpha": float,
    "beta": float,
    "A": float,
    "T": float,
    "dt_max": float,
    "c_cfl": float,
    "disable_nonlinear": bool,
    "disable_dissipation": bool,
    "flow.kind": str,
    "flow.m": int,
    "flow.tau_sw": float,
    "flow.seed": int,
    "flow.files": str,
    "ic.kind": str,
    "ic.amplitude": float,
    "ic.width": float,
    "ic.center": str,
    "ic.seed": int,
    "ic.k_max": int,
    "ic.offset": float,
    "ic.path": str,
    "output.dir": str,
    "output.every": int,
    "output.every_t": float,
    "output.snapshots": bool,
    "diag.low_mode_N": int,
}

_REQUIRED = ("dim", "n", "alpha", "beta", "A", "T", "flow.kind", "ic.kind")


def parse_config(text: str) -> SimConfig:
    """Parse and validate a config document; every violation is one error line."""
    pairs = _parse_lines(text)
    errors = []
    for key in pairs:
        if key not in _KNOWN_KEYS:
            errors.append(f"{key}: unknown key")
    for key in _REQUIRED:
        if key not in pairs:
            errors.append(f"{key}: required key is missing")
    if errors:
        raise ConfigError(errors)

    vals = {}
    for key, raw in pairs.items():
        vals[key] = _coerce(_KNOWN_KEYS[key], key, raw, errors)
    if errors:
        raise ConfigError(errors)

    dim, n = vals["dim"], vals["n"]
    alpha, beta = vals["alpha"], vals["beta"]
    A, T = vals["A"], vals["T"]

    if dim not in (2, 3):
        errors.append(f"dim: must be 2 or 3, got {dim}")
    if n < 8 or n % 2 != 0:
        errors.append(f"n: must be even and >= 8, got {n}")
    if not 0.0 <= alpha <= 2.0:
        errors.append(f"alpha: must lie in [0, 2], got {alpha}")
    if dim in (2, 3) and not 2.0 <= beta < dim:
        errors.append(
            f"beta: weak-singularity regime violated, need 2 <= beta < dim, "
            f"got beta={beta} with dim={dim}"
        )
    if A < 0:
        errors.append(f"A: must be >= 0, got {A}")
    if T <= 0:
        errors.append(f"T: must be > 0, got {T}")

    dt_max = vals.get("dt_max", math.inf)
    if dt_max is not None and dt_max <= 0:
        errors.append(f"dt_max: must be > 0, got {dt_max}")
    c_cfl = vals.get("c_cfl", 0.4)
    if c_cfl <= 0:
        errors.append(f"c_cfl: must be > 0, got {c_cfl}")

    disable_nonlinear = vals.get("disable_nonlinear", False)
    disable_dissipation = vals.get("disable_dissipation", False)

    # -- flow ------------------------------------------------------------
    flow_kind = vals["flow.kind"]
    flow = None
    if flow_kind not in FLOW_KINDS:
        errors.append(f"flow.kind: unknown kind {flow_kind!r}, expected {FLOW_KINDS}")
    else:
        files = tuple(
            p.strip() for p in vals.get("flow.files", "").split(",") if p.strip()
        )
        if flow_kind == "from-file" and not files:
            errors.append("flow.files: required for flow.kind=from-file")
        if flow_kind == "alternating-shear" and "flow.seed" not in vals:
            errors.append(
                "flow.seed: required, phase sequences have no default seed"
            )
        try:
            flow = FlowSpec(
                kind=flow_kind,
                A=max(A, 0.0),
                m=vals.get("flow.m", 1),
                tau_sw=vals.get("flow.tau_sw", 1.0),
                seed=vals.get("flow.seed"),
                files=files,
            )
        except ValueError as exc:
            errors.append(f"flow: {exc}")

    # -- initial condition -------------------------------------------------
    ic_kind = vals["ic.kind"]
    ic_params = {}
    if ic_kind not in IC_KINDS:
        errors.append(f"ic.kind: unknown kind {ic_kind!r}, expected {IC_KINDS}")
    elif ic_kind == "gaussian-bump":
        ic_params["amplitude"] = vals.get("ic.amplitude", 1.0)
        ic_params["width"] = vals.get("ic.width", 0.5)
        if ic_params["width"] <= 0:
            errors.append(f"ic.width: must be > 0, got {ic_params['width']}")
        if ic_params["amplitude"] < 0 and not disable_nonlinear:
            errors.append(
                "ic.amplitude: initial data must be nonnegative while the "
                "nonlinear term is enabled"
            )
        center = vals.get("ic.center")
        if center is not None:
            try:
                coords = tuple(float(c) for c in center.split(","))
            except ValueError:
                coords = None
            if coords is None or (dim in (2, 3) and len(coords) != dim):
                errors.append(f"ic.center: expected {dim} comma-separated reals")
            else:
                ic_params["center"] = coords
    elif ic_kind == "random-band":
        if "ic.seed" not in vals:
            errors.append("ic.seed: required, random fields have no default seed")
        ic_params["seed"] = vals.get("ic.seed")
        ic_params["k_max"] = vals.get("ic.k_max", 2)
        ic_params["amplitude"] = vals.get("ic.amplitude", 1.0)
        ic_params["offset"] = vals.get("ic.offset", 0.0)
        if ic_params["k_max"] < 1:
            errors.append(f"ic.k_max: must be >= 1, got {ic_params['k_max']}")
    elif ic_kind == "file":
        if "ic.path" not in vals:
            errors.append("ic.path: required for ic.kind=file")
        ic_params["path"] = vals.get("ic.path")

    output_every = vals.get("output.every", 10)
    if output_every < 1:
        errors.append(f"output.every: must be >= 1, got {output_every}")
    output_every_t = vals.get("output.every_t")
    if output_every_t is not None and output_every_t <= 0:
        errors.append(f"output.every_t: must be > 0, got {output_every_t}")
    if "output.every" in vals and "output.every_t" in vals:
        errors.append("output.every: give either output.every or output.every_t, not both")
    low_mode_N = vals.get("diag.low_mode_N", 2)
    if low_mode_N < 1:
        errors.append(f"diag.low_mode_N: must be >= 1, got {low_mode_N}")

    if errors:
        raise ConfigError(errors)

    return SimConfig(
        dim=dim,
        n=n,
        alpha=alpha,
        beta=beta,
        A=A,
        T=T,
        flow=flow,
        ic_kind=ic_kind,
        ic_params=ic_params,
        dt_max=dt_max,
        c_cfl=c_cfl,
        disable_nonlinear=disable_nonlinear,
        disable_dissipation=disable_dissipation,
        output_dir=vals.get("output.dir"),
        output_every=output_every,
        output_every_t=output_every_t,
        output_snapshots=vals.get("output.snapshots", False),
        low_mode_N=low_mode_N,
    )


def load_config(path) -> SimConfig:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_config(fh.read())


def _wrapped_gaussian_1d(delta: np.ndarray, width: float) -> np.ndarray:
    """Periodic Gaussian profile, image sum truncated at machine precision."""
    out = np.zeros_like(delta)
    for j in range(-2, 3):
        out += np.exp(-((delta + 2 * math.pi * j) ** 2) / (2 * width**2))
    return out


def build_initial_field(cfg: SimConfig, grid: TorusGrid) -> ScalarField:
    """Construct rho0 on the grid; deterministic for fixed config."""
    if cfg.ic_kind == "gaussian-bump":
        width = cfg.ic_params.get("width", 0.5)
        amplitude = cfg.ic_params.get("amplitude", 1.0)
        center = cfg.ic_params.get("center", (math.pi,) * grid.d)
        mesh = grid.meshgrid()
        bump = np.ones(grid.shape)
        for x, c in zip(mesh, center):
            bump *= _wrapped_gaussian_1d(x - c, width)
        peak = float(bump.max())
        return ScalarField(grid, amplitude * bump / peak)
    if cfg.ic_kind == "random-band":
        rng = np.random.default_rng(cfg.ic_params["seed"])
        white = ScalarField(grid, rng.standard_normal(grid.shape))
        band = project_low_modes(white, cfg.ic_params.get("k_max", 2))
        vals = band.values - band.values.mean()
        peak = float(np.max(np.abs(vals)))
        if peak == 0.0:
            raise ConfigError("ic: random band field degenerated to a constant")
        vals = cfg.ic_params.get("offset", 0.0) + cfg.ic_params.get(
            "amplitude", 1.0
        ) * vals / peak
        return ScalarField(grid, vals)
    if cfg.ic_kind == "file":
        return read_snapshot(cfg.ic_params["path"], grid)
    raise ConfigError(f"ic.kind: unknown kind {cfg.ic_kind!r}")


def validate_initial_field(cfg: SimConfig, rho0: ScalarField) -> None:
    """Pointwise nonnegativity check, required while the nonlinearity is on."""
    if cfg.disable_nonlinear:
        return
    scale = max(1.0, float(np.max(np.abs(rho0.values))))
    low = float(rho0.values.min())
    if low < -1e-12 * scale:
        raise ConfigError(
            f"ic: initial data must be nonnegative while the nonlinear term is "
            f"enabled; min value {low:.3e}"
        )
