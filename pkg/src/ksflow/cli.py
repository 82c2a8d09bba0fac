"""Command-line surface.

Verbs: run, sweep, diag (rage | semigroup | certificate), inspect.
Exit codes: 0 success, 1 validation error, 2 runtime error, 3 I/O error.
"""

from __future__ import annotations

import argparse
import math
import sys

from ksflow.config import ConfigError, build_initial_field, load_config
from ksflow.snapshots import SnapshotFormatError, describe_snapshot


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ksflow",
        description="Pseudospectral aggregation-advection simulator on the torus",
    )
    sub = parser.add_subparsers(dest="verb", required=True)

    p_run = sub.add_parser("run", help="run one configured experiment")
    p_run.add_argument("--config", required=True)

    p_sweep = sub.add_parser("sweep", help="run an amplitude sweep")
    p_sweep.add_argument("--config", required=True)
    p_sweep.add_argument("--param", required=True, choices=["A"])
    p_sweep.add_argument("--values", required=True,
                         help="comma-separated amplitudes")

    p_diag = sub.add_parser("diag", help="mixing and certificate diagnostics")
    p_diag.add_argument("what", choices=["rage", "semigroup", "certificate"])
    p_diag.add_argument("--config", required=True)
    p_diag.add_argument("--N", type=int, default=2,
                        help="projection radius (semigroup: checks 1..N)")
    p_diag.add_argument("--T", type=float, default=None,
                        help="averaging horizon for rage")
    p_diag.add_argument("--t-grid", dest="t_grid", default=None,
                        help="comma-separated times for the semigroup check")

    p_inspect = sub.add_parser("inspect", help="describe a KSF1 snapshot")
    p_inspect.add_argument("path")
    return parser


def _cmd_run(args) -> int:
    from ksflow.experiment import run_experiment

    cfg = load_config(args.config)
    report, records = run_experiment(cfg)
    print(f"classification={report.classification}")
    print(f"t_final={report.t_final:.6g}")
    print(f"peak_linf={report.peak_linf:.6g}")
    print(f"steps={report.steps}")
    print(f"records={len(records)}")
    print(f"artifacts={cfg.output_dir}")
    return 0


def _cmd_sweep(args) -> int:
    from ksflow.experiment import sweep_A

    cfg = load_config(args.config)
    try:
        values = [float(v) for v in args.values.split(",") if v.strip()]
    except ValueError as exc:
        raise ConfigError(f"--values: {exc}") from exc
    rows = sweep_A(cfg, values)
    print("A classification peak_linf mean_phi flagged")
    for r in rows:
        print(
            f"{r.A:g} {r.classification} {r.peak_linf:.6g} "
            f"{r.mean_phi:.6g} {r.flagged_time_fraction:.6g}"
        )
    return 0


def _diag_field(cfg):
    rho0 = build_initial_field(cfg, cfg.grid())
    return rho0


def _cmd_diag(args) -> int:
    from ksflow.attraction import KernelSpec
    from ksflow.diagnostics import (
        certificate,
        rage_average,
        semigroup_bound_check,
    )
    from ksflow.spectral import ScalarField, forward_transform, low_mode_energy, sobolev_norm

    cfg = load_config(args.config)
    grid = cfg.grid()
    field = _diag_field(cfg)

    if args.what == "certificate":
        cert = certificate(field, KernelSpec(cfg.dim, cfg.beta), grid)
        print(f"C0={cert.C0:.6g}")
        print(f"C_inf={cert.C_inf:.6g}")
        print(f"B_0={cert.B_0:.6g}")
        print(f"tau0={cert.tau0:.6g}")
        print(f"tau1={cert.tau1:.6g}")
        print(f"theta={cert.theta:.6g}")
        return 0

    if args.what == "rage":
        T = args.T if args.T is not None else 10.0
        vals = field.values - field.values.mean()
        norm = sobolev_norm(ScalarField(grid, vals), 0.0)
        phi0 = ScalarField(grid, vals / norm)
        avg = rage_average(cfg.flow, cfg.A, phi0, args.N, T)
        initial = low_mode_energy(forward_transform(phi0), args.N)
        print(f"N={args.N} T={T:.6g}")
        print(f"initial_projection_energy={initial:.6g}")
        print(f"time_average={avg:.6g}")
        print(f"ratio={avg / initial if initial > 0 else math.nan:.6g}")
        return 0

    # semigroup
    if args.t_grid:
        times = [float(v) for v in args.t_grid.split(",") if v.strip()]
        t_max = max(times)
    else:
        t_max = args.T if args.T is not None else 0.5
    vals = field.values - field.values.mean()
    f = ScalarField(grid, vals)
    report = semigroup_bound_check(
        cfg.flow, cfg.A, f, list(range(1, args.N + 1)), t_max
    )
    print(f"t_max={t_max:.6g}")
    for N, ratio in sorted(report.per_N.items()):
        print(f"ratio_N{N}={ratio:.6g}")
    print(f"max_ratio={report.max_ratio:.6g}")
    return 0


def _cmd_inspect(args) -> int:
    info = describe_snapshot(args.path)
    for key, value in info.items():
        if isinstance(value, float):
            print(f"{key}={value:.17g}")
        else:
            print(f"{key}={value}")
    return 0


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        if args.verb == "run":
            return _cmd_run(args)
        if args.verb == "sweep":
            return _cmd_sweep(args)
        if args.verb == "diag":
            return _cmd_diag(args)
        if args.verb == "inspect":
            return _cmd_inspect(args)
        raise RuntimeError(f"unknown verb {args.verb}")
    except ConfigError as exc:
        print(f"configuration error:\n{exc}", file=sys.stderr)
        return 1
    except (SnapshotFormatError, OSError) as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return 3
    except Exception as exc:  # noqa: BLE001 - single CLI boundary
        print(f"runtime error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
