"""Experiment orchestration: single runs with persistence, and A-sweeps.

Artifacts per run: series.csv (fixed column schema below), outcome.txt
(plain key=value), and optional KSF1 snapshots of the initial and final
density. Identical configs produce byte-identical CSVs on one platform:
every float is formatted with repr-faithful %.17g and all randomness is
seeded through the config.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace

from ksflow.config import SimConfig
from ksflow.diagnostics import phi_threshold_exponent, phi_time_stats
from ksflow.dynamics import OutcomeReport, run
from ksflow.snapshots import write_snapshot

CSV_HEADER = (
    "t,mean,l1,l2,linf,min,l2_meanfree,neg_sobolev,phi,"
    "low_mode_fraction,tail_fraction,grad_sup"
)

SWEEP_HEADER = "A,classification,peak_linf,mean_phi,flagged_time_fraction"


def _fmt(x) -> str:
    if x is None or (isinstance(x, float) and math.isnan(x)):
        return "nan"
    return format(float(x), ".17g")


def record_row(r) -> str:
    return ",".join(
        _fmt(v)
        for v in (
            r.t, r.mean, r.l1, r.l2, r.linf, r.min_value, r.l2_meanfree,
            r.neg_sobolev, r.phi, r.low_mode_fraction, r.tail_fraction,
            r.grad_sup,
        )
    )


def write_series(records, path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(CSV_HEADER + "\n")
        for r in records:
            fh.write(record_row(r) + "\n")


def write_outcome(report: OutcomeReport, path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(f"classification={report.classification}\n")
        fh.write(f"t_final={_fmt(report.t_final)}\n")
        fh.write(f"peak_linf={_fmt(report.peak_linf)}\n")
        fh.write(f"tail_fraction_at_stop={_fmt(report.tail_fraction_at_stop)}\n")
        fh.write(f"tail_abs_at_stop={_fmt(report.tail_abs_at_stop)}\n")
        fh.write(f"steps={report.steps}\n")
        fh.write(f"min_value={_fmt(report.min_value)}\n")
        fh.write(f"detail={report.detail}\n")


def run_experiment(cfg: SimConfig):
    """Run one configured experiment and persist its artifacts.

    Returns (report, records). Requires cfg.output_dir.
    """
    if not cfg.output_dir:
        raise ValueError("run_experiment requires output.dir")
    os.makedirs(cfg.output_dir, exist_ok=True)

    writers = {}
    if cfg.output_snapshots:
        from ksflow.config import build_initial_field

        rho0 = build_initial_field(cfg, cfg.grid())
        write_snapshot(rho0, os.path.join(cfg.output_dir, "initial.ksf"))
        writers["on_final"] = lambda f: write_snapshot(
            f, os.path.join(cfg.output_dir, "final.ksf")
        )

    report, records = run(cfg, **writers)
    write_series(records, os.path.join(cfg.output_dir, "series.csv"))
    write_outcome(report, os.path.join(cfg.output_dir, "outcome.txt"))
    return report, records


@dataclass
class SweepRow:
    A: float
    classification: str
    peak_linf: float
    mean_phi: float
    flagged_time_fraction: float
    error: str = ""


def _amplitude_dir(base: str, A: float) -> str:
    return os.path.join(base, f"A_{_fmt(A)}")


def _sweep_child(args) -> SweepRow:
    cfg, A = args
    child = replace(
        cfg,
        A=A,
        flow=replace(cfg.flow, A=A),
        output_dir=_amplitude_dir(cfg.output_dir, A),
    )
    try:
        report, records = run_experiment(child)
        threshold = phi_threshold_exponent(
            child.low_mode_N, child.beta - child.dim
        )
        mean_phi, flagged = phi_time_stats(records, threshold)
        return SweepRow(
            A=A,
            classification=report.classification,
            peak_linf=report.peak_linf,
            mean_phi=mean_phi,
            flagged_time_fraction=flagged,
        )
    except Exception as exc:  # recorded per-row, the sweep continues
        return SweepRow(
            A=A,
            classification="error",
            peak_linf=math.nan,
            mean_phi=math.nan,
            flagged_time_fraction=math.nan,
            error=f"{type(exc).__name__}: {exc}",
        )


def sweep_A(cfg: SimConfig, values, max_workers: int | None = None):
    """Run the config once per advection amplitude; children run concurrently.

    Emits sweep.csv with rows sorted by A regardless of completion order.
    """
    values = [float(v) for v in values]
    if len(values) < 2:
        raise ValueError("sweep needs at least two amplitude values")
    if len(set(values)) != len(values):
        raise ValueError("sweep amplitude values must be distinct")
    if not cfg.output_dir:
        raise ValueError("sweep_A requires output.dir")
    os.makedirs(cfg.output_dir, exist_ok=True)

    if max_workers is None:
        max_workers = min(len(values), os.cpu_count() or 1)
    # schedule the most expensive (largest A, smallest dt) children first
    order = sorted(values, reverse=True)
    if max_workers == 1:
        rows = [_sweep_child((cfg, A)) for A in order]
    else:
        with ProcessPoolExecutor(max_workers=max_workers) as pool:
            rows = list(pool.map(_sweep_child, ((cfg, A) for A in order)))

    rows.sort(key=lambda r: r.A)
    path = os.path.join(cfg.output_dir, "sweep.csv")
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(SWEEP_HEADER + "\n")
        for r in rows:
            fh.write(
                ",".join(
                    (
                        _fmt(r.A),
                        r.classification,
                        _fmt(r.peak_linf),
                        _fmt(r.mean_phi),
                        _fmt(r.flagged_time_fraction),
                    )
                )
                + "\n"
            )
    return rows
