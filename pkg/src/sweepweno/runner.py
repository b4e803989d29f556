"""Run a benchmark problem end to end and write its field, summary and sweep log."""

from __future__ import annotations

import csv
import json
import logging
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field as dc_field
from pathlib import Path

import numpy as np

from .grid import Field
from .problems import (ProblemSpec, build_field, convergence_order, error_norms,
                       make_problem, source_function)
from .state import PressureFunctional
from .sweep import DEFAULT_MAX_FULL_SWEEPS, SweepStats
from .timestep import RunConfig, SolverError, StageRecord, march

logger = logging.getLogger(__name__)

FIELD_FILE = "field.csv"
SUMMARY_FILE = "summary.json"
SWEEP_LOG_FILE = "sweep_log.csv"
CONVERGENCE_FILE = "convergence.csv"


@dataclass
class RunSummary:
    problem: str
    resolution: list
    cfl: float
    final_time: float
    time_reached: float
    steps: int
    wall_time: float
    limiter: bool
    eps: float
    min_rho: float
    min_p: float
    pressure_sweeps_max: int
    pressure_sweeps_average: float
    pressure_sweeps_total: int
    density_sweeps_total: int
    stages_with_sweeps: int
    positive_branch_adjustments: int
    negative_branch_adjustments: int
    cell_volume: float
    initial_totals: list
    final_totals: list
    drift: list
    drift_relative: list
    status: str = "ok"
    error: str | None = None
    error_kind: str | None = None


@dataclass
class RunResult:
    summary: RunSummary
    field: Field
    functional: PressureFunctional
    spec: ProblemSpec
    records: list = dc_field(default_factory=list)

    @property
    def ok(self):
        return self.summary.status == "ok"


def _drift(initial, final):
    drift = [float(b - a) for a, b in zip(initial, final)]
    rel = [float(d / abs(a)) if a != 0 else None for d, a in zip(drift, initial)]
    return drift, rel


def error_kind(exc: BaseException) -> str:
    """Classify a solver failure: ``infeasible``, ``nontermination`` or ``positivity``."""
    from .sweep import InfeasibleError, NonTerminationError
    seen = exc
    while seen is not None:
        if isinstance(seen, InfeasibleError):
            return "infeasible"
        if isinstance(seen, NonTerminationError):
            return "nontermination"
        seen = seen.__cause__
    return "positivity"


def run_problem(spec: ProblemSpec, *, limiter: bool = True, eps: float | None = None,
                max_sweeps: int = DEFAULT_MAX_FULL_SWEEPS, cfl: float | None = None,
                final_time: float | None = None, alpha_per_stage: bool = False,
                log_every: int = 0) -> RunResult:
    """Integrate ``spec`` and collect a :class:`RunSummary`.

    Solver failures do not raise; they are reported through
    ``summary.status`` / ``summary.error`` with the state at the failure.
    """
    f = spec.functional(eps)
    field = build_field(spec)
    config = RunConfig(cfl=spec.cfl if cfl is None else cfl,
                       final_time=spec.final_time if final_time is None else final_time,
                       limiter=limiter, max_full_sweeps=max_sweeps,
                       alpha_per_stage=alpha_per_stage)
    stats = SweepStats()
    records: list[StageRecord] = []

    def on_record(rec):
        records.append(rec)
        if log_every and rec.stage == 3 and rec.step % log_every == 0:
            logger.info("%s step %d t=%.6g dt=%.3g min rho=%.3e min p=%.3e",
                        spec.name, rec.step, rec.time + rec.dt, rec.dt, rec.min_rho, rec.min_p)

    w0 = field.fluid_states()
    initial = field.totals()
    min_rho = float(np.min(w0[0]))
    with np.errstate(all="ignore"):
        min_p = float(np.min((f.gamma - 1.0) * f.internal_energy(w0)))

    status, message, kind = "ok", None, None
    t_reached, steps = 0.0, 0
    start = time.perf_counter()
    try:
        t_reached, steps = march(field, f, config, source_function(spec, f, field.fluid),
                                 stats, on_record)
    except SolverError as exc:
        status, message, kind = "failed", str(exc), error_kind(exc)
        t_reached = exc.time if exc.time is not None else float("nan")
        steps = exc.step if exc.step is not None else len(records) // 3
        logger.info("%s failed: %s", spec.name, exc)
    wall = time.perf_counter() - start

    if records:
        min_rho = min(min_rho, min(r.min_rho for r in records))
        min_p = min(min_p, min(r.min_p for r in records))
    final = field.totals()
    drift, rel = _drift(initial, final)
    summary = RunSummary(
        problem=spec.name, resolution=list(spec.resolution), cfl=config.cfl,
        final_time=config.final_time, time_reached=float(t_reached), steps=int(steps),
        wall_time=wall, limiter=limiter, eps=f.eps, min_rho=min_rho, min_p=min_p,
        pressure_sweeps_max=stats.pressure_sweeps_max_per_stage,
        pressure_sweeps_average=stats.pressure_sweeps_average,
        pressure_sweeps_total=stats.pressure_sweeps_total,
        density_sweeps_total=stats.density_sweeps_total,
        stages_with_sweeps=stats.stages_with_sweeps,
        positive_branch_adjustments=stats.positive_branch_adjustments,
        negative_branch_adjustments=stats.negative_branch_adjustments,
        cell_volume=field.cell_volume(),
        initial_totals=[float(v) for v in initial], final_totals=[float(v) for v in final],
        drift=drift, drift_relative=rel, status=status, error=message, error_kind=kind)
    return RunResult(summary, field, f, spec, records)


# ----------------------------------------------------------------------------
# output files

def field_columns(ndim: int, reactive: bool) -> list[str]:
    cols = ["x", "y"][:ndim] + ["rho"] + ["u", "v"][:ndim] + ["p", "E"]
    cols += ["m", "n"][:ndim]
    if reactive:
        cols += ["Y", "rhoY"]
    return cols


def field_table(field: Field, f: PressureFunctional) -> tuple[list[str], np.ndarray]:
    """One row per fluid node in C order: coordinates, primitives, E and the momenta.

    The conserved columns (rho, m[, n], E[, rhoY]) are written as stored,
    so totals recomputed from the table match the solver's own.
    """
    d = field.ndim
    w = field.fluid_states()
    coords = field.coordinates()
    if d == 1:
        xs = [coords[0]]
    else:
        xs = [c[field.fluid] for c in coords]
    # failed runs may hold rho <= 0, so no domain checks here
    with np.errstate(all="ignore"):
        vel = [w[1 + a] / w[0] for a in range(d)]
        p = (f.gamma - 1.0) * f.internal_energy(w)
        Y = w[d + 2] / w[0] if f.reactive else None
    cols = list(xs) + [w[0]] + vel + [p, w[d + 1]]
    cols += [w[1 + a] for a in range(d)]
    if f.reactive:
        cols += [Y, w[d + 2]]
    return field_columns(d, f.reactive), np.column_stack(cols)


def totals_from_table(header, rows, cell_volume, ndim, reactive):
    """Recompute conserved totals from a field table (same summation order)."""
    idx = {name: k for k, name in enumerate(header)}
    names = ["rho"] + ["m", "n"][:ndim] + ["E"] + (["rhoY"] if reactive else [])
    w = np.stack([rows[:, idx[c]] for c in names])
    return w.sum(axis=1) * cell_volume


def write_field(path, field: Field, f: PressureFunctional):
    header, rows = field_table(field, f)
    np.savetxt(path, rows, delimiter=",", header=",".join(header), comments="", fmt="%.17g")


def read_field(path):
    """Return ``(header, rows)`` of a field table."""
    with open(path) as fh:
        header = fh.readline().strip().split(",")
    rows = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    return header, rows


def write_sweep_log(path, records, ndim):
    axes = ["x", "y"][:ndim]
    header = (["step", "stage", "time", "dt", "density_swept", "pressure_sweeps",
               "min_rho", "min_p"] + [f"alpha_step_{a}" for a in axes]
              + [f"alpha_stage_{a}" for a in axes])
    with open(path, "w", newline="") as fh:
        out = csv.writer(fh)
        out.writerow(header)
        for r in records:
            out.writerow([r.step, r.stage, repr(r.time), repr(r.dt), r.density_swept,
                          r.pressure_sweeps, repr(r.min_rho), repr(r.min_p)]
                         + [repr(float(a)) for a in r.alpha_step]
                         + [repr(float(a)) for a in r.alpha_stage])


def _json_safe(obj):
    if isinstance(obj, float) and not math.isfinite(obj):
        return str(obj)
    if isinstance(obj, list):
        return [_json_safe(v) for v in obj]
    if isinstance(obj, dict):
        return {k: _json_safe(v) for k, v in obj.items()}
    return obj


def write_summary(path, summary: RunSummary):
    with open(path, "w") as fh:
        json.dump(_json_safe(asdict(summary)), fh, indent=2)
        fh.write("\n")


def write_outputs(result: RunResult, out_dir) -> Path:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    write_field(out / FIELD_FILE, result.field, result.functional)
    write_summary(out / SUMMARY_FILE, result.summary)
    write_sweep_log(out / SWEEP_LOG_FILE, result.records, result.field.ndim)
    return out


# ----------------------------------------------------------------------------
# convergence

@dataclass
class ConvergenceRow:
    resolution: int
    l1: float
    l1_order: float | None
    linf: float
    linf_order: float | None


def density_error(result: RunResult):
    """``(L1, Linf)`` density error of a finished run against its exact solution."""
    spec = result.spec
    if spec.exact is None:
        raise ValueError(f"problem {spec.name!r} has no exact solution")
    exact = spec.exact(spec, spec.coordinates(), result.summary.time_reached)
    return error_norms(result.field.interior[0], exact[0])


def _vortex_error(args):
    name, n, final_time, limiter = args
    spec = make_problem(name).with_resolution(n, n)
    result = run_problem(spec, final_time=final_time, limiter=limiter)
    if not result.ok:
        raise RuntimeError(f"{name} at {n}: {result.summary.error}")
    return density_error(result)


def convergence_study(name: str, resolutions, *, final_time: float | None = None,
                      limiter: bool = True, workers: int = 1) -> list[ConvergenceRow]:
    """Density errors and observed orders for a problem with an exact solution."""
    spec = make_problem(name)
    if spec.exact is None:
        raise ValueError(f"problem {name!r} has no exact solution; convergence needs one")
    resolutions = [int(n) for n in resolutions]
    if not resolutions:
        raise ValueError("no resolutions given")
    if any(b <= a for a, b in zip(resolutions, resolutions[1:])):
        raise ValueError("resolutions must strictly increase")
    jobs = [(name, n, final_time, limiter) for n in resolutions]
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=min(workers, len(jobs))) as pool:
            errors = list(pool.map(_vortex_error, jobs))
    else:
        errors = [_vortex_error(j) for j in jobs]
    l1 = [e[0] for e in errors]
    linf = [e[1] for e in errors]
    o1 = [None] + convergence_order(l1, resolutions)
    oinf = [None] + convergence_order(linf, resolutions)
    return [ConvergenceRow(n, a, b, c, d) for n, a, b, c, d in zip(resolutions, l1, o1, linf, oinf)]


def write_convergence(path, rows):
    with open(path, "w", newline="") as fh:
        out = csv.writer(fh)
        out.writerow(["resolution", "l1_error", "l1_order", "linf_error", "linf_order"])
        for r in rows:
            out.writerow([r.resolution, repr(r.l1), "" if r.l1_order is None else repr(r.l1_order),
                          repr(r.linf), "" if r.linf_order is None else repr(r.linf_order)])
