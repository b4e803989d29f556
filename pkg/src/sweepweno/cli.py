"""Command-line entry point: ``sweepweno run <problem>`` and ``sweepweno convergence vortex``."""

from __future__ import annotations

import argparse
import logging
import os
import sys
from pathlib import Path

from .problems import PROBLEM_NAMES, make_problem
from .runner import (CONVERGENCE_FILE, convergence_study, run_problem, write_convergence,
                     write_outputs)
from .sweep import DEFAULT_MAX_FULL_SWEEPS

THREADS_ENV = "SWEEPWENO_THREADS"

EXIT_OK = 0
EXIT_SOLVER = 1
EXIT_USAGE = 2
EXIT_INFEASIBLE = 3
EXIT_NONTERMINATION = 4
EXIT_POSITIVITY = 5

_EXIT_BY_KIND = {"infeasible": EXIT_INFEASIBLE, "nontermination": EXIT_NONTERMINATION,
                 "positivity": EXIT_POSITIVITY}


def _positive_float(text):
    value = float(text)
    if not value > 0:
        raise argparse.ArgumentTypeError(f"expected a positive number, got {text}")
    return value


def _resolution(text):
    value = int(text)
    if value < 5:
        raise argparse.ArgumentTypeError("resolution must be at least 5 (WENO5 stencil)")
    return value


def _resolution_list(text):
    try:
        return [_resolution(t) for t in text.split(",") if t.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"bad resolution list {text!r}: {exc}") from None


def _threads():
    raw = os.environ.get(THREADS_ENV, "1")
    try:
        return max(1, int(raw))
    except ValueError:
        return 1


def build_parser():
    parser = argparse.ArgumentParser(
        prog="sweepweno",
        description="WENO5 Euler solver with a conservative positivity-preserving sweeping limiter.")
    parser.add_argument("-v", "--verbose", action="count", default=0,
                        help="log progress (-v) or debug detail (-vv)")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run one benchmark problem")
    run.add_argument("problem", choices=PROBLEM_NAMES)
    run.add_argument("--nx", type=_resolution, help="nodes in x (ny follows the aspect ratio)")
    run.add_argument("--ny", type=_resolution, help="nodes in y (2D only)")
    run.add_argument("--cfl", type=_positive_float)
    run.add_argument("--tfinal", type=_positive_float, help="final time")
    run.add_argument("--no-limiter", action="store_true", help="switch the sweeping limiter off")
    run.add_argument("--eps", type=float, help="admissibility threshold (default 1e-13)")
    run.add_argument("--max-sweeps", type=int, default=DEFAULT_MAX_FULL_SWEEPS,
                     help="full pressure sweeps allowed per stage")
    run.add_argument("--alpha-per-stage", action="store_true",
                     help="recompute the splitting speed every RK stage, not every step")
    run.add_argument("--out", type=Path, help="output directory (default out/<problem>)")

    conv = sub.add_parser("convergence", help="error/order table against an exact solution")
    conv.add_argument("problem", choices=PROBLEM_NAMES)
    conv.add_argument("--resolutions", type=_resolution_list, default=[45, 90, 180],
                      help="comma-separated square resolutions, e.g. 45,90,180")
    conv.add_argument("--tfinal", type=_positive_float)
    conv.add_argument("--no-limiter", action="store_true")
    conv.add_argument("--out", type=Path, help="output directory (default out/convergence)")
    return parser


def _cmd_run(args, parser):
    spec = make_problem(args.problem)
    if args.ny is not None and spec.ndim == 1:
        parser.error("--ny only applies to 2D problems")
    if args.eps is not None and args.eps < 0:
        parser.error("--eps must be nonnegative")
    if args.max_sweeps < 1:
        parser.error("--max-sweeps must be at least 1")
    spec = spec.with_resolution(args.nx, args.ny)
    result = run_problem(spec, limiter=not args.no_limiter, eps=args.eps,
                         max_sweeps=args.max_sweeps, cfl=args.cfl, final_time=args.tfinal,
                         alpha_per_stage=args.alpha_per_stage, log_every=100)
    out = write_outputs(result, args.out or Path("out") / spec.name)
    s = result.summary
    print(f"{s.problem} {'x'.join(map(str, s.resolution))}: {s.status} "
          f"t={s.time_reached:.6g} steps={s.steps} wall={s.wall_time:.2f}s")
    print(f"  min rho={s.min_rho:.6e} min p={s.min_p:.6e}")
    print(f"  pressure sweeps max={s.pressure_sweeps_max} avg={s.pressure_sweeps_average:.4f} "
          f"total={s.pressure_sweeps_total}; density sweeps total={s.density_sweeps_total}")
    print(f"  outputs in {out}")
    if not result.ok:
        print(f"error: {s.error}", file=sys.stderr)
        return _EXIT_BY_KIND.get(s.error_kind, EXIT_SOLVER)
    return EXIT_OK


def _cmd_convergence(args, parser):
    spec = make_problem(args.problem)
    if spec.exact is None:
        parser.error(f"problem {args.problem!r} has no exact solution")
    res = args.resolutions
    if any(b <= a for a, b in zip(res, res[1:])):
        parser.error("--resolutions must strictly increase")
    try:
        rows = convergence_study(args.problem, res, final_time=args.tfinal,
                                 limiter=not args.no_limiter, workers=_threads())
    except RuntimeError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    out = args.out or Path("out") / "convergence"
    out.mkdir(parents=True, exist_ok=True)
    write_convergence(out / CONVERGENCE_FILE, rows)

    def fmt(v):
        return "-" if v is None else f"{v:.4f}"

    print(f"{'N':>6} {'L1 error':>12} {'L1 order':>9} {'Linf error':>12} {'Linf order':>10}")
    for r in rows:
        print(f"{r.resolution:>6} {r.l1:12.4e} {fmt(r.l1_order):>9} {r.linf:12.4e} "
              f"{fmt(r.linf_order):>10}")
    return EXIT_OK


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    level = logging.WARNING - 10 * min(args.verbose, 2)
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s")
    if args.command == "run":
        return _cmd_run(args, parser)
    return _cmd_convergence(args, parser)


if __name__ == "__main__":
    sys.exit(main())
