"""SSP-RK3 time marching with the sweeping limiter after every stage."""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .grid import Field, apply_boundary
from .state import PressureFunctional
from .sweep import DEFAULT_MAX_FULL_SWEEPS, SweepStats, apply_limiter
from .weno import _alpha_of, compute_residual, global_alpha

logger = logging.getLogger(__name__)

# (weight of u^n, weight of the forward-Euler update) per stage
SSP_RK3_STAGES = ((0.0, 1.0), (0.75, 0.25), (1.0 / 3.0, 2.0 / 3.0))


class SolverError(RuntimeError):
    """Time marching stopped; carries where it happened."""

    def __init__(self, message, step=None, stage=None, time=None):
        where = []
        if step is not None:
            where.append(f"step {step}")
        if stage is not None:
            where.append(f"stage {stage}")
        if time is not None:
            where.append(f"t={time:.6g}")
        super().__init__(f"{message} ({', '.join(where)})" if where else message)
        self.detail = message
        self.step = step
        self.stage = stage
        self.time = time


class PositivityError(SolverError):
    """Negative density/pressure or a non-finite value survived a stage."""


@dataclass
class RunConfig:
    cfl: float
    final_time: float
    limiter: bool = True
    max_full_sweeps: int = DEFAULT_MAX_FULL_SWEEPS
    source: bool = True
    alpha_per_stage: bool = False
    max_steps: int | None = None

    def __post_init__(self):
        if not self.cfl > 0:
            raise ValueError("cfl must be positive")
        if not self.final_time > 0:
            raise ValueError("final_time must be positive")


@dataclass
class StageRecord:
    step: int
    stage: int
    time: float
    dt: float
    density_swept: int
    pressure_sweeps: int
    min_rho: float
    min_p: float
    alpha_step: tuple
    alpha_stage: tuple


def compute_dt(alpha, spacing, cfl, remaining=None):
    """Time step from the CFL condition, clipped so the run lands on ``remaining``.

    1D: ``cfl dx / alpha``.  2D: ``cfl / (alpha_x/dx + alpha_y/dy)``.
    """
    alpha = np.atleast_1d(np.asarray(alpha, dtype=float))
    spacing = np.atleast_1d(np.asarray(spacing, dtype=float))
    if np.any(~(alpha > 0)):
        raise ValueError("alpha must be positive")
    dt = cfl / float(np.sum(alpha / spacing))
    if remaining is not None and remaining < dt:
        dt = remaining
    return dt


def rk3_step(field: Field, dt: float, residual_fn: Callable[[Field], np.ndarray],
             source_fn: Callable[[np.ndarray], np.ndarray] | None = None,
             limiter: Callable[[Field, SweepStats], None] | None = None,
             stats: SweepStats | None = None,
             on_stage: Callable[[int, Field], None] | None = None) -> None:
    """Advance ``field`` by one SSP-RK3 step in place.

    ``residual_fn`` must fill ghost layers itself if it needs them.  The
    limiter runs after each of the three stage updates.
    """
    u0 = field.interior.copy()
    for stage, (a, b) in enumerate(SSP_RK3_STAGES, start=1):
        try:
            rhs = residual_fn(field)
        except ValueError as exc:
            raise PositivityError(f"residual failed: {exc}", stage=stage) from exc
        if source_fn is not None:
            rhs = rhs + source_fn(field.interior)
        update = field.interior + dt * rhs
        if a:
            field.interior[...] = a * u0 + b * update
        else:
            field.interior[...] = update
        if limiter is not None:
            try:
                limiter(field, stats)
            except Exception as exc:
                raise SolverError(f"limiter failed: {exc}", stage=stage) from exc
        if on_stage is not None:
            on_stage(stage, field)


def _min_rho_p(field, f):
    w = field.fluid_states()
    rho = w[0]
    with np.errstate(all="ignore"):
        p = (f.gamma - 1.0) * f.internal_energy(w)
    return float(np.min(rho)), float(np.min(p))


def march(field: Field, f: PressureFunctional, config: RunConfig,
          source_fn: Callable[[np.ndarray], np.ndarray] | None = None,
          stats: SweepStats | None = None,
          on_record: Callable[[StageRecord], None] | None = None) -> tuple[float, int]:
    """Integrate ``field`` to ``config.final_time``.  Returns ``(time, steps)``.

    Raises :class:`PositivityError` when a stage leaves a negative or
    non-finite state behind (only possible with the limiter off, or if the
    limiter itself is broken) and :class:`SolverError` for limiter failures.
    """
    stats = stats if stats is not None else SweepStats()
    eps = f.eps
    t = 0.0
    step = 0
    T = config.final_time
    if not config.source:
        source_fn = None

    while t < T:
        if config.max_steps is not None and step >= config.max_steps:
            break
        apply_boundary(field)
        try:
            alpha = global_alpha(field, f)
        except ValueError as exc:
            raise PositivityError(str(exc), step=step, time=t) from exc
        dt = compute_dt(alpha, field.spacing, config.cfl, T - t)
        state = {"alpha": alpha}

        def residual(fld):
            apply_boundary(fld)
            a = state["alpha"]
            if config.alpha_per_stage:
                a = global_alpha(fld, f)
            return compute_residual(fld, f, a).residual

        def check(stage, fld):
            rho_min, p_min = _min_rho_p(fld, f)
            bad = not (np.isfinite(rho_min) and np.isfinite(p_min))
            if config.limiter:
                bad = bad or rho_min < eps or p_min < eps
            else:
                bad = bad or rho_min <= 0.0 or p_min <= 0.0
            if on_record is not None:
                try:
                    a_stage = _alpha_of(fld.fluid_states(), f)
                except ValueError:
                    a_stage = (float("nan"),) * len(alpha)
                on_record(StageRecord(
                    step, stage, t, dt,
                    int(config.limiter and stats.density_swept_this_call),
                    stats.pressure_sweeps_this_call if config.limiter else 0,
                    rho_min, p_min, alpha, a_stage))
            if bad:
                raise PositivityError(
                    f"inadmissible state after stage: min rho={rho_min:.3e}, min p={p_min:.3e}",
                    step=step, stage=stage, time=t)

        limiter = None
        if config.limiter:
            def limiter(fld, st):
                apply_limiter(fld, f, st, config.max_full_sweeps)

        try:
            rk3_step(field, dt, residual, source_fn, limiter, stats, check)
        except SolverError as exc:
            if exc.step is None:
                raise type(exc)(exc.detail, step=step, stage=exc.stage, time=t) from exc
            raise
        t = T if T - (t + dt) <= 1e-14 * T else t + dt
        step += 1
    return t, step

