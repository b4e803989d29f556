"""Conservative positivity-preserving sweeps for density and pressure.

The sweeps are serial passes over an ordered sequence of states.  A pass
only does Python-level work at points that actually need an adjustment;
everything else is a vectorised threshold test, so the cost on a mostly
admissible grid is a couple of numpy reductions.

The pressure sweep works for any concave functional ``f`` that is callable
on a ``(k,)`` state or a ``(k, n)`` array of states and carries an ``eps``
attribute.  :class:`sweepweno.state.PressureFunctional` is the usual one.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Callable, NamedTuple, Sequence

import numpy as np

logger = logging.getLogger(__name__)

DEFAULT_MAX_FULL_SWEEPS = 100
# rounding errors of p kept between an adjusted state and eps
ROUNDING_FACTOR = 8.0

SWEEP_I = "I"
SWEEP_II = "II"

POSITIVE_NEIGHBOR = "positive"
NEGATIVE_NEIGHBOR = "negative"


class InfeasibleError(RuntimeError):
    """The mean state is not admissible, so no conservative fix exists."""


class NonTerminationError(RuntimeError):
    """The pressure sweep did not reach the admissible set in time."""

    def __init__(self, message, full_sweeps, worst_pressure, worst_index):
        super().__init__(message)
        self.full_sweeps = full_sweeps
        self.worst_pressure = worst_pressure
        self.worst_index = worst_index


@dataclass
class SweepStats:
    """Counters for density and pressure sweeps over a run.

    A full pressure sweep is one forward plus one backward pass.  The
    average is taken over stages in which at least one full sweep ran.
    """

    density_sweeps_total: int = 0
    density_swept_this_call: bool = False
    pressure_sweeps_this_call: int = 0
    pressure_sweeps_total: int = 0
    pressure_sweeps_max_per_stage: int = 0
    stages_with_sweeps: int = 0
    positive_branch_adjustments: int = 0
    negative_branch_adjustments: int = 0
    limiter_calls: int = 0

    @property
    def pressure_sweeps_average(self) -> float:
        if self.stages_with_sweeps == 0:
            return 0.0
        return self.pressure_sweeps_total / self.stages_with_sweeps

    def record_stage(self, density_swept: bool, full_sweeps: int,
                     positive: int = 0, negative: int = 0) -> None:
        self.limiter_calls += 1
        self.density_swept_this_call = bool(density_swept)
        self.density_sweeps_total += int(bool(density_swept))
        self.pressure_sweeps_this_call = full_sweeps
        self.pressure_sweeps_total += full_sweeps
        self.pressure_sweeps_max_per_stage = max(
            self.pressure_sweeps_max_per_stage, full_sweeps)
        if full_sweeps > 0:
            self.stages_with_sweeps += 1
        self.positive_branch_adjustments += positive
        self.negative_branch_adjustments += negative

    def as_dict(self) -> dict:
        return {
            "density_sweeps_total": self.density_sweeps_total,
            "pressure_sweeps_total": self.pressure_sweeps_total,
            "pressure_sweeps_max_per_stage": self.pressure_sweeps_max_per_stage,
            "pressure_sweeps_average": self.pressure_sweeps_average,
            "stages_with_sweeps": self.stages_with_sweeps,
            "positive_branch_adjustments": self.positive_branch_adjustments,
            "negative_branch_adjustments": self.negative_branch_adjustments,
            "limiter_calls": self.limiter_calls,
        }


@dataclass
class PressureSweepResult:
    full_sweeps: int = 0
    positive_branch: int = 0
    negative_branch: int = 0


class AdjustEvent(NamedTuple):
    """One paired adjustment, handed to ``on_adjust`` callbacks."""

    index: int
    neighbor: int
    t: float
    branch: str
    u_neg: np.ndarray
    u_nbr: np.ndarray
    u_neg_new: np.ndarray
    u_nbr_new: np.ndarray


# ----------------------------------------------------------------------------
# density

def _density_pass(rho, eps, step):
    n = rho.size
    if step > 0:
        cand = np.flatnonzero(rho[:n - 1] < eps)
        lo, hi = 0, n - 2
    else:
        cand = np.flatnonzero(rho[1:] < eps)[::-1] + 1
        lo, hi = 1, n - 1
    moved = 0
    last = None
    for j in cand.tolist():
        if last is not None and (j - last) * step <= 0:
            continue
        if not rho[j] < eps:
            continue
        while True:
            d = rho[j] - eps
            rho[j + step] += d
            rho[j] = eps
            moved += 1
            last = j
            j += step
            if j < lo or j > hi or not rho[j] < eps:
                break
    return moved


def density_sweep(rho, eps: float) -> int:
    """Push density deficits forward then backward until every entry is >= eps.

    Modifies ``rho`` in place and returns the number of transfers made (each
    transfer raises one entry to ``eps``).  Raises :class:`InfeasibleError`
    when ``mean(rho) <= eps``.
    """
    arr = rho if isinstance(rho, np.ndarray) else np.asarray(rho, dtype=float)
    if arr.ndim != 1 or arr.size == 0:
        raise ValueError("density_sweep expects a nonempty 1-D sequence")
    if not arr.sum() / arr.size > eps:
        raise InfeasibleError(
            f"mean density {arr.sum() / arr.size:.3e} does not exceed eps={eps:g}")
    moved = _density_pass(arr, eps, +1)
    moved += _density_pass(arr, eps, -1)
    if arr is not rho:
        rho[:] = arr.tolist()
    return moved


# ----------------------------------------------------------------------------
# pressure

def blend_parameter(u1, u2, ubar, f, p1=None, p2=None, pbar=None):
    """Blend weight ``t`` for moving ``u1`` toward its neighbour ``u2``.

    Returns ``(t, branch)``.  With an admissible neighbour ``t`` is the
    Jensen lower bound that lifts ``p(u1)`` to ``eps``; otherwise the same
    estimate is taken toward the mean state, rescaled to the ``u1 -> u2``
    segment and capped at 1/4.

    The positive-neighbour target sits above ``eps`` by a few rounding
    errors of the evaluated pressure (never more than half of the
    neighbour's headroom), so the adjusted state still reads as admissible
    when its energy is large.
    """
    eps = f.eps
    p1 = f(u1) if p1 is None else p1
    p2 = f(u2) if p2 is None else p2
    if p2 > eps:
        noise = ROUNDING_FACTOR * max(f.rounding_error(u1), f.rounding_error(u2))
        target = eps + min(noise, 0.5 * (p2 - eps))
        return (p1 - target) / (p1 - p2), POSITIVE_NEIGHBOR
    pbar = f(ubar) if pbar is None else pbar
    dist = np.sqrt(np.dot(u1 - u2, u1 - u2))
    if dist == 0.0:
        return 0.0, NEGATIVE_NEIGHBOR
    t1 = (p1 - eps) / (p1 - pbar)
    ratio = np.sqrt(np.dot(u1 - ubar, u1 - ubar)) / dist
    return min(t1 * ratio, 0.25), NEGATIVE_NEIGHBOR


def node_adjust(u1, u2, ubar, f, p1=None, p2=None, pbar=None):
    """Return the adjusted state ``(1 - t) u1 + t u2`` (see :func:`blend_parameter`)."""
    u1 = np.asarray(u1, dtype=float)
    u2 = np.asarray(u2, dtype=float)
    t, _ = blend_parameter(u1, u2, np.asarray(ubar, dtype=float), f, p1, p2, pbar)
    return (1.0 - t) * u1 + t * u2


def _pressure_pass(w, p, f, ubar, pbar, step, result, on_adjust, perm):
    eps = f.eps
    n = w.shape[1]
    if step > 0:
        cand = np.flatnonzero(p[:n - 1] < eps)
        lo, hi = 0, n - 2
    else:
        cand = np.flatnonzero(p[1:] < eps)[::-1] + 1
        lo, hi = 1, n - 1
    last = None
    for j in cand.tolist():
        if last is not None and (j - last) * step <= 0:
            continue
        if not p[j] < eps:
            continue
        while True:
            k = j + step
            un = w[:, j].copy()
            up = w[:, k].copy()
            t, branch = blend_parameter(un, up, ubar, f, p[j], p[k], pbar)
            un_new = (1.0 - t) * un + t * up
            up_new = up + (un - un_new)
            w[:, j] = un_new
            w[:, k] = up_new
            p[j] = f(un_new)
            p[k] = f(up_new)
            if branch == POSITIVE_NEIGHBOR:
                result.positive_branch += 1
            else:
                result.negative_branch += 1
            if on_adjust is not None:
                on_adjust(AdjustEvent(int(perm[j]), int(perm[k]), float(t), branch,
                                      un, up, un_new, up_new))
            last = j
            j = k
            if j < lo or j > hi or not p[j] < eps:
                break


def pressure_sweep(states, f, max_full_sweeps: int = DEFAULT_MAX_FULL_SWEEPS,
                   orderings: Sequence[np.ndarray] | None = None,
                   on_adjust: Callable[[AdjustEvent], None] | None = None,
                   ) -> PressureSweepResult:
    """Sweep a ``(k, n)`` array of states in place until every ``p >= eps``.

    Each full sweep is a forward pass then a backward pass along one
    ordering; with several ``orderings`` they are used in turn (the 2D
    snake orders alternate this way).  Densities must already be >= eps.
    """
    w_all = states
    if w_all.ndim != 2:
        raise ValueError("states must have shape (k, n)")
    n = w_all.shape[1]
    eps = f.eps
    if np.any(w_all[0] < eps):
        raise ValueError("pressure_sweep needs every density >= eps; density-sweep first")
    ubar = w_all.sum(axis=1) / n
    pbar = f(ubar)
    if not pbar > eps:
        raise InfeasibleError(f"pressure of the mean state {pbar:.3e} does not exceed eps={eps:g}")
    if orderings is None:
        orderings = [np.arange(n)]

    result = PressureSweepResult()
    p_all = f(w_all)
    while np.min(p_all) < eps:
        if result.full_sweeps >= max_full_sweeps:
            worst = int(np.argmin(p_all))
            raise NonTerminationError(
                f"pressure still below eps after {result.full_sweeps} full sweeps "
                f"(worst p={p_all[worst]:.3e} at index {worst})",
                result.full_sweeps, float(p_all[worst]), worst)
        perm = orderings[result.full_sweeps % len(orderings)]
        w = w_all[:, perm]
        p = p_all[perm]
        _pressure_pass(w, p, f, ubar, pbar, +1, result, on_adjust, perm)
        _pressure_pass(w, p, f, ubar, pbar, -1, result, on_adjust, perm)
        w_all[:, perm] = w
        p_all[perm] = p
        result.full_sweeps += 1
    return result


# ----------------------------------------------------------------------------
# orderings and the field-level limiter

def snake_order(nx: int, ny: int, variant: str = SWEEP_I) -> np.ndarray:
    """Serpentine ordering of an ``nx`` by ``ny`` grid as ``(nx*ny, 2)`` zero-based indices.

    Sweep I walks ``i`` along each ``j`` column, reversing direction every
    other column; Sweep II is the transpose rule.
    """
    if nx < 1 or ny < 1:
        raise ValueError("grid extents must be positive")
    ii = np.arange(nx)
    jj = np.arange(ny)
    if variant == SWEEP_I:
        cols = [np.stack([ii if j % 2 == 0 else ii[::-1], np.full(nx, j)], axis=1)
                for j in range(ny)]
        return np.concatenate(cols)
    if variant == SWEEP_II:
        rows = [np.stack([np.full(ny, i), jj if i % 2 == 0 else jj[::-1]], axis=1)
                for i in range(nx)]
        return np.concatenate(rows)
    raise ValueError(f"unknown snake variant {variant!r}")


def apply_limiter(field, f, stats: SweepStats,
                  max_full_sweeps: int = DEFAULT_MAX_FULL_SWEEPS) -> None:
    """Density sweep then pressure sweep over the fluid cells of ``field``.

    Does nothing (beyond counting the call) when every fluid state already
    has ``rho >= eps`` and ``p >= eps``.  Ghost cells are never touched.
    """
    eps = f.eps
    w = field.fluid_states()
    rho = w[0]
    if not np.all(np.isfinite(w)):
        raise FloatingPointError("non-finite state handed to the limiter")
    dens_bad = bool(np.any(rho < eps))
    if not dens_bad:
        p = f(w)
        if not np.any(p < eps):
            stats.record_stage(False, 0)
            return
    orders = field.sweep_orderings()
    if dens_bad:
        r = w[0, orders[0]]
        density_sweep(r, eps)
        w[0, orders[0]] = r
    result = pressure_sweep(w, f, max_full_sweeps, orderings=orders)
    field.set_fluid_states(w)
    stats.record_stage(dens_bad, result.full_sweeps,
                       result.positive_branch, result.negative_branch)
    logger.debug("limiter: density=%s full_sweeps=%d (+%d/-%d)", dens_bad,
                 result.full_sweeps, result.positive_branch, result.negative_branch)
