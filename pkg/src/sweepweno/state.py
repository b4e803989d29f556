"""Conserved states, the ideal-gas pressure functional and state-space helpers.

All arrays put the conserved component on the first axis, so a single state
has shape ``(k,)`` and a grid of states has shape ``(k, nx)`` or
``(k, nx, ny)``.  Component order is ``(rho, m[, n], E[, rhoY])``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

DEFAULT_EPS = 1e-13


class StateDomainError(ValueError):
    """A state lies outside the domain where an operation is defined."""


@dataclass(frozen=True)
class PressureFunctional:
    """Ideal-gas pressure, optionally with a chemical heat-release term.

    ``heat_release`` is ``None`` for plain Euler states; for reactive states
    it is the heat release per unit reactant mass and the last component of
    the state is the partial density ``rhoY``.
    """

    gamma: float = 1.4
    heat_release: float | None = None
    eps: float = DEFAULT_EPS

    def __post_init__(self):
        if not self.gamma > 1.0:
            raise ValueError(f"gamma must exceed 1, got {self.gamma}")
        if not self.eps >= 0.0:
            raise ValueError(f"eps must be nonnegative, got {self.eps}")

    @property
    def reactive(self) -> bool:
        return self.heat_release is not None

    def ndim(self, ncomp: int) -> int:
        """Number of momentum components for a state with ``ncomp`` entries."""
        d = ncomp - 2 - (1 if self.reactive else 0)
        if d not in (1, 2):
            raise StateDomainError(
                f"{ncomp} components do not describe a "
                f"{'reactive ' if self.reactive else ''}Euler state")
        return d

    def internal_energy(self, u):
        """Internal energy density ``E - |m|^2/(2 rho) [- Q rhoY]`` (no density check)."""
        u = np.asarray(u, dtype=float)
        d = self.ndim(u.shape[0])
        kinetic = u[1] * u[1]
        if d == 2:
            kinetic = kinetic + u[2] * u[2]
        eint = u[d + 1] - 0.5 * kinetic / u[0]
        if self.reactive:
            eint = eint - self.heat_release * u[d + 2]
        return eint

    def rounding_error(self, u):
        """Size of the floating-point error in an evaluated pressure.

        The pressure is a difference of energies, so its absolute error
        scales with ``E``, not with ``p``.
        """
        u = np.asarray(u, dtype=float)
        d = self.ndim(u.shape[0])
        kinetic = u[1] * u[1]
        if d == 2:
            kinetic = kinetic + u[2] * u[2]
        scale = np.abs(u[d + 1]) + 0.5 * kinetic / np.abs(u[0])
        if self.reactive:
            scale = scale + np.abs(self.heat_release * u[d + 2])
        return (self.gamma - 1.0) * np.finfo(float).eps * scale

    def __call__(self, u):
        return pressure(u, self)


def pressure(u, f: PressureFunctional):
    """Pressure of one state or an array of states.

    Raises ``StateDomainError`` if any density is not positive; such states
    must be density-swept before their pressure means anything.
    """
    u = np.asarray(u, dtype=float)
    if np.any(~(u[0] > 0.0)):
        raise StateDomainError("pressure requested for a state with rho <= 0")
    p = (f.gamma - 1.0) * f.internal_energy(u)
    return p if np.ndim(p) else float(p)


def is_admissible(u, f: PressureFunctional):
    """True where ``rho > eps`` and ``p > eps``.  Never raises."""
    u = np.asarray(u, dtype=float)
    rho = u[0]
    ok = rho > f.eps
    safe = np.where(ok, u, 1.0) if u.ndim > 1 else (u if ok else np.ones_like(u))
    with np.errstate(all="ignore"):
        p = (f.gamma - 1.0) * f.internal_energy(safe)
    ok = ok & (p > f.eps) & np.isfinite(p)
    return bool(ok) if np.ndim(ok) == 0 else ok


def mean_state(states):
    """Componentwise mean of a sequence of states.

    ``states`` is either an iterable of ``(k,)`` vectors or an array of shape
    ``(k, n)``.  Summation runs left to right so results are reproducible.
    """
    if isinstance(states, np.ndarray) and states.ndim == 2:
        arr = states
    else:
        seq = [np.asarray(s, dtype=float) for s in states]
        if not seq:
            raise StateDomainError("mean of an empty sequence")
        arr = np.stack(seq, axis=1)
    n = arr.shape[1]
    if n == 0:
        raise StateDomainError("mean of an empty sequence")
    total = np.zeros(arr.shape[0])
    for j in range(n):
        total = total + arr[:, j]
    return total / n


def state_norm(u) -> float:
    """Euclidean norm over every conserved component."""
    u = np.asarray(u, dtype=float)
    return float(np.sqrt(np.dot(u, u)))


def conserved_from_primitive(prim, f: PressureFunctional):
    """``(rho, v.., p[, Y]) -> (rho, rho v.., E[, rhoY])``."""
    prim = np.asarray(prim, dtype=float)
    d = f.ndim(prim.shape[0])
    rho = prim[0]
    vel = prim[1:d + 1]
    p = prim[d + 1]
    out = np.empty_like(prim)
    out[0] = rho
    out[1:d + 1] = rho * vel
    E = p / (f.gamma - 1.0) + 0.5 * rho * np.sum(vel * vel, axis=0)
    if f.reactive:
        out[d + 2] = rho * prim[d + 2]
        E = E + f.heat_release * out[d + 2]
    out[d + 1] = E
    return out


def primitive_from_conserved(u, f: PressureFunctional):
    """Inverse of :func:`conserved_from_primitive`."""
    u = np.asarray(u, dtype=float)
    d = f.ndim(u.shape[0])
    out = np.empty_like(u)
    out[0] = u[0]
    out[1:d + 1] = u[1:d + 1] / u[0]
    out[d + 1] = pressure(u, f)
    if f.reactive:
        out[d + 2] = u[d + 2] / u[0]
    return out


def sound_speed(u, f: PressureFunctional):
    p = pressure(u, f)
    if np.any(~(np.asarray(p) > 0.0)):
        raise StateDomainError("sound speed requested for nonpositive pressure")
    return np.sqrt(f.gamma * p / np.asarray(u)[0])
