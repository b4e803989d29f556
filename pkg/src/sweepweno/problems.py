"""The benchmark problems: initial data, boundaries, constants and error measures."""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Callable

import numpy as np

from .grid import (INFLOW, OUTFLOW, PERIODIC, REFLECTIVE, BoundaryCondition,
                   Field, WallMask)
from .state import DEFAULT_EPS, PressureFunctional, conserved_from_primitive

VORTEX_GAMMA = 10.0828  # vortex strength
VORTEX_CENTER = (5.0, 5.0)
VORTEX_PERIOD = 10.0


@dataclass(frozen=True)
class Reaction:
    K: float
    Ea: float
    heat_release: float


@dataclass(frozen=True)
class ProblemSpec:
    """Everything needed to set up one benchmark run.

    ``initial(spec, coords)`` returns the conserved interior array and
    ``boundaries(spec, coords)`` the per-side boundary conditions for the
    resolution in ``spec``.
    """

    name: str
    ndim: int
    extents: tuple
    resolution: tuple
    gamma: float
    cfl: float
    final_time: float
    initial: Callable
    boundaries: Callable
    offset: float = 0.0
    wall: tuple | None = None  # (x_wall, y_wall): solid for x < x_wall and y < y_wall
    reaction: Reaction | None = None
    exact: Callable | None = None
    eps: float = DEFAULT_EPS
    notes: str = ""

    def __post_init__(self):
        if len(self.resolution) != self.ndim or len(self.extents) != self.ndim:
            raise ValueError("resolution/extents do not match dimensionality")
        if min(self.resolution) < 5:
            raise ValueError("resolution below the WENO5 stencil width")

    @property
    def spacing(self):
        return tuple((hi - lo) / n for (lo, hi), n in zip(self.extents, self.resolution))

    def functional(self, eps: float | None = None) -> PressureFunctional:
        q = self.reaction.heat_release if self.reaction else None
        return PressureFunctional(self.gamma, q, self.eps if eps is None else eps)

    def with_resolution(self, nx=None, ny=None) -> "ProblemSpec":
        """Copy at a new resolution; a lone ``nx`` keeps the aspect ratio in 2D."""
        if nx is None and ny is None:
            return self
        res = list(self.resolution)
        if nx is not None:
            if self.ndim == 2 and ny is None:
                ny = max(5, round(nx * self.resolution[1] / self.resolution[0]))
            res[0] = int(nx)
        if ny is not None:
            if self.ndim != 2:
                raise ValueError("ny given for a 1D problem")
            res[1] = int(ny)
        return replace(self, resolution=tuple(res))

    def node_axes(self):
        return [lo + (np.arange(n) + self.offset) * h
                for (lo, _), n, h in zip(self.extents, self.resolution, self.spacing)]

    def coordinates(self):
        axes = self.node_axes()
        return axes if self.ndim == 1 else np.meshgrid(*axes, indexing="ij")

    def mask(self):
        if self.wall is None:
            return None
        dx, dy = self.spacing
        (x0, _), (y0, _) = self.extents
        return WallMask(int(round((self.wall[0] - x0) / dx)),
                        int(round((self.wall[1] - y0) / dy)))


def build_field(spec: ProblemSpec) -> Field:
    coords = spec.coordinates()
    interior = spec.initial(spec, coords)
    bcs = spec.boundaries(spec, coords)
    return Field(interior, spec.spacing, bcs, origin=[lo for lo, _ in spec.extents],
                 offset=spec.offset, mask=spec.mask())


# ----------------------------------------------------------------------------
# helpers

def _riemann_1d(spec, coords, left, right, x0=0.0):
    f = spec.functional()
    (x,) = coords
    prim = np.where(x[None, :] <= x0, np.asarray(left)[:, None], np.asarray(right)[:, None])
    return conserved_from_primitive(prim, f)


def _all(kind):
    def make(spec, coords):
        sides = ("left", "right") if spec.ndim == 1 else ("left", "right", "bottom", "top")
        return {s: BoundaryCondition(kind) for s in sides}
    return make


def normal_shock_state(mach: float, rho0: float, p0: float, gamma: float):
    """Post-shock ``(rho, u, p)`` behind a shock of Mach ``mach`` running into gas at rest."""
    m2 = mach * mach
    c0 = math.sqrt(gamma * p0 / rho0)
    rho1 = rho0 * (gamma + 1.0) * m2 / ((gamma - 1.0) * m2 + 2.0)
    p1 = p0 * (1.0 + 2.0 * gamma / (gamma + 1.0) * (m2 - 1.0))
    u1 = mach * c0 * (1.0 - rho0 / rho1)
    return rho1, u1, p1


# ----------------------------------------------------------------------------
# 1D problems

def _double_rarefaction_ic(spec, coords):
    return _riemann_1d(spec, coords, (7.0, -1.0, 0.2), (7.0, 1.0, 0.2))


def _sedov_1d_ic(spec, coords):
    n = spec.resolution[0]
    dx = spec.spacing[0]
    u = np.zeros((3, n))
    u[0] = 1.0
    u[2] = 1e-12
    u[2, n // 2] = 3200000.0 / dx
    return u


# ----------------------------------------------------------------------------
# vortex

def vortex_exact(x, y, t, Gamma=VORTEX_GAMMA, gamma=1.4):
    """Primitive ``(rho, u, v, p)`` of the isentropic vortex advected by the mean flow.

    Mean flow is ``rho = u = v = p = 1``; the vortex centre starts at (5, 5)
    and moves with unit speed in x and y on the periodic square [0, 10]^2.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    L = VORTEX_PERIOD
    xb = np.mod(x - VORTEX_CENTER[0] - t + L / 2, L) - L / 2
    yb = np.mod(y - VORTEX_CENTER[1] - t + L / 2, L) - L / 2
    r2 = xb * xb + yb * yb
    amp = Gamma / (2.0 * math.pi) * np.exp(0.5 * (1.0 - r2))
    du = amp * yb
    dv = -amp * xb
    dT = -(gamma - 1.0) * Gamma ** 2 / (8.0 * math.pi ** 2 * gamma) * np.exp(1.0 - r2)
    T = 1.0 + dT
    rho = T ** (1.0 / (gamma - 1.0))
    p = rho * T
    return np.stack([rho, 1.0 + du, 1.0 + dv, p])


def _vortex_ic(spec, coords):
    X, Y = coords
    return conserved_from_primitive(vortex_exact(X, Y, 0.0, VORTEX_GAMMA, spec.gamma),
                                    spec.functional())


def _vortex_exact_field(spec, coords, t):
    X, Y = coords
    return vortex_exact(X, Y, t, VORTEX_GAMMA, spec.gamma)


# ----------------------------------------------------------------------------
# 2D problems

def _sedov_2d_ic(spec, coords):
    nx, ny = spec.resolution
    dx, dy = spec.spacing
    u = np.zeros((4, nx, ny))
    u[0] = 1.0
    u[3] = 1e-12
    u[3, 0, 0] = 0.244816 / (dx * dy)
    return u


def _sedov_2d_bc(spec, coords):
    return {"left": BoundaryCondition(REFLECTIVE), "bottom": BoundaryCondition(REFLECTIVE),
            "right": BoundaryCondition(OUTFLOW), "top": BoundaryCondition(OUTFLOW)}


MACH2000_AMBIENT = (0.5, 0.0, 0.0, 0.4127)
MACH2000_JET = (5.0, 800.0, 0.0, 0.4127)
MACH2000_COFLOW = (5.0, 0.0, 0.0, 0.4127)
MACH2000_HALF_WIDTH = 0.05


def _mach2000_ic(spec, coords):
    nx, ny = spec.resolution
    prim = np.broadcast_to(np.asarray(MACH2000_AMBIENT)[:, None, None], (4, nx, ny))
    return conserved_from_primitive(np.array(prim), spec.functional())


def _mach2000_bc(spec, coords):
    y = spec.node_axes()[1]
    jet = np.abs(y) <= MACH2000_HALF_WIDTH + 1e-12
    prim = np.where(jet[None, :], np.asarray(MACH2000_JET)[:, None],
                    np.asarray(MACH2000_COFLOW)[:, None])
    inflow = conserved_from_primitive(prim, spec.functional())
    return {"left": BoundaryCondition(INFLOW, inflow),
            "bottom": BoundaryCondition(REFLECTIVE),
            "right": BoundaryCondition(OUTFLOW), "top": BoundaryCondition(OUTFLOW)}


SHOCK_MACH = 5.09
SHOCK_AMBIENT = (1.4, 0.0, 0.0, 1.0)


def shock_diffraction_post_state(gamma=1.4):
    rho1, u1, p1 = normal_shock_state(SHOCK_MACH, SHOCK_AMBIENT[0], SHOCK_AMBIENT[3], gamma)
    return (rho1, u1, 0.0, p1)


def _shock_diffraction_ic(spec, coords):
    X, Y = coords
    f = spec.functional()
    post = np.asarray(shock_diffraction_post_state(spec.gamma))
    amb = np.asarray(SHOCK_AMBIENT)
    shocked = (X < 0.5) & (Y >= 6.0)
    prim = np.where(shocked[None], post[:, None, None], amb[:, None, None])
    return conserved_from_primitive(prim, f)


def _shock_diffraction_bc(spec, coords):
    post = conserved_from_primitive(np.asarray(shock_diffraction_post_state(spec.gamma)),
                                    spec.functional())
    return {"left": BoundaryCondition(INFLOW, post),
            "bottom": BoundaryCondition(OUTFLOW),
            "right": BoundaryCondition(OUTFLOW), "top": BoundaryCondition(OUTFLOW)}


DETONATION_LEFT = (11.0, 6.18, 0.0, 970.0, 1.0)  # (rho, u, v, E, Y)
DETONATION_RIGHT = (1.0, 0.0, 0.0, 55.0, 1.0)


def _from_rho_u_v_E_Y(state):
    rho, u, v, E, Y = state
    return np.array([rho, rho * u, rho * v, E, rho * Y])


def _detonation_ic(spec, coords):
    X, _ = coords
    left = _from_rho_u_v_E_Y(DETONATION_LEFT)
    right = _from_rho_u_v_E_Y(DETONATION_RIGHT)
    return np.where((X < 0.5)[None], left[:, None, None], right[:, None, None])


def _detonation_bc(spec, coords):
    return {"left": BoundaryCondition(INFLOW, _from_rho_u_v_E_Y(DETONATION_LEFT)),
            "bottom": BoundaryCondition(REFLECTIVE),
            "right": BoundaryCondition(REFLECTIVE), "top": BoundaryCondition(REFLECTIVE)}


# ----------------------------------------------------------------------------

_PROBLEMS = {
    "double_rarefaction": dict(
        ndim=1, extents=((-0.5, 0.5),), resolution=(200,), gamma=1.4, cfl=0.9,
        final_time=0.3, initial=_double_rarefaction_ic, boundaries=_all(OUTFLOW),
        offset=0.5),
    "sedov_1d": dict(
        ndim=1, extents=((-2.0, 2.0),), resolution=(800,), gamma=1.4, cfl=1.2,
        final_time=0.001, initial=_sedov_1d_ic, boundaries=_all(OUTFLOW)),
    "vortex": dict(
        ndim=2, extents=((0.0, 10.0), (0.0, 10.0)), resolution=(180, 180), gamma=1.4,
        cfl=0.5, final_time=0.01, initial=_vortex_ic, boundaries=_all(PERIODIC), offset=0.5,
        exact=_vortex_exact_field),
    "sedov_2d": dict(
        ndim=2, extents=((0.0, 1.3), (0.0, 1.3)), resolution=(640, 640), gamma=1.4,
        cfl=0.5, final_time=1.0, initial=_sedov_2d_ic, boundaries=_sedov_2d_bc),
    "mach2000": dict(
        ndim=2, extents=((0.0, 1.0), (0.0, 0.25)), resolution=(800, 400), gamma=5.0 / 3.0,
        cfl=0.25, final_time=0.001, initial=_mach2000_ic, boundaries=_mach2000_bc),
    "shock_diffraction": dict(
        ndim=2, extents=((0.0, 13.0), (0.0, 11.0)), resolution=(1040, 880), gamma=1.4,
        cfl=0.9, final_time=2.3, initial=_shock_diffraction_ic,
        boundaries=_shock_diffraction_bc, wall=(1.0, 6.0)),
    "detonation": dict(
        ndim=2, extents=((0.0, 5.0), (0.0, 5.0)), resolution=(400, 400), gamma=1.2,
        cfl=0.89, final_time=0.6, initial=_detonation_ic, boundaries=_detonation_bc,
        wall=(1.0, 2.0), reaction=Reaction(K=2566.4, Ea=50.0, heat_release=50.0)),
}

PROBLEM_NAMES = tuple(_PROBLEMS)


def make_problem(name: str) -> ProblemSpec:
    try:
        params = _PROBLEMS[name]
    except KeyError:
        raise ValueError(f"unknown problem {name!r}; choose from {', '.join(PROBLEM_NAMES)}") from None
    return ProblemSpec(name=name, **params)


def source_function(spec: ProblemSpec, f: PressureFunctional, fluid=None):
    """Explicit reaction source for reactive problems, else ``None``."""
    if spec.reaction is None:
        return None
    from .weno import reactive_source
    K, Ea = spec.reaction.K, spec.reaction.Ea

    def source(w):
        s = reactive_source(w, f, K, Ea)
        if fluid is not None:
            s[:, ~fluid] = 0.0
        return s
    return source


# ----------------------------------------------------------------------------
# error measures

def error_norms(numeric, exact):
    """``(L1, Linf)`` of the nodal difference; L1 is the mean absolute error."""
    numeric = np.asarray(numeric, dtype=float)
    exact = np.asarray(exact, dtype=float)
    if numeric.shape != exact.shape:
        raise ValueError(f"shape mismatch {numeric.shape} vs {exact.shape}")
    err = np.abs(numeric - exact)
    return float(np.mean(err)), float(np.max(err))


def convergence_order(errors, resolutions):
    """Observed orders between consecutive resolutions (``nan`` where an error is 0)."""
    errors = list(errors)
    resolutions = list(resolutions)
    if len(errors) != len(resolutions):
        raise ValueError("one error per resolution")
    orders = []
    for k in range(1, len(errors)):
        if not resolutions[k] > resolutions[k - 1]:
            raise ValueError("resolutions must strictly increase")
        e0, e1 = errors[k - 1], errors[k]
        if e0 == 0 or e1 == 0:
            orders.append(float("nan"))
        else:
            orders.append(math.log(e0 / e1) / math.log(resolutions[k] / resolutions[k - 1]))
    return orders
