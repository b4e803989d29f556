"""Structured node grids with ghost layers and boundary conditions."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .sweep import SWEEP_I, SWEEP_II, snake_order

GHOST = 3

PERIODIC = "periodic"
OUTFLOW = "outflow"
REFLECTIVE = "reflective"
INFLOW = "inflow"
BC_KINDS = (PERIODIC, OUTFLOW, REFLECTIVE, INFLOW)

SIDES = {1: ("left", "right"), 2: ("left", "right", "bottom", "top")}


@dataclass(frozen=True)
class BoundaryCondition:
    """Boundary treatment for one side of the grid.

    ``state`` is only used for inflow: a conserved vector ``(k,)`` or one
    vector per boundary node, ``(k, n_side)``.
    """

    kind: str
    state: np.ndarray | None = None

    def __post_init__(self):
        if self.kind not in BC_KINDS:
            raise ValueError(f"unknown boundary kind {self.kind!r}")
        if self.kind == INFLOW and self.state is None:
            raise ValueError("inflow boundary needs a state")


@dataclass(frozen=True)
class WallMask:
    """Solid block in the lower-left corner: interior nodes ``i < i_end`` and ``j < j_end``.

    The nodes ``i == i_end`` and ``j == j_end`` lie on the wall and are fluid.
    """

    i_end: int
    j_end: int


class Field:
    """Conserved states on a uniform node grid, ghost layers included.

    ``u`` has shape ``(k, nx + 2g)`` in 1D or ``(k, nx + 2g, ny + 2g)`` in 2D.
    Node ``i`` sits at ``origin + (i + offset) * dx``.
    """

    def __init__(self, interior, spacing, bcs, ghost=GHOST, origin=None,
                 offset=0.0, mask: WallMask | None = None):
        interior = np.asarray(interior, dtype=float)
        if ghost < GHOST:
            raise ValueError(f"ghost width must be at least {GHOST}")
        self.ndim = interior.ndim - 1
        if self.ndim not in (1, 2):
            raise ValueError("interior must have shape (k, nx) or (k, nx, ny)")
        self.shape = interior.shape[1:]
        if min(self.shape) < 1:
            raise ValueError("empty grid")
        self.ghost = ghost
        self.spacing = tuple(float(s) for s in np.atleast_1d(spacing))
        if len(self.spacing) != self.ndim:
            raise ValueError("one spacing per dimension")
        self.origin = tuple(origin) if origin is not None else (0.0,) * self.ndim
        self.offset = offset
        missing = set(SIDES[self.ndim]) - set(bcs)
        if missing:
            raise ValueError(f"missing boundary conditions for {sorted(missing)}")
        self.bcs = dict(bcs)
        if mask is not None and self.ndim != 2:
            raise ValueError("wall masks are 2D only")
        self.mask = mask
        g = ghost
        padded = [(0, 0)] + [(g, g)] * self.ndim
        self.u = np.pad(interior, padded, mode="edge")
        self._fluid = None
        self._orders = None

    @property
    def ncomp(self):
        return self.u.shape[0]

    @property
    def dx(self):
        return self.spacing[0]

    @property
    def dy(self):
        return self.spacing[1]

    @property
    def interior_slice(self):
        g = self.ghost
        return (slice(None),) + tuple(slice(g, g + n) for n in self.shape)

    @property
    def interior(self):
        """View of the interior nodes (writes go through to ``u``)."""
        return self.u[self.interior_slice]

    def coordinates(self):
        """Node coordinates, one array per dimension (``indexing='ij'``)."""
        axes = [o + (np.arange(n) + self.offset) * h
                for o, n, h in zip(self.origin, self.shape, self.spacing)]
        if self.ndim == 1:
            return axes
        return np.meshgrid(*axes, indexing="ij")

    @property
    def fluid(self):
        """Boolean array over interior nodes, False inside the wall mask."""
        if self._fluid is None:
            fl = np.ones(self.shape, dtype=bool)
            if self.mask is not None:
                fl[:self.mask.i_end, :self.mask.j_end] = False
            self._fluid = fl
        return self._fluid

    def fluid_states(self):
        """Copy of the fluid states as a ``(k, n_fluid)`` array in C order."""
        inner = self.interior
        if self.mask is None:
            return inner.reshape(self.ncomp, -1).copy()
        return inner[:, self.fluid]

    def set_fluid_states(self, w):
        inner = self.interior
        if self.mask is None:
            inner[...] = w.reshape(inner.shape)
        else:
            inner[:, self.fluid] = w

    def cell_volume(self):
        return float(np.prod(self.spacing))

    def totals(self):
        """Integral of each conserved component over the fluid nodes."""
        return self.fluid_states().sum(axis=1) * self.cell_volume()

    def sweep_orderings(self):
        """Orderings of the fluid states used by the limiter.

        1D: the natural order.  2D: Sweep I then Sweep II, with masked nodes
        dropped from the serpentine paths.
        """
        if self._orders is None:
            if self.ndim == 1:
                self._orders = [np.arange(self.shape[0])]
            else:
                nx, ny = self.shape
                flat_fluid = self.fluid.ravel()
                position = np.cumsum(flat_fluid) - 1
                orders = []
                for variant in (SWEEP_I, SWEEP_II):
                    ij = snake_order(nx, ny, variant)
                    flat = ij[:, 0] * ny + ij[:, 1]
                    flat = flat[flat_fluid[flat]]
                    orders.append(position[flat])
                self._orders = orders
        return self._orders

    def copy(self):
        other = object.__new__(Field)
        other.__dict__.update(self.__dict__)
        other.u = self.u.copy()
        return other


def _normal_component(axis):
    return 1 + axis


def apply_boundary(field: Field) -> None:
    """Fill every ghost layer of ``field`` from its boundary conditions.

    periodic wraps; outflow copies the adjacent interior node; reflective
    mirrors about the boundary node, flipping the normal momentum; inflow
    writes the prescribed state.
    """
    for axis in range(field.ndim):
        lo_side, hi_side = SIDES[2][2 * axis:2 * axis + 2]
        _fill_axis(field, axis, field.bcs[lo_side], low=True)
        _fill_axis(field, axis, field.bcs[hi_side], low=False)


def _fill_axis(field, axis, bc, low):
    u = field.u
    g = field.ghost
    n = field.shape[axis]
    ax = axis + 1
    other = [slice(None)] * u.ndim
    if field.ndim == 2:
        o = 2 if axis == 0 else 1
        other[o] = slice(g, g + field.shape[o - 1])

    def sl(idx):
        s = list(other)
        s[ax] = idx
        return tuple(s)

    if bc.kind == PERIODIC:
        if low:
            u[sl(slice(0, g))] = u[sl(slice(n, n + g))]
        else:
            u[sl(slice(g + n, 2 * g + n))] = u[sl(slice(g, 2 * g))]
    elif bc.kind == OUTFLOW:
        edge = g if low else g + n - 1
        target = slice(0, g) if low else slice(g + n, 2 * g + n)
        u[sl(target)] = u[sl(slice(edge, edge + 1))]
    elif bc.kind == REFLECTIVE:
        comp = _normal_component(axis)
        for k in range(1, g + 1):
            src, dst = (g + k, g - k) if low else (g + n - 1 - k, g + n - 1 + k)
            u[sl(dst)] = u[sl(src)]
            s = list(sl(dst))
            s[0] = comp
            u[tuple(s)] *= -1.0
    else:
        state = np.asarray(bc.state, dtype=float)
        target = slice(0, g) if low else slice(g + n, 2 * g + n)
        block = u[sl(target)]
        if state.ndim == 1:
            block[...] = state.reshape((-1,) + (1,) * (block.ndim - 1))
        else:
            # one state per node along the side
            if axis == 0:
                block[...] = state[:, None, :]
            else:
                block[...] = state[:, :, None]


def directional_states(field: Field, axis: int):
    """State array for a sweep along ``axis`` with the wall mask mirrored.

    Without a mask this is ``field.u`` itself.  With one, the three masked
    nodes next to each wall face are replaced by reflections of the fluid
    nodes across the face (normal momentum flipped).
    """
    if field.mask is None:
        return field.u
    w = field.u.copy()
    g = field.ghost
    ie, je = field.mask.i_end, field.mask.j_end
    comp = _normal_component(axis)
    if axis == 0:
        rows = slice(g, g + je)
        for k in range(1, g + 1):
            w[:, g + ie - k, rows] = field.u[:, g + ie + k, rows]
            w[comp, g + ie - k, rows] *= -1.0
    else:
        cols = slice(g, g + ie)
        for k in range(1, g + 1):
            w[:, cols, g + je - k] = field.u[:, cols, g + je + k]
            w[comp, cols, g + je - k] *= -1.0
    return w
