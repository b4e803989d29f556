import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from sweepweno.grid import (GHOST, INFLOW, OUTFLOW, PERIODIC, REFLECTIVE, BoundaryCondition,
                            Field, WallMask, apply_boundary, directional_states)

SIDES_2D = ("left", "right", "bottom", "top")


def _bcs(kind, ndim=2, **over):
    sides = SIDES_2D if ndim == 2 else SIDES_2D[:2]
    out = {s: BoundaryCondition(kind) for s in sides}
    out.update(over)
    return out


def test_periodic_1d_ghosts():
    w = np.arange(3 * 6, dtype=float).reshape(3, 6)
    field = Field(w, 0.1, _bcs(PERIODIC, 1))
    apply_boundary(field)
    g = GHOST
    np.testing.assert_array_equal(field.u[:, g - 1], w[:, -1])
    np.testing.assert_array_equal(field.u[:, :g], w[:, -g:])
    np.testing.assert_array_equal(field.u[:, -g:], w[:, :g])


def test_outflow_copies_edge():
    w = np.arange(3 * 6, dtype=float).reshape(3, 6)
    field = Field(w, 0.1, _bcs(OUTFLOW, 1))
    field.u[:] = -1.0
    field.interior[...] = w
    apply_boundary(field)
    for k in range(GHOST):
        np.testing.assert_array_equal(field.u[:, k], w[:, 0])
        np.testing.assert_array_equal(field.u[:, -1 - k], w[:, -1])


def test_reflective_bottom_mirrors_about_boundary_node():
    rng = np.random.default_rng(0)
    w = rng.normal(size=(4, 5, 6))
    field = Field(w, (0.1, 0.1), _bcs(OUTFLOW, bottom=BoundaryCondition(REFLECTIVE)))
    apply_boundary(field)
    g = GHOST
    for k in range(1, g + 1):
        ghost = field.u[:, g:g + 5, g - k]
        src = w[:, :, k]
        np.testing.assert_array_equal(ghost[[0, 1, 3]], src[[0, 1, 3]])
        np.testing.assert_array_equal(ghost[2], -src[2])


def test_reflective_right_flips_x_momentum():
    w = np.random.default_rng(1).normal(size=(3, 7))
    field = Field(w, 0.1, _bcs(OUTFLOW, 1, right=BoundaryCondition(REFLECTIVE)))
    apply_boundary(field)
    g = GHOST
    for k in range(1, g + 1):
        np.testing.assert_array_equal(field.u[[0, 2], g + 6 + k], w[[0, 2], 6 - k])
        assert field.u[1, g + 6 + k] == -w[1, 6 - k]


def test_inflow_uniform_and_per_node():
    w = np.ones((4, 4, 3))
    state = np.array([5.0, 1.0, 0.0, 9.0])
    per_node = np.arange(12, dtype=float).reshape(4, 3)
    field = Field(w, (0.1, 0.1), _bcs(OUTFLOW, left=BoundaryCondition(INFLOW, per_node),
                                      top=BoundaryCondition(INFLOW, state)))
    apply_boundary(field)
    g = GHOST
    for k in range(g):
        np.testing.assert_array_equal(field.u[:, k, g:g + 3], per_node)
        np.testing.assert_array_equal(field.u[:, g:g + 4, g + 3 + k], state[:, None] * np.ones(4))


def test_boundary_validation():
    with pytest.raises(ValueError):
        BoundaryCondition("sticky")
    with pytest.raises(ValueError):
        BoundaryCondition(INFLOW)
    with pytest.raises(ValueError):
        Field(np.ones((3, 6)), 0.1, {"left": BoundaryCondition(OUTFLOW)})
    with pytest.raises(ValueError):
        Field(np.ones((3, 6)), 0.1, _bcs(OUTFLOW, 1), ghost=2)
    with pytest.raises(ValueError):
        Field(np.ones((3, 6)), (0.1, 0.1), _bcs(OUTFLOW, 1))
    with pytest.raises(ValueError):
        Field(np.ones((3, 6)), 0.1, _bcs(OUTFLOW, 1), mask=WallMask(1, 1))


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 2 ** 32 - 1),
       st.lists(st.sampled_from([PERIODIC, OUTFLOW, REFLECTIVE, INFLOW]), min_size=4, max_size=4))
def test_apply_boundary_idempotent(seed, kinds):
    rng = np.random.default_rng(seed)
    w = rng.normal(size=(4, 6, 5))
    bcs = {}
    for side, kind in zip(SIDES_2D, kinds):
        state = rng.normal(size=4) if kind == INFLOW else None
        bcs[side] = BoundaryCondition(kind, state)
    field = Field(w, (0.1, 0.1), bcs)
    apply_boundary(field)
    once = field.u.copy()
    apply_boundary(field)
    np.testing.assert_array_equal(field.u, once)
    np.testing.assert_array_equal(field.interior, w)


def test_coordinates_and_offset():
    field = Field(np.ones((3, 4)), 0.5, _bcs(OUTFLOW, 1), origin=[-1.0], offset=0.5)
    np.testing.assert_allclose(field.coordinates()[0], [-0.75, -0.25, 0.25, 0.75])
    f2 = Field(np.ones((4, 2, 3)), (1.0, 2.0), _bcs(OUTFLOW))
    X, Y = f2.coordinates()
    assert X.shape == (2, 3) and Y[1, 2] == 4.0


def test_fluid_states_and_totals():
    w = np.arange(4 * 4 * 3, dtype=float).reshape(4, 4, 3)
    field = Field(w, (0.5, 0.5), _bcs(OUTFLOW), mask=WallMask(2, 1))
    assert field.fluid.sum() == 12 - 2
    states = field.fluid_states()
    assert states.shape == (4, 10)
    np.testing.assert_allclose(field.totals(), states.sum(axis=1) * 0.25)
    field.set_fluid_states(states * 0 + 7.0)
    assert np.all(field.interior[:, ~field.fluid] == w[:, ~field.fluid])
    assert np.all(field.interior[:, field.fluid] == 7.0)


def test_sweep_orderings_cover_fluid_nodes():
    field = Field(np.ones((4, 5, 4)), (0.1, 0.1), _bcs(OUTFLOW), mask=WallMask(2, 2))
    n = int(field.fluid.sum())
    orders = field.sweep_orderings()
    assert len(orders) == 2
    for order in orders:
        assert sorted(order.tolist()) == list(range(n))
    one_d = Field(np.ones((3, 5)), 0.1, _bcs(OUTFLOW, 1)).sweep_orderings()
    np.testing.assert_array_equal(one_d[0], np.arange(5))


def test_directional_states_mirror_wall():
    rng = np.random.default_rng(3)
    w = rng.normal(size=(4, 8, 7))
    field = Field(w, (0.1, 0.1), _bcs(OUTFLOW), mask=WallMask(4, 3))
    apply_boundary(field)
    g = GHOST
    wx = directional_states(field, 0)
    for k in range(1, g + 1):
        np.testing.assert_array_equal(wx[[0, 2, 3], g + 4 - k, g:g + 3],
                                      field.u[[0, 2, 3], g + 4 + k, g:g + 3])
        np.testing.assert_array_equal(wx[1, g + 4 - k, g:g + 3], -field.u[1, g + 4 + k, g:g + 3])
    wy = directional_states(field, 1)
    for k in range(1, g + 1):
        np.testing.assert_array_equal(wy[2, g:g + 4, g + 3 - k], -field.u[2, g:g + 4, g + 3 + k])
    unmasked = Field(w, (0.1, 0.1), _bcs(OUTFLOW))
    assert directional_states(unmasked, 0) is unmasked.u


def test_copy_is_independent():
    field = Field(np.ones((3, 5)), 0.1, _bcs(OUTFLOW, 1))
    other = field.copy()
    other.interior[...] = 2.0
    assert np.all(field.interior == 1.0)
