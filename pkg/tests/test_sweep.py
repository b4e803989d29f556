import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from oracles import ideal_pressure, random_sweep_case, total_variance
from sweepweno.grid import OUTFLOW, PERIODIC, BoundaryCondition, Field, WallMask
from sweepweno.state import PressureFunctional
from sweepweno.sweep import (NEGATIVE_NEIGHBOR, POSITIVE_NEIGHBOR, SWEEP_I, SWEEP_II,
                             InfeasibleError, NonTerminationError, SweepStats, apply_limiter,
                             blend_parameter, density_sweep, node_adjust, pressure_sweep,
                             snake_order)

AIR = PressureFunctional(1.4)
AIR0 = PressureFunctional(1.4, eps=0.0)


# ----------------------------------------------------------------------------
# density sweep

@pytest.mark.parametrize("rho, eps, expected, moved", [
    ([-1.0, 2.0, 3.0], 0.0, [0.0, 1.0, 3.0], 1),
    ([1.0, 1.0, 1.0], 0.0, [1.0, 1.0, 1.0], 0),
    ([3.0, -1.0], 0.0, [2.0, 0.0], 1),
    ([-1.0, -1.0, 5.0], 0.0, [0.0, 0.0, 3.0], 2),
    ([5.0, -1.0, -1.0], 0.0, [3.0, 0.0, 0.0], 3),
])
def test_density_sweep_examples(rho, eps, expected, moved):
    arr = np.array(rho)
    assert density_sweep(arr, eps) == moved
    np.testing.assert_array_equal(arr, expected)


def test_density_sweep_accepts_lists():
    rho = [-1.0, 2.0, 3.0]
    density_sweep(rho, 0.0)
    assert rho == [0.0, 1.0, 3.0]


@pytest.mark.parametrize("rho", [[-1.0, 1.0], [0.0, 0.0], [1e-13, 1e-13]])
def test_density_sweep_infeasible(rho):
    with pytest.raises(InfeasibleError):
        density_sweep(np.array(rho), 1e-13)


def test_density_sweep_needs_data():
    with pytest.raises(ValueError):
        density_sweep(np.array([]), 0.0)


@settings(max_examples=300, deadline=None)
@given(st.lists(st.floats(-10.0, 10.0), min_size=1, max_size=60), st.sampled_from([0.0, 1e-13, 0.1]))
def test_density_sweep_properties(values, eps):
    rho = np.array(values)
    if not rho.sum() / rho.size > eps:
        return
    before = rho.copy()
    density_sweep(rho, eps)
    assert np.all(rho >= eps)
    assert abs(rho.sum() - before.sum()) <= 1e-13 * np.abs(before).sum() + 1e-300
    # entries that were already fine are never lowered below eps
    assert np.all(rho[before >= eps] >= eps)


# ----------------------------------------------------------------------------
# node adjustment

def test_node_adjust_linear_segment():
    u1, u2, ubar = np.array([1.0, 0, -1]), np.array([1.0, 0, 2]), np.array([1.0, 0, 5])
    t, branch = blend_parameter(u1, u2, ubar, AIR0)
    assert branch == POSITIVE_NEIGHBOR
    assert t == pytest.approx(1 / 3, abs=1e-12)
    new = node_adjust(u1, u2, ubar, AIR0)
    np.testing.assert_allclose(new, [1, 0, 0], atol=1e-12)
    assert AIR0(new) >= 0.0


def test_node_adjust_curved_segment():
    u1, u2, ubar = np.array([1.0, 2, 1]), np.array([1.0, 0, 1]), np.array([1.0, 0, 5])
    t, branch = blend_parameter(u1, u2, ubar, AIR0)
    assert branch == POSITIVE_NEIGHBOR
    assert t == pytest.approx(0.5, abs=1e-12)
    new = node_adjust(u1, u2, ubar, AIR0)
    np.testing.assert_allclose(new, [1, 1, 1], atol=1e-12)
    assert AIR0(new) == pytest.approx(0.2, abs=1e-12)
    # Jensen slack: a fine scan shows p crosses zero well before t = 0.5
    ts = np.linspace(0, 1, 10001)
    ps = np.array([ideal_pressure((1 - s) * u1 + s * u2, 1.4) for s in ts])
    assert ts[np.argmax(ps >= 0)] < 0.5


def test_node_adjust_negative_neighbour():
    u1, u2, ubar = np.array([1.0, 0, -1]), np.array([1.0, 0, -2]), np.array([1.0, 0, 5])
    p1, pbar = ideal_pressure(u1, 1.4), ideal_pressure(ubar, 1.4)
    t1 = (p1 - 0.0) / (p1 - pbar)
    ratio = np.linalg.norm(u1 - ubar) / np.linalg.norm(u1 - u2)
    assert t1 == pytest.approx(1 / 6)
    assert ratio == pytest.approx(6.0)
    t, branch = blend_parameter(u1, u2, ubar, AIR0)
    assert branch == NEGATIVE_NEIGHBOR
    assert t == min(t1 * ratio, 0.25) == 0.25
    np.testing.assert_allclose(node_adjust(u1, u2, ubar, AIR0), [1, 0, -1.25])


def test_node_adjust_small_negative_branch_t():
    # norm ratio small enough that the 1/4 cap does not bind
    u1, u2, ubar = np.array([1.0, 0, -0.1]), np.array([1.0, 0, -5.0]), np.array([1.0, 0, 1.0])
    t, branch = blend_parameter(u1, u2, ubar, AIR0)
    p1, pbar = ideal_pressure(u1, 1.4), ideal_pressure(ubar, 1.4)
    expected = p1 / (p1 - pbar) * np.linalg.norm(u1 - ubar) / np.linalg.norm(u1 - u2)
    assert branch == NEGATIVE_NEIGHBOR
    assert t == pytest.approx(expected) and t < 0.25


def test_node_adjust_coincident_neighbour_is_noop():
    u = np.array([1.0, 0, -1])
    t, branch = blend_parameter(u, u.copy(), np.array([1.0, 0, 5]), AIR0)
    assert (t, branch) == (0.0, NEGATIVE_NEIGHBOR)
    np.testing.assert_array_equal(node_adjust(u, u.copy(), np.array([1.0, 0, 5]), AIR0), u)


def test_positive_branch_survives_large_energy():
    # jet-like states: pressure is a small difference of large energies
    f = PressureFunctional(5.0 / 3.0)
    rho, v = 5.0, 800.0
    u2 = np.array([rho, rho * v, 0.0, 0.5 * rho * v * v + 0.4127 / (2.0 / 3.0)])
    u1 = u2.copy()
    u1[3] -= 1.0  # p(u1) = -2/3 + 0.4127
    t, _ = blend_parameter(u1, u2, u2, f)
    assert 0.0 < t < 1.0
    assert f((1 - t) * u1 + t * u2) >= f.eps


# ----------------------------------------------------------------------------
# pressure sweep

def test_pressure_sweep_admissible_input_untouched():
    w = np.array([[1.0, 2.0, 3.0], [0.0, 1.0, -1.0], [1.0, 2.0, 3.0]])
    before = w.tobytes()
    r = pressure_sweep(w, AIR)
    assert r.full_sweeps == 0
    assert w.tobytes() == before


def test_pressure_sweep_single_negative_point():
    w = np.array([[1.0, 1.0, 1.0], [0.0, 0.0, 0.0], [2.0, -0.5, 2.0]])
    sums = w.sum(axis=1)
    r = pressure_sweep(w, AIR)
    assert r.full_sweeps == 1
    assert np.all(ideal_pressure(w, 1.4) >= AIR.eps)
    np.testing.assert_allclose(w.sum(axis=1), sums, rtol=1e-13, atol=1e-15)


def test_pressure_sweep_two_full_sweeps():
    # the backward pass repairs the right state but leaves the left one negative
    w = np.array([[1.7, 1.5], [-1.0, 0.3], [1.1, -0.9]])
    assert pressure_sweep(w.copy(), AIR).full_sweeps == 2
    with pytest.raises(NonTerminationError) as info:
        pressure_sweep(w.copy(), AIR, max_full_sweeps=1)
    err = info.value
    assert err.full_sweeps == 1 and err.worst_pressure < AIR.eps and err.worst_index in (0, 1)


def test_pressure_sweep_infeasible_mean():
    w = np.array([[1.0, 1.0], [0.0, 0.0], [1.0, -1.0]])
    with pytest.raises(InfeasibleError):
        pressure_sweep(w, AIR)


def test_pressure_sweep_needs_density_swept_input():
    w = np.array([[1.0, -0.5], [0.0, 0.0], [1.0, 1.0]])
    with pytest.raises(ValueError):
        pressure_sweep(w, AIR)
    with pytest.raises(ValueError):
        pressure_sweep(w[0], AIR)


def test_pressure_sweep_orderings_alternate():
    w = np.array([[1.7, 1.5], [-1.0, 0.3], [1.1, -0.9]])
    seen = []
    pressure_sweep(w, AIR, orderings=[np.array([0, 1]), np.array([1, 0])],
                   on_adjust=lambda ev: seen.append((ev.index, ev.neighbor)))
    # first full sweep uses [0, 1], the second [1, 0]
    assert seen[0] == (1, 0)
    assert seen[-1][0] == 0


@settings(max_examples=200, deadline=None)
@given(st.integers(0, 2 ** 32 - 1))
def test_pressure_sweep_invariants(seed):
    rng = np.random.default_rng(seed)
    w = random_sweep_case(rng, n_max=20)
    sums = w.sum(axis=1)
    var0 = total_variance(w)
    events = []
    pressure_sweep(w, AIR, on_adjust=events.append)
    assert np.all(ideal_pressure(w, 1.4) >= AIR.eps)
    assert np.all(w[0] >= AIR.eps)
    scale = np.abs(w).sum(axis=1)
    assert np.all(np.abs(w.sum(axis=1) - sums) <= 1e-13 * scale)
    assert total_variance(w) <= var0 * (1 + 1e-12)
    for ev in events:
        before = ideal_pressure(ev.u_neg, 1.4) + ideal_pressure(ev.u_nbr, 1.4)
        after = ideal_pressure(ev.u_neg_new, 1.4) + ideal_pressure(ev.u_nbr_new, 1.4)
        assert after >= before - 1e-12
        assert (np.linalg.norm(ev.u_neg_new - ev.u_nbr_new)
                <= np.linalg.norm(ev.u_neg - ev.u_nbr) * (1 + 1e-12))
        assert 0.0 < ev.t < 1.0
        if ev.branch == NEGATIVE_NEIGHBOR:
            assert ev.t <= 0.25


# ----------------------------------------------------------------------------
# orderings

@pytest.mark.parametrize("variant, expected", [
    (SWEEP_I, [(1, 1), (2, 1), (2, 2), (1, 2)]),
    (SWEEP_II, [(1, 1), (1, 2), (2, 2), (2, 1)]),
])
def test_snake_order_2x2(variant, expected):
    assert [tuple(ij + 1) for ij in snake_order(2, 2, variant)] == expected


@pytest.mark.parametrize("variant", [SWEEP_I, SWEEP_II])
def test_snake_single_column(variant):
    np.testing.assert_array_equal(snake_order(1, 4, variant), [[0, 0], [0, 1], [0, 2], [0, 3]])


@settings(max_examples=50, deadline=None)
@given(st.integers(1, 12), st.integers(1, 12), st.sampled_from([SWEEP_I, SWEEP_II]))
def test_snake_order_is_adjacent_permutation(nx, ny, variant):
    order = snake_order(nx, ny, variant)
    assert len({tuple(ij) for ij in order}) == nx * ny
    steps = np.abs(np.diff(order, axis=0)).sum(axis=1)
    assert np.all(steps == 1)


def test_snake_order_errors():
    with pytest.raises(ValueError):
        snake_order(0, 3)
    with pytest.raises(ValueError):
        snake_order(2, 2, "III")


# ----------------------------------------------------------------------------
# field-level limiter

def _periodic_1d(w):
    return Field(w, 0.1, {"left": BoundaryCondition(PERIODIC), "right": BoundaryCondition(PERIODIC)})


def test_apply_limiter_noop_on_admissible_field():
    w = np.array([[1.0] * 6, [0.5] * 6, [2.0] * 6])
    field = _periodic_1d(w)
    before = field.u.tobytes()
    stats = SweepStats()
    apply_limiter(field, AIR, stats)
    assert field.u.tobytes() == before
    assert stats.pressure_sweeps_total == 0 and stats.stages_with_sweeps == 0
    assert stats.limiter_calls == 1


def test_apply_limiter_repairs_density_and_pressure():
    w = np.array([[1.0, 1.0, -0.2, 1.0, 1.0, 1.0],
                  [0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
                  [2.0, 2.0, 0.5, -0.1, 2.0, 2.0]])
    field = _periodic_1d(w)
    totals = field.totals()
    ghosts = field.u[:, :3].copy()
    stats = SweepStats()
    apply_limiter(field, AIR, stats)
    inner = field.interior
    assert np.all(inner[0] >= AIR.eps)
    assert np.all(ideal_pressure(inner, 1.4) >= AIR.eps)
    np.testing.assert_allclose(field.totals(), totals, rtol=1e-13, atol=1e-15)
    np.testing.assert_array_equal(field.u[:, :3], ghosts)
    assert stats.density_sweeps_total == 1 and stats.pressure_sweeps_total >= 1
    assert stats.pressure_sweeps_max_per_stage == stats.pressure_sweeps_this_call


def test_apply_limiter_2d_with_mask_leaves_solid_alone():
    nx, ny = 6, 5
    w = np.zeros((4, nx, ny))
    w[0] = 1.0
    w[3] = 2.5
    w[3, 4, 3] = -0.5
    w[3, 0, 0] = -7.0  # inside the solid block; must not be touched
    bcs = {s: BoundaryCondition(OUTFLOW) for s in ("left", "right", "bottom", "top")}
    field = Field(w, (0.1, 0.1), bcs, mask=WallMask(2, 2))
    stats = SweepStats()
    apply_limiter(field, AIR, stats)
    assert field.interior[3, 0, 0] == -7.0
    assert np.all(ideal_pressure(field.fluid_states(), 1.4) >= AIR.eps)
    assert stats.pressure_sweeps_total >= 1


def test_sweep_stats_average_and_max():
    stats = SweepStats()
    for sweeps in (0, 2, 1, 0, 3):
        stats.record_stage(False, sweeps)
    assert stats.pressure_sweeps_total == 6
    assert stats.stages_with_sweeps == 3
    assert stats.pressure_sweeps_average == 2.0
    assert stats.pressure_sweeps_max_per_stage == 3
    assert stats.limiter_calls == 5
    assert SweepStats().pressure_sweeps_average == 0.0
    assert set(stats.as_dict()) >= {"pressure_sweeps_total", "density_sweeps_total"}
