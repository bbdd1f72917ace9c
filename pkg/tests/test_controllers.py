import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from traded_control.controllers import (
    AccErrorState,
    AccMpc,
    IdmParams,
    MpcParams,
    acc_error_state,
    acc_mpc_control,
    idm_acceleration,
    idm_desired_gap,
)
from traded_control.dynamics import AccModelParams, VehicleState, discretize_acc_model, step_engine_lag
from traded_control.errors import CollisionError

EXAMPLE_IDM = IdmParams(v0=30.0, t_hw=1.5, a_max=1.5, b=2.0, delta=4.0, s0=2.0)


def rollout_cost(model, p: MpcParams, x0, inputs):
    """Oracle cost: simulate the prediction model forward step by step."""
    x = np.asarray(x0, dtype=float)
    w = np.array([p.weight_dd, p.weight_dv, p.weight_a])
    total = 0.0
    for u in inputs:
        total += p.weight_u * u * u
        x = model.ad @ x + model.bd * u
        total += float(w @ (x * x))
    return total


def grid_search(model, p, x0, levels=21):
    grid = np.linspace(p.u_min, p.u_max, levels)
    best = min(itertools.product(grid, repeat=p.horizon), key=lambda us: rollout_cost(model, p, x0, us))
    return np.array(best), rollout_cost(model, p, x0, best)


# -- IDM --------------------------------------------------------------------


def test_desired_gap_examples():
    assert idm_desired_gap(0.0, 7.0, EXAMPLE_IDM) == 2.0
    assert idm_desired_gap(20.0, 0.0, EXAMPLE_IDM) == pytest.approx(32.0, abs=1e-12)
    assert idm_desired_gap(20.0, -10.0, EXAMPLE_IDM) == 2.0


def test_idm_worked_example():
    # 1.5 * (1 - (20/30)^4 - (32/100)^2), evaluated with exact fractions
    from fractions import Fraction as F

    expected = float(F(3, 2) * (1 - F(2, 3) ** 4 - F(32, 100) ** 2))
    assert idm_acceleration(20.0, 0.0, 100.0, EXAMPLE_IDM) == pytest.approx(expected, abs=1e-12)
    assert idm_acceleration(20.0, 0.0, 100.0, EXAMPLE_IDM) == pytest.approx(1.0501, abs=1e-4)


def test_idm_limits():
    assert idm_acceleration(0.0, 0.0, EXAMPLE_IDM.s0, EXAMPLE_IDM) == 0.0
    a = idm_acceleration(EXAMPLE_IDM.v0, 0.0, 1e7, EXAMPLE_IDM)
    assert -1e-6 < a < 0.0


def test_idm_rejects_collision():
    with pytest.raises(CollisionError):
        idm_acceleration(10.0, 0.0, 0.0, EXAMPLE_IDM)


@given(v=st.floats(0.5, 35), dv=st.floats(-5, 5), s=st.floats(5, 150), dvel=st.floats(0.05, 2.0))
def test_idm_decreasing_in_speed(v, dv, s, dvel):
    lo = idm_acceleration(v, dv, s, EXAMPLE_IDM, bounds=(-1e9, 1e9))
    hi = idm_acceleration(v + dvel, dv, s, EXAMPLE_IDM, bounds=(-1e9, 1e9))
    assert hi < lo


@given(v=st.floats(0.5, 35), dv=st.floats(-5, 5), s=st.floats(5, 150), ds=st.floats(0.05, 10))
def test_idm_increasing_in_gap(v, dv, s, ds):
    near = idm_acceleration(v, dv, s, EXAMPLE_IDM, bounds=(-1e9, 1e9))
    far = idm_acceleration(v, dv, s + ds, EXAMPLE_IDM, bounds=(-1e9, 1e9))
    assert far > near


def test_idm_platoon_converges_to_equilibrium():
    idm = IdmParams()
    model = AccModelParams(k_e=1.0)
    v_lead = 20.0
    # equilibrium gap at dv = 0 solves 1 - (v/v0)^delta = (s*/s)^2
    s_star = idm.s0 + v_lead * idm.t_hw
    s_eq = s_star / np.sqrt(1.0 - (v_lead / idm.v0) ** idm.delta)
    lead_pos, host = 60.0, VehicleState(0.0, 15.0, 0.0)
    for _ in range(2000):
        gap = lead_pos - host.position
        a = idm_acceleration(host.velocity, host.velocity - v_lead, gap, idm)
        host = step_engine_lag(host, a, model)
        lead_pos += v_lead * model.dt
    assert lead_pos - host.position == pytest.approx(s_eq, rel=0.01)


# -- error state -------------------------------------------------------------


def test_error_state_definitions():
    p = AccModelParams(t_hw=1.4, d0=2.0)
    e = acc_error_state(2.0 + 1.4 * 25.0, 25.0, 25.0, 0.3, p)
    assert (e.delta_d, e.delta_v, e.accel) == (0.0, 0.0, 0.3)
    assert acc_error_state(2.0 + 1.4 * 25.0 + 10.0, 25.0, 25.0, 0.0, p).delta_d == pytest.approx(10.0)
    assert acc_error_state(40.0, 25.0, 22.0, 0.0, p).delta_v == -3.0


# -- MPC ---------------------------------------------------------------------


@pytest.fixture
def model():
    return discretize_acc_model(AccModelParams(t_hw=1.4))


def test_origin_gives_zero_input(model):
    assert acc_mpc_control(AccErrorState(0.0, 0.0, 0.0), model, MpcParams()) == 0.0


def test_gap_too_large_accelerates(model):
    p = MpcParams(horizon=10)
    x0 = (5.0, 0.0, 0.0)
    u = acc_mpc_control(AccErrorState(*x0), model, p)
    # brute force over constant input sequences agrees on the sign
    grid = np.linspace(p.u_min, p.u_max, 91)
    best = min(grid, key=lambda c: rollout_cost(model, p, x0, [c] * p.horizon))
    assert u > 0 and best > 0


def test_horizon_one_closed_form(model):
    p = MpcParams(horizon=1, u_min=-100.0, u_max=100.0)
    x0 = np.array([3.0, -1.0, 0.4])
    q = np.diag([p.weight_dd, p.weight_dv, p.weight_a])
    bd = model.bd
    expected = -(bd @ q @ model.ad @ x0) / (bd @ q @ bd + p.weight_u)
    assert acc_mpc_control(AccErrorState(*x0), model, p) == pytest.approx(expected, rel=1e-10)


@pytest.mark.parametrize("horizon", [1, 2, 3])
def test_qp_matches_grid_enumeration(model, horizon):
    rng = np.random.default_rng(horizon)
    p = MpcParams(horizon=horizon, weight_u=0.1)
    step = (p.u_max - p.u_min) / 20
    for _ in range(7):
        x0 = rng.uniform([-20, -8, -3], [20, 8, 3])
        mpc = AccMpc(model, p)
        res = mpc.solve(AccErrorState(*x0))
        grid_u, grid_cost = grid_search(model, p, x0)
        qp_cost = rollout_cost(model, p, x0, res.x)
        assert qp_cost <= grid_cost + 1e-9
        assert np.max(np.abs(res.x - grid_u)) <= step
        assert mpc.cost(x0, res.x) == pytest.approx(qp_cost, rel=1e-9, abs=1e-9)


def test_cost_grows_with_horizon(model):
    # optimal costs over nested horizons can only grow: each extra stage adds
    # a non-negative term and truncating a longer plan is feasible
    rng = np.random.default_rng(7)
    for _ in range(10):
        x0 = rng.uniform([-15, -5, -2], [15, 5, 2])
        costs = []
        for n in range(1, 16):
            mpc = AccMpc(model, MpcParams(horizon=n))
            res = mpc.solve(AccErrorState(*x0))
            costs.append(mpc.cost(x0, res.x))
        assert all(b >= a - 1e-9 for a, b in zip(costs, costs[1:]))


def test_mpc_deterministic(model):
    err = AccErrorState(-4.0, 1.0, 0.2)
    assert acc_mpc_control(err, model, MpcParams()) == acc_mpc_control(err, model, MpcParams())


def test_warm_start_does_not_change_solution(model):
    mpc = AccMpc(model, MpcParams())
    errs = [AccErrorState(-4.0, 1.0, 0.2), AccErrorState(-3.5, 0.8, 0.1), AccErrorState(10.0, -2.0, -1.0)]
    for err in errs:
        warm = mpc.control(err)
        cold = acc_mpc_control(err, model, MpcParams())
        assert warm == pytest.approx(cold, abs=1e-8)


def test_on_policy_tracking_has_no_drift():
    p = AccModelParams(t_hw=1.4)
    mpc = AccMpc(discretize_acc_model(p), MpcParams())
    lead_pos, v = 100.0, 25.0
    host = VehicleState(lead_pos - (p.d0 + p.t_hw * v), v, 0.0)
    for _ in range(500):
        err = acc_error_state(lead_pos - host.position, host.velocity, v, host.acceleration, p)
        assert abs(err.delta_d) < 0.1
        host = step_engine_lag(host, mpc.control(err), p)
        lead_pos += v * p.dt


@settings(max_examples=25, deadline=None)
@given(x=st.tuples(st.floats(-30, 30), st.floats(-10, 10), st.floats(-4, 3)))
def test_input_within_bounds(x):
    p = MpcParams()
    u = acc_mpc_control(AccErrorState(*x), discretize_acc_model(AccModelParams()), p)
    assert p.u_min <= u <= p.u_max
