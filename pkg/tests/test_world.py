import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from stlplan.stl import circle, halfplane
from stlplan.world import (Disc, DynamicsParams, Environment, ExecutionConfig, margin,
                           step_dynamics, track)

P = DynamicsParams()


def test_step_integrates_position_then_velocity():
    out = step_dynamics([0, 0, 1, 0], [0, 0], P)
    assert out.tolist() == [1.0, 0.0, 1.0, 0.0]


def test_step_clamps_action():
    out = step_dynamics([0, 0, 0, 0], [3, 4], P)
    assert np.allclose(out[2:], [0.3, 0.4])
    assert np.hypot(*out[2:]) == pytest.approx(P.a_max)


def test_step_zero_is_fixed_point():
    assert step_dynamics(np.zeros(4), np.zeros(2), P).tolist() == [0.0] * 4


def test_step_clamps_speed():
    out = step_dynamics([0, 0, 0.9, 0], [0.5, 0], P)
    assert np.hypot(*out[2:]) == pytest.approx(P.v_max)


def test_bad_params_rejected():
    with pytest.raises(ValueError):
        DynamicsParams(a_max=0)
    with pytest.raises(ValueError):
        ExecutionConfig(k=0)
    with pytest.raises(ValueError):
        ExecutionConfig(kp=-1)


@pytest.mark.parametrize("pred,p,want", [
    (circle("a", (5, 5), 1.0), (5, 5), 1.0),
    (circle("a", (5, 5), 1.0, inside=False), (5, 5), -1.0),
    (halfplane("h", (1, 0), 3.0), (4, 0), 1.0),
])
def test_margin_examples(pred, p, want):
    assert margin(pred, p) == want


def test_stationary_plan_stays_put():
    plan = np.tile([3.0, 3.0], (8, 1))
    traj = track(plan, (3.0, 3.0, 0.0, 0.0))
    assert np.array_equal(traj.signal, plan)
    assert not traj.actions.any()


@pytest.mark.parametrize("k", [1, 2, 3])
def test_action_count_and_signal_length(k):
    plan = np.column_stack([np.linspace(1, 4, 7), np.full(7, 1.0)])
    traj = track(plan, plan[0], ExecutionConfig(k=k))
    assert len(traj.actions) == k * (len(plan) - 1)
    assert len(traj.states) == len(traj.actions) + 1
    assert traj.signal.shape == plan.shape


def test_straight_line_is_tracked_closely():
    plan = np.column_stack([np.linspace(1, 5, 9), np.full(9, 2.0)])
    traj = track(plan, plan[0])
    # starting from rest the first steps lag by at most one step of travel
    assert np.abs(traj.signal - plan).max() <= 0.5 + 1e-12
    # once the acceleration bound stops binding the plan is matched exactly
    assert np.allclose(traj.signal[3:], plan[3:])


def test_start_must_match_plan():
    with pytest.raises(ValueError):
        track(np.zeros((3, 2)), (1.0, 0.0))


def test_positions_are_clamped_and_counted():
    plan = np.column_stack([np.linspace(9.0, 9.9, 4), np.full(4, 5.0)])
    plan = np.vstack([plan, [[9.9, 5.0]]])
    env = Environment(bounds=(0, 0, 9.95, 10), obstacles=())
    traj = track(plan, (9.0, 5.0, 1.0, 0.0), env=env)
    assert traj.clamp_events > 0
    assert all(env.in_bounds(p) for p in traj.states[:, :2])


@settings(max_examples=60, deadline=None)
@given(st.lists(st.tuples(st.floats(0, 10), st.floats(0, 10)), min_size=2, max_size=12),
       st.integers(1, 3))
def test_bounds_hold_on_every_step(points, k):
    plan = np.array(points)
    traj = track(plan, plan[0], ExecutionConfig(k=k), P, Environment())
    assert np.all(np.hypot(*traj.actions.T) <= P.a_max + 1e-12)
    assert np.all(np.hypot(*traj.states[:, 2:].T) <= P.v_max + 1e-12)
    assert traj.signal.shape == plan.shape
    again = track(plan, plan[0], ExecutionConfig(k=k), P, Environment())
    assert np.array_equal(traj.states, again.states)


def test_trajectory_rows():
    plan = np.array([[1.0, 1.0], [1.5, 1.0], [2.0, 1.0]])
    rows = track(plan, plan[0], ExecutionConfig(k=2)).to_rows()
    assert len(rows) == 5 and len(rows[0]) == 7
    assert [r[0] for r in rows] == [0.0, 0.5, 1.0, 1.5, 2.0]


def test_environment_json_round_trip(tmp_path):
    env = Environment(regions={"a": circle("a", (2, 2), 0.5), "b": circle("b", (7, 7), 0.6, inside=False)})
    path = tmp_path / "env.json"
    env.save(path)
    doc = json.loads(path.read_text())
    assert doc["bounds"] == [[0.0, 10.0], [0.0, 10.0]]
    assert doc["obstacles"] == [{"c": [5.0, 5.0], "r": 1.5}]
    assert doc["regions"]["a"] == {"kind": "circle-inside", "c": [2.0, 2.0], "r": 0.5}
    back = Environment.load(path)
    assert back.to_dict() == env.to_dict()


def test_environment_region_kind_defaults_to_inside():
    env = Environment.from_dict({"regions": {"g": {"c": [1, 1], "r": 0.5}}})
    assert env.regions["g"].margin((1, 1)) == 0.5


def test_environment_validation():
    with pytest.raises(ValueError):
        Environment(regions={"far": circle("far", (20, 20), 1.0)})
    with pytest.raises(ValueError):
        Environment(regions={"x": circle("y", (2, 2), 1.0)})
    with pytest.raises(ValueError):
        Environment(obstacles=(Disc((30, 30), 1.0),))
    with pytest.raises(ValueError):
        Environment(bounds=(0, 0, 0, 5))


def test_collision_check():
    env = Environment()
    assert not env.collision_free((5, 5))
    assert env.collision_free((1, 1))
    assert not env.collision_free((5, 6.8), clearance=0.5)
