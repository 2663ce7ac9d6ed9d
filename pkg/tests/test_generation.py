import math

import numpy as np
import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from stlplan.allocation import TimedWaypoint, allocate
from stlplan.decomposition import INVAR, Progress, decompose, preprocess_split
from stlplan.generation import (AnalyticPredictor, GenerationFailure, PointwiseConstraint,
                                SegmentSpec, TimePredictorConfig, active_pointwise,
                                generate_segment, predict_time, stitch)
from stlplan.stl import circle, eval_boolean, eval_robustness, horizon, parse_formula
from stlplan.timebounds import EndpointExpr
from stlplan.world import Environment

OPEN = Environment(obstacles=())
MU4 = circle("mu4", (5, 8), 0.8)


def E(const=0, *vs):
    return EndpointExpr(const, frozenset(vs))


# predictor

def test_predict_coincident():
    assert predict_time((1, 1), (1, 1)) == 0


@pytest.mark.parametrize("gamma,want", [(1.0, 4), (1.1, 5)])
def test_predict_scaling(gamma, want):
    cfg = TimePredictorConfig(gamma=gamma, v_ref=1.0)
    assert predict_time((0, 0), (4, 0), cfg) == want


def test_predict_diagonal_rounding_noise():
    # 3-4-5 triangle scaled so the raw quotient has float noise
    cfg = TimePredictorConfig(gamma=1.0, v_ref=0.1)
    assert predict_time((0.0, 0.0), (0.3, 0.4), cfg) == 5


def test_predictor_object_matches_function():
    cfg = TimePredictorConfig(gamma=1.3, v_ref=0.5)
    pred = AnalyticPredictor(cfg)
    assert pred((0, 0), (3, 1)) == predict_time((0, 0), (3, 1), cfg)


def test_predictor_config_validation():
    with pytest.raises(ValueError):
        TimePredictorConfig(gamma=0)
    with pytest.raises(ValueError):
        TimePredictorConfig(v_ref=-1)


# active_pointwise

def test_active_pointwise_clipped_to_segment():
    inv = [Progress(INVAR, E(1), E(110), MU4.negated(), 0)]
    cons = active_pointwise(inv, (), 0, 5)
    assert [c.local_t for c in cons] == [1, 2, 3, 4, 5]
    assert all(c.predicate.name == "!mu4" for c in cons)


def test_active_pointwise_disjoint():
    inv = [Progress(INVAR, E(20), E(30), MU4.negated(), 0)]
    assert active_pointwise(inv, (), 0, 5) == []


def test_active_pointwise_exact_cover_and_variables():
    inv = [Progress(INVAR, E(0, 0), E(4, 0), MU4.negated(), 0)]
    cons = active_pointwise(inv, (10,), 10, 14)
    assert [c.local_t for c in cons] == [0, 1, 2, 3, 4]


# segments

def test_segment_straight_line():
    s = generate_segment(SegmentSpec((0, 0), (4, 0), 5), OPEN)
    assert np.allclose(s, [[0, 0], [1, 0], [2, 0], [3, 0], [4, 0]])
    assert tuple(s[0]) == (0.0, 0.0) and tuple(s[-1]) == (4.0, 0.0)


def test_segment_detours_around_forbidden_disc():
    avoid = circle("d", (2, 0), 0.5).negated()
    spec = SegmentSpec((0, 0), (4, 0), 12, tuple(PointwiseConstraint(t, avoid) for t in range(12)))
    s = generate_segment(spec, OPEN)
    assert len(s) == 12
    assert np.all(np.hypot(s[:, 0] - 2, s[:, 1]) > 0.5)
    assert tuple(s[0]) == (0.0, 0.0) and tuple(s[-1]) == (4.0, 0.0)


def test_segment_single_state():
    s = generate_segment(SegmentSpec((3, 3), (3, 3), 1), OPEN)
    assert s.shape == (1, 2) and tuple(s[0]) == (3.0, 3.0)


def test_segment_avoids_env_obstacle():
    s = generate_segment(SegmentSpec((1, 5), (9, 5), 30), Environment())
    assert np.all(np.hypot(s[:, 0] - 5, s[:, 1] - 5) >= 1.5)


def test_segment_spec_validation():
    with pytest.raises(ValueError):
        SegmentSpec((0, 0), (1, 0), 1)
    with pytest.raises(ValueError):
        SegmentSpec((0, 0), (1, 0), 0)
    with pytest.raises(ValueError):
        SegmentSpec((0, 0), (1, 0), 3, (PointwiseConstraint(3, MU4),))


def test_segment_failure_carries_violations():
    # endpoint itself sits inside the forbidden disc
    avoid = circle("d", (4, 0), 0.5).negated()
    spec = SegmentSpec((0, 0), (4, 0), 5, (PointwiseConstraint(4, avoid),))
    with pytest.raises(GenerationFailure) as err:
        generate_segment(spec, OPEN)
    assert err.value.violations and err.value.violations[0].local_t == 4


def test_segment_inside_constraint_is_kept():
    goal = circle("g", (4, 0), 0.6)
    spec = SegmentSpec((4, 0), (0, 0), 9, tuple(PointwiseConstraint(t, goal) for t in range(3)))
    s = generate_segment(spec, OPEN)
    assert all(goal.margin(p) >= 0 for p in s[:3])


@settings(max_examples=80, deadline=None)
@given(st.floats(0.5, 9.5), st.floats(0.5, 9.5), st.floats(0.5, 9.5), st.floats(0.5, 9.5),
       st.floats(2, 8), st.floats(2, 8), st.floats(0.3, 1.2), st.integers(0, 20))
def test_segment_success_implies_safety(x0, y0, x1, y1, cx, cy, r, slack):
    avoid = circle("d", (cx, cy), r).negated()
    assume(avoid.margin((x0, y0)) > 0.05 and avoid.margin((x1, y1)) > 0.05)
    n = math.ceil(math.hypot(x1 - x0, y1 - y0) / 0.5) + 2 + slack
    spec = SegmentSpec((x0, y0), (x1, y1), n, tuple(PointwiseConstraint(t, avoid) for t in range(n)))
    try:
        s = generate_segment(spec, OPEN)
    except GenerationFailure:
        return
    assert len(s) == n
    assert tuple(s[0]) == spec.start and tuple(s[-1]) == spec.end
    assert all(avoid.margin(p) >= 0 for p in s)


# stitching

def test_stitch_lengths():
    wps = [TimedWaypoint((0.0, 0.0), 0), TimedWaypoint((2.0, 0.0), 5), TimedWaypoint((2.0, 2.0), 9)]
    g = stitch(wps, (), (), OPEN)
    assert len(g.states) == 10
    assert g.segment_boundaries == (0, 5, 9)
    assert g.wait_tail_length == 0
    for w in wps:
        assert tuple(g.states[w.t]) == w.state


def test_stitch_wait_tail_and_min_length():
    wps = [TimedWaypoint((1.0, 1.0), 0), TimedWaypoint((2.0, 1.0), 4)]
    inv = [Progress(INVAR, E(1), E(12), MU4.negated(), 0)]
    g = stitch(wps, (), inv, OPEN)
    assert g.wait_tail_length == 8 and len(g.states) == 13
    g = stitch(wps, (), inv, OPEN, min_length=20)
    assert len(g.states) == 20
    assert len(g.states) == 4 + g.wait_tail_length + 1
    assert np.all(g.states[4:] == g.states[4])


def test_stitch_rejects_shared_time_different_state():
    wps = [TimedWaypoint((1.0, 1.0), 0), TimedWaypoint((2.0, 1.0), 0)]
    with pytest.raises(GenerationFailure):
        stitch(wps, (), (), OPEN)


def test_stitch_case_study_is_sound():
    regions = {
        "mu1": circle("mu1", (2, 8), 0.7), "mu2": circle("mu2", (8, 8), 0.7),
        "mu3": circle("mu3", (8, 2), 0.7), "mu4": circle("mu4", (5, 8), 0.8),
        "mu5": circle("mu5", (2, 4), 0.6),
    }
    env = Environment(regions=regions)
    f = parse_formula("F[0,35](mu1 & F[35,45](mu2 & F[10,30] mu3)) & G[0,110](!mu4 & !mu5)", regions)
    d = decompose(f)
    r, i, p = preprocess_split(d)
    rng = np.random.default_rng(0)
    res = allocate((1.0, 1.0), r, i, p, d.store(), env=env, rng=rng)
    lam = res.assignment()
    g = stitch(res.waypoints, lam, i, env, rng, min_length=horizon(f) + 1, reach_set=r)
    assert len(g.states) == 111
    assert len(g.states) == res.waypoints[-1].t + g.wait_tail_length + 1
    for w in res.waypoints:
        assert tuple(g.states[w.t]) == w.state
    assert eval_boolean(f, g.states)
    assert eval_robustness(f, g.states) >= 0
