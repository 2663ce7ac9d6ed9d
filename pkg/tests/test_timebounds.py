import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import brute_assignments, brute_min_max, random_store
from stlplan.timebounds import (GE, LE, AffineConstraint, ConstraintStore, EndpointExpr,
                                InfeasibleStore, SolverBudgetExceeded, UnaryBound,
                                enumerate_assignments, is_feasible, max_value, min_value,
                                pick_assignment, with_constraint)


def E(const=0, *vs):
    return EndpointExpr(const, frozenset(vs))


BASE = ConstraintStore.from_bounds([(0, 35), (35, 45)])


class TestWithConstraint:
    def test_crossed_bound_is_infeasible(self):
        s = ConstraintStore.from_bounds([(0, 35)])
        child = with_constraint(s, AffineConstraint(E(0, 0), GE, 40))
        assert not is_feasible(child)
        assert is_feasible(s)

    def test_sum_feasible(self):
        assert is_feasible(BASE.with_constraint(AffineConstraint(E(0, 0, 1), LE, 60)))

    def test_strict_conversion(self):
        child = BASE.with_constraint(AffineConstraint(E(0, 1), LE, 7 - 1))
        assert child.affine[-1] == AffineConstraint(E(0, 1), LE, 6)

    def test_unknown_var(self):
        with pytest.raises(KeyError):
            BASE.with_constraint(AffineConstraint(E(0, 5), LE, 1))
        with pytest.raises(KeyError):
            BASE.with_constraint(UnaryBound(2, 0, 1))

    def test_unary_tightening(self):
        child = BASE.with_constraint(UnaryBound(0, 3, 50))
        assert child.lo == (3, 35) and child.hi == (35, 45)

    def test_bad_sense(self):
        with pytest.raises(ValueError):
            AffineConstraint(E(0, 0), "<", 3)


class TestQueries:
    def test_box_feasible(self):
        assert is_feasible(BASE)

    def test_min_max_sum(self):
        assert min_value(E(0, 0, 1), BASE) == 35
        assert max_value(E(0, 0, 1), BASE) == 80

    def test_max_after_constraint(self):
        child = BASE.with_constraint(AffineConstraint(E(0, 0, 1), LE, 60))
        assert max_value(E(0, 0), child) == 25

    def test_constant_expr(self):
        assert min_value(E(7), BASE) == 7 == max_value(E(7), BASE)

    def test_infeasible_marker(self):
        bad = BASE.with_constraint(AffineConstraint(E(0, 0), GE, 40))
        assert min_value(E(0, 0), bad) is None and max_value(E(0, 0), bad) is None

    def test_pick_lexmin(self):
        s = BASE.with_constraint(AffineConstraint(E(0, 0, 1), GE, 40))
        assert pick_assignment(s) == (0, 40)
        assert s.pick_assignment("lexmax") == (35, 45)

    def test_pick_single(self):
        s = ConstraintStore.from_bounds([(3, 10)]).with_constraint(AffineConstraint(E(0, 0), GE, 5))
        assert pick_assignment(s) == (5,)

    def test_pick_infeasible(self):
        with pytest.raises(InfeasibleStore):
            pick_assignment(BASE.with_constraint(AffineConstraint(E(0, 0), GE, 40)))

    def test_enumerate(self):
        s = ConstraintStore.from_bounds([(0, 1), (0, 1)]).with_constraint(
            AffineConstraint(E(0, 0, 1), LE, 1))
        assert enumerate_assignments(s) == [(0, 0), (0, 1), (1, 0)]

    def test_enumerate_infeasible(self):
        assert enumerate_assignments(BASE.with_constraint(AffineConstraint(E(0, 0), GE, 40))) == []

    def test_enumerate_cap(self):
        with pytest.raises(ValueError):
            enumerate_assignments(BASE, cap=10)

    def test_empty_store(self):
        s = ConstraintStore.from_bounds([])
        assert is_feasible(s) and pick_assignment(s) == () and enumerate_assignments(s) == [()]

    def test_budget(self):
        bounds = [(0, 1000)] * 8
        s = ConstraintStore.from_bounds(bounds, budget=50)
        # odd/even parity trap: x0+x1 >= 1001 and x0+x1 <= 1000 with tiny budget
        for i in range(0, 8, 2):
            s = s.with_constraints([AffineConstraint(E(0, i, i + 1), GE, 1001),
                                    AffineConstraint(E(0, i, i + 1, (i + 2) % 8), LE, 1500)])
        with pytest.raises(SolverBudgetExceeded):
            s.min_value(E(0, *range(8)))

    def test_to_dict(self):
        d = BASE.with_constraint(AffineConstraint(E(1, 0), LE, 5)).to_dict()
        assert d["feasible"] and d["affine"][0]["rhs"] == 5


@settings(max_examples=300, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_matches_enumeration(seed):
    rng = np.random.default_rng(seed)
    store = random_store(rng)
    points = brute_assignments(store)
    assert store.is_feasible() == bool(points)
    assert store.enumerate_assignments() == points
    expr = EndpointExpr(int(rng.integers(0, 3)),
                        frozenset(int(v) for v in np.flatnonzero(rng.random(store.n_vars) < 0.6)))
    assert (store.min_value(expr), store.max_value(expr)) == brute_min_max(points, expr)
    if points:
        assert store.pick_assignment() == points[0]
        assert store.pick_assignment("lexmax") == points[-1]


@settings(max_examples=150, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_monotone_and_persistent(seed):
    rng = np.random.default_rng(seed)
    parent = random_store(rng, max_affine=3)
    expr = EndpointExpr(0, frozenset(range(parent.n_vars)))
    before = (parent.is_feasible(), parent.min_value(expr), parent.max_value(expr))
    child = random_store(rng, max_affine=2)
    extra = [c for c in child.affine if max(c.expr.vars) < parent.n_vars]
    kid = parent.with_constraints(extra)
    assert set(brute_assignments(kid)) <= set(brute_assignments(parent))
    if kid.is_feasible():
        assert kid.min_value(expr) >= before[1]
        assert kid.max_value(expr) <= before[2]
    assert (parent.is_feasible(), parent.min_value(expr), parent.max_value(expr)) == before
    fresh = ConstraintStore(parent.lo, parent.hi, parent.affine)
    assert (fresh.is_feasible(), fresh.min_value(expr), fresh.max_value(expr)) == before
