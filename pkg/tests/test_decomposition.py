import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import (all_assignments, decomposition_case, naive_bool, random_predicates,
                     random_signal)
from stlplan.decomposition import (INVAR, REACH, DecompositionBlowUp, DecompositionError,
                                   Progress, check_progresses, check_progresses_batch,
                                   decompose, preprocess_split, progresses_from_dict)
from stlplan.stl import Atom, NegAtom, Or, SignalTooShort, TrueF, circle, halfplane
from stlplan.stl.formula import F, G, U, conj
from stlplan.timebounds import EndpointExpr

MU = {f"mu{i}": circle(f"mu{i}", (i, i), 1.0) for i in range(1, 6)}


def E(const=0, *vs):
    return EndpointExpr(const, frozenset(vs))


def R(a, b, p):
    return (REACH, a, b, p.name)


def I(a, b, p):
    return (INVAR, a, b, p.name)


def shape(progresses):
    return [(p.kind, p.a, p.b, p.predicate.name) for p in progresses]


def case_study():
    m = MU
    return conj(F(0, 35, conj(Atom(m["mu1"]), F(35, 45, conj(Atom(m["mu2"]), F(10, 30, Atom(m["mu3"])))))),
                G(0, 110, conj(NegAtom(m["mu4"]), NegAtom(m["mu5"]))))


class TestDecompose:
    def test_case_study_table(self):
        d = decompose(case_study())
        reach, invar, pairs = preprocess_split(d)
        m1, m2, m3 = MU["mu1"], MU["mu2"], MU["mu3"]
        n4, n5 = MU["mu4"].negated(), MU["mu5"].negated()
        assert shape(reach) == [R(E(0, 0), E(0, 0), m1), R(E(0, 0, 1), E(0, 0, 1), m2),
                                R(E(0, 0, 1, 2), E(0, 0, 1, 2), m3),
                                R(E(0), E(0), n4), R(E(0), E(0), n5)]
        assert shape(invar) == [I(E(1), E(110), n4), I(E(1), E(110), n5)]
        assert d.bounds == ((0, 35), (35, 45), (10, 30))
        assert [p.id for p in reach + invar] == [0, 1, 2, 3, 5, 4, 6]

    def test_always_atom(self):
        d = decompose(G(2, 10, Atom(MU["mu1"])))
        assert shape(d.progresses) == [I(E(2), E(10), MU["mu1"])] and d.vars == ()

    def test_nested_example(self):
        m1, m2, m3 = (Atom(MU[k]) for k in ("mu1", "mu2", "mu3"))
        f = conj(F(5, 12, conj(F(7, 16, m1), G(2, 10, m2))), G(18, 20, F(4, 10, m3)))
        d = decompose(f)
        p1, p2, p3 = MU["mu1"], MU["mu2"], MU["mu3"]
        assert shape(d.progresses) == [R(E(0, 0, 1), E(0, 0, 1), p1), I(E(2, 0), E(10, 0), p2),
                                       R(E(18, 2), E(18, 2), p3), R(E(19, 3), E(19, 3), p3),
                                       R(E(20, 4), E(20, 4), p3)]
        assert d.bounds == ((5, 12), (7, 16), (4, 10), (4, 10), (4, 10))

    def test_eventually_point_interval_has_no_var(self):
        d = decompose(F(4, 4, Atom(MU["mu1"])))
        assert shape(d.progresses) == [R(E(4), E(4), MU["mu1"])] and d.vars == ()

    def test_outer_eventually_point_shift(self):
        d = decompose(F(3, 3, G(1, 2, Atom(MU["mu1"]))))
        assert shape(d.progresses) == [I(E(4), E(5), MU["mu1"])]

    def test_until_base(self):
        d = decompose(U(2, 6, Atom(MU["mu1"]), Atom(MU["mu2"])))
        assert shape(d.progresses) == [I(E(0), E(0, 0), MU["mu1"]), R(E(0, 0), E(0, 0), MU["mu2"])]
        assert d.bounds == ((2, 6),)

    def test_until_prolongs_left(self):
        f = U(0, 5, G(1, 3, Atom(MU["mu1"])), F(2, 4, Atom(MU["mu2"])))
        d = decompose(f)
        assert shape(d.progresses) == [I(E(1), E(3, 0), MU["mu1"]), R(E(0, 0, 1), E(0, 0, 1), MU["mu2"])]

    def test_true_yields_nothing(self):
        assert decompose(TrueF()).progresses == ()
        assert decompose(F(0, 3, TrueF())).vars == ()

    def test_always_merges_constant_invariances(self):
        d = decompose(G(2, 5, conj(G(1, 3, Atom(MU["mu1"])), Atom(MU["mu2"]))))
        assert shape(d.progresses) == [I(E(3), E(8), MU["mu1"]), I(E(2), E(5), MU["mu2"])]

    def test_always_variable_invariance_note(self):
        d = decompose(G(0, 2, U(0, 3, Atom(MU["mu1"]), Atom(MU["mu2"]))))
        assert len(d.vars) == 3 and d.notes

    def test_rejects_or(self):
        with pytest.raises(DecompositionError):
            decompose(Or(Atom(MU["mu1"]), Atom(MU["mu2"])))

    def test_rejects_until_violation(self):
        with pytest.raises(DecompositionError):
            decompose(U(0, 3, F(0, 1, Atom(MU["mu1"])), Atom(MU["mu2"])))

    def test_blow_up(self):
        with pytest.raises(DecompositionBlowUp):
            decompose(G(0, 100, F(0, 3, Atom(MU["mu1"]))))

    def test_json_round_trip(self):
        d = decompose(case_study())
        assert progresses_from_dict(d.to_dict(), {}) == d


class TestSplit:
    def test_case_study_row(self):
        n4 = MU["mu4"].negated()
        reach, invar, pairs = preprocess_split([Progress(INVAR, E(0), E(110), n4, 0)])
        assert shape(reach) == [R(E(0), E(0), n4)] and shape(invar) == [I(E(1), E(110), n4)]
        assert pairs[0].reach_id == reach[0].id and pairs[0].invar_id == invar[0].id

    def test_point_residual_dropped(self):
        reach, invar, pairs = preprocess_split([Progress(INVAR, E(5), E(5), MU["mu1"], 0)])
        assert shape(reach) == [R(E(5), E(5), MU["mu1"])] and invar == ()
        assert pairs[0].invar_id is None

    def test_symbolic(self):
        reach, invar, _ = preprocess_split([Progress(INVAR, E(2, 0), E(10, 0), MU["mu2"], 0)])
        assert shape(reach) == [R(E(2, 0), E(2, 0), MU["mu2"])]
        assert shape(invar) == [I(E(3, 0), E(10, 0), MU["mu2"])]


class TestCheck:
    def test_empty(self):
        assert check_progresses(np.zeros((1, 2)), [], ())

    def test_reach_at_var(self):
        p = Progress(REACH, E(0, 0), E(0, 0), halfplane("x", (1, 0), 0.0), 0)
        s = np.array([[-1, 0]] * 3 + [[0.2, 0]] + [[-1, 0]])
        assert check_progresses(s, [p], (3,))
        assert not check_progresses(s, [p], (2,))

    def test_too_short(self):
        p = Progress(INVAR, E(0), E(9), MU["mu1"], 0)
        with pytest.raises(SignalTooShort):
            check_progresses(np.zeros((3, 2)), [p], ())
        with pytest.raises(SignalTooShort):
            check_progresses_batch(np.zeros((3, 2)), [p], np.zeros((1, 0)))


@settings(max_examples=120, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_decomposition_matches_semantics(seed):
    f, d, s = decomposition_case(seed)
    assignments = all_assignments(d.bounds)
    ok = check_progresses_batch(s, d, assignments)
    assert naive_bool(f, s, 0) == bool(ok.any())


@settings(max_examples=80, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_batch_matches_scalar_check(seed):
    f, d, s = decomposition_case(seed, max_vars=3)
    assignments = all_assignments(d.bounds)
    rng = np.random.default_rng(seed)
    rows = assignments[rng.choice(len(assignments), size=min(25, len(assignments)), replace=False)]
    assert list(check_progresses_batch(s, d, rows)) == [check_progresses(s, d, tuple(r)) for r in rows]


@settings(max_examples=80, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_hygiene_and_endpoint_sanity(seed):
    f, d, s = decomposition_case(seed)
    ids = [v.id for v in d.vars]
    assert ids == list(range(len(ids)))
    used = set().union(*[p.a.vars | p.b.vars for p in d.progresses]) if d.progresses else set()
    assert used <= set(ids)
    assignments = all_assignments(d.bounds)
    for p in d.progresses:
        assert p.a.vars <= p.b.vars
        lo = p.a.constant + assignments[:, sorted(p.a.vars)].sum(axis=1)
        hi = p.b.constant + assignments[:, sorted(p.b.vars)].sum(axis=1)
        assert np.all(lo <= hi)


@settings(max_examples=80, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_split_soundness(seed):
    f, d, s = decomposition_case(seed)
    reach, invar, pairs = preprocess_split(d)
    byid = {p.id: p for p in reach + invar}
    assignments = all_assignments(d.bounds)
    originals = [p for p in d.progresses if p.kind == INVAR]
    for orig, pair in zip(originals, pairs):
        parts = [byid[pair.reach_id]] + ([byid[pair.invar_id]] if pair.invar_id is not None else [])
        assert list(check_progresses_batch(s, parts, assignments)) == \
            list(check_progresses_batch(s, [orig], assignments))


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(0, 5), st.integers(0, 5), st.integers(0, 3), st.integers(0, 4))
def test_always_merge_soundness(seed, a, width, c, dwidth):
    rng = np.random.default_rng(seed)
    p = random_predicates(rng, 1)[0]
    b, d = a + width, c + dwidth
    s = random_signal(rng, b + d + 1)
    merged = [Progress(INVAR, E(c + a), E(d + b), p, 0)]
    copies = [Progress(INVAR, E(c + k), E(d + k), p, k) for k in range(a, b + 1)]
    none = np.zeros((1, 0), dtype=np.int64)
    assert check_progresses_batch(s, merged, none)[0] == check_progresses_batch(s, copies, none)[0]
