"""Semantics-based decomposition of disjunction-free STL into progresses.

A reach progress ``R(a, b, mu)`` asks for some step in ``[a, b]`` where ``mu``
holds; an invariance ``I(a, b, mu)`` asks for ``mu`` at every step of
``[a, b]``.  Endpoints are affine 0/1 combinations of integer time variables,
each of which carries one unary bound.  The conjunction of all progresses,
quantified existentially over the bounded variables, is equivalent to the
formula being satisfied at step 0.
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Iterable, NamedTuple, Sequence

import numpy as np

from .stl.formula import (And, Always, Atom, Eventually, Formula, FormulaError, NegAtom,
                          Or, TrueF, Until, has_or, validate_pnf, walk)
from .stl.predicates import Predicate
from .stl.semantics import SignalTooShort, as_signal
from .timebounds import ConstraintStore, EndpointExpr

REACH = "reach"
INVAR = "invar"

DEFAULT_MAX_VARS = 64


class DecompositionError(FormulaError):
    pass


class DecompositionBlowUp(DecompositionError):
    """Too many time variables; raised rather than building a huge store."""


@dataclass(frozen=True)
class TimeVar:
    id: int
    lo: int
    hi: int


@dataclass(frozen=True)
class Progress:
    kind: str
    a: EndpointExpr
    b: EndpointExpr
    predicate: Predicate
    id: int = -1

    @property
    def is_reach(self) -> bool:
        return self.kind == REACH

    def window(self, assignment: Sequence[int]) -> tuple[int, int]:
        return self.a(assignment), self.b(assignment)

    def shifted(self, constant: int = 0, var: int | None = None) -> "Progress":
        return replace(self, a=self.a.plus(constant, var), b=self.b.plus(constant, var))

    def __str__(self) -> str:
        tag = "R" if self.kind == REACH else "I"
        return f"{tag}({self.a},{self.b},{self.predicate.name})"

    def to_dict(self) -> dict:
        return {"id": self.id, "kind": self.kind, "a": self.a.to_dict(), "b": self.b.to_dict(),
                "predicate": self.predicate.name, **{"shape": self.predicate.to_dict()}}


@dataclass(frozen=True)
class DecompositionResult:
    progresses: tuple[Progress, ...]
    vars: tuple[TimeVar, ...]
    notes: tuple[str, ...] = ()

    @property
    def bounds(self) -> tuple[tuple[int, int], ...]:
        return tuple((v.lo, v.hi) for v in self.vars)

    def store(self, budget: int | None = None) -> ConstraintStore:
        if budget is None:
            return ConstraintStore.from_bounds(self.bounds)
        return ConstraintStore.from_bounds(self.bounds, budget=budget)

    def to_dict(self) -> dict:
        return {
            "vars": [{"id": v.id, "lo": v.lo, "hi": v.hi} for v in self.vars],
            "progresses": [p.to_dict() for p in self.progresses],
            "notes": list(self.notes),
        }


@dataclass(frozen=True)
class SplitPair:
    reach_id: int
    invar_id: int | None


class SplitResult(NamedTuple):
    reach: tuple[Progress, ...]
    invar: tuple[Progress, ...]
    pairs: tuple[SplitPair, ...]


@dataclass
class _Builder:
    max_vars: int
    bounds: list[tuple[int, int]] = field(default_factory=list)
    notes: list[str] = field(default_factory=list)

    def fresh(self, lo: int, hi: int) -> int:
        if len(self.bounds) >= self.max_vars:
            raise DecompositionBlowUp(
                f"decomposition needs more than {self.max_vars} time variables")
        self.bounds.append((lo, hi))
        return len(self.bounds) - 1


def _literal(f: Formula) -> Predicate | None:
    if isinstance(f, Atom):
        return f.predicate
    if isinstance(f, NegAtom):
        return f.effective
    return None


def _trivial(f: Formula) -> bool:
    """True when ``f`` mentions no predicate, i.e. it is built from TRUE only."""
    return not any(isinstance(n, (Atom, NegAtom)) for _, n in walk(f))


def _const(c: int) -> EndpointExpr:
    return EndpointExpr(c)


def _rec(f: Formula, ctx: _Builder) -> list[Progress]:
    if isinstance(f, TrueF):
        return []
    lit = _literal(f)
    if lit is not None:
        return [Progress(INVAR, _const(0), _const(0), lit)]
    if isinstance(f, Or):
        raise DecompositionError("disjunction found; apply to_dnf first")
    if isinstance(f, And):
        return _rec(f.left, ctx) + _rec(f.right, ctx)
    if isinstance(f, Eventually):
        a, b = f.interval.a, f.interval.b
        if _trivial(f.child):
            return []
        lit = _literal(f.child)
        if a == b:
            if lit is not None:
                return [Progress(REACH, _const(a), _const(a), lit)]
            return [p.shifted(a) for p in _rec(f.child, ctx)]
        lam = ctx.fresh(a, b)
        if lit is not None:
            e = EndpointExpr(0, frozenset([lam]))
            return [Progress(REACH, e, e, lit)]
        return [p.shifted(var=lam) for p in _rec(f.child, ctx)]
    if isinstance(f, Always):
        a, b = f.interval.a, f.interval.b
        if _trivial(f.child):
            return []
        lit = _literal(f.child)
        if lit is not None:
            return [Progress(INVAR, _const(a), _const(b), lit)]
        return _always(a, b, f.child, ctx)
    if isinstance(f, Until):
        a, b = f.interval.a, f.interval.b
        if a == b:
            lam, shift = None, a
        else:
            lam, shift = ctx.fresh(a, b), 0
        out = []
        for p in _rec(f.left, ctx):
            if p.kind != INVAR:
                raise DecompositionError("left side of an until produced a reach progress")
            out.append(replace(p, b=p.b.plus(shift, lam)))
        lit = _literal(f.right)
        if lit is not None:
            e = EndpointExpr(shift, frozenset() if lam is None else frozenset([lam]))
            out.append(Progress(REACH, e, e, lit))
        else:
            out.extend(p.shifted(shift, lam) for p in _rec(f.right, ctx))
        return out
    raise TypeError(f"not a formula: {f!r}")


def _always(a: int, b: int, child: Formula, ctx: _Builder) -> list[Progress]:
    # G[a,b] phi is the conjunction of F[k,k] phi over k; constant invariances
    # of those copies tile into one window, everything else is copied per k
    out: list[Progress] = []
    merged: list[Progress] = []
    variable_invar = False
    for k in range(a, b + 1):
        for p in _rec(child, ctx):
            constant_invar = p.kind == INVAR and p.a.is_constant and p.b.is_constant
            if constant_invar:
                if k == a:
                    merged.append(Progress(INVAR, _const(p.a.constant + a),
                                           _const(p.b.constant + b), p.predicate))
                continue
            if p.kind == INVAR:
                variable_invar = True
            out.append(p.shifted(k))
    if variable_invar:
        ctx.notes.append(
            f"G[{a},{b}] holds invariances with variable endpoints; kept {b - a + 1} per-step copies")
    return merged + out


def decompose(f: Formula, max_vars: int = DEFAULT_MAX_VARS) -> DecompositionResult:
    """Decompose a disjunction-free formula into progresses over time variables.

    Variables are numbered in pre-order: an operator takes its variable before
    its operands are visited, and left operands before right ones.
    """
    if has_or(f):
        raise DecompositionError("disjunction found; apply to_dnf first")
    problems = validate_pnf(f)
    if problems:
        raise DecompositionError("; ".join(problems))
    ctx = _Builder(max_vars)
    raw = _rec(f, ctx)
    progresses = tuple(replace(p, id=i) for i, p in enumerate(raw))
    tvars = tuple(TimeVar(i, lo, hi) for i, (lo, hi) in enumerate(ctx.bounds))
    return DecompositionResult(progresses, tvars, tuple(ctx.notes))


def _empty_residual(head_a: EndpointExpr, b: EndpointExpr) -> bool:
    return head_a.vars == b.vars and head_a.constant >= b.constant


def preprocess_split(d: DecompositionResult | Iterable[Progress]) -> SplitResult:
    """Split each invariance into a head reach at its start plus a residual.

    Ids are renumbered in emission order: a reach keeps its place, an
    invariance emits its head then its residual.
    """
    progresses = d.progresses if isinstance(d, DecompositionResult) else tuple(d)
    reach: list[Progress] = []
    invar: list[Progress] = []
    pairs: list[SplitPair] = []
    next_id = 0
    for p in progresses:
        if p.kind == REACH:
            reach.append(replace(p, id=next_id))
            next_id += 1
            continue
        head = Progress(REACH, p.a, p.a, p.predicate, next_id)
        reach.append(head)
        next_id += 1
        residual_id = None
        if not _empty_residual(p.a, p.b):
            invar.append(Progress(INVAR, p.a.plus(1), p.b, p.predicate, next_id))
            residual_id = next_id
            next_id += 1
        pairs.append(SplitPair(head.id, residual_id))
    return SplitResult(tuple(reach), tuple(invar), tuple(pairs))


def _windows(progresses: Sequence[Progress], assignments: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    n_assign = assignments.shape[0]
    lo = np.empty((len(progresses), n_assign), dtype=np.int64)
    hi = np.empty_like(lo)
    for j, p in enumerate(progresses):
        lo[j] = p.a.constant + assignments[:, sorted(p.a.vars)].sum(axis=1)
        hi[j] = p.b.constant + assignments[:, sorted(p.b.vars)].sum(axis=1)
    return lo, hi


def check_progresses_batch(s, progresses: Sequence[Progress] | DecompositionResult,
                           assignments) -> np.ndarray:
    """Evaluate the progress conjunction for many assignments at once."""
    if isinstance(progresses, DecompositionResult):
        progresses = progresses.progresses
    s = as_signal(s)
    assignments = np.asarray(assignments, dtype=np.int64)
    if assignments.ndim == 1:
        assignments = assignments[None, :]
    ok = np.ones(assignments.shape[0], dtype=bool)
    if not progresses:
        return ok
    lo, hi = _windows(progresses, assignments)
    n = s.shape[0]
    nonempty = lo <= hi
    if np.any(hi[nonempty] >= n) or np.any(lo < 0):
        raise SignalTooShort(f"an instantiated window reaches step {int(hi.max())}, "
                             f"signal has {n} states")
    for j, p in enumerate(progresses):
        holds = p.predicate.margins(s) >= 0.0
        # prefix[t] = number of satisfying states strictly before t
        prefix = np.concatenate(([0], np.cumsum(holds)))
        l = np.clip(lo[j], 0, n)
        h = np.clip(hi[j] + 1, 0, n)
        count = np.where(nonempty[j], prefix[h] - prefix[l], 0)
        if p.kind == REACH:
            ok &= count > 0
        else:
            ok &= count == np.where(nonempty[j], h - l, 0)
    return ok


def check_progresses(s, d: DecompositionResult | Sequence[Progress],
                     assignment: Sequence[int]) -> bool:
    """True iff every progress holds on ``s`` with windows fixed by ``assignment``."""
    progresses = d.progresses if isinstance(d, DecompositionResult) else tuple(d)
    n_vars = len(d.vars) if isinstance(d, DecompositionResult) else None
    if n_vars is not None and len(assignment) != n_vars:
        raise ValueError(f"assignment has {len(assignment)} values, expected {n_vars}")
    s = as_signal(s)
    for p in progresses:
        lo, hi = p.window(assignment)
        if lo > hi:
            if p.kind == REACH:
                return False
            continue
        if lo < 0 or hi >= s.shape[0]:
            raise SignalTooShort(f"window [{lo},{hi}] of {p} exceeds a signal of {s.shape[0]} states")
        m = p.predicate.margins(s[lo:hi + 1])
        if p.kind == REACH and not np.any(m >= 0.0):
            return False
        if p.kind == INVAR and not np.all(m >= 0.0):
            return False
    return True


def progresses_from_dict(data: dict, table: dict[str, Predicate]) -> DecompositionResult:
    progs = []
    for item in data["progresses"]:
        pred = table.get(item["predicate"])
        if pred is None:
            pred = Predicate.from_dict(item["predicate"], item["shape"])
        progs.append(Progress(item["kind"], EndpointExpr.from_dict(item["a"]),
                              EndpointExpr.from_dict(item["b"]), pred, int(item["id"])))
    tvars = tuple(TimeVar(int(v["id"]), int(v["lo"]), int(v["hi"])) for v in data["vars"])
    return DecompositionResult(tuple(progs), tvars, tuple(data.get("notes", ())))
