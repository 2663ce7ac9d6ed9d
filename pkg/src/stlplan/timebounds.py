"""Exact integer reasoning over time-variable constraints.

A store holds one interval bound per time variable plus affine constraints
``sum(vars) + c  (<=|>=)  rhs`` whose coefficients are all 0 or 1.  Queries
run bound-consistency propagation to a fixpoint and then a depth-first
branch-and-bound over domain halves, so every answer is exact.  Stores are
immutable: adding a constraint returns a child store and leaves the parent's
answers untouched, which is what the allocation search relies on when it
backtracks.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

LE = "<="
GE = ">="

DEFAULT_NODE_BUDGET = 1_000_000


class SolverBudgetExceeded(RuntimeError):
    """Raised instead of returning a possibly wrong answer."""


class InfeasibleStore(ValueError):
    pass


@dataclass(frozen=True)
class EndpointExpr:
    """``constant + sum(lambda_i for i in vars)``."""

    constant: int = 0
    vars: frozenset[int] = frozenset()

    def __post_init__(self) -> None:
        object.__setattr__(self, "vars", frozenset(self.vars))

    def __call__(self, assignment: Sequence[int]) -> int:
        return self.constant + sum(assignment[i] for i in self.vars)

    @property
    def is_constant(self) -> bool:
        return not self.vars

    def plus(self, constant: int = 0, var: int | None = None) -> "EndpointExpr":
        if var is None:
            return EndpointExpr(self.constant + constant, self.vars)
        if var in self.vars:
            raise ValueError(f"time variable {var} already present in {self}")
        return EndpointExpr(self.constant + constant, self.vars | {var})

    def __str__(self) -> str:
        terms = [f"λ{i}" for i in sorted(self.vars)]
        if self.constant or not terms:
            terms.append(str(self.constant))
        return "+".join(terms)

    def to_dict(self) -> dict:
        return {"constant": self.constant, "var_ids": sorted(self.vars)}

    @classmethod
    def from_dict(cls, data: dict) -> "EndpointExpr":
        return cls(int(data["constant"]), frozenset(int(v) for v in data["var_ids"]))


@dataclass(frozen=True)
class UnaryBound:
    var: int
    lo: int
    hi: int


@dataclass(frozen=True)
class AffineConstraint:
    expr: EndpointExpr
    sense: str
    rhs: int

    def __post_init__(self) -> None:
        if self.sense not in (LE, GE):
            raise ValueError(f"sense must be '<=' or '>=', got {self.sense!r}")

    def holds(self, assignment: Sequence[int]) -> bool:
        v = self.expr(assignment)
        return v <= self.rhs if self.sense == LE else v >= self.rhs

    def __str__(self) -> str:
        return f"{self.expr} {self.sense} {self.rhs}"


# (sorted var ids, lower, upper) meaning lower <= sum(vars) <= upper
_Row = tuple[tuple[int, ...], float, float]


def _rows(affine: Iterable[AffineConstraint]) -> list[_Row]:
    rows = []
    for c in affine:
        r = c.rhs - c.expr.constant
        lower, upper = (-math.inf, r) if c.sense == LE else (r, math.inf)
        rows.append((tuple(sorted(c.expr.vars)), lower, upper))
    return rows


def _propagate(lo: list[int], hi: list[int], rows: list[_Row]) -> bool:
    """Tighten ``lo``/``hi`` in place; False when some domain empties."""
    if any(l > h for l, h in zip(lo, hi)):
        return False
    changed = True
    while changed:
        changed = False
        for vs, lower, upper in rows:
            slo = sum(lo[i] for i in vs)
            shi = sum(hi[i] for i in vs)
            if slo > upper or shi < lower:
                return False
            for i in vs:
                if upper != math.inf:
                    cap = int(upper - (slo - lo[i]))
                    if cap < hi[i]:
                        if cap < lo[i]:
                            return False
                        shi -= hi[i] - cap
                        hi[i] = cap
                        changed = True
                if lower != -math.inf:
                    floor = int(lower - (shi - hi[i]))
                    if floor > lo[i]:
                        if floor > hi[i]:
                            return False
                        slo += floor - lo[i]
                        lo[i] = floor
                        changed = True
    return True


def _satisfies(point: Sequence[int], rows: list[_Row]) -> bool:
    for vs, lower, upper in rows:
        s = sum(point[i] for i in vs)
        if s < lower or s > upper:
            return False
    return True


class _Search:
    def __init__(self, rows: list[_Row], budget: int):
        self.rows = rows
        self.budget = budget
        self.nodes = 0
        self.constrained = sorted({i for vs, _, _ in rows for i in vs})

    def tick(self) -> None:
        self.nodes += 1
        if self.nodes > self.budget:
            raise SolverBudgetExceeded(f"constraint search exceeded {self.budget} nodes")

    def _split_var(self, lo, hi, prefer: Iterable[int] = ()) -> int | None:
        best, width = None, 0
        for group in (prefer, self.constrained):
            for i in group:
                if hi[i] - lo[i] > width:
                    best, width = i, hi[i] - lo[i]
            if best is not None:
                return best
        return None

    def feasible(self, lo: list[int], hi: list[int]) -> bool:
        self.tick()
        if not _propagate(lo, hi, self.rows):
            return False
        if _satisfies(lo, self.rows) or _satisfies(hi, self.rows):
            return True
        i = self._split_var(lo, hi)
        if i is None:
            return True
        mid = (lo[i] + hi[i]) // 2
        left_hi = hi.copy()
        left_hi[i] = mid
        if self.feasible(lo.copy(), left_hi):
            return True
        right_lo = lo.copy()
        right_lo[i] = mid + 1
        return self.feasible(right_lo, hi.copy())

    def minimize(self, lo: list[int], hi: list[int], coef: dict[int, int]) -> float:
        """Minimum of ``sum(coef[i] * x_i)``; ``inf`` when infeasible."""
        best = math.inf
        obj_vars = sorted(coef)

        def bound(l, h) -> int:
            return sum(l[i] if c > 0 else -h[i] for i, c in coef.items())

        def rec(l: list[int], h: list[int]) -> None:
            nonlocal best
            self.tick()
            if not _propagate(l, h, self.rows):
                return
            lb = bound(l, h)
            if lb >= best:
                return
            corner = l.copy()
            for i, c in coef.items():
                if c < 0:
                    corner[i] = h[i]
            if _satisfies(corner, self.rows):
                best = lb
                return
            i = self._split_var(l, h, obj_vars)
            if i is None:
                best = lb
                return
            mid = (l[i] + h[i]) // 2
            halves = [(l[i], mid), (mid + 1, h[i])]
            if coef.get(i, 1) < 0:
                halves.reverse()
            for a, b in halves:
                nl, nh = l.copy(), h.copy()
                nl[i], nh[i] = a, b
                rec(nl, nh)

        rec(lo, hi)
        return best


@dataclass(frozen=True)
class ConstraintStore:
    """Interval bounds per variable plus affine rows; immutable."""

    lo: tuple[int, ...]
    hi: tuple[int, ...]
    affine: tuple[AffineConstraint, ...] = ()
    budget: int = DEFAULT_NODE_BUDGET
    _cache: dict = field(default_factory=dict, compare=False, repr=False, hash=False)

    @classmethod
    def from_bounds(cls, bounds: Sequence[tuple[int, int]],
                    budget: int = DEFAULT_NODE_BUDGET) -> "ConstraintStore":
        for lo, hi in bounds:
            if lo < 0 or hi < lo:
                raise ValueError(f"bad unary bound [{lo},{hi}]")
        return cls(tuple(int(b[0]) for b in bounds), tuple(int(b[1]) for b in bounds),
                   budget=budget)

    @property
    def n_vars(self) -> int:
        return len(self.lo)

    def _check_vars(self, vs: Iterable[int]) -> None:
        for v in vs:
            if not 0 <= v < self.n_vars:
                raise KeyError(f"unknown time variable {v}")

    def with_constraint(self, c: AffineConstraint | UnaryBound) -> "ConstraintStore":
        if isinstance(c, UnaryBound):
            self._check_vars([c.var])
            lo, hi = list(self.lo), list(self.hi)
            lo[c.var] = max(lo[c.var], c.lo)
            hi[c.var] = min(hi[c.var], c.hi)
            return ConstraintStore(tuple(lo), tuple(hi), self.affine, self.budget)
        self._check_vars(c.expr.vars)
        return ConstraintStore(self.lo, self.hi, self.affine + (c,), self.budget)

    def with_constraints(self, cs: Iterable[AffineConstraint | UnaryBound]) -> "ConstraintStore":
        out = self
        for c in cs:
            out = out.with_constraint(c)
        return out

    @property
    def _rows(self) -> list[_Row]:
        rows = self._cache.get("rows")
        if rows is None:
            rows = self._cache["rows"] = _rows(self.affine)
        return rows

    def _search(self) -> _Search:
        return _Search(self._rows, self.budget)

    def propagated_bounds(self) -> tuple[tuple[int, ...], tuple[int, ...]] | None:
        """Bounds after propagation, or None if propagation alone refutes the store."""
        if "prop" not in self._cache:
            lo, hi = list(self.lo), list(self.hi)
            self._cache["prop"] = (tuple(lo), tuple(hi)) if _propagate(lo, hi, self._rows) else None
        return self._cache["prop"]

    def is_feasible(self) -> bool:
        if "feasible" not in self._cache:
            pb = self.propagated_bounds()
            self._cache["feasible"] = pb is not None and self._search().feasible(
                list(pb[0]), list(pb[1]))
        return self._cache["feasible"]

    def _optimum(self, expr: EndpointExpr, sign: int) -> int | None:
        key = ("opt", sign, expr)
        if key not in self._cache:
            self._check_vars(expr.vars)
            pb = self.propagated_bounds()
            if pb is None or not self.is_feasible():
                self._cache[key] = None
            else:
                val = self._search().minimize(list(pb[0]), list(pb[1]),
                                              {i: sign for i in expr.vars})
                self._cache[key] = None if val == math.inf else expr.constant + sign * int(val)
        return self._cache[key]

    def min_value(self, expr: EndpointExpr) -> int | None:
        return self._optimum(expr, 1)

    def max_value(self, expr: EndpointExpr) -> int | None:
        return self._optimum(expr, -1)

    def pick_assignment(self, order: str = "lexmin") -> tuple[int, ...]:
        """Lexicographically minimal (or maximal) feasible assignment by var id."""
        if order not in ("lexmin", "lexmax"):
            raise ValueError(f"unknown order {order!r}")
        if not self.is_feasible():
            raise InfeasibleStore("no feasible assignment")
        store = self
        values = []
        for i in range(self.n_vars):
            e = EndpointExpr(0, frozenset([i]))
            v = store.min_value(e) if order == "lexmin" else store.max_value(e)
            values.append(v)
            store = store.with_constraint(UnaryBound(i, v, v))
        return tuple(values)

    def box_volume(self) -> int:
        return math.prod(h - l + 1 for l, h in zip(self.lo, self.hi))

    def enumerate_assignments(self, cap: int = 1_000_000) -> list[tuple[int, ...]]:
        """Every feasible assignment, lexicographically sorted."""
        if self.box_volume() > cap:
            raise ValueError(f"box volume {self.box_volume()} exceeds cap {cap}")
        rows = self._rows
        out: list[tuple[int, ...]] = []
        search = self._search()

        def rec(lo: list[int], hi: list[int], i: int) -> None:
            search.tick()
            if not _propagate(lo, hi, rows):
                return
            if i == self.n_vars:
                out.append(tuple(lo))
                return
            for v in range(lo[i], hi[i] + 1):
                nl, nh = lo.copy(), hi.copy()
                nl[i] = nh[i] = v
                rec(nl, nh, i + 1)

        if all(l <= h for l, h in zip(self.lo, self.hi)):
            rec(list(self.lo), list(self.hi), 0)
        return out

    def satisfied_by(self, assignment: Sequence[int]) -> bool:
        if len(assignment) != self.n_vars:
            return False
        if any(not l <= v <= h for v, l, h in zip(assignment, self.lo, self.hi)):
            return False
        return all(c.holds(assignment) for c in self.affine)

    def to_dict(self) -> dict:
        return {
            "bounds": [{"var": i, "lo": l, "hi": h}
                       for i, (l, h) in enumerate(zip(self.lo, self.hi))],
            "affine": [{"expr": c.expr.to_dict(), "sense": c.sense, "rhs": c.rhs}
                       for c in self.affine],
            "feasible": self.is_feasible(),
        }


def with_constraint(store: ConstraintStore, c: AffineConstraint | UnaryBound) -> ConstraintStore:
    return store.with_constraint(c)


def is_feasible(store: ConstraintStore) -> bool:
    return store.is_feasible()


def min_value(expr: EndpointExpr, store: ConstraintStore) -> int | None:
    return store.min_value(expr)


def max_value(expr: EndpointExpr, store: ConstraintStore) -> int | None:
    return store.max_value(expr)


def pick_assignment(store: ConstraintStore, order: str = "lexmin") -> tuple[int, ...]:
    return store.pick_assignment(order)


def enumerate_assignments(store: ConstraintStore, cap: int = 1_000_000) -> list[tuple[int, ...]]:
    return store.enumerate_assignments(cap)
