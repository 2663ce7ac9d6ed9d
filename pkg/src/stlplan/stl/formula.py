"""STL abstract syntax in positive normal form, plus structural utilities."""
from __future__ import annotations

from dataclasses import dataclass
from itertools import product
from typing import Iterator, Union

from .predicates import Predicate


class FormulaError(ValueError):
    pass


@dataclass(frozen=True)
class Interval:
    a: int
    b: int

    def __post_init__(self) -> None:
        if int(self.a) != self.a or int(self.b) != self.b:
            raise FormulaError(f"interval endpoints must be integers, got [{self.a},{self.b}]")
        if not 0 <= self.a <= self.b:
            raise FormulaError(f"invalid interval [{self.a},{self.b}]: need 0 <= a <= b")

    def __str__(self) -> str:
        return f"[{self.a},{self.b}]"


@dataclass(frozen=True)
class TrueF:
    pass


@dataclass(frozen=True)
class Atom:
    predicate: Predicate


@dataclass(frozen=True)
class NegAtom:
    predicate: Predicate

    @property
    def effective(self) -> Predicate:
        return self.predicate.negated()


@dataclass(frozen=True)
class And:
    left: "Formula"
    right: "Formula"


@dataclass(frozen=True)
class Or:
    left: "Formula"
    right: "Formula"


@dataclass(frozen=True)
class Eventually:
    interval: Interval
    child: "Formula"


@dataclass(frozen=True)
class Always:
    interval: Interval
    child: "Formula"


@dataclass(frozen=True)
class Until:
    interval: Interval
    left: "Formula"
    right: "Formula"


Formula = Union[TrueF, Atom, NegAtom, And, Or, Eventually, Always, Until]
LEAVES = (TrueF, Atom, NegAtom)


def F(a: int, b: int, child: Formula) -> Eventually:
    return Eventually(Interval(a, b), child)


def G(a: int, b: int, child: Formula) -> Always:
    return Always(Interval(a, b), child)


def U(a: int, b: int, left: Formula, right: Formula) -> Until:
    return Until(Interval(a, b), left, right)


def conj(*parts: Formula) -> Formula:
    """Left-nested conjunction of one or more formulas."""
    if not parts:
        return TrueF()
    out = parts[0]
    for p in parts[1:]:
        out = And(out, p)
    return out


def children(f: Formula) -> tuple[Formula, ...]:
    if isinstance(f, (And, Or, Until)):
        return (f.left, f.right)
    if isinstance(f, (Eventually, Always)):
        return (f.child,)
    return ()


def walk(f: Formula, path: str = "") -> Iterator[tuple[str, Formula]]:
    """Pre-order traversal yielding ``(path, node)``; paths look like ``/right/child``."""
    yield path or "/", f
    if isinstance(f, (And, Or, Until)):
        yield from walk(f.left, path + "/left")
        yield from walk(f.right, path + "/right")
    elif isinstance(f, (Eventually, Always)):
        yield from walk(f.child, path + "/child")


def predicates(f: Formula) -> dict[str, Predicate]:
    out: dict[str, Predicate] = {}
    for _, node in walk(f):
        if isinstance(node, (Atom, NegAtom)):
            out[node.predicate.name] = node.predicate
    return out


def horizon(f: Formula) -> int:
    """Number of steps past ``t`` that evaluating ``f`` at ``t`` reads."""
    if isinstance(f, LEAVES):
        return 0
    if isinstance(f, (And, Or)):
        return max(horizon(f.left), horizon(f.right))
    if isinstance(f, (Eventually, Always)):
        return f.interval.b + horizon(f.child)
    if isinstance(f, Until):
        return f.interval.b + max(horizon(f.left), horizon(f.right))
    raise TypeError(f"not a formula: {f!r}")


def to_text(f: Formula) -> str:
    """Canonical printer; ``parse_formula(to_text(f))`` rebuilds ``f``."""
    if isinstance(f, TrueF):
        return "TRUE"
    if isinstance(f, Atom):
        return f.predicate.name
    if isinstance(f, NegAtom):
        return "!" + f.predicate.name
    if isinstance(f, And):
        return f"({to_text(f.left)} & {to_text(f.right)})"
    if isinstance(f, Or):
        return f"({to_text(f.left)} | {to_text(f.right)})"
    if isinstance(f, Eventually):
        return f"F{f.interval} {to_text(f.child)}"
    if isinstance(f, Always):
        return f"G{f.interval} {to_text(f.child)}"
    if isinstance(f, Until):
        return f"({to_text(f.left)} U{f.interval} {to_text(f.right)})"
    raise TypeError(f"not a formula: {f!r}")


def validate_pnf(f: Formula) -> list[str]:
    """Return violation messages; an empty list means ``f`` is admissible.

    Negation can only be written on atoms, so the remaining check is the
    restriction on the left operand of every until: it may contain always,
    conjunction, disjunction and literals but no eventually or until.
    """
    problems = []
    for path, node in walk(f):
        if isinstance(node, Until):
            base = "" if path == "/" else path
            for sub_path, sub in walk(node.left, base + "/left"):
                if isinstance(sub, (Eventually, Until)):
                    kind = "F" if isinstance(sub, Eventually) else "U"
                    problems.append(f"{sub_path}: {kind} inside the left operand of the until at {path}")
    return problems


def to_dnf(f: Formula) -> list[Formula]:
    """Push disjunctions to the top and return the disjuncts.

    Conjunction distributes exactly; distributing G and U over a disjunction
    strengthens the formula, so every disjunct implies ``f`` but not the
    reverse.  A disjunction-free input comes back as ``[f]``.
    """
    if isinstance(f, LEAVES):
        return [f]
    if isinstance(f, Or):
        return to_dnf(f.left) + to_dnf(f.right)
    if isinstance(f, And):
        return [And(l, r) for l, r in product(to_dnf(f.left), to_dnf(f.right))]
    if isinstance(f, Eventually):
        return [Eventually(f.interval, c) for c in to_dnf(f.child)]
    if isinstance(f, Always):
        return [Always(f.interval, c) for c in to_dnf(f.child)]
    if isinstance(f, Until):
        return [Until(f.interval, l, r) for l, r in product(to_dnf(f.left), to_dnf(f.right))]
    raise TypeError(f"not a formula: {f!r}")


def has_or(f: Formula) -> bool:
    return any(isinstance(n, Or) for _, n in walk(f))


def map_intervals(f: Formula, fn) -> Formula:
    """Rebuild ``f`` with every interval replaced by ``fn(interval)``."""
    if isinstance(f, LEAVES):
        return f
    if isinstance(f, And):
        return And(map_intervals(f.left, fn), map_intervals(f.right, fn))
    if isinstance(f, Or):
        return Or(map_intervals(f.left, fn), map_intervals(f.right, fn))
    if isinstance(f, Eventually):
        return Eventually(fn(f.interval), map_intervals(f.child, fn))
    if isinstance(f, Always):
        return Always(fn(f.interval), map_intervals(f.child, fn))
    if isinstance(f, Until):
        return Until(fn(f.interval), map_intervals(f.left, fn), map_intervals(f.right, fn))
    raise TypeError(f"not a formula: {f!r}")
