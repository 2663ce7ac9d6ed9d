"""Recursive-descent parser for the ASCII STL grammar.

    expr    := conj ('|' conj)*
    conj    := unary ('&' unary)*
    unary   := 'TRUE' | NAME | '!' NAME
             | 'F' interval unary | 'G' interval unary
             | '(' expr ')' | '(' expr 'U' interval expr ')'
    interval:= '[' INT ',' INT ']'

``F``, ``G`` and ``U`` are operators only when an interval follows them, so
they remain usable as predicate names.
"""
from __future__ import annotations

import re
from typing import Mapping

from .formula import (And, Always, Atom, Eventually, Formula, FormulaError, Interval, NegAtom,
                      Or, TrueF, Until, validate_pnf)
from .predicates import Predicate

_TOKEN = re.compile(r"\s*(?:(?P<int>\d+)|(?P<name>[A-Za-z_][A-Za-z0-9_]*)|(?P<sym>[()\[\],&|!]))")


class ParseError(FormulaError):
    def __init__(self, message: str, position: int | None = None):
        self.position = position
        where = f" at position {position}" if position is not None else ""
        super().__init__(f"{message}{where}")


def _tokenize(text: str) -> list[tuple[str, str, int]]:
    tokens = []
    pos = 0
    while pos < len(text):
        if text[pos:].strip() == "":
            break
        m = _TOKEN.match(text, pos)
        if not m or m.end() == pos:
            start = pos + len(text[pos:]) - len(text[pos:].lstrip())
            raise ParseError(f"unexpected character {text[start]!r}", start)
        kind = m.lastgroup
        tokens.append((kind, m.group(kind), m.start(kind)))
        pos = m.end()
    tokens.append(("eof", "", len(text)))
    return tokens


class _Parser:
    def __init__(self, text: str, table: Mapping[str, Predicate]):
        self.tokens = _tokenize(text)
        self.i = 0
        self.table = table

    def peek(self, k: int = 0) -> tuple[str, str, int]:
        return self.tokens[min(self.i + k, len(self.tokens) - 1)]

    def take(self) -> tuple[str, str, int]:
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def expect(self, value: str) -> None:
        kind, val, pos = self.take()
        if val != value or kind == "eof":
            raise ParseError(f"expected {value!r}, found {val or 'end of input'!r}", pos)

    def is_temporal(self, op: str) -> bool:
        kind, val, _ = self.peek()
        return kind == "name" and val == op and self.peek(1)[1] == "["

    def parse(self) -> Formula:
        f = self.expr()
        kind, val, pos = self.peek()
        if kind != "eof":
            raise ParseError(f"unexpected token {val!r}", pos)
        return f

    def expr(self) -> Formula:
        f = self.conj()
        while self.peek()[1] == "|":
            self.take()
            f = Or(f, self.conj())
        return f

    def conj(self) -> Formula:
        f = self.unary()
        while self.peek()[1] == "&":
            self.take()
            f = And(f, self.unary())
        return f

    def interval(self) -> Interval:
        _, _, pos = self.peek()
        self.expect("[")
        a = self.integer()
        self.expect(",")
        b = self.integer()
        self.expect("]")
        if a > b:
            raise ParseError(f"interval [{a},{b}] has a > b", pos)
        return Interval(a, b)

    def integer(self) -> int:
        kind, val, pos = self.take()
        if kind != "int":
            raise ParseError(f"expected an integer, found {val or 'end of input'!r}", pos)
        return int(val)

    def lookup(self, name: str, pos: int) -> Predicate:
        try:
            return self.table[name]
        except KeyError:
            raise ParseError(f"unknown predicate {name!r}", pos) from None

    def unary(self) -> Formula:
        kind, val, pos = self.peek()
        if self.is_temporal("F") or self.is_temporal("G"):
            self.take()
            iv = self.interval()
            child = self.unary()
            return Eventually(iv, child) if val == "F" else Always(iv, child)
        if val == "!":
            self.take()
            kind, name, npos = self.take()
            if kind != "name":
                raise ParseError("negation is only allowed directly on a predicate name", npos)
            return NegAtom(self.lookup(name, npos))
        if val == "(":
            self.take()
            left = self.expr()
            if self.is_temporal("U"):
                upos = self.peek()[2]
                self.take()
                iv = self.interval()
                right = self.expr()
                self.expect(")")
                f = Until(iv, left, right)
                problems = validate_pnf(f)
                if problems:
                    raise ParseError("until restriction violated: " + "; ".join(problems), upos)
                return f
            self.expect(")")
            return left
        if kind == "name":
            self.take()
            if val == "TRUE":
                return TrueF()
            return Atom(self.lookup(val, pos))
        raise ParseError(f"unexpected token {val or 'end of input'!r}", pos)


def parse_formula(text: str, predicate_table: Mapping[str, Predicate]) -> Formula:
    """Parse ``text`` resolving atom names through ``predicate_table``."""
    return _Parser(text, predicate_table).parse()
