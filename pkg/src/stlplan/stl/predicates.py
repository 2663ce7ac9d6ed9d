"""Atomic predicates over planar positions.

Every predicate maps a position to a real margin; the predicate holds at a
state iff its margin is non-negative.  Only the first two coordinates of a
state are looked at, so position+velocity states work unchanged.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Any

import numpy as np

CIRCLE_INSIDE = "circle-inside"
CIRCLE_OUTSIDE = "circle-outside"
HALFPLANE = "halfplane"
KINDS = (CIRCLE_INSIDE, CIRCLE_OUTSIDE, HALFPLANE)

_FLIP = {CIRCLE_INSIDE: CIRCLE_OUTSIDE, CIRCLE_OUTSIDE: CIRCLE_INSIDE}


@dataclass(frozen=True)
class Predicate:
    """A named region test.

    ``circle-inside``: r - |p - c|, ``circle-outside``: |p - c| - r,
    ``halfplane``: signed distance (n . p - offset) / |n|.
    """

    name: str
    kind: str
    center: tuple[float, float] = (0.0, 0.0)
    radius: float = 1.0
    normal: tuple[float, float] = (1.0, 0.0)
    offset: float = 0.0

    def __post_init__(self) -> None:
        if self.kind not in KINDS:
            raise ValueError(f"unknown predicate kind {self.kind!r}")
        object.__setattr__(self, "center", (float(self.center[0]), float(self.center[1])))
        object.__setattr__(self, "normal", (float(self.normal[0]), float(self.normal[1])))
        if self.kind == HALFPLANE:
            if self.normal == (0.0, 0.0):
                raise ValueError(f"predicate {self.name}: halfplane normal must be nonzero")
        elif not self.radius > 0:
            raise ValueError(f"predicate {self.name}: radius must be positive")

    @property
    def is_disc(self) -> bool:
        return self.kind != HALFPLANE

    def margin(self, state: Any) -> float:
        x, y = float(state[0]), float(state[1])
        if self.kind == HALFPLANE:
            nx, ny = self.normal
            return (nx * x + ny * y - self.offset) / math.hypot(nx, ny)
        dx, dy = x - self.center[0], y - self.center[1]
        d = math.sqrt(dx * dx + dy * dy)
        return self.radius - d if self.kind == CIRCLE_INSIDE else d - self.radius

    def margins(self, states: np.ndarray) -> np.ndarray:
        """Vectorised :meth:`margin` over an ``(N, d)`` array; bit-identical to it."""
        pts = np.asarray(states, dtype=float)[:, :2]
        if self.kind == HALFPLANE:
            nx, ny = self.normal
            return (nx * pts[:, 0] + ny * pts[:, 1] - self.offset) / math.hypot(nx, ny)
        dx = pts[:, 0] - self.center[0]
        dy = pts[:, 1] - self.center[1]
        d = np.sqrt(dx * dx + dy * dy)
        return self.radius - d if self.kind == CIRCLE_INSIDE else d - self.radius

    def holds(self, state: Any) -> bool:
        return self.margin(state) >= 0.0

    def negated(self) -> "Predicate":
        """The predicate whose margin is exactly ``-margin``."""
        name = self.name[1:] if self.name.startswith("!") else "!" + self.name
        if self.kind == HALFPLANE:
            return Predicate(name, HALFPLANE, normal=(-self.normal[0], -self.normal[1]),
                             offset=-self.offset)
        return Predicate(name, _FLIP[self.kind], center=self.center, radius=self.radius)

    def to_dict(self) -> dict[str, Any]:
        if self.kind == HALFPLANE:
            return {"kind": self.kind, "normal": list(self.normal), "offset": self.offset}
        return {"kind": self.kind, "c": list(self.center), "r": self.radius}

    @classmethod
    def from_dict(cls, name: str, data: dict[str, Any]) -> "Predicate":
        kind = data.get("kind", CIRCLE_INSIDE)
        if kind == HALFPLANE:
            return cls(name, kind, normal=tuple(data["normal"]), offset=float(data["offset"]))
        return cls(name, kind, center=tuple(data["c"]), radius=float(data["r"]))


def circle(name: str, center, radius: float, inside: bool = True) -> Predicate:
    return Predicate(name, CIRCLE_INSIDE if inside else CIRCLE_OUTSIDE,
                     center=tuple(center), radius=radius)


def halfplane(name: str, normal, offset: float) -> Predicate:
    return Predicate(name, HALFPLANE, normal=tuple(normal), offset=offset)
