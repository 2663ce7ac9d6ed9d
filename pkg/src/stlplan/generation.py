"""Travel-time prediction and segment-wise trajectory synthesis.

Both pieces are analytic stand-ins behind small interfaces.  The predictor is
distance over a reference speed, scaled by ``gamma``.  The generator builds a
polyline from segment start to end that keeps clear of forbidden discs,
routes it through a visibility graph when the straight line is blocked,
and samples it at a constant speed (slowed down where time gates require)
into exactly ``length`` states.  Each segment is then checked pointwise, and
the stitched signal is checked again independently.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Protocol, Sequence

import networkx as nx
import numpy as np

from .decomposition import Progress, check_progresses
from .stl.predicates import CIRCLE_INSIDE, CIRCLE_OUTSIDE, Predicate
from .world import Disc, Environment

INFLATION_SCHEDULE = (1.05, 1.15, 1.30)
POLYGON_SIDES = 20
_EPS = 1e-9


@dataclass(frozen=True)
class TimePredictorConfig:
    gamma: float = 1.0
    v_ref: float = 0.5

    def __post_init__(self) -> None:
        if not (self.gamma > 0 and self.v_ref > 0):
            raise ValueError("gamma and v_ref must be positive")


class TimePredictor(Protocol):
    def __call__(self, x, x_next) -> int: ...


def predict_time(x, x_next, cfg: TimePredictorConfig | None = None) -> int:
    """``ceil(gamma * distance / v_ref)`` planning steps."""
    cfg = cfg or TimePredictorConfig()
    d = math.hypot(float(x_next[0]) - float(x[0]), float(x_next[1]) - float(x[1]))
    if d == 0.0:
        return 0
    # round away tiny float noise before the ceiling, e.g. 4.000000000001
    return int(math.ceil(round(cfg.gamma * d / cfg.v_ref, 9)))


class AnalyticPredictor:
    def __init__(self, cfg: TimePredictorConfig | None = None):
        self.cfg = cfg or TimePredictorConfig()

    def __call__(self, x, x_next) -> int:
        return predict_time(x, x_next, self.cfg)


@dataclass(frozen=True)
class PointwiseConstraint:
    local_t: int
    predicate: Predicate


@dataclass(frozen=True)
class SegmentSpec:
    start: tuple[float, float]
    end: tuple[float, float]
    length: int
    pointwise: tuple[PointwiseConstraint, ...] = ()

    def __post_init__(self) -> None:
        object.__setattr__(self, "start", (float(self.start[0]), float(self.start[1])))
        object.__setattr__(self, "end", (float(self.end[0]), float(self.end[1])))
        object.__setattr__(self, "pointwise", tuple(self.pointwise))
        if self.length < 1:
            raise ValueError("segment length must be at least 1")
        if self.length == 1 and self.start != self.end:
            raise ValueError("a one-state segment needs start == end")
        for c in self.pointwise:
            if not 0 <= c.local_t < self.length:
                raise ValueError(f"pointwise index {c.local_t} outside [0, {self.length - 1}]")


@dataclass(frozen=True)
class Violation:
    local_t: int
    name: str
    margin: float


class GenerationFailure(RuntimeError):
    def __init__(self, message: str, violations: Sequence[Violation] = (), segment: int | None = None):
        self.violations = tuple(violations)
        self.segment = segment
        super().__init__(message)


@dataclass(frozen=True, eq=False)
class GeneratedSignal:
    states: np.ndarray
    segment_boundaries: tuple[int, ...]
    wait_tail_length: int
    notes: tuple[str, ...] = field(default=())

    def to_rows(self) -> list[list[float]]:
        return [[t, float(x[0]), float(x[1])] for t, x in enumerate(self.states)]


def active_pointwise(invar_set: Sequence[Progress], assignment: Sequence[int],
                     t_i: int, t_j: int) -> list[PointwiseConstraint]:
    """Pointwise constraints of every invariance window overlapping ``[t_i, t_j]``."""
    out = []
    for p in invar_set:
        lo, hi = p.window(assignment)
        for t in range(max(lo, t_i), min(hi, t_j) + 1):
            out.append(PointwiseConstraint(t - t_i, p.predicate))
    return out


# ---------------------------------------------------------------- geometry

def _seg_point_dist(a: np.ndarray, b: np.ndarray, c: np.ndarray) -> np.ndarray:
    """Distance from point(s) ``c`` to segment(s) ``a``-``b`` (broadcasting)."""
    ab = b - a
    denom = np.sum(ab * ab, axis=-1)
    t = np.where(denom > 0, np.sum((c - a) * ab, axis=-1) / np.where(denom > 0, denom, 1), 0.0)
    t = np.clip(t, 0.0, 1.0)[..., None]
    proj = a + t * ab
    return np.sqrt(np.sum((c - proj) ** 2, axis=-1))


@dataclass(frozen=True)
class _Avoid:
    center: np.ndarray
    radius: float  # true radius; the constraint is distance >= radius


def _segment_clear(a: np.ndarray, b: np.ndarray, avoid: Sequence[_Avoid], infl: float) -> bool:
    for d in avoid:
        need = max(min(d.radius * infl, np.linalg.norm(a - d.center), np.linalg.norm(b - d.center)),
                   d.radius * (1 + 1e-6))
        if _seg_point_dist(a, b, d.center) < need - _EPS:
            return False
    return True


def _route(a: np.ndarray, b: np.ndarray, avoid: Sequence[_Avoid], env: Environment,
           infl: float) -> list[np.ndarray] | None:
    """Shortest polyline from ``a`` to ``b`` around the inflated discs."""
    if _segment_clear(a, b, avoid, infl):
        return [a, b]
    nodes = [a, b]
    step = 2 * math.pi / POLYGON_SIDES
    for d in avoid:
        rr = d.radius * infl / math.cos(step / 2) * (1 + 1e-6)
        for i in range(POLYGON_SIDES):
            v = d.center + rr * np.array([math.cos(i * step), math.sin(i * step)])
            if not env.in_bounds(v):
                continue
            if any(np.linalg.norm(v - o.center) < o.radius * infl for o in avoid):
                continue
            nodes.append(v)
    pts = np.array(nodes)
    n = len(pts)
    ii, jj = np.triu_indices(n, 1)
    ok = np.ones(len(ii), dtype=bool)
    pa, pb = pts[ii], pts[jj]
    for d in avoid:
        dist_a = np.linalg.norm(pa - d.center, axis=1)
        dist_b = np.linalg.norm(pb - d.center, axis=1)
        need = np.maximum(np.minimum(np.minimum(dist_a, dist_b), d.radius * infl),
                          d.radius * (1 + 1e-6))
        ok &= _seg_point_dist(pa, pb, d.center) >= need - _EPS
    g = nx.Graph()
    g.add_nodes_from(range(n))
    lengths = np.linalg.norm(pa - pb, axis=1)
    g.add_weighted_edges_from(
        (int(i), int(j), float(w)) for i, j, w in zip(ii[ok], jj[ok], lengths[ok]))
    try:
        path = nx.shortest_path(g, 0, 1, weight="weight")
    except nx.NetworkXNoPath:
        return None
    return [pts[i] for i in path]


def _inside_point(pred: Predicate, start: np.ndarray, end: np.ndarray, infl: float) -> np.ndarray:
    """A point well inside a disc region, on the side facing ``end``."""
    c = np.asarray(pred.center)
    u = end - c
    n = np.linalg.norm(u)
    if n < _EPS:
        return c.copy()
    return c + u / n * (0.6 * pred.radius / infl)


def _outside_gate(d: _Avoid, target: np.ndarray, other: np.ndarray, infl: float) -> np.ndarray:
    """A point just outside an inflated disc, radially toward ``target``."""
    u = target - d.center
    n = np.linalg.norm(u)
    if n < _EPS:
        u = other - d.center
        n = np.linalg.norm(u)
        if n < _EPS:
            u, n = np.array([1.0, 0.0]), 1.0
    return d.center + u / n * (d.radius * infl * 1.02)


def _time_profile(total: float, length: int, upper_gates: Sequence[tuple[int, float]] = (),
                  lower_gates: Sequence[tuple[int, float]] = ()) -> np.ndarray:
    """Arc length per index at the lowest constant speed meeting the gates.

    An upper gate ``(k, g)`` keeps arc length at index ``k`` at most ``g``; a
    lower gate requires at least ``g``.  Motion is as-early-as-possible under
    the speed cap, which dominates every other profile with that cap, so if
    any profile meets the lower gates this one does.
    """
    if length == 1:
        return np.zeros(1)
    m = length - 1
    speed = total / m
    for k, g in upper_gates:
        if k < m:
            speed = max(speed, (total - g) / (m - k))
        for k1, g1 in lower_gates:
            if k1 > k:
                speed = max(speed, (g1 - g) / (k1 - k))
    for k, g in lower_gates:
        if k > 0:
            speed = max(speed, g / k)
    upper = np.full(length, total)
    for k, g in upper_gates:
        upper[: k + 1] = np.minimum(upper[: k + 1], g)
    f = np.zeros(length)
    for i in range(1, length):
        f[i] = min(f[i - 1] + speed, upper[i], total)
    f[-1] = total
    return f


def _sample_polyline(vertices: Sequence[np.ndarray], s: np.ndarray) -> np.ndarray:
    pts = np.array(vertices)
    seg = np.linalg.norm(np.diff(pts, axis=0), axis=1)
    cum = np.concatenate([[0.0], np.cumsum(seg)])
    out = np.empty((len(s), 2))
    for i, si in enumerate(s):
        j = int(np.searchsorted(cum, si, side="right")) - 1
        j = min(max(j, 0), len(seg) - 1)
        frac = 0.0 if seg[j] == 0 else (si - cum[j]) / seg[j]
        out[i] = pts[j] + min(max(frac, 0.0), 1.0) * (pts[j + 1] - pts[j])
    return out


def _violations(states: np.ndarray, pointwise: Sequence[PointwiseConstraint],
                obstacles: Sequence[Disc]) -> list[Violation]:
    out = []
    for c in pointwise:
        m = c.predicate.margin(states[c.local_t])
        if m < 0:
            out.append(Violation(c.local_t, c.predicate.name, m))
    for i, o in enumerate(obstacles):
        d = np.sqrt(np.sum((states[:, :2] - np.asarray(o.center)) ** 2, axis=1)) - o.radius
        for t in np.flatnonzero(d < 0):
            out.append(Violation(int(t), f"obstacle{i}", float(d[t])))
    return out


def _attempt(spec: SegmentSpec, env: Environment, infl: float) -> np.ndarray | None:
    start, end, L = np.array(spec.start), np.array(spec.end), spec.length
    last = L - 1
    by_pred: dict[Predicate, list[int]] = {}
    for c in spec.pointwise:
        by_pred.setdefault(c.predicate, []).append(c.local_t)

    avoid = [_Avoid(np.asarray(o.center), o.radius) for o in env.obstacles]
    upper: list[tuple[int, float]] = []
    lower: list[tuple[int, float]] = []
    exit_gate: tuple[_Avoid, int] | None = None   # start inside, active from k on
    entry_gate: tuple[_Avoid, int] | None = None  # end inside, active up to k
    prefix_inside: list[tuple[Predicate, int]] = []
    whole_inside = False
    for pred, steps in by_pred.items():
        k_lo, k_hi = min(steps), max(steps)
        if pred.kind == CIRCLE_OUTSIDE:
            d = _Avoid(np.asarray(pred.center), pred.radius)
            if not pred.holds(start):
                if exit_gate is not None or k_lo == 0:
                    return None
                exit_gate = (d, k_lo)
            elif not pred.holds(end):
                if entry_gate is not None or k_hi == last:
                    return None
                entry_gate = (d, k_hi)
            else:
                avoid.append(d)
        elif k_hi == last:
            whole_inside = True
        else:
            prefix_inside.append((pred, k_hi))

    head: list[np.ndarray] = [start]
    if exit_gate is not None:
        q = _outside_gate(exit_gate[0], start, end, infl)
        if not _segment_clear(start, q, avoid, infl):
            return None
        head.append(q)
        lower.append((exit_gate[1], float(np.linalg.norm(q - start))))
        avoid = avoid + [exit_gate[0]]
    elif whole_inside:
        # both ends satisfy every such convex region, so the chord does too
        pass
    elif len(prefix_inside) == 1 and prefix_inside[0][0].kind == CIRCLE_INSIDE:
        pred, k = prefix_inside[0]
        p = _inside_point(pred, start, end, infl)
        if _segment_clear(start, p, avoid, infl):
            head.append(p)
            upper.append((k, float(np.linalg.norm(p - start))))
        else:
            upper.append((k, 0.0))
    elif prefix_inside:
        upper.append((max(k for _, k in prefix_inside), 0.0))

    target = end
    if entry_gate is not None:
        target = _outside_gate(entry_gate[0], end, head[-1], infl)
        avoid = avoid + [entry_gate[0]]
    route = _route(head[-1], target, avoid, env, infl)
    if route is None:
        return None
    vertices = head[:-1] + route + ([end] if entry_gate is not None else [])
    seg = [float(np.linalg.norm(b - a)) for a, b in zip(vertices, vertices[1:])]
    total = float(sum(seg))
    if entry_gate is not None:
        upper.append((entry_gate[1], total - seg[-1]))
    s = _time_profile(total, L, upper, lower)
    states = _sample_polyline(vertices, s)
    states[0], states[-1] = start, end
    return states


def generate_segment(spec: SegmentSpec, env: Environment | None = None, rng=None) -> np.ndarray:
    """States ``0..length-1`` from ``spec.start`` to ``spec.end`` meeting every constraint.

    Raises :class:`GenerationFailure` listing violations after the last
    inflation retry.  The generator is deterministic; ``rng`` is accepted for
    interface compatibility with stochastic backends.
    """
    env = env or Environment()
    start, end = np.array(spec.start), np.array(spec.end)
    if spec.length == 1 or np.array_equal(start, end):
        states = np.repeat(start[None, :], spec.length, axis=0)
        bad = _violations(states, spec.pointwise, env.obstacles)
        if bad:
            raise GenerationFailure("dwelling segment violates constraints", bad)
        return states
    ends = [c for c in spec.pointwise if c.local_t in (0, spec.length - 1)]
    endpoints = np.repeat(start[None, :], spec.length, axis=0)
    endpoints[-1] = end
    bad = _violations(endpoints, ends, ())
    if bad:
        raise GenerationFailure("segment endpoint violates its own constraint", bad)
    for infl in INFLATION_SCHEDULE:
        states = _attempt(spec, env, infl)
        if states is None:
            continue
        bad = _violations(states, spec.pointwise, env.obstacles)
        if not bad:
            return states
    raise GenerationFailure(
        "no constraint-satisfying segment found" if bad else "no route between segment endpoints",
        bad)


def stitch(waypoints: Sequence, assignment: Sequence[int], invar_set: Sequence[Progress],
           env: Environment | None = None, rng=None, min_length: int = 0,
           reach_set: Sequence[Progress] = ()) -> GeneratedSignal:
    """Concatenate one segment per waypoint pair and pad with a wait tail.

    ``min_length`` extends the wait tail so the signal has at least that many
    states; callers pass the formula horizon plus one so that monitoring at
    step 0 is defined.  After concatenation every progress in ``reach_set``
    and ``invar_set`` is re-checked on the stitched signal.
    """
    env = env or Environment()
    if not waypoints:
        raise ValueError("no waypoints to stitch")
    pieces = [np.asarray(waypoints[0].state, dtype=float)[None, :2]]
    boundaries = [int(waypoints[0].t)]
    if boundaries[0] != 0:
        raise ValueError("the first waypoint must be at t = 0")
    for i, (w0, w1) in enumerate(zip(waypoints, waypoints[1:])):
        t0, t1 = int(w0.t), int(w1.t)
        if t1 < t0:
            raise ValueError(f"waypoint times decrease at index {i + 1}")
        boundaries.append(t1)
        if t1 == t0:
            if tuple(w0.state) != tuple(w1.state):
                raise GenerationFailure("two waypoints share a time but not a state", segment=i)
            continue
        spec = SegmentSpec(tuple(w0.state), tuple(w1.state), t1 - t0 + 1,
                           tuple(active_pointwise(invar_set, assignment, t0, t1)))
        try:
            seg = generate_segment(spec, env, rng)
        except GenerationFailure as e:
            raise GenerationFailure(f"segment {i}: {e}", e.violations, segment=i) from None
        pieces.append(seg[1:])
    t_n = boundaries[-1]
    ends = [p.window(assignment)[1] for p in invar_set]
    tail = max([0, min_length - 1 - t_n] + [e - t_n for e in ends])
    states = np.concatenate(pieces, axis=0)
    if tail:
        states = np.concatenate([states, np.repeat(states[-1:], tail, axis=0)])
    if not check_progresses(states, list(reach_set) + list(invar_set), assignment):
        raise GenerationFailure("stitched signal fails the independent progress check")
    return GeneratedSignal(states, tuple(boundaries), tail)


Predictor = Callable[[Sequence[float], Sequence[float]], int]
