"""Dynamics-aware allocation of timed waypoints to reach progresses.

A depth-first search visits reach progresses in deadline order.  At each
node a waypoint state is sampled inside the progress region, a satisfaction
time is chosen from the progress window minus the conflict set of already
determined invariances, and the window constraints are added to the store.
A branch survives only while the store stays feasible.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any, Callable, Sequence

import numpy as np

from .decomposition import Progress, SplitPair
from .generation import AnalyticPredictor
from .stl.predicates import CIRCLE_INSIDE, CIRCLE_OUTSIDE, Predicate
from .timebounds import (GE, LE, AffineConstraint, ConstraintStore, InfeasibleStore,
                         SolverBudgetExceeded)
from .world import Environment

Predictor = Callable[[Sequence[float], Sequence[float]], int]

_REGION_TRIES = 200


class AllocationBudgetExceeded(RuntimeError):
    """The search hit its node budget before finding or refuting a solution."""


@dataclass(frozen=True)
class AllocationConfig:
    n_max: int = 1
    rng_seed: int = 0
    sample_margin: float = 0.5
    dfs_node_budget: int = 100_000
    time_order: str = "lexmin"

    def __post_init__(self) -> None:
        if self.n_max < 1:
            raise ValueError("n_max must be at least 1")
        if not 0 <= self.sample_margin < 1:
            raise ValueError("sample_margin must lie in [0, 1)")
        if self.dfs_node_budget < 1:
            raise ValueError("dfs_node_budget must be positive")


@dataclass(frozen=True)
class TimedWaypoint:
    state: tuple[float, float]
    t: int
    progress_id: int | None = None

    def to_dict(self) -> dict:
        return {"state": list(self.state), "t": self.t, "progress": self.progress_id}


@dataclass
class AllocationResult:
    waypoints: list[TimedWaypoint]
    final_store: ConstraintStore
    reach_map: dict[int, int]
    trace: list[dict[str, Any]] = field(default_factory=list)
    nodes: int = 0

    def assignment(self, order: str = "lexmin") -> tuple[int, ...]:
        return self.final_store.pick_assignment(order)

    def to_dict(self, with_trace: bool = False) -> dict:
        out = {
            "waypoints": [w.to_dict() for w in self.waypoints],
            "reach_map": {str(k): v for k, v in sorted(self.reach_map.items())},
            "store": self.final_store.to_dict(),
            "assignment": list(self.assignment()),
            "nodes": self.nodes,
        }
        if with_trace:
            out["trace"] = self.trace
        return out


def heuristic_order(reach_set: Sequence[Progress], store: ConstraintStore) -> list[Progress]:
    """Earliest potential deadline first, then earliest potential start, then id."""
    def key(p: Progress):
        return (store.min_value(p.b), store.min_value(p.a), p.id)
    return sorted(reach_set, key=key)


def _merge(intervals: list[tuple[int, int]]) -> list[tuple[int, int]]:
    out: list[tuple[int, int]] = []
    for lo, hi in sorted(intervals):
        if out and lo <= out[-1][1] + 1:
            out[-1] = (out[-1][0], max(out[-1][1], hi))
        else:
            out.append((lo, hi))
    return out


def conflict_intervals(x, determined: Sequence[Progress], store: ConstraintStore) -> list[tuple[int, int]]:
    """Steps at which waypoint ``x`` would break a determined invariance."""
    spans = []
    for p in determined:
        if p.predicate.margin(x) >= 0:
            continue
        c = store.min_value(p.a)
        d = store.min_value(p.b)
        if c is not None and d is not None and d >= c:
            spans.append((c, d))
    return _merge(spans)


def earliest_free(lo: int, hi: int, blocked: Sequence[tuple[int, int]]) -> int | None:
    t = lo
    for b_lo, b_hi in blocked:
        if b_hi < t:
            continue
        if b_lo > t:
            break
        t = b_hi + 1
    return t if t <= hi else None


def sample_region(pred: Predicate, env: Environment, rng: np.random.Generator,
                  margin: float) -> tuple[float, float] | None:
    """Uniform sample from the region shrunk by ``margin`` of its radius."""
    xmin, ymin, xmax, ymax = env.bounds
    for _ in range(_REGION_TRIES):
        if pred.kind == CIRCLE_INSIDE:
            r = pred.radius * (1.0 - margin) * math.sqrt(rng.random())
            th = 2 * math.pi * rng.random()
            p = (pred.center[0] + r * math.cos(th), pred.center[1] + r * math.sin(th))
        else:
            p = (xmin + (xmax - xmin) * rng.random(), ymin + (ymax - ymin) * rng.random())
            if pred.kind == CIRCLE_OUTSIDE:
                if math.hypot(p[0] - pred.center[0], p[1] - pred.center[1]) < pred.radius * (1 + margin):
                    continue
            elif pred.margin(p) < 0:
                continue
        if env.in_bounds(p) and env.collision_free(p) and pred.margin(p) >= 0:
            return p
    return None


def sample_state(progress: Progress, x, t: int, store: ConstraintStore,
                 determined: Sequence[Progress], cfg: AllocationConfig, predictor: Predictor,
                 env: Environment, rng: np.random.Generator,
                 allow_current: bool = False) -> tuple[int, tuple[float, float]] | None:
    """Pick a waypoint state and its satisfaction time, or None after ``n_max`` tries.

    With ``allow_current`` (split heads) the current state is tried first
    with zero travel when it already satisfies the predicate; that try does
    not count against ``n_max``.
    """
    t_min = store.min_value(progress.a)
    t_max = store.max_value(progress.b)
    if t_min is None or t_max is None:
        return None
    candidates = []
    if allow_current and progress.predicate.margin(x) >= 0:
        candidates.append(tuple(x))
    for attempt in range(cfg.n_max + len(candidates)):
        if attempt < len(candidates):
            x_new, travel = candidates[attempt], 0
        else:
            x_new = sample_region(progress.predicate, env, rng, cfg.sample_margin)
            if x_new is None:
                continue
            travel = predictor(x, x_new)
        t_arrive = t + travel
        if t_arrive > t_max:
            continue
        t_new = earliest_free(max(t_arrive, t_min), t_max, conflict_intervals(x_new, determined, store))
        if t_new is not None:
            return t_new, (float(x_new[0]), float(x_new[1]))
    return None


def update_constraints(progress: Progress, x_new, t_new: int, store: ConstraintStore,
                       determined: Sequence[Progress]) -> ConstraintStore:
    """Pin ``progress`` to ``t_new`` and cut determined invariances ``x_new`` breaks."""
    out = store.with_constraints([AffineConstraint(progress.a, LE, t_new),
                                  AffineConstraint(progress.b, GE, t_new)])
    for p in determined:
        if p.predicate.margin(x_new) >= 0:
            continue
        c = store.min_value(p.a)
        if c is not None and t_new >= c:
            out = out.with_constraint(AffineConstraint(p.b, LE, t_new - 1))
    return out


class _Search:
    def __init__(self, reach: Sequence[Progress], invar: Sequence[Progress],
                 pairs: Sequence[SplitPair], cfg: AllocationConfig, predictor: Predictor,
                 env: Environment, rng: np.random.Generator):
        self.cfg = cfg
        self.predictor = predictor
        self.env = env
        self.rng = rng
        invar_by_id = {p.id: p for p in invar}
        self.residual = {pr.reach_id: invar_by_id[pr.invar_id] for pr in pairs
                         if pr.invar_id is not None}
        self.heads = {pr.reach_id for pr in pairs}
        self.nodes = 0
        self.trace: list[dict[str, Any]] = []

    def run(self, x, t, remaining, store, seq, determined):
        self.nodes += 1
        if self.nodes > self.cfg.dfs_node_budget:
            raise AllocationBudgetExceeded(
                f"allocation search exceeded {self.cfg.dfs_node_budget} nodes")
        if not remaining:
            return seq, store
        depth = len(seq) - 1
        for p in heuristic_order(remaining, store):
            got = sample_state(p, x, t, store, determined, self.cfg, self.predictor, self.env,
                               self.rng, allow_current=p.id in self.heads)
            if got is None:
                self.trace.append({"depth": depth, "progress": p.id, "event": "no-sample"})
                continue
            t_new, x_new = got
            child = update_constraints(p, x_new, t_new, store, determined)
            if not child.is_feasible():
                self.trace.append({"depth": depth, "progress": p.id, "event": "infeasible",
                                   "t": t_new})
                continue
            self.trace.append({"depth": depth, "progress": p.id, "event": "assign", "t": t_new,
                               "state": list(x_new)})
            rest = tuple(q for q in remaining if q.id != p.id)
            det = determined + ((self.residual[p.id],) if p.id in self.residual else ())
            found = self.run(x_new, t_new, rest, child, seq + [TimedWaypoint(x_new, t_new, p.id)], det)
            if found is not None:
                return found
            self.trace.append({"depth": depth, "progress": p.id, "event": "backtrack"})
        return None


def allocate(x0, reach_set: Sequence[Progress], invar_set: Sequence[Progress],
             pairs: Sequence[SplitPair], store: ConstraintStore,
             cfg: AllocationConfig | None = None, predictor: Predictor | None = None,
             env: Environment | None = None,
             rng: np.random.Generator | None = None) -> AllocationResult | None:
    """Depth-first timed-waypoint search; None when the search space is exhausted.

    Raises :class:`AllocationBudgetExceeded` when the node budget runs out,
    and lets :class:`SolverBudgetExceeded` from the store propagate.
    """
    cfg = cfg or AllocationConfig()
    predictor = predictor or AnalyticPredictor()
    env = env or Environment()
    rng = rng if rng is not None else np.random.default_rng(cfg.rng_seed)
    x0 = (float(x0[0]), float(x0[1]))
    if not store.is_feasible():
        return None
    search = _Search(reach_set, invar_set, pairs, cfg, predictor, env, rng)
    found = search.run(x0, 0, tuple(reach_set), store, [TimedWaypoint(x0, 0, None)], ())
    if found is None:
        return None
    seq, final = found
    reach_map = {w.progress_id: i for i, w in enumerate(seq) if w.progress_id is not None}
    return AllocationResult(seq, final, reach_map, search.trace, search.nodes)


def verify_allocation(result: AllocationResult, reach_set: Sequence[Progress],
                      invar_set: Sequence[Progress], order: str = "lexmin") -> list[str]:
    """Violated clauses of the waypoint soundness property; empty means sound."""
    problems = []
    try:
        lam = result.final_store.pick_assignment(order)
    except InfeasibleStore:
        return ["final store has no feasible assignment"]
    except SolverBudgetExceeded as e:
        return [f"final store could not be solved: {e}"]
    wps = result.waypoints
    if not wps or wps[0].t != 0:
        problems.append("first waypoint is not at t = 0")
    for i, (w0, w1) in enumerate(zip(wps, wps[1:])):
        if w1.t < w0.t:
            problems.append(f"waypoint {i + 1} time {w1.t} precedes {w0.t}")
        elif w1.t == w0.t and tuple(w1.state) != tuple(w0.state):
            problems.append(f"waypoints {i} and {i + 1} share time {w0.t} but not state")
    for p in reach_set:
        if p.id not in result.reach_map:
            problems.append(f"reach progress {p.id} has no waypoint")
            continue
        w = wps[result.reach_map[p.id]]
        lo, hi = p.window(lam)
        if not lo <= w.t <= hi:
            problems.append(f"waypoint for {p} at t={w.t} outside [{lo},{hi}]")
        if p.predicate.margin(w.state) < 0:
            problems.append(f"waypoint for {p} does not satisfy {p.predicate.name}")
    for p in invar_set:
        lo, hi = p.window(lam)
        for i, w in enumerate(wps):
            if lo <= w.t <= hi and p.predicate.margin(w.state) < 0:
                problems.append(f"waypoint {i} at t={w.t} violates {p} on [{lo},{hi}]")
    return problems
