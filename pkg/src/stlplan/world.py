"""The planar reference world: arena, discs, double-integrator dynamics, tracking.

Positions live in a bounded rectangle.  The robot is a point double
integrator integrated with explicit Euler at ``dt / k`` per control update,
where ``k`` control updates make up one planning step.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Mapping

import numpy as np

from .stl.predicates import CIRCLE_INSIDE, Predicate


@dataclass(frozen=True)
class Disc:
    center: tuple[float, float]
    radius: float

    def __post_init__(self) -> None:
        object.__setattr__(self, "center", (float(self.center[0]), float(self.center[1])))
        if not self.radius > 0:
            raise ValueError("disc radius must be positive")

    def distance(self, p) -> float:
        """Signed distance from ``p`` to the disc boundary (negative inside)."""
        dx, dy = float(p[0]) - self.center[0], float(p[1]) - self.center[1]
        return math.sqrt(dx * dx + dy * dy) - self.radius


@dataclass(frozen=True)
class Environment:
    bounds: tuple[float, float, float, float] = (0.0, 0.0, 10.0, 10.0)
    obstacles: tuple[Disc, ...] = (Disc((5.0, 5.0), 1.5),)
    regions: Mapping[str, Predicate] = field(default_factory=dict, hash=False)

    def __post_init__(self) -> None:
        xmin, ymin, xmax, ymax = (float(v) for v in self.bounds)
        if not (xmin < xmax and ymin < ymax):
            raise ValueError(f"degenerate bounds {self.bounds}")
        object.__setattr__(self, "bounds", (xmin, ymin, xmax, ymax))
        object.__setattr__(self, "obstacles", tuple(self.obstacles))
        object.__setattr__(self, "regions", dict(self.regions))
        for o in self.obstacles:
            if not self._disc_meets_bounds(o.center, o.radius):
                raise ValueError(f"obstacle {o} lies outside the arena")
        for name, p in self.regions.items():
            if name != p.name:
                raise ValueError(f"region key {name!r} does not match predicate name {p.name!r}")
            if p.is_disc and not self._disc_meets_bounds(p.center, p.radius):
                raise ValueError(f"region {name} lies outside the arena")

    def _disc_meets_bounds(self, c, r) -> bool:
        cx = min(max(c[0], self.bounds[0]), self.bounds[2])
        cy = min(max(c[1], self.bounds[1]), self.bounds[3])
        return math.hypot(c[0] - cx, c[1] - cy) <= r

    def in_bounds(self, p, eps: float = 0.0) -> bool:
        xmin, ymin, xmax, ymax = self.bounds
        return xmin - eps <= p[0] <= xmax + eps and ymin - eps <= p[1] <= ymax + eps

    def clamp(self, p) -> np.ndarray:
        xmin, ymin, xmax, ymax = self.bounds
        return np.array([min(max(p[0], xmin), xmax), min(max(p[1], ymin), ymax)])

    def collision_free(self, p, clearance: float = 0.0) -> bool:
        return all(o.distance(p) >= clearance for o in self.obstacles)

    def predicate_table(self) -> dict[str, Predicate]:
        return dict(self.regions)

    def with_regions(self, regions: Mapping[str, Predicate]) -> "Environment":
        return Environment(self.bounds, self.obstacles, dict(regions))

    def to_dict(self) -> dict[str, Any]:
        xmin, ymin, xmax, ymax = self.bounds
        return {
            "bounds": [[xmin, xmax], [ymin, ymax]],
            "obstacles": [{"c": list(o.center), "r": o.radius} for o in self.obstacles],
            "regions": {n: p.to_dict() for n, p in sorted(self.regions.items())},
        }

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> "Environment":
        b = data.get("bounds", [[0.0, 10.0], [0.0, 10.0]])
        bounds = (b[0][0], b[1][0], b[0][1], b[1][1]) if isinstance(b[0], (list, tuple)) else tuple(b)
        obstacles = tuple(Disc(tuple(o["c"]), float(o["r"])) for o in data.get("obstacles", []))
        regions = {}
        for name, spec in data.get("regions", {}).items():
            regions[name] = Predicate.from_dict(name, {"kind": CIRCLE_INSIDE, **spec})
        return cls(bounds, obstacles, regions)

    @classmethod
    def load(cls, path: str | Path) -> "Environment":
        return cls.from_dict(json.loads(Path(path).read_text()))

    def save(self, path: str | Path) -> None:
        Path(path).write_text(json.dumps(self.to_dict(), indent=2) + "\n")


@dataclass(frozen=True)
class DynamicsParams:
    dt: float = 1.0
    v_max: float = 1.0
    a_max: float = 0.5

    def __post_init__(self) -> None:
        if min(self.dt, self.v_max, self.a_max) <= 0:
            raise ValueError("dt, v_max and a_max must all be positive")


@dataclass(frozen=True)
class ExecutionConfig:
    """Tracking gains and control updates per planning step.

    The law is a one-step predictive PD: with ``h = dt / k``,
    ``a = (kp * (r_next - (p + v*h)) + kd * (w_next - v) * h) / h**2``,
    where ``w_next`` is the plan's finite-difference velocity one update
    ahead.  ``kp = kd = 1`` is deadbeat for the Euler-integrated double
    integrator: without saturation the position matches the plan exactly
    from the second update on.
    """

    kp: float = 1.0
    kd: float = 1.0
    k: int = 1

    def __post_init__(self) -> None:
        if self.kp < 0 or self.kd < 0:
            raise ValueError("gains must be non-negative")
        if int(self.k) != self.k or self.k < 1:
            raise ValueError("k must be a positive integer")


def _clip_norm(v: np.ndarray, limit: float) -> np.ndarray:
    n = float(np.sqrt(v @ v))
    return v if n <= limit else v * (limit / n)


def step_dynamics(state, action, params: DynamicsParams, dt: float | None = None) -> np.ndarray:
    """One explicit Euler step of the double integrator; ``state`` is (px, py, vx, vy)."""
    h = params.dt if dt is None else dt
    x = np.asarray(state, dtype=float)
    p, v = x[:2], x[2:4]
    a = _clip_norm(np.asarray(action, dtype=float), params.a_max)
    return np.concatenate([p + v * h, _clip_norm(v + a * h, params.v_max)])


def margin(predicate: Predicate, state) -> float:
    return predicate.margin(state)


@dataclass(frozen=True, eq=False)
class Trajectory:
    """Every control-update state (pos+vel) and the action before each."""

    states: np.ndarray
    actions: np.ndarray
    k: int
    clamp_events: int = 0

    @property
    def signal(self) -> np.ndarray:
        """Positions at planning-step boundaries."""
        return self.states[:: self.k, :2]

    def to_rows(self) -> list[list[float]]:
        rows = []
        for i, x in enumerate(self.states):
            a = self.actions[i] if i < len(self.actions) else np.zeros(2)
            rows.append([i / self.k, *x[:4], *a])
        return rows


def track(planned, x0_full, exec_cfg: ExecutionConfig | None = None,
          params: DynamicsParams | None = None, env: Environment | None = None) -> Trajectory:
    """Follow a planned position sequence with ``k`` control updates per step."""
    exec_cfg = exec_cfg or ExecutionConfig()
    params = params or DynamicsParams()
    plan = np.asarray(getattr(planned, "states", planned), dtype=float)[:, :2]
    k = int(exec_cfg.k)
    h = params.dt / k
    n = plan.shape[0]
    x = np.asarray(x0_full, dtype=float)
    if x.shape[0] == 2:
        x = np.concatenate([x, np.zeros(2)])
    if not np.allclose(x[:2], plan[0]):
        raise ValueError("initial position must equal the first planned state")

    def ref(g: int) -> np.ndarray:
        # plan position at control update g, linearly interpolated
        s, j = divmod(g, k)
        if s >= n - 1:
            return plan[-1]
        return plan[s] + (plan[s + 1] - plan[s]) * (j / k)

    total = k * (n - 1)
    states = np.empty((total + 1, 4))
    actions = np.empty((total, 2))
    states[0] = x
    clamps = 0
    for g in range(total):
        p, v = x[:2], x[2:4]
        r1, r2 = ref(g + 1), ref(g + 2)
        w = (r2 - r1) / h
        a = (exec_cfg.kp * (r1 - (p + v * h)) + exec_cfg.kd * (w - v) * h) / (h * h)
        a = _clip_norm(a, params.a_max)
        x = step_dynamics(x, a, params, h)
        if env is not None and not env.in_bounds(x[:2]):
            x = np.concatenate([env.clamp(x[:2]), x[2:4]])
            clamps += 1
        actions[g] = a
        states[g + 1] = x
    return Trajectory(states, actions, k, clamps)
