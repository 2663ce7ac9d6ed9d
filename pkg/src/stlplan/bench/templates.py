"""Randomised instances of the nine benchmark task templates.

Regions are sampled first.  Interval endpoints are then drawn around a
hidden nominal schedule (visit order plus straight-line travel times at the
reference speed), so most tasks are feasible but not trivially so.  Slack
and offsets are random, and nothing guarantees feasibility.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ..stl.formula import Formula, horizon
from ..stl.parser import parse_formula
from ..stl.predicates import Predicate, circle
from ..world import Environment

TEMPLATE_IDS = tuple(range(1, 10))

# bounded part of each template; AVOID names the region of a trailing G(!mu)
SKELETONS = {
    1: "F{I1} mu1",
    2: "F{I1} mu1 & F{I2} mu2",
    3: "F{I1} mu1 & (!mu1 U{I1} mu2)",
    4: "F{I1}(mu1 & F{I2}(mu2 & F{I3}(mu3 & F{I4} mu4)))",
    5: "F{I1}(mu1 & F{I2}(mu2 & F{I3} mu3))",
    6: "F{I1} mu1 & F{I2} mu2 & F{I3} mu3",
    7: "F{I1} G{I2} mu1 & F{I3} mu2",
    8: "F{I1}(mu1 & F{I2} G{I3} mu2)",
    9: "F{I1}(mu1 & F{I2} mu2 & F{I3} mu3 & G{I4} mu4)",
}
AVOID = {1: "mu2", 5: "mu4", 6: "mu4", 7: "mu3"}
N_REGIONS = {1: 2, 2: 2, 3: 2, 4: 4, 5: 4, 6: 4, 7: 3, 8: 2, 9: 4}


@dataclass(frozen=True)
class TemplateConfig:
    radius_range: tuple[float, float] = (0.4, 0.8)
    region_gap: float = 0.3
    max_horizon: int = 120
    v_nominal: float = 0.5
    early: tuple[int, int] = (0, 8)
    slack: tuple[int, int] = (4, 15)
    stay: tuple[int, int] = (3, 10)
    max_tries: int = 200


@dataclass(frozen=True)
class TaskInstance:
    template: int
    text: str
    formula: Formula
    regions: dict[str, Predicate] = field(hash=False)
    start: tuple[float, float]
    horizon_closure: int | None

    def environment(self, base: Environment) -> Environment:
        return base.with_regions(self.regions)


def _iv(a: int, b: int) -> str:
    return f"[{a},{b}]"


def _sample_regions(n: int, env: Environment, rng: np.random.Generator,
                    cfg: TemplateConfig) -> list[tuple[np.ndarray, float]] | None:
    xmin, ymin, xmax, ymax = env.bounds
    out: list[tuple[np.ndarray, float]] = []
    for _ in range(cfg.max_tries):
        if len(out) == n:
            return out
        r = float(rng.uniform(*cfg.radius_range))
        c = np.array([rng.uniform(xmin + r, xmax - r), rng.uniform(ymin + r, ymax - r)])
        if any(np.linalg.norm(c - np.asarray(o.center)) < r + o.radius + cfg.region_gap
               for o in env.obstacles):
            continue
        if any(np.linalg.norm(c - c2) < r + r2 + cfg.region_gap for c2, r2 in out):
            continue
        out.append((c, r))
    return out if len(out) == n else None


def _sample_start(regions, env: Environment, rng: np.random.Generator,
                  cfg: TemplateConfig) -> np.ndarray | None:
    xmin, ymin, xmax, ymax = env.bounds
    for _ in range(cfg.max_tries):
        p = np.array([rng.uniform(xmin, xmax), rng.uniform(ymin, ymax)])
        if not env.collision_free(p, cfg.region_gap):
            continue
        if all(np.linalg.norm(p - c) >= r + cfg.region_gap for c, r in regions):
            return p
    return None


class _Schedule:
    """Interval sampler around nominal arrival times."""

    def __init__(self, rng: np.random.Generator, cfg: TemplateConfig):
        self.rng = rng
        self.cfg = cfg

    def travel(self, p, q) -> int:
        return int(math.ceil(float(np.linalg.norm(np.asarray(q) - np.asarray(p))) / self.cfg.v_nominal))

    def around(self, nominal: int) -> tuple[int, int]:
        a = max(0, nominal - int(self.rng.integers(self.cfg.early[0], self.cfg.early[1] + 1)))
        b = nominal + int(self.rng.integers(self.cfg.slack[0], self.cfg.slack[1] + 1))
        return a, b

    def stay(self) -> tuple[int, int]:
        a = int(self.rng.integers(0, 3))
        return a, a + int(self.rng.integers(self.cfg.stay[0], self.cfg.stay[1] + 1))


def _fill(template: int, start, centers, s: _Schedule) -> dict[str, tuple[int, int]]:
    """Interval endpoints for one template given the hidden visit plan."""
    c = centers
    iv: dict[str, tuple[int, int]] = {}
    if template == 1:
        iv["I1"] = s.around(s.travel(start, c[0]))
    elif template == 2:
        first, second = (0, 1) if s.rng.random() < 0.5 else (1, 0)
        t1 = s.travel(start, c[first])
        t2 = t1 + s.travel(c[first], c[second])
        iv[f"I{first + 1}"], iv[f"I{second + 1}"] = s.around(t1), s.around(t2)
    elif template == 3:
        t2 = s.travel(start, c[1])
        t1 = t2 + s.travel(c[1], c[0])
        a, _ = s.around(t2)
        _, b = s.around(t1)
        iv["I1"] = (a, b)
    elif template in (4, 5):
        hops = [start] + list(c[:4 if template == 4 else 3])
        for k in range(len(hops) - 1):
            iv[f"I{k + 1}"] = s.around(s.travel(hops[k], hops[k + 1]))
    elif template == 6:
        order = s.rng.permutation(3)
        t, here = 0, start
        for k in order:
            t += s.travel(here, c[k])
            here = c[k]
            iv[f"I{k + 1}"] = s.around(t)
    elif template == 7:
        a2, b2 = s.stay()
        iv["I2"] = (a2, b2)
        if s.rng.random() < 0.5:
            t_in = s.travel(start, c[0])
            iv["I1"] = s.around(max(0, t_in - a2))
            iv["I3"] = s.around(t_in + (b2 - a2) + s.travel(c[0], c[1]))
        else:
            t2 = s.travel(start, c[1])
            iv["I3"] = s.around(t2)
            iv["I1"] = s.around(max(0, t2 + s.travel(c[1], c[0]) - a2))
    elif template == 8:
        iv["I1"] = s.around(s.travel(start, c[0]))
        a3, b3 = s.stay()
        iv["I3"] = (a3, b3)
        iv["I2"] = s.around(max(0, s.travel(c[0], c[1]) - a3))
    elif template == 9:
        iv["I1"] = s.around(s.travel(start, c[0]))
        order = (1, 2) if s.rng.random() < 0.5 else (2, 1)
        t, here = 0, c[0]
        for k in order:
            t += s.travel(here, c[k])
            here = c[k]
            iv[f"I{k + 1}"] = s.around(t)
        t4 = t + s.travel(here, c[3])
        a4 = t4 + int(s.rng.integers(s.cfg.slack[0], s.cfg.slack[1] + 1))
        iv["I4"] = (a4, a4 + int(s.rng.integers(s.cfg.stay[0], s.cfg.stay[1] + 1)))
    else:
        raise ValueError(f"unknown template {template}")
    return iv


def instantiate_template(template: int, env: Environment | None = None,
                         rng: np.random.Generator | None = None,
                         cfg: TemplateConfig | None = None) -> TaskInstance:
    """Sample regions, start and intervals for one template.

    An unbounded always is closed over the horizon of the rest of the
    formula; the closure length is recorded on the instance.
    """
    if template not in SKELETONS:
        raise ValueError(f"template id must be in 1..9, got {template}")
    env = env or Environment()
    rng = rng if rng is not None else np.random.default_rng()
    cfg = cfg or TemplateConfig()
    best = None
    for _ in range(cfg.max_tries):
        discs = _sample_regions(N_REGIONS[template], env, rng, cfg)
        if discs is None:
            continue
        start = _sample_start(discs, env, rng, cfg)
        if start is None:
            continue
        iv = _fill(template, start, [d[0] for d in discs], _Schedule(rng, cfg))
        regions = {f"mu{i + 1}": circle(f"mu{i + 1}", tuple(d[0]), d[1]) for i, d in enumerate(discs)}
        text = SKELETONS[template].format(**{k: _iv(*v) for k, v in iv.items()})
        closure = None
        if template in AVOID:
            closure = horizon(parse_formula(text, regions))
            text += f" & G{_iv(0, closure)} !{AVOID[template]}"
        formula = parse_formula(text, regions)
        inst = TaskInstance(template, text, formula, regions, (float(start[0]), float(start[1])),
                            closure)
        if horizon(formula) <= cfg.max_horizon:
            return inst
        if best is None or horizon(formula) < horizon(best.formula):
            best = inst
    if best is None:
        raise RuntimeError(f"could not place regions for template {template}")
    return best
