"""End-to-end planning driver and the randomised benchmark campaign."""
from __future__ import annotations

import csv
import io
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Any, Iterable, Sequence

import numpy as np

from ..allocation import (AllocationBudgetExceeded, AllocationResult, allocate,
                          verify_allocation)
from ..decomposition import DecompositionError, decompose, preprocess_split
from ..generation import AnalyticPredictor, GeneratedSignal, GenerationFailure, stitch
from ..stl.formula import Formula, horizon, to_dnf, to_text
from ..stl.semantics import downsample_for_eval, eval_boolean, eval_robustness
from ..timebounds import SolverBudgetExceeded
from ..world import Environment, Trajectory, track
from .config import PlannerConfig
from .templates import TEMPLATE_IDS, instantiate_template

TIMING_FIELDS = ("t0_total_planning_seconds", "t1_generation_seconds")


@dataclass
class PlanReport:
    task: str = ""
    template: int | None = None
    seed: int | None = None
    episode: int | None = None
    disjunct_index: int | None = None
    allocation_success: bool = False
    allocation_verified: bool | None = None
    generation_success: bool = False
    planned_robustness: float | None = None
    planned_satisfied: bool | None = None
    plan_sound: bool | None = None
    executed_robustness: float | None = None
    executed_success: bool = False
    t0_total_planning_seconds: float = 0.0
    t1_generation_seconds: float = 0.0
    waypoint_count: int = 0
    search_nodes: int = 0
    clamp_events: int = 0
    horizon_closure: int | None = None
    notes: list[str] = field(default_factory=list)

    def to_dict(self) -> dict[str, Any]:
        return asdict(self)

    def deterministic_view(self) -> dict[str, Any]:
        """Every field except wall-clock timings."""
        d = self.to_dict()
        for k in TIMING_FIELDS:
            d.pop(k)
        return d


@dataclass
class PipelineOutput:
    report: PlanReport
    allocation: AllocationResult | None = None
    assignment: tuple[int, ...] | None = None
    planned: GeneratedSignal | None = None
    executed: Trajectory | None = None
    reach: tuple = ()
    invar: tuple = ()


def run_pipeline(formula: Formula, env: Environment, x0, cfg: PlannerConfig | None = None,
                 seed: int = 0, report: PlanReport | None = None,
                 execute: bool = True) -> PipelineOutput:
    """Plan, verify, execute and monitor one task; failures land in the report."""
    cfg = cfg or PlannerConfig()
    rep = report or PlanReport()
    rep.task = rep.task or to_text(formula)
    out = PipelineOutput(rep)
    rng = np.random.default_rng(seed)
    predictor = AnalyticPredictor(cfg.predictor)
    x0 = (float(x0[0]), float(x0[1]))
    clock = time.perf_counter()

    for idx, disjunct in enumerate(to_dnf(formula), start=1):
        try:
            d = decompose(disjunct)
        except DecompositionError as e:
            rep.notes.append(f"disjunct {idx}: {e}")
            continue
        reach, invar, pairs = preprocess_split(d)
        if d.notes:
            rep.notes.extend(f"disjunct {idx}: {n}" for n in d.notes)
        try:
            res = allocate(x0, reach, invar, pairs, d.store(), cfg.allocation, predictor, env, rng)
        except (AllocationBudgetExceeded, SolverBudgetExceeded) as e:
            rep.notes.append(f"disjunct {idx}: {e}")
            continue
        if res is not None:
            out.allocation, out.reach, out.invar = res, reach, invar
            rep.disjunct_index = idx
            break
        rep.notes.append(f"disjunct {idx}: allocation found no waypoint sequence")

    res = out.allocation
    if res is None:
        rep.t0_total_planning_seconds = time.perf_counter() - clock
        return out
    rep.allocation_success = True
    rep.waypoint_count = len(res.waypoints)
    rep.search_nodes = res.nodes
    problems = verify_allocation(res, out.reach, out.invar, cfg.allocation.time_order)
    rep.allocation_verified = not problems
    rep.notes.extend(f"allocation check: {p}" for p in problems)

    gen_clock = time.perf_counter()
    try:
        lam = res.final_store.pick_assignment(cfg.allocation.time_order)
        out.assignment = lam
        planned = stitch(res.waypoints, lam, out.invar, env, rng,
                         min_length=horizon(formula) + 1, reach_set=out.reach)
    except GenerationFailure as e:
        rep.notes.append(f"generation: {e}")
        planned = None
    now = time.perf_counter()
    rep.t1_generation_seconds = now - gen_clock
    rep.t0_total_planning_seconds = now - clock
    if planned is None:
        return out
    out.planned = planned
    rep.generation_success = True

    rcfg = cfg.monitor.robustness()
    rep.planned_robustness = eval_robustness(formula, planned.states, 0, rcfg)
    rep.planned_satisfied = eval_boolean(formula, planned.states, 0)
    rep.plan_sound = rep.planned_satisfied and rep.planned_robustness >= 0
    if not rep.plan_sound:
        rep.notes.append("planned signal does not satisfy the task: pipeline bug")
    if not execute:
        return out

    traj = track(planned, (*x0, 0.0, 0.0), cfg.execution, cfg.dynamics, env)
    out.executed = traj
    rep.clamp_events = traj.clamp_events
    try:
        sig, f_eval = downsample_for_eval(traj.signal, formula, cfg.monitor.eta)
        rep.executed_robustness = eval_robustness(f_eval, sig, 0, rcfg)
        rep.executed_success = rep.executed_robustness >= 0
    except ValueError as e:
        rep.notes.append(f"monitor: {e}")
    return out


def run_episode(template: int, episode: int, seed: int, cfg: PlannerConfig,
                base_env: Environment | None = None, screen_tries: int = 1) -> PlanReport:
    """Instantiate and run one benchmark task.

    With ``screen_tries > 1`` a task whose allocation fails is redrawn (up
    to that many draws) so the campaign only keeps allocator-feasible tasks.
    """
    base_env = base_env or Environment()
    rng = np.random.default_rng([seed, template, episode])
    for draw in range(max(1, screen_tries)):
        inst = instantiate_template(template, base_env, rng, cfg.templates)
        rep = PlanReport(task=inst.text, template=template, seed=seed, episode=episode,
                         horizon_closure=inst.horizon_closure)
        alloc_seed = int(rng.integers(2**63))
        run_pipeline(inst.formula, inst.environment(base_env), inst.start, cfg, alloc_seed, rep)
        if rep.allocation_success:
            break
    if draw:
        rep.notes.append(f"screening: kept draw {draw + 1}")
    return rep


def _episode_star(args) -> PlanReport:
    return run_episode(*args)


def batch(template_ids: Iterable[int] = TEMPLATE_IDS, n: int = 100, seed: int = 0,
          cfg: PlannerConfig | None = None, base_env: Environment | None = None,
          jobs: int = 1, screen_tries: int = 1) -> list[PlanReport]:
    """One report per (template, episode); results do not depend on ``jobs``."""
    cfg = cfg or PlannerConfig()
    work = [(t, e, seed, cfg, base_env, screen_tries) for t in template_ids for e in range(n)]
    if jobs > 1 and len(work) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            return list(pool.map(_episode_star, work, chunksize=4))
    return [_episode_star(w) for w in work]


SUMMARY_FIELDS = ("template", "n", "sr0", "generation_rate", "sr", "t0_mean", "t0_std",
                  "t1_mean", "t1_std", "planned_nonneg_rate", "allocation_check_failures",
                  "plan_check_failures")


def summarize(reports: Sequence[PlanReport]) -> list[dict[str, Any]]:
    rows = []
    templates = sorted({r.template for r in reports if r.template is not None})
    for t in templates:
        rs = [r for r in reports if r.template == t]
        n = len(rs)
        gen = [r for r in rs if r.generation_success]
        t0 = np.array([r.t0_total_planning_seconds for r in rs])
        t1 = np.array([r.t1_generation_seconds for r in rs])
        rows.append({
            "template": t,
            "n": n,
            "sr0": sum(r.allocation_success for r in rs) / n,
            "generation_rate": len(gen) / n,
            "sr": sum(r.executed_success for r in rs) / n,
            "t0_mean": float(t0.mean()),
            "t0_std": float(t0.std()),
            "t1_mean": float(t1.mean()),
            "t1_std": float(t1.std()),
            "planned_nonneg_rate": (sum(r.planned_robustness >= 0 for r in gen) / len(gen)) if gen else float("nan"),
            "allocation_check_failures": sum(r.allocation_verified is False for r in rs),
            "plan_check_failures": sum(r.plan_sound is False for r in rs),
        })
    return rows


def summary_table(rows: Sequence[dict[str, Any]]) -> str:
    head = (f"{'tmpl':>4} {'n':>4} {'SR0':>6} {'gen':>6} {'SR':>6} {'T0 (s)':>15} "
            f"{'T1 (s)':>15} {'rho>=0':>7} {'badA':>4} {'badP':>4}")
    lines = [head]
    for r in rows:
        lines.append(
            f"{r['template']:>4} {r['n']:>4} {100 * r['sr0']:>5.1f}% {100 * r['generation_rate']:>5.1f}% "
            f"{100 * r['sr']:>5.1f}% {r['t0_mean']:>7.3f}±{r['t0_std']:<7.3f} "
            f"{r['t1_mean']:>7.3f}±{r['t1_std']:<7.3f} {100 * r['planned_nonneg_rate']:>6.1f}% "
            f"{r['allocation_check_failures']:>4} {r['plan_check_failures']:>4}")
    return "\n".join(lines)


def to_csv(rows: Sequence[dict[str, Any]], columns: Sequence[str]) -> str:
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=list(columns), extrasaction="ignore", lineterminator="\n")
    w.writeheader()
    for r in rows:
        w.writerow({k: ("; ".join(v) if isinstance(v, list) else v) for k, v in r.items()})
    return buf.getvalue()


REPORT_FIELDS = tuple(PlanReport.__dataclass_fields__)


def write_campaign(reports: Sequence[PlanReport], out_dir: str | Path) -> dict[str, Path]:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    rows = summarize(reports)
    paths = {"reports": out / "reports.csv", "summary": out / "summary.csv",
             "table": out / "summary.txt"}
    paths["reports"].write_text(to_csv([r.to_dict() for r in reports], REPORT_FIELDS))
    paths["summary"].write_text(to_csv(rows, SUMMARY_FIELDS))
    paths["table"].write_text(summary_table(rows) + "\n")
    return paths
