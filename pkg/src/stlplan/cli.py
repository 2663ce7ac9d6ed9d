"""Command-line front end.

Exit codes: 0 success, 2 the task is infeasible (no allocation or no
generated signal), 1 any other error.
"""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from .allocation import allocate
from .bench.config import PlannerConfig, load_config
from .bench.io import (read_json, read_signal_csv, write_json, write_signal_csv,
                       write_trajectory_csv)
from .bench.pipeline import batch, run_pipeline, summarize, summary_table, write_campaign
from .bench.render import render_svg
from .bench.templates import TEMPLATE_IDS
from .decomposition import decompose, preprocess_split
from .generation import AnalyticPredictor
from .stl.formula import horizon, to_dnf, to_text, validate_pnf
from .stl.parser import parse_formula
from .stl.semantics import downsample_for_eval, eval_boolean, eval_robustness
from .world import Environment, track

EXIT_OK, EXIT_ERROR, EXIT_INFEASIBLE = 0, 1, 2


class _Ctx:
    def __init__(self, args: argparse.Namespace):
        self.args = args
        self.env = Environment.load(args.env) if args.env else Environment()
        self.cfg: PlannerConfig = load_config(args.config)
        self.out = Path(args.out) if args.out else None
        if self.out:
            self.out.mkdir(parents=True, exist_ok=True)

    def formula(self):
        return parse_formula(self.args.formula, self.env.predicate_table())

    def emit(self, name: str, doc) -> None:
        """JSON to ``--out/name`` when given, otherwise to stdout."""
        if self.out:
            write_json(self.out / name, doc)
        else:
            print(json.dumps(doc, indent=2))


def _point(text: str) -> tuple[float, float]:
    try:
        x, y = (float(v) for v in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected x,y but got {text!r}") from None
    return x, y


def _templates(text: str) -> list[int]:
    ids = [int(v) for v in text.split(",") if v.strip()]
    bad = [i for i in ids if i not in TEMPLATE_IDS]
    if bad:
        raise argparse.ArgumentTypeError(f"unknown template ids {bad}")
    return ids


def cmd_parse(ctx: _Ctx) -> int:
    f = ctx.formula()
    problems = validate_pnf(f)
    ctx.emit("parse.json", {"formula": to_text(f), "horizon": horizon(f),
                            "disjuncts": [to_text(d) for d in to_dnf(f)], "problems": problems})
    return EXIT_ERROR if problems else EXIT_OK


def cmd_decompose(ctx: _Ctx) -> int:
    docs = []
    for disjunct in to_dnf(ctx.formula()):
        d = decompose(disjunct)
        reach, invar, pairs = preprocess_split(d)
        doc = d.to_dict()
        doc["split"] = {"reach": [p.to_dict() for p in reach],
                        "invar": [p.to_dict() for p in invar],
                        "pairs": [[pr.reach_id, pr.invar_id] for pr in pairs]}
        docs.append(doc)
    ctx.emit("decomposition.json", docs[0] if len(docs) == 1 else {"disjuncts": docs})
    return EXIT_OK


def cmd_allocate(ctx: _Ctx) -> int:
    f = ctx.formula()
    rng = np.random.default_rng(ctx.args.seed)
    predictor = AnalyticPredictor(ctx.cfg.predictor)
    for idx, disjunct in enumerate(to_dnf(f), start=1):
        d = decompose(disjunct)
        reach, invar, pairs = preprocess_split(d)
        res = allocate(ctx.args.start, reach, invar, pairs, d.store(), ctx.cfg.allocation,
                       predictor, ctx.env, rng)
        if res is not None:
            doc = res.to_dict(with_trace=ctx.args.trace)
            doc["disjunct_index"] = idx
            ctx.emit("allocation.json", doc)
            return EXIT_OK
    print("allocation failed: no timed waypoint sequence found", file=sys.stderr)
    return EXIT_INFEASIBLE


def cmd_plan(ctx: _Ctx) -> int:
    f = ctx.formula()
    out = run_pipeline(f, ctx.env, ctx.args.start, ctx.cfg, ctx.args.seed)
    rep = out.report
    if ctx.out:
        if out.allocation is not None:
            write_json(ctx.out / "allocation.json", out.allocation.to_dict())
        if out.planned is not None:
            write_signal_csv(ctx.out / "planned.csv", out.planned.states)
        if out.executed is not None:
            write_trajectory_csv(ctx.out / "trajectory.csv", out.executed)
        avoid = sorted({p.predicate.name for p in out.invar})
        path = out.planned.states if out.planned is not None else None
        waypoints = out.allocation.waypoints if out.allocation is not None else ()
        (ctx.out / "plan.svg").write_text(render_svg(ctx.env, path, waypoints, avoid, rep.task))
    ctx.emit("report.json", rep.to_dict())
    return EXIT_OK if rep.generation_success else EXIT_INFEASIBLE


def cmd_simulate(ctx: _Ctx) -> int:
    plan = read_signal_csv(ctx.args.signal)
    traj = track(plan, plan[0], ctx.cfg.execution, ctx.cfg.dynamics, ctx.env)
    if ctx.out:
        write_trajectory_csv(ctx.out / "trajectory.csv", traj)
    else:
        print("t,px,py,vx,vy,ax,ay")
        for row in traj.to_rows():
            print(",".join(repr(float(v)) for v in row))
    return EXIT_OK


def cmd_monitor(ctx: _Ctx) -> int:
    f = ctx.formula()
    eta = ctx.args.eta or ctx.cfg.monitor.eta
    s, f_eval = downsample_for_eval(read_signal_csv(ctx.args.signal), f, eta)
    rho = eval_robustness(f_eval, s, 0, ctx.cfg.monitor.robustness())
    ctx.emit("monitor.json", {"satisfied": eval_boolean(f_eval, s, 0), "robustness": rho,
                              "eta": eta, "length": int(s.shape[0])})
    return EXIT_OK


def cmd_bench(ctx: _Ctx) -> int:
    reports = batch(ctx.args.templates, ctx.args.n, ctx.args.seed, ctx.cfg, ctx.env,
                    jobs=ctx.args.jobs, screen_tries=ctx.args.screen)
    if ctx.out:
        write_campaign(reports, ctx.out)
    print(summary_table(summarize(reports)))
    return EXIT_OK


def cmd_render(ctx: _Ctx) -> int:
    path = read_signal_csv(ctx.args.signal) if ctx.args.signal else None
    waypoints = ()
    if ctx.args.allocation:
        from .allocation import TimedWaypoint
        doc = read_json(ctx.args.allocation)
        waypoints = [TimedWaypoint(tuple(w["state"]), int(w["t"]), w.get("progress"))
                     for w in doc["waypoints"]]
    svg = render_svg(ctx.env, path, waypoints, ctx.args.avoid)
    if ctx.out:
        (ctx.out / "render.svg").write_text(svg)
    else:
        sys.stdout.write(svg)
    return EXIT_OK


class _Parser(argparse.ArgumentParser):
    """Usage errors exit 1 so that 2 keeps meaning an infeasible task."""

    def error(self, message: str):
        self.print_usage(sys.stderr)
        self.exit(EXIT_ERROR, f"{self.prog}: error: {message}\n")


def _add_globals(p: argparse.ArgumentParser, suppress: bool) -> None:
    d = (lambda v: argparse.SUPPRESS) if suppress else (lambda v: v)
    p.add_argument("--env", default=d(None), help="environment JSON file")
    p.add_argument("--seed", type=int, default=d(0), help="random seed (u64)")
    p.add_argument("--config", default=d(None), help="TOML or JSON overrides")
    p.add_argument("--out", default=d(None), help="output directory")


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="stlplan", description="STL task planning via timed waypoints")
    _add_globals(ap, suppress=False)
    common = argparse.ArgumentParser(add_help=False)
    _add_globals(common, suppress=True)
    sub = ap.add_subparsers(dest="command", required=True)

    def add(name, fn, help_text, formula=False, start=False):
        p = sub.add_parser(name, parents=[common], help=help_text)
        if formula:
            p.add_argument("formula", help="formula text; atoms name regions in --env")
        if start:
            p.add_argument("--start", type=_point, required=True, help="initial position x,y")
        p.set_defaults(func=fn)
        return p

    add("parse", cmd_parse, "parse and validate a formula", formula=True)
    add("decompose", cmd_decompose, "decompose a formula into progresses", formula=True)
    p = add("allocate", cmd_allocate, "search for timed waypoints", formula=True, start=True)
    p.add_argument("--trace", action="store_true", help="include the search trace")
    add("plan", cmd_plan, "run the full planning pipeline", formula=True, start=True)
    p = add("simulate", cmd_simulate, "track a planned signal with the PD controller")
    p.add_argument("--signal", required=True, help="planned signal CSV")
    p = add("monitor", cmd_monitor, "evaluate a formula on a signal", formula=True)
    p.add_argument("--signal", required=True, help="signal or trajectory CSV")
    p.add_argument("--eta", type=int, default=None, help="temporal sampling factor")
    p = add("bench", cmd_bench, "run a randomised template campaign")
    p.add_argument("--templates", type=_templates, default=list(TEMPLATE_IDS))
    p.add_argument("--n", type=int, default=100, help="tasks per template")
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--screen", type=int, default=1,
                   help="draws per task until allocation succeeds (1 = unscreened)")
    p = add("render", cmd_render, "draw the environment and a path as SVG")
    p.add_argument("--signal", default=None)
    p.add_argument("--allocation", default=None, help="allocation JSON with waypoints")
    p.add_argument("--avoid", nargs="*", default=[], help="region names drawn as avoid regions")
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(_Ctx(args))
    except Exception as e:  # noqa: BLE001 - every failure maps to exit 1
        print(f"error: {e}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
