"""Static SVG drawing of an arena, its regions and a planned or executed path."""
from __future__ import annotations

from typing import Sequence
from xml.sax.saxutils import escape

import numpy as np

from ..stl.predicates import CIRCLE_INSIDE, CIRCLE_OUTSIDE
from ..world import Environment

SCALE = 50.0
PAD = 20.0


def _num(v: float) -> str:
    return f"{v:.3f}".rstrip("0").rstrip(".")


def render_svg(env: Environment, path=None, waypoints: Sequence = (),
               avoid: Sequence[str] = (), title: str = "") -> str:
    """SVG text; identical inputs give byte-identical output.

    ``waypoints`` holds objects with ``state`` and ``t`` attributes, and
    regions named in ``avoid`` are drawn in red.
    """
    xmin, ymin, xmax, ymax = env.bounds
    w = (xmax - xmin) * SCALE + 2 * PAD
    h = (ymax - ymin) * SCALE + 2 * PAD

    def px(x: float) -> str:
        return _num(PAD + (x - xmin) * SCALE)

    def py(y: float) -> str:
        return _num(PAD + (ymax - y) * SCALE)

    out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{_num(w)}" height="{_num(h)}" '
           f'viewBox="0 0 {_num(w)} {_num(h)}">']
    if title:
        out.append(f"<title>{escape(title)}</title>")
    out.append(f'<rect class="arena" x="{px(xmin)}" y="{py(ymax)}" width="{_num((xmax - xmin) * SCALE)}" '
               f'height="{_num((ymax - ymin) * SCALE)}" fill="white" stroke="black"/>')
    for o in env.obstacles:
        out.append(f'<circle class="obstacle" cx="{px(o.center[0])}" cy="{py(o.center[1])}" '
                   f'r="{_num(o.radius * SCALE)}" fill="#555"/>')
    for name, pred in sorted(env.regions.items()):
        if pred.kind not in (CIRCLE_INSIDE, CIRCLE_OUTSIDE):
            continue
        colour = "#e66" if name in avoid or pred.kind == CIRCLE_OUTSIDE else "#6a6"
        cx, cy = pred.center
        out.append(f'<circle class="region" cx="{px(cx)}" cy="{py(cy)}" r="{_num(pred.radius * SCALE)}" '
                   f'fill="{colour}" fill-opacity="0.4" stroke="{colour}"/>')
        out.append(f'<text class="label" x="{px(cx)}" y="{py(cy)}" text-anchor="middle" '
                   f'font-size="12">{escape(name)}</text>')
    if path is not None and len(path):
        pts = np.asarray(path, dtype=float)[:, :2]
        coords = " ".join(f"{px(x)},{py(y)}" for x, y in pts)
        out.append(f'<polyline class="path" points="{coords}" fill="none" stroke="blue" stroke-width="1.5"/>')
    for wp in waypoints:
        x, y = wp.state
        out.append(f'<circle class="waypoint" cx="{px(x)}" cy="{py(y)}" r="3" fill="black"/>')
        out.append(f'<text class="time" x="{px(x)}" y="{py(y)}" dx="5" dy="-5" font-size="10">'
                   f't={wp.t}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"
