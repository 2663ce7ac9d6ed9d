"""File formats: signal and trajectory CSV, JSON documents."""
from __future__ import annotations

import csv
import json
from pathlib import Path
from typing import Any, Sequence

import numpy as np

SIGNAL_HEADER = ("t", "x", "y")
TRAJECTORY_HEADER = ("t", "px", "py", "vx", "vy", "ax", "ay")


def write_rows(path: str | Path, header: Sequence[str], rows) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([repr(float(v)) if not isinstance(v, int) else v for v in row])


def write_signal_csv(path: str | Path, states) -> None:
    s = np.asarray(states, dtype=float)
    write_rows(path, SIGNAL_HEADER, ([t, x, y] for t, (x, y) in enumerate(s[:, :2])))


def write_trajectory_csv(path: str | Path, trajectory) -> None:
    write_rows(path, TRAJECTORY_HEADER, trajectory.to_rows())


def read_signal_csv(path: str | Path) -> np.ndarray:
    """Positions from a signal or trajectory CSV, one row per step.

    Accepts ``t,x,y`` and ``t,px,py,...`` headers; rows must be in time order.
    """
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows:
        raise ValueError(f"{path}: empty signal file")
    header = [h.strip() for h in rows[0]]
    try:
        ix = header.index("x") if "x" in header else header.index("px")
        iy = header.index("y") if "y" in header else header.index("py")
    except ValueError:
        raise ValueError(f"{path}: header needs x,y or px,py columns") from None
    data = [(float(r[ix]), float(r[iy])) for r in rows[1:] if r]
    if not data:
        raise ValueError(f"{path}: signal has no rows")
    return np.array(data)


def write_json(path: str | Path, doc: Any) -> None:
    Path(path).write_text(json.dumps(doc, indent=2, sort_keys=False) + "\n")


def read_json(path: str | Path) -> Any:
    return json.loads(Path(path).read_text())
