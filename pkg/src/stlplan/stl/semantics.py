"""Boolean and quantitative semantics over discrete signals.

Both evaluators work bottom-up: each subformula gets a trace holding its
value at every start index where it is defined, so shared windows are never
recomputed.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from .formula import (And, Always, Atom, Eventually, Formula, FormulaError, Interval, NegAtom,
                      Or, TrueF, Until, horizon, map_intervals)


class SignalTooShort(ValueError):
    pass


@dataclass(frozen=True)
class RobustnessConfig:
    rho_max: float = 10.0

    def __post_init__(self) -> None:
        if not self.rho_max > 0:
            raise ValueError("rho_max must be positive")


def as_signal(states) -> np.ndarray:
    s = np.asarray(states, dtype=float)
    if s.ndim == 1:
        s = s[None, :]
    if s.ndim != 2 or s.shape[0] == 0 or s.shape[1] < 2:
        raise ValueError(f"a signal needs shape (T+1, d>=2), got {s.shape}")
    return s


def _window_reduce(child: np.ndarray, iv: Interval, n_out: int, reduce) -> np.ndarray:
    windows = sliding_window_view(child, iv.b - iv.a + 1)[iv.a:iv.a + n_out]
    return reduce(windows, axis=1)


def _trace(f: Formula, s: np.ndarray, numeric: bool, rho_max: float, memo: dict) -> np.ndarray:
    hit = memo.get(f)
    if hit is not None:
        return hit
    n = s.shape[0] - horizon(f)
    if isinstance(f, TrueF):
        out = np.full(n, rho_max) if numeric else np.ones(n, dtype=bool)
    elif isinstance(f, (Atom, NegAtom)):
        m = f.predicate.margins(s)
        if isinstance(f, NegAtom):
            m = -m
        out = m if numeric else m >= 0.0
    elif isinstance(f, (And, Or)):
        left = _trace(f.left, s, numeric, rho_max, memo)[:n]
        right = _trace(f.right, s, numeric, rho_max, memo)[:n]
        out = np.minimum(left, right) if isinstance(f, And) else np.maximum(left, right)
    elif isinstance(f, Eventually):
        out = _window_reduce(_trace(f.child, s, numeric, rho_max, memo), f.interval, n, np.max)
    elif isinstance(f, Always):
        out = _window_reduce(_trace(f.child, s, numeric, rho_max, memo), f.interval, n, np.min)
    elif isinstance(f, Until):
        r1 = _trace(f.left, s, numeric, rho_max, memo)
        r2 = _trace(f.right, s, numeric, rho_max, memo)
        a, b = f.interval.a, f.interval.b
        running = r1[:n].copy()
        out = None
        for k in range(b + 1):
            if k:
                running = np.minimum(running, r1[k:k + n])
            if k >= a:
                cand = np.minimum(r2[k:k + n], running)
                out = cand if out is None else np.maximum(out, cand)
    else:
        raise TypeError(f"not a formula: {f!r}")
    memo[f] = out
    return out


def _check_length(f: Formula, s: np.ndarray, t: int) -> None:
    h = horizon(f)
    if t < 0 or t + h > s.shape[0] - 1:
        raise SignalTooShort(
            f"evaluating at t={t} needs {t + h + 1} states (horizon {h}), signal has {s.shape[0]}")


def eval_boolean(f: Formula, s, t: int = 0) -> bool:
    s = as_signal(s)
    _check_length(f, s, t)
    return bool(_trace(f, s, False, 0.0, {})[t])


def eval_robustness(f: Formula, s, t: int = 0, cfg: RobustnessConfig | None = None) -> float:
    cfg = cfg or RobustnessConfig()
    s = as_signal(s)
    _check_length(f, s, t)
    return float(_trace(f, s, True, cfg.rho_max, {})[t])


def robustness_trace(f: Formula, s, cfg: RobustnessConfig | None = None) -> np.ndarray:
    """Robustness at every start index where ``f`` is defined on ``s``."""
    cfg = cfg or RobustnessConfig()
    s = as_signal(s)
    _check_length(f, s, 0)
    return _trace(f, s, True, cfg.rho_max, {}).copy()


def downsample_for_eval(s, f: Formula, eta: int) -> tuple[np.ndarray, Formula]:
    """Keep every ``eta``-th state and divide every interval endpoint by ``eta``."""
    if int(eta) != eta or eta < 1:
        raise ValueError(f"eta must be a positive integer, got {eta}")
    s = as_signal(s)
    if eta == 1:
        return s, f

    def scale(iv: Interval) -> Interval:
        if iv.a % eta or iv.b % eta:
            raise FormulaError(f"interval {iv} is not divisible by eta={eta}")
        return Interval(iv.a // eta, iv.b // eta)

    return s[::eta], map_intervals(f, scale)
