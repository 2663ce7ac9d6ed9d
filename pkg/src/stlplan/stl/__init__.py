from .formula import (And, Always, Atom, Eventually, F, Formula, FormulaError, G, Interval,
                      NegAtom, Or, TrueF, U, Until, conj, has_or, horizon, predicates, to_dnf,
                      to_text, validate_pnf, walk)
from .parser import ParseError, parse_formula
from .predicates import CIRCLE_INSIDE, CIRCLE_OUTSIDE, HALFPLANE, Predicate, circle, halfplane
from .semantics import (RobustnessConfig, SignalTooShort, as_signal, downsample_for_eval,
                        eval_boolean, eval_robustness, robustness_trace)

__all__ = [
    "And", "Always", "Atom", "Eventually", "F", "Formula", "FormulaError", "G", "Interval",
    "NegAtom", "Or", "TrueF", "U", "Until", "conj", "has_or", "horizon", "predicates", "to_dnf",
    "to_text", "validate_pnf", "walk", "ParseError", "parse_formula", "CIRCLE_INSIDE",
    "CIRCLE_OUTSIDE", "HALFPLANE", "Predicate", "circle", "halfplane", "RobustnessConfig",
    "SignalTooShort", "as_signal", "downsample_for_eval", "eval_boolean", "eval_robustness",
    "robustness_trace",
]
