from ._core import (
    DEFAULT_CAP,
    CapabilityError,
    CapExceeded,
    CyclicRule,
    Error,
    NonConvergence,
    ParseError,
    StrategyNotApplicable,
    TypeMismatch,
    ValidationError,
    check,
    classify,
    ground,
    pretty_print,
    run,
)

__all__ = [
    "DEFAULT_CAP",
    "CapabilityError",
    "CapExceeded",
    "CyclicRule",
    "Error",
    "NonConvergence",
    "ParseError",
    "StrategyNotApplicable",
    "TypeMismatch",
    "ValidationError",
    "check",
    "classify",
    "ground",
    "pretty_print",
    "run",
]
