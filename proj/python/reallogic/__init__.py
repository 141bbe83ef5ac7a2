"""Differentiable first-order fuzzy logic.

Theories are written in the .rl language, trained by maximizing their
satisfiability and queried for truth values or term values.
"""

from ._impl import (
    DataError,
    LogicError,
    Theory,
    TrainingError,
    demo_ids,
    format_formula,
    read_params,
    run_demo,
)

__all__ = [
    "DataError",
    "LogicError",
    "Theory",
    "TrainingError",
    "demo_ids",
    "format_formula",
    "read_params",
    "run_demo",
    "truth",
]

__version__ = "0.1.0"


def truth(theory, formula, **unseen):
    """Truth of a closed formula, or the array of truths over its free variables."""
    r = theory.query(formula, unseen)
    v = r["values"]
    return float(v) if v.ndim == 0 else v
