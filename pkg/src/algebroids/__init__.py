"""Exact construction and verification of bracket structures from operator systems."""

__version__ = "0.1.0"

from .expr import Expr, ParamEnv, parse_expr, differentiate, eval_at, is_zero

__all__ = [
    "Expr",
    "ParamEnv",
    "parse_expr",
    "differentiate",
    "eval_at",
    "is_zero",
    "__version__",
]
