"""Exact noncommutative symbol calculus for the rescaled torus Dirac operator."""

from .algebra import (
    COMMUTING,
    DerivativeRuleError,
    SymbolPoly,
    compose,
    pauli_mul,
)
from .build import build_a_symbols, build_b_symbols, parametrix_defect
from .evalx import (
    ExactEnv,
    NumericEnv,
    eval_exact,
    eval_numeric,
    poly_is_zero_exact,
    polys_equal_exact,
    random_env,
)
from .serialize import poly_to_json, poly_to_latex

__all__ = [
    "COMMUTING",
    "DerivativeRuleError",
    "SymbolPoly",
    "compose",
    "pauli_mul",
    "build_a_symbols",
    "build_b_symbols",
    "parametrix_defect",
    "ExactEnv",
    "NumericEnv",
    "eval_exact",
    "eval_numeric",
    "poly_is_zero_exact",
    "polys_equal_exact",
    "random_env",
    "poly_to_json",
    "poly_to_latex",
]
