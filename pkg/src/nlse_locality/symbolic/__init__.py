"""Exact expression engine for wavefunction calculus."""

from .calculus import (
    SubstitutionError,
    TimeSubstitution,
    differentiate,
    evaluate,
    idot,
    laplacian,
    normalize,
    substitute,
    substitute_poly,
    substitute_time_derivatives,
)
from .expr import (
    ONE,
    P,
    PB,
    ZERO,
    Add,
    Atom,
    Const,
    Coord,
    Exp,
    Expr,
    I,
    Ln,
    Mul,
    Param,
    Pot,
    Pow,
    X,
    Y,
    T,
    serialize,
)
from .parser import ParseError, parse_expression
from .poly import Poly, to_poly

__all__ = [
    "Add", "Atom", "Const", "Coord", "Exp", "Expr", "I", "Ln", "Mul", "ONE", "P", "PB",
    "Param", "ParseError", "Poly", "Pot", "Pow", "SubstitutionError", "T", "TimeSubstitution",
    "X", "Y", "ZERO", "differentiate", "evaluate", "idot", "laplacian", "normalize",
    "parse_expression", "serialize", "substitute", "substitute_poly",
    "substitute_time_derivatives", "to_poly",
]
