"""Exact nonlocality tests: moment hierarchy, appendix pipeline, Gaussian ansatz."""

from .appendix import AppendixResult, Term0, appendix_signal, build_term0, idot_iterate, specialize
from .hierarchy import TD, t_recurrence_rhs, third_iterate_T, x2_moment_identity
from .werner import GaussianState, derive_gaussian_ode, werner_test

__all__ = [
    "AppendixResult",
    "GaussianState",
    "TD",
    "Term0",
    "appendix_signal",
    "build_term0",
    "derive_gaussian_ode",
    "idot_iterate",
    "specialize",
    "t_recurrence_rhs",
    "third_iterate_T",
    "werner_test",
    "x2_moment_identity",
]
