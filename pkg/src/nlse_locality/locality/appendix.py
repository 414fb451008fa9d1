"""Exact pipeline for the logarithmic nonlinearity: term0, three ``i d/dt`` steps, Gaussian integral."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

from ..gaussian import ExactScalar, integrate_specialized
from ..nonlinearity import Logarithmic, NoNonlinearity, RFunctional, r_poly
from ..symbolic import P, PB, Param, Poly, Pot, T, X, Y, parse_expression, to_poly
from ..symbolic.calculus import TimeSubstitution, substitute_poly

LAMBDA = Param("lambda")
APPENDIX_STATE = "exp(-x^2 - y^2 - x*y)"
APPENDIX_POTENTIAL = "lambda*y^2"


@dataclass(frozen=True)
class Term0:
    """Integrand of ``2 D[0,1,1] + D[0,2,0]`` divided by the recorded coupling prefactor."""

    integrand: Poly
    prefactor: Fraction  # multiplies the coupling b; -1 for the logarithmic case
    coupling: str = "b"


def _d_integrand(R: Poly, mu: int, nu: int) -> Poly:
    dR = R
    for _ in range(mu):
        dR = dR.diff(X)
    dP = Poly.kernel(P)
    for _ in range(nu):
        dP = dP.diff(X)
    return dR * Poly.kernel(PB) * dP


def d_symbol_integrand(f: RFunctional, mu: int, nu: int) -> Poly:
    """Integrand ``(d_x^mu R) PB d_x^nu P`` of ``D[0,mu,nu]`` (couplings kept symbolic)."""
    return _d_integrand(r_poly(f, symbolic_params=True), mu, nu)


def build_term0(f: RFunctional) -> Term0:
    if isinstance(f, NoNonlinearity):
        return Term0(Poly(), Fraction(0))
    if isinstance(f, Logarithmic):
        # R = -b ln(PB P); strip -b so the integrand is the bare log expression.
        log = to_poly(parse_expression("ln(PB*P)"))
        return Term0(_d_integrand(log, 1, 1).scale(2) + _d_integrand(log, 2, 0), Fraction(-1))
    R = r_poly(f)
    return Term0(_d_integrand(R, 1, 1).scale(2) + _d_integrand(R, 2, 0), Fraction(1), coupling="1")


def idot_iterate(e: Poly, n: int, potential=Pot(Y), nonlinearity=None) -> Poly:
    """``n`` rounds of d/dt followed by the ``i d/dt`` substitution rules."""
    if n < 0:
        raise ValueError("n must be non-negative")
    sub = TimeSubstitution(potential, nonlinearity)
    for _ in range(n):
        e = sub(e.diff(T))
    return e


def specialize(e: Poly, state: str = APPENDIX_STATE, potential: str = APPENDIX_POTENTIAL) -> Poly:
    """``V(y) -> lambda y^2`` and ``P, PB ->`` the real Gaussian."""
    g = parse_expression(state)
    return substitute_poly(e, {P: g, PB: g, Pot(Y): parse_expression(potential)})


@dataclass(frozen=True)
class AppendixResult:
    raw: ExactScalar  # int d_lambda specialize(term3)
    norm: ExactScalar  # int |Psi_0|^2
    per_b: ExactScalar  # signal / b
    b: Fraction = Fraction(1)

    @property
    def signal(self) -> ExactScalar:
        return self.per_b * ExactScalar(self.b)

    def signal_text(self) -> str:
        return f"{self.per_b}*b"


def appendix_signal(f: Optional[Logarithmic] = None, iterations: int = 3) -> AppendixResult:
    """``-b * int d_lambda specialize(Idot^3 term0) / int |Psi_0|^2``; exactly ``32 b``.

    Only the linear evolution law enters the time steps: term0 already carries
    one factor of the coupling, so this is the full first-order result.
    """
    f = f if f is not None else Logarithmic(1)
    term0 = build_term0(f)
    term = idot_iterate(term0.integrand, iterations)
    raw = integrate_specialized(specialize(term).diff(LAMBDA))
    norm = integrate_specialized(specialize(Poly.kernel(P) * Poly.kernel(PB)))
    per_b = ExactScalar(term0.prefactor) * raw / norm
    return AppendixResult(raw, norm, per_b, _exact(f.b))


def _exact(v) -> Fraction:
    return Fraction(repr(v)) if isinstance(v, float) else Fraction(v)


__all__ = [
    "APPENDIX_POTENTIAL",
    "APPENDIX_STATE",
    "AppendixResult",
    "LAMBDA",
    "Term0",
    "appendix_signal",
    "build_term0",
    "d_symbol_integrand",
    "idot_iterate",
    "specialize",
]
