"""Moment hierarchy of ``T`` and ``D`` integrals and its formal iteration.

``T[k,nu]   = int exp(ikx) PB d_x^nu P``
``D[k,mu,nu] = int exp(ikx) (d_x^mu R) PB d_x^nu P``

Linear combinations of these symbols are ordinary :class:`Poly` objects whose
kernels are :class:`TD` nodes, so ``k`` derivatives, coefficient extraction and
serialization come from the symbolic engine.
"""

from __future__ import annotations

from fractions import Fraction
from math import comb
from typing import Optional

from ..symbolic import I, Param, Poly
from ..symbolic.expr import Expr, node

K = Param("k")


@node
class TD(Expr):
    """One hierarchy symbol with ``dt`` time and ``dk`` momentum derivatives.

    ``at_zero`` marks evaluation at ``k = 0`` after all ``k`` derivatives.
    """

    kind: str
    mu: int
    nu: int
    dt: int = 0
    dk: int = 0
    at_zero: bool = False

    def __post_init__(self):
        if self.kind not in ("T", "D"):
            raise ValueError(f"unknown hierarchy symbol {self.kind!r}")
        if self.kind == "D" and self.mu < 1:
            raise ValueError("D symbols need mu >= 1")
        if self.kind == "T" and self.mu != 0:
            raise ValueError("T symbols carry no mu index")
        if min(self.nu, self.dt, self.dk) < 0:
            raise ValueError("indices must be non-negative")

    def sort_key(self):
        return (self.kind, self.nu if self.kind == "T" else self.mu, self.nu, self.dt, self.dk, self.at_zero)

    def serialize(self) -> str:
        idx = ("0" if self.at_zero else "k",) + ((str(self.mu),) if self.kind == "D" else ()) + (str(self.nu),)
        text = f"{self.kind}[{','.join(idx)}]"
        if self.dk:
            text = ("dk^%d " % self.dk if self.dk > 1 else "dk ") + text
        if self.dt:
            text = ("dt^%d " % self.dt if self.dt > 1 else "dt ") + text
        return text

    def derivative(self, var) -> Poly:
        if var == K and not self.at_zero:
            return Poly.kernel(TD(self.kind, self.mu, self.nu, self.dt, self.dk + 1))
        return Poly()

    def __repr__(self):
        return self.serialize()


def T(nu: int, **kw) -> Poly:
    return Poly.kernel(TD("T", 0, nu, **kw))


def D(mu: int, nu: int, **kw) -> Poly:
    return Poly.kernel(TD("D", mu, nu, **kw))


def t_recurrence_rhs(nu: int) -> Poly:
    """``i dT[k,nu]/dt = -k^2 T[k,nu] + 2ik T[k,nu+1] + sum_mu binom(nu,mu) D[k,mu,nu-mu]``."""
    if nu < 0:
        raise ValueError("nu must be non-negative")
    k = Poly.kernel(K)
    i = Poly.kernel(I)
    out = -(k * k * T(nu)) + (i * k).scale(2) * T(nu + 1)
    for mu in range(1, nu + 1):
        out = out + D(mu, nu - mu).scale(comb(nu, mu))
    return out


def _i_ddt(sym: Expr) -> Optional[Poly]:
    if not isinstance(sym, TD):
        return None
    if sym.dk or sym.at_zero:
        raise ValueError("apply i d/dt before momentum derivatives")
    if sym.kind == "T" and sym.dt == 0:
        return t_recurrence_rhs(sym.nu)
    # D symbols (and already time-differentiated T) only gain a formal derivative.
    return Poly.kernel(I) * Poly.kernel(TD(sym.kind, sym.mu, sym.nu, sym.dt + 1))


def i_ddt(p: Poly) -> Poly:
    """``i d/dt`` of a combination that is linear in hierarchy symbols."""
    for m in p.terms:
        if sum(e for k, e in m if isinstance(k, TD)) != 1:
            raise ValueError("expression must be linear in hierarchy symbols")
    return p.map_kernels(_i_ddt)


def iterate_T(n: int) -> Poly:
    """``(i d/dt)^n T[k,0]`` by formal iteration of the recurrence."""
    out = T(0)
    for _ in range(n):
        out = i_ddt(out)
    return out


def third_iterate_T() -> Poly:
    return iterate_T(3)


def at_k_zero(p: Poly) -> Poly:
    def repl(k: Expr) -> Optional[Poly]:
        if k == K:
            return Poly()
        if isinstance(k, TD):
            return Poly.kernel(TD(k.kind, k.mu, k.nu, k.dt, k.dk, True))
        return None

    return p.map_kernels(repl)


def coefficient(p: Poly, sym: TD) -> Poly:
    """Coefficient of ``sym`` in a combination linear in hierarchy symbols."""
    out = Poly()
    for m, c in p.terms.items():
        if any(k == sym for k, _ in m):
            out = out + Poly.from_monomial({k: e for k, e in m if k != sym}, c)
    return out


def time_derivative(p: Poly, n: int) -> Poly:
    """Formal ``d^n/dt^n`` of a combination of symbols."""
    def bump(k: Expr) -> Optional[Poly]:
        if isinstance(k, TD):
            return Poly.kernel(TD(k.kind, k.mu, k.nu, k.dt + n, k.dk, k.at_zero))
        return None

    return p.map_kernels(bump) if n else p


def x2_moment_identity(n: int = 0, general: bool = False) -> Poly:
    """``d^(n+3)/dt^(n+3) int x^2 |Psi|^2`` at ``k = 0`` as a combination of ``D`` symbols.

    Uses ``int x^2 |Psi|^2 = -d_k^2 T[k,0]|_0`` and ``d^3/dt^3 = i (i d/dt)^3``.
    The exact result also carries ``4i dt dk D[0,1,0]``; that
    integral is ``i b ||Psi||^2`` for the logarithmic nonlinearity (and 0 for
    none), hence constant, and its time derivative is dropped unless
    ``general`` is set.
    """
    if n < 0:
        raise ValueError("n must be non-negative")
    third = third_iterate_T()
    # d^3/dt^3 = (1/i^3)(i d/dt)^3 = i (i d/dt)^3
    d3 = Poly.kernel(I) * third
    x2 = -(d3.diff(K).diff(K))
    out = at_k_zero(x2)
    if not general:
        conserved = TD("D", 1, 0, 1, 1, True)
        out = out - Poly.from_monomial({conserved: 1}, Fraction(1)) * coefficient(out, conserved)
    return time_derivative(out, n)


__all__ = [
    "K",
    "TD",
    "D",
    "T",
    "at_k_zero",
    "coefficient",
    "i_ddt",
    "iterate_T",
    "t_recurrence_rhs",
    "third_iterate_T",
    "time_derivative",
    "x2_moment_identity",
]
