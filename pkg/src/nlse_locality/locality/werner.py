"""Entangled Gaussian ansatz ``exp(g - x^T C x / 2)`` and its closed evolution.

The ODE for ``(g, C)`` is derived, not typed in: the ansatz goes through the
symbolic engine and the coefficients of ``1, x^2, xy, y^2`` are matched.
Time derivatives at ``t = 0`` come from Taylor-mode arithmetic on the ODE
right-hand side, so only the lambda-derivative is a finite difference.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Dict, Mapping, Optional, Sequence, Tuple

import mpmath
import numpy as np

from ..nonlinearity import DoebnerGoldin, Logarithmic, NoNonlinearity, RFunctional, r_poly
from ..report import SignalReport
from ..symbolic import Exp, I, P, PB, Param, Poly, Pot, X, Y, evaluate, laplacian, parse_expression
from ..symbolic.calculus import substitute_poly

STATE_NAMES = ("g", "C11", "C12", "C22")
_MONOMIALS = {(0, 0): "g", (2, 0): "C11", (1, 1): "C12", (0, 2): "C22"}


class AnsatzNotClosedError(ArithmeticError):
    """The nonlinearity produced a term outside ``{1, x^2, xy, y^2}``."""


class GaussianStateError(ValueError):
    pass


# ----------------------------------------------------------------- state

@dataclass(frozen=True)
class GaussianState:
    gamma: complex
    C: Tuple[Tuple[complex, complex], Tuple[complex, complex]]

    def __post_init__(self):
        C = np.asarray(self.C, dtype=complex)
        if C.shape != (2, 2) or not np.all(np.isfinite(C)) or not math.isfinite(abs(self.gamma)):
            raise GaussianStateError("C must be a finite 2x2 matrix")
        if C[0, 1] != C[1, 0]:
            raise GaussianStateError("C must be symmetric")
        A = C.real
        if not (A[0, 0] > 0 and np.linalg.det(A) > 0):
            raise GaussianStateError("Re C must be positive definite")
        object.__setattr__(self, "C", tuple(tuple(complex(v) for v in row) for row in C))

    @classmethod
    def normalized(cls, C: Sequence[Sequence[complex]]) -> "GaussianState":
        """``gamma`` chosen so that ``int |Psi|^2 = 1``."""
        A = np.asarray(C, dtype=complex).real
        det = float(np.linalg.det(A))
        if not det > 0:
            raise GaussianStateError("Re C must be positive definite")
        return cls(complex(-0.5 * math.log(math.pi / math.sqrt(det))), C)

    @property
    def is_product(self) -> bool:
        return self.C[0][1] == 0

    def as_vector(self) -> Tuple[complex, complex, complex, complex]:
        return (self.gamma, self.C[0][0], self.C[0][1], self.C[1][1])


DEFAULT_C0 = ((2, 1), (1, 2))


# ------------------------------------------------------------ derivation

def _sym(name: str) -> Poly:
    return Poly.kernel(Param(name))


def _exponent(prefix: str, g: str) -> Poly:
    x, y = Poly.kernel(X), Poly.kernel(Y)
    quad = _sym(prefix + "11") * x * x + _sym(prefix + "12").scale(2) * x * y + _sym(prefix + "22") * y * y
    return _sym(g) - quad.scale(Fraction(1, 2))


@dataclass(frozen=True)
class GaussianODE:
    """``d/dt`` of ``g, C11, C12, C22`` as polynomials in the state, its conjugate and the couplings."""

    rhs: Mapping[str, Poly]
    residual: Poly

    def evaluate(self, env: Mapping[str, object]) -> Dict[str, object]:
        return {name: evaluate(p, env) for name, p in self.rhs.items()}


def _degrees(m) -> Tuple[Tuple[int, int], Dict]:
    a = b = 0
    rest = {}
    for k, e in m:
        if k == X:
            a = e
        elif k == Y:
            b = e
        else:
            rest[k] = e
    return (a, b), rest


def derive_gaussian_ode(f: RFunctional, potential: str = "lambda*y^2") -> GaussianODE:
    """Match ``i Psi_t / Psi = -Lap Psi / Psi + V + R[Psi]`` on the ansatz.

    Couplings stay symbolic (``D, c1..c5`` or ``b``).  Raises
    :class:`AnsatzNotClosedError` if the residual leaves the quadratic class.
    """
    return _derive(type(f).__name__, potential)


@lru_cache(maxsize=None)
def _derive(kind: str, potential: str) -> GaussianODE:
    f = {"NoNonlinearity": NoNonlinearity(), "Logarithmic": Logarithmic(1),
         "DoebnerGoldin": DoebnerGoldin(1, (1, 1, 1, 1, 1))}[kind]
    psi = Poly.kernel(_exp(_exponent("C", "g")))
    psib = Poly.kernel(_exp(_exponent("Cb", "gb")))
    bindings = {P: psi.to_expr(), PB: psib.to_expr(), Pot(Y): parse_expression(potential)}
    R = substitute_poly(r_poly(f, symbolic_params=True), bindings)
    kinetic = -(laplacian(psi) * psi.inverse())
    V = substitute_poly(Poly.kernel(Pot(Y)), bindings)
    # i Psi_t/Psi with unknown rates d<name>
    x, y = Poly.kernel(X), Poly.kernel(Y)
    rate = _sym("dg") - (_sym("dC11") * x * x + _sym("dC12").scale(2) * x * y + _sym("dC22") * y * y).scale(
        Fraction(1, 2)
    )
    residual = Poly.kernel(I) * rate - (kinetic + V + R)

    groups: Dict[Tuple[int, int], Poly] = {}
    for m, c in residual.terms.items():
        deg, rest = _degrees(m)
        if deg not in _MONOMIALS:
            raise AnsatzNotClosedError(f"term x^{deg[0]} y^{deg[1]} outside the Gaussian class")
        groups[deg] = groups.get(deg, Poly()) + Poly.from_monomial(rest, c)

    rhs: Dict[str, Poly] = {}
    for deg, name in _MONOMIALS.items():
        eq = groups.get(deg, Poly())
        unknown = Param("d" + name)
        lin = Poly()
        other = Poly()
        for m, c in eq.terms.items():
            factors = dict(m)
            if unknown in factors:
                if factors.pop(unknown) != 1:
                    raise AnsatzNotClosedError(f"rate d{name} enters nonlinearly")
                lin = lin + Poly.from_monomial(factors, c)
            else:
                other = other + Poly.from_monomial(factors, c)
        if len(lin.terms) != 1:
            raise AnsatzNotClosedError(f"rate d{name} has a non-constant coefficient")
        rhs[name] = -(other * lin.inverse())

    check = residual.map_kernels(lambda k: rhs[k.name[1:]] if isinstance(k, Param) and k.name.startswith("d")
                                 and k.name[1:] in rhs else None)
    if not check.is_zero():
        raise AnsatzNotClosedError("coefficient match leaves a nonzero residual")
    return GaussianODE(rhs, check)


def _exp(arg: Poly) -> Exp:
    return Exp(arg.to_expr())


# ------------------------------------------------------------------ jets

PRECISION = 50  # decimal digits for the Taylor arithmetic


class Jet:
    """Truncated Taylor series ``sum_j a[j] t^j`` with mpmath complex coefficients.

    Extended precision keeps the lambda central difference free of rounding
    noise: high time derivatives cancel heavily.
    """

    __slots__ = ("a",)

    def __init__(self, a):
        self.a = [mpmath.mpc(v) for v in a]

    @classmethod
    def const(cls, v, order: int) -> "Jet":
        return cls([v] + [0] * order)

    @property
    def order(self) -> int:
        return len(self.a) - 1

    def _lift(self, other) -> "Jet":
        return other if isinstance(other, Jet) else Jet.const(other, self.order)

    def __add__(self, other):
        return Jet([u + v for u, v in zip(self.a, self._lift(other).a)])

    __radd__ = __add__

    def __sub__(self, other):
        return Jet([u - v for u, v in zip(self.a, self._lift(other).a)])

    def __rsub__(self, other):
        return Jet([v - u for u, v in zip(self.a, self._lift(other).a)])

    def __neg__(self):
        return Jet([-u for u in self.a])

    def __mul__(self, other):
        if not isinstance(other, Jet):
            return Jet([u * other for u in self.a])
        a, b = self.a, other.a
        return Jet([mpmath.fsum(a[k] * b[j - k] for k in range(j + 1)) for j in range(len(a))])

    __rmul__ = __mul__

    def __pow__(self, n):
        if not isinstance(n, int) or n < 0:
            return self.power(n)
        out = Jet.const(1, self.order)
        for _ in range(n):
            out = out * self
        return out

    def __truediv__(self, other):
        if not isinstance(other, Jet):
            return Jet([u / other for u in self.a])
        return self * other.power(-1)

    def conj(self) -> "Jet":
        return Jet([mpmath.conj(u) for u in self.a])

    def exp(self) -> "Jet":
        # b' = a' b
        a = self.a
        b = [mpmath.exp(a[0])]
        for j in range(1, len(a)):
            b.append(mpmath.fsum(k * a[k] * b[j - k] for k in range(1, j + 1)) / j)
        return Jet(b)

    def power(self, p) -> "Jet":
        # b = a^p  =>  a b' = p a' b
        a = self.a
        if a[0] == 0:
            raise ZeroDivisionError("power of a series with zero constant term")
        b = [mpmath.power(a[0], p)]
        for j in range(1, len(a)):
            s = mpmath.fsum((p * k - (j - k)) * a[k] * b[j - k] for k in range(1, j + 1))
            b.append(s / (j * a[0]))
        return Jet(b)

    def derivative_at_zero(self, n: int):
        return self.a[n] * math.factorial(n)


def taylor_solution(ode: GaussianODE, state: GaussianState, params: Mapping[str, float], order: int) -> Dict[str, Jet]:
    """Taylor coefficients of ``g, C11, C12, C22`` up to ``t^order``."""
    with mpmath.workdps(PRECISION):
        coeffs = {name: [mpmath.mpc(v)] for name, v in zip(STATE_NAMES, state.as_vector())}
        for j in range(order):
            env = dict(params)
            for name, c in coeffs.items():
                jet = Jet(c + [0] * (j + 1 - len(c)))
                env[name] = jet
                env["gb" if name == "g" else name.replace("C", "Cb")] = jet.conj()
            rates = ode.evaluate(env)
            for name in STATE_NAMES:
                r = rates[name]
                rj = r.a[j] if isinstance(r, Jet) else (r if j == 0 else 0)
                coeffs[name].append(mpmath.mpc(rj) / (j + 1))
            if not all(mpmath.isfinite(c[-1]) for c in coeffs.values()):
                raise GaussianStateError("Taylor coefficients overflowed")
        return {name: Jet(c) for name, c in coeffs.items()}


def marginal_moments(jets: Mapping[str, Jet]) -> Dict[str, Jet]:
    """``int rho``, ``int x1 rho_1`` and ``int x1^2 rho_1`` as series in ``t``."""
    A11 = (jets["C11"] + jets["C11"].conj()) * 0.5
    A12 = (jets["C12"] + jets["C12"].conj()) * 0.5
    A22 = (jets["C22"] + jets["C22"].conj()) * 0.5
    det = A11 * A22 - A12 * A12
    norm = (jets["g"] + jets["g"].conj()).exp() * mpmath.pi * det.power(-0.5)
    x2 = norm * A22 * det.power(-1) * 0.5
    return {"norm": norm, "x1": norm * 0.0, "x1^2": x2}


# -------------------------------------------------------------- the test

def _params_env(f: RFunctional, lam: float) -> Dict[str, float]:
    env = {"lambda": lam}
    if isinstance(f, DoebnerGoldin):
        env["D"] = float(f.D)
        env.update({f"c{i + 1}": float(v) for i, v in enumerate(f.c)})
    elif isinstance(f, Logarithmic):
        env["b"] = float(f.b)
    return env


def moment_derivative(f: RFunctional, state: GaussianState, lam: float, n: int, weight: str = "x1^2") -> float:
    """``d^n/dt^n`` at ``t = 0`` of a marginal moment, exact in time."""
    with mpmath.workdps(PRECISION):
        jets = taylor_solution(derive_gaussian_ode(f), state, _params_env(f, lam), n)
        value = marginal_moments(jets)[weight].derivative_at_zero(n)
        return mpmath.re(value)


def werner_test(
    f: RFunctional,
    C0: Optional[Sequence[Sequence[complex]]] = None,
    n: int = 3,
    test: str = "test1",
    lam: float = 1.0,
    delta: float = 1e-4,
) -> SignalReport:
    """``d_lambda d_t^n int x1^2 rho_1`` (test1) or ``... x1 rho_1`` (test3) at ``t = 0``.

    Central difference in lambda with Richardson extrapolation against
    ``delta/2``; the error bar is the Richardson correction plus rounding.
    """
    if test not in ("test1", "test3"):
        raise ValueError("werner_test runs test1 or test3")
    if not 0 <= n <= 6:
        raise ValueError("n must lie in 0..6")
    state = GaussianState.normalized(C0 if C0 is not None else DEFAULT_C0)
    weight = "x1^2" if test == "test1" else "x1"

    def F(l):
        return moment_derivative(f, state, l, n, weight)

    def central(h):
        l0, h = mpmath.mpf(lam), mpmath.mpf(h)
        return (F(l0 + h) - F(l0 - h)) / (2 * h)

    with mpmath.workdps(PRECISION):
        coarse, fine = central(delta), central(delta / 2)
        value = (4 * fine - coarse) / 3
        scale = max(abs(F(lam)), 1)
        error = abs(fine - coarse) / 3 + scale * mpmath.mpf(10) ** (5 - PRECISION) / delta
    params = {"lambda": lam, "delta": delta, "C0": [[_num(v) for v in row] for row in state.C]}
    params.update(_describe(f))
    return SignalReport(test, n, float(value), "numeric", params=params, error=float(error))


def _num(v: complex):
    return v.real if v.imag == 0 else [v.real, v.imag]


def _describe(f: RFunctional) -> Dict[str, object]:
    if isinstance(f, DoebnerGoldin):
        return {"D": float(f.D), "c": [float(v) for v in f.c]}
    if isinstance(f, Logarithmic):
        return {"b": float(f.b)}
    return {}


__all__ = [
    "AnsatzNotClosedError",
    "DEFAULT_C0",
    "GaussianODE",
    "GaussianState",
    "GaussianStateError",
    "Jet",
    "derive_gaussian_ode",
    "marginal_moments",
    "moment_derivative",
    "taylor_solution",
    "werner_test",
]
