"""Exact integrals of polynomial x Gaussian integrands over the plane."""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Dict, Sequence, Tuple, Union

from .symbolic import Coord, Exp, Expr, Poly, to_poly
from .symbolic.expr import X, Y

Rational = Union[int, Fraction]


class ExactClassError(ValueError):
    """Arithmetic result would leave the q*pi^p*sqrt(r) class."""


class IntegrationError(ValueError):
    """Integrand is not a finite sum of monomials times one centered Gaussian."""


def _square_free(n: int) -> Tuple[int, int]:
    """Split ``n = s**2 * f`` with ``f`` square-free; returns ``(s, f)``."""
    if n <= 0:
        raise ValueError("radicand must be positive")
    s, f = 1, 1
    p = 2
    while p * p <= n:
        while n % (p * p) == 0:
            n //= p * p
            s *= p
        if n % p == 0:
            n //= p
            f *= p
        p += 1 if p == 2 else 2
    return s, f * n


@dataclass(frozen=True)
class ExactScalar:
    """``q * pi**p * sqrt(r)`` with rational q, p in {0, 1}, square-free integer r."""

    q: Fraction
    p: int = 0
    r: int = 1

    def __post_init__(self):
        q = Fraction(self.q)
        if self.p not in (0, 1):
            raise ExactClassError(f"pi exponent {self.p} outside {{0, 1}}")
        r = Fraction(self.r)
        if r <= 0:
            raise ValueError("radicand must be positive")
        # sqrt(n/d) = sqrt(n*d)/d
        s, f = _square_free(r.numerator * r.denominator)
        q = q * s / r.denominator
        p = self.p
        if q == 0:
            p, f = 0, 1
        object.__setattr__(self, "q", q)
        object.__setattr__(self, "p", p)
        object.__setattr__(self, "r", f)

    @classmethod
    def rational(cls, q: Rational) -> "ExactScalar":
        return cls(Fraction(q))

    def is_zero(self) -> bool:
        return self.q == 0

    def _coerce(self, other) -> "ExactScalar":
        if isinstance(other, ExactScalar):
            return other
        if isinstance(other, (int, Fraction)):
            return ExactScalar(Fraction(other))
        return NotImplemented

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        if other.is_zero():
            return self
        if self.is_zero():
            return other
        if (self.p, self.r) != (other.p, other.r):
            raise ExactClassError(f"cannot add {self} and {other} exactly")
        return ExactScalar(self.q + other.q, self.p, self.r)

    __radd__ = __add__

    def __neg__(self):
        return ExactScalar(-self.q, self.p, self.r)

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        if self.is_zero() or other.is_zero():
            return ExactScalar(0)
        return ExactScalar(self.q * other.q, self.p + other.p, self.r * other.r)

    __rmul__ = __mul__

    def __truediv__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        if other.is_zero():
            raise ZeroDivisionError("division by exact zero")
        # 1/sqrt(r) = sqrt(r)/r
        return ExactScalar(self.q / other.q / other.r, self.p - other.p, self.r * other.r)

    def __float__(self):
        return float(self.q) * (math.pi**self.p) * math.sqrt(self.r)

    def __str__(self):
        parts = [_fmt(self.q)]
        if self.p:
            parts.append("pi")
        if self.r != 1:
            parts.append(f"sqrt({self.r})")
        return "*".join(parts)

    @classmethod
    def parse(cls, text: str) -> "ExactScalar":
        """Inverse of ``str``: ``"-32/3*pi*sqrt(3)"``, ``"1/3*pi"``, ``"32"``."""
        m = re.fullmatch(r"\s*(-?\d+(?:/\d+)?)(\*pi)?(?:\*sqrt\((\d+(?:/\d+)?)\))?\s*", text)
        if m is None:
            raise ValueError(f"not an exact scalar: {text!r}")
        return cls(Fraction(m.group(1)), 1 if m.group(2) else 0, Fraction(m.group(3) or 1))


def _fmt(q: Fraction) -> str:
    return str(q.numerator) if q.denominator == 1 else f"{q.numerator}/{q.denominator}"


@dataclass(frozen=True)
class QuadraticForm2:
    """Symmetric ``M`` with the exponent written as ``-x^T M x / 2``."""

    m11: Fraction
    m12: Fraction
    m22: Fraction

    def __post_init__(self):
        for name in ("m11", "m12", "m22"):
            object.__setattr__(self, name, Fraction(getattr(self, name)))
        if not (self.det > 0 and self.m11 + self.m22 > 0):
            raise ValueError(f"quadratic form {self.matrix} is not positive definite")

    @classmethod
    def from_matrix(cls, m: Sequence[Sequence[Rational]]) -> "QuadraticForm2":
        if Fraction(m[0][1]) != Fraction(m[1][0]):
            raise ValueError("matrix must be symmetric")
        return cls(m[0][0], m[0][1], m[1][1])

    @property
    def det(self) -> Fraction:
        return self.m11 * self.m22 - self.m12 * self.m12

    @property
    def matrix(self):
        return ((self.m11, self.m12), (self.m12, self.m22))

    def covariance(self) -> Tuple[Tuple[Fraction, Fraction], Tuple[Fraction, Fraction]]:
        d = self.det
        return ((self.m22 / d, -self.m12 / d), (-self.m12 / d, self.m11 / d))

    def scaled(self, c: Rational) -> "QuadraticForm2":
        return QuadraticForm2(self.m11 * c, self.m12 * c, self.m22 * c)


def gaussian_normalization(M: QuadraticForm2) -> ExactScalar:
    """``int exp(-x^T M x / 2) dx dy = 2 pi / sqrt(det M)``."""
    return ExactScalar(2, 1, 1 / M.det)


def wick_moment(cov: Sequence[Sequence[Fraction]], exponents: Sequence[int]) -> Fraction:
    """``E[prod x_i^a_i]`` for a centered Gaussian with covariance ``cov`` (any dimension).

    Isserlis recursion: pair the first factor with every remaining one.
    """
    cov = tuple(tuple(Fraction(c) for c in row) for row in cov)
    return _wick(cov, tuple(exponents))


@lru_cache(maxsize=None)
def _wick(cov: tuple, alpha: tuple) -> Fraction:
    if sum(alpha) == 0:
        return Fraction(1)
    if sum(alpha) % 2:
        return Fraction(0)
    i = next(j for j, a in enumerate(alpha) if a)
    rest = list(alpha)
    rest[i] -= 1
    total = Fraction(0)
    for j, a in enumerate(rest):
        if a and cov[i][j]:
            reduced = list(rest)
            reduced[j] -= 1
            total += a * cov[i][j] * _wick(cov, tuple(reduced))
    return total


def gaussian_moment(M: QuadraticForm2, mono: Tuple[int, int]) -> ExactScalar:
    """``int x^a y^b exp(-x^T M x / 2) dx dy`` exactly."""
    a, b = mono
    if a < 0 or b < 0:
        raise ValueError("monomial exponents must be non-negative")
    if (a + b) % 2:
        return ExactScalar(0)
    return gaussian_normalization(M) * ExactScalar(wick_moment(M.covariance(), (a, b)))


def quadratic_form_of(exponent: Expr) -> QuadraticForm2:
    """Read ``M`` off an exponent ``-(m11 x^2 + 2 m12 x y + m22 y^2)/2``."""
    coeffs = {(2, 0): Fraction(0), (1, 1): Fraction(0), (0, 2): Fraction(0)}
    for m, c in to_poly(exponent).terms.items():
        degrees = _xy_degrees(m)
        if degrees not in coeffs:
            raise IntegrationError(f"exponent {exponent} is not a centered quadratic form")
        coeffs[degrees] += c
    try:
        return QuadraticForm2(-2 * coeffs[(2, 0)], -coeffs[(1, 1)], -2 * coeffs[(0, 2)])
    except ValueError as exc:
        raise IntegrationError(str(exc)) from None


def _xy_degrees(m) -> Tuple[int, int]:
    a = b = 0
    for k, e in m:
        if k == X:
            a = e
        elif k == Y:
            b = e
        else:
            raise IntegrationError(f"unexpected factor {k} in polynomial part")
    if a < 0 or b < 0:
        raise IntegrationError("denominator in x, y not cancelled")
    return a, b


def integrate_specialized(e: Union[Expr, Poly]) -> ExactScalar:
    """Exact integral over the plane of a sum of ``x^a y^b exp(quadratic)`` terms."""
    p = e if isinstance(e, Poly) else to_poly(e)
    groups: Dict[Expr, Dict[Tuple[int, int], Fraction]] = {}
    for m, c in p.terms.items():
        gauss = None
        poly_part = []
        for k, n in m:
            if isinstance(k, Exp):
                gauss = k
            elif isinstance(k, Coord) and k.name in ("x", "y"):
                poly_part.append((k, n))
            else:
                raise IntegrationError(f"residual non-polynomial factor {k} (power {n})")
        if gauss is None:
            raise IntegrationError("term without Gaussian factor diverges")
        degrees = _xy_degrees(tuple(poly_part))
        bucket = groups.setdefault(gauss, {})
        bucket[degrees] = bucket.get(degrees, Fraction(0)) + c
    total = ExactScalar(0)
    for gauss, monos in sorted(groups.items(), key=lambda kv: str(kv[0])):
        M = quadratic_form_of(gauss.arg)
        for (a, b), c in sorted(monos.items()):
            if c:
                total = total + gaussian_moment(M, (a, b)) * ExactScalar(c)
    return total
