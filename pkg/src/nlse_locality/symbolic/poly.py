"""Rational normal form: Laurent polynomials over expression kernels.

A :class:`Poly` maps monomials to exact rational coefficients.  A monomial is
a sorted tuple of ``(kernel, exponent)`` pairs; kernels are the non-arithmetic
nodes (atoms, coordinates, parameters, ``V``, ``ln``, ``exp``) plus sums that
occur only as denominators.  Products of kernels are reduced on the fly:

* ``I`` (the imaginary unit) satisfies ``I**2 == -1``;
* all ``exp`` factors of a monomial merge into a single ``exp`` whose argument
  is the normalized sum of the exponents (dropped when that sum is zero);
* ``ln(exp(u))`` collapses to ``u``.

Because denominators are monomials, cancellation is automatic.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Callable, Dict, Iterable, Optional, Tuple

from .expr import (
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
    add,
    mul,
    power,
    serialize,
)

Monomial = Tuple[Tuple[Expr, int], ...]

_KEY_CACHE: Dict[Expr, tuple] = {}
_POLY_CACHE: Dict[Expr, "Poly"] = {}
_DIFF_CACHE: Dict[Tuple[Expr, Expr], "Poly"] = {}


def kernel_key(k: Expr) -> tuple:
    """Total order on kernels: atoms < coordinates < parameters < functions."""
    key = _KEY_CACHE.get(k)
    if key is not None:
        return key
    if isinstance(k, Atom):
        key = (0, k.dx, k.dy, k.dt, 0 if k.name == "P" else 1)
    elif isinstance(k, Coord):
        key = (1, "xyt".index(k.name))
    elif k == I:
        key = (3,)
    elif isinstance(k, Param):
        key = (2, k.name)
    elif isinstance(k, Pot):
        key = (4, k.order, serialize(k.arg))
    elif isinstance(k, Ln):
        key = (5, serialize(k.arg))
    elif isinstance(k, Exp):
        key = (6, serialize(k.arg))
    elif isinstance(k, Add):
        key = (7, serialize(k))
    else:
        custom = getattr(k, "sort_key", None)
        key = (8, type(k).__name__) + (custom() if custom else (serialize(k),))
    _KEY_CACHE[k] = key
    return key


def _monomial_key(m: Monomial) -> tuple:
    return (1 if not m else 0, tuple((kernel_key(k), -e) for k, e in m))


class Poly:
    """Immutable-by-convention Laurent polynomial with Fraction coefficients."""

    __slots__ = ("terms",)

    def __init__(self, terms: Optional[Dict[Monomial, Fraction]] = None):
        self.terms: Dict[Monomial, Fraction] = terms if terms is not None else {}

    # -------------------------------------------------------------- builders
    @staticmethod
    def const(c) -> "Poly":
        c = Fraction(c)
        return Poly({(): c}) if c else Poly()

    @staticmethod
    def kernel(k: Expr, e: int = 1) -> "Poly":
        return Poly.from_monomial({k: e}, Fraction(1))

    @staticmethod
    def from_monomial(factors: Dict[Expr, int], coeff: Fraction) -> "Poly":
        mono, sign = _reduce(factors)
        if mono is None:
            return Poly()
        return Poly({mono: coeff * sign})

    # ----------------------------------------------------------- arithmetic
    def is_zero(self) -> bool:
        return not self.terms

    def __eq__(self, other):
        return isinstance(other, Poly) and self.terms == other.terms

    def __hash__(self):
        return hash(frozenset(self.terms.items()))

    def __add__(self, other: "Poly") -> "Poly":
        out = dict(self.terms)
        for m, c in other.terms.items():
            v = out.get(m, 0) + c
            if v:
                out[m] = v
            else:
                out.pop(m, None)
        return Poly(out)

    def _iadd(self, other: "Poly") -> None:
        # In-place accumulation; only for freshly built local polys.
        out = self.terms
        for m, c in other.terms.items():
            v = out.get(m, 0) + c
            if v:
                out[m] = v
            else:
                out.pop(m, None)

    def __neg__(self) -> "Poly":
        return Poly({m: -c for m, c in self.terms.items()})

    def __sub__(self, other: "Poly") -> "Poly":
        return self + (-other)

    def scale(self, c) -> "Poly":
        c = Fraction(c)
        if not c:
            return Poly()
        return Poly({m: v * c for m, v in self.terms.items()})

    def __mul__(self, other: "Poly") -> "Poly":
        out: Dict[Monomial, Fraction] = {}
        for m1, c1 in self.terms.items():
            for m2, c2 in other.terms.items():
                mono, sign = _mul_monomials(m1, m2)
                if mono is None:
                    continue
                v = out.get(mono, 0) + sign * c1 * c2
                if v:
                    out[mono] = v
                else:
                    out.pop(mono, None)
        return Poly(out)

    def __pow__(self, n: int) -> "Poly":
        if n < 0:
            return self.inverse() ** (-n)
        result = Poly.const(1)
        base = self
        while n:
            if n & 1:
                result = result * base
            n >>= 1
            if n:
                base = base * base
        return result

    def inverse(self) -> "Poly":
        if not self.terms:
            raise ZeroDivisionError("inverse of zero")
        if len(self.terms) == 1:
            (m, c), = self.terms.items()
            return Poly.from_monomial({k: -e for k, e in m}, 1 / c)
        # Non-monomial denominators stay opaque.
        return Poly.kernel(self.to_expr(), -1)

    # ------------------------------------------------------------ calculus
    def diff(self, var: Expr) -> "Poly":
        out = Poly()
        for m, c in self.terms.items():
            for i, (k, e) in enumerate(m):
                dk = kernel_diff(k, var)
                if dk.is_zero():
                    continue
                rest = dict(m)
                rest[k] = e - 1
                out._iadd(Poly.from_monomial(rest, c * e) * dk)
        return out

    def map_kernels(self, fn: Callable[[Expr], Optional["Poly"]]) -> "Poly":
        """Replace kernels by ``fn(kernel)`` (``None`` keeps the kernel)."""
        out = Poly()
        cache: Dict[Expr, Optional[Poly]] = {}
        for m, c in self.terms.items():
            acc = Poly.const(c)
            kept: Dict[Expr, int] = {}
            for k, e in m:
                if k not in cache:
                    cache[k] = fn(k)
                rep = cache[k]
                if rep is None:
                    kept[k] = e
                else:
                    acc = acc * (rep**e)
            if kept:
                acc = acc * Poly.from_monomial(kept, Fraction(1))
            out._iadd(acc)
        return out

    # --------------------------------------------------------- inspection
    def kernels(self) -> set:
        return {k for m in self.terms for k, _ in m}

    def free_params(self) -> set:
        found = set()
        for k in self.kernels():
            if isinstance(k, Param) and k != I:
                found.add(k)
            elif isinstance(k, (Ln, Exp, Pot)):
                found |= to_poly(k.arg).free_params()
        return found

    def sorted_terms(self) -> list:
        return sorted(self.terms.items(), key=lambda mc: _monomial_key(mc[0]))

    def __len__(self):
        return len(self.terms)

    def __repr__(self):
        return f"Poly({serialize(self.to_expr())})"

    # ---------------------------------------------------------- to Expr
    def to_expr(self) -> Expr:
        """Canonical tree: sum of terms over one common monomial denominator."""
        if not self.terms:
            return Const(0)
        items = self.sorted_terms()
        den: Dict[Expr, int] = {}
        for m, _ in items:
            for k, e in m:
                if e < 0 and -e > den.get(k, 0):
                    den[k] = -e
        numer = []
        for m, c in items:
            factors = dict(m)
            for k, e in den.items():
                factors[k] = factors.get(k, 0) + e
            ordered = sorted(((k, e) for k, e in factors.items() if e), key=lambda ke: kernel_key(ke[0]))
            numer.append(mul(Const(c), *[power(k, e) for k, e in ordered]))
        top = add(*numer)
        if not den:
            return top
        ordered = sorted(den.items(), key=lambda ke: kernel_key(ke[0]))
        bottom = mul(*[power(k, e) for k, e in ordered])
        return mul(top, power(bottom, -1))


def _reduce(factors: Dict[Expr, int]):
    """Apply the kernel reductions; returns (monomial | None, sign)."""
    sign = 1
    exps = None
    for k in list(factors):
        e = factors[k]
        if e == 0:
            del factors[k]
            continue
        if k == I:
            r = e % 4
            del factors[k]
            if r >= 2:
                sign = -sign
            if r % 2:
                factors[I] = 1
        elif isinstance(k, Exp):
            if exps is None:
                exps = []
            exps.append((k, e))
    if exps is not None and (len(exps) > 1 or exps[0][1] != 1):
        for k, _ in exps:
            del factors[k]
        merged = _merge_exps(tuple(sorted(exps, key=lambda ke: kernel_key(ke[0]))))
        if merged is not None:
            factors[merged] = 1
    mono = tuple(sorted(factors.items(), key=lambda ke: kernel_key(ke[0])))
    return mono, sign


_EXP_MERGE: Dict[tuple, Optional[Exp]] = {}


def _merge_exps(exps: tuple) -> Optional[Exp]:
    hit = _EXP_MERGE.get(exps, False)
    if hit is not False:
        return hit
    total = Poly()
    for k, e in exps:
        total._iadd(to_poly(k.arg).scale(e))
    out = Exp(total.to_expr()) if not total.is_zero() else None
    _EXP_MERGE[exps] = out
    return out


def _mul_monomials(m1: Monomial, m2: Monomial):
    if not m1:
        return m2, 1
    if not m2:
        return m1, 1
    factors = dict(m1)
    for k, e in m2:
        factors[k] = factors.get(k, 0) + e
    return _reduce(factors)


# ------------------------------------------------------------ kernel calculus

def kernel_diff(k: Expr, var: Expr) -> Poly:
    cache_key = (k, var)
    hit = _DIFF_CACHE.get(cache_key)
    if hit is not None:
        return hit
    if isinstance(k, (Param, Coord)):
        out = Poly.const(1 if k == var else 0)
    elif isinstance(k, Atom):
        out = Poly.kernel(k.bumped(var.name)) if isinstance(var, Coord) else Poly()
    elif isinstance(k, Pot):
        inner = to_poly(k.arg).diff(var)
        out = Poly.kernel(Pot(k.arg, k.order + 1)) * inner if not inner.is_zero() else Poly()
    elif isinstance(k, Ln):
        arg = to_poly(k.arg)
        inner = arg.diff(var)
        out = inner * arg.inverse() if not inner.is_zero() else Poly()
    elif isinstance(k, Exp):
        inner = to_poly(k.arg).diff(var)
        out = Poly.kernel(k) * inner if not inner.is_zero() else Poly()
    elif isinstance(k, Add):
        out = to_poly(k).diff(var)
    else:
        custom = getattr(k, "derivative", None)
        out = custom(var) if custom is not None else Poly()
    _DIFF_CACHE[cache_key] = out
    return out


# -------------------------------------------------------------- Expr -> Poly

def to_poly(e: Expr) -> Poly:
    hit = _POLY_CACHE.get(e)
    if hit is not None:
        return hit
    if isinstance(e, Const):
        out = Poly.const(e.value)
    elif isinstance(e, Add):
        out = Poly()
        for term in e.terms:
            out._iadd(to_poly(term))
    elif isinstance(e, Mul):
        out = Poly.const(1)
        for factor in e.factors:
            out = out * to_poly(factor)
    elif isinstance(e, Pow):
        out = to_poly(e.base) ** e.exp
    elif isinstance(e, Ln):
        arg = to_poly(e.arg)
        out = _ln_of(arg)
    elif isinstance(e, Exp):
        arg = to_poly(e.arg)
        out = Poly.kernel(Exp(arg.to_expr())) if not arg.is_zero() else Poly.const(1)
    elif isinstance(e, Pot):
        out = Poly.kernel(Pot(to_poly(e.arg).to_expr(), e.order))
    else:
        out = Poly.kernel(e)
    _POLY_CACHE[e] = out
    return out


def _ln_of(arg: Poly) -> Poly:
    if arg.is_zero():
        raise ValueError("logarithm of zero")
    if len(arg.terms) == 1:
        (m, c), = arg.terms.items()
        if c == 1 and len(m) == 1 and isinstance(m[0][0], Exp) and m[0][1] == 1:
            return to_poly(m[0][0].arg)
        if c == 1 and not m:
            return Poly()
    return Poly.kernel(Ln(arg.to_expr()))


def clear_caches() -> None:
    _KEY_CACHE.clear()
    _POLY_CACHE.clear()
    _DIFF_CACHE.clear()
    _EXP_MERGE.clear()


def poly_sum(items: Iterable[Poly]) -> Poly:
    out = Poly()
    for p in items:
        out._iadd(p)
    return out
