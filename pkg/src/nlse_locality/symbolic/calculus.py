"""Differentiation, normalization, substitution and numeric evaluation."""

from __future__ import annotations

from fractions import Fraction
from typing import Callable, Dict, Mapping, Optional, Union

import numpy as np

from .expr import Add, Atom, Const, Coord, Exp, Expr, I, Ln, Param, Pot, X, Y, as_expr
from .poly import Poly, to_poly

Var = Union[Coord, Param]


class SubstitutionError(ValueError):
    pass


def normalize(e: Expr) -> Expr:
    """Rational normal form: collected terms over a single monomial denominator."""
    return to_poly(e).to_expr()


def differentiate(e: Expr, v: Var) -> Expr:
    """Exact derivative; time derivatives stay as ``dt`` tags on atoms."""
    return to_poly(e).diff(v).to_expr()


# ------------------------------------------------------------ i d/dt rules

def laplacian(p: Poly) -> Poly:
    return p.diff(X).diff(X) + p.diff(Y).diff(Y)


def _time_rule(name: str, potential: Expr, nonlinearity: Optional[Expr]) -> Poly:
    """``i d/dt`` of the bare atom: ``-Lap P + V P (+ R P)`` and its conjugate."""
    atom = Poly.kernel(Atom(name))
    rhs = laplacian(atom) * Poly.const(-1) + to_poly(potential) * atom
    if nonlinearity is not None:
        rhs = rhs + to_poly(nonlinearity) * atom
    return rhs if name == "P" else -rhs


class TimeSubstitution:
    """Replaces ``dt``-tagged atoms by the evolution law (cached per tag)."""

    def __init__(self, potential: Expr = Pot(Y), nonlinearity: Optional[Expr] = None):
        self.potential = potential
        self.nonlinearity = nonlinearity
        self._base = {n: _time_rule(n, potential, nonlinearity) for n in ("P", "PB")}
        self._cache: Dict[Atom, Poly] = {}

    def rule(self, atom: Atom) -> Poly:
        hit = self._cache.get(atom)
        if hit is None:
            hit = self._base[atom.name]
            for _ in range(atom.dx):
                hit = hit.diff(X)
            for _ in range(atom.dy):
                hit = hit.diff(Y)
            self._cache[atom] = hit
        return hit

    def __call__(self, p: Poly) -> Poly:
        return p.map_kernels(self._replace)

    def _replace(self, k: Expr) -> Optional[Poly]:
        if isinstance(k, Atom):
            if k.dt == 0:
                return None
            if k.dt > 1:
                raise SubstitutionError(
                    f"time derivative of order {k.dt} on {k.name}; differentiate and substitute one order at a time"
                )
            return self.rule(Atom(k.name, k.dx, k.dy))
        if isinstance(k, (Ln, Exp, Pot)):
            arg = to_poly(k.arg)
            new = self(arg)
            if new == arg:
                return None
            return to_poly(type(k)(new.to_expr()) if not isinstance(k, Pot) else Pot(new.to_expr(), k.order))
        return None


def substitute_time_derivatives(
    e: Expr, potential: Expr = Pot(Y), nonlinearity: Optional[Expr] = None
) -> Expr:
    """Resolve first-order time tags: ``P_t -> -Lap P + V P``, ``PB_t -> Lap PB - V PB``.

    The rules express ``i d/dt`` of the atoms, so substituting into
    ``d/dt e`` yields ``i d/dt e``.  ``nonlinearity`` adds a real ``R`` term.
    """
    return TimeSubstitution(potential, nonlinearity)(to_poly(e)).to_expr()


def idot(e: Expr, potential: Expr = Pot(Y), nonlinearity: Optional[Expr] = None) -> Expr:
    """``i d/dt`` under the evolution law, in normal form."""
    sub = TimeSubstitution(potential, nonlinearity)
    return sub(to_poly(e).diff(Coord("t"))).to_expr()


# ------------------------------------------------------------- substitution

def _function_binding(key: Pot, body: Expr):
    if not isinstance(key.arg, Coord) or key.order != 0:
        raise SubstitutionError("potential bindings must be keyed as V(<coordinate>)")
    return key.arg, to_poly(body)


def substitute(e: Expr, bindings: Mapping[Expr, Expr]) -> Expr:
    """Specialize atoms, parameters, coordinates and ``V`` simultaneously.

    Derivative-tagged atoms follow their base binding; ``V(y) -> body`` also
    fixes every ``Vd(arg, n)`` as the n-th derivative of ``body`` at ``arg``.
    """
    return substitute_poly(to_poly(e), bindings).to_expr()


def substitute_poly(p: Poly, bindings: Mapping[Expr, Expr]) -> Poly:
    atoms: Dict[str, Poly] = {}
    scalars: Dict[Expr, Poly] = {}
    potential = None
    for key, value in bindings.items():
        value = as_expr(value)
        if isinstance(key, Atom):
            if key.dx or key.dy or key.dt:
                raise SubstitutionError(f"binding for derivative-tagged atom {key!r}; bind the base atom instead")
            atoms[key.name] = to_poly(value)
        elif isinstance(key, (Param, Coord)):
            scalars[key] = to_poly(value)
        elif isinstance(key, Pot):
            potential = _function_binding(key, value)
        else:
            raise SubstitutionError(f"cannot bind {key!r}")
    if not bindings:
        return p

    cache: Dict[Expr, Optional[Poly]] = {}

    def replace(k: Expr) -> Optional[Poly]:
        if k in cache:
            return cache[k]
        out = None
        if isinstance(k, Atom) and k.name in atoms:
            out = atoms[k.name]
            for var, n in (("x", k.dx), ("y", k.dy), ("t", k.dt)):
                for _ in range(n):
                    out = out.diff(Coord(var))
        elif isinstance(k, (Param, Coord)) and k in scalars:
            out = scalars[k]
        elif isinstance(k, Pot):
            arg = to_poly(k.arg).map_kernels(replace)
            if potential is not None:
                var, body = potential
                for _ in range(k.order):
                    body = body.diff(var)
                out = substitute_poly(body, {var: arg.to_expr()}) if arg != to_poly(var) else body
            elif arg != to_poly(k.arg):
                out = Poly.kernel(Pot(arg.to_expr(), k.order))
        elif isinstance(k, (Ln, Exp)):
            arg = to_poly(k.arg).map_kernels(replace)
            if arg != to_poly(k.arg):
                out = to_poly(type(k)(arg.to_expr()))
        elif isinstance(k, Add):
            inner = to_poly(k).map_kernels(replace)
            out = inner if inner != to_poly(k) else None
        cache[k] = out
        return out

    return p.map_kernels(replace)


# -------------------------------------------------------------- evaluation

def evaluate(e: Union[Expr, Poly], env: Mapping[str, object], atoms: Optional[Mapping[Atom, object]] = None,
             potential: Optional[Callable] = None):
    """Numeric value of ``e``; ``env`` maps parameter/coordinate names to numbers or arrays.

    ``potential(arg_value, order)`` supplies ``V`` and its derivatives.
    """
    p = e if isinstance(e, Poly) else to_poly(e)
    memo: Dict[Expr, object] = {}

    def value(k: Expr):
        if k in memo:
            return memo[k]
        if k == I:
            v = 1j
        elif isinstance(k, (Param, Coord)):
            try:
                v = env[k.name]
            except KeyError:
                raise KeyError(f"no value for {k.name!r}") from None
        elif isinstance(k, Atom):
            if atoms is None or k not in atoms:
                raise KeyError(f"no value for atom {k!r}")
            v = atoms[k]
        elif isinstance(k, Exp):
            v = np.exp(evaluate(k.arg, env, atoms, potential))
        elif isinstance(k, Ln):
            v = np.log(evaluate(k.arg, env, atoms, potential))
        elif isinstance(k, Pot):
            if potential is None:
                raise KeyError("no potential supplied")
            v = potential(evaluate(k.arg, env, atoms, potential), k.order)
        elif isinstance(k, Add):
            v = evaluate(k, env, atoms, potential)
        else:
            numeric = getattr(k, "numeric", None)
            if numeric is None:
                raise KeyError(f"cannot evaluate kernel {k!r}")
            v = numeric(env)
        memo[k] = v
        return v

    total = 0
    for m, c in p.terms.items():
        term = _coeff(c)
        for k, n in m:
            v = value(k)
            term = term * (v**n if n >= 0 else 1 / v ** (-n))
        total = total + term
    return total


def _coeff(c: Fraction):
    return c.numerator if c.denominator == 1 else c.numerator / c.denominator


def is_constant(e: Expr) -> bool:
    return isinstance(normalize(e), Const)
