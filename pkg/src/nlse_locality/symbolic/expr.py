"""Expression tree nodes over wavefunction atoms.

Trees are immutable.  The smart constructors :func:`add`, :func:`mul` and
:func:`power` flatten nested sums/products and fold numeric constants, so a
tree printed by :func:`serialize` parses back to an identical tree.
"""

from __future__ import annotations

from dataclasses import dataclass, fields
from fractions import Fraction
from typing import Iterable, Union

Number = Union[int, Fraction]

COORDINATES = ("x", "y", "t")
ATOM_NAMES = ("P", "PB")


def node(cls):
    """Frozen dataclass with a cached structural hash (trees are hashed a lot)."""
    cls = dataclass(frozen=True, repr=False, eq=False)(cls)
    names = tuple(f.name for f in fields(cls))
    tag = cls.__name__

    def __hash__(self):
        try:
            return self.__dict__["_hash"]
        except KeyError:
            h = hash((tag,) + tuple(getattr(self, n) for n in names))
            object.__setattr__(self, "_hash", h)
            return h

    def __eq__(self, other):
        if self is other:
            return True
        if other.__class__ is not self.__class__:
            return False
        if hash(self) != hash(other):
            return False
        return all(getattr(self, n) == getattr(other, n) for n in names)

    cls.__hash__ = __hash__
    cls.__eq__ = __eq__
    return cls


class Expr:
    """Base class of all expression nodes."""

    __slots__ = ()

    # Arithmetic builds (lightly folded) trees; use ``normalize`` to simplify.
    def __add__(self, other):
        return add(self, as_expr(other))

    def __radd__(self, other):
        return add(as_expr(other), self)

    def __sub__(self, other):
        return add(self, mul(Const(-1), as_expr(other)))

    def __rsub__(self, other):
        return add(as_expr(other), mul(Const(-1), self))

    def __mul__(self, other):
        return mul(self, as_expr(other))

    def __rmul__(self, other):
        return mul(as_expr(other), self)

    def __truediv__(self, other):
        return mul(self, power(as_expr(other), -1))

    def __rtruediv__(self, other):
        return mul(as_expr(other), power(self, -1))

    def __neg__(self):
        return mul(Const(-1), self)

    def __pow__(self, n):
        if not isinstance(n, int):
            raise TypeError("only integer powers are supported")
        return power(self, n)

    def __str__(self):
        return serialize(self)


@node
class Const(Expr):
    value: Fraction

    def __post_init__(self):
        object.__setattr__(self, "value", Fraction(self.value))

    def __repr__(self):
        return f"Const({self.value})"


@node
class Param(Expr):
    """Symbolic parameter (``lambda``, ``b``, ``k``, ``c1``.., ``D``, ``I``)."""

    name: str

    def __repr__(self):
        return f"Param({self.name!r})"


@node
class Coord(Expr):
    name: str

    def __post_init__(self):
        if self.name not in COORDINATES:
            raise ValueError(f"unknown coordinate {self.name!r}")

    def __repr__(self):
        return f"Coord({self.name!r})"


@node
class Atom(Expr):
    """``P`` (the wavefunction) or ``PB`` (its conjugate), with derivative tags."""

    name: str
    dx: int = 0
    dy: int = 0
    dt: int = 0

    def __post_init__(self):
        if self.name not in ATOM_NAMES:
            raise ValueError(f"unknown atom {self.name!r}")
        if min(self.dx, self.dy, self.dt) < 0:
            raise ValueError("derivative orders must be non-negative")

    @property
    def base(self) -> "Atom":
        return Atom(self.name)

    def bumped(self, var: str, n: int = 1) -> "Atom":
        orders = {"x": self.dx, "y": self.dy, "t": self.dt}
        orders[var] += n
        return Atom(self.name, orders["x"], orders["y"], orders["t"])

    def __repr__(self):
        return f"Atom({self.name!r}, {self.dx}, {self.dy}, {self.dt})"


@node
class Pot(Expr):
    """External potential ``V`` (or its ``order``-th derivative) at ``arg``."""

    arg: Expr
    order: int = 0

    def __repr__(self):
        return f"Pot({self.arg!r}, {self.order})"


@node
class Add(Expr):
    terms: tuple

    def __repr__(self):
        return f"Add{self.terms!r}"


@node
class Mul(Expr):
    factors: tuple

    def __repr__(self):
        return f"Mul{self.factors!r}"


@node
class Pow(Expr):
    base: Expr
    exp: int

    def __repr__(self):
        return f"Pow({self.base!r}, {self.exp})"


@node
class Ln(Expr):
    arg: Expr

    def __repr__(self):
        return f"Ln({self.arg!r})"


@node
class Exp(Expr):
    arg: Expr

    def __repr__(self):
        return f"Exp({self.arg!r})"


ZERO = Const(0)
ONE = Const(1)
I = Param("I")
X, Y, T = Coord("x"), Coord("y"), Coord("t")
P, PB = Atom("P"), Atom("PB")


def as_expr(value) -> Expr:
    if isinstance(value, Expr):
        return value
    if isinstance(value, (int, Fraction)):
        return Const(value)
    if isinstance(value, float):
        return Const(Fraction(value))
    raise TypeError(f"cannot convert {type(value).__name__} to Expr")


def add(*terms: Expr) -> Expr:
    flat = []
    total = Fraction(0)
    for term in terms:
        parts = term.terms if isinstance(term, Add) else (term,)
        for part in parts:
            if isinstance(part, Const):
                total += part.value
            else:
                flat.append(part)
    if total != 0 or not flat:
        flat.append(Const(total))
    if len(flat) == 1:
        return flat[0]
    return Add(tuple(flat))


def mul(*factors: Expr) -> Expr:
    flat = []
    coeff = Fraction(1)
    for factor in factors:
        parts = factor.factors if isinstance(factor, Mul) else (factor,)
        for part in parts:
            if isinstance(part, Const):
                coeff *= part.value
            else:
                flat.append(part)
    if coeff == 0:
        return ZERO
    if coeff != 1 or not flat:
        flat.insert(0, Const(coeff))
    if len(flat) == 1:
        return flat[0]
    return Mul(tuple(flat))


def power(base: Expr, n: int) -> Expr:
    if n == 0:
        return ONE
    if n == 1:
        return base
    if isinstance(base, Const):
        if base.value == 0 and n < 0:
            raise ZeroDivisionError("zero to a negative power")
        return Const(base.value**n)
    if isinstance(base, Pow):
        return power(base.base, base.exp * n)
    return Pow(base, n)


def sum_of(items: Iterable[Expr]) -> Expr:
    return add(*items)


# ---------------------------------------------------------------- printing

_PREC_ADD, _PREC_MUL, _PREC_POW, _PREC_ATOM = 1, 2, 3, 4


def _format_fraction(q: Fraction) -> str:
    return str(q.numerator) if q.denominator == 1 else f"{q.numerator}/{q.denominator}"


def _prec(e: Expr) -> int:
    if isinstance(e, Add):
        return _PREC_ADD
    if isinstance(e, Mul):
        return _PREC_MUL
    if isinstance(e, Const):
        return _PREC_ATOM if e.value.denominator == 1 and e.value >= 0 else _PREC_MUL
    if isinstance(e, Pow):
        return _PREC_POW
    return _PREC_ATOM


def _wrap(e: Expr, min_prec: int) -> str:
    text = serialize(e)
    return f"({text})" if _prec(e) < min_prec else text


def _atom_text(a: Atom) -> str:
    if not (a.dx or a.dy or a.dt):
        return a.name
    parts = [a.name]
    for var, n in (("x", a.dx), ("y", a.dy), ("t", a.dt)):
        if n:
            parts.append(var if n == 1 else f"{var},{n}")
    return "diff(" + ",".join(parts) + ")"


def serialize(e: Expr) -> str:
    """Deterministic text form; ``parse_expression`` inverts it."""
    if isinstance(e, Const):
        return _format_fraction(e.value)
    if isinstance(e, (Param, Coord)):
        return e.name
    if isinstance(e, Atom):
        return _atom_text(e)
    if isinstance(e, Pot):
        if e.order == 0:
            return f"V({serialize(e.arg)})"
        return f"Vd({serialize(e.arg)},{e.order})"
    if isinstance(e, Ln):
        return f"ln({serialize(e.arg)})"
    if isinstance(e, Exp):
        return f"exp({serialize(e.arg)})"
    if isinstance(e, Pow):
        exp = str(e.exp) if e.exp > 0 else f"({e.exp})"
        return f"{_wrap(e.base, _PREC_ATOM)}^{exp}"
    if isinstance(e, Mul):
        factors = e.factors
        sign = ""
        if isinstance(factors[0], Const) and factors[0].value < 0:
            sign = "-"
            coeff = -factors[0].value
            factors = factors[1:] if coeff == 1 else (Const(coeff),) + factors[1:]
        parts = [_wrap(f, _PREC_POW) for f in factors]
        if isinstance(factors[0], Const):
            parts[0] = serialize(factors[0])
        return sign + "*".join(parts)
    if isinstance(e, Add):
        out = serialize(e.terms[0])
        for term in e.terms[1:]:
            text = serialize(term)
            if _prec(term) == _PREC_ADD:
                out += f" + ({text})"
            elif text.startswith("-"):
                out += " - " + text[1:]
            else:
                out += " + " + text
        return out
    custom = getattr(e, "serialize", None)
    if custom is not None:
        return custom()
    raise TypeError(f"cannot serialize {e!r}")
