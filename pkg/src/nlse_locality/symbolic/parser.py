"""Recursive-descent parser for the expression grammar.

Grammar (EBNF)::

    expr     = term { ("+" | "-") term } ;
    term     = unary { ("*" | "/") unary } ;
    unary    = ("-" | "+") unary | power ;
    power    = primary [ "^" ( int | "(" "-" int ")" ) ] ;
    primary  = number | name | call | "(" expr ")" ;
    call     = "diff" "(" expr "," var [ "," int ] { "," var [ "," int ] } ")"
             | "ln" "(" expr ")" | "exp" "(" expr ")"
             | "V" "(" expr ")" | "Vd" "(" expr "," int ")" ;
    var      = "x" | "y" | "t" ;
    name     = "P" | "PB" | var | parameter ;
    number   = digits [ "." digits ] ;

``diff`` is evaluated on the spot, so ``diff(P,x,2)`` is the derivative-tagged
atom and ``diff(ln(PB*P),x)`` is the expanded quotient.
"""

from __future__ import annotations

import re
from fractions import Fraction
from typing import Iterable, List, Optional, Tuple

from .expr import Atom, Const, Coord, Exp, Expr, Ln, Param, Pot, add, mul, power

DEFAULT_PARAMS = frozenset(
    {"lambda", "b", "k", "D", "I", "m", "c1", "c2", "c3", "c4", "c5", "d", "sigma"}
)
_FUNCTIONS = {"diff", "ln", "exp", "V", "Vd"}

_TOKEN = re.compile(r"\s*(?:(\d+(?:\.\d+)?)|([A-Za-z_][A-Za-z_0-9]*)|(\S))")


class ParseError(ValueError):
    """Syntax error or unknown identifier, with the offending offset."""

    def __init__(self, message: str, position: int):
        super().__init__(f"{message} at position {position}")
        self.position = position


def _tokenize(text: str) -> List[Tuple[str, str, int]]:
    tokens = []
    pos = 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None or m.end() == pos:
            break
        start = m.start(m.lastindex) if m.lastindex else m.end()
        if m.group(1) is not None:
            tokens.append(("num", m.group(1), start))
        elif m.group(2) is not None:
            tokens.append(("name", m.group(2), start))
        elif m.group(3) is not None:
            tokens.append(("op", m.group(3), start))
        pos = m.end()
    tokens.append(("end", "", len(text)))
    return tokens


class _Parser:
    def __init__(self, text: str, params: Iterable[str]):
        self.tokens = _tokenize(text)
        self.i = 0
        self.params = set(params)

    @property
    def tok(self):
        return self.tokens[self.i]

    def _advance(self):
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def _expect(self, value: str):
        kind, text, pos = self.tok
        if text != value or kind == "end":
            raise ParseError(f"expected {value!r}, found {text or 'end of input'!r}", pos)
        self._advance()

    def parse(self) -> Expr:
        e = self.expr()
        kind, text, pos = self.tok
        if kind != "end":
            raise ParseError(f"unexpected {text!r}", pos)
        return e

    def expr(self) -> Expr:
        e = self.term()
        while self.tok[1] in ("+", "-") and self.tok[0] == "op":
            op = self._advance()[1]
            rhs = self.term()
            e = add(e, rhs) if op == "+" else add(e, mul(Const(-1), rhs))
        return e

    def term(self) -> Expr:
        e = self.unary()
        while self.tok[1] in ("*", "/") and self.tok[0] == "op":
            op = self._advance()[1]
            rhs = self.unary()
            e = mul(e, rhs) if op == "*" else mul(e, power(rhs, -1))
        return e

    def unary(self) -> Expr:
        if self.tok[0] == "op" and self.tok[1] in ("-", "+"):
            op = self._advance()[1]
            inner = self.unary()
            return mul(Const(-1), inner) if op == "-" else inner
        return self.power()

    def power(self) -> Expr:
        base = self.primary()
        if self.tok[0] == "op" and self.tok[1] == "^":
            self._advance()
            return power(base, self._signed_int())
        return base

    def _signed_int(self) -> int:
        kind, text, pos = self.tok
        if kind == "num" and text.isdigit():
            self._advance()
            return int(text)
        if text == "(":
            self._advance()
            sign = 1
            if self.tok[1] == "-":
                self._advance()
                sign = -1
            kind, text, pos = self.tok
            if kind != "num" or not text.isdigit():
                raise ParseError("integer exponent expected", pos)
            self._advance()
            self._expect(")")
            return sign * int(text)
        raise ParseError("integer exponent expected", pos)

    def primary(self) -> Expr:
        kind, text, pos = self.tok
        if kind == "num":
            self._advance()
            return Const(Fraction(text))
        if kind == "op" and text == "(":
            self._advance()
            e = self.expr()
            self._expect(")")
            return e
        if kind == "name":
            if text in _FUNCTIONS and self.tokens[self.i + 1][1] == "(":
                return self.call()
            self._advance()
            if text in ("P", "PB"):
                return Atom(text)
            if text in ("x", "y", "t"):
                return Coord(text)
            if text in self.params:
                return Param(text)
            raise ParseError(f"unknown identifier {text!r}", pos)
        raise ParseError(f"unexpected {text or 'end of input'!r}", pos)

    def call(self) -> Expr:
        from .calculus import differentiate

        name = self._advance()[1]
        self._expect("(")
        arg = self.expr()
        if name == "ln":
            self._expect(")")
            return Ln(arg)
        if name == "exp":
            self._expect(")")
            return Exp(arg)
        if name == "V":
            self._expect(")")
            return Pot(arg, 0)
        if name == "Vd":
            self._expect(",")
            order = self._signed_int()
            self._expect(")")
            return Pot(arg, order)
        # diff(expr, var [, n] {, var [, n]})
        result = arg
        while self.tok[1] == ",":
            self._advance()
            kind, var, pos = self.tok
            if var not in ("x", "y", "t") and var not in self.params:
                raise ParseError(f"cannot differentiate with respect to {var!r}", pos)
            self._advance()
            count = 1
            if self.tok[1] == "," and self.tokens[self.i + 1][0] == "num":
                self._advance()
                count = self._signed_int()
            target = Coord(var) if var in ("x", "y", "t") else Param(var)
            for _ in range(count):
                result = differentiate(result, target)
        self._expect(")")
        return result


def parse_expression(text: str, params: Optional[Iterable[str]] = None) -> Expr:
    """Parse ``text``; identifiers beyond ``P, PB, x, y, t`` must be parameters."""
    allowed = set(DEFAULT_PARAMS)
    if params is not None:
        allowed |= set(params)
    return _Parser(text, allowed).parse()
