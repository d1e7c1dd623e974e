"""Recursive-descent parser for polynomial text and the system loader.

Grammar (whitespace ignored)::

    expr    := ['+' | '-'] term (('+' | '-') term)*
    term    := factor ('*' factor)*
    factor  := ('+' | '-') factor | primary [('^' | '**') INTEGER]
    primary := INTEGER ['/' INTEGER] | VARIABLE | '(' expr ')'

Only integer and fraction literals are accepted, and products need an explicit
``*``; ``2x`` and ``1.5`` are syntax errors.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping

from worldline.errors import ConfigError, ParseError
from worldline.poly import VARS, MultiPoly

_TOKEN = re.compile(r"\s*(?:(\d+)|([A-Za-z_][A-Za-z_0-9]*)|(\*\*|[-+*/^()])|(\S))")
MAX_PARSE_EXPONENT = 10000


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.tokens: list[tuple[str, str, int]] = []
        pos = 0
        while pos < len(text):
            m = _TOKEN.match(text, pos)
            if m is None:
                break
            start = m.start(m.lastindex) if m.lastindex else m.end()
            if m.group(1) is not None:
                if m.end() < len(text) and text[m.end()] == ".":
                    raise ParseError("decimal literals are not allowed; use a fraction", text, m.end())
                self.tokens.append(("int", m.group(1), start))
            elif m.group(2) is not None:
                self.tokens.append(("name", m.group(2), start))
            elif m.group(3) is not None:
                self.tokens.append(("op", m.group(3), start))
            elif m.group(4) is not None:
                raise ParseError(f"unexpected character {m.group(4)!r}", text, start)
            pos = m.end()
        self.i = 0

    def peek(self):
        return self.tokens[self.i] if self.i < len(self.tokens) else ("end", "", len(self.text))

    def take(self):
        tok = self.peek()
        self.i += 1
        return tok

    def error(self, message: str, tok=None):
        tok = tok or self.peek()
        raise ParseError(message, self.text, tok[2])

    def parse(self) -> MultiPoly:
        if not self.tokens:
            self.error("empty expression")
        result = self.expr()
        if self.peek()[0] != "end":
            tok = self.peek()
            if tok[0] in ("int", "name") or tok[1] == "(":
                self.error("implicit multiplication is not allowed; use '*'")
            self.error(f"unexpected {tok[1]!r}")
        return result

    def expr(self) -> MultiPoly:
        sign = 1
        kind, val, _ = self.peek()
        if kind == "op" and val in "+-":
            self.take()
            sign = -1 if val == "-" else 1
        result = self.term() * sign
        while True:
            kind, val, _ = self.peek()
            if kind == "op" and val in ("+", "-"):
                self.take()
                t = self.term()
                result = result + t if val == "+" else result - t
            else:
                return result

    def term(self) -> MultiPoly:
        result = self.factor()
        while True:
            kind, val, _ = self.peek()
            if kind == "op" and val == "*":
                self.take()
                result = result * self.factor()
            elif kind == "op" and val == "/":
                self.error("division is only allowed inside a numeric literal like 4/17")
            else:
                return result

    def factor(self) -> MultiPoly:
        kind, val, _ = self.peek()
        if kind == "op" and val in ("+", "-"):
            self.take()
            f = self.factor()
            return -f if val == "-" else f
        base = self.primary()
        kind, val, _ = self.peek()
        if kind == "op" and val in ("^", "**"):
            self.take()
            tok = self.peek()
            if tok[0] == "op" and tok[1] == "-":
                self.error("negative exponents are not allowed", tok)
            if tok[0] != "int":
                self.error("exponent must be a non-negative integer", tok)
            self.take()
            e = int(tok[1])
            nxt = self.peek()
            if nxt[0] == "op" and nxt[1] == "/":
                self.error("fractional exponents are not allowed", nxt)
            if e > MAX_PARSE_EXPONENT:
                self.error(f"exponent {e} exceeds {MAX_PARSE_EXPONENT}", tok)
            return base ** e
        return base

    def primary(self) -> MultiPoly:
        tok = self.take()
        kind, val, _ = tok
        if kind == "int":
            num = int(val)
            nxt = self.peek()
            if nxt[0] == "op" and nxt[1] == "/":
                self.take()
                den_tok = self.take()
                if den_tok[0] != "int":
                    self.error("division is only allowed inside a numeric literal like 4/17", den_tok)
                den = int(den_tok[1])
                if den == 0:
                    self.error("zero denominator", den_tok)
                return MultiPoly.constant(Fraction(num, den))
            return MultiPoly.constant(num)
        if kind == "name":
            if val not in VARS:
                self.error(f"unknown variable {val!r}; allowed: {', '.join(VARS)}", tok)
            return MultiPoly.var(val)
        if kind == "op" and val == "(":
            inner = self.expr()
            close = self.take()
            if close[1] != ")":
                self.error("expected ')'", close)
            return inner
        if kind == "end":
            self.error("unexpected end of expression", tok)
        self.error(f"unexpected {val!r}", tok)


def parse_poly(text: str) -> MultiPoly:
    """Parse polynomial text into a canonical MultiPoly."""
    if not isinstance(text, str):
        raise ParseError(f"expected a string, got {type(text).__name__}")
    return _Parser(text).parse()


@dataclass(frozen=True)
class PolySystem:
    F1: MultiPoly
    F2: MultiPoly
    n: int
    m: int
    warnings: tuple[str, ...] = field(default=())
    source: tuple[str, str] | None = None

    @property
    def N(self) -> int:
        return self.n * self.m

    @property
    def structured(self) -> bool:
        return not self.warnings


def structure_violations(F: MultiPoly, d: int, name: str) -> list[str]:
    """Terms of (x, y)-degree d - I whose t-degree exceeds I."""
    out = []
    for (ex, ey, et, _), c in F.sorted_terms():
        I = d - (ex + ey)
        if et > I:
            out.append(f"{name}: term of degree {ex + ey} in (x, y) has t-degree {et} > {I}")
    return out


def make_system(F1: MultiPoly, F2: MultiPoly, source: tuple[str, str] | None = None) -> PolySystem:
    for name, F in (("F1", F1), ("F2", F2)):
        if "M" in F.variables():
            raise ConfigError(f"{name} must not contain M")
        if not ({"x", "y"} & F.variables()):
            raise ConfigError(f"{name} does not depend on x or y")
    n = F1.total_degree(("x", "y"))
    m = F2.total_degree(("x", "y"))
    warnings = structure_violations(F1, n, "F1") + structure_violations(F2, m, "F2")
    return PolySystem(F1, F2, n, m, tuple(warnings), source)


SYSTEM_KEYS = {"F1", "F2"}


def load_system(config: Mapping) -> PolySystem:
    """Build a validated PolySystem from the ``F1``/``F2`` entries of a config mapping."""
    missing = SYSTEM_KEYS - set(config)
    if missing:
        raise ConfigError(f"missing keys: {sorted(missing)}")
    texts = []
    polys = []
    for key in ("F1", "F2"):
        text = config[key]
        if not isinstance(text, str):
            raise ConfigError(f"{key} must be a polynomial string")
        try:
            polys.append(parse_poly(text))
        except ParseError as exc:
            raise ConfigError(f"{key}: {exc}") from exc
        texts.append(text)
    return make_system(polys[0], polys[1], (texts[0], texts[1]))


def linear_system(a: str = "x - t", b: str = "y - 2*t") -> PolySystem:
    return make_system(parse_poly(a), parse_poly(b))


__all__ = ["parse_poly", "PolySystem", "load_system", "make_system"]
