"""Exact sparse polynomials over the rationals in the variables x, y, t, M.

Coefficients are Python ``int`` whenever they are integral and
``fractions.Fraction`` otherwise, so integer-coefficient work (the common case
for resultants) never pays for rational normalization.

Monomials are packed into a single integer, one 16-bit field per variable, so
multiplying monomials is integer addition.  The packed value orders monomials
lexicographically with M > t > y > x, which is the order used for exact
division.
"""

from __future__ import annotations

import math
from fractions import Fraction
from numbers import Rational
from typing import Iterable, Mapping, Sequence, Union

from worldline.errors import CoefficientOverflow

VARS = ("x", "y", "t", "M")
VAR_INDEX = {name: i for i, name in enumerate(VARS)}

_BITS = 16
_MASK = (1 << _BITS) - 1
MAX_EXPONENT = _MASK

Coeff = Union[int, Fraction]


def _norm(c) -> Coeff:
    if type(c) is Fraction and c.denominator == 1:
        return c.numerator
    return c


def as_rational(value) -> Coeff:
    """Convert an int, Fraction or 'p/q' string to an exact coefficient."""
    if isinstance(value, bool):
        raise TypeError("booleans are not rationals")
    if isinstance(value, int):
        return value
    if isinstance(value, Fraction):
        return _norm(value)
    if isinstance(value, str):
        return _norm(Fraction(value.strip()))
    if isinstance(value, Rational):
        return _norm(Fraction(value.numerator, value.denominator))
    raise TypeError(f"not an exact rational: {value!r}")


def pack(exps: Sequence[int]) -> int:
    key = 0
    for i, e in enumerate(exps):
        if e < 0 or e > MAX_EXPONENT:
            raise ValueError(f"exponent {e} out of range")
        key |= e << (_BITS * i)
    return key


def unpack(key: int) -> tuple[int, int, int, int]:
    return (key & _MASK, (key >> 16) & _MASK, (key >> 32) & _MASK, (key >> 48) & _MASK)


def _var_exp(key: int, i: int) -> int:
    return (key >> (_BITS * i)) & _MASK


def _unit(i: int) -> int:
    return 1 << (_BITS * i)


def _var_tag(var) -> int:
    if isinstance(var, int):
        return var
    try:
        return VAR_INDEX[var]
    except KeyError:
        raise ValueError(f"unknown variable {var!r}; expected one of {VARS}") from None


class MultiPoly:
    """Immutable sparse polynomial in x, y, t, M with exact rational coefficients."""

    __slots__ = ("_terms", "_hash")

    def __init__(self, terms: Mapping[int, Coeff] | None = None, _trusted: bool = False):
        if _trusted:
            self._terms = terms
        else:
            clean = {}
            for k, c in (terms or {}).items():
                c = as_rational(c)
                if c:
                    clean[k] = c
            self._terms = clean
        self._hash = None

    # construction -----------------------------------------------------------

    @classmethod
    def constant(cls, c) -> "MultiPoly":
        c = as_rational(c)
        return cls({0: c} if c else {}, _trusted=True)

    @classmethod
    def var(cls, name) -> "MultiPoly":
        return cls({_unit(_var_tag(name)): 1}, _trusted=True)

    @classmethod
    def from_exponents(cls, terms: Mapping[tuple, object]) -> "MultiPoly":
        """Build from ``{(ex, ey, et, eM): coeff}``; shorter tuples are zero-padded."""
        out: dict[int, Coeff] = {}
        for exps, c in terms.items():
            exps = tuple(exps) + (0,) * (4 - len(exps))
            k = pack(exps)
            out[k] = _norm(out.get(k, 0) + as_rational(c))
        return cls(out)

    @classmethod
    def from_univariate(cls, coeffs: Sequence, var) -> "MultiPoly":
        """Coefficients listed lowest degree first."""
        u = _unit(_var_tag(var))
        return cls({i * u: c for i, c in enumerate(coeffs)})

    # inspection -------------------------------------------------------------

    @property
    def terms(self) -> dict[tuple[int, int, int, int], Coeff]:
        return {unpack(k): c for k, c in self._terms.items()}

    def items(self):
        return self._terms.items()

    def __len__(self) -> int:
        return len(self._terms)

    def is_zero(self) -> bool:
        return not self._terms

    def __bool__(self) -> bool:
        return bool(self._terms)

    def is_constant(self) -> bool:
        return not self._terms or (len(self._terms) == 1 and 0 in self._terms)

    def constant_value(self) -> Coeff:
        if not self.is_constant():
            raise ValueError("polynomial is not constant")
        return self._terms.get(0, 0)

    def degree(self, var) -> int:
        """Degree in one variable; -1 for the zero polynomial."""
        i = _var_tag(var)
        if not self._terms:
            return -1
        return max(_var_exp(k, i) for k in self._terms)

    def total_degree(self, variables: Iterable = VARS) -> int:
        idx = [_var_tag(v) for v in variables]
        if not self._terms:
            return -1
        return max(sum(_var_exp(k, i) for i in idx) for k in self._terms)

    def variables(self) -> set[str]:
        seen = 0
        for k in self._terms:
            seen |= k
        return {VARS[i] for i in range(4) if _var_exp(seen, i)}

    def is_integral(self) -> bool:
        return all(type(c) is int for c in self._terms.values())

    def max_coeff_abs(self) -> Coeff:
        return max((abs(c) for c in self._terms.values()), default=0)

    def leading_key(self) -> int:
        return max(self._terms)

    # arithmetic -------------------------------------------------------------

    def _coerce(self, other) -> "MultiPoly":
        if isinstance(other, MultiPoly):
            return other
        return MultiPoly.constant(other)

    def __add__(self, other) -> "MultiPoly":
        other = self._coerce(other)
        if len(self._terms) < len(other._terms):
            a, b = other._terms, self._terms
        else:
            a, b = self._terms, other._terms
        out = dict(a)
        for k, c in b.items():
            s = out.get(k)
            if s is None:
                out[k] = c
            else:
                s = _norm(s + c)
                if s:
                    out[k] = s
                else:
                    del out[k]
        return MultiPoly(out, _trusted=True)

    __radd__ = __add__

    def __neg__(self) -> "MultiPoly":
        return MultiPoly({k: -c for k, c in self._terms.items()}, _trusted=True)

    def __sub__(self, other) -> "MultiPoly":
        return self + (-self._coerce(other))

    def __rsub__(self, other) -> "MultiPoly":
        return self._coerce(other) - self

    def scale(self, c) -> "MultiPoly":
        c = as_rational(c)
        if not c:
            return ZERO
        if c == 1:
            return self
        return MultiPoly({k: _norm(v * c) for k, v in self._terms.items()}, _trusted=True)

    def __mul__(self, other) -> "MultiPoly":
        if not isinstance(other, MultiPoly):
            return self.scale(other)
        a, b = self._terms, other._terms
        if not a or not b:
            return ZERO
        if len(a) < len(b):
            a, b = b, a
        out: dict[int, Coeff] = {}
        get = out.get
        for kb, cb in b.items():
            for ka, ca in a.items():
                k = ka + kb
                out[k] = get(k, 0) + ca * cb
        res = {}
        for k, c in out.items():
            if c:
                res[k] = _norm(c) if type(c) is Fraction else c
        return MultiPoly(res, _trusted=True)

    def __rmul__(self, other) -> "MultiPoly":
        return self.scale(other)

    def __pow__(self, n: int) -> "MultiPoly":
        if n < 0:
            raise ValueError("negative power")
        result = ONE
        base = self
        while n:
            if n & 1:
                result = result * base
            n >>= 1
            if n:
                base = base * base
        return result

    def __truediv__(self, c) -> "MultiPoly":
        c = as_rational(c)
        if isinstance(c, int):
            c = Fraction(c)
        return self.scale(1 / c)

    def exact_div(self, other: "MultiPoly") -> "MultiPoly":
        """Quotient of an exact division; raises ArithmeticError on a remainder."""
        if other.is_zero():
            raise ZeroDivisionError("division by the zero polynomial")
        if other.is_constant():
            return self / other.constant_value()
        lk = other.leading_key()
        lc = other._terms[lk]
        rest = [(k, c) for k, c in other._terms.items() if k != lk]
        rem = dict(self._terms)
        quot: dict[int, Coeff] = {}
        int_lc = type(lc) is int
        while rem:
            k = max(rem)
            c = rem[k]
            if k < lk or any(_var_exp(k, i) < _var_exp(lk, i) for i in range(4)):
                raise ArithmeticError("polynomial division leaves a remainder")
            qk = k - lk
            if int_lc and type(c) is int and c % lc == 0:
                qc = c // lc
            else:
                qc = _norm(Fraction(c) / lc)
            quot[qk] = qc
            del rem[k]
            for kb, cb in rest:
                kk = qk + kb
                v = rem.get(kk, 0) - qc * cb
                if v:
                    rem[kk] = _norm(v) if type(v) is Fraction else v
                else:
                    rem.pop(kk, None)
        return MultiPoly(quot, _trusted=True)

    # calculus and evaluation ------------------------------------------------

    def differentiate(self, var) -> "MultiPoly":
        i = _var_tag(var)
        u = _unit(i)
        out = {}
        for k, c in self._terms.items():
            e = _var_exp(k, i)
            if e:
                out[k - u] = c * e
        return MultiPoly(out, _trusted=True)

    def evaluate(self, bindings: Mapping) -> Union["MultiPoly", Coeff]:
        """Substitute exact values for some variables.

        Returns a rational when every variable present is bound, otherwise a
        MultiPoly in the unbound variables.
        """
        bound = {_var_tag(v): as_rational(val) for v, val in bindings.items()}
        powers: dict[tuple[int, int], Coeff] = {}

        def pw(i, e):
            p = powers.get((i, e))
            if p is None:
                p = bound[i] ** e
                powers[(i, e)] = p
            return p

        out: dict[int, Coeff] = {}
        for k, c in self._terms.items():
            nk = k
            for i in bound:
                e = _var_exp(k, i)
                if e:
                    c = c * pw(i, e)
                    nk -= e << (_BITS * i)
            if c:
                out[nk] = out.get(nk, 0) + c
        res = MultiPoly({k: _norm(c) for k, c in out.items() if c}, _trusted=True)
        if all(VAR_INDEX[v] in bound for v in self.variables()):
            return res.constant_value()
        return res

    def substitute(self, var, value: "MultiPoly") -> "MultiPoly":
        """Replace one variable by a polynomial."""
        coeffs = self.coefficients(var)
        result = ZERO
        for c in reversed(coeffs):
            result = result * value + c
        return result

    def coefficients(self, var) -> list["MultiPoly"]:
        """Coefficients with respect to ``var``, lowest power first."""
        i = _var_tag(var)
        d = self.degree(i)
        if d < 0:
            return []
        buckets: list[dict[int, Coeff]] = [{} for _ in range(d + 1)]
        for k, c in self._terms.items():
            e = _var_exp(k, i)
            buckets[e][k - (e << (_BITS * i))] = c
        return [MultiPoly(b, _trusted=True) for b in buckets]

    def homogeneous_part(self, degree: int, variables: Iterable = ("x", "y")) -> "MultiPoly":
        idx = [_var_tag(v) for v in variables]
        return MultiPoly(
            {k: c for k, c in self._terms.items() if sum(_var_exp(k, i) for i in idx) == degree},
            _trusted=True,
        )

    def eval_complex(self, values: Mapping[str, complex]) -> complex:
        """Floating evaluation with every present variable bound."""
        vals = [values.get(v) for v in VARS]
        total = 0j
        for k, c in self._terms.items():
            term = complex(float(c))
            for i in range(4):
                e = _var_exp(k, i)
                if e:
                    term *= vals[i] ** e
            total += term
        return total

    def abs_scale(self, values: Mapping[str, complex]) -> float:
        """Sum of |coefficient * monomial| at a point (residual scale)."""
        vals = [abs(values.get(v, 0)) for v in VARS]
        total = 0.0
        for k, c in self._terms.items():
            term = abs(float(c))
            for i in range(4):
                e = _var_exp(k, i)
                if e:
                    term *= vals[i] ** e
            total += term
        return total

    # comparison and display -------------------------------------------------

    def __eq__(self, other) -> bool:
        if isinstance(other, MultiPoly):
            return self._terms == other._terms
        if isinstance(other, (int, Fraction)):
            return self._terms == ({0: _norm(other)} if other else {})
        return NotImplemented

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash(frozenset(self._terms.items()))
        return self._hash

    def sorted_terms(self) -> list[tuple[tuple[int, int, int, int], Coeff]]:
        """Terms in graded lex order, x > y > M > t, highest first."""
        items = [(unpack(k), c) for k, c in self._terms.items()]
        items.sort(key=lambda it: (sum(it[0]), it[0][0], it[0][1], it[0][3], it[0][2]), reverse=True)
        return items

    def __str__(self) -> str:
        return to_text(self)

    def __repr__(self) -> str:
        return f"MultiPoly({to_text(self)!r})"


ZERO = MultiPoly({}, _trusted=True)
ONE = MultiPoly({0: 1}, _trusted=True)

_PRINT_ORDER = (2, 0, 1, 3)  # factors written t, x, y, M


def _monomial_text(exps) -> str:
    parts = []
    for i in _PRINT_ORDER:
        e = exps[i]
        if e == 1:
            parts.append(VARS[i])
        elif e > 1:
            parts.append(f"{VARS[i]}^{e}")
    return "*".join(parts)


def to_text(p: MultiPoly) -> str:
    """Canonical text form, e.g. ``-2*x^3 + y^3 + x*t + y*t + y + 2``."""
    if p.is_zero():
        return "0"
    out = []
    for n, (exps, c) in enumerate(p.sorted_terms()):
        neg = c < 0
        a = -c if neg else c
        mono = _monomial_text(exps)
        if not mono:
            body = str(a)
        elif a == 1:
            body = mono
        else:
            body = f"{a}*{mono}"
        if n == 0:
            out.append(f"-{body}" if neg else body)
        else:
            out.append(f" - {body}" if neg else f" + {body}")
    return "".join(out)


class UniPolyInT:
    """Polynomial in one main variable whose coefficients are polynomials in t.

    ``coeffs[i]`` multiplies ``main**i``.
    """

    __slots__ = ("var", "coeffs", "_dense")

    def __init__(self, var: str, coeffs: Sequence[MultiPoly]):
        if var not in ("x", "y", "M"):
            raise ValueError(f"main variable must be x, y or M, got {var!r}")
        coeffs = list(coeffs)
        while coeffs and coeffs[-1].is_zero():
            coeffs.pop()
        for c in coeffs:
            if c.variables() - {"t"}:
                raise ValueError(f"coefficient {c} depends on more than t")
        self.var = var
        self.coeffs = tuple(coeffs)
        self._dense = None

    @classmethod
    def from_poly(cls, p: MultiPoly, var: str) -> "UniPolyInT":
        return cls(var, p.coefficients(var))

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    @property
    def leading(self) -> MultiPoly:
        return self.coeffs[-1]

    def to_poly(self) -> MultiPoly:
        v = MultiPoly.var(self.var)
        result = ZERO
        for c in reversed(self.coeffs):
            result = result * v + c
        return result

    def differentiate(self, var) -> "UniPolyInT":
        if var == self.var:
            return UniPolyInT(self.var, [c * i for i, c in enumerate(self.coeffs)][1:])
        return UniPolyInT(self.var, [c.differentiate(var) for c in self.coeffs])

    def at(self, t_value) -> list[Coeff]:
        """Exact coefficients at a rational t, lowest power first."""
        t_value = Fraction(as_rational(t_value))
        if self._dense is None:
            self._dense = [_dense_in_t(c) for c in self.coeffs]
        p, q = t_value.numerator, t_value.denominator
        out = []
        for dense, den in self._dense:
            # integer Horner on the homogenized form, one division at the end
            acc = 0
            qk = 1
            for c in reversed(dense):
                acc = acc * p + c * qk
                qk *= q
            out.append(_norm(Fraction(acc, den * qk // q) if dense else 0))
        return out

    def __eq__(self, other) -> bool:
        return isinstance(other, UniPolyInT) and self.var == other.var and self.coeffs == other.coeffs

    def __repr__(self) -> str:
        return f"UniPolyInT({self.var!r}, {to_text(self.to_poly())!r})"


def _dense_in_t(c: MultiPoly) -> tuple[list[int], int]:
    """Integer coefficient list in t (low first) and a common denominator."""
    d = c.degree("t")
    if d < 0:
        return [], 1
    den = 1
    for v in c.terms.values():
        den = den * Fraction(v).denominator // math.gcd(den, Fraction(v).denominator)
    dense = [0] * (d + 1)
    for (_, _, et, _), v in c.terms.items():
        dense[et] += int(Fraction(v) * den)
    return dense, den


def evaluate_complex(p: UniPolyInT, t_value) -> list[complex]:
    """Coefficients of ``p`` at a rational t, rounded to doubles, lowest power first."""
    out = []
    for i, c in enumerate(p.at(t_value)):
        try:
            f = float(c)
        except OverflowError:
            f = math.inf
        if not math.isfinite(f):
            raise CoefficientOverflow(
                f"coefficient of {p.var}^{i} at t={t_value} has magnitude ~1e{_log10(c):.0f}, beyond double range"
            )
        out.append(complex(f))
    return out


def _log10(c) -> float:
    c = Fraction(c)
    return math.log10(abs(c.numerator) or 1) - math.log10(c.denominator)


def differentiate(p: MultiPoly, var) -> MultiPoly:
    return p.differentiate(var)


def evaluate_exact(p: MultiPoly, bindings: Mapping):
    return p.evaluate(bindings)


def poly_arith(a: MultiPoly, b: MultiPoly, op: str) -> MultiPoly:
    if op == "add":
        return a + b
    if op == "sub":
        return a - b
    if op == "mul":
        return a * b
    raise ValueError(f"unknown operation {op!r}")


def integer_content(p: MultiPoly) -> Fraction:
    """Positive rational c with p / c integral and primitive."""
    if p.is_zero():
        return Fraction(1)
    num = 0
    den = 1
    for c in p._terms.values():
        c = Fraction(c)
        num = math.gcd(num, c.numerator)
        den = den * c.denominator // math.gcd(den, c.denominator)
    return Fraction(num, den)
