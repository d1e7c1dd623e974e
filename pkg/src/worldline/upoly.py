"""Dense univariate polynomials over Q, stored lowest power first.

Plain lists of ``int``/``Fraction``; the empty list is the zero polynomial.
These carry the exact work in t: gcds, discriminant factors, Sturm sequences.
"""

from __future__ import annotations

import math
from fractions import Fraction
from typing import Sequence

from worldline.poly import MultiPoly, as_rational

Poly = list


def _norm(c):
    if type(c) is Fraction and c.denominator == 1:
        return c.numerator
    return c


def strip(p: Sequence) -> Poly:
    p = [_norm(c) for c in p]
    while p and not p[-1]:
        p.pop()
    return p


def degree(p: Sequence) -> int:
    return len(p) - 1


def lc(p: Sequence):
    return p[-1] if p else 0


def from_multipoly(p: MultiPoly, var: str = "t") -> Poly:
    extra = p.variables() - {var}
    if extra:
        raise ValueError(f"polynomial depends on {sorted(extra)} besides {var}")
    return strip([c.constant_value() if c else 0 for c in p.coefficients(var)])


def to_multipoly(p: Sequence, var: str = "t") -> MultiPoly:
    return MultiPoly.from_univariate(p, var)


def add(a: Sequence, b: Sequence) -> Poly:
    n = max(len(a), len(b))
    return strip([(a[i] if i < len(a) else 0) + (b[i] if i < len(b) else 0) for i in range(n)])


def sub(a: Sequence, b: Sequence) -> Poly:
    n = max(len(a), len(b))
    return strip([(a[i] if i < len(a) else 0) - (b[i] if i < len(b) else 0) for i in range(n)])


def scale(a: Sequence, c) -> Poly:
    return strip([x * c for x in a])


def mul(a: Sequence, b: Sequence) -> Poly:
    if not a or not b:
        return []
    out = [0] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        if x:
            for j, y in enumerate(b):
                out[i + j] += x * y
    return strip(out)


def derivative(p: Sequence) -> Poly:
    return strip([i * c for i, c in enumerate(p)][1:])


def evaluate(p: Sequence, x):
    acc = 0
    for c in reversed(p):
        acc = acc * x + c
    return _norm(acc)


def divmod_(a: Sequence, b: Sequence) -> tuple[Poly, Poly]:
    if not b:
        raise ZeroDivisionError("polynomial division by zero")
    a = list(a)
    db = len(b) - 1
    inv = Fraction(1) / Fraction(b[-1]) if type(b[-1]) is not int or abs(b[-1]) != 1 else b[-1]
    q = [0] * max(len(a) - db, 0)
    for k in range(len(a) - 1 - db, -1, -1):
        c = _norm(a[k + db] * inv)
        q[k] = c
        if c:
            for j in range(db + 1):
                a[k + j] -= c * b[j]
    return strip(q), strip(a[:db])


def rem(a: Sequence, b: Sequence) -> Poly:
    return divmod_(a, b)[1]


def exact_div(a: Sequence, b: Sequence) -> Poly:
    q, r = divmod_(a, b)
    if r:
        raise ArithmeticError("polynomial division leaves a remainder")
    return q


def content(p: Sequence) -> Fraction:
    """Positive rational c such that p / c has coprime integer coefficients."""
    num, den = 0, 1
    for c in p:
        c = Fraction(c)
        num = math.gcd(num, c.numerator)
        den = den * c.denominator // math.gcd(den, c.denominator)
    return Fraction(num, den) if num else Fraction(1)


def primitive(p: Sequence) -> Poly:
    """Integer primitive part with positive leading coefficient."""
    if not p:
        return []
    c = content(p)
    if p[-1] < 0:
        c = -c
    return strip([Fraction(x) / c for x in p])


def monic(p: Sequence) -> Poly:
    if not p:
        return []
    l = Fraction(p[-1])
    return strip([Fraction(x) / l for x in p])


def gcd(a: Sequence, b: Sequence) -> Poly:
    """Monic gcd in Q[t] via a primitive remainder sequence."""
    a, b = primitive(strip(a)), primitive(strip(b))
    if len(a) < len(b):
        a, b = b, a
    while b:
        a, b = b, primitive(prem(a, b))
    return monic(a)


def prem(a: Sequence, b: Sequence) -> Poly:
    """Pseudo-remainder lc(b)^(deg a - deg b + 1) * a mod b, integer-preserving."""
    a = list(a)
    db = len(b) - 1
    if len(a) - 1 < db:
        return strip(a)
    l = b[-1]
    for k in range(len(a) - 1 - db, -1, -1):
        c = a[k + db]
        a = [x * l for x in a]
        if c:
            for j in range(db + 1):
                a[k + j] -= c * b[j]
        a.pop()
    return strip(a)


def squarefree_part(p: Sequence) -> Poly:
    p = strip(p)
    if len(p) <= 2:
        return primitive(p)
    g = gcd(p, derivative(p))
    return primitive(exact_div(p, g))


def proportionality(a: Sequence, b: Sequence):
    """Rational r with a = r * b, or None when no such constant exists."""
    a, b = strip(a), strip(b)
    if len(a) != len(b) or not b:
        return None
    r = Fraction(a[-1]) / Fraction(b[-1])
    if all(Fraction(x) == r * y for x, y in zip(a, b)):
        return _norm(r)
    return None


# real roots -----------------------------------------------------------------

def sturm_sequence(p: Sequence) -> list[Poly]:
    """Sturm sequence of the squarefree part, each member integer-primitive up to a positive factor."""
    f = squarefree_part(p)
    seq = [f, primitive_positive(derivative(f))]
    while True:
        r = rem(seq[-2], seq[-1])
        if not r:
            break
        seq.append(primitive_positive([-c for c in r]))
    return seq


def primitive_positive(p: Sequence) -> Poly:
    """Divide by the positive content only, keeping the sign pattern."""
    if not p:
        return []
    c = content(p)
    return strip([Fraction(x) / c for x in p])


def _sign(v) -> int:
    return (v > 0) - (v < 0)


def sign_variations(seq: list[Poly], x) -> int:
    signs = [_sign(evaluate(s, x)) for s in seq]
    signs = [s for s in signs if s]
    return sum(1 for u, v in zip(signs, signs[1:]) if u != v)


def _variations_at_infinity(seq: list[Poly], positive: bool) -> int:
    signs = []
    for s in seq:
        l = _sign(s[-1])
        if not positive and (len(s) - 1) % 2:
            l = -l
        signs.append(l)
    return sum(1 for u, v in zip(signs, signs[1:]) if u != v)


def cauchy_bound(p: Sequence) -> Fraction:
    p = strip(p)
    l = abs(Fraction(p[-1]))
    return 1 + max((abs(Fraction(c)) / l for c in p[:-1]), default=Fraction(0))


def count_real_roots(p: Sequence, lo=None, hi=None, seq: list[Poly] | None = None) -> int:
    """Number of distinct real roots in (lo, hi]; None means infinite."""
    p = strip(p)
    if len(p) <= 1:
        return 0
    seq = seq or sturm_sequence(p)
    vlo = _variations_at_infinity(seq, False) if lo is None else sign_variations(seq, lo)
    vhi = _variations_at_infinity(seq, True) if hi is None else sign_variations(seq, hi)
    return vlo - vhi


def isolate_real_roots(p: Sequence, lo=None, hi=None) -> list[tuple[Fraction, Fraction]]:
    """Disjoint intervals (a, b] each holding exactly one distinct real root.

    Roots exactly at a rational bisection point are returned as degenerate
    intervals (r, r).
    """
    p = strip(p)
    if len(p) <= 1:
        return []
    seq = sturm_sequence(p)
    f = seq[0]
    bound = cauchy_bound(f)
    a = -bound if lo is None else Fraction(lo)
    b = bound if hi is None else Fraction(hi)
    out: list[tuple[Fraction, Fraction]] = []
    if lo is not None and evaluate(f, a) == 0:
        out.append((a, a))
    stack = [(a, b, sign_variations(seq, a) - sign_variations(seq, b))]
    found = []
    while stack:
        l, r, n = stack.pop()
        if n == 0:
            continue
        if n == 1:
            found.append((l, r))
            continue
        m = (l + r) / 2
        if evaluate(f, m) == 0:
            found.append((m, m))
            # shrink around the exact root to keep the halves root-free at m
            eps = (r - l) / 2
            while True:
                eps /= 2
                if sign_variations(seq, m - eps) - sign_variations(seq, m) == 1 and \
                        sign_variations(seq, m) - sign_variations(seq, m + eps) == 0:
                    break
            nl = sign_variations(seq, l) - sign_variations(seq, m - eps)
            nr = sign_variations(seq, m + eps) - sign_variations(seq, r)
            stack.append((m + eps, r, nr))
            stack.append((l, m - eps, nl))
        else:
            vm = sign_variations(seq, m)
            stack.append((m, r, vm - sign_variations(seq, r)))
            stack.append((l, m, sign_variations(seq, l) - vm))
    out.extend(found)
    out.sort()
    return out


def refine_root(p: Sequence, interval: tuple[Fraction, Fraction], width) -> tuple[Fraction, Fraction]:
    """Shrink an isolating interval of a squarefree-part root to at most ``width``."""
    f = squarefree_part(p)
    a, b = Fraction(interval[0]), Fraction(interval[1])
    if a == b:
        return a, b
    fb = _sign(evaluate(f, b))
    if fb == 0:
        return b, b
    width = Fraction(width)
    while b - a > width:
        m = (a + b) / 2
        fm = _sign(evaluate(f, m))
        if fm == 0:
            return m, m
        if fm == fb:
            b = m
        else:
            a = m
    return a, b


def interpolate(xs: Sequence, ys: Sequence) -> Poly:
    """Exact Newton interpolation through the points (xs[i], ys[i])."""
    n = len(xs)
    coef = [Fraction(y) for y in ys]
    xs = [as_rational(x) for x in xs]
    for j in range(1, n):
        for i in range(n - 1, j - 1, -1):
            coef[i] = (coef[i] - coef[i - 1]) / (xs[i] - xs[i - j])
    p: Poly = []
    for i in range(n - 1, -1, -1):
        p = add(mul(p, [-xs[i], 1]), [coef[i]])
    return p
