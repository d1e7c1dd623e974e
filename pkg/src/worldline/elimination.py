"""Resultant-based elimination.

Sylvester determinants are computed by fraction-free (Bareiss) elimination
over the polynomial ring.  When intermediate entries grow past a term budget
the determinant is recomputed by evaluating the matrix at integer points of
each remaining variable and interpolating exactly.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from worldline import upoly
from worldline.errors import DegenerateSystem, EliminationError
from worldline.poly import ONE, VARS, ZERO, MultiPoly, UniPolyInT, as_rational

try:
    from gmpy2 import mpz
except ImportError:  # pragma: no cover
    mpz = int

log = logging.getLogger(__name__)

DEFAULT_TERM_BUDGET = 4000


@dataclass(frozen=True)
class SylvesterMatrix:
    entries: tuple[tuple[MultiPoly, ...], ...]
    var: str

    @property
    def dimension(self) -> int:
        return len(self.entries)

    def as_lists(self) -> list[list[MultiPoly]]:
        return [list(r) for r in self.entries]


@dataclass(frozen=True)
class Eliminant:
    poly: UniPolyInT
    eliminated: str

    @property
    def var(self) -> str:
        return self.poly.var

    @property
    def degree(self) -> int:
        return self.poly.degree

    @property
    def leading(self) -> MultiPoly:
        return self.poly.leading

    @property
    def coeffs(self) -> tuple[MultiPoly, ...]:
        return self.poly.coeffs

    def as_multipoly(self) -> MultiPoly:
        return self.poly.to_poly()


# determinants ---------------------------------------------------------------

class _Swell(Exception):
    pass


def _numeric_det(rows: list[list]) -> Fraction | int:
    n = len(rows)
    if n == 0:
        return 1
    if all(type(c) is int for r in rows for c in r):
        return int(_bareiss_int([[mpz(c) for c in r] for r in rows]))
    # clear denominators row by row so the integer path applies
    scale = 1
    int_rows = []
    for r in rows:
        fr = [Fraction(c) for c in r]
        d = math.lcm(*(c.denominator for c in fr))
        scale *= d
        int_rows.append([mpz(c.numerator * (d // c.denominator)) for c in fr])
    return upoly._norm(Fraction(int(_bareiss_int(int_rows)), scale))


def _bareiss_int(a: list[list]) -> int:
    n = len(a)
    sign = 1
    prev = mpz(1)
    for k in range(n - 1):
        if a[k][k] == 0:
            for i in range(k + 1, n):
                if a[i][k] != 0:
                    a[k], a[i] = a[i], a[k]
                    sign = -sign
                    break
            else:
                return 0
        akk = a[k][k]
        rk = a[k]
        for i in range(k + 1, n):
            ri = a[i]
            aik = ri[k]
            if aik == 0:
                for j in range(k + 1, n):
                    ri[j] = (ri[j] * akk) // prev
            else:
                for j in range(k + 1, n):
                    ri[j] = (ri[j] * akk - aik * rk[j]) // prev
            ri[k] = 0
        prev = akk
    return sign * a[n - 1][n - 1]


def _gauss_det(a: list[list[Fraction]]):
    n = len(a)
    det = Fraction(1)
    for k in range(n):
        p = next((i for i in range(k, n) if a[i][k] != 0), None)
        if p is None:
            return 0
        if p != k:
            a[k], a[p] = a[p], a[k]
            det = -det
        piv = a[k][k]
        det *= piv
        for i in range(k + 1, n):
            f = a[i][k] / piv
            if f:
                ri, rk = a[i], a[k]
                for j in range(k + 1, n):
                    ri[j] -= f * rk[j]
    return upoly._norm(det)


def _bareiss_poly(rows: list[list[MultiPoly]], term_budget: int) -> MultiPoly:
    a = [list(r) for r in rows]
    n = len(a)
    if n == 0:
        return ONE
    sign = 1
    prev = ONE
    for k in range(n - 1):
        if a[k][k].is_zero():
            for i in range(k + 1, n):
                if not a[i][k].is_zero():
                    a[k], a[i] = a[i], a[k]
                    sign = -sign
                    break
            else:
                return ZERO
        akk = a[k][k]
        for i in range(k + 1, n):
            aik = a[i][k]
            for j in range(k + 1, n):
                v = a[i][j] * akk
                if not aik.is_zero() and not a[k][j].is_zero():
                    v = v - aik * a[k][j]
                if not prev.is_constant() or prev.constant_value() != 1:
                    v = v.exact_div(prev)
                if len(v) > term_budget:
                    raise _Swell
                a[i][j] = v
            a[i][k] = ZERO
        prev = akk
    det = a[n - 1][n - 1]
    return -det if sign < 0 else det


def degree_bound(rows: Sequence[Sequence[MultiPoly]], var: str) -> int:
    """Upper bound on the degree of the determinant in ``var``."""
    def best(lines):
        total = 0
        for line in lines:
            total += max((e.degree(var) for e in line if not e.is_zero()), default=0)
        return total

    cols = list(zip(*rows)) if rows else []
    return min(best(rows), best(cols))


def _evaluate_rows(rows, var, value):
    out = []
    for r in rows:
        nr = []
        for e in r:
            if var in e.variables():
                v = e.evaluate({var: value})
                nr.append(v if isinstance(v, MultiPoly) else MultiPoly.constant(v))
            else:
                nr.append(e)
        out.append(nr)
    return out


def interpolate_multipoly(points: Sequence[int], values: Sequence[MultiPoly], var: str) -> MultiPoly:
    """Exact Newton interpolation with polynomial-valued samples."""
    n = len(points)
    coef = list(values)
    for j in range(1, n):
        for i in range(n - 1, j - 1, -1):
            coef[i] = (coef[i] - coef[i - 1]) / (points[i] - points[i - j])
    v = MultiPoly.var(var)
    result = ZERO
    for i in range(n - 1, -1, -1):
        result = result * (v - points[i]) + coef[i]
    return result


def _interp_det(rows: list[list[MultiPoly]]) -> MultiPoly:
    present = set()
    for r in rows:
        for e in r:
            present |= e.variables()
    if not present:
        return MultiPoly.constant(_numeric_det([[e.constant_value() for e in r] for r in rows]))
    if len(present) == 1:
        (var,) = present
        d = degree_bound(rows, var)
        # integer rows make every sample an integer determinant
        scale = 1
        dense = []
        for r in rows:
            polys = [upoly.from_multipoly(e, var) for e in r]
            den = math.lcm(*(Fraction(c).denominator for q in polys for c in q))
            scale *= den
            dense.append([[int(c * den) for c in q] for q in polys])
        points = list(range(d + 1))
        values = [_numeric_det([[upoly.evaluate(c, p) for c in r] for r in dense]) for p in points]
        return upoly.to_multipoly(upoly.scale(upoly.interpolate(points, values), Fraction(1, scale)), var)
    # interpolate the variable of highest degree last, fewest points outermost
    var = min(present, key=lambda v: (degree_bound(rows, v), VARS.index(v)))
    d = degree_bound(rows, var)
    points = list(range(d + 1))
    values = [_interp_det(_evaluate_rows(rows, var, p)) for p in points]
    return interpolate_multipoly(points, values, var)


def determinant(rows: Sequence[Sequence[MultiPoly]], term_budget: int = DEFAULT_TERM_BUDGET,
                method: str = "auto") -> MultiPoly:
    """Exact determinant of a square matrix of polynomials.

    ``method`` is ``"bareiss"``, ``"interpolate"`` or ``"auto"`` (Bareiss with
    interpolation fallback once an entry exceeds ``term_budget`` terms).
    """
    rows = [list(r) for r in rows]
    if any(len(r) != len(rows) for r in rows):
        raise ValueError("matrix is not square")
    if method == "interpolate":
        return _interp_det(rows)
    if method == "bareiss":
        return _bareiss_poly(rows, term_budget=10 ** 18)
    if all(e.is_constant() for r in rows for e in r):
        return MultiPoly.constant(_numeric_det([[e.constant_value() for e in r] for r in rows]))
    try:
        return _bareiss_poly(rows, term_budget)
    except _Swell:
        log.debug("Bareiss swell above %d terms on %dx%d matrix; interpolating", term_budget,
                  len(rows), len(rows))
        return _interp_det(rows)


# resultants -----------------------------------------------------------------

def sylvester(P: MultiPoly, Q: MultiPoly, var: str, deg_p: int | None = None,
              deg_q: int | None = None) -> SylvesterMatrix:
    """Sylvester matrix of P and Q with respect to ``var``.

    Formal degrees may be given to keep the layout fixed when leading
    coefficients vanish.
    """
    p = P.degree(var) if deg_p is None else deg_p
    q = Q.degree(var) if deg_q is None else deg_q
    if p <= 0 or q <= 0:
        raise EliminationError(f"both polynomials need positive degree in {var} (got {p}, {q})")
    pc = P.coefficients(var)
    qc = Q.coefficients(var)
    pc = pc + [ZERO] * (p + 1 - len(pc))
    qc = qc + [ZERO] * (q + 1 - len(qc))
    n = p + q
    rows = []
    for i in range(q):
        row = [ZERO] * n
        for j in range(p + 1):
            row[i + j] = pc[p - j]
        rows.append(tuple(row))
    for i in range(p):
        row = [ZERO] * n
        for j in range(q + 1):
            row[i + j] = qc[q - j]
        rows.append(tuple(row))
    return SylvesterMatrix(tuple(rows), var)


def resultant(P: MultiPoly, Q: MultiPoly, var: str, term_budget: int = DEFAULT_TERM_BUDGET,
              method: str = "auto", deg_p: int | None = None, deg_q: int | None = None) -> MultiPoly:
    """Res(P, Q; var) as the exact Sylvester determinant.

    A polynomial free of ``var`` gives the usual convention Res(P, Q) = P^deg(Q).
    """
    p = P.degree(var) if deg_p is None else deg_p
    q = Q.degree(var) if deg_q is None else deg_q
    if p == 0 and q > 0:
        return P ** q
    if q == 0 and p > 0:
        return Q ** p
    S = sylvester(P, Q, var, deg_p, deg_q)
    return determinant(S.entries, term_budget=term_budget, method=method)


def eliminants(sys) -> tuple[Eliminant, Eliminant]:
    """(R_y, R_x): y eliminated (polynomial in x) and x eliminated (polynomial in y)."""
    out = []
    for elim, keep in (("y", "x"), ("x", "y")):
        if sys.F1.degree(elim) <= 0 and sys.F2.degree(elim) <= 0:
            raise DegenerateSystem(f"neither F1 nor F2 depends on {elim}")
        # formal degrees n, m keep the eliminant at degree N with the leading-form coefficient
        r = resultant(sys.F1, sys.F2, elim, deg_p=sys.n, deg_q=sys.m)
        if r.is_zero():
            raise DegenerateSystem(f"resultant over {elim} vanishes identically (common factor)")
        u = UniPolyInT.from_poly(r, keep)
        if u.degree != sys.N:
            raise DegenerateSystem(
                f"eliminant in {keep} has degree {u.degree}, expected N = {sys.N}"
            )
        out.append(Eliminant(u, elim))
    return out[0], out[1]


def leading_forms_resultant(sys) -> MultiPoly:
    """Res over xi of the top-degree forms at (x, y) = (xi, 1)."""
    x = MultiPoly.var("x")
    forms = []
    for F, d in ((sys.F1, sys.n), (sys.F2, sys.m)):
        top = F.homogeneous_part(d)
        forms.append(top.substitute("y", ONE).substitute("x", x))
    return resultant(forms[0], forms[1], "x", deg_p=sys.n, deg_q=sys.m)


def leading_coeff_check(sys, elims: tuple[Eliminant, Eliminant] | None = None):
    """Common leading coefficient of both eliminants, cross-checked against the leading forms.

    Returns the resultant of the leading forms (a rational).  Raises
    DegenerateSystem when it vanishes and EliminationError when it does not
    match both eliminants up to sign.
    """
    value = leading_forms_resultant(sys)
    if value.is_zero():
        raise DegenerateSystem("leading forms share a common root: principal coefficient is zero")
    if not value.is_constant():
        raise DegenerateSystem(f"principal coefficient depends on t: {value}")
    c = value.constant_value()
    if elims is None:
        elims = eliminants(sys)
    for e in elims:
        lead = e.leading
        if not lead.is_constant() or abs(lead.constant_value()) != abs(c):
            raise EliminationError(
                f"leading coefficient {lead} of the {e.var}-eliminant does not match {c}"
            )
    return c


def normalization_sign(e: Eliminant, reference) -> int:
    return 1 if e.leading.constant_value() == as_rational(reference) else -1


def discriminant(e: Eliminant | UniPolyInT) -> MultiPoly:
    """Res(e, e'; main variable) divided by the leading coefficient."""
    u = e.poly if isinstance(e, Eliminant) else e
    if u.degree < 1:
        raise EliminationError("discriminant needs positive degree")
    if u.degree == 1:
        return ONE
    p = u.to_poly()
    dp = p.differentiate(u.var)
    r = resultant(p, dp, u.var)
    return r.exact_div(u.leading)


def common_factor_D(d1: MultiPoly, d2: MultiPoly) -> MultiPoly:
    """Monic gcd in Q[t] of two discriminants."""
    g = upoly.gcd(upoly.from_multipoly(d1), upoly.from_multipoly(d2))
    return upoly.to_multipoly(g)


def isolate_real_roots(p: MultiPoly, interval: tuple | None = None) -> list[tuple[Fraction, Fraction]]:
    """Isolating intervals (a, b] for the distinct real roots of p(t).

    ``interval`` bounds the search; ``None`` (or None endpoints) means the whole line.
    """
    lo, hi = (None, None) if interval is None else interval
    lo = None if lo is None else as_rational(lo)
    hi = None if hi is None else as_rational(hi)
    return [(Fraction(a), Fraction(b)) for a, b in upoly.isolate_real_roots(upoly.from_multipoly(p), lo, hi)]


def proportionality_factor(a: MultiPoly, b: MultiPoly):
    """Rational r with a = r * b, or None."""
    if b.is_zero():
        return None
    ka = a.sorted_terms()
    kb = b.sorted_terms()
    if len(ka) != len(kb) or not ka:
        return None
    r = Fraction(ka[0][1]) / Fraction(kb[0][1])
    if a == b.scale(r):
        return upoly._norm(r)
    return None
