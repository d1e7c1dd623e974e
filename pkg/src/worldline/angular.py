"""Exact total angular momentum.

Each particle's momentum M_k = x v_y - y v_x is a root of

    Phi(M, x, y, t) = M R_x,y R_y,x + x R_x,t R_y,x - y R_y,t R_x,y

taken together with the generating system.  Eliminating x and y by two rounds
of resultants gives E(M, t), which contains a large redundant factor besides the
degree-N factor G(M, t) whose roots are the N momenta.  The sum of the momenta
is then -beta/alpha for G = alpha M^N + beta M^(N-1) + ...

G itself is built directly as the norm of Phi over the roots of R_y: y is a
rational function of x on the solution set, so substituting it and reducing
modulo R_y leaves a polynomial in x whose multiplication-matrix determinant is
prod_k (M - M_k) up to a factor depending only on t.  E is far too large to
expand in t, so it is computed at a few fixed rational times and checked to be
divisible by G there.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

from worldline import upoly
from worldline.assembly import assemble
from worldline.elimination import (Eliminant, common_factor_D, determinant, discriminant,
                                   eliminants, resultant)
from worldline.errors import NearEvent, PipelineFailure
from worldline.poly import ZERO, MultiPoly, as_rational

log = logging.getLogger(__name__)

E_TIMES = (2,)
VERIFY_TIMES = (Fraction(1, 3), Fraction(7, 5))


@dataclass
class EliminatedSample:
    t: Fraction
    degree: int
    factor_degree: int
    quotient_degree: int
    divides: bool


@dataclass
class AngularMomentumPipeline:
    phi: MultiPoly
    G: MultiPoly                       # in M and t, primitive over Q[t]
    alpha: MultiPoly
    beta: MultiPoly
    total: Fraction                    # -beta/alpha
    A: MultiPoly                       # alpha / f_N
    alpha_has_fN_factor: bool
    D: MultiPoly
    A_over_D: Fraction | None          # constant ratio when A is proportional to D
    E_samples: list[EliminatedSample] = field(default_factory=list)
    numeric_mismatch: float = 0.0

    @property
    def degree(self) -> int:
        return self.G.degree("M")


def phi_polynomial(elims: tuple[Eliminant, Eliminant]) -> MultiPoly:
    Ry = elims[0].as_multipoly()
    Rx = elims[1].as_multipoly()
    Ry_x, Ry_t = Ry.differentiate("x"), Ry.differentiate("t")
    Rx_y, Rx_t = Rx.differentiate("y"), Rx.differentiate("t")
    M, x, y = MultiPoly.var("M"), MultiPoly.var("x"), MultiPoly.var("y")
    return M * Rx_y * Ry_x + x * Rx_t * Ry_x - y * Ry_t * Rx_y


def _prem(A: MultiPoly, B: MultiPoly, var: str) -> MultiPoly:
    """Pseudo-remainder of A by B in ``var``."""
    db = B.degree(var)
    lb = B.coefficients(var)[db]
    v = MultiPoly.var(var)
    while not A.is_zero() and A.degree(var) >= db:
        da = A.degree(var)
        la = A.coefficients(var)[da]
        A = lb * A - la * v ** (da - db) * B
    return A


def linear_relation(F1: MultiPoly, F2: MultiPoly) -> tuple[MultiPoly, MultiPoly]:
    """(a, b) in Q[x, t] with a*y + b vanishing on every common root."""
    A, B = sorted((F1, F2), key=lambda F: -F.degree("y"))
    if B.degree("y") == 0:
        A, B = B, A
        if B.degree("y") != 1:
            raise PipelineFailure("y cannot be written rationally in x: one equation lacks y and the other is not linear in it")
    while B.degree("y") > 1:
        R = _prem(A, B, "y")
        if R.degree("y") < 1:
            raise PipelineFailure("pseudo-remainder sequence in y skipped degree 1")
        A, B = B, R
    c = B.coefficients("y")
    return c[1], c[0]


def _reduce(coeffs: list[MultiPoly], Ry: Eliminant) -> list[MultiPoly]:
    """Remainder modulo R_y of a polynomial in x given by its coefficient list."""
    N = Ry.degree
    f = Ry.coeffs
    lead = Ry.leading.constant_value()
    coeffs = list(coeffs)
    for k in range(len(coeffs) - 1, N - 1, -1):
        c = coeffs[k]
        if c.is_zero():
            continue
        q = c / lead
        for i in range(N):
            if not f[i].is_zero():
                coeffs[k - N + i] = coeffs[k - N + i] - q * f[i]
        coeffs[k] = ZERO
    out = coeffs[:N]
    return out + [ZERO] * (N - len(out))


def _mul_mod(a: list[MultiPoly], b: list[MultiPoly], Ry: Eliminant) -> list[MultiPoly]:
    prod = [ZERO] * (len(a) + len(b) - 1)
    for i, u in enumerate(a):
        if u.is_zero():
            continue
        for j, v in enumerate(b):
            if not v.is_zero():
                prod[i + j] = prod[i + j] + u * v
    return _reduce(prod, Ry)


def norm_polynomial(sys, elims: tuple[Eliminant, Eliminant], phi: MultiPoly) -> MultiPoly:
    """prod over the N solutions of Phi(M, x_k, y_k, t), up to a factor in t."""
    Ry = elims[0]
    if not Ry.leading.is_constant():
        raise PipelineFailure("leading coefficient of R_y depends on t")
    a, b = linear_relation(sys.F1, sys.F2)
    dy = phi.degree("y")
    parts = phi.coefficients("y")
    psi = ZERO
    for j, pj in enumerate(parts):
        if not pj.is_zero():
            psi = psi + pj * (-b) ** j * a ** (dy - j)
    h = _reduce(psi.coefficients("x"), Ry)
    N = Ry.degree
    cols = []
    col = h
    x1 = [ZERO, MultiPoly.constant(1)]
    for _ in range(N):
        cols.append(col)
        col = _mul_mod(col, x1, Ry) if N > 1 else col
    rows = [[cols[j][i] for j in range(N)] for i in range(N)]
    return determinant(rows, method="interpolate")


def _primitive_in_M(G: MultiPoly) -> MultiPoly:
    coeffs = [upoly.from_multipoly(c) for c in G.coefficients("M")]
    nonzero = [c for c in coeffs if c]
    g = nonzero[0]
    for c in nonzero[1:]:
        g = upoly.gcd(g, c)
    coeffs = [upoly.exact_div(c, g) if c else [] for c in coeffs]
    # clear denominators and integer content; leading t-coefficient of alpha positive
    den = math.lcm(*(Fraction(v).denominator for c in coeffs for v in c))
    coeffs = [upoly.scale(c, den) for c in coeffs]
    content = math.gcd(*(int(v) for c in coeffs for v in c))
    sign = 1 if upoly.lc(coeffs[-1]) > 0 else -1
    coeffs = [upoly.scale(c, Fraction(sign, content)) for c in coeffs]
    M = MultiPoly.var("M")
    out = ZERO
    for c in reversed(coeffs):
        out = out * M + upoly.to_multipoly(c)
    return out


def eliminated_at(sys, phi: MultiPoly, t0) -> list:
    """E(M, t0) = Res_y(Res_x(Phi, F1), Res_x(Phi, F2)) as a list in M, low first."""
    t0 = as_rational(t0)
    ph = phi.evaluate({"t": t0})
    F1 = sys.F1.evaluate({"t": t0}) if "t" in sys.F1.variables() else sys.F1
    F2 = sys.F2.evaluate({"t": t0}) if "t" in sys.F2.variables() else sys.F2
    r1 = resultant(ph, F1, "x")
    r2 = resultant(ph, F2, "x")
    E = resultant(r1, r2, "y", method="interpolate")
    return upoly.from_multipoly(E, "M")


def numeric_momenta(sys, elims, t) -> np.ndarray:
    """Per-particle x v_y - y v_x at rational t."""
    from worldline.dynamics import _Derivs
    from worldline.roots import solve_at
    xs = solve_at(elims[0], t)
    ys = solve_at(elims[1], t)
    parts = assemble(xs, ys, sys, t)
    x = np.array([p.x for p in parts])
    y = np.array([p.y for p in parts])
    vx, _ = _Derivs(elims[0]).kinematics(t, x, accel=False)
    vy, _ = _Derivs(elims[1]).kinematics(t, y, accel=False)
    return x * vy - y * vx


def _match_error(a: np.ndarray, b: np.ndarray) -> float:
    from scipy.optimize import linear_sum_assignment
    cost = np.abs(a[:, None] - b[None, :])
    r, c = linear_sum_assignment(cost)
    return float(np.max(cost[r, c] / (1 + np.abs(a[r]))))


def angular_momentum_exact(sys, elims: tuple[Eliminant, Eliminant] | None = None,
                           e_times: Sequence = E_TIMES, verify_times: Sequence = VERIFY_TIMES,
                           tol: float = 1e-6) -> AngularMomentumPipeline:
    elims = elims or eliminants(sys)
    N = elims[0].degree
    phi = phi_polynomial(elims)
    Gt = norm_polynomial(sys, elims, phi)
    if Gt.is_zero() or Gt.degree("M") != N:
        raise PipelineFailure(f"norm polynomial has degree {Gt.degree('M')} in M, expected {N}",
                              diagnostics={"norm": str(Gt)[:2000]})
    G = _primitive_in_M(Gt)
    cm = G.coefficients("M")
    alpha, beta = cm[N], cm[N - 1] if N >= 1 else ZERO
    r = upoly.proportionality(upoly.from_multipoly(beta), upoly.from_multipoly(alpha)) \
        if not beta.is_zero() else Fraction(0)
    if r is None:
        raise PipelineFailure("beta/alpha is not a constant: total angular momentum varies",
                              diagnostics={"alpha": str(alpha), "beta": str(beta)})
    total = -Fraction(r)

    fN = elims[0].leading.constant_value()
    A = alpha / fN
    alpha_has_fN = all(Fraction(c).denominator == 1 for c in A.terms.values())
    if N > 1:
        D = common_factor_D(discriminant(elims[0]), discriminant(elims[1]))
    else:
        D = MultiPoly.constant(1)
    q, rem = upoly.divmod_(upoly.from_multipoly(A), upoly.from_multipoly(D))
    A_over_D = Fraction(q[0]) if not rem and upoly.degree(q) == 0 else None

    worst = 0.0
    for ts in verify_times:
        ts = Fraction(as_rational(ts))
        g_at = [Fraction(c.constant_value() if c.is_constant() else c.evaluate({"t": ts})) for c in cm]
        if g_at[-1] == 0:
            continue
        try:
            mk = numeric_momenta(sys, elims, ts)
        except NearEvent:
            continue
        roots = np.roots([float(c) for c in reversed(g_at)]) if N > 1 else \
            np.array([-float(g_at[0]) / float(g_at[1])])
        worst = max(worst, _match_error(mk, roots.astype(complex)))
    if worst > tol:
        raise PipelineFailure(f"roots of G do not match the numeric particle momenta (error {worst:.3g})",
                              diagnostics={"G": str(G), "mismatch": worst})

    samples = []
    for t0 in e_times:
        t0 = Fraction(as_rational(t0))
        E = eliminated_at(sys, phi, t0)
        g0 = upoly.strip([Fraction(c.constant_value() if c.is_constant() else c.evaluate({"t": t0})) for c in cm])
        quo, rem = upoly.divmod_(E, g0)
        samples.append(EliminatedSample(t0, upoly.degree(E), upoly.degree(g0), upoly.degree(quo), not rem))
        log.info("E(M, %s): degree %d, G factor %d, cofactor %d, divides=%s", t0, upoly.degree(E),
                 upoly.degree(g0), upoly.degree(quo), not rem)
    return AngularMomentumPipeline(phi, G, alpha, beta, total, A, alpha_has_fN, D, A_over_D, samples, worst)


__all__ = ["AngularMomentumPipeline", "angular_momentum_exact", "phi_polynomial", "eliminated_at",
           "norm_polynomial", "linear_relation", "numeric_momenta", "EliminatedSample"]
