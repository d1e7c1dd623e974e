"""Pairing x-roots with y-roots into solutions of the generating system."""

from __future__ import annotations

from dataclasses import dataclass, replace
from fractions import Fraction
from typing import Sequence

import numpy as np
from scipy.optimize import linear_sum_assignment

from worldline.errors import AssemblyFailure, WorldlineError
from worldline.poly import MultiPoly
from worldline.roots import EPS_REAL, RootSet

TOL_PAIR = 1e-7


@dataclass(frozen=True)
class ParticleState:
    id: int
    x: complex
    y: complex
    kind: str                      # "R" or "C"
    conjugate_partner: int | None
    residual: float


class _Evaluator:
    """Float evaluation of F(x, y) at a fixed t, coefficients frozen once."""

    def __init__(self, F: MultiPoly, t):
        at_t = F.evaluate({"t": t}) if "t" in F.variables() else F
        if not isinstance(at_t, MultiPoly):
            at_t = MultiPoly.constant(at_t)
        terms = at_t.terms
        self.coef = np.array([float(c) for c in terms.values()])
        self.ex = np.array([e[0] for e in terms])
        self.ey = np.array([e[1] for e in terms])

    def __call__(self, x: np.ndarray, y: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """(value, sum of |term|) for broadcast arrays x, y."""
        x = np.asarray(x, dtype=complex)[..., None]
        y = np.asarray(y, dtype=complex)[..., None]
        mono = self.coef * x ** self.ex * y ** self.ey
        return mono.sum(axis=-1), np.abs(mono).sum(axis=-1)


def residual_matrix(xs: Sequence[complex], ys: Sequence[complex], sys, t) -> tuple[np.ndarray, np.ndarray]:
    """Residual |F1| + |F2| for every (x_i, y_j) and the matching scale."""
    X = np.asarray(xs, dtype=complex)[:, None]
    Y = np.asarray(ys, dtype=complex)[None, :]
    v1, s1 = _Evaluator(sys.F1, t)(X, Y)
    v2, s2 = _Evaluator(sys.F2, t)(X, Y)
    return np.abs(v1) + np.abs(v2), s1 + s2


def greedy_matching(cost: np.ndarray) -> np.ndarray:
    n = cost.shape[0]
    order = np.argsort(cost, axis=None, kind="stable")
    match = -np.ones(n, dtype=int)
    used = np.zeros(n, dtype=bool)
    for flat in order:
        i, j = divmod(int(flat), n)
        if match[i] < 0 and not used[j]:
            match[i] = j
            used[j] = True
    return match


def optimal_matching(cost: np.ndarray) -> np.ndarray:
    rows, cols = linear_sum_assignment(cost)
    match = np.empty(cost.shape[0], dtype=int)
    match[rows] = cols
    return match


def assemble(xs: RootSet | Sequence[complex], ys: RootSet | Sequence[complex], sys, t,
             tol_pair: float = TOL_PAIR, eps_real: float = EPS_REAL) -> list[ParticleState]:
    """Match x-roots to y-roots so each pair solves F1 = F2 = 0.

    The residual of a pair is accepted when it is below
    ``tol_pair * (1 + scale)``, scale being the summed magnitude of the
    monomials of F1 and F2 at that pair.
    """
    xv = np.array(xs.roots if isinstance(xs, RootSet) else xs, dtype=complex)
    yv = np.array(ys.roots if isinstance(ys, RootSet) else ys, dtype=complex)
    if len(xv) != len(yv):
        raise AssemblyFailure(f"{len(xv)} x-roots but {len(yv)} y-roots")
    n = len(xv)
    if n == 0:
        return []
    t = Fraction(t)
    res, scale = residual_matrix(xv, yv, sys, t)
    limit = tol_pair * (1 + scale)
    match = greedy_matching(res)
    idx = np.arange(n)
    if (res[idx, match] >= limit[idx, match]).any():
        match = optimal_matching(res)
    bad = np.where(res[idx, match] >= limit[idx, match])[0]
    if len(bad):
        i = int(bad[0])
        raise AssemblyFailure(
            f"no acceptable partner for x={xv[i]:.6g} at t={float(t):.6g}",
            pair=(complex(xv[i]), complex(yv[match[i]])),
            residual=float(res[i, match[i]]),
        )
    particles = []
    for i in range(n):
        x, y = complex(xv[i]), complex(yv[match[i]])
        real = abs(x.imag) < eps_real * (1 + abs(x)) and abs(y.imag) < eps_real * (1 + abs(y))
        if real:
            x, y = complex(x.real), complex(y.real)
        particles.append(ParticleState(i, x, y, "R" if real else "C", None, float(res[i, match[i]])))
    return link_partners(particles)


def link_partners(particles: list[ParticleState]) -> list[ParticleState]:
    """Fill conjugate_partner for C-members by optimal conjugate matching."""
    cs = [p for p in particles if p.kind == "C"]
    if not cs:
        return particles
    P = np.array([[p.x, p.y] for p in cs])
    cost = np.abs(P[:, None, 0] - np.conj(P[None, :, 0])) + np.abs(P[:, None, 1] - np.conj(P[None, :, 1]))
    np.fill_diagonal(cost, np.inf)
    cost = np.where(np.isfinite(cost), cost, 1e300)
    rows, cols = linear_sum_assignment(cost)
    partner = {cs[r].id: cs[c].id for r, c in zip(rows, cols)}
    return [replace(p, conjugate_partner=partner.get(p.id)) if p.kind == "C" else p for p in particles]


def c_particle_position(p: ParticleState, partner: ParticleState, tol: float = 1e-8) -> tuple[float, float]:
    """Common real parts of a conjugate pair of C-members."""
    if p.kind != "C" or partner.kind != "C":
        raise WorldlineError("both particles must be C-members")
    if p.conjugate_partner != partner.id or partner.conjugate_partner != p.id:
        raise WorldlineError(f"particles {p.id} and {partner.id} are not conjugate partners")
    if abs(p.x - partner.x.conjugate()) > tol * (1 + abs(p.x)) or \
            abs(p.y - partner.y.conjugate()) > tol * (1 + abs(p.y)):
        raise WorldlineError("positions are not complex conjugates")
    return (0.5 * (p.x.real + partner.x.real), 0.5 * (p.y.real + partner.y.real))
