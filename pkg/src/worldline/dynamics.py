"""Time sweep of the particle ensemble.

Positions always come from fresh root solves; identities are carried from one
sample to the next by matching against predicted positions.  Velocities and
accelerations follow from implicit differentiation of the eliminants,

    v = -R_t / R_u,    a = -(R_uu v^2 + 2 R_ut v + R_tt) / R_u,

where u is the eliminant's main variable.  Events are located exactly from the
real roots of the common discriminant factor D(t).
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np
from scipy.optimize import linear_sum_assignment

from worldline import upoly
from worldline.assembly import TOL_PAIR, ParticleState, assemble, link_partners
from worldline.elimination import (Eliminant, common_factor_D, discriminant, eliminants,
                                   isolate_real_roots)
from worldline.errors import AssemblyFailure, NearEvent
from worldline.poly import UniPolyInT, as_rational, evaluate_complex
from worldline.roots import EPS_CLUSTER, EPS_CONJ, EPS_REAL, TOL_ROOT, RootSet, solve_at

log = logging.getLogger(__name__)

EPS_DERIV = 1e-10
DELTA_EVT = 1e-6
MIN_STEP_HALVINGS = 12
REFINE_WIDTH = Fraction(1, 10 ** 12)


@dataclass(frozen=True)
class TrajectorySample:
    t: Fraction
    particles: tuple[ParticleState, ...]
    velocities: tuple[tuple[complex, complex], ...] | None
    accelerations: tuple[tuple[complex, complex], ...] | None
    near_event: bool = False
    ambiguous: bool = False

    @property
    def flagged(self) -> bool:
        return self.near_event

    def positions(self) -> tuple[np.ndarray, np.ndarray]:
        return (np.array([p.x for p in self.particles]), np.array([p.y for p in self.particles]))


@dataclass(frozen=True)
class Event:
    t_star: tuple[Fraction, Fraction]
    kind: str                       # "creation", "annihilation" or "touching"
    count_change: int
    real_counts: tuple[int, int]
    location: tuple[float, float] | None
    involved_ids: tuple[int, ...] = field(default=())

    @property
    def t_approx(self) -> float:
        return float((self.t_star[0] + self.t_star[1]) / 2)


class _Derivs:
    """Partial derivatives of one eliminant, evaluated in floating point at a fixed t."""

    def __init__(self, e: Eliminant | UniPolyInT):
        u = e.poly if isinstance(e, Eliminant) else e
        self.var = u.var
        self.R = u
        self.Ru = u.differentiate(u.var)
        self.Rt = u.differentiate("t")
        self.Ruu = self.Ru.differentiate(u.var)
        self.Rut = self.Ru.differentiate("t")
        self.Rtt = self.Rt.differentiate("t")

    @staticmethod
    def _eval(u: UniPolyInT, t, z: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        if u.degree < 0:
            return np.zeros(z.shape, dtype=complex), np.zeros(z.shape)
        c = np.array(evaluate_complex(u, t)[::-1], dtype=complex)
        val = np.full(z.shape, c[0], dtype=complex)
        scale = np.full(z.shape, abs(c[0]))
        r = np.abs(z)
        for a in c[1:]:
            val = val * z + a
            scale = scale * r + abs(a)
        return val, scale

    def kinematics(self, t, z: np.ndarray, eps_deriv: float = EPS_DERIV,
                   accel: bool = True) -> tuple[np.ndarray, np.ndarray | None]:
        ru, su = self._eval(self.Ru, t, z)
        small = np.abs(ru) <= eps_deriv * np.maximum(su, 1e-300)
        if small.any():
            raise NearEvent(f"d{self.R.var} derivative vanishes at t={float(t):.12g} (multiple root)")
        rt, _ = self._eval(self.Rt, t, z)
        v = -rt / ru
        if not accel:
            return v, None
        ruu, _ = self._eval(self.Ruu, t, z)
        rut, _ = self._eval(self.Rut, t, z)
        rtt, _ = self._eval(self.Rtt, t, z)
        a = -(ruu * v * v + 2 * rut * v + rtt) / ru
        return v, a


def velocity(R_y: Eliminant, R_x: Eliminant, p: ParticleState, t, eps_deriv: float = EPS_DERIV):
    """(v_x, v_y) of one particle."""
    t = as_rational(t)
    vx, _ = _Derivs(R_y).kinematics(t, np.array([p.x]), eps_deriv, accel=False)
    vy, _ = _Derivs(R_x).kinematics(t, np.array([p.y]), eps_deriv, accel=False)
    return complex(vx[0]), complex(vy[0])


def acceleration(R_y: Eliminant, R_x: Eliminant, p: ParticleState, t, eps_deriv: float = EPS_DERIV):
    """(a_x, a_y) of one particle."""
    t = as_rational(t)
    _, ax = _Derivs(R_y).kinematics(t, np.array([p.x]), eps_deriv)
    _, ay = _Derivs(R_x).kinematics(t, np.array([p.y]), eps_deriv)
    return complex(ax[0]), complex(ay[0])


def make_grid(t_start, t_end, steps: int) -> list[Fraction]:
    """``steps`` equally spaced rational times from t_start to t_end inclusive."""
    a, b = Fraction(as_rational(t_start)), Fraction(as_rational(t_end))
    if steps < 2:
        raise ValueError("steps must be at least 2")
    if not a < b:
        raise ValueError("t_start must be below t_end")
    h = (b - a) / (steps - 1)
    return [a + k * h for k in range(steps)]


# events ---------------------------------------------------------------------

def event_polynomial(elims: tuple[Eliminant, Eliminant]):
    """D(t) and the two discriminants it divides."""
    d1 = discriminant(elims[0])
    d2 = discriminant(elims[1])
    return common_factor_D(d1, d2), d1, d2


def real_root_count(e: Eliminant, t) -> int:
    """Exact number of distinct real roots of the eliminant at rational t."""
    coeffs = e.poly.at(t)
    return upoly.count_real_roots(upoly.strip(coeffs))


def detect_events(sys, t_range: tuple, elims: tuple[Eliminant, Eliminant] | None = None,
                  samples: Sequence[TrajectorySample] | None = None,
                  refine_width=REFINE_WIDTH, tols: dict | None = None) -> list[Event]:
    """One event per real root of D(t) inside ``t_range``."""
    tols = tols or {}
    elims = elims or eliminants(sys)
    D, d1, _ = event_polynomial(elims)
    Dp = upoly.from_multipoly(D)
    if len(Dp) <= 1:
        return []
    guard = upoly.squarefree_part(upoly.from_multipoly(d1))
    guard_seq = upoly.sturm_sequence(guard)
    lo, hi = (as_rational(t_range[0]), as_rational(t_range[1]))
    events = []
    for a, b in isolate_real_roots(D, (lo, hi)):
        a, b = upoly.refine_root(Dp, (a, b), refine_width)
        # widen until the window is clean of every other discriminant root
        w = Fraction(refine_width)
        while True:
            left, right = a - w, b + w
            if upoly.count_real_roots(guard, left, right, guard_seq) == 1 and \
                    upoly.evaluate(guard, left) != 0:
                break
            w /= 2
            if b - a > w:
                a, b = upoly.refine_root(Dp, (a, b), w)
        n_left = real_root_count(elims[0], left)
        n_right = real_root_count(elims[0], right)
        change = n_right - n_left
        kind = "creation" if change > 0 else "annihilation" if change < 0 else "touching"
        location = _collision_location(sys, elims, (a + b) / 2, tols)
        events.append(Event((a, b), kind, change, (n_left, n_right), location))
    if samples:
        events = [_attach_ids(ev, samples) for ev in events]
    return events


def _collision_location(sys, elims, t, tols) -> tuple[float, float] | None:
    try:
        xs = solve_at(elims[0], t)
        ys = solve_at(elims[1], t)
        parts = assemble(xs, ys, sys, t, tol_pair=tols.get("tol_pair", TOL_PAIR) * 1e3)
    except Exception as exc:  # location is diagnostic only
        log.debug("no collision location at t=%s: %s", t, exc)
        return None
    best = None
    for i in range(len(parts)):
        for j in range(i + 1, len(parts)):
            d = abs(parts[i].x - parts[j].x) + abs(parts[i].y - parts[j].y)
            if best is None or d < best[0]:
                best = (d, i, j)
    if best is None:
        return None
    _, i, j = best
    return (0.5 * (parts[i].x + parts[j].x).real, 0.5 * (parts[i].y + parts[j].y).real)


def _attach_ids(ev: Event, samples: Sequence[TrajectorySample]) -> Event:
    if ev.location is None:
        return ev
    ts = np.array([float(s.t) for s in samples])
    s = samples[int(np.argmin(np.abs(ts - ev.t_approx)))]
    lx, ly = ev.location
    d = [abs(p.x - lx) + abs(p.y - ly) for p in s.particles]
    order = np.argsort(d, kind="stable")[:2]
    return Event(ev.t_star, ev.kind, ev.count_change, ev.real_counts, ev.location,
                 tuple(sorted(int(s.particles[k].id) for k in order)))


def in_event_zone(t, events: Sequence[Event], delta=DELTA_EVT) -> bool:
    t = float(t)
    return any(float(ev.t_star[0]) - delta <= t <= float(ev.t_star[1]) + delta for ev in events)


# tracking -------------------------------------------------------------------

@dataclass
class _State:
    t: Fraction
    x: np.ndarray
    y: np.ndarray
    res: np.ndarray
    kind: list
    vx: np.ndarray | None
    vy: np.ndarray | None
    ax: np.ndarray | None
    ay: np.ndarray | None
    xs: RootSet
    ys: RootSet


class Tracker:
    """Sweeps a time grid for one system, reusing the eliminants and derivative tables."""

    def __init__(self, sys, elims: tuple[Eliminant, Eliminant] | None = None, tols: dict | None = None):
        self.sys = sys
        self.elims = elims or eliminants(sys)
        self.dx = _Derivs(self.elims[0])
        self.dy = _Derivs(self.elims[1])
        tols = dict(tols or {})
        self.root_tols = {
            "tol_root": tols.get("tol_root", TOL_ROOT),
            "eps_real": tols.get("eps_real", EPS_REAL),
            "eps_conj": tols.get("eps_conj", EPS_CONJ),
            "eps_cluster": tols.get("eps_cluster", EPS_CLUSTER),
        }
        self.tol_pair = tols.get("tol_pair", TOL_PAIR)
        self.eps_deriv = tols.get("eps_deriv", EPS_DERIV)
        self.delta_evt = tols.get("delta_evt", DELTA_EVT)
        self.min_halvings = int(tols.get("min_step_halvings", MIN_STEP_HALVINGS))
        self.tols = tols

    def _solve(self, t: Fraction, prev: _State | None, with_kinematics: bool) -> _State:
        xs = solve_at(self.elims[0], t, prev.xs if prev else None, **self.root_tols)
        ys = solve_at(self.elims[1], t, prev.ys if prev else None, **self.root_tols)
        parts = assemble(xs, ys, self.sys, t, self.tol_pair, self.root_tols["eps_real"])
        x = np.array([p.x for p in parts])
        y = np.array([p.y for p in parts])
        state = _State(t, x, y, np.array([p.residual for p in parts]), [p.kind for p in parts],
                       None, None, None, None, xs, ys)
        if with_kinematics:
            try:
                state.vx, state.ax = self.dx.kinematics(t, x, self.eps_deriv)
                state.vy, state.ay = self.dy.kinematics(t, y, self.eps_deriv)
            except NearEvent as exc:
                log.debug("%s", exc)
                state.vx = state.vy = state.ax = state.ay = None
        return state

    def _match(self, prev: _State, new: _State) -> tuple[np.ndarray, bool]:
        dt = float(new.t - prev.t)
        px, py = prev.x, prev.y
        if prev.vx is not None:
            px = px + prev.vx * dt
            py = py + prev.vy * dt
        cost = np.abs(px[:, None] - new.x[None, :]) ** 2 + np.abs(py[:, None] - new.y[None, :]) ** 2
        rows, cols = linear_sum_assignment(cost)
        d = np.sqrt(cost)
        confident = True
        eps = self.root_tols["eps_cluster"]
        for r, c in zip(rows, cols):
            others = np.delete(d[r], c)
            if len(others) == 0:
                continue
            second = others.min()
            scale = 1 + abs(px[r]) + abs(py[r])
            if second < eps * scale or d[r, c] > 0.5 * second:
                confident = False
        perm = np.empty(len(rows), dtype=int)
        perm[rows] = cols
        return perm, confident

    def _reorder(self, s: _State, perm: np.ndarray) -> _State:
        def take(a):
            return None if a is None else a[perm]
        return _State(s.t, s.x[perm], s.y[perm], s.res[perm], [s.kind[i] for i in perm],
                      take(s.vx), take(s.vy), take(s.ax), take(s.ay), s.xs, s.ys)

    def _advance(self, prev: _State, t: Fraction, flagged: bool, depth: int = 0) -> tuple[_State, bool]:
        new = self._solve(t, prev, with_kinematics=not flagged or depth > 0)
        perm, confident = self._match(prev, new)
        if confident or flagged or depth >= self.min_halvings:
            return self._reorder(new, perm), not confident
        mid = (prev.t + t) / 2
        half, amb1 = self._advance(prev, mid, False, depth + 1)
        if half.vx is None:
            half = self._solve_kin(half)
        final, amb2 = self._advance(half, t, flagged, depth + 1)
        return final, amb1 or amb2

    def _solve_kin(self, s: _State) -> _State:
        try:
            s.vx, s.ax = self.dx.kinematics(s.t, s.x, self.eps_deriv)
            s.vy, s.ay = self.dy.kinematics(s.t, s.y, self.eps_deriv)
        except NearEvent:
            pass
        return s

    def track(self, grid: Sequence, events: Sequence[Event] | None = None) -> list[TrajectorySample]:
        grid = [Fraction(as_rational(t)) for t in grid]
        if events is None:
            events = detect_events(self.sys, (grid[0], grid[-1]), self.elims, tols=self.tols)
        samples = []
        prev: _State | None = None
        for t in grid:
            flagged = in_event_zone(t, events, self.delta_evt)
            if prev is None:
                state = self._solve(t, None, with_kinematics=not flagged)
                order = np.lexsort((state.y.imag, state.y.real, state.x.imag, state.x.real))
                state = self._reorder(state, order)
                ambiguous = False
            else:
                state, ambiguous = self._advance(prev, t, flagged)
            if not flagged and state.vx is None:
                state = self._solve_kin(state)
            samples.append(self._sample(state, flagged or state.vx is None, ambiguous))
            prev = state
        return samples

    def _sample(self, s: _State, flagged: bool, ambiguous: bool) -> TrajectorySample:
        parts = [ParticleState(i, complex(s.x[i]), complex(s.y[i]), s.kind[i], None, float(s.res[i]))
                 for i in range(len(s.x))]
        parts = link_partners(parts)
        if flagged or s.vx is None:
            vel = acc = None
        else:
            vel = tuple((complex(a), complex(b)) for a, b in zip(s.vx, s.vy))
            acc = tuple((complex(a), complex(b)) for a, b in zip(s.ax, s.ay))
        return TrajectorySample(s.t, tuple(parts), vel, acc, flagged, ambiguous)


def track(sys, grid: Sequence, elims: tuple[Eliminant, Eliminant] | None = None,
          events: Sequence[Event] | None = None, tols: dict | None = None) -> list[TrajectorySample]:
    """Trajectory samples with persistent particle ids on the given time grid."""
    return Tracker(sys, elims, tols).track(grid, events)


__all__ = [
    "TrajectorySample", "Event", "velocity", "acceleration", "track", "detect_events",
    "make_grid", "Tracker", "real_root_count", "event_polynomial", "in_event_zone",
    "AssemblyFailure",
]
