"""Exact conservation laws read off the eliminant coefficients, and numeric audits.

Vieta's formulas give the elementary symmetric functions of the N roots as
ratios of eliminant coefficients; Newton's identities turn them into power sums
A_I(t) = sum x_k^I and B_I(t) = sum y_k^I.  For structured systems A_I has
degree at most I in t, so its I-th derivative is a constant of motion.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

from worldline.elimination import Eliminant
from worldline.errors import WorldlineError
from worldline.poly import ZERO, MultiPoly

TOL_MOMENTUM = 1e-8
TOL_FORCE = 1e-6
TOL_ENERGY = 1e-6
TOL_HIGHER = 1e-6
TOL_ANGULAR = 1e-6
TOL_ANGULAR_IMAG = 1e-9


@dataclass(frozen=True)
class PowerSumPoly:
    order: int
    axis: str
    poly: MultiPoly

    def at(self, t) -> Fraction:
        return Fraction(self.poly.evaluate({"t": t}) if not self.poly.is_constant() else self.poly.constant_value())

    def derivative(self, k: int = 1) -> MultiPoly:
        p = self.poly
        for _ in range(k):
            p = p.differentiate("t")
        return p


@dataclass
class ConservationReport:
    law: str
    expected: object                 # exact value (Fraction or tuple of Fractions), None if none applies
    observed: list = field(default_factory=list)
    max_drift: float = 0.0
    tolerance: float = 0.0
    verdict: bool = True
    detail: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        return {
            "law": self.law,
            "expected": _exact_json(self.expected),
            "max_drift": self.max_drift,
            "tolerance": self.tolerance,
            "verdict": "pass" if self.verdict else "fail",
        }


def _exact_json(v):
    if v is None:
        return None
    if isinstance(v, (tuple, list)):
        return [_exact_json(u) for u in v]
    if isinstance(v, MultiPoly):
        return {"exact": str(v), "approx": None}
    f = Fraction(v)
    text = str(f.numerator) if f.denominator == 1 else f"{f.numerator}/{f.denominator}"
    return {"exact": text, "approx": float(f)}


def _const(p: MultiPoly):
    return p.constant_value() if p.is_constant() else None


def vieta_ratio(e: Eliminant, I: int) -> MultiPoly:
    """Elementary symmetric function e_I of the roots, (-1)^I f_{N-I} / f_N."""
    N = e.degree
    if not 0 <= I <= N:
        return ZERO if I > N else MultiPoly.constant(1)
    lead = e.leading
    num = e.coeffs[N - I] * (-1 if I % 2 else 1)
    if lead.is_constant():
        return num / lead.constant_value()
    try:
        return num.exact_div(lead)
    except ArithmeticError as exc:
        raise WorldlineError(f"leading coefficient {lead} does not divide f_{N - I}; power sums are rational in t") from exc


def power_sums(e: Eliminant, up_to: int) -> list[PowerSumPoly]:
    """Power sums p_0 .. p_up_to of the roots of one eliminant (Newton's identities)."""
    axis = e.var
    elem = [vieta_ratio(e, i) for i in range(min(up_to, e.degree) + 1)]
    p = [MultiPoly.constant(e.degree)]
    for k in range(1, up_to + 1):
        acc = ZERO
        for i in range(1, min(k, e.degree) + 1):
            term = elem[i] * (p[k - i] if i < k else MultiPoly.constant(k))
            acc = acc + term if i % 2 else acc - term
        p.append(acc)
    return [PowerSumPoly(k, axis, q) for k, q in enumerate(p)]


def radial_square_sum(elims: tuple[Eliminant, Eliminant]) -> MultiPoly:
    """sum x_k^2 + y_k^2 as a polynomial in t."""
    return power_sums(elims[0], 2)[2].poly + power_sums(elims[1], 2)[2].poly


def energy_constant(elims: tuple[Eliminant, Eliminant]) -> MultiPoly:
    """(A2'' + B2'') / 2, which equals sum v^2 + sum r.a for every t."""
    return radial_square_sum(elims).differentiate("t").differentiate("t") / 2


def momentum(elims: tuple[Eliminant, Eliminant]) -> tuple[MultiPoly, MultiPoly]:
    """Exact (sum v_x, sum v_y) = (A1', B1')."""
    return (power_sums(elims[0], 1)[1].derivative(), power_sums(elims[1], 1)[1].derivative())


def check_com_motion(elims: tuple[Eliminant, Eliminant]) -> ConservationReport:
    """Center of mass is linear in t when A1 and B1 have degree at most 1."""
    A1 = power_sums(elims[0], 1)[1].poly
    B1 = power_sums(elims[1], 1)[1].poly
    N = elims[0].degree
    uniform = A1.degree("t") <= 1 and B1.degree("t") <= 1
    P = (_const(A1.differentiate("t")), _const(B1.differentiate("t")))
    detail = {
        "A1": str(A1), "B1": str(B1),
        "total_momentum": P,
        "com_velocity": (P[0] / N, P[1] / N) if uniform else None,
        "com_at_0": (_poly_at(A1, 0) / N, _poly_at(B1, 0) / N),
    }
    return ConservationReport("com_motion", P if uniform else None, [], 0.0, 0.0, uniform, detail)


def _usable(samples) -> list:
    return [s for s in samples if s.velocities is not None and not s.near_event]


def _drift_report(law, expected, pairs, tol, relative=False, detail=None) -> ConservationReport:
    """pairs: (t, observed complex or tuple, expected value at t)."""
    worst = 0.0
    observed = []
    for t, obs, exp in pairs:
        obs_t = obs if isinstance(obs, tuple) else (obs,)
        exp_t = exp if isinstance(exp, tuple) else (exp,)
        d = max(abs(o - float(e)) for o, e in zip(obs_t, exp_t))
        if relative:
            d /= 1 + max(abs(float(e)) for e in exp_t)
        worst = max(worst, d)
        observed.append((float(t), obs))
    return ConservationReport(law, expected, observed, worst, tol, bool(worst <= tol) and bool(pairs), detail or {})


def _poly_at(p: MultiPoly, t) -> Fraction:
    return Fraction(p.constant_value() if p.is_constant() else p.evaluate({"t": t}))


def check_momentum(samples, elims, tol: float = TOL_MOMENTUM,
                   tol_force: float = TOL_FORCE) -> tuple[ConservationReport, ConservationReport]:
    """Sum of velocities against (A1', B1') and sum of accelerations against (A1'', B1'')."""
    Px, Py = momentum(elims)
    Fx, Fy = Px.differentiate("t"), Py.differentiate("t")
    mom, force = [], []
    for s in _usable(samples):
        v = np.array(s.velocities)
        a = np.array(s.accelerations)
        mom.append((s.t, (complex(v[:, 0].sum()), complex(v[:, 1].sum())), (_poly_at(Px, s.t), _poly_at(Py, s.t))))
        force.append((s.t, (complex(a[:, 0].sum()), complex(a[:, 1].sum())), (_poly_at(Fx, s.t), _poly_at(Fy, s.t))))
    exp_m = (_const(Px), _const(Py)) if Px.is_constant() and Py.is_constant() else (Px, Py)
    exp_f = (_const(Fx), _const(Fy)) if Fx.is_constant() and Fy.is_constant() else (Fx, Fy)
    return (_drift_report("momentum", exp_m, mom, tol), _drift_report("force_sum", exp_f, force, tol_force))


def energy_numeric(sample) -> complex:
    total = 0j
    for p, (vx, vy), (ax, ay) in zip(sample.particles, sample.velocities, sample.accelerations):
        total += vx * vx + vy * vy + p.x * ax + p.y * ay
    return total


def check_energy(samples, elims, tol: float = TOL_ENERGY) -> ConservationReport:
    c = energy_constant(elims)
    pairs = [(s.t, energy_numeric(s), _poly_at(c, s.t)) for s in _usable(samples)]
    expected = _const(c) if c.is_constant() else c
    return _drift_report("energy", expected, pairs, tol, relative=True)


def check_higher_sums(samples, elims, I: int, tol: float = TOL_HIGHER) -> ConservationReport:
    """Numeric sum x^I, sum y^I against A_I(t), B_I(t); scale includes the summed magnitudes."""
    A = power_sums(elims[0], I)[I]
    B = power_sums(elims[1], I)[I]
    worst = 0.0
    observed = []
    for s in samples:
        x = np.array([p.x for p in s.particles])
        y = np.array([p.y for p in s.particles])
        sx, sy = complex((x ** I).sum()), complex((y ** I).sum())
        ex, ey = float(A.at(s.t)), float(B.at(s.t))
        d = max(abs(sx - ex) / (1 + float(np.abs(x).__pow__(I).sum())),
                abs(sy - ey) / (1 + float(np.abs(y).__pow__(I).sum())))
        worst = max(worst, d)
        observed.append((float(s.t), (sx, sy)))
    dA, dB = A.derivative(I), B.derivative(I)
    structured = A.poly.degree("t") <= I and B.poly.degree("t") <= I
    expected = (_const(dA), _const(dB)) if structured else None
    detail = {"A": str(A.poly), "B": str(B.poly), "constant_derivative": structured}
    return ConservationReport(f"power_sum_{I}", expected, observed, worst, tol,
                              bool(worst <= tol) and bool(samples), detail)


def angular_momentum_numeric(samples, expected=None, tol: float = TOL_ANGULAR,
                             tol_imag: float = TOL_ANGULAR_IMAG) -> ConservationReport:
    """M_z = sum x v_y - y v_x per sample; imaginary parts must cancel."""
    values = []
    worst_imag = 0.0
    for s in _usable(samples):
        m = 0j
        scale = 0.0
        for p, (vx, vy) in zip(s.particles, s.velocities):
            term = p.x * vy - p.y * vx
            m += term
            scale += abs(term)
        worst_imag = max(worst_imag, abs(m.imag) / (1 + scale))
        values.append((float(s.t), m))
    if not values:
        return ConservationReport("angular_momentum", expected, [], math.inf, tol, False, {})
    re = np.array([v.real for _, v in values])
    ref = float(expected) if expected is not None else float(np.median(re))
    drift = float(np.max(np.abs(re - ref))) / (1 + abs(ref))
    ok = drift <= tol and worst_imag <= tol_imag
    detail = {"max_imag": worst_imag, "spread": float(re.max() - re.min()), "reference": ref}
    return ConservationReport("angular_momentum", expected, values, drift, tol, bool(ok), detail)


def audit(samples, elims, higher: Sequence[int] = (3,), angular_expected=None,
          tols: dict | None = None) -> list[ConservationReport]:
    """Every numeric check in a fixed order."""
    tols = tols or {}
    reports = [check_com_motion(elims)]
    reports.extend(check_momentum(samples, elims, tols.get("tol_momentum", TOL_MOMENTUM),
                                  tols.get("tol_force", TOL_FORCE)))
    reports.append(check_energy(samples, elims, tols.get("tol_energy", TOL_ENERGY)))
    for I in higher:
        reports.append(check_higher_sums(samples, elims, I, tols.get("tol_higher", TOL_HIGHER)))
    reports.append(angular_momentum_numeric(samples, angular_expected, tols.get("tol_angular", TOL_ANGULAR)))
    return reports
