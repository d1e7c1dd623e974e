from fractions import Fraction

import numpy as np
import pytest
from hypothesis import HealthCheck, assume, given, settings

from tests.strategies import structured_systems
from worldline.conservation import (ConservationReport, angular_momentum_numeric, audit, check_com_motion,
                                    check_energy, check_higher_sums, check_momentum, energy_constant,
                                    power_sums, radial_square_sum, vieta_ratio)
from worldline.elimination import eliminants, leading_forms_resultant
from worldline.errors import DegenerateSystem
from worldline.parser import make_system, parse_poly
from worldline.poly import MultiPoly
from worldline.roots import solve_at

P = parse_poly
SIX_LEAD = 358343


def test_vieta_ratios(nine_elims):
    Ry, Rx = nine_elims
    assert vieta_ratio(Ry, 1).is_zero()
    assert vieta_ratio(Ry, 2) == P("4*t - 4") * Fraction(-1, 17)
    assert vieta_ratio(Rx, 2) == P("33*t + 35") * Fraction(1, 17)
    assert vieta_ratio(Ry, 0) == MultiPoly.constant(1)


def test_power_sums(nine_elims):
    Ry, Rx = nine_elims
    px, py = power_sums(Ry, 2), power_sums(Rx, 2)
    assert px[0].poly == MultiPoly.constant(9)
    assert px[1].poly.is_zero() and py[1].poly.is_zero()
    assert px[2].poly == P("4*t - 4") * Fraction(2, 17)
    assert py[2].poly == P("33*t + 35") * Fraction(-2, 17)


def test_radial_sum(nine_elims, linear):
    assert radial_square_sum(nine_elims) == P("-58/17*t - 78/17")
    assert radial_square_sum(eliminants(linear)) == P("5*t^2")


def test_linear_cubes(linear):
    assert power_sums(eliminants(linear)[0], 3)[3].poly == P("t^3")


def test_com_motion(nine_elims, six_elims, linear):
    r = check_com_motion(nine_elims)
    assert r.verdict and r.expected == (0, 0)
    r = check_com_motion(six_elims)
    assert r.verdict and r.expected == (Fraction(-374447, SIX_LEAD), Fraction(145966, SIX_LEAD))
    assert r.detail["com_velocity"] == (Fraction(-374447, 6 * SIX_LEAD), Fraction(145966, 6 * SIX_LEAD))
    r = check_com_motion(eliminants(linear))
    assert r.expected == (1, 2) and r.detail["com_velocity"] == (1, 2)


def test_energy_constants(nine_elims, six_elims, linear):
    assert energy_constant(nine_elims).is_zero()
    assert energy_constant(six_elims) == MultiPoly.constant(Fraction(237989891909, SIX_LEAD ** 2))
    assert energy_constant(eliminants(linear)) == MultiPoly.constant(5)


def test_momentum_and_force_on_nine(nine_elims, nine_traj):
    mom, force = check_momentum(nine_traj, nine_elims)
    assert mom.verdict and mom.max_drift < 1e-8
    assert force.verdict and force.max_drift < 1e-6
    assert mom.expected == (0, 0)


def test_momentum_on_six(six_elims, six_traj):
    mom, force = check_momentum(six_traj, six_elims)
    assert mom.verdict and force.verdict
    assert mom.expected == (Fraction(-374447, SIX_LEAD), Fraction(145966, SIX_LEAD))


def test_energy_numeric(nine_elims, six_elims, nine_traj, six_traj):
    r = check_energy(nine_traj, nine_elims)
    assert r.verdict and r.expected == 0
    r = check_energy(six_traj, six_elims)
    assert r.verdict
    assert float(r.expected) == pytest.approx(1.85336, abs=1e-5)
    assert all(abs(v - float(r.expected)) < 1e-6 * (1 + float(r.expected)) for _, v in r.observed)


@pytest.mark.parametrize("I", [3, 6, 9])
def test_higher_sums_nine(nine_elims, nine_traj, I):
    r = check_higher_sums(nine_traj, nine_elims, I)
    assert r.verdict, r.max_drift
    assert power_sums(nine_elims[0], I)[I].poly.degree("t") <= I


def test_higher_sum_derivative_constant(linear):
    r = check_higher_sums([], eliminants(linear), 3)
    assert r.expected == (6, 48)


def test_angular_numeric(nine_traj, six_traj, nine_elims):
    r = angular_momentum_numeric(nine_traj, 0)
    assert r.verdict
    assert all(abs(m.real) < 1e-8 for _, m in r.observed)
    expected = Fraction(-827188, SIX_LEAD)
    r = angular_momentum_numeric(six_traj, expected)
    assert r.verdict and r.max_drift < 1e-6
    assert r.detail["max_imag"] < 1e-9


def test_angular_numeric_linear(linear):
    from worldline.dynamics import make_grid, track
    r = angular_momentum_numeric(track(linear, make_grid(0, 1, 5)), 0)
    assert r.verdict and r.max_drift < 1e-15


def test_audit_order_and_verdicts(six_elims, six_traj):
    reports = audit(six_traj, six_elims, higher=range(3, 7), angular_expected=Fraction(-827188, SIX_LEAD))
    assert [r.law for r in reports] == ["com_motion", "momentum", "force_sum", "energy", "power_sum_3",
                                        "power_sum_4", "power_sum_5", "power_sum_6", "angular_momentum"]
    assert all(r.verdict for r in reports)


def test_report_json():
    r = ConservationReport("energy", Fraction(1, 3), [], 0.0, 1e-6, True)
    assert r.to_json()["expected"] == {"exact": "1/3", "approx": pytest.approx(1 / 3)}
    assert r.to_json()["verdict"] == "pass"


def test_power_sums_match_numeric_roots(six_elims):
    for t in (Fraction(3), Fraction(11, 3), Fraction(5)):
        for e in six_elims:
            z = np.array(solve_at(e, t).roots)
            for ps in power_sums(e, 6):
                num = complex((z ** ps.order).sum())
                assert abs(num - float(ps.at(t))) <= 1e-6 * (1 + float((np.abs(z) ** ps.order).sum()))


def _rotated(sys, c, s):
    """F(c x - s y, s x + c y), expanded term by term."""
    x, y, t = MultiPoly.var("x"), MultiPoly.var("y"), MultiPoly.var("t")
    X, Y = c * x - s * y, s * x + c * y
    out = []
    for F in (sys.F1, sys.F2):
        G = MultiPoly.constant(0)
        for (i, j, k, _), coef in F.terms.items():
            G = G + X ** i * Y ** j * t ** k * coef
        out.append(G)
    return make_system(*out)


def test_energy_constant_is_rotation_invariant(six, six_elims):
    rot = _rotated(six, Fraction(3, 5), Fraction(4, 5))
    assert energy_constant(eliminants(rot)) == energy_constant(six_elims)


@settings(max_examples=15, deadline=None, suppress_health_check=[HealthCheck.too_slow, HealthCheck.filter_too_much])
@given(structured_systems(max_degree=3))
def test_random_rotation_invariance_and_degree_bounds(s):
    assume(not leading_forms_resultant(s).is_zero())
    try:
        elims = eliminants(s)
    except DegenerateSystem:
        assume(False)
    assert radial_square_sum(elims).degree("t") <= 2
    assert energy_constant(elims).is_constant()
    for e in elims:
        for ps in power_sums(e, e.degree):
            assert ps.poly.degree("t") <= ps.order
    rot = _rotated(s, Fraction(3, 5), Fraction(4, 5))
    assert energy_constant(eliminants(rot)) == energy_constant(elims)
