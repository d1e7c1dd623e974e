from fractions import Fraction

import numpy as np
import pytest

from worldline.angular import (angular_momentum_exact, eliminated_at, linear_relation, norm_polynomial,
                               numeric_momenta, phi_polynomial)
from worldline.elimination import eliminants
from worldline.errors import PipelineFailure
from worldline.parser import make_system, parse_poly
from worldline.poly import MultiPoly

P = parse_poly
SIX_LEAD = 358343


def test_phi_of_linear_motion(linear):
    phi = phi_polynomial(eliminants(linear))
    # eliminant signs fix only the overall sign
    assert phi in (P("M - 2*x + y"), P("2*x - y - M"))


def test_linear_pipeline(linear):
    r = angular_momentum_exact(linear, e_times=(2, Fraction(1, 3)))
    assert r.degree == 1
    assert r.G == MultiPoly.var("M")
    assert r.total == 0
    assert all(s.divides for s in r.E_samples)


def test_linear_relation_on_the_solution_set(six):
    a, b = linear_relation(six.F1, six.F2)
    assert a.degree("y") <= 0 and b.degree("y") <= 0
    assert not a.is_zero()


def test_linear_relation_needs_y():
    with pytest.raises(PipelineFailure):
        linear_relation(P("x - t"), P("x^2 - y^2 + 1"))


def test_nine_root_total_is_zero(nine, nine_elims):
    r = angular_momentum_exact(nine, nine_elims, e_times=())
    assert r.total == 0
    assert r.degree == 9
    assert r.A_over_D == Fraction(-1769472, 17)


def test_six_root_pipeline_without_E(six, six_elims):
    r = angular_momentum_exact(six, six_elims, e_times=())
    assert r.total == Fraction(-827188, SIX_LEAD)
    assert r.degree == 6
    assert r.alpha_has_fN_factor and r.A_over_D is not None
    # alpha = 358343 A, beta = 827188 A
    assert r.beta * SIX_LEAD == r.alpha * 827188
    assert r.numeric_mismatch < 1e-8


def test_roots_of_G_are_particle_momenta(six, six_elims):
    r = angular_momentum_exact(six, six_elims, e_times=())
    t = Fraction(7, 2)
    g = [c.evaluate({"t": t}) if not c.is_constant() else c.constant_value() for c in r.G.coefficients("M")]
    roots = np.sort_complex(np.roots([float(c) for c in reversed(g)]))
    mk = np.sort_complex(numeric_momenta(six, six_elims, t))
    assert np.max(np.abs(roots - mk)) < 1e-8 * (1 + np.max(np.abs(mk)))


def test_norm_is_monic_in_M_up_to_t(linear):
    elims = eliminants(linear)
    G = norm_polynomial(linear, elims, phi_polynomial(elims))
    assert G.degree("M") == 1


def test_eliminated_polynomial_of_linear_motion(linear):
    E = eliminated_at(linear, phi_polynomial(eliminants(linear)), 3)
    # a single particle at (3, 6) moving with (1, 2): M = 3*2 - 6*1 = 0
    assert [c for c in E if c != 0] and E[0] == 0


@pytest.mark.slow
def test_nine_root_eliminated_polynomial_splits(nine, nine_elims):
    r = angular_momentum_exact(nine, nine_elims, e_times=(2,))
    (s,) = r.E_samples
    assert (s.degree, s.factor_degree, s.quotient_degree, s.divides) == (174, 9, 165, True)
