"""Hypothesis strategies for small exact polynomials."""

from fractions import Fraction

from hypothesis import assume
from hypothesis import strategies as st

from worldline.errors import ConfigError
from worldline.parser import make_system
from worldline.poly import MultiPoly

small_rationals = st.builds(Fraction, st.integers(-9, 9), st.integers(1, 4))
exponents = st.tuples(st.integers(0, 3), st.integers(0, 2), st.integers(0, 2), st.integers(0, 1))


@st.composite
def polys(draw, max_terms=5, exps=exponents):
    terms = draw(st.dictionaries(exps, small_rationals, max_size=max_terms))
    return MultiPoly.from_exponents(terms)


def univariate(var, max_degree=3, min_degree=1):
    """Nonzero polynomial in one variable with integer coefficients and exact degree."""
    return st.integers(min_degree, max_degree).flatmap(
        lambda d: st.lists(st.integers(-5, 5), min_size=d, max_size=d).flatmap(
            lambda low: st.integers(1, 4).map(lambda lead: MultiPoly.from_univariate(low + [lead], var))
        )
    )


def _structured(draw, d):
    """Random F of (x, y)-degree d whose degree-(d - I) part has t-degree <= I."""
    F = MultiPoly.constant(0)
    for k in range(d + 1):
        for i in range(k + 1):
            coeff = MultiPoly.from_univariate(
                draw(st.lists(st.integers(-3, 3), min_size=d - k + 1, max_size=d - k + 1)), "t")
            F = F + coeff * MultiPoly.var("x") ** i * MultiPoly.var("y") ** (k - i)
    return F


@st.composite
def structured_systems(draw, max_degree=4):
    """Pairs with deg_t of the degree-(d - I) part at most I; n * m kept moderate."""
    n = draw(st.integers(1, max_degree))
    m = draw(st.integers(1, max_degree if n < 4 else 2))
    try:
        return make_system(_structured(draw, n), _structured(draw, m))
    except ConfigError:
        assume(False)
