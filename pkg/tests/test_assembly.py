import itertools
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from worldline.assembly import (ParticleState, assemble, c_particle_position, link_partners,
                                residual_matrix)
from worldline.errors import AssemblyFailure, WorldlineError
from worldline.parser import make_system, parse_poly
from worldline.roots import solve_at


def _pairs(parts):
    return sorted((round(p.x.real, 9), round(p.x.imag, 9), round(p.y.real, 9), round(p.y.imag, 9)) for p in parts)


def test_linear_system_at_three(linear):
    (p,) = assemble([3], [6], linear, 3)
    assert (p.x, p.y, p.kind) == (3, 6, "R")


def test_mismatched_counts(linear):
    with pytest.raises(AssemblyFailure):
        assemble([1, 2], [1], linear, 0)


def test_no_partner(linear):
    with pytest.raises(AssemblyFailure):
        assemble([3], [5], linear, 3)


def test_nine_root_example_at_zero(nine, nine_elims):
    xs = solve_at(nine_elims[0], 0)
    ys = solve_at(nine_elims[1], 0)
    parts = assemble(xs, ys, nine, 0)
    for p in parts:
        res, _ = residual_matrix([p.x], [p.y], nine, 0)
        assert res[0, 0] < 1e-8
    # x = 1 and y = 1 are both roots, but (1, 1) does not solve the system
    assert not any(abs(p.x - 1) < 1e-9 and abs(p.y - 1) < 1e-9 for p in parts)


def test_partners_are_conjugates(six, six_elims):
    t = Fraction(9, 2)
    parts = assemble(solve_at(six_elims[0], t), solve_at(six_elims[1], t), six, t)
    cs = [p for p in parts if p.kind == "C"]
    assert cs and len(cs) % 2 == 0
    for p in cs:
        q = parts[p.conjugate_partner]
        assert abs(p.x - q.x.conjugate()) < 1e-8 and abs(p.y - q.y.conjugate()) < 1e-8
        x, y = c_particle_position(p, q)
        assert (x, y) == pytest.approx((p.x.real, p.y.real), abs=1e-8)


def test_c_particle_position_errors():
    r = ParticleState(0, 1, 1, "R", None, 0.0)
    a = ParticleState(1, 1 + 1j, 2 - 1j, "C", 2, 0.0)
    b = ParticleState(2, 1 - 1j, 2 + 1j, "C", 1, 0.0)
    c = ParticleState(3, 5 - 1j, 2 + 1j, "C", None, 0.0)
    assert c_particle_position(a, b) == (1.0, 2.0)
    with pytest.raises(WorldlineError):
        c_particle_position(r, a)
    with pytest.raises(WorldlineError):
        c_particle_position(a, c)
    a2 = ParticleState(1, 1 + 1j, 2 - 1j, "C", 3, 0.0)
    c2 = ParticleState(3, 5 - 1j, 2 + 1j, "C", 1, 0.0)
    with pytest.raises(WorldlineError):
        c_particle_position(a2, c2)


def test_link_partners():
    ps = [ParticleState(0, 1j, 0j, "C", None, 0), ParticleState(1, 2.0, 0j, "R", None, 0),
          ParticleState(2, -1j, 0j, "C", None, 0)]
    out = link_partners(ps)
    assert out[0].conjugate_partner == 2 and out[2].conjugate_partner == 0
    assert out[1].conjugate_partner is None


@st.composite
def point_sets(draw):
    n = draw(st.integers(1, 5))
    pts = draw(st.lists(st.tuples(st.integers(-5, 5), st.integers(-5, 5)), min_size=n, max_size=n,
                        unique_by=(lambda p: p[0], lambda p: p[1])))
    return pts


@settings(max_examples=40, deadline=None)
@given(point_sets())
def test_matches_brute_force(pts):
    # solutions (a_k, b_k): F1 = prod (x - a_k), F2 = y - L(x) with L the interpolant
    x, y = parse_poly("x"), parse_poly("y")
    F1 = parse_poly("1")
    for a, _ in pts:
        F1 = F1 * (x - a)
    L = parse_poly("0")
    for i, (a, b) in enumerate(pts):
        term = parse_poly(str(b))
        for j, (c, _) in enumerate(pts):
            if j != i:
                term = term * (x - c) / (a - c)
        L = L + term
    sys = make_system(F1, y - L)
    xs = [complex(a) for a, _ in pts]
    ys = [complex(b) for _, b in pts][::-1]
    parts = assemble(xs, ys, sys, 0)
    res, _ = residual_matrix(xs, ys, sys, 0)
    best = min(itertools.permutations(range(len(pts))),
               key=lambda perm: sum(res[i, perm[i]] for i in range(len(pts))))
    assert _pairs(parts) == _pairs([ParticleState(i, xs[i], ys[best[i]], "R", None, 0) for i in range(len(pts))])
    assert sorted((p.x.real, p.y.real) for p in parts) == sorted(map(lambda p: (float(p[0]), float(p[1])), pts))
