from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from heightlab.arith.cyclotomic import sqrt_rational
from heightlab.arith.quadratic import QuadraticNumber
from heightlab.corpus import load_corpus
from heightlab.curves.weierstrass import WeierstrassCurve
from heightlab.errors import DuplicatePoints, PreconditionError
from heightlab.heights.doubling import canonical_height_doubling
from heightlab.heights.local import (
    archimedean_places,
    canonical_height_local_sum,
    lambda_arch,
    lambda_arch_lattice,
    lambda_nonarch_coefficient,
)
from heightlab.heights.parallelogram import pairwise_average_bound, parallelogram_residual

E37 = WeierstrassCurve.from_ainvs([0, 0, 1, -1, 0])
G37 = E37.point(0, 0)
E389 = WeierstrassCurve.from_ainvs([0, 1, 1, -2, 0])
TOL = 1e-12


def h(E, P):
    return canonical_height_doubling(E, P, 96, 1e-20)


def test_lmfdb_height_37a():
    # LMFDB prints twice our normalization
    assert abs(h(E37, G37).value - 0.0511114082399688 / 2) < TOL


def test_lmfdb_regulator_389a():
    P, Q = E389.point(-1, 1), E389.point(0, 0)
    hp, hq, hs = h(E389, P).value, h(E389, Q).value, h(E389, E389.add(P, Q)).value
    pair = (hs - hp - hq) / 2
    reg = 4 * (hp * hq - pair * pair)
    assert abs(reg - 0.152460177943144) < 1e-12


@pytest.mark.parametrize("ainvs,pt", [([0, -1, 1, -10, -20], (5, 5)), ([0, 0, 0, 0, 1], (2, 3)), ([0, 0, 0, -1, 0], (0, 0))])
def test_torsion_has_height_zero(ainvs, pt):
    E = WeierstrassCurve.from_ainvs(ainvs)
    assert h(E, E.point(*pt)).contains_zero()


@settings(max_examples=8, deadline=None)
@given(st.integers(1, 4), st.sampled_from([2, 3]))
def test_quadratic_scaling(k, n):
    P = E37.scalar_mul(k, G37)
    assert abs(h(E37, E37.scalar_mul(n, P)).value - n * n * h(E37, P).value) < 1e-10


def test_local_sum_matches_doubling_on_389a():
    for P in (E389.point(-1, 1), E389.point(0, 0), E389.add(E389.point(-1, 1), E389.point(0, 0))):
        assert abs(canonical_height_local_sum(E389, P).total.value - h(E389, P).value) < 1e-10


def test_archimedean_lambda_is_even():
    for entry in load_corpus():
        for P in entry.points:
            if P.is_infinity or 2 * P.y + entry.curve.a1 * P.x + entry.curve.a3 == 0:
                continue
            a = lambda_arch(entry.curve, None, P).value
            b = lambda_arch(entry.curve, None, entry.curve.neg(P)).value
            assert abs(a - b) < 1e-12


def test_lattice_lambda_symmetry_and_origin():
    place = archimedean_places("Q")[0]
    a = lambda_arch_lattice(E37, place, Fraction(1, 5), Fraction(2, 7)).value
    b = lambda_arch_lattice(E37, place, Fraction(-1, 5), Fraction(-2, 7)).value
    assert abs(a - b) < 1e-12
    with pytest.raises(PreconditionError):
        lambda_arch_lattice(E37, place, 0, 1)


def test_nonarchimedean_coefficients():
    # 5G = (1/4, -5/8) lies in the kernel of reduction at 2
    assert lambda_nonarch_coefficient(E37, E37.scalar_mul(5, G37), 2) == 1
    # integral point on the identity component: only the discriminant term
    assert lambda_nonarch_coefficient(E37, G37, 37) == Fraction(1, 12)
    assert lambda_nonarch_coefficient(E37, G37, 5) == 0


def test_quadratic_point_heights_agree():
    # (2, sqrt 6) on y^2 = x^3 - x, once as a quadratic and once as a cyclotomic point
    E = WeierstrassCurve.from_ainvs([0, 0, 0, -1, 0])
    Pq = E.point(QuadraticNumber(2, 0, 6), QuadraticNumber(0, 1, 6))
    s6 = sqrt_rational(6)
    Pc = E.point(s6 * 0 + 2, s6)  # x as an element of the same field
    hq, hc = h(E, Pq), h(E, Pc)
    assert hq.value > 0 and abs(hq.value - hc.value) < 1e-10


def test_parallelogram_residual_contains_zero():
    P, Q = E389.point(-1, 1), E389.point(0, 0)
    assert parallelogram_residual(E389, P, Q).contains_zero()
    assert parallelogram_residual(E389, P, P).contains_zero()


def test_pairwise_average_bound():
    E = WeierstrassCurve.from_ainvs([0, 0, 0, -1, 0])
    P = E.point(QuadraticNumber(2, 0, 6), QuadraticNumber(0, 1, 6))
    lhs, rhs = pairwise_average_bound(E, [P, E.neg(P)])
    # h(P - (-P)) = h(2P) = 4h(P) and the average is 2*4h/(4*2) = h
    assert abs(lhs.value - rhs.value) < 1e-10
    with pytest.raises(DuplicatePoints):
        pairwise_average_bound(E, [P, P])
    with pytest.raises(DuplicatePoints):
        pairwise_average_bound(E, [P])
