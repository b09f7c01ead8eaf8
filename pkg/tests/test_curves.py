from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from heightlab.arith.cyclotomic import CyclotomicNumber
from heightlab.arith.padic import INF, place_structure
from heightlab.corpus import corpus_entry
from heightlab.curves.reduction import (
    ADDITIVE,
    GOOD,
    NONSPLIT,
    SPLIT,
    bad_primes,
    component_index,
    is_kernel_of_reduction,
    reduce_point,
    reduction_data,
)
from heightlab.curves.weierstrass import WeierstrassCurve, parse_curve, parse_point
from heightlab.errors import SingularCurve

E37 = WeierstrassCurve.from_ainvs([0, 0, 1, -1, 0])
G37 = E37.point(0, 0)


@pytest.mark.parametrize(
    "ainvs,disc,j",
    [
        ([0, 0, 0, -1, 0], 64, Fraction(1728)),
        ([0, 0, 0, 0, 1], -432, Fraction(0)),
        ([0, 0, 1, -1, 0], 37, Fraction(110592, 37)),
        ([0, -1, 1, -10, -20], -161051, Fraction(-122023936, 161051)),
        ([0, 1, 1, -2, 0], 389, Fraction(112**3, 389)),
    ],
)
def test_invariants(ainvs, disc, j):
    E = WeierstrassCurve.from_ainvs(ainvs)
    assert E.discriminant == disc
    assert E.j == j
    b2, b4, b6, b8, c4, c6, D, jj = E.invariants()
    assert 1728 * D == c4**3 - c6**2
    assert 4 * b8 == b2 * b6 - b4**2


def test_singular_curve_rejected():
    with pytest.raises(SingularCurve):
        WeierstrassCurve.from_ainvs([0, 0, 0, 0, 0])


def test_group_law_examples():
    E = WeierstrassCurve.from_ainvs([0, 0, 0, -1, 0])
    T = E.point(0, 0)
    assert E.add(T, E.infinity()) == T
    assert E.add(T, T).is_infinity
    assert E37.double(G37) == E37.point(1, 0)


@settings(max_examples=60, deadline=None)
@given(st.integers(-6, 6), st.integers(-6, 6), st.integers(-6, 6))
def test_group_law_associative_and_linear(a, b, c):
    P, Q, R = (E37.scalar_mul(k, G37) for k in (a, b, c))
    assert E37.add(E37.add(P, Q), R) == E37.add(P, E37.add(Q, R))
    assert E37.add(P, Q) == E37.scalar_mul(a + b, G37)
    assert E37.neg(P) == E37.scalar_mul(-a, G37)


def test_division_polynomial_vanishes_on_torsion():
    E = WeierstrassCurve.from_ainvs([0, 0, 0, -1, 0])
    f2 = E.two_torsion_polynomial()
    for x in (0, 1, -1):
        assert f2(x) == 0
    # y^2 = x^3 + 1 has the 3-torsion point (0, 1) and the 6-torsion point (2, 3)
    E = WeierstrassCurve.from_ainvs([0, 0, 0, 0, 1])
    assert E.division_polynomial(3)(0) == 0
    assert E.scalar_mul(6, E.point(2, 3)).is_infinity and not E.scalar_mul(3, E.point(2, 3)).is_infinity


def test_parse_round_trip():
    E = parse_curve("0,0,1,-1,0")
    P = parse_point(E, "1/4;-5/8")
    assert P == E37.scalar_mul(5, G37) or P == E37.neg(E37.scalar_mul(5, G37))
    assert parse_point(E, P.format()) == P
    with pytest.raises(ValueError):
        parse_curve("1,2,3")
    with pytest.raises(ValueError):
        parse_point(E, "1;1")


# -- reduction ----------------------------------------------------------------------


@pytest.mark.parametrize(
    "ainvs,p,rtype,kodaira,tamagawa,f",
    [
        ([0, 0, 0, -1, 0], 5, GOOD, "I0", 1, 0),
        ([0, 0, 1, -1, 0], 37, NONSPLIT, "I1", 1, 1),
        ([0, -1, 1, -10, -20], 11, SPLIT, "I5", 5, 1),
        ([0, 0, 0, 0, 5], 5, ADDITIVE, "II", 1, 2),
        ([0, 0, 0, -25, 0], 5, ADDITIVE, "I0*", 4, 2),
        ([0, 1, 1, 0, 2], 3, SPLIT, "I2", 2, 1),
    ],
)
def test_reduction_data(ainvs, p, rtype, kodaira, tamagawa, f):
    red = reduction_data(WeierstrassCurve.from_ainvs(ainvs), p)
    assert red.type == rtype
    assert red.kodaira == kodaira
    assert red.tamagawa == tamagawa
    assert red.conductor_exponent == f


def _count(E, p):
    a1, a2, a3, a4, a6 = (int(a) for a in E.ainvs)
    return 1 + sum(1 for x in range(p) for y in range(p) if (y * y + a1 * x * y + a3 * y - (x**3 + a2 * x * x + a4 * x + a6)) % p == 0)


@pytest.mark.parametrize("label", ["37a", "269a", "nu2"])
def test_multiplicative_split_flag_matches_point_count(label):
    """a_p = +1 for split and -1 for nonsplit multiplicative reduction."""
    E = corpus_entry(label).curve
    for p in bad_primes(E):
        red = reduction_data(E, p)
        if red.is_multiplicative and red.minimal_model == E:
            ap = p + 1 - _count(E, p)
            assert ap == (1 if red.split else -1)


def test_bad_primes_match_corpus():
    for label in ("cm1728", "cm0", "37a", "269a", "add5", "nu2"):
        entry = corpus_entry(label)
        assert bad_primes(entry.curve) == sorted(entry.bad_primes)


def test_reduce_point_examples():
    P = E37.point(2, -3)
    r = reduce_point(P, 5)
    assert not r.kernel and int(r.x.polynomial().coeffs()[0] if r.x.polynomial().coeffs() else 0) == 2
    Q = E37.scalar_mul(5, G37)  # x = 1/4
    assert reduce_point(Q, 2).kernel


def test_reduce_point_over_cyclotomic_place():
    # a base-changed rational point reduces to its mod-11 image at every place of Q(zeta_5)
    P = E37.point(2, -3)
    Pc = E37.point(CyclotomicNumber.rational(2, 5), CyclotomicNumber.rational(-3, 5))
    expected = reduce_point(P, 11)
    for w in place_structure(5, 11):
        r = reduce_point(Pc, w)
        assert str(r.x) == str(expected.x) and str(r.y) == str(expected.y)


def test_is_kernel_of_reduction_examples():
    assert is_kernel_of_reduction(E37.infinity(), 2) == (True, INF)
    assert is_kernel_of_reduction(E37.point(2, -3), 5) == (False, 0)
    Q = E37.scalar_mul(5, G37)  # v_2(x) = -2
    assert is_kernel_of_reduction(Q, 2) == (True, 1)


def test_component_index():
    red = reduction_data(E37, 37)
    for k in range(1, 6):
        assert component_index(E37.scalar_mul(k, G37), red).value == 0
    nu2 = corpus_entry("nu2")
    red = reduction_data(nu2.curve, 3)
    idx = [component_index(P, red) for P in nu2.points]
    assert any(c.value != 0 for c in idx)
    # additivity of the oriented index
    E = nu2.curve
    for P in nu2.points:
        for Q in nu2.points:
            S = E.add(P, Q)
            if S.is_infinity:
                continue
            assert component_index(S, red) == component_index(P, red) + component_index(Q, red)
