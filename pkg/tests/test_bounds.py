import math
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from heightlab.bounds.constants import (
    bound_certificate,
    elkies_constant,
    find_admissible_place,
    local_conductor,
    splits_completely,
    theorem1_bound,
)
from heightlab.bounds.pairwise import (
    b2_periodic,
    elkies_pairwise_check,
    hs_bound_coefficient,
    hs_pairwise_check,
    tate_floor_check,
)
from heightlab.bounds.theorem2 import theorem2_constants
from heightlab.corpus import corpus_entry
from heightlab.curves.weierstrass import WeierstrassCurve
from heightlab.errors import (
    DuplicatePoints,
    InvalidPlace,
    NoAdmissiblePrime,
    PreconditionError,
    WrongReductionType,
)

E1728 = WeierstrassCurve.from_ainvs([0, 0, 0, -1, 0])
E0 = WeierstrassCurve.from_ainvs([0, 0, 0, 0, 2])
E37 = WeierstrassCurve.from_ainvs([0, 0, 1, -1, 0])
G37 = E37.point(0, 0)
C2 = math.log(2) + 22 / 3

fractions = st.fractions(min_value=-5, max_value=5, max_denominator=60)


@settings(max_examples=100)
@given(fractions)
def test_b2_periodic_symmetries(t):
    assert b2_periodic(t) == b2_periodic(-t) == b2_periodic(t + 1)
    assert b2_periodic(t) >= Fraction(-1, 12)


@settings(max_examples=50, deadline=None)
@given(st.sampled_from([181, 197, 229, 233, 241, 257, 269, 277, 281, 293]))
def test_ramified_bound_below_unramified(p):
    c1 = elkies_constant(E1728)
    assert theorem1_bound(p, 2, c1, True).value < theorem1_bound(p, 2, c1, False).value


@pytest.mark.parametrize("m,p,expected", [(7, 5, 1), (20, 5, 5), (25, 5, 25), (2, 2, 1), (8, 2, 8), (36, 3, 9)])
def test_local_conductor(m, p, expected):
    assert local_conductor(m, p) == expected


@pytest.mark.parametrize("curve,logj", [(E1728, math.log(1728)), (E0, 0.0), (E37, math.log(110592 / 37))])
def test_elkies_constant(curve, logj):
    assert abs(elkies_constant(curve).C1.value - (C2 + logj) / 6) < 1e-14


def test_splitting():
    assert splits_completely(13, "Q(i)") and not splits_completely(7, "Q(i)")
    assert splits_completely(7, "Q(zeta3)") and not splits_completely(5, "Q(zeta3)")
    with pytest.raises(PreconditionError):
        splits_completely(5, "Q(sqrt2)")


def test_admissible_place_examples():
    c1 = (C2 + math.log(1728)) / 6
    place = find_admissible_place(E1728, "Q(i)")
    assert place.p == 181 and 181 > math.exp(2 * c1) > 173
    assert all(place.conditions.values())
    assert find_admissible_place(E0, "Q").p == 7
    with pytest.raises(NoAdmissiblePrime):
        find_admissible_place(E1728, "Q(i)", limit=170)


def test_theorem1_bound_values():
    c1 = elkies_constant(E1728)
    A = math.log(181) / 2 - c1.C1.value
    assert abs(theorem1_bound(181, 2, c1, False).value - A / 364) < 1e-15
    assert abs(theorem1_bound(181, 2, c1, True).value - A / 724) < 1e-15
    with pytest.raises(InvalidPlace):
        theorem1_bound(5, 1, c1, False)


def test_certificate_flags():
    cert = bound_certificate(E1728, "Q(i)")
    assert cert.p == 181
    flags = cert.assumptions
    assert flags["contains_CM_field"] and not flags["everywhere_good_reduction"]
    assert bound_certificate(E1728, "Q", p=181).assumptions["contains_CM_field"] is False
    with pytest.raises(InvalidPlace):
        bound_certificate(E1728, "Q", p=5)


def test_hs_bound_coefficient():
    assert hs_bound_coefficient(5, 1) == Fraction(20, 12)
    assert hs_bound_coefficient(2, 2) == Fraction(-2, 12)
    assert hs_bound_coefficient(4, 2, 1) == 0


def test_hs_pairwise_check_on_multiples():
    for N in range(2, 7):
        pts = [E37.scalar_mul(k, G37) for k in range(1, N + 1)]
        rep = hs_pairwise_check(E37, pts, 37)
        assert rep.passed and rep.N == N
    with pytest.raises(PreconditionError):
        hs_pairwise_check(E37, [G37], 37)
    with pytest.raises(DuplicatePoints):
        hs_pairwise_check(E37, [G37, E37.point(1, 0), G37], 37)
    with pytest.raises(WrongReductionType):
        hs_pairwise_check(E37, [G37, E37.point(1, 0)], 5)


def test_tate_floor():
    t = tate_floor_check(E37, G37, 37)
    assert t.identity_component and t.floor == Fraction(1, 12) and t.passed
    nu2 = corpus_entry("nu2")
    for P in nu2.points:
        t = tate_floor_check(nu2.curve, P, 3)
        assert t.passed
        if not t.identity_component:
            assert t.lam == t.floor
    with pytest.raises(WrongReductionType):
        tate_floor_check(E37, G37, 5)


def test_elkies_pairwise_lattice_grid():
    pts = [(Fraction(a, 3), Fraction(b, 3)) for a in range(3) for b in range(3)]
    rep = elkies_pairwise_check(E37, pts)
    assert rep.holds["scaled"]
    with pytest.raises(DuplicatePoints):
        elkies_pairwise_check(E37, [(0, 0), (1, 1)])


def test_theorem2_constants():
    k = theorem2_constants(E37, 37)
    assert (k.nu0, k.c) == (1, 1)
    assert k.c_prime.log_coefficient(37) == Fraction(1, 48)
    k2 = theorem2_constants(E37, 37, e=2)
    assert k2.c == Fraction(1, 4) and k2.c_dprime.log_coefficient(37) == Fraction(1, 192)
    with pytest.raises(PreconditionError):
        theorem2_constants(E37, 37, e=0)
    with pytest.raises(WrongReductionType):
        theorem2_constants(E37, 5)
