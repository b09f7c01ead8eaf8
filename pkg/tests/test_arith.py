import math
from fractions import Fraction

import pytest
import sympy
from flint import acb, arb, fmpq_poly
from hypothesis import given, settings
from hypothesis import strategies as st

from heightlab.arith.balls import HeightValue, format_float, mahler_measure, weil_height, working_precision
from heightlab.arith.cyclotomic import (
    CyclotomicNumber,
    complex_embeddings,
    cyclo_reduce,
    cyclotomic_polynomial,
    minimal_polynomial,
    sqrt_in_field,
    sqrt_rational,
)
from heightlab.arith.padic import INF, place_structure, valuation
from heightlab.arith.quadratic import QuadraticNumber, squarefree_decomposition
from heightlab.errors import RamifiedUnsupported

X = sympy.Symbol("x")
SMALL_M = [3, 4, 5, 7, 8, 9, 12, 15]


def cyc(m, coeffs):
    return cyclo_reduce(list(coeffs), m)


def _sympy_coeffs(expr):
    """Monic rational coefficients, constant term first."""
    poly = sympy.Poly(expr, X)
    lead = poly.LC()
    return [Fraction(int(sympy.fraction(c / lead)[0]), int(sympy.fraction(c / lead)[1])) for c in reversed(poly.all_coeffs())]


def _flint_coeffs(f: fmpq_poly):
    return [Fraction(int(c.p), int(c.q)) for c in f.coeffs()]


cyc_numbers = st.builds(
    lambda m, cs: cyc(m, cs),
    st.sampled_from(SMALL_M),
    st.lists(st.integers(-6, 6), min_size=1, max_size=8),
)


# -- cyclotomic arithmetic ------------------------------------------------------


def test_cyclo_reduce_examples():
    assert cyc(4, [0, 0, 1]) == CyclotomicNumber.rational(-1, 4)
    assert cyc(6, [0, 0, 0, 1]) == CyclotomicNumber.rational(-1, 6)
    assert cyclo_reduce({7: 1}, 5) == CyclotomicNumber.zeta(5, 2)


@pytest.mark.parametrize("m", [1, 2, 3, 4, 5, 6, 8, 9, 12, 15, 20, 24, 35])
def test_cyclotomic_polynomial_matches_sympy(m):
    assert _flint_coeffs(cyclotomic_polynomial(m)) == _sympy_coeffs(sympy.cyclotomic_poly(m, X))


def test_minimal_polynomial_examples():
    assert _flint_coeffs(minimal_polynomial(CyclotomicNumber.zeta(4))) == [1, 0, 1]
    assert _flint_coeffs(minimal_polynomial(cyc(3, [1, 1]))) == [1, -1, 1]
    assert _flint_coeffs(minimal_polynomial(Fraction(3, 2))) == [Fraction(-3, 2), 1]


@pytest.mark.parametrize("m,coeffs", [(5, [0, 1, 0, 0, 1]), (7, [1, 2]), (8, [0, 1, 0, 1]), (12, [2, 0, 1]), (9, [0, 0, 0, 1, 1])])
def test_minimal_polynomial_matches_sympy(m, coeffs):
    z = sympy.exp(2 * sympy.pi * sympy.I / m)
    expr = sum(c * z**k for k, c in enumerate(coeffs))
    expected = _sympy_coeffs(sympy.minimal_polynomial(expr, X))
    assert _flint_coeffs(minimal_polynomial(cyc(m, coeffs))) == expected


def test_complex_embeddings_examples():
    emb = complex_embeddings(CyclotomicNumber.zeta(4))
    assert any(e.contains(acb(0, 1)) for e in emb) and any(e.contains(acb(0, -1)) for e in emb)
    s = sum(complex_embeddings(CyclotomicNumber.zeta(5)), acb(0))
    assert s.contains(acb(-1))


@settings(max_examples=40, deadline=None)
@given(cyc_numbers)
def test_embedding_product_is_norm(alpha):
    if alpha.is_zero():
        return
    prod = acb(1)
    for e in complex_embeddings(alpha, 128):
        prod *= e
    f = minimal_polynomial(alpha)
    k = alpha.degree // f.degree()
    const = Fraction(int(f[0].p), int(f[0].q))
    expected = ((-1) ** f.degree() * const) ** k
    assert prod.contains(acb(arb(expected.numerator) / expected.denominator))


@settings(max_examples=60, deadline=None)
@given(cyc_numbers, cyc_numbers)
def test_field_axioms(a, b):
    m = a.m * b.m // math.gcd(a.m, b.m)
    a, b = a.lift(m), b.lift(m)
    assert a + b == b + a
    assert a * b == b * a
    assert (a - b) + b == a
    if not b.is_zero():
        assert (a * b) / b == a
        assert (a * b).norm() == a.norm() * b.norm()


@settings(max_examples=40, deadline=None)
@given(cyc_numbers)
def test_sqrt_in_field_of_a_square(a):
    r = sqrt_in_field(a * a)
    assert r is not None and r * r == a * a


@pytest.mark.parametrize("d", [-1, 2, -2, 3, -3, 5, -7, 6, 13])
def test_sqrt_rational_squares_to_d(d):
    r = sqrt_rational(d)
    assert r * r == CyclotomicNumber.rational(d, r.m)


def test_galois_and_conjugates():
    z = CyclotomicNumber.zeta(7)
    assert z.galois(3) == CyclotomicNumber.zeta(7, 3)
    assert sum(z.conjugates(), CyclotomicNumber.rational(0, 7)) == CyclotomicNumber.rational(-1, 7)


# -- quadratic numbers ----------------------------------------------------------


@pytest.mark.parametrize("n,expected", [(12, (3, 2)), (-8, (-2, 2)), (1, (1, 1)), (50, (2, 5))])
def test_squarefree_decomposition(n, expected):
    assert squarefree_decomposition(n) == expected


@settings(max_examples=60, deadline=None)
@given(st.fractions(max_denominator=20), st.fractions(max_denominator=20), st.sampled_from([-5, -3, -1, 2, 3, 6, 7]))
def test_quadratic_arithmetic(a, b, d):
    x = QuadraticNumber(a, b, d)
    assert x.norm() == a * a - d * b * b
    assert x + x.conjugate() == QuadraticNumber(2 * a, 0, d)
    if not x.is_zero():
        assert x * x.inverse() == QuadraticNumber(1, 0, d)


# -- balls, Mahler measure, Weil height ----------------------------------------------


def test_height_value_exact_logs():
    h = HeightValue.from_logs({2: Fraction(1, 2), 3: Fraction(1, 3)})
    with working_precision(200):
        assert h.ball.overlaps(arb(2).log() / 2 + arb(3).log() / 3)
    s = h + HeightValue.from_logs({2: Fraction(1, 2)})
    assert s.log_coefficient(2) == 1 and s.log_coefficient(3) == Fraction(1, 3)
    assert (s - s).contains_zero() and (s - s).exact == {}


def test_height_value_sums_keep_precision():
    # combining 96-bit values must not fall back to 53-bit rounding
    a = HeightValue.from_logs({37: Fraction(1, 12)}, 96)
    b = HeightValue.from_logs({5: Fraction(3, 2)}, 96)
    assert (a + b).radius < 1e-25
    assert a.scale(Fraction(1, 7)).radius < 1e-25


@settings(max_examples=50, deadline=None)
@given(st.floats(allow_nan=False, allow_infinity=False, width=64))
def test_format_float_round_trips(x):
    assert float(format_float(x)) == x


def test_mahler_measure_examples():
    assert mahler_measure([1, 0, 1]).contains_zero()
    with working_precision(200):
        assert mahler_measure([-1, 2]).ball.overlaps(arb(2).log())
    golden = (1 + math.sqrt(5)) / 2
    m = mahler_measure([-1, -1, 1])
    assert abs(m.value - math.log(golden)) < 1e-14 and m.radius < 1e-20


def test_mahler_measure_lehmer():
    lehmer = [1, 1, 0, -1, -1, -1, -1, -1, 0, 1, 1]
    assert abs(mahler_measure(lehmer).value - 0.162357612007738) < 1e-14


def test_weil_height_examples():
    assert weil_height(CyclotomicNumber.zeta(9)).contains_zero()
    with working_precision(200):
        assert weil_height(Fraction(2)).ball.overlaps(arb(2).log())
    golden = QuadraticNumber(Fraction(1, 2), Fraction(1, 2), 5)
    assert abs(weil_height(golden).value - math.log((1 + math.sqrt(5)) / 2) / 2) < 1e-14


def test_working_precision_restores():
    import flint

    before = flint.ctx.prec
    with working_precision(300):
        assert flint.ctx.prec == 300
    assert flint.ctx.prec == before


# -- places and valuations ---------------------------------------------------------


def test_place_structure_examples():
    ws = place_structure(5, 11)
    assert len(ws) == 4 and all(w.f == 1 for w in ws)
    ws = place_structure(4, 3)
    assert len(ws) == 1 and ws[0].f == 2
    with pytest.raises(RamifiedUnsupported):
        place_structure(10, 5)


def test_valuation_examples():
    for w in place_structure(5, 11):
        assert valuation(CyclotomicNumber.rational(11, 5), w) == 1
        assert valuation(CyclotomicNumber.rational(0, 5), w) == INF


@pytest.mark.parametrize("m,p,coeffs", [(5, 11, [1, 1]), (5, 11, [3, -1, 2]), (7, 29, [1, 0, 2, 1]), (12, 13, [5, 1, 0, 2])])
def test_valuation_norm_oracle(m, p, coeffs):
    """sum_w f_w v_w(alpha) = v_p(Norm alpha)."""
    alpha = cyc(m, coeffs)
    n = alpha.norm()
    vn = 0
    num, den = n.numerator, n.denominator
    while num % p == 0:
        num //= p
        vn += 1
    while den % p == 0:
        den //= p
        vn -= 1
    assert sum(w.f * valuation(alpha, w) for w in place_structure(m, p)) == vn


def test_residue_image_of_w_integral_element():
    # 1/(1 + zeta_4 * 2) has norm 1/5: a unit at one place over 5, a pole at the other
    alpha = CyclotomicNumber.rational(1, 4) / cyc(4, [1, 2])
    for w in place_structure(4, 5):
        if valuation(alpha, w) >= 0:
            r = w.residue_image(alpha)
            assert r * w.residue_image(cyc(4, [1, 2])) == 1
        else:
            with pytest.raises(ValueError):
                w.residue_image(alpha)
