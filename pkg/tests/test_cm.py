import dataclasses

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from heightlab.arith.cyclotomic import CyclotomicNumber
from heightlab.cm.frobenius import (
    CMOrder,
    GaloisAutomorphism,
    cm_order,
    cm_unit_action,
    cyclotomic_point,
    f_kernel,
    frobenius_element,
    frobenius_lift,
    frobenius_reduction_check,
    galois_apply,
    inertia_generator,
    norm_relation_holds,
)
from heightlab.cm.lemmas import torsion_test, verify_congruence, verify_unram_lemma
from heightlab.corpus import corpus_entry
from heightlab.errors import InertOrRamifiedPrime, PreconditionError, TorsionInput
from heightlab.heights.doubling import canonical_height_doubling

CM1728 = corpus_entry("cm1728")  # y^2 = x^3 - 2x
CM0 = corpus_entry("cm0")  # y^2 = x^3 + 2
I4 = CyclotomicNumber.zeta(4)


def q_i(n):
    return CyclotomicNumber.rational(n, 4)


def test_cm_orders():
    assert cm_order(CM1728.curve) == CMOrder(-4)
    assert cm_order(CM0.curve) == CMOrder(-3)
    with pytest.raises(PreconditionError):
        cm_order(corpus_entry("37a").curve)


@pytest.mark.parametrize("disc,p", [(-4, 5), (-4, 13), (-4, 29), (-3, 7), (-3, 13), (-3, 19)])
def test_frobenius_lift_has_norm_p(disc, p):
    lift = frobenius_lift(p, CMOrder(disc))
    assert lift.norm == p and lift.primary
    assert (lift.a + lift.b * lift.root) % p == 0


@pytest.mark.parametrize("disc,p", [(-4, 3), (-4, 7), (-4, 2), (-3, 5), (-3, 3), (-3, 11)])
def test_inert_or_ramified_rejected(disc, p):
    with pytest.raises(InertOrRamifiedPrime):
        frobenius_lift(p, CMOrder(disc))


def test_unit_actions():
    E = CM1728.curve
    for P in CM1728.points:
        assert cm_unit_action(E, cm_unit_action(E, P)) == cyclotomic_point(E.neg(P), 4)
    E0 = CM0.curve
    for P in CM0.points:
        R = cm_unit_action(E0, cm_unit_action(E0, cm_unit_action(E0, P)))
        assert R == cyclotomic_point(P, 3)


def test_unit_action_preserves_height():
    E = CM1728.curve
    for P in CM1728.points:
        h = canonical_height_doubling(E, P).value
        assert abs(canonical_height_doubling(E, cm_unit_action(E, P)).value - h) < 1e-12


@pytest.mark.parametrize("label,p", [("cm1728", 5), ("cm1728", 13), ("cm0", 7), ("cm0", 13)])
def test_lift_relations_on_corpus(label, p):
    entry = corpus_entry(label)
    E = entry.curve
    lift = frobenius_lift(p, cm_order(E), E)
    assert lift.norm == p
    for P in entry.points:
        assert norm_relation_holds(E, lift, P)
        assert all(frobenius_reduction_check(E, lift, P).values())


def test_wrong_lift_is_detected():
    # the conjugate element at the same place is not Frobenius there; it acts
    # as [a_p - 1] on F_p-points, so it can only agree where (a_p - 2)P~ = O
    E = CM1728.curve
    P = CM1728.points[0]
    for p in (5, 17, 29, 37):
        lift = frobenius_lift(p, cm_order(E), E)
        a, b = lift.order.conj(lift.element)
        wrong = dataclasses.replace(lift, a=a, b=b)
        assert not any(frobenius_reduction_check(E, wrong, P).values())


@pytest.mark.parametrize("label,p", [("cm1728", 5), ("cm1728", 13), ("cm0", 7)])
def test_f_kernel_degree(label, p):
    E = corpus_entry(label).curve
    data = f_kernel(E, frobenius_lift(p, cm_order(E), E), 1)
    assert data.degree == (p - 1) // 2


def test_galois_automorphisms():
    assert GaloisAutomorphism(12, 5).order == 2
    assert GaloisAutomorphism(7, 3).order == 6
    with pytest.raises(PreconditionError):
        GaloisAutomorphism(12, 2)
    with pytest.raises(InertOrRamifiedPrime):
        frobenius_element(10, 5)
    assert frobenius_element(12, 5) == GaloisAutomorphism(12, 5)
    assert inertia_generator(20, 5).order == 4
    assert inertia_generator(25, 5).order == 5
    assert inertia_generator(75, 5).order == 5


def test_galois_apply_respects_group_law():
    E = CM1728.curve
    P = E.point(q_i(1), I4)  # 1 - 2 = -1
    Q = E.point(q_i(-2), I4 * 2)  # -8 + 4 = -4
    conj = GaloisAutomorphism(4, 3)
    assert galois_apply(conj, E.add(P, Q)) == E.add(galois_apply(conj, P), galois_apply(conj, Q))
    assert galois_apply(conj, P) == E.point(q_i(1), -I4)


@settings(max_examples=10, deadline=None)
@given(st.integers(0, 10**6))
def test_congruence_random_seeds(seed):
    for m, p in ((20, 5), (25, 5), (12, 3)):
        assert verify_congruence(m, p, samples=20, seed=seed).passed


def test_congruence_rejects_bad_tau():
    with pytest.raises(PreconditionError):
        verify_congruence(20, 5, samples=1, tau=GaloisAutomorphism(20, 3))


@pytest.mark.parametrize("label,p", [("cm1728", 5), ("cm1728", 13), ("cm0", 7)])
def test_unram_lemma_on_corpus(label, p):
    entry = corpus_entry(label)
    for P in entry.points:
        assert verify_unram_lemma(entry.curve, P, p).passed


def test_unram_lemma_torsion_inputs():
    E = CM1728.curve
    with pytest.raises(TorsionInput):
        verify_unram_lemma(E, E.infinity(), 5)
    with pytest.raises(TorsionInput):
        verify_unram_lemma(E, E.point(0, 0), 5)
    with pytest.raises(InertOrRamifiedPrime):
        verify_unram_lemma(E, CM1728.points[0], 3)


def test_torsion_test():
    E = CM1728.curve
    assert torsion_test(E, E.point(0, 0)).order == 2
    assert not torsion_test(E, CM1728.points[0]).torsion
    E0 = CM0.curve
    assert not torsion_test(E0, CM0.points[0]).torsion
