"""Checkers for the Frobenius lemmas: unramified places, the inertia
congruence, the ramified reduction step and the torsion criterion.

Every checker returns a LemmaReport listing the individual checks with
their witnesses. Unramified checks are exact in Q(zeta_m); ramified checks
run in the completion L_w at a fixed p-adic working precision.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass, field
from typing import Optional

from ..arith.cyclotomic import CyclotomicNumber, descend, lcm
from ..arith.local_field import LocalElement, LocalField, local_roots, local_sqrt
from ..arith.padic import INF, multiplicative_order, place_structure, valuation
from ..curves.weierstrass import CurvePoint, WeierstrassCurve
from ..errors import (BadReductionUnsupported, FieldTooSmall, Inconclusive, PreconditionError,
                      TorsionInput)
from .frobenius import (CMOrder, FrobeniusLift, GaloisAutomorphism, _field_conductor,
                        apply_endomorphism, cm_order, cyclotomic_point, f_kernel, frobenius_element,
                        frobenius_lift, galois_apply, inertia_generator, places_over)


@dataclass
class LemmaCheck:
    name: str
    passed: bool
    detail: dict = field(default_factory=dict)


@dataclass
class LemmaReport:
    lemma: str
    inputs: dict
    checks: list = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return bool(self.checks) and all(c.passed for c in self.checks)

    def add(self, name: str, passed: bool, **detail) -> LemmaCheck:
        c = LemmaCheck(name, bool(passed), detail)
        self.checks.append(c)
        return c

    def to_dict(self) -> dict:
        return {
            "lemma": self.lemma,
            "inputs": self.inputs,
            "pass": self.passed,
            "checks": [{"name": c.name, "pass": c.passed, **c.detail} for c in self.checks],
        }


def _fmt(v) -> str:
    return "inf" if v == INF else str(v)


# -- unramified places -------------------------------------------------


def _kernel_valuation(curve: WeierstrassCurve, D: CurvePoint, w) -> float:
    """v_w(x(D)) after checking that the model has good reduction at w."""
    for a in curve.ainvs:
        if valuation(a, w) < 0:
            raise BadReductionUnsupported(f"model is not integral at {w.label}")
    if valuation(curve.discriminant, w) != 0:
        raise BadReductionUnsupported(f"model has bad reduction at {w.label}")
    if D.is_infinity:
        return -INF
    return valuation(D.x, w)


def verify_unram_lemma(curve: WeierstrassCurve, P: CurvePoint, p: int, root: Optional[int] = None,
                       lift: Optional[FrobeniusLift] = None, m: Optional[int] = None) -> LemmaReport:
    """FP != sigma P and lambda_w(FP - sigma P) >= log p at every w | v0 of
    L = Q(zeta_m) (p unramified in L); raises TorsionInput if FP = sigma P."""
    order = cm_order(curve)
    lift = lift or frobenius_lift(p, order, curve, root)
    if P.is_infinity:
        raise TorsionInput("P is the identity")
    M = lcm(order.conductor, _field_conductor(P.x, P.y, *curve.ainvs))
    if m is not None:
        if m % M:
            raise FieldTooSmall(f"P is not defined over Q(zeta_{m})")
        M = m
    if M % p == 0:
        raise PreconditionError(f"{p} ramifies in Q(zeta_{M}); use the ramified checker")
    Q = cyclotomic_point(P, M)
    sigma = frobenius_element(M, p)
    if sigma(order.generator_value(M)) != order.generator_value(M):
        raise PreconditionError("Frobenius does not fix the CM field")
    FP = apply_endomorphism(curve, lift, Q)
    sP = galois_apply(sigma, Q)
    rep = LemmaReport("unramified", {"curve": curve.format(), "P": P.format(), "p": p, "m": M,
                                     "lift": lift.format(), "root": lift.root})
    if FP == sP:
        raise TorsionInput(f"FP = sigma P for P = {P.format()}: P is torsion")
    rep.add("FP != sigma P", True)
    D = FP - sP
    for w in places_over(order, p, lift.root, M):
        v = _kernel_valuation(curve, D, w)
        lam = 0.5 * max(0.0, -v) * math.log(p)
        rep.add(f"lambda_w >= log p at {w.label}", v <= -2, v_x=_fmt(v), lambda_w=lam, log_p=math.log(p))
    return rep


# -- the inertia congruence --------------------------------------------


def _random_integral(m: int, rng: random.Random, bound: int) -> CyclotomicNumber:
    from ..arith.cyclotomic import euler_phi

    return CyclotomicNumber(m, [rng.randint(-bound, bound) for _ in range(euler_phi(m))])


def _divisible_by(alpha: CyclotomicNumber, p: int) -> bool:
    """alpha in p Z[zeta_m]; the power basis is an integral basis."""
    return all(c.denominator == 1 and c.numerator % p == 0 for c in alpha.coefficients)


def verify_congruence(m: int, p: int, samples: int = 1000, seed: int = 0,
                      tau: Optional[GaloisAutomorphism] = None, bound: int = 10**6) -> LemmaReport:
    """tau(alpha)^p = alpha^p mod p on random alpha in Z[zeta_m], with tau a
    generator of Gal(Q(zeta_m)/Q(zeta_{m/p}))."""
    tau = tau or inertia_generator(m, p)
    if tau.m != m or (tau.s - 1) % (m // p):
        raise PreconditionError("tau does not fix Q(zeta_{m/p})")
    rng = random.Random(seed)
    rep = LemmaReport("congruence", {"m": m, "p": p, "tau": tau.s, "samples": samples, "seed": seed})
    bad = []
    for _ in range(samples):
        a = _random_integral(m, rng, bound)
        if not _divisible_by(tau(a) ** p - a**p, p):
            bad.append(a)
    rep.add("tau(a)^p = a^p mod p", not bad, failures=len(bad), tau_order=tau.order)
    return rep


# -- the ramified place -----------------------------------------------


def embed_K(L: LocalField, value, order: CMOrder, gimg: LocalElement) -> LocalElement:
    """Image in L of an element of K given as a rational, a (u, v) pair or a
    cyclotomic number lying in K."""
    if isinstance(value, tuple):
        u, v = value
        return L.from_rational(u) + gimg * L.from_rational(v)
    if isinstance(value, CyclotomicNumber) and not value.is_rational():
        c = value if value.m == order.conductor else descend(value, order.conductor)
        if c is None:
            raise PreconditionError(f"{value} is not in the CM field")
        out, power = L.zero(), L.one()
        for coeff in c.coefficients:
            if coeff:
                out = out + power * L.from_rational(coeff)
            power = power * gimg
        return out
    return L(value)


def _unit_root_image(lift: FrobeniusLift, n: int) -> int:
    """conj(F) mod p^n at the place of F, an element of (Z/p^n)^x."""
    p, order = lift.p, lift.order
    r = lift.root
    for _ in range(n + 1):
        r = pow(r, p, p**n)  # Teichmuller lift of the residue root
    a, b = order.conj(lift.element)
    return (a + b * r) % p**n


def splitting_m_prime(lift: FrobeniusLift, k: int, limit: int = 200) -> int:
    """Smallest m' (coprime to p) with E[F^k] rational over Q_p(zeta_{p^k m'}).

    Galois acts on E[F^k] by the cyclotomic character times the inverse of
    the unramified character sending Frobenius to conj(F); the unramified
    degree must therefore be a multiple of the order of conj(F) mod p^k.
    """
    p = lift.p
    f0 = multiplicative_order(_unit_root_image(lift, k), p**k)
    for mp in range(1, limit + 1):
        if mp % p == 0:
            continue
        f = multiplicative_order(p, mp) if mp > 1 else 1
        if f % f0 == 0:
            return mp
    raise PreconditionError(f"no m' <= {limit} splits E[F^{k}]")


@dataclass
class RamifiedSetup:
    """Everything the ramified lemma needs at a place w | v0 of L_w = Q_p(zeta_m)."""

    curve: WeierstrassCurve
    lift: FrobeniusLift
    k: int
    L: LocalField
    local_curve: WeierstrassCurve
    gimg: LocalElement
    tau_s: int
    kernel: list  # E[F^k] - O in L_w
    m: int

    def point(self, P: CurvePoint) -> CurvePoint:
        """Map a point over K (or over Q(zeta_m) at this place) into L_w."""
        if P.is_infinity:
            return self.local_curve.infinity()
        return CurvePoint(self.local_curve, self._embed(P.x), self._embed(P.y))

    def _embed(self, v):
        if isinstance(v, LocalElement):
            return v
        if isinstance(v, CyclotomicNumber) and not v.is_rational():
            c = v
            if self.curve_order.conductor % c.m and c.m % self.curve_order.conductor == 0:
                d = descend(c, self.curve_order.conductor)
                if d is not None:
                    return embed_K(self.L, d, self.curve_order, self.gimg)
            return self.L.from_cyclotomic(c)
        return embed_K(self.L, v, self.curve_order, self.gimg)

    @property
    def curve_order(self) -> CMOrder:
        return self.lift.order

    def F(self, P: CurvePoint, element: Optional[tuple] = None) -> CurvePoint:
        a, b = element or self.lift.element
        E = self.local_curve
        bP = E.scalar_mul(b, P)
        if bP.is_infinity:
            g_bP = bP
        elif self.curve_order.discriminant == -4:
            g_bP = CurvePoint(E, -bP.x, self.gimg * bP.y)
        else:
            g_bP = CurvePoint(E, self.gimg * bP.x, bP.y)
        return E.add(E.scalar_mul(a, P), g_bP)

    def Fk(self, P: CurvePoint, j: int) -> CurvePoint:
        for _ in range(j):
            P = self.F(P)
        return P

    def tau(self, P: CurvePoint) -> CurvePoint:
        if P.is_infinity:
            return P
        return CurvePoint(self.local_curve, P.x.galois(self.tau_s), P.y.galois(self.tau_s))

    def residue_count(self) -> int:
        """#E~(F_q) for the residue field F_{p^f} of L_w."""
        order, f = self.curve_order, self.L.f
        A, B = (1, 0), self.lift.element
        for _ in range(f):
            A = order.mul(A, B)
        return self.L.p**f + 1 - order.trace(*A)

    def lambda_w(self, P: CurvePoint) -> float:
        """Local height at w normalized by |p|_w = 1/p (good reduction)."""
        if P.is_infinity:
            return math.inf
        v = P.x.p_valuation()
        return 0.5 * max(0.0, float(-v)) * math.log(self.L.p)

    def is_torsion(self, P: CurvePoint) -> bool:
        """Exact for points of E(L_w): the torsion of E(L_w) has order
        dividing p^k #E~(F_q) because E[F^(k+1)] is not defined over L_w."""
        n = self.L.p**self.k * self.residue_count()
        return self.local_curve.scalar_mul(n, P).is_infinity


def ramified_setup(curve: WeierstrassCurve, p: int, k: int, root: Optional[int] = None,
                   m_prime: Optional[int] = None, N: int = 60, max_m: Optional[int] = None) -> RamifiedSetup:
    """Build L_w = Q_p(zeta_{p^k m'}) containing E[F^k], with tau generating
    Gal(L_w / Q_p(zeta_{m/p})), and the points of E[F^k] inside L_w."""
    order = cm_order(curve)
    lift = frobenius_lift(p, order, curve, root)
    m_prime = m_prime or splitting_m_prime(lift, k)
    m = p**k * m_prime
    if max_m is not None and m > max_m:
        from ..errors import BudgetExceeded

        raise BudgetExceeded(f"L_w = Q_{p}(zeta_{m}) exceeds the budget m <= {max_m}")
    # with m' equal to the CM conductor, zeta_{m'} is the CM generator itself
    unit = lift.root if m_prime == order.conductor else None
    L = LocalField(p, k, m_prime, N, unit)
    gimg = L.teichmuller(lift.root)  # the CM generator is a root of unity in Z_p
    E = WeierstrassCurve(*(embed_K(L, a, order, gimg) for a in curve.ainvs))
    if E.discriminant.valuation() != 0:
        raise BadReductionUnsupported("model has bad reduction at v0")
    s = inertia_generator(m, p).s % p**k
    kernel = []
    data = f_kernel(curve, lift, k)
    for x in local_roots([embed_K(L, c, order, gimg) for c in data.coefficients], L):
        y = local_sqrt(x * x * x + E.a2 * x * x + E.a4 * x + E.a6)
        if y is None:
            raise FieldTooSmall("y-coordinate of an F^k-torsion point is not in L_w")
        kernel += [CurvePoint(E, x, y), CurvePoint(E, x, -y)]
    if len(kernel) != p**k - 1:
        raise FieldTooSmall(f"only {len(kernel)} of the {p**k - 1} points of E[F^{k}] - O lie in L_w")
    return RamifiedSetup(curve, lift, k, L, E, gimg, s, kernel, m)


def verify_kernel_structure(setup: RamifiedSetup) -> LemmaReport:
    """E[F^k] has p^k points in L_w, F^k kills them, and tau acts on them as
    the cyclotomic character: tau(T) = [s]T."""
    S = setup
    p, k = S.L.p, S.k
    rep = LemmaReport("kernel-structure", {"curve": S.curve.format(), "p": p, "k": k, "m": S.m,
                                            "tau": S.tau_s, "lift": S.lift.format()})
    rep.add("#E[F^k] = p^k", len(S.kernel) + 1 == p**k, count=len(S.kernel) + 1)
    killed = all(S.Fk(T, k).is_infinity for T in S.kernel)
    rep.add("F^k T = O", killed)
    depth = all(S.lambda_w(T) > 0 for T in S.kernel)
    rep.add("E[F^k] in the kernel of reduction", depth)
    chi = all(S.tau(T) == S.local_curve.scalar_mul(S.tau_s, T) for T in S.kernel)
    rep.add("tau T = [chi(tau)] T", chi, chi_tau=S.tau_s)
    return rep


def primitive_kernel_point(setup: RamifiedSetup) -> CurvePoint:
    """U in E[F^k] - E[F^(k-1)]."""
    for U in setup.kernel:
        if not setup.Fk(U, setup.k - 1).is_infinity:
            return U
    raise AssertionError("E[F^k] has no primitive point")


def verify_ram_lemma(setup: RamifiedSetup, P: CurvePoint, label: str = "") -> LemmaReport:
    """Both parts of the ramified lemma for one non-torsion P in E(L_w)."""
    S = setup
    E, p = S.local_curve, S.L.p
    if not (isinstance(P.x, LocalElement) if not P.is_infinity else True):
        P = S.point(P)
    if P.is_infinity or S.is_torsion(P):
        raise TorsionInput("the ramified lemma needs a non-torsion point")
    rep = LemmaReport("ramified", {"curve": S.curve.format(), "p": p, "k": S.k, "m": S.m,
                                    "tau": S.tau_s, "lift": S.lift.format(), "P": label or "local point"})
    rep.add("P non-torsion", True, exponent_bound=p**S.k * S.residue_count())
    tP = S.tau(P)
    Pp = S.F(tP) - S.F(P)
    if not Pp.is_infinity:
        FP, FtP = S.F(P), S.F(tP)
        if all(c.valuation() >= 0 for c in (P.x, P.y, FP.x, FP.y)):
            vx = (FtP.x - FP.x).p_valuation()
            vy = (FtP.y - FP.y).p_valuation()
            rep.add("part 1: F tau P = F P mod p", vx >= 1 and vy >= 1, branch=1,
                    v_dx=_fmt(vx), v_dy=_fmt(vy))
        lam = S.lambda_w(Pp)
        rep.add("part 1: lambda_w(P') >= log p", lam >= math.log(p) - 1e-12,
                branch=1, lambda_w=lam, log_p=math.log(p), v_x=str(Pp.x.p_valuation()))
        return rep
    T1 = tP - P
    rep.add("tau P - P in E[F]", S.F(T1).is_infinity, branch=2)
    U = primitive_kernel_point(S)
    T2 = S.tau(U) - U
    rep.add("T'' = tau U - U has order p", not T2.is_infinity and E.scalar_mul(p, T2).is_infinity)
    r = next((r for r in range(p) if E.scalar_mul(r, T2) == T1), None)
    rep.add("T' = r T''", r is not None, r=r)
    if r is None:
        return rep
    T = E.scalar_mul(-r, U)
    rep.add("tau(P + T) = P + T", S.tau(P + T) == P + T, r=r, T_in_kernel=S.Fk(T, S.k).is_infinity)
    return rep


def ramified_branch_points(setup: RamifiedSetup, P0: CurvePoint, tries: int = 20) -> tuple:
    """(P1, P2): P1 with a ramified x-coordinate, so that P' != 0, and
    P2 = P0 + U with U primitive in E[F^k], so that P' = 0."""
    S = setup
    L, E = S.L, S.local_curve
    U = primitive_kernel_point(S)
    P2 = S.point(P0) + U
    pi = L.pi()
    for c in range(tries):
        x = L.from_rational(c) + pi
        rhs = x * x * x + E.a2 * x * x + E.a4 * x + E.a6
        if rhs.valuation() != 0:
            continue
        y = local_sqrt(rhs)
        if y is None:
            continue
        P1 = CurvePoint(E, x, y)
        if not (S.F(S.tau(P1)) - S.F(P1)).is_infinity:
            return P1, P2
    raise PreconditionError("no ramified point with P' != 0 found")


# -- torsion ------------------------------------------------------------


@dataclass
class TorsionVerdict:
    torsion: bool
    order: Optional[int]
    method: str
    detail: dict = field(default_factory=dict)


def _count_points(curve: WeierstrassCurve, w) -> int:
    ctx = w.ring.residue
    a = [w.residue_image(c) for c in curve.ainvs]
    a1, a2, a3, a4, a6 = a
    count = 1
    from itertools import product

    for digits in product(range(w.p), repeat=w.f):
        x = ctx(list(digits)) if w.f > 1 else ctx(digits[0])
        b = a1 * x + a3
        c = x * x * x + a2 * x * x + a4 * x + a6
        if w.p == 2:
            raise PreconditionError("characteristic 2")
        disc = b * b + 4 * c
        if disc == 0:
            count += 1
        elif disc.is_square():
            count += 2
    return count


def _good_places(curve: WeierstrassCurve, M: int, count: int, q_max: int = 4000):
    out = []
    ell = 3
    while len(out) < count and ell < 10**5:
        ell += 1
        if not all(ell % q for q in range(2, math.isqrt(ell) + 1)) or M % ell == 0:
            continue
        f = multiplicative_order(ell, M) if M > 1 else 1
        if ell**f > q_max:
            continue
        try:
            w = place_structure(M, ell, 8)[0]
            if any(valuation(a, w) < 0 for a in curve.ainvs) or valuation(curve.discriminant, w) != 0:
                continue
        except (ValueError, BadReductionUnsupported):
            continue
        out.append(w)
    return out


def torsion_test(curve: WeierstrassCurve, P: CurvePoint, places: int = 3) -> TorsionVerdict:
    """Exact torsion decision: the torsion of E(Q(zeta_M)) injects into
    E~(F_q) at good places of odd residue characteristic, so P is torsion
    iff B P = O for B the gcd of the point counts."""
    if P.is_infinity:
        return TorsionVerdict(True, 1, "identity")
    M = _field_conductor(P.x, P.y, *curve.ainvs)
    Q = cyclotomic_point(P, M) if M > 1 else P
    ws = _good_places(curve, M, places)
    if not ws:
        raise Inconclusive("no good places with small residue field")
    counts = [_count_points(curve, w) for w in ws]
    B = 0
    for c in counts:
        B = math.gcd(B, c)
    detail = {"places": [w.label for w in ws], "counts": counts, "bound": B}
    if not curve.scalar_mul(B, Q).is_infinity:
        return TorsionVerdict(False, None, "reduction", detail)
    n = min(d for d in range(1, B + 1) if B % d == 0 and curve.scalar_mul(d, Q).is_infinity)
    return TorsionVerdict(True, n, "reduction", detail)


def frobenius_torsion_criterion(curve: WeierstrassCurve, P: CurvePoint, p: int,
                                root: Optional[int] = None) -> TorsionVerdict:
    """FP = sigma P exactly when P is torsion (split p, unramified L)."""
    try:
        rep = verify_unram_lemma(curve, P, p, root)
    except TorsionInput:
        return TorsionVerdict(True, None, "frobenius", {"p": p})
    return TorsionVerdict(False, None, "frobenius", {"p": p, "report": rep.to_dict()})
