"""Neron local heights and the local-sum canonical height.

Normalization: the model-independent functions, so that for rational P

    h(P) = lambda_inf(P) + sum_p lambda_p(P)

with lambda_p(P) = lambda'_p(P) + (1/12) ord_p(Delta_min) log p, where
lambda'_p is the model-dependent function on the p-minimal model, and
lambda_inf(P) = (1/2) log|x(P)| - (1/12) log|Delta| + o(1) as P -> O.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

from flint import acb, acb_poly, arb

from ..arith.balls import DEFAULT_PREC, MAX_DOUBLINGS, HeightValue, working_precision
from ..arith.cyclotomic import CyclotomicNumber, embed, embedding_indices, euler_phi, to_fraction
from ..arith.padic import FinitePlaceData, valuation, vp
from ..arith.quadratic import QuadraticNumber
from ..curves.reduction import ReductionData, bad_primes, reduction_data
from ..curves.weierstrass import CurvePoint, WeierstrassCurve, field_of
from ..errors import BadReductionUnsupported, PrecisionExhausted, PreconditionError


# -- archimedean places --------------------------------------------------


@dataclass(frozen=True)
class ArchimedeanPlace:
    """Embedding of the coordinate field into C.

    ``index`` is k for zeta_m -> exp(2 pi i k/m), or 0/1 for the two signs of
    sqrt(d); ``weight`` is 1/[L:Q] (each complex embedding counted on its own).
    """

    kind: str
    modulus: int
    index: int
    weight: Fraction

    @property
    def label(self) -> str:
        if self.kind == "Q":
            return "inf"
        return f"inf[{self.kind}{self.modulus},{self.index}]"

    def embed(self, c) -> acb:
        if isinstance(c, CyclotomicNumber):
            if self.kind != "cyclotomic":
                if c.is_rational():
                    return acb(_arb(c.to_fraction()))
                raise PreconditionError("cyclotomic value at a non-cyclotomic embedding")
            if c.m != self.modulus:
                c = c.lift(self.modulus)
            return embed(c, self.index)
        if isinstance(c, QuadraticNumber):
            if c.is_rational():
                return acb(_arb(c.a))
            if self.kind != "quadratic" or c.d != self.modulus:
                raise PreconditionError("quadratic value at an incompatible embedding")
            return c.embeddings()[self.index]
        return acb(_arb(to_fraction(c)))


def _arb(q: Fraction) -> arb:
    return arb(q.numerator) / q.denominator


def archimedean_places(tag) -> list[ArchimedeanPlace]:
    if tag[0] == "cyclotomic":
        m = tag[1]
        w = Fraction(1, euler_phi(m))
        return [ArchimedeanPlace("cyclotomic", m, k, w) for k in embedding_indices(m)]
    if tag[0] == "quadratic":
        return [ArchimedeanPlace("quadratic", tag[1], k, Fraction(1, 2)) for k in (0, 1)]
    return [ArchimedeanPlace("Q", 1, 0, Fraction(1))]


def places_for(curve: WeierstrassCurve, P: CurvePoint) -> list[ArchimedeanPlace]:
    tag = field_of(*(curve.ainvs + (() if P.is_infinity else (P.x, P.y))))
    return archimedean_places(tag)


# -- lattice data ----------------------------------------------------------


@dataclass(frozen=True)
class PeriodData:
    """Normalized lattice Z + Z tau of the embedded curve: omega1 scales it."""

    omega1: acb
    tau: acb
    g2: acb
    g3: acb
    b2: acb
    roots: tuple = ()


def _reduce_tau(w1: acb, w2: acb) -> tuple[acb, acb]:
    """Change lattice basis so tau = w2/w1 lies in the fundamental domain."""
    for _ in range(200):
        tau = w2 / w1
        t_im = float(tau.imag.mid())
        if t_im < 0:
            w2 = -w2
            continue
        n = round(float(tau.real.mid()))
        if n:
            w2 = w2 - n * w1
            tau = w2 / w1
        if abs(tau).mid() < 0.999:
            w1, w2 = w2, -w1
            continue
        return w1, w2
    raise PrecisionExhausted("lattice reduction did not terminate")


def _off_cut(z: acb) -> bool:
    """True if the ball avoids the branch cut (-inf, 0] of the principal sqrt."""
    return bool(z.real > 0) or bool(abs(z.imag) > 0)


def _half_period_candidates(roots) -> list[acb]:
    out = []
    for i in range(3):
        j, k = [t for t in range(3) if t != i]
        a, b = roots[i] - roots[j], roots[i] - roots[k]
        rotations = [acb(1), acb(-1), acb(0, 1), acb(0, -1)]
        for w in (a, b):
            if abs(w) > 0:
                rotations.append(w.conjugate() / abs(w))
        for c in rotations:
            ca, cb = c * a, c * b
            if _off_cut(ca) and _off_cut(cb) and _off_cut(c):
                h = c.sqrt() * acb.elliptic_rf(acb(0), ca, cb)
                if h.is_finite():
                    out.append(h)
                    break
    return out


def period_data(curve: WeierstrassCurve, place: ArchimedeanPlace) -> PeriodData:
    """Periods from Carlson's R_F at the roots of 4X^3 - g2 X - g3.

    Each root e_i yields a half-period ending at e_i (the integrand's ray is
    rotated off the branch cut when needed). A basis is accepted only if the
    invariants of Z + Z tau, rescaled by omega1, overlap g2 = c4/12 and
    g3 = c6/216; this rules out the odd-index sublattices two half-periods
    can span.
    """
    import flint

    c4, c6 = place.embed(curve.c4), place.embed(curve.c6)
    g2, g3 = c4 / 12, c6 / 216
    prec = flint.ctx.prec
    roots = acb_poly([-g3, -g2, 0, 4]).roots(tol=2.0 ** (-(prec // 2)), maxprec=4 * prec)
    halves = _half_period_candidates(roots)
    for i in range(len(halves)):
        for j in range(i + 1, len(halves)):
            w1, w2 = 2 * halves[i], 2 * halves[j]
            ratio = w2 / w1
            if not abs(ratio.imag) > 0:
                continue
            w1, w2 = _reduce_tau(w1, w2)
            tau = w2 / w1
            e2, e3 = acb.elliptic_invariants(tau)
            if (e2 / w1**4).overlaps(g2) and (e3 / w1**6).overlaps(g3):
                return PeriodData(w1, tau, g2, g3, place.embed(curve.b2), tuple(roots))
    raise PrecisionExhausted("could not certify the period lattice")


def elliptic_log(X: acb, per: PeriodData) -> acb:
    """Some z with wp(z) = X, via z = int_X^inf dt / sqrt(4 prod(t - e_i)).

    The ray of integration is rotated off the branch cut when needed; the
    result is determined up to sign and periods, which lambda ignores.
    """
    roots = per.roots
    args = [X - e for e in roots]
    rotations = [acb(1), acb(0, 1), acb(0, -1), acb(-1)]
    for w in args:
        if abs(w) > 0:
            rotations.append(w.conjugate() / abs(w))
    for c in rotations:
        cargs = [c * w for w in args]
        if all(_off_cut(w) or w.is_zero() for w in cargs) and sum(1 for w in cargs if w.contains(0)) <= 1:
            z = c.sqrt() * acb.elliptic_rf(*cargs)
            if z.is_finite():
                return z
    raise PrecisionExhausted("elliptic logarithm failed")


def _b2_bernoulli(t: arb) -> arb:
    return t * t - t + arb(1) / 6


def _lambda_series(z: acb, tau: acb, nterms: int) -> arb:
    """-1/2 B2(Im z/Im tau) log|q| - log|1-u| - sum log|(1-q^n u)(1-q^n/u)|."""
    two_pi_i = 2 * acb.pi() * acb(0, 1)
    q = (two_pi_i * tau).exp()
    u = (two_pi_i * z).exp()
    uinv = 1 / u
    logq = abs(q).log()
    val = -_b2_bernoulli(z.imag / tau.imag) * logq / 2 - abs(1 - u).log()
    qn = acb(1)
    for _ in range(nterms):
        qn = qn * q
        val -= abs(1 - qn * u).log() + abs(1 - qn * uinv).log()
    qa = abs(q).upper()
    tail = 2 * qa ** (nterms + 1) / (1 - qa) ** 2
    return val + arb(0, tail.upper())


def lambda_arch(
    curve: WeierstrassCurve,
    embedding: Optional[ArchimedeanPlace],
    P: CurvePoint,
    precision: int = DEFAULT_PREC,
    radius: Optional[float] = None,
) -> HeightValue:
    """Archimedean Neron local height at one embedding (q-series)."""
    if P.is_infinity:
        raise PreconditionError("lambda is undefined at the origin")
    place = embedding or places_for(curve, P)[0]
    target = radius if radius is not None else 2.0 ** (-(precision // 2))
    prec = precision
    for _ in range(MAX_DOUBLINGS + 1):
        with working_precision(prec + 32):
            try:
                val = _lambda_arch_once(curve, place, P, prec)
            except PrecisionExhausted:
                val = None
            if val is not None:
                hv = HeightValue(val)
                if hv.radius <= target:
                    return hv
        prec *= 2
    raise PrecisionExhausted(f"archimedean height not certified to {target:g}")


def _lambda_arch_once(curve, place, P, prec) -> arb:
    per = period_data(curve, place)
    X = place.embed(P.x) + per.b2 / 12
    z = elliptic_log(X, per) / per.omega1
    return _lambda_at_z(per, z, prec)


def _lambda_at_z(per: PeriodData, z: acb, prec: int) -> arb:
    # move z into the strip 0 <= Im z < Im tau
    n = math.floor(float(z.imag.mid() / per.tau.imag.mid()))
    z = z - n * per.tau
    z = z - round(float(z.real.mid()))
    qa = float(abs((2 * acb.pi() * acb(0, 1) * per.tau).exp()).upper())
    nterms = max(2, int(prec * math.log(2) / -math.log(qa)) + 2)
    t = z.imag / per.tau.imag
    vals = []
    if not t.lower() > 0 or not t.upper() < 1:
        # the ball meets a strip boundary: evaluate on both sides
        if not t.lower() > 0:
            vals.append(_lambda_series(z + per.tau, per.tau, nterms))
        if not t.upper() < 1:
            vals.append(_lambda_series(z - per.tau, per.tau, nterms))
    vals.append(_lambda_series(z, per.tau, nterms))
    lo = min((v.lower() for v in vals), key=float)
    hi = max((v.upper() for v in vals), key=float)
    if len(vals) == 1:
        return vals[0]
    from ..arith.balls import interval

    return interval(lo, hi)


def lambda_arch_lattice(
    curve: WeierstrassCurve,
    place: ArchimedeanPlace,
    a: Fraction,
    b: Fraction,
    precision: int = DEFAULT_PREC,
) -> HeightValue:
    """lambda at the point of E(C) with normalized coordinate z = a + b tau.

    Handy for sampling E(C) uniformly; (a, b) = (0, 0) is the origin.
    """
    a, b = Fraction(a) % 1, Fraction(b) % 1
    if a == 0 and b == 0:
        raise PreconditionError("lambda is undefined at the origin")
    with working_precision(precision + 32):
        per = period_data(curve, place)
        z = acb(_arb(a)) + acb(_arb(b)) * per.tau
        return HeightValue(_lambda_at_z(per, z, precision))


# -- non-archimedean places --------------------------------------------------


def lambda_prime_part(red: ReductionData, x: Fraction, y: Fraction) -> Fraction:
    """lambda'_p / log p on the minimal model (Silverman's valuation algorithm)."""
    p = red.p
    C = red.minimal_model
    a1, a2, a3, a4, a6 = C.ainvs
    b2, b4, b6, b8 = C.b2, C.b4, C.b6, C.b8
    N = red.disc_valuation
    A = vp(3 * x * x + 2 * a2 * x + a4 - a1 * y, p)
    B = vp(2 * y + a1 * x + a3, p)
    if A <= 0 or B <= 0:
        return Fraction(max(0, -vp(x, p))) / 2
    if vp(C.c4, p) == 0:
        M = min(Fraction(B), Fraction(N, 2))
        return -M * (N - M) / (2 * N)
    Cv = vp(3 * x**4 + b2 * x**3 + 3 * b4 * x * x + 3 * b6 * x + b8, p)
    if Cv >= 3 * B:
        return Fraction(-2 * B, 3)
    return Fraction(-Cv, 8)


def lambda_nonarch_coefficient(curve: WeierstrassCurve, P: CurvePoint, p: int) -> Fraction:
    """lambda_p(P) / log p as an exact rational."""
    if P.is_infinity:
        raise PreconditionError("lambda is undefined at the origin")
    if not P.is_rational():
        raise PreconditionError("lambda_nonarch needs a rational point; see lambda_nonarch_place")
    red = reduction_data(curve, p)
    Q = red.to_minimal(P)
    x = Q.rational_x()
    y = to_fraction(Q.y) if isinstance(Q.y, (int, Fraction)) else Q.y.to_fraction()
    return lambda_prime_part(red, x, y) + Fraction(red.disc_valuation, 12)


def lambda_nonarch(curve: WeierstrassCurve, P: CurvePoint, p: int, precision: int = DEFAULT_PREC) -> HeightValue:
    """Non-archimedean local height at p: an exact multiple of log p."""
    return HeightValue.from_logs({p: lambda_nonarch_coefficient(curve, P, p)}, precision)


def lambda_nonarch_place(curve: WeierstrassCurve, P: CurvePoint, place: FinitePlaceData, precision: int = DEFAULT_PREC) -> HeightValue:
    """lambda_w at an unramified place w | p of good reduction.

    Uses the exact w-adic valuation of x on the p-minimal model:
    lambda_w = (1/2) max(0, -v_w(x)) log p.
    """
    if P.is_infinity:
        raise PreconditionError("lambda is undefined at the origin")
    red = reduction_data(curve, place.p)
    if not red.is_good:
        raise BadReductionUnsupported(f"{red.type} reduction at {place.p}")
    Q = red.to_minimal(P)
    v = valuation(Q.x, place) if isinstance(Q.x, CyclotomicNumber) else vp(Q.x, place.p)
    return HeightValue.from_logs({place.p: Fraction(max(0, -v), 2)}, precision)


# -- local decomposition -------------------------------------------------------


@dataclass(frozen=True)
class HeightEntry:
    label: str
    weight: Fraction
    value: HeightValue


@dataclass(frozen=True)
class HeightDecomposition:
    entries: tuple
    total: HeightValue

    def to_rows(self) -> list[dict]:
        return [
            {"place": e.label, "weight": str(e.weight), **e.value.to_dict()}
            for e in self.entries
        ]


def relevant_primes(curve: WeierstrassCurve, P: CurvePoint) -> list[int]:
    """Primes where lambda_p(P) can be nonzero: bad primes and primes in den(x)."""
    ps = set(bad_primes(curve))
    if not P.is_infinity:
        den = P.rational_x().denominator
        ps.update(q for q, _ in _factor_int(den))
    return sorted(ps)


def _factor_int(n: int):
    from flint import fmpz

    return [(int(q), int(e)) for q, e in fmpz(n).factor()] if n > 1 else []


def canonical_height_local_sum(
    curve: WeierstrassCurve, P: CurvePoint, precision: int = DEFAULT_PREC, radius: Optional[float] = None
) -> HeightDecomposition:
    """h(P) = lambda_inf(P) + sum_p lambda_p(P) for a rational point.

    Torsion points that are met as P = O are given height 0 directly.
    """
    if not P.is_rational():
        raise PreconditionError("canonical_height_local_sum is implemented over Q")
    if P.is_infinity:
        return HeightDecomposition((), HeightValue.zero())
    entries = []
    arch = lambda_arch(curve, None, P, precision, radius)
    entries.append(HeightEntry("inf", Fraction(1), arch))
    total = arch
    with working_precision(precision):
        for p in relevant_primes(curve, P):
            lam = lambda_nonarch(curve, P, p, precision)
            entries.append(HeightEntry(f"p={p}", Fraction(1), lam))
            total = total + lam
    return HeightDecomposition(tuple(entries), total)
