"""Explicit constants: the archimedean floor C1, admissible places, the
abelian height floor and local conductors."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Union

from flint import arb, fmpz_mod_poly_ctx

from ..arith.balls import DEFAULT_PREC, HeightValue, interval, log_plus, to_arb, working_precision
from ..arith.cyclotomic import CyclotomicNumber, complex_embeddings, cyclotomic_polynomial
from ..arith.padic import vp
from ..curves.reduction import bad_primes, reduction_data
from ..curves.weierstrass import WeierstrassCurve
from ..errors import InvalidPlace, NoAdmissiblePrime, PreconditionError

C2_SYMBOLIC = "log(2) + 22/3"

# base fields supported by the place finder: name -> (degree, conductor)
BASE_FIELDS = {"Q": (1, 1), "Q(i)": (2, 4), "Q(zeta3)": (2, 3)}


def _field(name: str) -> tuple[int, int]:
    key = name.replace(" ", "").replace("zeta_3", "zeta3")
    if key not in BASE_FIELDS:
        raise PreconditionError(f"unsupported base field {name!r}; use one of {sorted(BASE_FIELDS)}")
    return BASE_FIELDS[key]


def c2_value(precision: int = DEFAULT_PREC) -> HeightValue:
    with working_precision(precision):
        return HeightValue(arb(2).log() + arb(22) / 3)


@dataclass(frozen=True)
class ElkiesConstants:
    C2: HeightValue
    C1: HeightValue
    log_plus_j: HeightValue
    j: str

    @property
    def symbolic(self) -> str:
        return f"(1/6)({C2_SYMBOLIC} + {self.log_plus_j.value:.6g})"

    def to_dict(self) -> dict:
        return {
            "j": self.j,
            "C2": {"symbolic": C2_SYMBOLIC, **self.C2.to_dict()},
            "log_plus_j": self.log_plus_j.to_dict(),
            "C1": self.C1.to_dict(),
        }


def max_log_plus_j(curve: WeierstrassCurve, precision: int = DEFAULT_PREC) -> HeightValue:
    """max over complex embeddings of log+|j^sigma|."""
    j = curve.j
    with working_precision(precision + 16):
        if isinstance(j, CyclotomicNumber) and not j.is_rational():
            vals = [log_plus(abs(z)) for z in complex_embeddings(j, precision + 16)]
            lo = max((v.lower() for v in vals), key=float)
            hi = max((v.upper() for v in vals), key=float)
            return HeightValue(interval(lo, hi))
        q = j.to_fraction() if isinstance(j, CyclotomicNumber) else Fraction(j)
        if abs(q) <= 1:
            return HeightValue.zero()
        return HeightValue(to_arb(abs(q)).log())


def elkies_constant(curve: WeierstrassCurve, precision: int = DEFAULT_PREC) -> ElkiesConstants:
    """C1 = (1/6)(C2 + max_sigma log+|j^sigma|), C2 = log 2 + 22/3."""
    c2 = c2_value(precision)
    lj = max_log_plus_j(curve, precision)
    with working_precision(precision):
        c1 = (c2 + lj).scale(Fraction(1, 6))
    return ElkiesConstants(c2, c1, lj, str(curve.j))


# -- the admissible place ------------------------------------------------------


def splits_completely(p: int, base: str) -> bool:
    """Congruence test: p splits in Q(zeta_m), m in {1, 3, 4}, iff p = 1 mod m."""
    _, m = _field(base)
    return m == 1 or p % m == 1


def _split_fields(curve: WeierstrassCurve, base: str) -> list[str]:
    # the Frobenius lift needs p split in the CM field too, whatever K is
    cm = _cm_field(curve)
    return [base] + ([cm] if cm and cm != base else [])


def _splits_by_factoring(p: int, m: int) -> bool:
    """Independent check: Phi_m splits into distinct linear factors mod p."""
    if m == 1:
        return True
    if m % p == 0:
        return False
    ctx = fmpz_mod_poly_ctx(p)
    f = ctx([int(c) for c in cyclotomic_polynomial(m).coeffs()])
    _, facs = f.factor()
    return all(g.degree() == 1 and e == 1 for g, e in facs)


def _is_prime(n: int) -> bool:
    return n >= 2 and all(n % q for q in range(2, math.isqrt(n) + 1))


def good_at(curve: WeierstrassCurve, p: int) -> bool:
    """Good reduction at every place over p (rational curves via Tate's
    algorithm; curves over Q(zeta_m) via integrality and the norm of Delta)."""
    if curve.is_rational():
        return reduction_data(curve, p).is_good
    if not all(CyclotomicNumber.coerce(c).is_p_integral(p) for c in curve.ainvs):
        return False
    return vp(CyclotomicNumber.coerce(curve.discriminant).norm(), p) == 0


def a_p(p: int, D: int, C1: Union[HeightValue, ElkiesConstants], precision: int = DEFAULT_PREC) -> HeightValue:
    """A_p = (log p)/D - C1."""
    c1 = C1.C1 if isinstance(C1, ElkiesConstants) else C1
    with working_precision(precision):
        return HeightValue.from_logs({p: Fraction(1, D)}, precision) - c1


@dataclass(frozen=True)
class AdmissiblePlace:
    p: int
    D: int
    base: str
    A_p: HeightValue
    conditions: dict = field(default_factory=dict)


def find_admissible_place(
    curve: WeierstrassCurve,
    base: str = "Q",
    limit: int = 10**5,
    precision: int = DEFAULT_PREC,
) -> AdmissiblePlace:
    """Smallest p <= limit that splits completely in the base field (and in
    the CM field, when E has CM), has good reduction and satisfies A_p > 0,
    which is the same as p > exp(D C1)."""
    D, _ = _field(base)
    c1 = elkies_constant(curve, precision)
    start = int(math.exp(D * c1.C1.lower))
    fields = _split_fields(curve, base)
    for p in range(max(2, start), limit + 1):
        if not _is_prime(p) or not all(splits_completely(p, F) for F in fields):
            continue
        A = a_p(p, D, c1, precision)
        if not A.ball > 0:
            continue
        if not good_at(curve, p):
            continue
        return AdmissiblePlace(p, D, base, A, verify_admissible(curve, base, p, precision))
    raise NoAdmissiblePrime(f"no admissible prime <= {limit} over {base} (need p > exp({D}*C1) ~ {math.exp(D * c1.C1.value):.1f})")


def verify_admissible(curve: WeierstrassCurve, base: str, p: int, precision: int = DEFAULT_PREC) -> dict:
    """Re-check the three conditions by routes independent of the search."""
    D, _ = _field(base)
    c1 = elkies_constant(curve, precision)
    if curve.is_rational():
        good = p not in bad_primes(curve)
    else:
        good = good_at(curve, p)
    with working_precision(precision):
        big = bool(arb(p).log() > D * c1.C1.ball)
    splits = all(_splits_by_factoring(p, _field(F)[1]) for F in _split_fields(curve, base))
    return {"p_good": good, "p_splits": splits, "A_p_positive": big}


# -- the height floor ---------------------------------------------------------


def theorem1_bound(p: int, D: int, C1: Union[HeightValue, ElkiesConstants], ramified: bool,
                   precision: int = DEFAULT_PREC) -> HeightValue:
    """A_p/(2(p+1)) when L/K is unramified above v0, A_p/(4p) otherwise."""
    A = a_p(p, D, C1, precision)
    if not A.ball > 0:
        raise InvalidPlace(f"A_p = {A.value:.6g} is not positive at p = {p}")
    with working_precision(precision):
        return A.scale(Fraction(1, 4 * p) if ramified else Fraction(1, 2 * (p + 1)))


def _cm_field(curve: WeierstrassCurve) -> Optional[str]:
    j = curve.j
    if isinstance(j, CyclotomicNumber):
        if not j.is_rational():
            return None
        j = j.to_fraction()
    return {Fraction(1728): "Q(i)", Fraction(0): "Q(zeta3)"}.get(Fraction(j))


@dataclass(frozen=True)
class BoundCertificate:
    curve: str
    D: int
    p: int
    C1: HeightValue
    A_p: HeightValue
    bound_unramified: HeightValue
    bound_ramified: HeightValue
    assumptions: dict
    base: str = "Q"

    def to_dict(self) -> dict:
        return {
            "curve": self.curve,
            "K": self.base,
            "D": self.D,
            "p": self.p,
            "C1": self.C1.to_dict(),
            "A_p": self.A_p.to_dict(),
            "bound_unramified": self.bound_unramified.to_dict(),
            "bound_ramified": self.bound_ramified.to_dict(),
            "assumptions": dict(sorted(self.assumptions.items())),
        }


def bound_certificate(curve: WeierstrassCurve, base: str = "Q", p: Optional[int] = None,
                      limit: int = 10**5, precision: int = DEFAULT_PREC) -> BoundCertificate:
    """Certificate for the abelian height floor with every assumption flagged.

    Without ``p`` the smallest admissible prime is used. Curves over Q never
    have everywhere good reduction, so that flag is normally false.
    """
    D, _ = _field(base)
    c1 = elkies_constant(curve, precision)
    if p is None:
        p = find_admissible_place(curve, base, limit, precision).p
    flags = verify_admissible(curve, base, p, precision)
    cm = _cm_field(curve)
    flags["contains_CM_field"] = cm is not None and (cm == base.replace(" ", ""))
    try:
        flags["everywhere_good_reduction"] = not bad_primes(curve) if curve.is_rational() else False
    except PreconditionError:
        flags["everywhere_good_reduction"] = False
    A = a_p(p, D, c1, precision)
    if not flags["A_p_positive"]:
        raise InvalidPlace(f"A_p = {A.value:.6g} is not positive at p = {p}")
    return BoundCertificate(
        curve.format(), D, p, c1.C1, A,
        theorem1_bound(p, D, c1, False, precision),
        theorem1_bound(p, D, c1, True, precision),
        flags,
        base.replace(" ", ""),
    )


def local_conductor(m: int, p: int) -> int:
    """p-part of the conductor of Q_p(zeta_m)/Q_p.

    The prime-to-p roots of unity generate an unramified extension and drop
    out; zeta_2 = -1 already lies in Q_2.
    """
    if m < 1 or not _is_prime(p):
        raise PreconditionError("need m >= 1 and p prime")
    k = 0
    while m % p == 0:
        m //= p
        k += 1
    if k == 0 or (p == 2 and k == 1):
        return 1
    return p**k
