"""Pairwise-difference lower bounds for local heights.

Archimedean: sum_{i != j} lambda(P_i - P_j) against the Elkies-type floor,
in two readings of its constant term. Non-archimedean: the Fourier-averaging
bound at a multiplicative place, checked exactly in units of log p, and the
B2 floor for a single point.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Sequence, Union

from flint import arb

from ..arith.balls import DEFAULT_PREC, HeightValue, working_precision
from ..curves.reduction import NONSPLIT, component_index, reduction_data
from ..curves.weierstrass import CurvePoint, WeierstrassCurve
from ..errors import DuplicatePoints, PreconditionError, WrongReductionType
from ..heights.local import ArchimedeanPlace, lambda_arch, lambda_arch_lattice, lambda_nonarch_coefficient, places_for
from .constants import max_log_plus_j

LatticePoint = tuple  # (a, b): z = a + b tau in the normalized lattice


def b2_periodic(t: Fraction) -> Fraction:
    """{t}^2 - {t} + 1/6."""
    t = Fraction(t) % 1
    return t * t - t + Fraction(1, 6)


@dataclass
class PairwiseReport:
    name: str
    N: int
    lhs: HeightValue
    bounds: dict = field(default_factory=dict)
    holds: dict = field(default_factory=dict)
    detail: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(self.holds.values())

    def to_dict(self) -> dict:
        return {
            "check": self.name,
            "N": self.N,
            "lhs": self.lhs.to_dict(),
            "bounds": {k: v.to_dict() for k, v in self.bounds.items()},
            "holds": dict(self.holds),
            **({"detail": self.detail} if self.detail else {}),
        }


def _require_distinct(points: Sequence) -> None:
    if len(points) < 2:
        raise PreconditionError("need at least two points")
    seen = {}
    for i, P in enumerate(points):
        key = _key(P)
        if key in seen:
            raise DuplicatePoints(f"points {seen[key]} and {i} coincide")
        seen[key] = i


def _key(P):
    if isinstance(P, CurvePoint):
        return P
    a, b = P
    return (Fraction(a) % 1, Fraction(b) % 1)


# -- archimedean ---------------------------------------------------------------


def elkies_floor(N: int, log_plus_j: HeightValue, scaled: bool, precision: int = DEFAULT_PREC) -> HeightValue:
    """-(1/12) N log N - (1/12) N log+|j| - 11/3, or with -(11/3) N if scaled."""
    with working_precision(precision):
        c = Fraction(11, 3) * (N if scaled else 1)
        ball = -arb(N) * arb(N).log() / 12 - log_plus_j.ball * N / 12 - arb(c.numerator) / c.denominator
        return HeightValue(ball)


def elkies_pairwise_check(
    curve: WeierstrassCurve,
    points: Sequence[Union[CurvePoint, LatticePoint]],
    place: Optional[ArchimedeanPlace] = None,
    precision: int = DEFAULT_PREC,
) -> PairwiseReport:
    """sum_{i != j} lambda(P_i - P_j) at one embedding against both readings.

    Points are either CurvePoints (differences via the group law) or lattice
    coordinates (a, b) meaning z = a + b tau, which lets one sample E(C).
    """
    pts = list(points)
    _require_distinct(pts)
    N = len(pts)
    if place is None:
        curve_pts = [P for P in pts if isinstance(P, CurvePoint) and not P.is_infinity]
        place = places_for(curve, curve_pts[0])[0] if curve_pts else places_for(curve, curve.infinity())[0]
    total = HeightValue.zero()
    with working_precision(precision + 16):
        for i in range(N):
            for j in range(i):
                total = total + _lambda_difference(curve, place, pts[i], pts[j], precision)
        lhs = total.scale(2)  # lambda(-R) = lambda(R)
    lj = max_log_plus_j(curve, precision)
    a = elkies_floor(N, lj, False, precision)
    b = elkies_floor(N, lj, True, precision)
    return PairwiseReport(
        "elkies", N, lhs,
        {"printed": a, "scaled": b},
        {"printed": lhs.certainly_ge(a), "scaled": lhs.certainly_ge(b)},
        {"place": place.label},
    )


def _lambda_difference(curve, place, P, Q, precision) -> HeightValue:
    if isinstance(P, CurvePoint) != isinstance(Q, CurvePoint):
        raise PreconditionError("mix of curve points and lattice points")
    if isinstance(P, CurvePoint):
        return lambda_arch(curve, place, curve.add(P, curve.neg(Q)), precision)
    return lambda_arch_lattice(curve, place, Fraction(P[0]) - Fraction(Q[0]), Fraction(P[1]) - Fraction(Q[1]), precision)


# -- non-archimedean -----------------------------------------------------------


def hs_bound_coefficient(N: int, nu: int, nu0: Optional[int] = None) -> Fraction:
    """(1/12) log|j|_v ((N/nu)^2 - N) in units of log p, log|j|_v = nu0 log p."""
    nu0 = nu if nu0 is None else nu0
    return Fraction(nu0, 12) * (Fraction(N, nu) ** 2 - N)


def hs_pairwise_check(curve: WeierstrassCurve, points: Sequence[CurvePoint], p: int) -> PairwiseReport:
    """Exact check of the averaging bound at a multiplicative prime p.

    Nonsplit reduction is accepted: it becomes split over the unramified
    quadratic extension, which changes neither lambda_p nor nu.
    """
    red = reduction_data(curve, p)
    if not red.is_multiplicative:
        raise WrongReductionType(f"reduction at {p} is {red.type}, need multiplicative")
    pts = list(points)
    _require_distinct(pts)
    N, nu = len(pts), red.nu
    lhs = Fraction(0)
    comps = []
    for i in range(N):
        comps.append(str(component_index(pts[i], red).value) if not pts[i].is_infinity else "0")
        for j in range(i):
            lhs += 2 * lambda_nonarch_coefficient(curve, curve.add(pts[i], curve.neg(pts[j])), p)
    rhs = hs_bound_coefficient(N, nu)
    return PairwiseReport(
        "hs", N,
        HeightValue.from_logs({p: lhs}),
        {"bound": HeightValue.from_logs({p: rhs})},
        {"bound": lhs >= rhs},
        {"p": p, "nu": nu, "split": red.type != NONSPLIT, "lhs_log_p": str(lhs), "rhs_log_p": str(rhs),
         "components": comps},
    )


@dataclass(frozen=True)
class TateFloor:
    point: str
    component: Fraction
    lam: Fraction
    floor: Fraction

    @property
    def passed(self) -> bool:
        return self.lam >= self.floor

    @property
    def identity_component(self) -> bool:
        return self.component == 0

    def to_dict(self) -> dict:
        return {"point": self.point, "component": str(self.component), "lambda_log_p": str(self.lam),
                "floor_log_p": str(self.floor), "pass": self.passed}


def tate_floor_check(curve: WeierstrassCurve, P: CurvePoint, p: int) -> TateFloor:
    """lambda_p(P) >= (1/2) B2(r) log|j|_p, exactly; r = component/nu.

    Off the identity component this is an equality.
    """
    red = reduction_data(curve, p)
    if not red.is_multiplicative:
        raise WrongReductionType(f"reduction at {p} is {red.type}, need multiplicative")
    r = component_index(P, red).value
    lam = lambda_nonarch_coefficient(curve, P, p)
    floor = b2_periodic(r) * red.nu / 2
    return TateFloor(P.format(), r, lam, floor)
