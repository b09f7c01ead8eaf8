"""Empirical height floor over a family of abelian-extension points.

The family is the quadratic slice P = (x, sqrt f(x)), x = a/b with
|a|, |b| <= B, plus translates P + T by torsion points T over a small
cyclotomic field. Every row carries the certificate bound it is compared
against: the ramified bound when the prime of the certificate ramifies in
K(P), the unramified one otherwise.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional

from ..arith.balls import DEFAULT_PREC, HeightValue, format_float
from ..arith.cyclotomic import CyclotomicNumber, lcm, sqrt_conductor, sqrt_in_field, sqrt_rational
from ..arith.quadratic import QuadraticNumber, squarefree_decomposition
from ..cm.lemmas import torsion_test
from ..curves.weierstrass import CurvePoint, WeierstrassCurve
from ..errors import CoordinateBlowup, PrecisionExhausted
from ..heights.parallelogram import canonical_height
from .constants import BASE_FIELDS, BoundCertificate
from .theorem2 import quadratic_field, slice_point, twist_image

SURVEY_COLUMNS = ("point", "field", "height", "radius", "bound", "pass")


@dataclass(frozen=True)
class SurveyFamily:
    B: int = 20
    translates: bool = True
    # translates by non-rational torsion need cyclotomic doubling; keep the
    # joint conductor small
    max_conductor: int = 40
    radius: float = 1e-8
    translate_radius: float = 1e-2


@dataclass
class SurveyRow:
    point: str
    field: str
    height: HeightValue
    bound: Optional[HeightValue]
    torsion: bool
    ramified: bool = False

    @property
    def passed(self) -> Optional[bool]:
        if self.torsion or self.bound is None:
            return None
        return self.height.possibly_ge(self.bound) and bool(self.height.ball > self.bound.ball)

    def to_record(self) -> dict:
        return {
            "point": self.point,
            "field": self.field,
            "height": format_float(self.height.value),
            "radius": format_float(self.height.radius),
            "bound": "" if self.bound is None else format_float(self.bound.value),
            "pass": "torsion" if self.torsion else ("true" if self.passed else "false"),
        }


@dataclass
class SurveyResult:
    rows: list = field(default_factory=list)
    certificate: Optional[BoundCertificate] = None

    @property
    def non_torsion(self) -> list:
        return [r for r in self.rows if not r.torsion]

    @property
    def minimum(self) -> Optional[SurveyRow]:
        rows = self.non_torsion
        return min(rows, key=lambda r: r.height.value) if rows else None

    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.non_torsion)

    @property
    def violations(self) -> list:
        return [r for r in self.non_torsion if not r.passed]

    def to_dict(self) -> dict:
        m = self.minimum
        return {
            "certificate": None if self.certificate is None else self.certificate.to_dict(),
            "rows": len(self.rows),
            "non_torsion": len(self.non_torsion),
            "minimum": None if m is None else m.to_record(),
            "violations": [r.to_record() for r in self.violations],
            "pass": self.passed,
        }


def slice_x_values(B: int) -> list[Fraction]:
    """x = a/b in lowest terms with |a| <= B, 1 <= b <= B, ordered by (b, a)."""
    return [Fraction(a, b) for b in range(1, B + 1) for a in range(-B, B + 1) if math.gcd(a, b) == 1]


def _roots_in(poly, m: int) -> list:
    """Roots in Q(zeta_m) of the linear and quadratic factors of a rational poly."""
    out = []
    _, facs = poly.factor()
    for g, _ in facs:
        c = [Fraction(int(t.p), int(t.q)) for t in g.coeffs()]
        if g.degree() == 1:
            out.append(CyclotomicNumber.rational(-c[0] / c[1], m))
        elif g.degree() == 2:
            disc = c[1] ** 2 - 4 * c[2] * c[0]
            s, _ = squarefree_decomposition(disc.numerator * disc.denominator)
            if m % sqrt_conductor(s):
                continue
            r = sqrt_rational(disc).lift(m)
            for sgn in (1, -1):
                out.append((r * sgn - c[1]) / (2 * c[2]))
    return out


def torsion_points(curve: WeierstrassCurve, m: int, n_max: int = 4) -> list[CurvePoint]:
    """Points of order 2..n_max over Q(zeta_m) whose x generates at most a
    quadratic field (roots of small division polynomials)."""
    a1, _, a3, _, _ = curve.ainvs
    polys = [curve.two_torsion_polynomial()] + [curve.division_polynomial(n) for n in range(3, n_max + 1)]
    xs = []
    for f in polys:
        for x in _roots_in(f, m):
            if x not in xs:
                xs.append(x)
    pts = []
    for x in xs:
        eta2 = 4 * x**3 + curve.b2 * x * x + 2 * curve.b4 * x + curve.b6
        eta = sqrt_in_field(CyclotomicNumber.coerce(eta2, m))
        if eta is None:
            continue
        for sgn in ((1,) if eta.is_zero() else (1, -1)):
            T = _plain(CurvePoint(curve, x, (eta * sgn - a1 * x - a3) * Fraction(1, 2)))
            n = next((k for k in range(2, n_max + 1) if curve.scalar_mul(k, T).is_infinity), None)
            if n is not None and T not in pts:
                pts.append(T)
    return pts


def _plain(P: CurvePoint) -> CurvePoint:
    if all(c.is_rational() for c in (P.x, P.y)):
        return CurvePoint(P.curve, P.x.to_fraction(), P.y.to_fraction())
    return P


def _is_torsion_slice(curve: WeierstrassCurve, P: CurvePoint) -> bool:
    # P is anti-invariant, hence a rational point of the twist
    Ed, Pd, _ = twist_image(curve, P)
    return torsion_test(Ed, Pd).torsion


def _cyclotomic(P: CurvePoint, m: int) -> CurvePoint:
    def lift(c):
        if isinstance(c, QuadraticNumber):
            return CyclotomicNumber.rational(c.a, m) + sqrt_rational(c.d).lift(m) * c.b
        if isinstance(c, CyclotomicNumber):
            return c.lift(m)
        return CyclotomicNumber.coerce(c, m)

    return CurvePoint(P.curve, lift(P.x), lift(P.y))


def height_floor_survey(
    curve: WeierstrassCurve,
    family: SurveyFamily,
    certificate: Optional[BoundCertificate] = None,
    precision: int = DEFAULT_PREC,
) -> SurveyResult:
    """Canonical heights over the family, compared to the certificate bound.

    Torsion points are listed with height 0 and left out of the comparison.
    """
    res = SurveyResult(certificate=certificate)
    if family.B < 1:
        return res
    p = certificate.p if certificate else None
    base_m = BASE_FIELDS[certificate.base][1] if certificate else 1
    extra = [T for T in torsion_points(curve, base_m) if not T.is_rational()] if family.translates else []
    rational_T = [T for T in torsion_points(curve, 1)] if family.translates else []

    def bound_for(d: int) -> tuple[Optional[HeightValue], bool]:
        if certificate is None:
            return None, False
        ram = d != 1 and (d % p == 0)
        return (certificate.bound_ramified if ram else certificate.bound_unramified), ram

    for T in rational_T:
        res.rows.append(SurveyRow(T.format(), "Q", HeightValue.zero(), None, True))
    for T in extra:
        res.rows.append(SurveyRow(T.format(), f"Q(zeta{base_m})", HeightValue.zero(), None, True))
    for x in slice_x_values(family.B):
        P = slice_point(curve, x)
        if P is None:
            continue
        d = quadratic_field(P)
        fld = f"Q(sqrt {d})"
        bound, ram = bound_for(d)
        if _is_torsion_slice(curve, P):
            res.rows.append(SurveyRow(P.format(), fld, HeightValue.zero(), None, True))
            continue
        h = canonical_height(curve, P, precision, family.radius)
        res.rows.append(SurveyRow(P.format(), fld, h, bound, False, ram))
        for T in rational_T:
            S = curve.add(P, T)
            res.rows.append(SurveyRow(S.format(), fld, canonical_height(curve, S, precision, family.radius),
                                      bound, False, ram))
        M = lcm(base_m, sqrt_conductor(d))
        if not extra or M > family.max_conductor:
            continue
        Pc = _cyclotomic(P, M)
        for T in extra:
            S = curve.add(Pc, _cyclotomic(T, M))
            try:
                h = canonical_height(curve, S, precision, family.translate_radius)
            except (CoordinateBlowup, PrecisionExhausted):
                continue
            res.rows.append(SurveyRow(S.format(), f"Q(zeta{base_m}, sqrt {d})", h, bound, False, ram))
    return res
