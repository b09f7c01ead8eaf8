"""Weierstrass models and the chord-tangent group law over any supported field."""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional

from flint import fmpq, fmpq_poly

from ..arith.cyclotomic import CyclotomicNumber, to_fraction
from ..arith.quadratic import QuadraticNumber
from ..errors import PreconditionError, SingularCurve


def _norm_coeff(c):
    if isinstance(c, (int, fmpq)):
        return to_fraction(c)
    return c


def field_of(*values):
    """Tag describing the smallest supported field containing the values."""
    tag = ("Q",)
    for v in values:
        if isinstance(v, CyclotomicNumber) and not v.is_rational():
            if tag[0] == "cyclotomic":
                from math import gcd

                tag = ("cyclotomic", tag[1] * v.m // gcd(tag[1], v.m))
            elif tag[0] == "Q":
                tag = ("cyclotomic", v.m)
        elif isinstance(v, QuadraticNumber) and not v.is_rational():
            tag = ("quadratic", v.d)
        elif hasattr(v, "polynomial") and hasattr(v, "frobenius"):
            return ("finite", v)
    return tag


@dataclass(frozen=True, eq=False)
class CurvePoint:
    """A point on ``curve``: affine (x, y), or the point at infinity when x is None."""

    curve: "WeierstrassCurve"
    x: object = None
    y: object = None

    @property
    def is_infinity(self) -> bool:
        return self.x is None

    def __eq__(self, other) -> bool:
        if not isinstance(other, CurvePoint):
            return NotImplemented
        if self.is_infinity or other.is_infinity:
            return self.is_infinity and other.is_infinity
        return self.x == other.x and self.y == other.y

    def __hash__(self):
        return hash(None) if self.is_infinity else hash((self.x, self.y))

    def __add__(self, other: "CurvePoint") -> "CurvePoint":
        return self.curve.add(self, other)

    def __neg__(self) -> "CurvePoint":
        return self.curve.neg(self)

    def __sub__(self, other: "CurvePoint") -> "CurvePoint":
        return self.curve.add(self, self.curve.neg(other))

    def __rmul__(self, n: int) -> "CurvePoint":
        return self.curve.scalar_mul(n, self)

    def __repr__(self) -> str:
        return "O" if self.is_infinity else f"({self.x}, {self.y})"

    def is_rational(self) -> bool:
        if self.is_infinity:
            return True
        return all(isinstance(c, (int, Fraction)) or (hasattr(c, "is_rational") and c.is_rational()) for c in (self.x, self.y))

    def field(self):
        return ("Q",) if self.is_infinity else field_of(self.x, self.y)

    def rational_x(self) -> Fraction:
        x = self.x
        if isinstance(x, Fraction):
            return x
        if isinstance(x, int):
            return Fraction(x)
        return x.to_fraction()

    def map_coordinates(self, fn, curve: Optional["WeierstrassCurve"] = None) -> "CurvePoint":
        c = curve or self.curve
        return c.infinity() if self.is_infinity else CurvePoint(c, fn(self.x), fn(self.y))

    def format(self) -> str:
        if self.is_infinity:
            return "O"
        return f"{format_element(self.x)};{format_element(self.y)}"


@dataclass(frozen=True, eq=False)
class WeierstrassCurve:
    """y^2 + a1 xy + a3 y = x^3 + a2 x^2 + a4 x + a6 with cached invariants."""

    a1: object = Fraction(0)
    a2: object = Fraction(0)
    a3: object = Fraction(0)
    a4: object = Fraction(0)
    a6: object = Fraction(0)
    label: str = field(default="", compare=False)

    def __post_init__(self):
        for name in ("a1", "a2", "a3", "a4", "a6"):
            object.__setattr__(self, name, _norm_coeff(getattr(self, name)))
        a1, a2, a3, a4, a6 = self.ainvs
        b2 = a1 * a1 + 4 * a2
        b4 = 2 * a4 + a1 * a3
        b6 = a3 * a3 + 4 * a6
        b8 = a1 * a1 * a6 + 4 * a2 * a6 - a1 * a3 * a4 + a2 * a3 * a3 - a4 * a4
        c4 = b2 * b2 - 24 * b4
        c6 = -b2 * b2 * b2 + 36 * b2 * b4 - 216 * b6
        disc = -b2 * b2 * b8 - 8 * b4 * b4 * b4 - 27 * b6 * b6 + 9 * b2 * b4 * b6
        if disc == 0:
            raise SingularCurve(f"discriminant vanishes for {self.ainvs}")
        for k, v in dict(b2=b2, b4=b4, b6=b6, b8=b8, c4=c4, c6=c6, discriminant=disc).items():
            object.__setattr__(self, k, v)
        object.__setattr__(self, "j", c4 * c4 * c4 / disc)

    # -- basic data ---------------------------------------------------
    @classmethod
    def from_ainvs(cls, ainvs, label: str = "") -> "WeierstrassCurve":
        ainvs = list(ainvs)
        if len(ainvs) == 2:
            ainvs = [0, 0, 0] + ainvs
        if len(ainvs) != 5:
            raise ValueError("expected 5 a-invariants (or 2 for short form)")
        return cls(*ainvs, label=label)

    @property
    def ainvs(self) -> tuple:
        return (self.a1, self.a2, self.a3, self.a4, self.a6)

    def invariants(self) -> tuple:
        return (self.b2, self.b4, self.b6, self.b8, self.c4, self.c6, self.discriminant, self.j)

    def is_rational(self) -> bool:
        return all(isinstance(a, Fraction) for a in self.ainvs)

    def is_integral(self) -> bool:
        return self.is_rational() and all(a.denominator == 1 for a in self.ainvs)

    def __eq__(self, other):
        return isinstance(other, WeierstrassCurve) and self.ainvs == other.ainvs

    def __hash__(self):
        return hash(self.ainvs)

    def __repr__(self) -> str:
        return f"WeierstrassCurve({self.format()})"

    def format(self) -> str:
        return ",".join(format_element(a) for a in self.ainvs)

    # -- points -------------------------------------------------------
    def infinity(self) -> CurvePoint:
        return CurvePoint(self)

    def residue(self, x, y):
        a1, a2, a3, a4, a6 = self.ainvs
        return y * y + a1 * x * y + a3 * y - (x * x * x + a2 * x * x + a4 * x + a6)

    def is_on_curve(self, x, y) -> bool:
        return self.residue(x, y) == 0

    def point(self, x, y, check: bool = True) -> CurvePoint:
        x, y = _norm_coeff(x), _norm_coeff(y)
        if check and not self.is_on_curve(x, y):
            raise PreconditionError(f"({x}, {y}) is not on {self.format()}: residue {self.residue(x, y)}")
        return CurvePoint(self, x, y)

    def lift_x(self, x, all_points: bool = False):
        """Rational points with the given rational x (empty if none)."""
        from math import isqrt

        x = to_fraction(x)
        a1, a2, a3, a4, a6 = self.ainvs
        bq = a1 * x + a3
        cq = -(x**3 + a2 * x**2 + a4 * x + a6)
        disc = bq * bq - 4 * cq
        if disc < 0:
            return []
        n, d = disc.numerator, disc.denominator
        rn, rd = isqrt(n), isqrt(d)
        if rn * rn != n or rd * rd != d:
            return []
        s = Fraction(rn, rd)
        pts = [self.point(x, (-bq + s) / 2)]
        if s:
            pts.append(self.point(x, (-bq - s) / 2))
        return pts if all_points else pts[:1]

    # -- group law ----------------------------------------------------
    def neg(self, P: CurvePoint) -> CurvePoint:
        if P.is_infinity:
            return P
        return CurvePoint(self, P.x, -P.y - self.a1 * P.x - self.a3)

    def add(self, P: CurvePoint, Q: CurvePoint) -> CurvePoint:
        if P.is_infinity:
            return Q
        if Q.is_infinity:
            return P
        a1, a2, a3, a4, a6 = self.ainvs
        x1, y1, x2, y2 = P.x, P.y, Q.x, Q.y
        if x1 == x2:
            if y1 + y2 + a1 * x2 + a3 == 0:
                return self.infinity()
            den = 2 * y1 + a1 * x1 + a3
            lam = (3 * x1 * x1 + 2 * a2 * x1 + a4 - a1 * y1) / den
            nu = (-x1 * x1 * x1 + a4 * x1 + 2 * a6 - a3 * y1) / den
        else:
            dx = x2 - x1
            lam = (y2 - y1) / dx
            nu = (y1 * x2 - y2 * x1) / dx
        x3 = lam * lam + a1 * lam - a2 - x1 - x2
        y3 = -(lam + a1) * x3 - nu - a3
        return CurvePoint(self, x3, y3)

    def double(self, P: CurvePoint) -> CurvePoint:
        return self.add(P, P)

    def scalar_mul(self, n: int, P: CurvePoint) -> CurvePoint:
        if n < 0:
            return self.scalar_mul(-n, self.neg(P))
        result, base = self.infinity(), P
        while n:
            if n & 1:
                result = self.add(result, base)
            n >>= 1
            if n:
                base = self.add(base, base)
        return result

    # -- polynomials attached to the curve ----------------------------
    def two_torsion_polynomial(self) -> fmpq_poly:
        """4x^3 + b2 x^2 + 2 b4 x + b6 (rational curves only)."""
        return fmpq_poly([_q(self.b6), _q(2 * self.b4), _q(self.b2), 4])

    def division_polynomial(self, n: int) -> fmpq_poly:
        """psi_n for odd n, psi_n / psi_2 for even n, as a polynomial in x."""
        return _division_polys(self, n)[n]

    def duplication_numerator(self) -> fmpq_poly:
        """x^4 - b4 x^2 - 2 b6 x - b8, so x(2P) = num / (4x^3 + b2x^2 + 2b4x + b6)."""
        return fmpq_poly([_q(-self.b8), _q(-2 * self.b6), _q(-self.b4), 0, 1])

    # -- changes of model ---------------------------------------------
    def change_coordinates(self, u, r, s, t) -> "WeierstrassCurve":
        """Model with x = u^2 x' + r, y = u^3 y' + u^2 s x' + t."""
        a1, a2, a3, a4, a6 = self.ainvs
        a1n = (a1 + 2 * s) / u
        a2n = (a2 - s * a1 + 3 * r - s * s) / u**2
        a3n = (a3 + r * a1 + 2 * t) / u**3
        a4n = (a4 - s * a3 + 2 * r * a2 - (t + r * s) * a1 + 3 * r * r - 2 * s * t) / u**4
        a6n = (a6 + r * a4 + r * r * a2 + r**3 - t * a3 - t * t - r * t * a1) / u**6
        return WeierstrassCurve(a1n, a2n, a3n, a4n, a6n, label=self.label)

    def quadratic_twist(self, d: int) -> "WeierstrassCurve":
        """Y^2 = X^3 + d b2 X^2 + 8 d^2 b4 X + 16 d^3 b6 (twist by Q(sqrt d))."""
        d = Fraction(d)
        return WeierstrassCurve(0, d * self.b2, 0, 8 * d * d * self.b4, 16 * d**3 * self.b6)

    def short_model(self) -> tuple["WeierstrassCurve", tuple]:
        """(y^2 = x^3 - 27 c4 x - 54 c6, (u, r, s, t)) for a rational curve."""
        u = Fraction(1, 6)
        s = -self.a1 / 2
        r = -(self.b2) / 12
        t = -(self.a3 + r * self.a1) / 2
        return self.change_coordinates(u, r, s, t), (u, r, s, t)


def map_point(P: CurvePoint, target: WeierstrassCurve, urst) -> CurvePoint:
    """Image of P under the coordinate change (u, r, s, t) producing ``target``."""
    if P.is_infinity:
        return target.infinity()
    u, r, s, t = urst
    x = (P.x - r) / u**2
    y = (P.y - s * (P.x - r) - t) / u**3
    return CurvePoint(target, x, y)


def unmap_point(P: CurvePoint, source: WeierstrassCurve, urst) -> CurvePoint:
    if P.is_infinity:
        return source.infinity()
    u, r, s, t = urst
    x = u * u * P.x + r
    y = u**3 * P.y + u * u * s * P.x + t
    return CurvePoint(source, x, y)


def _q(c) -> fmpq:
    c = to_fraction(c)
    return fmpq(c.numerator, c.denominator)


def _division_polys(E: WeierstrassCurve, n: int) -> dict:
    if not E.is_rational():
        raise ValueError("division polynomials are only provided over Q")
    b2, b4, b6, b8 = (_q(c) for c in (E.b2, E.b4, E.b6, E.b8))
    X = fmpq_poly([0, 1])
    F = E.two_torsion_polynomial()
    F2 = F * F
    f = {
        0: fmpq_poly([0]),
        1: fmpq_poly([1]),
        2: fmpq_poly([1]),
        3: 3 * X**4 + b2 * X**3 + 3 * b4 * X**2 + 3 * b6 * X + b8,
        4: 2 * X**6 + b2 * X**5 + 5 * b4 * X**4 + 10 * b6 * X**3 + 10 * b8 * X**2
        + (b2 * b8 - b4 * b6) * X + (b4 * b8 - b6 * b6),
    }
    for k in range(5, n + 1):
        h = k // 2
        if k % 2:
            if h % 2 == 0:
                f[k] = f[h + 2] * f[h] ** 3 * F2 - f[h - 1] * f[h + 1] ** 3
            else:
                f[k] = f[h + 2] * f[h] ** 3 - f[h - 1] * f[h + 1] ** 3 * F2
        else:
            f[k] = f[h] * (f[h + 2] * f[h - 1] ** 2 - f[h - 2] * f[h + 1] ** 2)
    return f


# -- text formats -----------------------------------------------------

_CYC = re.compile(r"^\s*(\d+)\s*:\s*\[(.*)\]\s*$")
_QUAD = re.compile(r"^\s*sqrt\s*\(?\s*(-?\d+)\s*\)?\s*:\s*\[(.*)\]\s*$")


def parse_element(text: str):
    """Rational "p/q", cyclotomic "m:[c0,c1,...]" or quadratic "sqrt(d):[a,b]"."""
    text = text.strip()
    m = _CYC.match(text)
    if m:
        coeffs = [Fraction(c.strip()) for c in m.group(2).split(",") if c.strip()]
        return CyclotomicNumber(int(m.group(1)), coeffs)
    m = _QUAD.match(text)
    if m:
        a, b = (Fraction(c.strip()) for c in m.group(2).split(","))
        return QuadraticNumber(a, b, int(m.group(1)))
    return Fraction(text)


def format_element(c) -> str:
    if isinstance(c, Fraction):
        return str(c)
    if isinstance(c, CyclotomicNumber):
        if c.is_rational():
            return str(c.to_fraction())
        return f"{c.m}:[{','.join(str(x) for x in c.coefficients)}]"
    if isinstance(c, QuadraticNumber):
        if c.is_rational():
            return str(c.a)
        return f"sqrt({c.d}):[{c.a},{c.b}]"
    return str(c)


def parse_curve(text: str, label: str = "") -> WeierstrassCurve:
    parts = [p for p in text.split(",")]
    if len(parts) not in (2, 5):
        raise ValueError(f"curve must be 'a1,a2,a3,a4,a6' (got {text!r})")
    try:
        vals = [Fraction(p.strip()) for p in parts]
    except (ValueError, ZeroDivisionError) as exc:
        raise ValueError(f"bad curve coefficient in {text!r}: {exc}") from None
    return WeierstrassCurve.from_ainvs(vals, label=label)


def parse_point(curve: WeierstrassCurve, text: str) -> CurvePoint:
    text = text.strip()
    if text.upper() == "O":
        return curve.infinity()
    if ";" not in text:
        raise ValueError(f"point must be 'x;y' or 'O' (got {text!r})")
    xs, ys = text.split(";", 1)
    try:
        x, y = parse_element(xs), parse_element(ys)
    except (ValueError, ZeroDivisionError) as exc:
        raise ValueError(f"bad point coordinate in {text!r}: {exc}") from None
    return curve.point(x, y)
