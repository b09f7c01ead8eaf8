"""Reduction of rational elliptic curves at a prime: Tate's algorithm,
point reduction, kernel-of-reduction depth, component indices."""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Union

from flint import nmod_poly

from ..arith.balls import HeightValue
from ..arith.cyclotomic import CyclotomicNumber, to_fraction
from ..arith.padic import INF, FinitePlaceData, place_structure, valuation, vp
from ..errors import BadReductionUnsupported, PreconditionError, RamifiedUnsupported, WrongReductionType
from .weierstrass import CurvePoint, WeierstrassCurve, map_point

GOOD = "good"
SPLIT = "split-multiplicative"
NONSPLIT = "nonsplit-multiplicative"
ADDITIVE = "additive"


def _roots_mod_p(coeffs, p: int) -> list[tuple[int, int]]:
    """Roots (with multiplicity) of an integer polynomial modulo p."""
    cs = [int(c) % p for c in coeffs]
    while cs and cs[-1] == 0:
        cs.pop()
    if len(cs) <= 1:
        return []
    return [(int(r), int(e)) for r, e in nmod_poly(cs, p).roots()]


def _has_root(coeffs, p: int) -> bool:
    return bool(_roots_mod_p(coeffs, p))


def _multiple_root(coeffs, p: int, mult: int) -> int:
    for r, e in _roots_mod_p(coeffs, p):
        if e >= mult:
            return r
    raise AssertionError(f"expected a root of multiplicity {mult} mod {p}")


def _int(c: Fraction) -> int:
    if c.denominator != 1:
        raise AssertionError("expected an integral coefficient")
    return c.numerator


@dataclass(frozen=True)
class ReductionData:
    """Local reduction data of a rational curve at p.

    ``urst`` maps the input model to ``minimal_model`` (see map_point).
    ``nu`` is ord_p of the minimal discriminant for multiplicative reduction
    and 0 otherwise.
    """

    p: int
    curve: WeierstrassCurve
    minimal_model: WeierstrassCurve
    urst: tuple
    type: str
    kodaira: str
    disc_valuation: int
    conductor_exponent: int
    tamagawa: int
    nu: int

    @property
    def is_good(self) -> bool:
        return self.type == GOOD

    @property
    def is_multiplicative(self) -> bool:
        return self.type in (SPLIT, NONSPLIT)

    @property
    def split(self) -> bool:
        return self.type == SPLIT

    @property
    def log_j_v(self) -> HeightValue:
        """log|j_E|_p = nu * log p for multiplicative reduction."""
        if not self.is_multiplicative:
            raise WrongReductionType(f"reduction at {self.p} is {self.type}")
        return HeightValue.from_logs({self.p: Fraction(self.nu)})

    def to_minimal(self, P: CurvePoint) -> CurvePoint:
        return map_point(P, self.minimal_model, self.urst)


def _compose(urst1, urst2):
    """Coordinate change equal to applying urst1 and then urst2."""
    u1, r1, s1, t1 = urst1
    u2, r2, s2, t2 = urst2
    return (
        u1 * u2,
        r1 + u1 * u1 * r2,
        s1 + u1 * s2,
        t1 + u1 * u1 * s1 * r2 + u1**3 * t2,
    )


def _integral_model(E: WeierstrassCurve) -> tuple[WeierstrassCurve, tuple]:
    den = 1
    for i, a in zip((1, 2, 3, 4, 6), E.ainvs):
        d = a.denominator
        # smallest u with u^i * a integral
        u = 1
        for q, e in _factor(d):
            u *= q ** (-(-e // i))
        den = den * u // math.gcd(den, u)
    urst = (Fraction(1, den), Fraction(0), Fraction(0), Fraction(0))
    return E.change_coordinates(*urst), urst


def _factor(n: int):
    from flint import fmpz

    return [(int(q), int(e)) for q, e in fmpz(n).factor()] if n > 1 else []


@lru_cache(maxsize=512)
def reduction_data(E: WeierstrassCurve, p: int) -> ReductionData:
    """Tate's algorithm at p for a curve with rational coefficients."""
    if not E.is_rational():
        raise PreconditionError("reduction_data needs rational coefficients")
    C, urst = _integral_model(E)
    while True:
        a1, a2, a3, a4, a6 = (_int(a) for a in C.ainvs)
        b2, b4, b6, b8 = (_int(b) for b in (C.b2, C.b4, C.b6, C.b8))
        n = vp(C.discriminant, p)
        if n == 0:
            return ReductionData(p, E, C, urst, GOOD, "I0", 0, 0, 1, 0)

        # move the singular point to (0, 0)
        r, t = _singular_point(C, p)
        step = (Fraction(1), Fraction(r), Fraction(0), Fraction(t))
        C = C.change_coordinates(*step)
        urst = _compose(urst, step)
        a1, a2, a3, a4, a6 = (_int(a) for a in C.ainvs)
        b2, b4, b6, b8 = (_int(b) for b in (C.b2, C.b4, C.b6, C.b8))
        assert a3 % p == 0 and a4 % p == 0 and a6 % p == 0

        if b2 % p:
            split = _has_root([-a2, a1, 1], p)
            cp = n if split else (2 if n % 2 == 0 else 1)
            return ReductionData(p, E, C, urst, SPLIT if split else NONSPLIT, f"I{n}", n, 1, cp, n)

        if vp(a6, p) < 2:
            return ReductionData(p, E, C, urst, ADDITIVE, "II", n, n, 1, 0)
        if vp(b8, p) < 3:
            return ReductionData(p, E, C, urst, ADDITIVE, "III", n, n - 1, 2, 0)
        if vp(b6, p) < 3:
            cp = 3 if _has_root([-(a6 // p**2), a3 // p, 1], p) else 1
            return ReductionData(p, E, C, urst, ADDITIVE, "IV", n, n - 2, cp, 0)

        # p | a1, a2;  p^2 | a3, a4;  p^3 | a6
        if p == 2:
            s = a2 % 2
            t = 2 * ((a6 // 4) % 2)
        else:
            s = (-a1 * pow(2, -1, p)) % p
            t = (-a3 * pow(2, -1, p * p)) % (p * p)
        step = (Fraction(1), Fraction(0), Fraction(s), Fraction(t))
        C = C.change_coordinates(*step)
        urst = _compose(urst, step)
        a1, a2, a3, a4, a6 = (_int(a) for a in C.ainvs)
        assert a1 % p == 0 and a2 % p == 0 and a3 % p**2 == 0 and a4 % p**2 == 0 and a6 % p**3 == 0

        b, c, d = a2 // p, a4 // p**2, a6 // p**3
        w = 27 * d * d - b * b * c * c + 4 * b**3 * d - 18 * b * c * d + 4 * c**3
        x = 3 * c - b * b
        if w % p:
            cp = 1 + len(_roots_mod_p([d, c, b, 1], p))
            return ReductionData(p, E, C, urst, ADDITIVE, "I0*", n, n - 4, cp, 0)
        if x % p:
            r0 = _multiple_root([d, c, b, 1], p, 2)
            step = (Fraction(1), Fraction(p * r0), Fraction(0), Fraction(0))
            C = C.change_coordinates(*step)
            urst = _compose(urst, step)
            ix, iy, mx, my = 3, 3, p * p, p * p
            while True:
                a1, a2, a3, a4, a6 = (_int(a) for a in C.ainvs)
                xa2, xa3, xa4, xa6 = a2 // p, a3 // my, a4 // (p * mx), a6 // (mx * my)
                if (xa3 * xa3 + 4 * xa6) % p:
                    cp = 4 if _has_root([-xa6, xa3, 1], p) else 2
                    break
                t0 = _multiple_root([-xa6, xa3, 1], p, 2)
                step = (Fraction(1), Fraction(0), Fraction(0), Fraction(my * t0))
                C = C.change_coordinates(*step)
                urst = _compose(urst, step)
                my *= p
                iy += 1
                a1, a2, a3, a4, a6 = (_int(a) for a in C.ainvs)
                xa2, xa3, xa4, xa6 = a2 // p, a3 // my, a4 // (p * mx), a6 // (mx * my)
                if (xa4 * xa4 - 4 * xa2 * xa6) % p:
                    cp = 4 if _has_root([xa6, xa4, xa2], p) else 2
                    break
                r0 = _multiple_root([xa6, xa4, xa2], p, 2)
                step = (Fraction(1), Fraction(mx * r0), Fraction(0), Fraction(0))
                C = C.change_coordinates(*step)
                urst = _compose(urst, step)
                mx *= p
                ix += 1
            mstar = ix + iy - 5
            return ReductionData(p, E, C, urst, ADDITIVE, f"I{mstar}*", n, n - mstar - 4, cp, 0)

        # triple root
        r0 = _multiple_root([d, c, b, 1], p, 3)
        step = (Fraction(1), Fraction(p * r0), Fraction(0), Fraction(0))
        C = C.change_coordinates(*step)
        urst = _compose(urst, step)
        a1, a2, a3, a4, a6 = (_int(a) for a in C.ainvs)
        x3, x6 = a3 // p**2, a6 // p**4
        if (x3 * x3 + 4 * x6) % p:
            cp = 3 if _has_root([-x6, x3, 1], p) else 1
            return ReductionData(p, E, C, urst, ADDITIVE, "IV*", n, n - 6, cp, 0)
        t0 = _multiple_root([-x6, x3, 1], p, 2)
        step = (Fraction(1), Fraction(0), Fraction(0), Fraction(p * p * t0))
        C = C.change_coordinates(*step)
        urst = _compose(urst, step)
        a1, a2, a3, a4, a6 = (_int(a) for a in C.ainvs)
        if vp(a4, p) < 4:
            return ReductionData(p, E, C, urst, ADDITIVE, "III*", n, n - 7, 2, 0)
        if vp(a6, p) < 6:
            return ReductionData(p, E, C, urst, ADDITIVE, "II*", n, n - 8, 1, 0)
        # not minimal: scale down and start again
        step = (Fraction(p), Fraction(0), Fraction(0), Fraction(0))
        C = C.change_coordinates(*step)
        urst = _compose(urst, step)


def _singular_point(C: WeierstrassCurve, p: int) -> tuple[int, int]:
    """(x0, y0) in [0, p) of the singular point of the reduction mod p."""
    a1, a2, a3, a4, a6 = (_int(a) for a in C.ainvs)
    if p <= 3:
        for x0 in range(p):
            for y0 in range(p):
                f = y0 * y0 + a1 * x0 * y0 + a3 * y0 - x0**3 - a2 * x0 * x0 - a4 * x0 - a6
                fx = a1 * y0 - 3 * x0 * x0 - 2 * a2 * x0 - a4
                fy = 2 * y0 + a1 * x0 + a3
                if f % p == 0 and fx % p == 0 and fy % p == 0:
                    return x0, y0
        raise AssertionError("no singular point found")
    b2, c4, c6 = _int(C.b2), _int(C.c4), _int(C.c6)
    if c4 % p == 0:
        x0 = (-b2 * pow(12, -1, p)) % p
    else:
        x0 = (-(c6 + b2 * c4) * pow(12 * c4, -1, p)) % p
    y0 = (-(a1 * x0 + a3) * pow(2, -1, p)) % p
    return x0, y0


def bad_primes(E: WeierstrassCurve) -> list[int]:
    C, _ = _integral_model(E)
    d = C.discriminant
    return [q for q, _ in _factor(abs(d.numerator))]


# -- point reduction ------------------------------------------------------


@dataclass(frozen=True)
class ReducedPoint:
    """Image of a point in E(F_{p^f}); ``kernel`` marks reduction to O."""

    kernel: bool
    x: object = None
    y: object = None

    def __repr__(self) -> str:
        return "O~" if self.kernel else f"({self.x}, {self.y})~"


def _rational_place(p: int) -> FinitePlaceData:
    return place_structure(1, p)[0]


def _as_place(place: Union[int, FinitePlaceData]) -> FinitePlaceData:
    return _rational_place(place) if isinstance(place, int) else place


def _coord_valuation(c, place: FinitePlaceData):
    if isinstance(c, CyclotomicNumber) and not c.is_rational():
        return valuation(c, place)
    return vp(to_fraction(c if not isinstance(c, CyclotomicNumber) else c.to_fraction()), place.p)


def _check_place(P: CurvePoint, place: FinitePlaceData):
    for c in (P.x, P.y):
        if isinstance(c, CyclotomicNumber) and not c.is_rational() and c.m % place.p == 0:
            raise RamifiedUnsupported(f"{place.p} ramifies in Q(zeta_{c.m})")
        if isinstance(c, CyclotomicNumber) and not c.is_rational() and place.m % c.m:
            raise PreconditionError(f"place is for conductor {place.m}, point needs {c.m}")


def reduced_curve(E: WeierstrassCurve, place: Union[int, FinitePlaceData]) -> WeierstrassCurve:
    """Reduction of the p-minimal model over F_{p^f} (good reduction only)."""
    place = _as_place(place)
    red = reduction_data(E, place.p)
    if not red.is_good:
        raise BadReductionUnsupported(f"{red.type} reduction at {place.p}")
    ctx = place.ring.residue
    return WeierstrassCurve(*(ctx(_int(a) % place.p) for a in red.minimal_model.ainvs))


def reduce_point(P: CurvePoint, place: Union[int, FinitePlaceData]) -> ReducedPoint:
    """Reduction mod w of the image of P on the p-minimal model."""
    place = _as_place(place)
    if P.is_infinity:
        return ReducedPoint(True)
    _check_place(P, place)
    red = reduction_data(P.curve, place.p)
    Q = red.to_minimal(P)
    if _coord_valuation(Q.x, place) < 0:
        return ReducedPoint(True)
    xb, yb = place.residue_image(Q.x), place.residue_image(Q.y)
    if not red.is_good:
        a1, a2, a3, a4, a6 = (place.residue_image(a) for a in red.minimal_model.ainvs)
        fx = a1 * yb - 3 * xb * xb - 2 * a2 * xb - a4
        fy = 2 * yb + a1 * xb + a3
        if fx == 0 and fy == 0:
            raise BadReductionUnsupported(f"point reduces to the singular point mod {place.p}")
    return ReducedPoint(False, xb, yb)


def is_kernel_of_reduction(P: CurvePoint, place: Union[int, FinitePlaceData]) -> tuple[bool, float]:
    """(in kernel?, depth m(P) = -v(x)/2) on the p-minimal model."""
    place = _as_place(place)
    if P.is_infinity:
        return True, INF
    _check_place(P, place)
    red = reduction_data(P.curve, place.p)
    Q = red.to_minimal(P)
    v = _coord_valuation(Q.x, place)
    if v >= 0:
        return False, 0
    if v % 2:
        raise AssertionError("odd valuation of x in the kernel of an unramified place")
    return True, -v // 2


# -- component group at split multiplicative primes ----------------------


@dataclass(frozen=True)
class ComponentIndex:
    """Residue k/nu in (1/nu)Z/Z with 0 <= k < nu."""

    k: int
    nu: int

    def __post_init__(self):
        object.__setattr__(self, "k", self.k % self.nu)

    @property
    def value(self) -> Fraction:
        return Fraction(self.k, self.nu)

    @property
    def canonical(self) -> int:
        return min(self.k, self.nu - self.k)

    def __add__(self, other: "ComponentIndex") -> "ComponentIndex":
        if self.nu != other.nu:
            raise ValueError("component indices from different groups")
        return ComponentIndex(self.k + other.k, self.nu)

    def __neg__(self):
        return ComponentIndex(-self.k, self.nu)


def _padic_critical_point(C: WeierstrassCurve, p: int, M: int) -> tuple[int, int]:
    """Newton solution of f_x = f_y = 0 near (0, 0) modulo p^M."""
    a1, a2, a3, a4, a6 = (_int(a) for a in C.ainvs)
    mod = p**M
    x, y = 0, 0
    for _ in range(2 * M.bit_length() + 4):
        fx = a1 * y - 3 * x * x - 2 * a2 * x - a4
        fy = 2 * y + a1 * x + a3
        if fx % mod == 0 and fy % mod == 0:
            return x % mod, y % mod
        # Jacobian [[fxx, fxy], [fyx, fyy]]
        fxx, fxy, fyy = -6 * x - 2 * a2, a1, 2
        det = fxx * fyy - fxy * fxy
        inv = pow(det % mod, -1, mod)
        dx = (fyy * fx - fxy * fy) * inv
        dy = (-fxy * fx + fxx * fy) * inv
        x, y = (x - dx) % mod, (y - dy) % mod
    raise AssertionError("Newton iteration for the node did not converge")


def _lift_simple_root(coeffs, r0: int, p: int, M: int) -> int:
    from ..arith.padic import hensel_root

    return hensel_root(coeffs, r0, p, M)


def canonical_component(P: CurvePoint, red: ReductionData) -> int:
    """min(k, nu - k) read off from v(2y + a1 x + a3) on the minimal model."""
    if not red.is_multiplicative:
        raise WrongReductionType(f"component index needs multiplicative reduction, got {red.type}")
    if P.is_infinity:
        return 0
    Q = red.to_minimal(P)
    x, y = Q.rational_x(), to_fraction(Q.y if not hasattr(Q.y, "to_fraction") else Q.y.to_fraction())
    C = red.minimal_model
    a1, a2, a3, a4, a6 = C.ainvs
    fx = a1 * y - 3 * x * x - 2 * a2 * x - a4
    fy = 2 * y + a1 * x + a3
    if vp(x, red.p) < 0 or vp(fx, red.p) <= 0 or vp(fy, red.p) <= 0:
        return 0
    return int(min(2 * vp(fy, red.p), red.nu)) // 2


def component_index(P: CurvePoint, red: ReductionData) -> ComponentIndex:
    """Oriented component of a rational point at a split multiplicative prime.

    The node of the minimal model is moved to the origin p-adically; with
    tangent slopes alpha, beta (beta the one with smaller residue) the index
    is v(y - beta x) or nu - v(y - alpha x), whichever is the smaller branch.
    """
    if not red.is_multiplicative:
        raise WrongReductionType(f"component index needs multiplicative reduction, got {red.type}")
    nu, p = red.nu, red.p
    if P.is_infinity:
        return ComponentIndex(0, nu)
    if red.type == NONSPLIT:
        # splits over the unramified quadratic extension; rational points
        # sit on components 0 or nu/2, which are their own inverses
        return ComponentIndex(canonical_component(P, red), nu)
    if not P.is_rational():
        raise PreconditionError("component_index is implemented for rational points")
    Q = red.to_minimal(P)
    x, y = Q.rational_x(), to_fraction(Q.y if not hasattr(Q.y, "to_fraction") else Q.y.to_fraction())
    if vp(x, p) < 0:
        return ComponentIndex(0, nu)
    C = red.minimal_model
    a1, a2, a3, a4, a6 = (_int(a) for a in C.ainvs)
    fx = a1 * y - 3 * x * x - 2 * a2 * x - a4
    fy = 2 * y + a1 * x + a3
    if vp(fx, p) == 0 or vp(fy, p) == 0:
        return ComponentIndex(0, nu)
    M = 3 * nu + 8
    mod = p**M
    x0, y0 = _padic_critical_point(C, p, M)
    a2s = a2 + 3 * x0
    slopes = sorted(r for r, _ in _roots_mod_p([-a2s, a1, 1], p))
    if len(slopes) != 2:
        raise AssertionError("split node without two tangent slopes")
    beta0, alpha0 = slopes
    beta = _lift_simple_root([-a2s, a1, 1], beta0, p, M)
    alpha = _lift_simple_root([-a2s, a1, 1], alpha0, p, M)
    xs = (x.numerator * pow(x.denominator, -1, mod) - x0) % mod
    ys = (y.numerator * pow(y.denominator, -1, mod) - y0) % mod
    kb = vp((ys - beta * xs) % mod or mod, p)
    ka = vp((ys - alpha * xs) % mod or mod, p)
    if min(ka, kb) >= M:
        raise AssertionError("component index needs more p-adic precision")
    return ComponentIndex(kb if kb <= ka else nu - ka, nu)
