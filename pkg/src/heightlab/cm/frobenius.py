"""CM by Z[i] and Z[zeta_3]: unit actions, Frobenius lifts, kernels, Galois actions.

Curves are y^2 = x^3 + a x (discriminant -4, iota(x, y) = (-x, i y)) and
y^2 = x^3 + b (discriminant -3, omega(x, y) = (zeta_3 x, y)), with a, b in
Q or in the CM field itself.  An endomorphism a + b*g is stored by its two
integer coordinates.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

from flint import acb, arb, fmpq, fmpq_poly, fq_default_ctx

from ..arith.balls import working_precision
from ..arith.cyclotomic import CyclotomicNumber, lcm, sqrt_in_field, to_fraction
from ..arith.padic import FinitePlaceData, multiplicative_order, place_structure
from ..arith.quadratic import QuadraticNumber, as_cyclotomic
from ..curves.weierstrass import CurvePoint, WeierstrassCurve
from ..errors import (BudgetExceeded, FieldTooSmall, InertOrRamifiedPrime, PrecisionExhausted, PreconditionError,
                      SingularCurve)


@dataclass(frozen=True)
class CMOrder:
    """Z[i] (discriminant -4) or Z[omega] (discriminant -3)."""

    discriminant: int

    @property
    def generator(self) -> str:
        return "i" if self.discriminant == -4 else "omega"

    @property
    def conductor(self) -> int:
        """m with the generator equal to a power of zeta_m."""
        return 4 if self.discriminant == -4 else 3

    def generator_value(self, m: Optional[int] = None) -> CyclotomicNumber:
        g = CyclotomicNumber.zeta(self.conductor, 1)
        return g.lift(m) if m else g

    def complex_generator(self) -> acb:
        return acb(0, 1) if self.discriminant == -4 else acb(-0.5, arb(3).sqrt() / 2)

    def norm(self, a: int, b: int) -> int:
        return a * a + b * b if self.discriminant == -4 else a * a - a * b + b * b

    def trace(self, a: int, b: int) -> int:
        return 2 * a if self.discriminant == -4 else 2 * a - b

    def mul(self, u: tuple, v: tuple) -> tuple:
        a, b = u
        c, d = v
        if self.discriminant == -4:
            return (a * c - b * d, a * d + b * c)
        # omega^2 = -1 - omega
        return (a * c - b * d, a * d + b * c - b * d)

    def conj(self, u: tuple) -> tuple:
        a, b = u
        return (a, -b) if self.discriminant == -4 else (a - b, -b)

    def units(self) -> list[tuple]:
        if self.discriminant == -4:
            return [(1, 0), (0, 1), (-1, 0), (0, -1)]
        return [(1, 0), (0, 1), (-1, -1), (-1, 0), (0, -1), (1, 1)]

    def residue_roots(self, p: int) -> list[int]:
        """Images of the generator in F_p (empty if p is inert)."""
        if self.discriminant == -4:
            return sorted(r for r in range(p) if (r * r + 1) % p == 0)
        return sorted(r for r in range(p) if (r * r + r + 1) % p == 0)

    def splits(self, p: int) -> bool:
        return p % self.conductor == 1


def cm_order(curve: WeierstrassCurve) -> CMOrder:
    a1, a2, a3, a4, a6 = curve.ainvs
    if a1 == 0 and a2 == 0 and a3 == 0:
        if a6 == 0:
            return CMOrder(-4)
        if a4 == 0:
            return CMOrder(-3)
    raise PreconditionError("only y^2 = x^3 + ax and y^2 = x^3 + b models carry the explicit CM action")


def _coerce(value, m: int):
    if isinstance(value, QuadraticNumber):
        return as_cyclotomic(value, m)
    if isinstance(value, CyclotomicNumber):
        return value.lift(lcm(value.m, m))
    return CyclotomicNumber.rational(to_fraction(value), m)


def _field_conductor(*values) -> int:
    m = 1
    for v in values:
        if isinstance(v, CyclotomicNumber):
            m = lcm(m, v.m)
        elif isinstance(v, QuadraticNumber) and v.b != 0:
            m = lcm(m, as_cyclotomic(v).m)
    return m


def cyclotomic_point(P: CurvePoint, m: int = 1) -> CurvePoint:
    """P with coordinates rewritten in a common Q(zeta_M), m | M."""
    if P.is_infinity:
        return P
    M = lcm(m, _field_conductor(P.x, P.y, *P.curve.ainvs))
    return CurvePoint(P.curve, _coerce(P.x, M), _coerce(P.y, M))


def cm_unit_action(curve: WeierstrassCurve, P: CurvePoint, order: Optional[CMOrder] = None,
                   m: Optional[int] = None) -> CurvePoint:
    """iota(x, y) = (-x, i y) or omega(x, y) = (zeta_3 x, y).

    ``m`` fixes the working field Q(zeta_m); FieldTooSmall if it lacks the
    generator. Without ``m`` the coordinates are extended as needed.
    """
    order = order or cm_order(curve)
    if m is not None and m % order.conductor:
        raise FieldTooSmall(f"Q(zeta_{m}) does not contain the CM generator {order.generator}")
    if P.is_infinity:
        return P
    Q = cyclotomic_point(P, m or order.conductor)
    g = order.generator_value(Q.x.m)
    if order.discriminant == -4:
        return CurvePoint(curve, -Q.x, g * Q.y)
    return CurvePoint(curve, g * Q.x, Q.y)


def apply_element(curve: WeierstrassCurve, order: CMOrder, element: tuple, P: CurvePoint) -> CurvePoint:
    """(a + b g)(P) = [a]P + g([b]P)."""
    a, b = element
    if P.is_infinity:
        return P
    Q = cyclotomic_point(P, order.conductor)
    left = curve.scalar_mul(a, Q)
    right = cm_unit_action(curve, curve.scalar_mul(b, Q), order)
    return curve.add(left, right)


@dataclass(frozen=True)
class FrobeniusLift:
    """F = a + b g of norm p reducing to the p-power Frobenius at the place
    v0 where g = root (mod p)."""

    p: int
    a: int
    b: int
    order: CMOrder
    root: int
    primary: bool

    @property
    def element(self) -> tuple:
        return (self.a, self.b)

    @property
    def norm(self) -> int:
        return self.order.norm(self.a, self.b)

    def power(self, k: int) -> tuple:
        out = (1, 0)
        for _ in range(k):
            out = self.order.mul(out, self.element)
        return out

    def conjugate(self) -> "FrobeniusLift":
        a, b = self.order.conj(self.element)
        other = [r for r in self.order.residue_roots(self.p) if r != self.root][0]
        return FrobeniusLift(self.p, a, b, self.order, other, _is_primary(self.order, a, b))

    def format(self) -> str:
        g = self.order.generator
        return f"{self.a}{'+' if self.b >= 0 else '-'}{abs(self.b)}{g}"


def _is_primary(order: CMOrder, a: int, b: int) -> bool:
    if order.discriminant == -4:
        # a + bi = 1 mod (1 + i)^3 = (2 + 2i): a odd, b even, a + b = 1 mod 4
        return a % 2 == 1 and b % 2 == 0 and (a + b) % 4 == 1
    # a + b omega = +-1 mod 3
    return b % 3 == 0 and a % 3 in (1, 2)


def _elements_of_norm(order: CMOrder, p: int) -> list[tuple]:
    out = []
    bound = math.isqrt(4 * p) + 2
    for a in range(-bound, bound + 1):
        for b in range(-bound, bound + 1):
            if order.norm(a, b) == p:
                out.append((a, b))
    return out


def _root_for(order: CMOrder, p: int, a: int, b: int) -> int:
    """The residue root r with a + b r = 0 (mod p), i.e. the place of (a + b g)."""
    for r in order.residue_roots(p):
        if (a + b * r) % p == 0:
            return r
    raise AssertionError("element of norm p lies over neither place")


def reduced_cm_curve(curve: WeierstrassCurve, order: CMOrder, p: int, root: int, f: int = 2):
    """Reduction of the model over F_{p^f} at the place where g = root."""
    ctx = fq_default_ctx(p, f, "t")

    def red(c):
        if isinstance(c, CyclotomicNumber):
            img = 0
            c = c if c.m == order.conductor else _descend_to(c, order.conductor)
            for k, coeff in enumerate(c.coefficients):
                if coeff.denominator % p == 0:
                    raise PreconditionError("curve is not integral at the place")
                img += coeff.numerator * pow(coeff.denominator, -1, p) * pow(root, k, p)
            return ctx(img % p)
        q = to_fraction(c)
        if q.denominator % p == 0:
            raise PreconditionError("curve is not integral at the place")
        return ctx(q.numerator * pow(q.denominator, -1, p) % p)

    return WeierstrassCurve(*(red(a) for a in curve.ainvs)), ctx


def _descend_to(c: CyclotomicNumber, d: int) -> CyclotomicNumber:
    from ..arith.cyclotomic import descend

    if c.m % d == 0:
        out = descend(c, d)
        if out is not None:
            return out
    raise PreconditionError(f"coefficient {c} is not in Q(zeta_{d})")


def _finite_points(Ebar, ctx, p: int, f: int, limit: int = 12) -> list[CurvePoint]:
    pts = []
    for n in range(1, p**f):
        digits = [(n // p**i) % p for i in range(f)]
        x = ctx(digits)
        rhs = x * x * x + Ebar.a2 * x * x + Ebar.a4 * x + Ebar.a6
        if rhs.is_zero() or not rhs.is_square():
            continue
        pts.append(CurvePoint(Ebar, x, rhs.sqrt()))
        if len(pts) >= limit:
            break
    return pts


def _reduced_action(Ebar, order: CMOrder, root: int, element: tuple, Q: CurvePoint) -> CurvePoint:
    a, b = element
    bQ = Ebar.scalar_mul(b, Q)
    if bQ.is_infinity:
        g_bQ = bQ
    elif order.discriminant == -4:
        g_bQ = CurvePoint(Ebar, -bQ.x, bQ.y * root)
    else:
        g_bQ = CurvePoint(Ebar, bQ.x * root, bQ.y)
    return Ebar.add(Ebar.scalar_mul(a, Q), g_bQ)


def frobenius_compatible(curve: WeierstrassCurve, order: CMOrder, p: int, root: int, element: tuple) -> bool:
    """F(Q) = (x^p, y^p) on sample points of E(F_{p^2}) at the place g = root."""
    try:
        Ebar, ctx = reduced_cm_curve(curve, order, p, root, 2)
    except SingularCurve:
        raise PreconditionError(f"bad reduction at the place over {p} where {order.generator} = {root}") from None
    pts = _finite_points(Ebar, ctx, p, 2)
    if not pts:
        return False
    for Q in pts:
        FQ = _reduced_action(Ebar, order, root, element, Q)
        if FQ.is_infinity or FQ.x != Q.x**p or FQ.y != Q.y**p:
            return False
    return True


def frobenius_lift(p: int, order: CMOrder, curve: Optional[WeierstrassCurve] = None,
                   root: Optional[int] = None) -> FrobeniusLift:
    """Canonical lift of Frobenius at a split prime p > 2.

    Without a curve the primary element is returned. With a curve, the unit
    multiple that reduces to Frobenius (checked on points over F_{p^2}) is
    chosen; its ``primary`` flag records whether it is also primary.
    """
    if p <= 2 or not order.splits(p):
        raise InertOrRamifiedPrime(f"{p} is not split in the order of discriminant {order.discriminant}")
    roots = order.residue_roots(p)
    root = roots[0] if root is None else root
    if root not in roots:
        raise PreconditionError(f"{root} is not a root of the generator's minimal polynomial mod {p}")
    candidates = [(a, b) for a, b in _elements_of_norm(order, p) if (a + b * root) % p == 0]
    if curve is None:
        prim = [c for c in candidates if _is_primary(order, *c)]
        a, b = sorted(prim)[0]
        return FrobeniusLift(p, a, b, order, root, True)
    if order != cm_order(curve):
        raise PreconditionError("curve does not have CM by this order")
    good = [c for c in candidates if frobenius_compatible(curve, order, p, root, c)]
    if len(good) != 1:
        raise PreconditionError(f"no unique Frobenius-compatible lift at {p} (found {good}); bad reduction?")
    a, b = good[0]
    return FrobeniusLift(p, a, b, order, root, _is_primary(order, a, b))


def apply_endomorphism(curve: WeierstrassCurve, lift, P: CurvePoint) -> CurvePoint:
    """F(P) = [a]P + g([b]P) for a FrobeniusLift (or any (a, b) with an order)."""
    if isinstance(lift, FrobeniusLift):
        return apply_element(curve, lift.order, lift.element, P)
    order, element = lift
    return apply_element(curve, order, element, P)


# -- kernels of F^k -----------------------------------------------------


class KPoly:
    """Polynomial over Q(g) as a pair P0 + g P1 of rational polynomials."""

    __slots__ = ("order", "r", "s")

    def __init__(self, order: CMOrder, r: fmpq_poly, s: fmpq_poly = None):
        self.order, self.r, self.s = order, r, s if s is not None else fmpq_poly(0)

    @classmethod
    def constant(cls, order: CMOrder, c) -> "KPoly":
        u, v = _split_scalar(order, c)
        return cls(order, fmpq_poly([u]), fmpq_poly([v]))

    def __add__(self, o):
        return KPoly(self.order, self.r + o.r, self.s + o.s)

    def __sub__(self, o):
        return KPoly(self.order, self.r - o.r, self.s - o.s)

    def __mul__(self, o):
        if isinstance(o, KPoly):
            rr, ss, rs, sr = self.r * o.r, self.s * o.s, self.r * o.s, self.s * o.r
            if self.order.discriminant == -4:
                return KPoly(self.order, rr - ss, rs + sr)
            return KPoly(self.order, rr - ss, rs + sr - ss)
        return KPoly(self.order, self.r * o, self.s * o)

    def degree(self) -> int:
        return max(self.r.degree(), self.s.degree())

    def is_zero(self) -> bool:
        return self.r.is_zero() and self.s.is_zero()

    def coeff(self, k: int) -> tuple:
        return self.r[k], self.s[k]

    def monic_rem(self, mod: "KPoly") -> "KPoly":
        """Remainder on division by a monic polynomial."""
        n = mod.degree()
        lead = mod.coeff(n)
        if lead != (1, 0):
            raise ValueError("divisor must be monic")
        out = KPoly(self.order, fmpq_poly(self.r.coeffs()), fmpq_poly(self.s.coeffs()))
        while not out.is_zero() and out.degree() >= n:
            d = out.degree()
            u, v = out.coeff(d)
            shift = fmpq_poly([0] * (d - n) + [1])
            out = out - mod * KPoly(self.order, shift * u, shift * v)
        return out


def _split_scalar(order: CMOrder, c) -> tuple:
    """(u, v) with c = u + v g."""
    if isinstance(c, CyclotomicNumber):
        c = c if c.m == order.conductor else _descend_to(c, order.conductor)
        cs = c.coefficients
        return (fmpq(cs[0].numerator, cs[0].denominator), fmpq(cs[1].numerator, cs[1].denominator))
    q = to_fraction(c)
    return (fmpq(q.numerator, q.denominator), fmpq(0))


def _k_division_polys(curve: WeierstrassCurve, order: CMOrder, n: int) -> dict:
    """psi_k (odd k) and psi_k / (2y) (even k) over Q(g) for short models."""
    A = KPoly.constant(order, curve.a4)
    B = KPoly.constant(order, curve.a6)
    one = KPoly.constant(order, 1)
    x = KPoly(order, fmpq_poly([0, 1]))
    x2 = x * x
    f = x2 * x + A * x + B
    f2 = f * f
    psi = {0: KPoly(order, fmpq_poly(0)), 1: one, 2: one}
    psi[3] = x2 * x2 * 3 + A * x2 * 6 + B * x * 12 - A * A
    psi[4] = (x2 * x2 * x2 + A * x2 * x2 * 5 + B * x2 * x * 20 - A * A * x2 * 5 - A * B * x * 4 - B * B * 8 - A * A * A) * 2
    for k in range(5, n + 1):
        mh = k // 2
        if k % 2:
            a = psi[mh + 2] * psi[mh] * psi[mh] * psi[mh]
            b = psi[mh - 1] * psi[mh + 1] * psi[mh + 1] * psi[mh + 1]
            # the even-index factors carry (2y)^4 = 16 f^2
            if mh % 2:
                psi[k] = a - b * f2 * 16
            else:
                psi[k] = a * f2 * 16 - b
        else:
            psi[k] = psi[mh] * (psi[mh + 2] * psi[mh - 1] * psi[mh - 1] - psi[mh - 2] * psi[mh + 1] * psi[mh + 1])
    return psi


@dataclass(frozen=True)
class KernelData:
    """E[F^k] - O described by the monic polynomial of its x-coordinates."""

    p: int
    k: int
    element: tuple
    coefficients: tuple
    order: CMOrder

    @property
    def degree(self) -> int:
        return len(self.coefficients) - 1

    def polynomial(self) -> KPoly:
        r = fmpq_poly([fmpq(c[0].numerator, c[0].denominator) for c in self.coefficients])
        s = fmpq_poly([fmpq(c[1].numerator, c[1].denominator) for c in self.coefficients])
        return KPoly(self.order, r, s)

    def as_cyclotomic(self) -> list[CyclotomicNumber]:
        g = self.order.generator_value()
        return [CyclotomicNumber.rational(u, self.order.conductor) + g * v for u, v in self.coefficients]


def _recognize(z: acb, order: CMOrder, den: int) -> Optional[tuple]:
    """(u, v) rationals with denominator den and u + v g inside the ball z."""
    g = order.complex_generator()
    v = z.imag / g.imag
    u = z.real - v * g.real
    out = []
    for part in (u, v):
        t = part * den
        n = int(round(float(t.mid())))
        if not t.contains(n) or float(t.rad()) > 0.25:
            return None
        out.append(Fraction(n, den))
    return tuple(out)


def f_kernel(curve: WeierstrassCurve, lift: FrobeniusLift, k: int = 1, precision: int = 256,
             max_degree: int = 400) -> KernelData:
    """Kernel polynomial of F^k, found through the complex uniformization
    (F^k is multiplication by alpha^k on C / omega_1 O_K) and certified
    exactly by dividing the p^k-division polynomial over Q(g)."""
    from ..heights.local import ArchimedeanPlace, period_data

    order = lift.order
    n = lift.p**k
    deg = (n - 1) // 2
    if (n * n - 1) // 2 > max_degree:
        raise BudgetExceeded(f"division polynomial of degree {(n * n - 1) // 2} exceeds the budget {max_degree}")
    A, B = lift.power(k)
    psi = _k_division_polys(curve, order, n)[n]
    lead = psi.coeff(psi.degree())
    psi_monic = psi * fmpq(1) * (1 / lead[0]) if lead[1] == 0 else None
    prec = precision
    for _ in range(5):
        with working_precision(prec):
            place = ArchimedeanPlace("cyclotomic", order.conductor, 1, Fraction(1, 2))
            per = period_data(curve, place)
            alpha = A + B * order.complex_generator()
            tau = per.tau
            roots = []
            for j in range(1, deg + 1):
                z = acb(j) / alpha
                X = acb.elliptic_p(z, tau) / (per.omega1 * per.omega1)
                roots.append(X - per.b2 / 12)
            poly = [acb(1)]
            for rt in roots:
                new = [acb(0)] * (len(poly) + 1)
                for i, c in enumerate(poly):
                    new[i + 1] += c
                    new[i] -= c * rt
                poly = new
            for e in range(0, 4 * k + 4):
                den = lift.p**e
                coeffs = [_recognize(c, order, den) for c in poly]
                if any(c is None for c in coeffs):
                    continue
                data = KernelData(lift.p, k, (A, B), tuple(coeffs), order)
                if psi_monic is not None and psi_monic.monic_rem(data.polynomial()).is_zero():
                    return data
        prec *= 2
    raise PrecisionExhausted(f"kernel polynomial of F^{k} not recognized")


def kernel_points(curve: WeierstrassCurve, data: KernelData) -> list[CurvePoint]:
    """The points of E[F^k] - O over the smallest cyclotomic field found by
    exact square roots; raises FieldTooSmall if a coordinate leaves Q^cyc
    within the searched conductors."""
    xs = _roots_in_cyclotomic(data)
    pts = []
    for x in xs:
        for m in _conductor_search(data.p, data.order):
            xm = _coerce(x, m)
            rhs = xm * xm * xm + _coerce(curve.a4, m) * xm + _coerce(curve.a6, m)
            y = sqrt_in_field(rhs)
            if y is not None:
                pts.append(CurvePoint(curve, xm, y))
                pts.append(CurvePoint(curve, xm, -y))
                break
        else:
            raise FieldTooSmall(f"y-coordinate over x = {x} not found in the searched cyclotomic fields")
    return pts


def _conductor_search(p: int, order: CMOrder) -> list[int]:
    base = order.conductor
    out = []
    for extra in (1, p, 4, 4 * p, 3 * p, 8 * p, 12 * p, p * p, 4 * p * p):
        m = lcm(base, extra)
        if m not in out and m <= 200:
            out.append(m)
    return out


def _roots_in_cyclotomic(data: KernelData) -> list[CyclotomicNumber]:
    """Roots of the kernel polynomial; handled for the even shape
    prod (x^2 - c_j) of j = 1728 kernels and for linear/quadratic factors."""
    coeffs = data.as_cyclotomic()
    if data.degree == 1:
        return [-coeffs[0]]
    if data.degree == 2:
        c0, c1 = coeffs[0], coeffs[1]
        disc = c1 * c1 - c0 * 4
        for m in _conductor_search(data.p, data.order):
            s = sqrt_in_field(_coerce(disc, m))
            if s is not None:
                return [(_coerce(-c1, m) + s) / 2, (_coerce(-c1, m) - s) / 2]
        raise FieldTooSmall("kernel x-coordinates are not in the searched cyclotomic fields")
    raise BudgetExceeded("explicit kernel points are only built for kernel polynomials of degree <= 2")


# -- Galois automorphisms ----------------------------------------------


@dataclass(frozen=True)
class GaloisAutomorphism:
    """zeta_m -> zeta_m^s."""

    m: int
    s: int

    def __post_init__(self):
        if math.gcd(self.s, self.m) != 1:
            raise PreconditionError(f"{self.s} is not invertible mod {self.m}")
        object.__setattr__(self, "s", self.s % self.m)

    @property
    def order(self) -> int:
        return multiplicative_order(self.s, self.m) if self.m > 1 else 1

    def __call__(self, value):
        if isinstance(value, QuadraticNumber):
            value = as_cyclotomic(value)
        if isinstance(value, CyclotomicNumber) and not value.is_rational():
            if self.m % value.m == 0:
                return value.galois(self.s % value.m)
            M = lcm(self.m, value.m)
            if M != self.m:
                raise PreconditionError(f"value of conductor {value.m} is not in Q(zeta_{self.m})")
        return value

    def compose(self, other: "GaloisAutomorphism") -> "GaloisAutomorphism":
        return GaloisAutomorphism(self.m, self.s * other.s)

    def power(self, k: int) -> "GaloisAutomorphism":
        return GaloisAutomorphism(self.m, pow(self.s, k, self.m))


def galois_apply(aut: GaloisAutomorphism, P: CurvePoint) -> CurvePoint:
    """Coordinate-wise action; the curve must be fixed by aut."""
    for a in P.curve.ainvs:
        if aut(a) != a:
            raise PreconditionError("curve coefficients are not fixed by the automorphism")
    if P.is_infinity:
        return P
    return CurvePoint(P.curve, aut(P.x), aut(P.y))


def frobenius_element(m: int, p: int) -> GaloisAutomorphism:
    if m % p == 0:
        raise InertOrRamifiedPrime(f"{p} ramifies in Q(zeta_{m})")
    return GaloisAutomorphism(m, p)


def split_conductor(m: int, p: int) -> tuple[int, int]:
    """(k, m') with m = p^k m' and p not dividing m'."""
    k = 0
    while m % p == 0:
        m //= p
        k += 1
    return k, m


def inertia_generator(m: int, p: int) -> GaloisAutomorphism:
    """A generator tau of Gal(Q_p(zeta_m) / Q_p(zeta_{m/p})): s = 1 mod m/p,
    of order p (p^2 | m) or p - 1 (p || m)."""
    k, _ = split_conductor(m, p)
    if k == 0:
        raise PreconditionError(f"{p} does not divide {m}")
    target = p if k >= 2 else p - 1
    step = m // p
    for t in range(1, p):
        s = 1 + t * step
        if math.gcd(s, m) == 1 and multiplicative_order(s, m) == target:
            return GaloisAutomorphism(m, s)
    raise AssertionError("inertia subgroup is cyclic")


def places_over(order: CMOrder, p: int, root: int, m: int, N: int = 64) -> list[FinitePlaceData]:
    """Places of Q(zeta_m) (p unramified, conductor(order) | m) above the
    place of the CM field where the generator reduces to ``root``."""
    if m % order.conductor:
        raise FieldTooSmall(f"Q(zeta_{m}) does not contain the CM field")
    out = []
    for w in place_structure(m, p, N):
        img = w.residue_image(order.generator_value(m))
        if img == w.ring.residue(root):
            out.append(w)
    return out


# -- checks on global points ---------------------------------------------


def norm_relation_holds(curve: WeierstrassCurve, lift: FrobeniusLift, P: CurvePoint) -> bool:
    """F(Fbar(P)) = [p]P, exactly."""
    Fbar = lift.order.conj(lift.element)
    lhs = apply_element(curve, lift.order, lift.element, apply_element(curve, lift.order, Fbar, P))
    rhs = curve.scalar_mul(lift.p, cyclotomic_point(P, lift.order.conductor))
    return lhs == rhs


def frobenius_reduction_check(curve: WeierstrassCurve, lift: FrobeniusLift, P: CurvePoint,
                              m: Optional[int] = None) -> dict:
    """reduce_w(F P) against (x^p, y^p) of reduce_w(P) at every w | v0 of Q(zeta_M).

    M is the conductor of P joined with the CM field (or m if given). Returns
    {place label: agrees}.
    """
    from ..curves.reduction import reduce_point

    M = lcm(lift.order.conductor, _field_conductor(P.x, P.y) if not P.is_infinity else 1)
    if m is not None:
        if m % M:
            raise FieldTooSmall(f"P is not defined over Q(zeta_{m})")
        M = m
    if M % lift.p == 0:
        raise PreconditionError(f"{lift.p} ramifies in Q(zeta_{M})")
    Q = cyclotomic_point(P, M)
    FP = cyclotomic_point(apply_endomorphism(curve, lift, Q), M)
    out = {}
    for w in places_over(lift.order, lift.p, lift.root, M):
        a, b = reduce_point(Q, w), reduce_point(FP, w)
        if a.kernel or b.kernel:
            out[w.label] = a.kernel and b.kernel
        else:
            out[w.label] = b.x == a.x ** lift.p and b.y == a.y ** lift.p
    return out
