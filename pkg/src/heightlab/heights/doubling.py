"""Canonical height as the doubling limit (1/2) lim 4^-n h(x(2^n P)).

Write x(P) = [a : b] and double homogeneously with
F = a^4 - b4 a^2 b^2 - 2 b6 a b^3 - b8 b^4 and G = 4a^3 b + b2 a^2 b^2 + 2 b4 a b^3 + b6 b^4.
Then

    4^-n h(x_n) = h(x_0) + sum_{k<n} 4^-(k+1) sum_v d_v Psi_v(x_k),
    Psi_v = log max(|F|_v, |G|_v) - 4 log max(|a|_v, |b|_v),

so the limit only needs x_k to working precision at each place, never the
exact (exponentially long) coordinates. On an integral model Psi_p = 0 at
every prime not dividing the denominators of the Bezout relations between
F and G, and |Psi_v| is bounded by constants computed from those relations;
the tail after K steps is at most C 4^-K / 6.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Optional

from flint import acb, arb, fmpq, fmpq_poly

from ..arith.balls import DEFAULT_PREC, MAX_DOUBLINGS, HeightValue, log_max, to_arb, weil_height, working_precision
from ..arith.cyclotomic import CyclotomicNumber, descend_all, embed, embedding_indices, euler_phi, to_fraction
from ..arith.padic import place_structure, vp
from ..arith.quadratic import QuadraticNumber
from ..curves.reduction import _integral_model
from ..curves.weierstrass import CurvePoint, WeierstrassCurve
from ..errors import CoordinateBlowup, PrecisionExhausted, PreconditionError

DEFAULT_RADIUS = 1e-12
DEFAULT_BUDGET_DIGITS = 20000


def _frac(c) -> Fraction:
    return Fraction(int(c.p), int(c.q)) if isinstance(c, fmpq) else to_fraction(c)


@dataclass(frozen=True)
class DoublingData:
    """Integral model, duplication forms and the Psi bounds for a curve."""

    model: WeierstrassCurve
    urst: tuple
    F: tuple
    G: tuple
    arch_bound: float
    prime_bounds: tuple

    @property
    def active_primes(self) -> tuple:
        return tuple(p for p, _ in self.prime_bounds)

    @property
    def constant(self) -> float:
        """C with |sum_v d_v Psi_v| <= C (rounded up)."""
        return self.arch_bound + sum(e * math.log(p) for p, e in self.prime_bounds) + 1e-12

    def tail(self, K: int) -> float:
        return self.constant * 4.0 ** (-K) / 6


def _bezout(f: fmpq_poly, g: fmpq_poly) -> tuple[fmpq_poly, fmpq_poly]:
    d, s, t = f.xgcd(g)
    c = d.coeffs()[0]
    return s / c, t / c


@lru_cache(maxsize=256)
def doubling_data(curve: WeierstrassCurve) -> DoublingData:
    model, urst = _integral_model(curve)
    b2, b4, b6, b8 = (to_fraction(c) for c in (model.b2, model.b4, model.b6, model.b8))
    # coefficient of a^(4-i) b^i
    F = (Fraction(1), Fraction(0), -b4, -2 * b6, -b8)
    G = (Fraction(0), Fraction(4), b2, 2 * b4, b6)
    q = lambda c: fmpq(c.numerator, c.denominator)
    # chart |a| <= |b|: polynomials in x = a/b (coefficients reversed)
    fx = fmpq_poly([q(c) for c in reversed(F)])
    gx = fmpq_poly([q(c) for c in reversed(G)])
    # chart |b| <= |a|: polynomials in t = b/a
    ft = fmpq_poly([q(c) for c in F])
    gt = fmpq_poly([q(c) for c in G])
    bez = [_bezout(fx, gx), _bezout(ft, gt)]
    coeffs = [_frac(c) for s, t in bez for c in list(s.coeffs()) + list(t.coeffs())]
    sums = [sum(abs(_frac(c)) for c in list(s.coeffs()) + list(t.coeffs())) for s, t in bez]
    upper = max(sum(abs(c) for c in F), sum(abs(c) for c in G))
    arch = max(math.log(float(upper)), math.log(float(max(sums))), 0.0)
    primes = {}
    for c in coeffs:
        if c:
            for p, _ in _factor(c.denominator):
                primes[p] = max(primes.get(p, 0), -vp(c, p))
    return DoublingData(model, urst, F, G, arch * (1 + 1e-12), tuple(sorted(primes.items())))


def _factor(n: int):
    from flint import fmpz

    return [(int(p), int(e)) for p, e in fmpz(n).factor()] if n > 1 else []


def _steps_for(data: DoublingData, radius: float) -> int:
    # tail <= radius / 2 leaves room for rounding of the tracked part
    return max(4, math.ceil(math.log(max(data.constant, 1e-300) / (3 * radius)) / math.log(4)) + 1)


def _homog(coeffs, A, B):
    """Evaluate a quartic form sum c_i A^(4-i) B^i."""
    a2, b2 = A * A, B * B
    powers_a = [a2 * a2, a2 * A, a2, A, 1]
    powers_b = [1, B, b2, b2 * B, b2 * b2]
    acc = 0
    for c, pa, pb in zip(coeffs, powers_a, powers_b):
        if c:
            acc = acc + c * pa * pb
    return acc


# -- archimedean tracking --------------------------------------------------


def _arch_psi_sum(data: DoublingData, start, K: int, prec: int, embed_fn=None) -> arb:
    """sum_{k<K} 4^-(k+1) Psi_inf(x_k) with x_0 = start (a pair of balls)."""
    F = [to_arb(c) for c in data.F]
    G = [to_arb(c) for c in data.G]
    A, B = start
    total = arb(0)
    scale = arb(1)
    for _ in range(K):
        m = log_max(abs(A), abs(B))
        fa, gb = _homog(F, A, B), _homog(G, A, B)
        psi = log_max(abs(fa), abs(gb)) - 4 * m
        scale = scale / 4
        total += scale * psi
        # renormalize so the larger coordinate is about 1
        if abs(fa).mid() >= abs(gb).mid():
            A, B = 1, gb / fa
        else:
            A, B = fa / gb, 1
        A, B = _ball(A), _ball(B)
    return total


def _ball(v):
    return v if isinstance(v, (arb, acb)) else arb(v)


# -- p-adic tracking over Q --------------------------------------------------


def _padic_psi_coefficient(data: DoublingData, p: int, e_max: int, a: int, b: int, K: int) -> Fraction:
    """sum_{k<K} 4^-(k+1) Psi_p(x_k) / log p, exactly."""
    F = [int(c) for c in data.F]
    G = [int(c) for c in data.G]
    M = K * max(e_max, 1) + 40
    mod = p**M
    v0 = min(vp(a, p), vp(b, p))
    a, b = (a // p**v0) % mod, (b // p**v0) % mod
    prec = M
    total = Fraction(0)
    for k in range(K):
        fa = _homog(F, a, b) % mod
        gb = _homog(G, a, b) % mod
        e = min(_vp_trunc(fa, p, prec), _vp_trunc(gb, p, prec))
        if e >= prec:
            raise PrecisionExhausted(f"p-adic doubling lost all precision at {p}")
        if e > e_max:
            raise AssertionError("Bezout bound violated")
        total -= Fraction(e, 4 ** (k + 1))
        a, b = (fa // p**e) % mod, (gb // p**e) % mod
        prec -= e
    return total


def _vp_trunc(n: int, p: int, cap: int) -> int:
    if n == 0:
        return cap
    v = 0
    while n % p == 0 and v < cap:
        n //= p
        v += 1
    return v


def height_from_rational_x(
    curve: WeierstrassCurve,
    x: Optional[Fraction],
    precision: int = DEFAULT_PREC,
    radius: float = DEFAULT_RADIUS,
) -> HeightValue:
    """h-hat of any point with x-coordinate x (x = None means P = O).

    x is taken on ``curve``; it is moved to the integral model first.
    """
    if x is None:
        return HeightValue.zero()
    data = doubling_data(curve)
    u, r, _s, _t = data.urst
    x0 = (to_fraction(x) - r) / (u * u)
    a, b = x0.numerator, x0.denominator
    K = _steps_for(data, radius)
    tail = data.tail(K)
    logs = {}
    for p, e in data.prime_bounds:
        c = _padic_psi_coefficient(data, p, e, a, b, K)
        if c:
            logs[p] = c / 2
    prec = precision + 2 * K + 32
    for _ in range(MAX_DOUBLINGS + 1):
        with working_precision(prec):
            h0 = arb(max(abs(a), b)).log()
            try:
                arch = _arch_psi_sum(data, (arb(a), arb(b)), K, prec)
            except PrecisionExhausted:
                prec *= 2
                continue
            exact_part = HeightValue.from_logs(logs, prec).ball
            ball = (h0 + arch) / 2 + exact_part + arb(0, tail)
            hv = HeightValue(ball)
            if hv.radius <= radius:
                return hv
        prec *= 2
    raise PrecisionExhausted(f"doubling height not certified to {radius:g}")


# -- points over number fields -----------------------------------------------


def _as_quadratic(c):
    """Express a value of Q(zeta_3), Q(zeta_4) = Q(zeta_3), Q(i) in a + b sqrt(d) form."""
    if isinstance(c, QuadraticNumber):
        return c
    if isinstance(c, CyclotomicNumber):
        if c.is_rational():
            return c.to_fraction()
        if c.m == 4:
            a, b = c.coefficients
            return QuadraticNumber(a, b, -1)
        if c.m in (3, 6):
            # zeta_3 = (-1 + sqrt(-3))/2, zeta_6 = (1 + sqrt(-3))/2
            a, b = c.coefficients
            sgn = -1 if c.m == 3 else 1
            return QuadraticNumber(a + sgn * b / 2, b / 2, -3)
    return None


def _conj(c):
    return c.conjugate() if isinstance(c, QuadraticNumber) else c


def _x_of(P: CurvePoint):
    if P.is_infinity:
        return None
    x = P.x
    if isinstance(x, (QuadraticNumber, CyclotomicNumber)):
        return x.to_fraction()
    return to_fraction(x)


def height_quadratic(curve: WeierstrassCurve, P: CurvePoint, precision: int, radius: float) -> HeightValue:
    """4 h(P) = h(P + sP) + h(P - sP); both points have rational x."""
    x, y = _as_quadratic(P.x), _as_quadratic(P.y)
    Pq = CurvePoint(curve, x, y)
    Ps = CurvePoint(curve, _conj(x), _conj(y))
    S, R = curve.add(Pq, Ps), curve.add(Pq, curve.neg(Ps))
    hs = height_from_rational_x(curve, _x_of(S), precision, radius)
    hr = height_from_rational_x(curve, _x_of(R), precision, radius)
    return (hs + hr).scale(Fraction(1, 4))


def _is_rational_value(c) -> bool:
    return isinstance(c, (int, Fraction)) or (hasattr(c, "is_rational") and c.is_rational())


def canonical_height_doubling(
    curve: WeierstrassCurve,
    P: CurvePoint,
    precision: int = DEFAULT_PREC,
    radius: float = DEFAULT_RADIUS,
    budget_digits: int = DEFAULT_BUDGET_DIGITS,
) -> HeightValue:
    """Canonical height (1/2) lim 4^-n h(x(2^n P)) for P over Q, a quadratic
    field or Q(zeta_m), with a rigorous radius."""
    if not curve.is_rational():
        raise PreconditionError("canonical_height_doubling needs a curve over Q")
    if P.is_infinity:
        return HeightValue.zero()
    if isinstance(P.x, CyclotomicNumber) or isinstance(P.y, CyclotomicNumber):
        x, y = descend_all([P.x, P.y])
        P = CurvePoint(curve, x, y)
    if _is_rational_value(P.x):
        return height_from_rational_x(curve, _x_of(P), precision, radius)
    if _as_quadratic(P.x) is not None and _as_quadratic(P.y) is not None:
        return height_quadratic(curve, P, precision, radius)
    return height_cyclotomic(curve, P, precision, radius, budget_digits)


def _doubled_x(curve: WeierstrassCurve, x):
    num = x**4 - curve.b4 * x * x - 2 * curve.b6 * x - curve.b8
    den = 4 * x**3 + curve.b2 * x * x + 2 * curve.b4 * x + curve.b6
    if den == 0:
        return None
    return num / den


def _size_digits(x) -> int:
    cs = x.coefficients if isinstance(x, CyclotomicNumber) else [to_fraction(x)]
    bits = sum(abs(c.numerator).bit_length() + c.denominator.bit_length() for c in cs)
    return int(bits * 0.30103) + 1


def height_cyclotomic(
    curve: WeierstrassCurve, P: CurvePoint, precision: int, radius: float, budget_digits: int
) -> HeightValue:
    """Points over Q(zeta_m).

    Per-place tracking is used when every active prime is unramified in
    Q(zeta_m); otherwise exact doubling with Weil heights, which raises
    CoordinateBlowup once the coordinates exceed ``budget_digits``.
    """
    data = doubling_data(curve)
    u, r, _s, _t = data.urst
    x = (P.x - r) / (u * u)
    m = x.m
    if all(m % p for p in data.active_primes):
        return _height_cyclotomic_tracked(data, x, precision, radius)
    model = data.model
    K_needed = _steps_for(data, radius)
    xn = x
    for n in range(K_needed + 1):
        if xn is None:
            return HeightValue.zero().__add__(HeightValue(arb(0, data.tail(n))))
        if _size_digits(xn) > budget_digits:
            raise CoordinateBlowup(
                f"exact doubling exceeded {budget_digits} digits after {n} steps; "
                f"reachable radius {data.tail(n):.3g}"
            )
        if n == K_needed:
            break
        xn = _doubled_x(model, xn)
    hx = weil_height(xn, precision, radius / 4)
    return HeightValue(hx.ball * to_arb(Fraction(1, 2 * 4**K_needed)) + arb(0, data.tail(K_needed)))


def _height_cyclotomic_tracked(data: DoublingData, x: CyclotomicNumber, precision: int, radius: float) -> HeightValue:
    m = x.m
    K = _steps_for(data, radius)
    tail = data.tail(K)
    phi = euler_phi(m)
    logs = {}
    for p, e_max in data.prime_bounds:
        Mprec = K * max(e_max, 1) + 40
        acc = Fraction(0)
        for place in place_structure(m, p, Mprec):
            acc += place.weight * _padic_psi_place(data, place, x, e_max, K)
        if acc:
            logs[p] = acc / 2
    prec = precision + 2 * K + 32
    for _ in range(MAX_DOUBLINGS + 1):
        with working_precision(prec):
            try:
                h0 = weil_height(x, prec, radius / 8).ball
                arch = arb(0)
                for k in embedding_indices(m):
                    arch += _arch_psi_sum(data, (embed(x, k), acb(1)), K, prec)
                arch = arch / phi
            except PrecisionExhausted:
                prec *= 2
                continue
            ball = (h0 + arch) / 2 + HeightValue.from_logs(logs, prec).ball + arb(0, tail)
            hv = HeightValue(ball)
            if hv.radius <= radius:
                return hv
        prec *= 2
    raise PrecisionExhausted(f"doubling height not certified to {radius:g}")


def _padic_psi_place(data: DoublingData, place, x: CyclotomicNumber, e_max: int, K: int) -> Fraction:
    ring = place.ring
    img, vden = place.local_image(x)
    den = 1
    for c in x.coefficients:
        den = den * c.denominator // math.gcd(den, c.denominator)
    a, b = img, ring(den)
    shift = min(ring.valuation(a), ring.valuation(b))
    a, b = _shift_down(ring, a, int(shift)), _shift_down(ring, b, int(shift))
    F = [int(c) for c in data.F]
    G = [int(c) for c in data.G]
    prec = ring.N - int(shift)
    total = Fraction(0)
    for k in range(K):
        fa = _ring_form(ring, F, a, b)
        gb = _ring_form(ring, G, a, b)
        e = int(min(ring.valuation(fa), ring.valuation(gb), prec))
        if e >= prec:
            raise PrecisionExhausted(f"p-adic doubling lost all precision at {place.label}")
        total -= Fraction(e, 4 ** (k + 1))
        a, b = _shift_down(ring, fa, e), _shift_down(ring, gb, e)
        prec -= e
    return total


def _shift_down(ring, a, e: int):
    if e == 0:
        return a
    return ring([c // ring.p**e for c in ring.coefficients(a)])


def _ring_form(ring, coeffs, A, B):
    a2, b2 = ring.mul(A, A), ring.mul(B, B)
    pa = [ring.mul(a2, a2), ring.mul(a2, A), a2, A, ring(1)]
    pb = [ring(1), B, b2, ring.mul(b2, B), ring.mul(b2, b2)]
    acc = ring(0)
    for c, x, y in zip(coeffs, pa, pb):
        if c:
            acc = acc + ring.mul(ring.mul(x, y), ring(c % ring.modulus_int))
    return acc
