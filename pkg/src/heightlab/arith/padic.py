"""Unramified places of Q(zeta_m): residue fields, Hensel roots, valuations."""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from itertools import product
from typing import Sequence

from flint import fmpz, fmpz_mod_poly_ctx, fmpz_poly, fq_default_ctx

from ..errors import PrecisionExhausted, RamifiedUnsupported
from .cyclotomic import CyclotomicNumber, euler_phi, to_fraction

DEFAULT_HENSEL_PRECISION = 64
INF = math.inf


def prime_factors(n: int) -> list[int]:
    return sorted(int(p) for p, _ in fmpz(abs(n)).factor()) if abs(n) > 1 else []


def vp(n, p: int) -> float:
    """p-adic valuation of an integer or rational (inf for 0)."""
    q = to_fraction(n)
    if q == 0:
        return INF
    v, a, b = 0, q.numerator, q.denominator
    while a % p == 0:
        a //= p
        v += 1
    while b % p == 0:
        b //= p
        v -= 1
    return v


def multiplicative_order(a: int, m: int) -> int:
    if m == 1:
        return 1
    if math.gcd(a, m) != 1:
        raise ValueError(f"{a} is not a unit mod {m}")
    k, x = 1, a % m
    while x != 1:
        x = (x * a) % m
        k += 1
    return k


class UnramifiedRing:
    """(Z/p^N)[t]/(g) with g a monic lift of an irreducible modulus mod p.

    This is W(F_{p^f}) truncated at p^N. Elements are fmpz_mod_poly values of
    degree < f.
    """

    def __init__(self, p: int, residue_ctx, N: int):
        self.p, self.N = p, N
        self.f = residue_ctx.degree()
        self.residue = residue_ctx
        self.modulus_int = p**N
        self.poly_ctx = fmpz_mod_poly_ctx(self.modulus_int)
        self.g = self.poly_ctx([int(c) for c in residue_ctx.modulus().coeffs()])

    def __call__(self, coeffs) -> object:
        if isinstance(coeffs, int):
            coeffs = [coeffs]
        return self.poly_ctx([int(c) for c in coeffs]) % self.g

    def mul(self, a, b):
        return a.mul_mod(b, self.g)

    def pow(self, a, e: int):
        return a.pow_mod(e, self.g)

    def coefficients(self, a) -> list[int]:
        cs = [int(c) for c in a.coeffs()]
        return cs + [0] * (self.f - len(cs))

    def to_residue(self, a):
        return self.residue([c % self.p for c in self.coefficients(a)])

    def lift_residue(self, r):
        return self([int(c) for c in r.polynomial().coeffs()])

    def valuation(self, a) -> float:
        """min p-adic valuation of the coefficients; inf if zero mod p^N."""
        best = INF
        for c in self.coefficients(a):
            if c:
                best = min(best, vp(c, self.p))
        return best

    def inverse(self, a):
        """Inverse of a unit by Newton iteration y <- y(2 - a y)."""
        r = self.to_residue(a)
        if r == 0:
            raise ZeroDivisionError("element is not a unit")
        y = self.lift_residue(r.inverse())
        prec = 1
        two = self(2)
        while prec < self.N:
            y = self.mul(y, two - self.mul(a, y))
            prec *= 2
        return y

    def evaluate(self, coeffs: Sequence[int], x):
        acc = self(0)
        for c in reversed(list(coeffs)):
            acc = self.mul(acc, x) + self(int(c))
        return acc


@lru_cache(maxsize=None)
def residue_field(p: int, f: int):
    return fq_default_ctx(p, f, "t")


def _primitive_mth_root(ctx, p: int, f: int, m: int):
    """Deterministic search: first element z (in lexicographic coefficient
    order) such that z^((q-1)/m) has exact order m."""
    q = p**f
    if (q - 1) % m:
        raise ValueError(f"F_{p}^{f} has no primitive {m}-th root of unity")
    ells = prime_factors(m)
    for digits in product(range(p), repeat=f):
        z = ctx(list(reversed(digits)))
        if z == 0:
            continue
        r = z ** ((q - 1) // m)
        if m == 1 or all(r ** (m // ell) != 1 for ell in ells):
            return r
    raise AssertionError("unreachable: the multiplicative group is cyclic")


@dataclass(frozen=True)
class FinitePlaceData:
    """An unramified place w of Q(zeta_m) above p.

    ``root`` is the image of zeta_m in the residue field F_{p^f};
    ``hensel_root`` is its lift to a root of Phi_m modulo p^N.
    """

    p: int
    m: int
    f: int
    exponent: int
    root: object
    hensel_root: object
    ring: UnramifiedRing
    N: int

    @property
    def weight(self) -> Fraction:
        """d_w = [L_w : Q_p] / [L : Q]."""
        return Fraction(self.f, euler_phi(self.m))

    @property
    def label(self) -> str:
        return f"p={self.p},m={self.m},k={self.exponent}"

    def residue_image(self, alpha) -> object:
        """Reduction of a w-integral element into F_{p^f}."""
        ctx = self.ring.residue
        if not isinstance(alpha, CyclotomicNumber):
            q = to_fraction(alpha)
            if q.denominator % self.p == 0:
                raise ValueError("element is not p-integral")
            return ctx(q.numerator * pow(q.denominator, -1, self.p) % self.p)
        if alpha.m != self.m and self.m % alpha.m == 0:
            alpha = alpha.lift(self.m)
        if alpha.m != self.m:
            raise ValueError(f"element of conductor {alpha.m} is not in Q(zeta_{self.m})")
        if any(c.denominator % self.p == 0 for c in alpha.coefficients):
            return self._residue_via_local(alpha)
        acc = ctx(0)
        for c in reversed(alpha.coefficients):
            acc = acc * self.root + ctx(c.numerator * pow(c.denominator, -1, self.p) % self.p)
        return acc

    def _residue_via_local(self, alpha):
        # w-integral but not p-integral: p-power denominators that only
        # the other places over p see
        img, vden = self.local_image(alpha)
        den = 1
        for c in alpha.coefficients:
            den = den * c.denominator // math.gcd(den, c.denominator)
        unit = den // self.p**vden
        v = self.ring.valuation(img)
        if v == INF and vden >= self.N:
            raise PrecisionExhausted(f"denominator p^{vden} exceeds the precision p^{self.N}")
        if v < vden:
            raise ValueError(f"element is not integral at {self.label}")
        if v == INF:
            return self.ring.residue(0)
        q = self.p**vden
        r = self.ring.residue([(c // q) % self.p for c in self.ring.coefficients(img)])
        return r / self.ring.residue(unit % self.p)

    def local_image(self, alpha):
        """Image of alpha * D in W/p^N together with v_p(D) for a common
        denominator D (so that the image is integral)."""
        if not isinstance(alpha, CyclotomicNumber):
            alpha = CyclotomicNumber(self.m, [to_fraction(alpha)])
        if alpha.m != self.m:
            alpha = alpha.lift(self.m)
        den = 1
        for c in alpha.coefficients:
            den = den * c.denominator // math.gcd(den, c.denominator)
        ints = [int(c * den) for c in alpha.coefficients]
        return self.ring.evaluate(ints, self.hensel_root), vp(den, self.p)

    def with_precision(self, N: int) -> "FinitePlaceData":
        return _build_place(self.p, self.m, self.exponent, N)


def _build_place(p: int, m: int, k: int, N: int) -> FinitePlaceData:
    f = multiplicative_order(p, m)
    ctx = residue_field(p, f)
    r = _primitive_mth_root(ctx, p, f, m) ** k
    ring = UnramifiedRing(p, ctx, N)
    phi = [int(c) for c in fmpz_poly.cyclotomic(m).coeffs()]
    dphi = [i * phi[i] for i in range(1, len(phi))]
    x = ring.lift_residue(r)
    prec = 1
    while prec < N + 1:
        x = x - ring.mul(ring.evaluate(phi, x), ring.inverse(ring.evaluate(dphi, x)))
        prec *= 2
    if ring.valuation(ring.evaluate(phi, x)) < N:
        raise PrecisionExhausted("Hensel lift of the cyclotomic root did not converge")
    return FinitePlaceData(p, m, f, k, r, x, ring, N)


def coset_representatives(m: int, p: int) -> list[int]:
    """Smallest element of each coset of <p> in (Z/m)^x."""
    seen, reps = set(), []
    for k in range(1, max(m, 2)):
        if math.gcd(k, m) != 1 or k in seen:
            continue
        reps.append(k)
        x = k
        while True:
            seen.add(x)
            x = (x * p) % m if m > 1 else x
            if x in seen:
                break
    return reps if m > 1 else [1]


def place_structure(m: int, p: int, N: int = DEFAULT_HENSEL_PRECISION) -> list[FinitePlaceData]:
    """All places of Q(zeta_m) over an unramified prime p."""
    if m < 1:
        raise ValueError("conductor must be positive")
    if m % p == 0:
        raise RamifiedUnsupported(f"p = {p} ramifies in Q(zeta_{m})")
    return [_build_place(p, m, k, N) for k in coset_representatives(m, p)]


def valuation(alpha, place: FinitePlaceData, max_doublings: int = 4) -> float:
    """w-adic valuation, normalized by v(p) = 1; +inf for 0."""
    if isinstance(alpha, CyclotomicNumber) and alpha.is_zero():
        return INF
    if not isinstance(alpha, CyclotomicNumber):
        return vp(alpha, place.p)
    pl = place
    for _ in range(max_doublings + 1):
        img, vden = pl.local_image(alpha)
        v = pl.ring.valuation(img)
        if v < INF:
            return int(v - vden)
        pl = pl.with_precision(2 * pl.N)
    raise PrecisionExhausted(f"valuation exceeds p^{pl.N // 2} at {place.label}")


def hensel_root(coeffs: Sequence[int], x0: int, p: int, N: int) -> int:
    """Newton lift of a simple root x0 of an integer polynomial mod p^N."""
    mod = p**N
    f = fmpz_poly([int(c) for c in coeffs])
    df = f.derivative()
    x = x0 % p
    if int(f(x)) % p:
        raise ValueError(f"{x0} is not a root mod {p}")
    if int(df(x)) % p == 0:
        raise ValueError("root is not simple mod p")
    prec = 1
    while prec < N:
        prec = min(2 * prec, N)
        m = p**prec
        x = (x - int(f(x)) * pow(int(df(x)), -1, m)) % m
    return x % mod
