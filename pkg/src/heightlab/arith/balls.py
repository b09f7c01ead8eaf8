"""Ball arithmetic helpers, HeightValue, Mahler measure and Weil height."""

from __future__ import annotations

import contextlib
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping, Optional

import flint
from flint import arb, fmpq, fmpz_poly

from ..errors import PrecisionExhausted

DEFAULT_PREC = 96
MAX_DOUBLINGS = 4
# floor for sums and scalings, so combining values never rounds away the
# precision they were computed at
ARITH_PREC = 160


@contextlib.contextmanager
def working_precision(bits: int):
    """Temporarily set flint's global working precision (in bits)."""
    old = flint.ctx.prec
    flint.ctx.prec = int(bits)
    try:
        yield
    finally:
        flint.ctx.prec = old


def to_arb(q) -> arb:
    if isinstance(q, arb):
        return q
    if isinstance(q, Fraction):
        return arb(q.numerator) / q.denominator
    if isinstance(q, fmpq):
        return arb(q)
    return arb(q)


def interval(lo: arb, hi: arb) -> arb:
    """Smallest-ish ball containing [lo, hi] (both endpoints as balls)."""
    lo, hi = lo.lower(), hi.upper()
    mid = (lo + hi) / 2
    return mid + arb(0, ((hi - lo) / 2).upper())


def log_plus(a: arb) -> arb:
    """Ball for max(0, log a), a >= 0; log+(0) = 0."""
    lo, hi = a.lower(), a.upper()
    lo_v = lo.log() if lo > 1 else arb(0)
    hi_v = hi.log() if hi > 1 else arb(0)
    if lo > 1:
        return a.log()
    if not hi > 1:
        return arb(0)
    return interval(lo_v, hi_v)


def log_abs(z) -> arb:
    """log|z| for a real or complex ball certainly nonzero."""
    a = abs(z)
    if not a > 0:
        raise PrecisionExhausted("cannot certify a nonzero absolute value")
    return a.log()


def log_max(*vals: arb) -> arb:
    """log max(vals) for nonnegative balls, at least one certainly positive."""
    lo, hi = vals[0].lower(), vals[0].upper()
    for v in vals[1:]:
        # endpoints are exact, so these comparisons are decisive
        if v.lower() > lo:
            lo = v.lower()
        if v.upper() > hi:
            hi = v.upper()
    if not lo > 0:
        raise PrecisionExhausted("log max of values not certified positive")
    return interval(lo.log(), hi.log())


def log_combination_ball(terms: Mapping[int, Fraction]) -> arb:
    acc = arb(0)
    for p, c in sorted(terms.items()):
        if c:
            acc += to_arb(c) * arb(p).log()
    return acc


@dataclass(frozen=True)
class HeightValue:
    """A real number with a rigorous enclosure.

    ``ball`` always encloses the exact value. When the quantity is an exact
    rational combination of logarithms of primes (non-archimedean local
    heights), ``exact`` records it as ``{p: c}`` meaning sum c*log p.
    """

    ball: arb
    exact: Optional[Mapping[int, Fraction]] = field(default=None, compare=False)

    @classmethod
    def from_logs(cls, terms: Mapping[int, Fraction], prec: int = DEFAULT_PREC) -> "HeightValue":
        clean = {int(p): Fraction(c) for p, c in terms.items() if c}
        with working_precision(prec):
            return cls(log_combination_ball(clean), clean)

    @classmethod
    def zero(cls) -> "HeightValue":
        return cls(arb(0), {})

    @classmethod
    def from_fraction(cls, q: Fraction) -> "HeightValue":
        return cls(to_arb(Fraction(q)))

    @property
    def value(self) -> float:
        return float(self.ball.mid())

    @property
    def radius(self) -> float:
        r = self.ball.rad()
        # round the radius up so the float interval still encloses
        return float(arb(r).upper()) * (1 + 2 ** -50) if r != 0 else 0.0

    @property
    def lower(self) -> float:
        return float(self.ball.lower())

    @property
    def upper(self) -> float:
        return float(self.ball.upper())

    def is_exact(self) -> bool:
        return self.exact is not None

    def log_coefficient(self, p: int) -> Fraction:
        if self.exact is None:
            raise ValueError("height value is not an exact log combination")
        return Fraction(self.exact.get(p, 0))

    def _combine(self, other, sign: int) -> "HeightValue":
        if isinstance(other, (int, Fraction)):
            other = HeightValue(to_arb(Fraction(other)), {} if other == 0 else None)
        with working_precision(max(flint.ctx.prec, ARITH_PREC)):
            ball = self.ball + other.ball if sign > 0 else self.ball - other.ball
        exact = None
        if self.exact is not None and other.exact is not None:
            exact = dict(self.exact)
            for p, c in other.exact.items():
                exact[p] = exact.get(p, Fraction(0)) + sign * c
            exact = {p: c for p, c in exact.items() if c}
        return HeightValue(ball, exact)

    def __add__(self, other):
        return self._combine(other, 1)

    __radd__ = __add__

    def __sub__(self, other):
        return self._combine(other, -1)

    def __neg__(self):
        return HeightValue(-self.ball, None if self.exact is None else {p: -c for p, c in self.exact.items()})

    def scale(self, q) -> "HeightValue":
        q = Fraction(q)
        exact = None if self.exact is None else {p: c * q for p, c in self.exact.items() if c * q}
        with working_precision(max(flint.ctx.prec, ARITH_PREC)):
            return HeightValue(self.ball * to_arb(q), exact)

    def __mul__(self, q):
        if isinstance(q, (int, Fraction)):
            return self.scale(q)
        return NotImplemented

    __rmul__ = __mul__

    def contains(self, x) -> bool:
        return bool(self.ball.contains(to_arb(x) if not isinstance(x, arb) else x))

    def contains_zero(self) -> bool:
        return bool(self.ball.contains(0))

    def certainly_ge(self, other, slack: float = 0.0) -> bool:
        """self >= other holds for every point of both enclosures (up to slack)."""
        o = other.ball if isinstance(other, HeightValue) else to_arb(other)
        return bool(self.ball + slack >= o)

    def possibly_ge(self, other) -> bool:
        o = other.ball if isinstance(other, HeightValue) else to_arb(other)
        return not bool(self.ball < o)

    def __repr__(self) -> str:
        tag = "" if self.exact is None else f", exact={dict(sorted(self.exact.items()))}"
        return f"HeightValue({self.value!r} +/- {self.radius:.3g}{tag})"

    def to_dict(self) -> dict:
        d = {"value": format_float(self.value), "radius": format_float(self.radius)}
        if self.exact is not None:
            d["log_terms"] = {str(p): str(c) for p, c in sorted(self.exact.items())}
        return d


def format_float(x: float) -> str:
    return repr(float(x))


def union_heights(vals) -> HeightValue:
    vals = list(vals)
    lo = min((v.ball.lower() for v in vals), key=float)
    hi = max((v.ball.upper() for v in vals), key=float)
    return HeightValue(interval(lo, hi))


def _as_fmpz_poly(poly) -> fmpz_poly:
    if isinstance(poly, fmpz_poly):
        return poly
    return fmpz_poly([int(c) for c in poly])


def mahler_measure(poly, precision: int = DEFAULT_PREC, radius: Optional[float] = None) -> HeightValue:
    """log M(poly) = log|lead| + sum log+|root| with certified root balls.

    Roots come from flint's certified isolation; when the enclosure is wider
    than ``radius`` the precision is doubled, up to MAX_DOUBLINGS times.
    """
    f = _as_fmpz_poly(poly)
    if f.is_zero():
        raise ValueError("Mahler measure of the zero polynomial")
    target = radius if radius is not None else 2.0 ** (-(precision // 2))
    prec = precision
    for _ in range(MAX_DOUBLINGS + 1):
        with working_precision(prec):
            try:
                total = arb(abs(int(f.leading_coefficient()))).log()
                if f.degree() > 0:
                    for root, mult in f.complex_roots():
                        total += mult * log_plus(abs(root))
            except (ValueError, PrecisionExhausted):
                prec *= 2
                continue
            hv = HeightValue(total)
            if hv.radius <= target:
                return hv
        prec *= 2
    raise PrecisionExhausted(f"Mahler measure of degree-{f.degree()} polynomial not certified to {target:g}")


def weil_height(alpha, precision: int = DEFAULT_PREC, radius: Optional[float] = None) -> HeightValue:
    """Absolute logarithmic Weil height of a rational, quadratic or cyclotomic number."""
    from .cyclotomic import CyclotomicNumber, minimal_polynomial, primitive_integer_polynomial, to_fraction
    from .quadratic import QuadraticNumber, as_cyclotomic

    if isinstance(alpha, QuadraticNumber):
        alpha = alpha.to_fraction() if alpha.is_rational() else as_cyclotomic(alpha)
    if not isinstance(alpha, CyclotomicNumber) or alpha.is_rational():
        q = to_fraction(alpha.to_fraction() if isinstance(alpha, CyclotomicNumber) else alpha)
        if q == 0:
            return HeightValue.zero()
        with working_precision(precision):
            return HeightValue(arb(max(abs(q.numerator), q.denominator)).log())
    mp = minimal_polynomial(alpha)
    f = primitive_integer_polynomial(mp)
    mm = mahler_measure(f, precision, radius)
    with working_precision(precision):
        return HeightValue(mm.ball / f.degree())
