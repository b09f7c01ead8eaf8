"""Exact arithmetic in quadratic fields Q(sqrt d)."""

from __future__ import annotations

from fractions import Fraction
from typing import Union

from flint import acb, arb, fmpq_poly, fmpz

from .cyclotomic import to_fraction


def squarefree_decomposition(n: int) -> tuple[int, int]:
    """n = s * r^2 with s squarefree (sign kept in s)."""
    if n == 0:
        raise ValueError("zero has no squarefree part")
    sign = -1 if n < 0 else 1
    s, r = 1, 1
    for p, e in fmpz(abs(n)).factor():
        p = int(p)
        r *= p ** (e // 2)
        if e % 2:
            s *= p
    return sign * s, r


class QuadraticNumber:
    """a + b*sqrt(d) with a, b rational and d a squarefree integer != 0, 1."""

    __slots__ = ("a", "b", "d")

    def __init__(self, a, b, d: int):
        if d in (0, 1) or squarefree_decomposition(d)[1] != 1:
            raise ValueError(f"d = {d} is not a squarefree integer other than 0, 1")
        self.a = to_fraction(a)
        self.b = to_fraction(b)
        self.d = int(d)

    @classmethod
    def sqrt(cls, n, d: int | None = None) -> "QuadraticNumber":
        """sqrt(n) for a rational non-square n, as r*sqrt(d)."""
        n = to_fraction(n)
        num = n.numerator * n.denominator
        s, r = squarefree_decomposition(num)
        if d is not None and s != d:
            raise ValueError(f"sqrt({n}) does not lie in Q(sqrt {d})")
        return cls(0, Fraction(r, n.denominator), s)

    def _coerce(self, other):
        if isinstance(other, QuadraticNumber):
            if other.d != self.d:
                raise ValueError(f"mixing Q(sqrt {self.d}) and Q(sqrt {other.d})")
            return other
        if isinstance(other, (int, Fraction)):
            return QuadraticNumber(other, 0, self.d)
        return None

    def __add__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return QuadraticNumber(self.a + o.a, self.b + o.b, self.d)

    __radd__ = __add__

    def __neg__(self):
        return QuadraticNumber(-self.a, -self.b, self.d)

    def __sub__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return QuadraticNumber(self.a - o.a, self.b - o.b, self.d)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return QuadraticNumber(self.a * o.a + self.d * self.b * o.b, self.a * o.b + self.b * o.a, self.d)

    __rmul__ = __mul__

    def conjugate(self) -> "QuadraticNumber":
        return QuadraticNumber(self.a, -self.b, self.d)

    def norm(self) -> Fraction:
        return self.a * self.a - self.d * self.b * self.b

    def trace(self) -> Fraction:
        return 2 * self.a

    def inverse(self) -> "QuadraticNumber":
        n = self.norm()
        if n == 0:
            raise ZeroDivisionError("inverse of zero in a quadratic field")
        return QuadraticNumber(self.a / n, -self.b / n, self.d)

    def __truediv__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return self * o.inverse()

    def __rtruediv__(self, other):
        return QuadraticNumber(to_fraction(other), 0, self.d) * self.inverse()

    def __pow__(self, n: int):
        if n < 0:
            return self.inverse() ** (-n)
        out = QuadraticNumber(1, 0, self.d)
        base = self
        while n:
            if n & 1:
                out = out * base
            base = base * base
            n >>= 1
        return out

    def is_zero(self) -> bool:
        return self.a == 0 and self.b == 0

    def __bool__(self) -> bool:
        return not self.is_zero()

    def is_rational(self) -> bool:
        return self.b == 0

    def to_fraction(self) -> Fraction:
        if self.b:
            raise ValueError(f"{self} is not rational")
        return self.a

    def __eq__(self, other):
        if isinstance(other, QuadraticNumber):
            return (self.a, self.b, self.d) == (other.a, other.b, other.d) or (
                self.b == 0 and other.b == 0 and self.a == other.a
            )
        if isinstance(other, (int, Fraction)):
            return self.b == 0 and self.a == other
        return NotImplemented

    def __hash__(self):
        return hash(self.a) if self.b == 0 else hash((self.a, self.b, self.d))

    def __repr__(self) -> str:
        return f"({self.a})+({self.b})*sqrt({self.d})"

    def minimal_polynomial(self) -> fmpq_poly:
        if self.b == 0:
            return fmpq_poly([_q(-self.a), 1])
        return fmpq_poly([_q(self.norm()), _q(-self.trace()), 1])

    def embeddings(self) -> list[acb]:
        """The two complex images, sqrt(d) taken with positive real/imag part first."""
        r = arb(abs(self.d)).sqrt()
        s = acb(r) if self.d > 0 else acb(0, r)
        a, b = acb(_arb(self.a)), acb(_arb(self.b))
        return [a + b * s, a - b * s]


def _q(x: Fraction):
    from flint import fmpq

    return fmpq(x.numerator, x.denominator)


def _arb(x: Fraction) -> arb:
    return arb(x.numerator) / x.denominator


FieldElement = Union[int, Fraction, QuadraticNumber]


def as_cyclotomic(value, m: int = 1):
    """Rewrite a rational, quadratic or cyclotomic value inside Q(zeta_M) for
    the smallest M divisible by m that contains it."""
    from .cyclotomic import CyclotomicNumber, lcm, sqrt_rational

    if isinstance(value, QuadraticNumber):
        if value.b == 0:
            return CyclotomicNumber.rational(value.a, m)
        root = sqrt_rational(value.d)
        M = lcm(m, root.m)
        return CyclotomicNumber.rational(value.a, M) + root.lift(M) * value.b
    if isinstance(value, CyclotomicNumber):
        M = lcm(m, value.m)
        return value.lift(M)
    return CyclotomicNumber.rational(to_fraction(value), m)
