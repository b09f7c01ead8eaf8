"""Exact arithmetic in cyclotomic fields Q(zeta_m).

Elements are stored as rational polynomials in zeta_m reduced modulo the
m-th cyclotomic polynomial, so every element has a unique representative
of degree < phi(m).
"""

from __future__ import annotations

from fractions import Fraction
from functools import lru_cache
from math import gcd
from typing import Iterable, Mapping, Sequence, Union

from flint import acb, arb, fmpq, fmpq_mat, fmpq_poly, fmpz_poly

from .balls import working_precision

Rational = Union[int, Fraction]


def euler_phi(m: int) -> int:
    result, n, q = m, m, 2
    while q * q <= n:
        if n % q == 0:
            while n % q == 0:
                n //= q
            result -= result // q
        q += 1
    if n > 1:
        result -= result // n
    return result


def lcm(a: int, b: int) -> int:
    return a // gcd(a, b) * b


@lru_cache(maxsize=None)
def cyclotomic_polynomial(m: int) -> fmpq_poly:
    """Phi_m as an fmpq_poly (cached; entries are never mutated)."""
    if m < 1:
        raise ValueError("conductor must be positive")
    return fmpq_poly(fmpz_poly.cyclotomic(m).coeffs())


def to_fraction(c) -> Fraction:
    if isinstance(c, Fraction):
        return c
    if isinstance(c, int):
        return Fraction(c)
    if isinstance(c, fmpq):
        return Fraction(int(c.p), int(c.q))
    return Fraction(c)


def _to_fmpq(c: Rational) -> fmpq:
    c = to_fraction(c)
    return fmpq(c.numerator, c.denominator)


class CyclotomicNumber:
    """An element of Q(zeta_m), immutable.

    Mixed arithmetic with ``int``/``Fraction`` is supported; two cyclotomic
    numbers of different conductor are first lifted to the lcm conductor.
    """

    __slots__ = ("m", "_poly")

    def __init__(self, m: int, coeffs: Union[Sequence[Rational], Mapping[int, Rational], fmpq_poly] = ()):
        if m < 1:
            raise ValueError("conductor must be positive")
        self.m = m
        if isinstance(coeffs, fmpq_poly):
            poly = coeffs
        elif isinstance(coeffs, Mapping):
            dense = {}
            for k, c in coeffs.items():
                k %= m
                dense[k] = dense.get(k, Fraction(0)) + to_fraction(c)
            top = max(dense, default=-1)
            poly = fmpq_poly([_to_fmpq(dense.get(i, 0)) for i in range(top + 1)])
        else:
            poly = fmpq_poly([_to_fmpq(c) for c in coeffs])
        if poly.degree() >= euler_phi(m):
            poly = poly % cyclotomic_polynomial(m)
        self._poly = poly

    # -- constructors -------------------------------------------------
    @classmethod
    def zeta(cls, m: int, power: int = 1) -> "CyclotomicNumber":
        return cls(m, {power % m: 1})

    @classmethod
    def rational(cls, q: Rational, m: int = 1) -> "CyclotomicNumber":
        return cls(m, [q])

    @classmethod
    def coerce(cls, x, m: int = 1) -> "CyclotomicNumber":
        if isinstance(x, CyclotomicNumber):
            return x
        return cls.rational(to_fraction(x), m)

    # -- representation -----------------------------------------------
    @property
    def degree(self) -> int:
        return euler_phi(self.m)

    @property
    def coefficients(self) -> tuple[Fraction, ...]:
        cs = [to_fraction(c) for c in self._poly.coeffs()]
        cs += [Fraction(0)] * (self.degree - len(cs))
        return tuple(cs)

    @property
    def poly(self) -> fmpq_poly:
        return self._poly

    def is_rational(self) -> bool:
        return self._poly.degree() <= 0

    def to_fraction(self) -> Fraction:
        if not self.is_rational():
            raise ValueError(f"{self} is not rational")
        cs = self._poly.coeffs()
        return to_fraction(cs[0]) if cs else Fraction(0)

    def __repr__(self) -> str:
        cs = [str(c) for c in self.coefficients]
        return f"{self.m}:[{','.join(cs)}]"

    # -- conductor handling -------------------------------------------
    def lift(self, big_m: int) -> "CyclotomicNumber":
        """Re-express in Q(zeta_M) using zeta_m = zeta_M^(M/m)."""
        if big_m == self.m:
            return self
        if big_m % self.m:
            raise ValueError(f"{self.m} does not divide {big_m}")
        step = big_m // self.m
        cs = self._poly.coeffs()
        if not cs:
            return CyclotomicNumber(big_m)
        dense = [fmpq(0)] * ((len(cs) - 1) * step + 1)
        for i, c in enumerate(cs):
            dense[i * step] = c
        return CyclotomicNumber(big_m, fmpq_poly(dense))

    def _common(self, other) -> tuple["CyclotomicNumber", "CyclotomicNumber"] | None:
        if isinstance(other, CyclotomicNumber):
            if other.m == self.m:
                return self, other
            big = lcm(self.m, other.m)
            return self.lift(big), other.lift(big)
        if isinstance(other, (int, Fraction, fmpq)):
            return self, CyclotomicNumber(self.m, [to_fraction(other)])
        return None

    # -- field operations ---------------------------------------------
    def __add__(self, other):
        pair = self._common(other)
        if pair is None:
            return NotImplemented
        a, b = pair
        return CyclotomicNumber(a.m, a._poly + b._poly)

    __radd__ = __add__

    def __neg__(self):
        return CyclotomicNumber(self.m, -self._poly)

    def __sub__(self, other):
        pair = self._common(other)
        if pair is None:
            return NotImplemented
        a, b = pair
        return CyclotomicNumber(a.m, a._poly - b._poly)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, (int, Fraction, fmpq)):
            return CyclotomicNumber(self.m, self._poly * _to_fmpq(other))
        pair = self._common(other)
        if pair is None:
            return NotImplemented
        a, b = pair
        return CyclotomicNumber(a.m, (a._poly * b._poly) % cyclotomic_polynomial(a.m))

    __rmul__ = __mul__

    def inverse(self) -> "CyclotomicNumber":
        if self.is_zero():
            raise ZeroDivisionError("inverse of zero in Q(zeta_m)")
        if self.is_rational():
            return CyclotomicNumber(self.m, [1 / self.to_fraction()])
        g, s, _t = self._poly.xgcd(cyclotomic_polynomial(self.m))
        # g is a nonzero constant because Phi_m is irreducible
        return CyclotomicNumber(self.m, s / g.coeffs()[0])

    def __truediv__(self, other):
        if isinstance(other, (int, Fraction, fmpq)):
            if other == 0:
                raise ZeroDivisionError
            return CyclotomicNumber(self.m, self._poly / _to_fmpq(other))
        if not isinstance(other, CyclotomicNumber):
            return NotImplemented
        return self * other.inverse()

    def __rtruediv__(self, other):
        return CyclotomicNumber.coerce(other, self.m) * self.inverse()

    def __pow__(self, n: int):
        if n < 0:
            return self.inverse() ** (-n)
        result = CyclotomicNumber(self.m, [1])
        base = self
        while n:
            if n & 1:
                result = result * base
            base = base * base
            n >>= 1
        return result

    def is_zero(self) -> bool:
        return self._poly.is_zero()

    def __bool__(self) -> bool:
        return not self.is_zero()

    def __eq__(self, other) -> bool:
        pair = self._common(other)
        if pair is None:
            return NotImplemented
        a, b = pair
        return a._poly == b._poly

    def __hash__(self) -> int:
        if self.is_rational():
            return hash(self.to_fraction())
        return hash((self.m, tuple(self.coefficients)))

    # -- Galois action ------------------------------------------------
    def galois(self, s: int) -> "CyclotomicNumber":
        """Apply the automorphism zeta_m -> zeta_m^s (gcd(s, m) = 1)."""
        if gcd(s, self.m) != 1:
            raise ValueError(f"{s} is not a unit modulo {self.m}")
        cs = self._poly.coeffs()
        return CyclotomicNumber(self.m, {(i * s) % self.m: to_fraction(c) for i, c in enumerate(cs)})

    def conjugates(self) -> list["CyclotomicNumber"]:
        return [self.galois(s) for s in range(1, self.m + 1) if gcd(s, self.m) == 1]

    # -- derived quantities -------------------------------------------
    def multiplication_matrix(self) -> fmpq_mat:
        n = self.degree
        cols = []
        phi = cyclotomic_polynomial(self.m)
        for j in range(n):
            prod = (self._poly * fmpq_poly([0] * j + [1])) % phi
            cs = list(prod.coeffs()) + [fmpq(0)] * (n - len(prod.coeffs()))
            cols.append(cs)
        return fmpq_mat(n, n, [cols[j][i] for i in range(n) for j in range(n)])

    def characteristic_polynomial(self) -> fmpq_poly:
        return self.multiplication_matrix().charpoly()

    def norm(self) -> Fraction:
        """Field norm to Q, computed as a resultant with Phi_m."""
        if self.is_zero():
            return Fraction(0)
        phi = cyclotomic_polynomial(self.m)
        if self._poly.degree() == 0:
            return to_fraction(self._poly.coeffs()[0]) ** self.degree
        # Res(Phi, a) = prod a(root) since Phi is monic
        return to_fraction(phi.resultant(self._poly))

    def trace(self) -> Fraction:
        mat = self.multiplication_matrix()
        return sum((to_fraction(mat[i, i]) for i in range(self.degree)), Fraction(0))

    def is_p_integral(self, p: int) -> bool:
        return all(c.denominator % p for c in self.coefficients)

    def is_integral(self) -> bool:
        return all(c.denominator == 1 for c in self.coefficients)


def cyclo_reduce(coeffs: Union[Mapping[int, Rational], Sequence[Rational]], m: int) -> CyclotomicNumber:
    """Canonical representative of a polynomial in zeta_m modulo Phi_m.

    ``coeffs`` may be a dense sequence or a sparse ``{exponent: coefficient}``
    mapping; exponents are reduced modulo m before reduction by Phi_m.
    """
    if isinstance(coeffs, Mapping):
        return CyclotomicNumber(m, coeffs)
    return CyclotomicNumber(m, dict(enumerate(coeffs)))


def squarefree_part(f: fmpq_poly) -> fmpq_poly:
    g = f.gcd(f.derivative())
    out = f / g if g.degree() > 0 else f
    if isinstance(out, tuple):
        out = out[0]
    return out / out.leading_coefficient()


def minimal_polynomial(alpha: Union[CyclotomicNumber, Rational]) -> fmpq_poly:
    """Monic minimal polynomial over Q.

    The characteristic polynomial of multiplication-by-alpha is a power of
    the minimal polynomial, so its square-free part is the answer.
    """
    if not isinstance(alpha, CyclotomicNumber):
        return fmpq_poly([-_to_fmpq(alpha), 1])
    if alpha.is_rational():
        return fmpq_poly([-_to_fmpq(alpha.to_fraction()), 1])
    return squarefree_part(alpha.characteristic_polynomial())


def primitive_integer_polynomial(f: fmpq_poly) -> fmpz_poly:
    """Scale a rational polynomial to a primitive integer polynomial."""
    num = f.numer()
    content = num.content()
    coeffs = [c // content for c in num.coeffs()]
    if coeffs[-1] < 0:
        coeffs = [-c for c in coeffs]
    return fmpz_poly(coeffs)


def unit_root(m: int, k: int) -> acb:
    """exp(2 pi i k/m) as a ball at the current working precision."""
    s, c = arb.sin_cos_pi_fmpq(fmpq(2 * k, m))
    return acb(c, s)


def embed(alpha: Union[CyclotomicNumber, Rational], k: int) -> acb:
    """Image of alpha under zeta_m -> exp(2 pi i k/m) at current precision."""
    if not isinstance(alpha, CyclotomicNumber):
        c = to_fraction(alpha)
        return acb(arb(c.numerator) / c.denominator)
    cs = alpha.poly.coeffs()
    z = unit_root(alpha.m, k)
    acc = acb(0)
    for c in reversed(cs):
        acc = acc * z + acb(arb(int(c.p)) / int(c.q))
    return acc


def embedding_indices(m: int) -> list[int]:
    return [k for k in range(1, m + 1) if gcd(k, m) == 1] if m > 1 else [1]


def complex_embeddings(alpha: Union[CyclotomicNumber, Rational], precision: int = 96) -> list[acb]:
    """One ball per embedding zeta_m -> exp(2 pi i k/m), gcd(k, m) = 1."""
    if precision < 32:
        raise ValueError("precision must be at least 32 bits")
    m = alpha.m if isinstance(alpha, CyclotomicNumber) else 1
    with working_precision(precision):
        return [embed(alpha, k) for k in embedding_indices(m)]


def common_conductor(values: Iterable) -> int:
    m = 1
    for v in values:
        if isinstance(v, CyclotomicNumber):
            m = lcm(m, v.m)
    return m


def descend(alpha: CyclotomicNumber, d: int):
    """alpha as an element of Q(zeta_d) (d | m), or None if it is not there."""
    m = alpha.m
    if m % d:
        raise ValueError(f"{d} does not divide {m}")
    if d == m:
        return alpha
    for a in range(1, m):
        if gcd(a, m) == 1 and (a - 1) % d == 0 and alpha.galois(a) != alpha:
            return None
    n, k = euler_phi(m), euler_phi(d)
    basis = [CyclotomicNumber.zeta(d, j).lift(m).coefficients for j in range(k)]
    A = fmpq_mat(n, k, [_to_fmpq(basis[j][i]) for i in range(n) for j in range(k)])
    v = fmpq_mat(n, 1, [_to_fmpq(c) for c in alpha.coefficients])
    At = A.transpose()
    c = (At * A).solve(At * v)
    return CyclotomicNumber(d, [to_fraction(c[j, 0]) for j in range(k)])


def minimal_conductor(alpha) -> int:
    """Smallest d with alpha in Q(zeta_d) (odd d preferred over 2d)."""
    if not isinstance(alpha, CyclotomicNumber) or alpha.is_rational():
        return 1
    for d in sorted(d for d in range(1, alpha.m + 1) if alpha.m % d == 0):
        if d % 4 == 2:
            continue
        if descend(alpha, d) is not None:
            return d
    return alpha.m


def descend_all(values: Sequence) -> list:
    """Re-express cyclotomic values in the smallest common Q(zeta_d)."""
    m = 1
    for v in values:
        m = lcm(m, minimal_conductor(v))
    out = []
    for v in values:
        if isinstance(v, CyclotomicNumber) and v.m != m:
            v = v.lift(m) if m % v.m == 0 else descend(v, m)
        out.append(v)
    return out


def _legendre(a: int, q: int) -> int:
    r = pow(a % q, (q - 1) // 2, q)
    return -1 if r == q - 1 else r


def sqrt_conductor(d: int) -> int:
    """Conductor of Q(sqrt(d)) for squarefree d."""
    return abs(d) if d % 4 == 1 else 4 * abs(d)


def sqrt_rational(q) -> CyclotomicNumber:
    """sqrt(q) for rational q as an element of the smallest Q(zeta_m) holding it."""
    from .quadratic import squarefree_decomposition

    q = to_fraction(q)
    if q == 0:
        return CyclotomicNumber(1)
    num, den = q.numerator * q.denominator, q.denominator
    s, r = squarefree_decomposition(num)
    out = CyclotomicNumber.rational(Fraction(r, den))
    if s < 0:
        out = out * CyclotomicNumber.zeta(4, 1)
        s = -s
    from flint import fmpz

    for ell, _ in (fmpz(s).factor() if s > 1 else []):
        ell = int(ell)
        if ell == 2:
            z = CyclotomicNumber.zeta(8, 1)
            root = z + z**7
        else:
            g = CyclotomicNumber(ell, {a: _legendre(a, ell) for a in range(1, ell)})
            # g^2 = (-1)^((ell-1)/2) ell
            root = g if ell % 4 == 1 else g * CyclotomicNumber.zeta(4, 3)
        out = out * root
    return descend(out, minimal_conductor(out))


def _algebra_mul(u, v, c):
    # (u0 + u1 t)(v0 + v1 t) in L[t]/(t^2 - c)
    return (u[0] * v[0] + c * u[1] * v[1], u[0] * v[1] + u[1] * v[0])


def _block_matrix(r, c) -> fmpq_mat:
    n = r[0].degree
    Mu, Mv, Mc = r[0].multiplication_matrix(), r[1].multiplication_matrix(), c.multiplication_matrix()
    Mcv = Mc * Mv
    rows = []
    for i in range(n):
        rows.append([Mu[i, j] for j in range(n)] + [Mcv[i, j] for j in range(n)])
    for i in range(n):
        rows.append([Mv[i, j] for j in range(n)] + [Mu[i, j] for j in range(n)])
    return fmpq_mat(2 * n, 2 * n, [x for row in rows for x in row])


def sqrt_in_field(c: CyclotomicNumber):
    """A square root of c inside Q(zeta_m), or None if c is not a square there.

    In A = L[t]/(t^2 - c), which is L x L when c is a square, the element
    r = zeta + t has a reducible minimal polynomial over Q; evaluating one
    irreducible factor at r gives a zero divisor u + v t, and then
    sqrt(c) = -u / v.
    """
    if c.is_zero():
        return c
    m = c.m
    if c.is_rational():
        q = c.to_fraction()
        root = sqrt_rational(q)
        return root.lift(m) if m % root.m == 0 else None
    zeta = CyclotomicNumber.zeta(m, 1)
    zero = CyclotomicNumber(m)
    for shift in range(1, 6):
        r = (zeta * shift + (shift - 1), CyclotomicNumber.rational(1, m))
        chi = _block_matrix(r, c).charpoly()
        factors = fmpq_poly(chi.coeffs()).factor()[1]
        if len(factors) < 2:
            continue
        h = factors[0][0]
        acc = (zero, zero)
        for coeff in reversed(h.coeffs()):
            acc = _algebra_mul(acc, r, c)
            acc = (acc[0] + to_fraction(coeff), acc[1])
        u, v = acc
        if v.is_zero():
            continue
        y = -u / v
        if y * y == c:
            return y
    return None

