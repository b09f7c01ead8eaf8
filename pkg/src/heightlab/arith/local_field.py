"""Completions Q_p(zeta_m) = W(F_{p^f})[z]/Phi_{p^k}(z) at a fixed working precision.

Here m = p^k m' with p coprime to m', f is the order of p mod m', z stands
for zeta_{p^k} and W is the truncated unramified ring of degree f. The
uniformizer is pi = z - 1 with ramification index e = phi(p^k). Elements are
stored as p^(-s) c with c integral; nothing tracks precision loss, so
comparisons are made at half the working precision.
"""

from __future__ import annotations

import math
from fractions import Fraction
from functools import lru_cache
from typing import Optional, Sequence

from flint import fmpz_poly, fq_default_poly_ctx

from ..errors import PreconditionError
from .cyclotomic import CyclotomicNumber, euler_phi, to_fraction
from .padic import INF, multiplicative_order, residue_field


class LocalField:
    """Q_p(zeta_m) for m = p^k m'. ``unit_root`` picks the image of zeta_{m'}
    (a residue-field element of exact order m'), i.e. the place."""

    def __init__(self, p: int, k: int, m_prime: int = 1, N: int = 40, unit_root=None):
        if m_prime % p == 0 or k < 0:
            raise PreconditionError("need p coprime to m'")
        self.p, self.k, self.m_prime, self.N = p, k, m_prime, N
        self.m = p**k * m_prime
        self.f = multiplicative_order(p, m_prime) if m_prime > 1 else 1
        self.pk = p**k
        self.d = euler_phi(self.pk)  # ramification index
        self.e = self.d
        self.mod = p**N
        self.residue = residue_field(p, self.f)
        self._respoly = fq_default_poly_ctx(self.residue)
        g = [int(c) for c in self.residue.modulus().coeffs()]
        self.g = g  # monic lift of the residue modulus
        self._tpow = self._t_powers()
        self._binom = [[math.comb(b, j) for j in range(self.d)] for b in range(self.d)]
        self.zeta_unram = self._teichmuller_root(unit_root)

    def __repr__(self) -> str:
        return f"LocalField(p={self.p}, k={self.k}, m'={self.m_prime}, f={self.f}, N={self.N})"

    # -- the unramified part ------------------------------------------
    def _t_powers(self):
        """t^j mod g for f <= j <= 2f - 2, as coefficient lists."""
        f, g = self.f, self.g
        out = {}
        cur = [0] * f
        if f == 1:
            return {}
        cur = [0] * (f - 1) + [1]  # t^(f-1)
        for j in range(f, 2 * f - 1):
            top = cur[-1]
            cur = [0] + cur[:-1]
            cur = [(cur[i] - top * g[i]) % self.mod for i in range(f)]
            out[j] = cur
        return out

    def _w_from_residue(self, r) -> list[int]:
        cs = [int(c) for c in r.to_list()]
        return cs + [0] * (self.f - len(cs))

    def _teichmuller_root(self, unit_root):
        """Lift of a residue m'-th root of unity to W by x -> x^q iteration."""
        if self.m_prime == 1:
            return self.one()
        if unit_root is None:
            q = self.p**self.f
            r = None
            for cand in _residue_elements(self.residue, self.p, self.f):
                if cand == 0:
                    continue
                c = cand ** ((q - 1) // self.m_prime)
                if all(c ** (self.m_prime // ell) != 1 for ell in _primes(self.m_prime)):
                    r = c
                    break
        else:
            r = self.residue(unit_root) if isinstance(unit_root, int) else unit_root
            if multiplicative_order_fq(r, self.m_prime) != self.m_prime:
                raise PreconditionError("unit_root does not have exact order m'")
        x = self._embed_w(self._w_from_residue(r))
        q = self.p**self.f
        for _ in range(self.N + 1):
            x = x**q
        return x

    def _embed_w(self, w: Sequence[int]) -> "LocalElement":
        c = [0] * (self.f * self.d)
        for a, v in enumerate(w):
            c[a] = v % self.mod
        return LocalElement(self, c, 0)

    # -- constructors -------------------------------------------------
    def zero(self) -> "LocalElement":
        return LocalElement(self, [0] * (self.f * self.d), 0)

    def one(self) -> "LocalElement":
        return self.from_rational(1)

    def z(self) -> "LocalElement":
        c = [0] * (self.f * self.d)
        if self.d == 1:
            c[0] = 1
        else:
            c[self.f] = 1
        return LocalElement(self, c, 0)

    def pi(self) -> "LocalElement":
        return self.z() - 1

    def from_rational(self, q) -> "LocalElement":
        q = to_fraction(q)
        num, den = q.numerator, q.denominator
        s = 0
        while den % self.p == 0:
            den //= self.p
            s += 1
        c = [0] * (self.f * self.d)
        c[0] = num * pow(den, -1, self.mod) % self.mod
        return LocalElement(self, c, s)._normalize()

    def __call__(self, value) -> "LocalElement":
        if isinstance(value, LocalElement):
            return value
        if isinstance(value, CyclotomicNumber):
            return self.from_cyclotomic(value)
        if hasattr(value, "to_fraction") and value.is_rational():
            return self.from_rational(value.to_fraction())
        return self.from_rational(value)

    def teichmuller(self, r: int) -> "LocalElement":
        """The root of unity in Z_p congruent to r mod p."""
        if r % self.p == 0:
            raise PreconditionError("Teichmuller lift of zero")
        x = self.from_rational(r)
        for _ in range(self.N + 1):
            x = x**self.p
        return x

    def zeta_m(self, power: int = 1) -> "LocalElement":
        """Image of zeta_m^power with zeta_m = zeta_{p^k}^a zeta_{m'}^b, 1 = a m' + b p^k."""
        if self.m_prime == 1:
            a, b = 1, 0
        elif self.k == 0:
            a, b = 0, 1
        else:
            a = pow(self.m_prime, -1, self.pk)
            b = (1 - a * self.m_prime) // self.pk
        return (self._z_power(a * power)) * (self.zeta_unram ** (b * power % self.m_prime))

    def _z_power(self, j: int) -> "LocalElement":
        j %= self.pk
        vec = [[0] * self.f for _ in range(self.pk)]
        vec[j][0] = 1
        return LocalElement(self, self._reduce_z(vec), 0)

    def from_cyclotomic(self, alpha: CyclotomicNumber) -> "LocalElement":
        if alpha.is_rational():
            return self.from_rational(alpha.to_fraction())
        if self.m % alpha.m:
            raise PreconditionError(f"Q(zeta_{alpha.m}) does not embed in {self}")
        step = self.m // alpha.m
        base = self.zeta_m(step)
        out, power = self.zero(), self.one()
        for coeff in alpha.coefficients:
            if coeff:
                out = out + power * self.from_rational(coeff)
            power = power * base
        return out

    # -- internal arithmetic ------------------------------------------
    def _reduce_z(self, blocks: list[list[int]]) -> list[int]:
        """Reduce a list of W-vectors indexed by powers of z modulo Phi_{p^k}."""
        d, step = self.d, self.pk // self.p if self.k else 1
        blocks = [list(b) for b in blocks]
        if self.k:
            for b in range(len(blocks) - 1, d - 1, -1):
                v = blocks[b]
                if not any(v):
                    continue
                # z^d = -(1 + z^step + ... + z^((p-2) step)) times z^(b-d)
                for j in range(self.p - 1):
                    tgt = blocks[b - d + j * step]
                    for a in range(self.f):
                        tgt[a] -= v[a]
                blocks[b] = [0] * self.f
        else:
            for b in range(1, len(blocks)):
                for a in range(self.f):
                    blocks[0][a] += blocks[b][a]
        out = []
        for b in range(d):
            v = blocks[b] if b < len(blocks) else [0] * self.f
            out.extend(x % self.mod for x in v)
        return out

    def _mul_raw(self, c1: list[int], c2: list[int]) -> list[int]:
        f, d = self.f, self.d
        F = 2 * f - 1
        # Kronecker substitution: t^a z^b -> X^(a + F b)
        p1 = fmpz_poly([c1[a + f * b] if a < f else 0 for b in range(d) for a in range(F)])
        p2 = fmpz_poly([c2[a + f * b] if a < f else 0 for b in range(d) for a in range(F)])
        prod = [int(x) for x in (p1 * p2).coeffs()]
        nb = 2 * d - 1
        prod += [0] * (F * nb - len(prod))
        blocks = []
        for b in range(nb):
            v = prod[F * b : F * b + F]
            w = v[:f]
            for j in range(f, F):
                if v[j]:
                    tp = self._tpow[j]
                    for a in range(f):
                        w[a] += v[j] * tp[a]
            blocks.append(w)
        return self._reduce_z(blocks)

    def _pi_valuation(self, c: list[int]) -> float:
        """v_pi of an integral element via the change of basis z = 1 + pi."""
        f, d, p = self.f, self.d, self.p
        best = INF
        # coefficient of pi^j is sum_b binom(b, j) c_b
        for j in range(d):
            if best <= j:
                break
            for a in range(f):
                s = sum(self._binom[b][j] * c[a + f * b] for b in range(j, d)) % self.mod
                if s:
                    v = 0
                    while s % p == 0:
                        s //= p
                        v += 1
                    best = min(best, self.e * v + j)
        return best

    def residue_of(self, x: "LocalElement"):
        """Image in the residue field of an element of valuation >= 0."""
        if x.valuation() < 0:
            raise PreconditionError("element is not integral")
        x = x._normalize()
        if x.s:
            return self.residue(0)
        w = [sum(x.c[a + self.f * b] for b in range(self.d)) % self.p for a in range(self.f)]
        return self.residue(w) if self.f > 1 else self.residue(w[0])

    def lift_residue(self, r) -> "LocalElement":
        return self._embed_w(self._w_from_residue(r))

    @property
    def precision_threshold(self) -> int:
        """Valuation (in pi units) beyond which an element counts as zero."""
        return self.e * (self.N // 2)

    # -- Galois action on the ramified part ---------------------------
    def inertia(self, x: "LocalElement", s: int) -> "LocalElement":
        """zeta_{p^k} -> zeta_{p^k}^s, identity on W."""
        if math.gcd(s, self.p) != 1:
            raise PreconditionError("s must be a unit mod p")
        blocks = [[0] * self.f for _ in range(self.pk)]
        for b in range(self.d):
            tgt = blocks[(b * s) % self.pk]
            for a in range(self.f):
                tgt[a] += x.c[a + self.f * b]
        return LocalElement(self, self._reduce_z(blocks), x.s)


def _primes(n: int) -> list[int]:
    out, q = [], 2
    while q * q <= n:
        if n % q == 0:
            out.append(q)
            while n % q == 0:
                n //= q
        q += 1
    if n > 1:
        out.append(n)
    return out


def multiplicative_order_fq(r, bound: int) -> int:
    x = r
    for n in range(1, bound + 1):
        if x == 1:
            return n
        x = x * r
    return 0


def _residue_elements(ctx, p: int, f: int):
    from itertools import product

    for digits in product(range(p), repeat=f):
        yield ctx(list(digits)) if f > 1 else ctx(digits[0])


class LocalElement:
    """p^(-s) * sum c[a + f b] t^a z^b."""

    __slots__ = ("L", "c", "s")

    def __init__(self, L: LocalField, c: list[int], s: int = 0):
        self.L, self.c, self.s = L, c, s

    def _normalize(self) -> "LocalElement":
        p = self.L.p
        c, s = self.c, self.s
        while s > 0 and all(x % p == 0 for x in c):
            c = [x // p for x in c]
            s -= 1
        if c is self.c:
            return self
        return LocalElement(self.L, c, s)

    def _coerce(self, other) -> "LocalElement":
        if isinstance(other, LocalElement):
            if other.L is not self.L:
                raise PreconditionError("elements of different local fields")
            return other
        if isinstance(other, (int, Fraction)):
            return self.L.from_rational(other)
        return self.L(other)

    def _aligned(self, other: "LocalElement"):
        s = max(self.s, other.s)
        mod, p = self.L.mod, self.L.p
        a = self.c if self.s == s else [x * p ** (s - self.s) % mod for x in self.c]
        b = other.c if other.s == s else [x * p ** (s - other.s) % mod for x in other.c]
        return a, b, s

    def __add__(self, other):
        other = self._coerce(other)
        a, b, s = self._aligned(other)
        mod = self.L.mod
        return LocalElement(self.L, [(x + y) % mod for x, y in zip(a, b)], s)._normalize()

    __radd__ = __add__

    def __neg__(self):
        mod = self.L.mod
        return LocalElement(self.L, [(-x) % mod for x in self.c], self.s)

    def __sub__(self, other):
        return self + (-self._coerce(other))

    def __rsub__(self, other):
        return self._coerce(other) - self

    def __mul__(self, other):
        if isinstance(other, int):
            mod = self.L.mod
            return LocalElement(self.L, [x * other % mod for x in self.c], self.s)._normalize()
        other = self._coerce(other)
        return LocalElement(self.L, self.L._mul_raw(self.c, other.c), self.s + other.s)._normalize()

    __rmul__ = __mul__

    def __pow__(self, n: int):
        if n < 0:
            return self.inverse() ** (-n)
        out, base = self.L.one(), self
        while n:
            if n & 1:
                out = out * base
            n >>= 1
            if n:
                base = base * base
        return out

    def valuation(self) -> float:
        """Valuation in units of the uniformizer pi (v(p) = e)."""
        v = self.L._pi_valuation(self.c)
        return v - self.L.e * self.s

    def p_valuation(self) -> Fraction:
        v = self.valuation()
        return v if v == INF else Fraction(v, self.L.e)

    def is_zero(self) -> bool:
        return self.valuation() >= self.L.precision_threshold - self.L.e * self.s

    def __eq__(self, other) -> bool:
        try:
            other = self._coerce(other)
        except (PreconditionError, TypeError, ValueError):
            return NotImplemented
        return (self - other).valuation() >= self.L.precision_threshold - self.L.e * max(self.s, other.s)

    __hash__ = None

    def __bool__(self) -> bool:
        return not self.is_zero()

    def _unit_inverse(self) -> "LocalElement":
        L = self.L
        r = L.residue_of(self)
        if r == 0:
            raise ZeroDivisionError("not a unit")
        y = L.lift_residue(r.inverse())
        prec = 1
        while prec < L.e * L.N:
            y = y * (2 - self * y)
            prec *= 2
        return y

    def inverse(self) -> "LocalElement":
        L = self.L
        j = L._pi_valuation(self.c)
        if j >= L.precision_threshold:
            raise ZeroDivisionError("inverse of an element that is zero at working precision")
        q = -(-j // L.e)
        c = LocalElement(L, self.c, 0) * L.pi() ** (q * L.e - j)
        # c has valuation q e, hence all coefficients are divisible by p^q
        u = LocalElement(L, [x // L.p**q for x in c.c], 0)
        inv = L.pi() ** (q * L.e - j) * u._unit_inverse()
        shift = self.s - q
        if shift >= 0:
            return inv * (L.p**shift)
        return LocalElement(L, inv.c, inv.s - shift)._normalize()

    def __truediv__(self, other):
        return self * self._coerce(other).inverse()

    def __rtruediv__(self, other):
        return self._coerce(other) * self.inverse()

    def galois(self, s: int) -> "LocalElement":
        return self.L.inertia(self, s)

    def __repr__(self) -> str:
        v = self.valuation()
        return f"<local element v={v}/{self.L.e}>"


# -- roots of polynomials over a local field ---------------------------


def _taylor_shift(coeffs: list, c) -> list:
    """Coefficients of f(X + c)."""
    out = list(coeffs)
    n = len(out)
    for i in range(n - 1):
        for j in range(n - 2, i - 1, -1):
            out[j] = out[j] + out[j + 1] * c
    return out


def _evaluate(coeffs: list, x):
    acc = coeffs[-1]
    for c in reversed(coeffs[:-1]):
        acc = acc * x + c
    return acc


def _derivative(coeffs: list) -> list:
    return [coeffs[i] * i for i in range(1, len(coeffs))]


def _lower_hull(points):
    hull = []
    for pt in points:
        while len(hull) >= 2:
            (x1, y1), (x2, y2) = hull[-2], hull[-1]
            if (y2 - y1) * (pt[0] - x1) >= (pt[1] - y1) * (x2 - x1):
                hull.pop()
            else:
                break
        hull.append(pt)
    return hull


def local_roots(coeffs: Sequence, L: LocalField, min_valuation: Optional[int] = None,
                _depth: int = 0) -> list[LocalElement]:
    """All roots in L of a squarefree polynomial (coefficients low to high),
    by Newton polygons, residual factorization and Newton lifting."""
    coeffs = [L(c) for c in coeffs]
    while len(coeffs) > 1 and coeffs[-1].is_zero():
        coeffs.pop()
    if len(coeffs) <= 1:
        return []
    if _depth > L.e * L.N:
        raise PreconditionError("root clustering exceeds the working precision")
    roots = []
    if coeffs[0].is_zero():
        if min_valuation is None:
            roots.append(L.zero())
        coeffs = coeffs[1:]
        if len(coeffs) <= 1:
            return roots
    vals = [c.valuation() for c in coeffs]
    pts = [(i, v) for i, v in enumerate(vals) if v < INF]
    hull = _lower_hull(pts)
    pi, pi_inv = L.pi(), L.pi().inverse()
    for (i1, v1), (i2, v2) in zip(hull, hull[1:]):
        num = v1 - v2
        if num % (i2 - i1):
            continue  # roots of this slope are not in L
        lam = num // (i2 - i1)
        if min_valuation is not None and lam < min_valuation:
            continue
        scale = pi**lam if lam >= 0 else pi_inv ** (-lam)
        g = [c * scale**i for i, c in enumerate(coeffs)]
        mu = min(c.valuation() for c in g)
        norm = pi_inv**mu if mu >= 0 else pi ** (-mu)
        g = [c * norm for c in g]
        residual = L._respoly([L.residue_of(c) if c.valuation() == 0 else L.residue(0) for c in g])
        for rbar, mult in residual.roots():
            if rbar == 0:
                continue
            c0 = L.lift_residue(rbar)
            if mult == 1:
                y = _newton(g, c0, L)
                roots.append(y * scale)
            else:
                shifted = _taylor_shift(g, c0)
                for y in local_roots(shifted, L, min_valuation=1, _depth=_depth + 1):
                    roots.append((c0 + y) * scale)
    return roots


def _newton(g: list, y, L: LocalField):
    dg = _derivative(g)
    for _ in range(4 * (L.e * L.N).bit_length() + 8):
        fy = _evaluate(g, y)
        if fy.is_zero():
            return y
        y = y - fy / _evaluate(dg, y)
    if not _evaluate(g, y).is_zero():
        raise PreconditionError("Newton iteration did not converge")
    return y


def local_sqrt(a: LocalElement) -> Optional[LocalElement]:
    """A square root of a in its local field, or None."""
    if a.is_zero():
        return a
    rts = local_roots([-a, 0, 1], a.L)
    return rts[0] if rts else None


@lru_cache(maxsize=None)
def local_field(p: int, k: int, m_prime: int = 1, N: int = 40, unit_root: Optional[int] = None) -> LocalField:
    return LocalField(p, k, m_prime, N, unit_root)
