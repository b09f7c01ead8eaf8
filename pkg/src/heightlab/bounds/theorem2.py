"""The multiplicative-place argument for abelian height floors, made explicit
on quadratic Galois orbits.

For a quadratic point Q with conjugate sQ the difference R = Q - sQ satisfies
sR = -R, so x(R) is rational and 2y + a1 x + a3 = eta sqrt(d) with eta
rational. R is then the image of a rational point R' on the twist E^d, and
since Neron local heights are invariant under isomorphism over the
completion, lambda_w(R) = lambda_{E^d, v}(R') at every place w | v. Every
local term of the chain is therefore exact at finite places and a certified
ball at infinity.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Sequence

from ..arith.balls import DEFAULT_PREC, HeightValue, weil_height, working_precision
from ..arith.quadratic import QuadraticNumber, squarefree_decomposition
from ..curves.reduction import ADDITIVE, GOOD, reduction_data
from ..curves.weierstrass import CurvePoint, WeierstrassCurve
from ..errors import InsufficientOrbit, PreconditionError, WrongReductionType
from ..heights.doubling import DEFAULT_RADIUS
from ..heights.local import canonical_height_local_sum
from ..heights.parallelogram import canonical_height
from .constants import max_log_plus_j
from .pairwise import elkies_floor, hs_bound_coefficient


@dataclass(frozen=True)
class Theorem2Constants:
    p: int
    e: int
    nu0: int
    d_v0: Fraction
    c: Fraction
    c_prime: HeightValue
    c_dprime: HeightValue

    def to_dict(self) -> dict:
        return {"p": self.p, "e": self.e, "nu0": self.nu0, "d_v0": str(self.d_v0), "c": str(self.c),
                "c_prime": self.c_prime.to_dict(), "c_dprime": self.c_dprime.to_dict()}


def theorem2_constants(curve: WeierstrassCurve, v0: int, e: int = 1, d_v0: Fraction = Fraction(1),
                       precision: int = DEFAULT_PREC) -> Theorem2Constants:
    """e, nu0 = ord_v0(1/j), c = 1/(e nu0)^2, c' = d_v0 log|j|_v0 / 48, c'' = c c'."""
    if e < 1:
        raise PreconditionError("the ramification bound e must be a positive integer")
    red = reduction_data(curve, v0)
    if not red.is_multiplicative:
        raise WrongReductionType(f"reduction at {v0} is {red.type}, need multiplicative")
    nu0 = red.nu
    c = Fraction(1, (e * nu0) ** 2)
    cp = HeightValue.from_logs({v0: Fraction(d_v0) * nu0 / 48}, precision)
    cpp = HeightValue.from_logs({v0: c * Fraction(d_v0) * nu0 / 48}, precision)
    return Theorem2Constants(v0, e, nu0, Fraction(d_v0), c, cp, cpp)


# -- quadratic orbits ----------------------------------------------------------


def _quad(c) -> Optional[QuadraticNumber]:
    return c if isinstance(c, QuadraticNumber) and not c.is_rational() else None


def quadratic_field(P: CurvePoint) -> Optional[int]:
    """Squarefree d with P defined over Q(sqrt d), or None when P is rational."""
    ds = {q.d for q in (_quad(P.x), _quad(P.y)) if q is not None}
    if len(ds) > 1:
        raise PreconditionError("coordinates lie in different quadratic fields")
    return ds.pop() if ds else None


def conjugate_point(P: CurvePoint) -> CurvePoint:
    conj = lambda c: c.conjugate() if isinstance(c, QuadraticNumber) else c
    return CurvePoint(P.curve, conj(P.x), conj(P.y))


def quadratic_orbit(Q: CurvePoint) -> list[CurvePoint]:
    if Q.is_infinity or quadratic_field(Q) is None:
        raise InsufficientOrbit("a rational point has a one-element orbit")
    return [Q, conjugate_point(Q)]


def slice_point(curve: WeierstrassCurve, x) -> Optional[CurvePoint]:
    """(x, y) with rational x and y in Q(sqrt f(x)); None if y is rational."""
    x = Fraction(x)
    a1, a2, a3, a4, a6 = curve.ainvs
    disc = 4 * x**3 + curve.b2 * x * x + 2 * curve.b4 * x + curve.b6
    if disc == 0:
        return None
    s, r = squarefree_decomposition(disc.numerator * disc.denominator)
    if s == 1:
        return None
    eta = QuadraticNumber.sqrt(disc)
    return curve.point(x, (eta - a1 * x - a3) * Fraction(1, 2))


def twist_image(curve: WeierstrassCurve, R: CurvePoint) -> tuple[WeierstrassCurve, CurvePoint, int]:
    """(E^d, R', d) for an anti-invariant point R (x rational, eta in Q sqrt d).

    With X = 4 d x, Y = 4 d^2 eta0 the point R' = (X, Y) lies on
    Y^2 = X^3 + d b2 X^2 + 8 d^2 b4 X + 16 d^3 b6.
    """
    if R.is_infinity:
        raise PreconditionError("R = O")
    if _quad(R.x) is not None:
        raise PreconditionError("x(R) is not rational; R is not anti-invariant")
    x = R.x.to_fraction() if isinstance(R.x, QuadraticNumber) else Fraction(R.x)
    a1, _, a3, _, _ = curve.ainvs
    eta = 2 * R.y + a1 * x + a3
    if isinstance(eta, QuadraticNumber) and not eta.is_rational():
        if eta.a != 0:
            raise PreconditionError("R is not anti-invariant")
        d, eta0 = eta.d, eta.b
    else:
        d, eta0 = 1, (eta.to_fraction() if isinstance(eta, QuadraticNumber) else Fraction(eta))
    Ed = curve.quadratic_twist(d)
    return Ed, Ed.point(4 * d * x, 4 * d * d * eta0), d


def ramification_index(d: int, p: int) -> int:
    """e(w/p) in Q(sqrt d)/Q."""
    if d == 1:
        return 1
    if p == 2:
        return 1 if d % 4 == 1 else 2
    return 2 if d % p == 0 else 1


# -- the chain -----------------------------------------------------------------


@dataclass
class ChainStep:
    name: str
    place: str
    lhs: HeightValue
    rhs: HeightValue
    passed: bool
    note: str = ""

    @property
    def strict(self) -> bool:
        """lhs > rhs certified (the check itself only asks for >= within radii)."""
        return bool(self.lhs.ball > self.rhs.ball)

    def to_dict(self) -> dict:
        out = {"step": self.name, "place": self.place, "lhs": self.lhs.to_dict(), "rhs": self.rhs.to_dict(),
               "pass": self.passed, "strict": self.strict}
        if self.note:
            out["note"] = self.note
        return out


@dataclass
class ChainReport:
    mode: str
    orbit: list
    field: str
    v0: int
    e_w: int
    N: int
    steps: list = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(s.passed for s in self.steps)

    def step(self, name: str) -> ChainStep:
        return next(s for s in self.steps if s.name == name)

    def to_dict(self) -> dict:
        return {"mode": self.mode, "orbit": self.orbit, "field": self.field, "v0": self.v0, "e_w": self.e_w,
                "N": self.N, "pass": self.passed, "steps": [s.to_dict() for s in self.steps]}


def _ge(lhs: HeightValue, rhs: HeightValue) -> bool:
    # lhs >= rhs within radii; equality cases (e.g. sQ = -Q) are consistent
    return lhs.possibly_ge(rhs)


def _exact(coef: Fraction, p: int, precision: int) -> HeightValue:
    return HeightValue.from_logs({p: coef}, precision)


def theorem2_case_checks(
    curve: WeierstrassCurve,
    orbit: Sequence[CurvePoint],
    v0: int,
    mode: str = "case1",
    e: Optional[int] = None,
    precision: int = DEFAULT_PREC,
    radius: float = DEFAULT_RADIUS,
) -> ChainReport:
    """Evaluate each inequality of the argument on a quadratic Galois orbit.

    case1: the pairwise-difference average is bounded place by place
    (multiplicative places through the averaging bound with nu = e_w nu0,
    good places by 0, infinite places through the Elkies floor with its
    printed constant standing in for o(1)), summed, and fed into
    h(Q) >= (1/(4N(N-1))) sum h(Q_i - Q_j).
    case2: the orbit is an inertia orbit at v0 (v0 ramified in the quadratic
    field); each difference must satisfy lambda_w >= (1/12) log|j|_w.
    """
    pts = list(orbit)
    if len(pts) < 2:
        raise InsufficientOrbit(f"orbit has {len(pts)} point(s)")
    if len(pts) != 2 or pts[1] != conjugate_point(pts[0]) or pts[0] == pts[1]:
        raise PreconditionError("expected a quadratic orbit [Q, sQ]; see quadratic_orbit")
    d = quadratic_field(pts[0])
    if d is None:
        raise InsufficientOrbit("rational point")
    N = 2
    red0 = reduction_data(curve, v0)
    if not red0.is_multiplicative:
        raise WrongReductionType(f"reduction at {v0} is {red0.type}, need multiplicative")
    nu0 = red0.nu
    e_w = ramification_index(d, v0)
    if mode == "case2" and e_w == 1:
        raise InsufficientOrbit(f"{v0} is unramified in Q(sqrt {d}): the inertia orbit is a single point")
    rep = ChainReport(mode, [P.format() for P in pts], f"Q(sqrt {d})", v0, e_w, N)

    R = curve.add(pts[0], curve.neg(pts[1]))
    Ed, Rd, _ = twist_image(curve, R)
    dec = canonical_height_local_sum(Ed, Rd, precision, radius)
    local = {entry.label: entry.value for entry in dec.entries}
    avg = lambda lam: lam.scale(Fraction(2, N * (N - 1)))  # lambda(R) = lambda(-R)
    one_over = Fraction(1, 12 * (N - 1))

    with working_precision(precision + 16):
        if mode == "case2":
            lam = local.get(f"p={v0}", HeightValue.zero())
            floor = Fraction(nu0, 12)
            rep.steps.append(ChainStep("kernel_floor", f"w|{v0}", lam, _exact(floor, v0, precision),
                                       lam.exact is not None and lam.log_coefficient(v0) >= floor,
                                       f"exact: {lam.log_coefficient(v0)} vs {floor} (log {v0})"))
            a = avg(lam)
            rep.steps.append(ChainStep("average_floor", f"w|{v0}", a, _exact(floor, v0, precision),
                                       a.log_coefficient(v0) >= floor))
            hQ = canonical_height(curve, pts[0], precision, radius)
            cons = theorem2_constants(curve, v0, e_w, precision=precision)
            rest = _other_places_floor(curve, local, v0, N, precision)
            rhs = cons.c_prime + rest.scale(Fraction(1, 4))
            rep.steps.append(ChainStep("height_floor", "global", hQ, rhs, _ge(hQ, rhs),
                                       f"c' = {cons.c_prime.value:.6g} plus explicit o(1) terms"))
            return rep

        e_bound = e if e is not None else e_w
        if e_bound < e_w:
            raise PreconditionError(f"e = {e_bound} is below the ramification index {e_w}")
        cons = theorem2_constants(curve, v0, e_bound, precision=precision)
        lj = max_log_plus_j(curve, precision)
        total = HeightValue.zero()
        for label in sorted(local, key=lambda s: (s != "inf", s)):
            lam = local[label]
            a = avg(lam)
            total = total + a
            if label == "inf":
                rhs = elkies_floor(N, lj, False, precision).scale(Fraction(1, N * (N - 1)))
                rep.steps.append(ChainStep("proofeqn4", "inf", a, rhs, _ge(a, rhs),
                                           "o(1) made explicit with the printed Elkies constant"))
                continue
            p = int(label[2:])
            red = reduction_data(curve, p)
            if p == v0:
                nu = e_w * nu0
                sum_rhs = hs_bound_coefficient(N, nu, nu0)
                s = lam.scale(2)
                rep.steps.append(ChainStep("proofeqn1", label, s, _exact(sum_rhs, p, precision),
                                           s.log_coefficient(p) >= sum_rhs, f"nu = e_w nu0 = {nu}"))
                weak = cons.c * N * N * Fraction(nu0, 12) - Fraction(N * nu0, 12)
                rep.steps.append(ChainStep("proofeqn1_weak", label, s, _exact(weak, p, precision),
                                           s.log_coefficient(p) >= weak))
                rhs = cons.c * Fraction(nu0, 12) - one_over * nu0
                rep.steps.append(ChainStep("proofeqn1bis", label, a, _exact(rhs, p, precision),
                                           a.log_coefficient(p) >= rhs))
            elif red.type == GOOD:
                rep.steps.append(ChainStep("proofeqn3", label, a, HeightValue.zero(), a.log_coefficient(p) >= 0))
            elif red.type == ADDITIVE:
                rep.steps.append(ChainStep("proofeqn2", label, a, HeightValue.zero(), True,
                                           "additive place: not semistable, no inequality applies"))
            else:
                rhs = -one_over * red.nu
                rep.steps.append(ChainStep("proofeqn2", label, a, _exact(rhs, p, precision),
                                           a.log_coefficient(p) >= rhs))
        # the twist can add bad primes where E itself is good: (3) covers them
        hj = weil_height(curve.j, precision)
        elk = elkies_floor(N, HeightValue.zero(), False, precision).scale(Fraction(1, N * (N - 1)))
        rhs5 = _exact(cons.c * Fraction(nu0, 12), v0, precision) - hj.scale(one_over) + elk
        rep.steps.append(ChainStep("proofeqn5", "global", total, rhs5, _ge(total, rhs5),
                                   "error term -(1/(12(N-1))) h(j) plus the explicit Elkies remainder"))
        hR = canonical_height(curve, R, precision, radius)
        rep.steps.append(ChainStep("local_sum_consistency", "global", hR, dec.total,
                                   bool((hR.ball - dec.total.ball).contains(0))))
        hQ = canonical_height(curve, pts[0], precision, radius)
        rhs0 = total.scale(Fraction(1, 4))
        rep.steps.append(ChainStep("proofeqn0", "global", hQ, rhs0, _ge(hQ, rhs0)))
        rhs6 = cons.c_dprime + (rhs5 - _exact(cons.c * Fraction(nu0, 12), v0, precision)).scale(Fraction(1, 4))
        rep.steps.append(ChainStep("proofeqn6", "global", hQ, rhs6, _ge(hQ, rhs6),
                                   f"c'' = {cons.c_dprime.value:.6g} plus explicit o(1) terms"))
    return rep


def _other_places_floor(curve, local, v0, N, precision) -> HeightValue:
    """Lower bounds for the average at places other than v0."""
    lj = max_log_plus_j(curve, precision)
    out = elkies_floor(N, lj, False, precision).scale(Fraction(1, N * (N - 1)))
    for label in local:
        if label == "inf" or int(label[2:]) == v0:
            continue
        p = int(label[2:])
        red = reduction_data(curve, p)
        if red.is_multiplicative:
            out = out + _exact(Fraction(-red.nu, 12 * (N - 1)), p, precision)
    return out
