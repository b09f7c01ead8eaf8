"""Parallelogram-law residuals and the pairwise-difference average over an orbit."""

from __future__ import annotations

from fractions import Fraction
from typing import Sequence

from ..arith.balls import DEFAULT_PREC, HeightValue
from ..curves.weierstrass import CurvePoint, WeierstrassCurve
from ..errors import DuplicatePoints
from .doubling import DEFAULT_RADIUS, canonical_height_doubling


def canonical_height(curve: WeierstrassCurve, P: CurvePoint, precision: int = DEFAULT_PREC,
                     radius: float = DEFAULT_RADIUS) -> HeightValue:
    return canonical_height_doubling(curve, P, precision, radius)


def parallelogram_residual(curve: WeierstrassCurve, P: CurvePoint, Q: CurvePoint,
                           precision: int = DEFAULT_PREC, radius: float = DEFAULT_RADIUS) -> HeightValue:
    """h(P+Q) + h(P-Q) - 2h(P) - 2h(Q); should contain 0."""
    if Q.is_infinity or P.is_infinity:
        return HeightValue.zero()
    h = lambda R: canonical_height(curve, R, precision, radius)
    hp = h(P)
    if Q == P or Q == curve.neg(P):
        # h(2P) + h(O) - 4h(P)
        return h(curve.double(P)) - hp.scale(4)
    return h(curve.add(P, Q)) + h(curve.add(P, curve.neg(Q))) - hp.scale(2) - h(Q).scale(2)


def pairwise_average_bound(curve: WeierstrassCurve, orbit: Sequence[CurvePoint],
                           precision: int = DEFAULT_PREC, radius: float = DEFAULT_RADIUS):
    """(h(Q_1), (1/(4N(N-1))) sum_{i != j} h(Q_i - Q_j)) for a conjugate orbit.

    The sum is symmetric, so each unordered pair is computed once.
    """
    pts = list(orbit)
    N = len(pts)
    if N < 2:
        raise DuplicatePoints("orbit needs at least two points")
    for i in range(N):
        for j in range(i):
            if pts[i] == pts[j]:
                raise DuplicatePoints(f"orbit points {j} and {i} coincide")
    lhs = canonical_height(curve, pts[0], precision, radius)
    total = HeightValue.zero()
    for i in range(N):
        for j in range(i):
            total = total + canonical_height(curve, curve.add(pts[i], curve.neg(pts[j])), precision, radius)
    rhs = total.scale(Fraction(2, 4 * N * (N - 1)))
    return lhs, rhs
