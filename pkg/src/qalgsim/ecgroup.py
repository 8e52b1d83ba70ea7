"""Elliptic curves y^2 = x^3 + a x + b over prime fields F_p with p > 3."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import List, Tuple, Union

from .errors import DomainError, ResourceError
from .numtheory import is_prime, mod_inverse

INFINITY = "infinity"
ECPoint = Union[Tuple[int, int], str]


@dataclass(frozen=True)
class CurveSpec:
    p: int
    a: int
    b: int

    def __post_init__(self):
        if self.p <= 3 or not is_prime(self.p):
            raise DomainError("curve field must be a prime p > 3")
        object.__setattr__(self, "a", self.a % self.p)
        object.__setattr__(self, "b", self.b % self.p)
        if self.discriminant == 0:
            raise DomainError("singular curve (zero discriminant)")

    @property
    def discriminant(self) -> int:
        return (-16 * (4 * self.a**3 + 27 * self.b**2)) % self.p

    def contains(self, P: ECPoint) -> bool:
        if P == INFINITY:
            return True
        x, y = P
        p = self.p
        return 0 <= x < p and 0 <= y < p and (y * y - (x**3 + self.a * x + self.b)) % p == 0

    def to_json(self) -> dict:
        return {"p": self.p, "a": self.a, "b": self.b}


def _check(P: ECPoint, curve: CurveSpec) -> None:
    if not curve.contains(P):
        raise DomainError(f"{P} is not on the curve {curve}")


def ec_neg(P: ECPoint, curve: CurveSpec) -> ECPoint:
    _check(P, curve)
    if P == INFINITY:
        return P
    x, y = P
    return (x, (-y) % curve.p)


def ec_add(P: ECPoint, Q: ECPoint, curve: CurveSpec) -> ECPoint:
    _check(P, curve)
    _check(Q, curve)
    return _add(P, Q, curve)


def _add(P: ECPoint, Q: ECPoint, curve: CurveSpec) -> ECPoint:
    if P == INFINITY:
        return Q
    if Q == INFINITY:
        return P
    p = curve.p
    (xp, yp), (xq, yq) = P, Q
    if xp == xq:
        if (yp + yq) % p == 0:
            return INFINITY  # Q = -P, including doubling a point with y = 0
        lam = (3 * xp * xp + curve.a) * mod_inverse(2 * yp, p) % p
    else:
        lam = (yq - yp) * mod_inverse(xq - xp, p) % p
    x = (lam * lam - xp - xq) % p
    y = (lam * (xp - x) - yp) % p
    return (x, y)


def ec_scalar_mul(k: int, P: ECPoint, curve: CurveSpec) -> ECPoint:
    _check(P, curve)
    if k < 0:
        k, P = -k, ec_neg(P, curve)
    result: ECPoint = INFINITY
    addend = P
    while k:
        if k & 1:
            result = _add(result, addend, curve)
        addend = _add(addend, addend, curve)
        k >>= 1
    return result


def ec_enumerate(curve: CurveSpec) -> List[ECPoint]:
    """All points, O first, then affine points sorted by (x, y)."""
    p = curve.p
    if p > 10**6:
        raise ResourceError("enumeration limited to p <= 10^6")
    roots: dict = {}
    for y in range(p):
        roots.setdefault(y * y % p, []).append(y)
    pts: List[ECPoint] = [INFINITY]
    for x in range(p):
        rhs = (x**3 + curve.a * x + curve.b) % p
        for y in roots.get(rhs, []):
            pts.append((x, y))
    return pts


def ec_order(P: ECPoint, curve: CurveSpec) -> int:
    """Smallest r >= 1 with rP = O, by stepping through multiples within the Hasse bound."""
    _check(P, curve)
    bound = curve.p + 1 + 2 * math.isqrt(curve.p) + 2
    cur = P
    for r in range(1, bound + 1):
        if cur == INFINITY:
            return r
        cur = _add(cur, P, curve)
    raise AssertionError("point order exceeds the Hasse bound")


def point_to_json(P: ECPoint):
    return INFINITY if P == INFINITY else {"x": P[0], "y": P[1]}


class ECGroup:
    """Cyclic-group interface over a curve, for the discrete-log solver."""

    def __init__(self, curve: CurveSpec):
        self.curve = curve
        self.identity: ECPoint = INFINITY

    def mul(self, P: ECPoint, Q: ECPoint) -> ECPoint:
        return _add(P, Q, self.curve)

    def pow(self, P: ECPoint, k: int) -> ECPoint:
        return ec_scalar_mul(k, P, self.curve)

    def element_order(self, P: ECPoint) -> int:
        return ec_order(P, self.curve)

    @property
    def size_bound(self) -> int:
        return self.curve.p + 1 + 2 * math.isqrt(self.curve.p) + 2
