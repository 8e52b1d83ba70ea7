import itertools
import math

import numpy as np
import pytest
import sympy
from hypothesis import given
from hypothesis import strategies as st

from qalgsim.ecgroup import (
    INFINITY,
    CurveSpec,
    ECGroup,
    ec_add,
    ec_enumerate,
    ec_neg,
    ec_order,
    ec_scalar_mul,
    point_to_json,
)
from qalgsim.errors import DomainError

F7 = CurveSpec(7, -1, 1)
F7_POINTS = {INFINITY, (0, 1), (0, 6), (1, 1), (1, 6), (2, 0), (3, 2), (3, 5), (5, 3), (5, 4), (6, 1), (6, 6)}
PRIMES = list(sympy.primerange(5, 102))


def _random_curves(count, seed, pmax=101):
    rng = np.random.default_rng(seed)
    out = []
    while len(out) < count:
        p = int(rng.choice([q for q in PRIMES if q <= pmax]))
        a, b = (int(v) for v in rng.integers(0, p, 2))
        if (4 * a**3 + 27 * b**2) % p:
            out.append(CurveSpec(p, a, b))
    return out


def _brute_points(curve):
    p = curve.p
    return {INFINITY} | {(x, y) for x in range(p) for y in range(p) if (y * y - x**3 - curve.a * x - curve.b) % p == 0}


def test_example_curve_points():
    pts = ec_enumerate(F7)
    assert len(pts) == 12 and set(pts) == F7_POINTS
    assert pts[0] == INFINITY


def test_identity_closure_and_tangent_exception():
    for P in F7_POINTS:
        assert ec_add(P, INFINITY, F7) == P and ec_add(INFINITY, P, F7) == P
        for Q in F7_POINTS:
            assert ec_add(P, Q, F7) in F7_POINTS
    assert ec_add((2, 0), (2, 0), F7) == INFINITY
    assert ec_scalar_mul(2, (2, 0), F7) == INFINITY


def test_inverse_law():
    for P in F7_POINTS - {INFINITY}:
        assert ec_neg(P, F7) == (P[0], (-P[1]) % 7)
        assert ec_add(P, ec_neg(P, F7), F7) == INFINITY
    assert ec_neg(INFINITY, F7) == INFINITY


def test_scalar_mul_and_order_examples():
    for P in F7_POINTS:
        assert ec_scalar_mul(0, P, F7) == INFINITY
        assert ec_scalar_mul(12, P, F7) == INFINITY
        assert ec_scalar_mul(-1, P, F7) == ec_neg(P, F7)
    assert ec_order(INFINITY, F7) == 1
    assert ec_order((2, 0), F7) == 2


def test_errors():
    with pytest.raises(DomainError):
        CurveSpec(7, 0, 0)
    with pytest.raises(DomainError):
        CurveSpec(3, 1, 1)
    with pytest.raises(DomainError):
        CurveSpec(15, 1, 1)
    with pytest.raises(DomainError):
        ec_add((0, 0), INFINITY, F7)
    with pytest.raises(DomainError):
        ec_order((1, 2), F7)


def test_enumeration_matches_brute_force_and_hasse():
    for curve in _random_curves(50, seed=1):
        pts = ec_enumerate(curve)
        assert len(pts) == len(set(pts))
        assert set(pts) == _brute_points(curve)
        assert abs(len(pts) - (curve.p + 1)) <= 2 * math.sqrt(curve.p)


@pytest.mark.parametrize("curve", [F7] + _random_curves(5, seed=2, pmax=19), ids=str)
def test_associativity_and_commutativity_exhaustive(curve):
    pts = ec_enumerate(curve)
    table = {(P, Q): ec_add(P, Q, curve) for P in pts for Q in pts}
    for P, Q in itertools.product(pts, repeat=2):
        assert table[P, Q] == table[Q, P]
    for P, Q, T in itertools.product(pts, repeat=3):
        assert table[table[P, Q], T] == table[P, table[Q, T]]


def test_order_divides_group_size():
    for p in sympy.primerange(5, 32):
        for a, b in [(1, 1), (2, 3), (p - 1, 1), (0, 1)]:
            if (4 * a**3 + 27 * b**2) % p == 0:
                continue
            curve = CurveSpec(p, a, b)
            pts = ec_enumerate(curve)
            for P in pts:
                r = ec_order(P, curve)
                assert len(pts) % r == 0
                assert ec_scalar_mul(r, P, curve) == INFINITY
                assert all(ec_scalar_mul(j, P, curve) != INFINITY for j in range(1, r))


@given(st.integers(-50, 50), st.integers(-50, 50), st.sampled_from(sorted(F7_POINTS, key=str)))
def test_scalar_mul_is_linear(j, k, P):
    lhs = ec_scalar_mul(j + k, P, F7)
    assert lhs == ec_add(ec_scalar_mul(j, P, F7), ec_scalar_mul(k, P, F7), F7)
    assert ec_scalar_mul(j * k, P, F7) == ec_scalar_mul(j, ec_scalar_mul(k, P, F7), F7)


def test_group_interface_and_json():
    G = ECGroup(F7)
    assert G.identity == INFINITY
    assert G.pow((0, 1), 12) == INFINITY
    assert G.element_order((0, 1)) == ec_order((0, 1), F7)
    assert G.size_bound >= 12
    assert F7.to_json() == {"p": 7, "a": 6, "b": 1}
    assert point_to_json((3, 5)) == {"x": 3, "y": 5}
    assert point_to_json(INFINITY) == "infinity"
