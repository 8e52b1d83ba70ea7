import math
from fractions import Fraction

import pytest
import sympy
from hypothesis import given, settings
from hypothesis import strategies as st

from qalgsim.errors import DomainError
from qalgsim.numtheory import (
    closest_convergent,
    continued_fraction,
    crt_combine,
    factor_trial,
    gcd_ext,
    is_perfect_power,
    is_prime,
    jacobi,
    multiplicative_order,
    pell_fundamental,
    sqrt_mod,
)


def test_gcd_ext_examples():
    g, u, v = gcd_ext(12, 8)
    assert g == 4 and 12 * u + 8 * v == 4
    assert gcd_ext(3, 5) == (1, 2, -1)
    assert gcd_ext(5, 15)[0] == 5


def test_gcd_ext_rejects_zero_pair():
    with pytest.raises(DomainError):
        gcd_ext(0, 0)


@given(st.integers(0, 2**64), st.integers(0, 2**64))
def test_gcd_ext_bezout(a, b):
    if a == b == 0:
        return
    g, u, v = gcd_ext(a, b)
    assert g == math.gcd(a, b) and u * a + v * b == g


def test_continued_fraction_examples():
    assert continued_fraction(1, 2, 10).convergents == (Fraction(0), Fraction(1, 2))
    assert Fraction(3, 10) in continued_fraction(77, 256, 16).convergents
    N, r = 2**10, 6
    assert 6 in continued_fraction(round(N / r), N, 32).denominators


def test_continued_fraction_errors():
    with pytest.raises(DomainError):
        continued_fraction(1, 0, 5)
    with pytest.raises(DomainError):
        continued_fraction(3, 2, 5)


@given(st.integers(0, 10**6), st.integers(1, 10**6))
def test_continued_fraction_structure(num, den):
    num %= den
    cf = continued_fraction(num, den, den)
    dens = cf.denominators
    assert all(a < b for a, b in zip(dens[1:], dens[2:]))
    assert cf.convergents[-1] == Fraction(num, den)
    for i, c in enumerate(cf.convergents):
        # each convergent is the truncated expansion of its prefix
        val = Fraction(0)
        for a in reversed(cf.partial_quotients[:i]):
            val = 1 / (a + val)
        assert val == c


def test_convergent_guarantee_exhaustive():
    for N in (64, 256, 1024):
        for r in range(2, math.isqrt(N) + 1):
            for j in range(1, r):
                k = round(j * N / r)
                assert r // math.gcd(j, r) in continued_fraction(k, N, r).denominators


@settings(max_examples=300)
@given(st.integers(16, 2**16), st.data())
def test_convergent_guarantee_random(N, data):
    r = data.draw(st.integers(2, math.isqrt(N)))
    j = data.draw(st.integers(1, r - 1))
    k = round(j * N / r) % N
    assert closest_convergent(k, N, r).denominator == r // math.gcd(j, r)


def test_pell_rows():
    assert pell_fundamental(2) == (3, 2)
    assert pell_fundamental(5) == (9, 4)
    assert pell_fundamental(13) == (649, 180)
    with pytest.raises(DomainError):
        pell_fundamental(9)


def test_pell_all_squarefree_up_to_200():
    for d in range(2, 201):
        if not sympy.ntheory.factor_.core(d) == d:
            continue
        x, y = pell_fundamental(d)
        assert x * x - d * y * y == 1
        # minimality: no smaller y works
        assert all(math.isqrt(d * t * t + 1) ** 2 != d * t * t + 1 for t in range(1, min(y, 2000)))


def test_crt_examples():
    assert crt_combine([1], [7]) == 1
    assert crt_combine([1, 2], [3, 5]) == 7
    assert crt_combine([0, 0], [3, 5]) == 0
    with pytest.raises(DomainError):
        crt_combine([1, 1], [4, 6])


@given(st.lists(st.sampled_from([3, 4, 5, 7, 11, 13, 17]), min_size=1, max_size=4, unique=True), st.data())
def test_crt_matches_sympy(moduli, data):
    residues = [data.draw(st.integers(0, m - 1)) for m in moduli]
    x = crt_combine(residues, moduli)
    assert 0 <= x < math.prod(moduli)
    assert all(x % m == r for r, m in zip(residues, moduli))
    assert x == sympy.ntheory.modular.crt(moduli, residues)[0]


def test_multiplicative_order_examples():
    assert multiplicative_order(1, 15) == 1
    assert multiplicative_order(2, 15) == 4
    assert multiplicative_order(7, 15) == 4
    with pytest.raises(DomainError):
        multiplicative_order(3, 15)


@given(st.integers(2, 5000), st.integers(1, 5000))
def test_multiplicative_order_matches_sympy(N, a):
    a %= N
    if math.gcd(a, N) != 1:
        return
    assert multiplicative_order(a, N) == sympy.n_order(a, N)


def test_prime_and_power_examples():
    assert is_perfect_power(27) == (3, 3)
    assert not is_prime(91) and is_perfect_power(91) is None
    assert is_prime(17)


@given(st.integers(2, 10**12))
def test_is_prime_matches_sympy(n):
    assert is_prime(n) == sympy.isprime(n)


def test_is_prime_large():
    assert is_prime(2**89 - 1)
    assert not is_prime((2**61 - 1) * (2**31 - 1))


@given(st.integers(2, 10**6))
def test_perfect_power_matches_sympy(n):
    got = is_perfect_power(n)
    want = sympy.perfect_power(n)
    assert (got is None) == (want is False)
    if got:
        assert got[0] ** got[1] == n


def test_jacobi_examples():
    assert jacobi(2, 15) == 1
    assert jacobi(2, 5) == -1
    assert jacobi(0, 7) == 0
    with pytest.raises(DomainError):
        jacobi(3, 8)


def test_jacobi_euler_criterion():
    for p in sympy.primerange(3, 102):
        for a in range(p):
            e = pow(a, (p - 1) // 2, p)
            assert jacobi(a, p) == (e if e <= 1 else -1)


@given(st.integers(-10**6, 10**6), st.integers(1, 5000))
def test_jacobi_matches_sympy(a, half):
    N = 2 * half + 1
    assert jacobi(a, N) == sympy.jacobi_symbol(a, N)


@given(st.integers(2, 10**6))
def test_factor_trial_product(n):
    f = factor_trial(n)
    assert f.value() == n
    assert dict(f.prime_powers) == sympy.factorint(n)


def test_sqrt_mod():
    for p in sympy.primerange(3, 200):
        for a in range(p):
            r = sqrt_mod(a, p)
            if jacobi(a, p) == -1:
                assert r is None
            else:
                assert r * r % p == a
