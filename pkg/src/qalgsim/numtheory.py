"""Integer and modular arithmetic used by the algorithms and their classical checks."""

from __future__ import annotations

import math
import random
from dataclasses import dataclass, field
from fractions import Fraction
from functools import reduce
from typing import List, Optional, Sequence, Tuple

from .errors import DomainError

# The first 13 primes are a deterministic witness set for n < 3.317e24.
_MR_BASES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41)
_MR_DETERMINISTIC_LIMIT = 3_317_044_064_679_887_385_961_981
_MR_RANDOM_ROUNDS = 32


@dataclass(frozen=True)
class CFExpansion:
    """Partial quotients a_1, a_2, ... of num/den in [0, 1) and their convergents.

    ``convergents[i]`` is the value of the continued fraction built from the
    first ``i`` partial quotients, so ``convergents[0]`` is always 0/1.
    """

    partial_quotients: Tuple[int, ...]
    convergents: Tuple[Fraction, ...]

    @property
    def denominators(self) -> List[int]:
        return [c.denominator for c in self.convergents]


@dataclass(frozen=True)
class Factorization:
    prime_powers: Tuple[Tuple[int, int], ...] = field(default_factory=tuple)

    def value(self) -> int:
        out = 1
        for p, e in self.prime_powers:
            out *= p**e
        return out

    def primes(self) -> List[int]:
        return [p for p, _ in self.prime_powers]

    def to_json(self) -> list:
        return [[p, e] for p, e in self.prime_powers]

    @classmethod
    def from_primes(cls, primes: Sequence[int]) -> "Factorization":
        counts: dict = {}
        for p in primes:
            counts[p] = counts.get(p, 0) + 1
        return cls(tuple(sorted(counts.items())))


def gcd_ext(a: int, b: int) -> Tuple[int, int, int]:
    """Return (g, u, v) with g = gcd(a, b) = u*a + v*b."""
    if a < 0 or b < 0:
        raise DomainError("gcd_ext expects non-negative inputs")
    if a == 0 and b == 0:
        raise DomainError("gcd of (0, 0) is undefined")
    old_r, r = a, b
    old_s, s = 1, 0
    old_t, t = 0, 1
    while r:
        q = old_r // r
        old_r, r = r, old_r - q * r
        old_s, s = s, old_s - q * s
        old_t, t = t, old_t - q * t
    return old_r, old_s, old_t


def mod_inverse(a: int, n: int) -> int:
    g, u, _ = gcd_ext(a % n, n)
    if g != 1:
        raise DomainError(f"{a} is not invertible modulo {n}")
    return u % n


def lcm(a: int, b: int) -> int:
    return a // math.gcd(a, b) * b if a and b else 0


def continued_fraction(num: int, den: int, denom_bound: int) -> CFExpansion:
    """Continued fraction of num/den, truncated before the first convergent
    whose denominator exceeds ``denom_bound``."""
    if den == 0:
        raise DomainError("zero denominator")
    if den < 0 or not 0 <= num < den:
        raise DomainError("continued_fraction expects 0 <= num < den")
    if denom_bound < 1:
        raise DomainError("denom_bound must be at least 1")
    quotients: List[int] = []
    convergents = [Fraction(0, 1)]
    # Convergent recurrence: h_k = a_k h_{k-1} + h_{k-2}, same for k.
    h_prev, h = 1, 0
    k_prev, k = 0, 1
    x, y = den, num  # invert num/den: remaining value is y/x < 1
    while y:
        a, rem = divmod(x, y)
        h_prev, h = h, a * h + h_prev
        k_prev, k = k, a * k + k_prev
        if k > denom_bound:
            break
        quotients.append(a)
        convergents.append(Fraction(h, k))
        x, y = y, rem
    return CFExpansion(tuple(quotients), tuple(convergents))


def closest_convergent(num: int, den: int, denom_bound: int) -> Fraction:
    """Last convergent of num/den whose denominator stays within the bound."""
    return continued_fraction(num, den, denom_bound).convergents[-1]


def isqrt_exact(n: int) -> Optional[int]:
    if n < 0:
        return None
    s = math.isqrt(n)
    return s if s * s == n else None


def pell_fundamental(d: int) -> Tuple[int, int]:
    """Minimal positive solution of x^2 - d y^2 = 1 via the periodic expansion of sqrt(d)."""
    if d < 2:
        raise DomainError("d must exceed 1")
    a0 = math.isqrt(d)
    if a0 * a0 == d:
        raise DomainError(f"{d} is a perfect square")
    m, q, a = 0, 1, a0
    h_prev, h = 1, a0
    k_prev, k = 0, 1
    while h * h - d * k * k != 1:
        m = q * a - m
        q = (d - m * m) // q
        a = (a0 + m) // q
        h_prev, h = h, a * h + h_prev
        k_prev, k = k, a * k + k_prev
    return h, k


def crt_combine(residues: Sequence[int], moduli: Sequence[int]) -> int:
    if len(residues) != len(moduli) or not moduli:
        raise DomainError("need matching, non-empty residue and modulus lists")
    for i, mi in enumerate(moduli):
        if mi < 1:
            raise DomainError("moduli must be positive")
        for mj in moduli[i + 1:]:
            if math.gcd(mi, mj) != 1:
                raise DomainError(f"moduli {mi} and {mj} are not coprime")
    x, m = 0, 1
    for r, mi in zip(residues, moduli):
        # lift x so that it also satisfies x = r (mod mi)
        t = ((r - x) * mod_inverse(m, mi)) % mi if mi > 1 else 0
        x += m * t
        m *= mi
    return x % m


def is_prime(n: int) -> bool:
    """Miller-Rabin; deterministic below 3.3e24, error below 2^-64 above."""
    if n < 2:
        return False
    for p in _MR_BASES:
        if n % p == 0:
            return n == p
    d, s = n - 1, 0
    while d % 2 == 0:
        d //= 2
        s += 1
    if n < _MR_DETERMINISTIC_LIMIT:
        bases: Sequence[int] = _MR_BASES
    else:
        rnd = random.Random(n)
        bases = [rnd.randrange(2, n - 1) for _ in range(_MR_RANDOM_ROUNDS)]
    for a in bases:
        x = pow(a, d, n)
        if x in (1, n - 1):
            continue
        for _ in range(s - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True


def integer_root(n: int, k: int) -> int:
    """floor(n ** (1/k)) computed exactly."""
    if n < 2:
        return n
    x = 1 << ((n.bit_length() + k - 1) // k)
    while True:
        y = ((k - 1) * x + n // x ** (k - 1)) // k
        if y >= x:
            return x
        x = y


def is_perfect_power(n: int) -> Optional[Tuple[int, int]]:
    """Return (base, exponent) with the largest exponent >= 2, or None."""
    if n < 2:
        return None
    for k in range(n.bit_length(), 1, -1):
        b = integer_root(n, k)
        if b > 1 and b**k == n:
            return b, k
    return None


def jacobi(a: int, n: int) -> int:
    if n <= 0 or n % 2 == 0:
        raise DomainError("Jacobi symbol needs an odd positive modulus")
    a %= n
    result = 1
    while a:
        while a % 2 == 0:
            a //= 2
            if n % 8 in (3, 5):
                result = -result
        a, n = n, a
        if a % 4 == 3 and n % 4 == 3:
            result = -result
        a %= n
    return result if n == 1 else 0


def factor_trial(n: int) -> Factorization:
    """Classical factorization by trial division; fine up to ~1e12."""
    if n < 1:
        raise DomainError("factorization needs n >= 1")
    primes = []
    d = 2
    while d * d <= n:
        while n % d == 0:
            primes.append(d)
            n //= d
        d += 1 if d == 2 else 2
    if n > 1:
        primes.append(n)
    return Factorization.from_primes(primes)


def euler_phi(n: int) -> int:
    out = n
    for p, _ in factor_trial(n).prime_powers:
        out -= out // p
    return out


def multiplicative_order(a: int, n: int) -> int:
    if n < 1:
        raise DomainError("modulus must be positive")
    if math.gcd(a, n) != 1:
        raise DomainError(f"gcd({a}, {n}) != 1")
    if n == 1:
        return 1
    order = euler_phi(n)
    for p, _ in factor_trial(order).prime_powers:
        while order % p == 0 and pow(a, order // p, n) == 1:
            order //= p
    return order


def lcm_all(values: Sequence[int]) -> int:
    return reduce(lcm, values, 1)


def sqrt_mod(a: int, p: int) -> Optional[int]:
    """A square root of a modulo an odd prime p (Tonelli-Shanks), or None for non-residues."""
    a %= p
    if a == 0:
        return 0
    if p == 2:
        return a
    if pow(a, (p - 1) // 2, p) != 1:
        return None
    q, s = p - 1, 0
    while q % 2 == 0:
        q //= 2
        s += 1
    z = 2
    while pow(z, (p - 1) // 2, p) != p - 1:
        z += 1
    m, c, t, r = s, pow(z, q, p), pow(a, q, p), pow(a, (q + 1) // 2, p)
    while t != 1:
        i, t2 = 0, t
        while t2 != 1:
            t2 = t2 * t2 % p
            i += 1
        b = pow(c, 1 << (m - i - 1), p)
        m, c, t, r = i, b * b % p, t * b * b % p, r * b % p
    return r
