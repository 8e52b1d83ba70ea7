"""Arithmetic in GF(p^r) with a fixed polynomial basis.

Elements are stored as an index ``sum(c_i * p**i)`` over their coefficient
vector (c_0 is the constant term).  Comparing indices therefore compares the
highest-degree coefficient first, which is the order used to pick the modulus
and the generator.
"""

from __future__ import annotations

import cmath
import math
from typing import Iterator, List, Sequence, Tuple, Union

import numpy as np

from .errors import DomainError, ResourceError
from .numtheory import factor_trial, is_prime, mod_inverse

MAX_FIELD_SIZE = 10**6

Poly = List[int]


# --- polynomials over F_p, coefficient lists low degree first ---------------

def _trim(a: Poly) -> Poly:
    while a and a[-1] == 0:
        a.pop()
    return a


def _poly_sub(a: Poly, b: Poly, p: int) -> Poly:
    n = max(len(a), len(b))
    out = [((a[i] if i < len(a) else 0) - (b[i] if i < len(b) else 0)) % p for i in range(n)]
    return _trim(out)


def _poly_mul(a: Poly, b: Poly, p: int) -> Poly:
    if not a or not b:
        return []
    out = [0] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        if x:
            for j, y in enumerate(b):
                out[i + j] = (out[i + j] + x * y) % p
    return _trim(out)


def _poly_mod(a: Poly, m: Poly, p: int) -> Poly:
    a = _trim(list(a))
    inv_lead = mod_inverse(m[-1], p)
    dm = len(m) - 1
    while len(a) - 1 >= dm:
        c = a[-1] * inv_lead % p
        shift = len(a) - 1 - dm
        for i, y in enumerate(m):
            a[shift + i] = (a[shift + i] - c * y) % p
        _trim(a)
    return a


def _poly_gcd(a: Poly, b: Poly, p: int) -> Poly:
    a, b = _trim(list(a)), _trim(list(b))
    while b:
        a, b = b, _poly_mod(a, b, p)
    return a


def _poly_powmod(base: Poly, e: int, m: Poly, p: int) -> Poly:
    result: Poly = [1]
    base = _poly_mod(base, m, p)
    while e:
        if e & 1:
            result = _poly_mod(_poly_mul(result, base, p), m, p)
        base = _poly_mod(_poly_mul(base, base, p), m, p)
        e >>= 1
    return result


def is_irreducible(modulus: Sequence[int], p: int) -> bool:
    """A polynomial f of degree r is irreducible iff gcd(f, x^(p^k) - x) = 1 for k <= r/2."""
    f = _trim([c % p for c in modulus])
    r = len(f) - 1
    if r < 1:
        return False
    if r == 1:
        return True
    h: Poly = [0, 1]
    for _ in range(r // 2):
        h = _poly_powmod(h, p, f, p)
        if len(_poly_gcd(f, _poly_sub(h, [0, 1], p), p)) > 1:
            return False
    return True


def smallest_irreducible(p: int, r: int) -> Tuple[int, ...]:
    for v in range(p**r):
        coeffs = [(v // p**i) % p for i in range(r)] + [1]
        if is_irreducible(coeffs, p):
            return tuple(coeffs)
    raise AssertionError("an irreducible polynomial of every degree exists")


# --- the field ----------------------------------------------------------------

class FieldSpec:
    """GF(p^r) = F_p[alpha]/(modulus), with log/antilog tables for a fixed generator."""

    def __init__(self, p: int, r: int = 1, modulus: Sequence[int] = None):
        if not is_prime(p):
            raise DomainError(f"{p} is not prime")
        if r < 1:
            raise DomainError("extension degree must be at least 1")
        if p**r > MAX_FIELD_SIZE:
            raise ResourceError(f"GF({p}^{r}) exceeds the table size cap")
        if modulus is None:
            modulus = smallest_irreducible(p, r)
        else:
            modulus = tuple(int(c) % p for c in modulus)
            if len(modulus) != r + 1 or modulus[-1] != 1:
                raise DomainError("modulus must be monic of degree r")
            if not is_irreducible(modulus, p):
                raise DomainError("modulus is reducible")
        self.p = p
        self.r = r
        self.q = p**r
        self.modulus = tuple(modulus)
        self._powers = np.array([p**i for i in range(r)], dtype=np.int64)
        self.digits = (np.arange(self.q)[:, None] // self._powers[None, :]) % p
        self._find_generator()
        self._trace = None

    # index <-> coefficient conversion
    def _poly(self, idx: int) -> Poly:
        return _trim([int(c) for c in self.digits[idx]])

    def _index(self, poly: Sequence[int]) -> int:
        return int(sum((int(c) % self.p) * self.p**i for i, c in enumerate(poly)))

    def _find_generator(self) -> None:
        q, p, m = self.q, self.p, list(self.modulus)
        n = q - 1
        prime_divs = factor_trial(n).primes() if n > 1 else []
        gen = 1
        for cand in range(1, q):
            poly = self._poly(cand)
            if all(_poly_powmod(poly, n // ell, m, p) != [1] for ell in prime_divs):
                gen = cand
                break
        exp = np.zeros(n, dtype=np.int64)
        log = np.full(q, -1, dtype=np.int64)
        cur: Poly = [1]
        gpoly = self._poly(gen)
        for k in range(n):
            idx = self._index(cur)
            exp[k] = idx
            log[idx] = k
            cur = _poly_mod(_poly_mul(cur, gpoly, p), m, p)
        self.generator = gen
        self.exp_table = exp
        self.log_table = log

    # vectorised index arithmetic
    def add_idx(self, a, b):
        d = (self.digits[a] + self.digits[b]) % self.p
        return d @ self._powers

    def sub_idx(self, a, b):
        d = (self.digits[a] - self.digits[b]) % self.p
        return d @ self._powers

    def neg_idx(self, a):
        return ((-self.digits[a]) % self.p) @ self._powers

    def mul_idx(self, a, b):
        a = np.asarray(a)
        b = np.asarray(b)
        la = self.log_table[a]
        lb = self.log_table[b]
        out = self.exp_table[(la + lb) % (self.q - 1)]
        return np.where((a == 0) | (b == 0), 0, out)

    def inv_idx(self, a):
        a = np.asarray(a)
        if np.any(a == 0):
            raise DomainError("zero has no inverse")
        return self.exp_table[(-self.log_table[a]) % (self.q - 1)]

    def pow_idx(self, a: int, e: int) -> int:
        if a == 0:
            if e < 0:
                raise DomainError("zero has no inverse")
            return 1 if e == 0 else 0
        return int(self.exp_table[(int(self.log_table[a]) * e) % (self.q - 1)])

    @property
    def trace_table(self) -> np.ndarray:
        if self._trace is None:
            acc = np.arange(self.q)
            cur = np.arange(self.q)
            for _ in range(self.r - 1):
                cur = self._frob_arr(cur)
                acc = self.add_idx(acc, cur)
            self._trace = acc.astype(np.int64)
        return self._trace

    def _frob_arr(self, a):
        a = np.asarray(a)
        out = self.exp_table[(self.log_table[a] * self.p) % (self.q - 1)]
        return np.where(a == 0, 0, out)

    # element helpers
    def elem(self, value: Union[int, Sequence[int], "FieldElem"]) -> "FieldElem":
        """Build an element from its coefficient list or (for an int) its index."""
        if isinstance(value, FieldElem):
            _check_same(self, value.spec)
            return value
        if isinstance(value, (int, np.integer)):
            if not 0 <= value < self.q:
                raise DomainError("element index out of range")
            return FieldElem(self, int(value))
        coeffs = list(value)
        if len(coeffs) != self.r:
            raise DomainError(f"expected {self.r} coefficients")
        return FieldElem(self, self._index(coeffs))

    def base(self, c: int) -> "FieldElem":
        return FieldElem(self, c % self.p)

    @property
    def zero(self) -> "FieldElem":
        return FieldElem(self, 0)

    @property
    def one(self) -> "FieldElem":
        return FieldElem(self, 1)

    @property
    def alpha(self) -> "FieldElem":
        return FieldElem(self, self._index(_poly_mod([0, 1], list(self.modulus), self.p)))

    def elements(self) -> Iterator["FieldElem"]:
        for i in range(self.q):
            yield FieldElem(self, i)

    def to_json(self) -> dict:
        return {"p": self.p, "r": self.r, "modulus": list(self.modulus)}

    def __eq__(self, other) -> bool:
        return isinstance(other, FieldSpec) and (self.p, self.r, self.modulus) == (other.p, other.r, other.modulus)

    def __hash__(self) -> int:
        return hash((self.p, self.r, self.modulus))

    def __repr__(self) -> str:
        return f"FieldSpec(p={self.p}, r={self.r}, modulus={self.modulus})"


def _check_same(s1: FieldSpec, s2: FieldSpec) -> None:
    if s1 is not s2 and s1 != s2:
        raise DomainError("elements come from different fields")


class FieldElem:
    __slots__ = ("spec", "idx")

    def __init__(self, spec: FieldSpec, idx: int):
        self.spec = spec
        self.idx = idx

    @property
    def coeffs(self) -> Tuple[int, ...]:
        return tuple(int(c) for c in self.spec.digits[self.idx])

    def __add__(self, other):
        return ff_add(self, other)

    def __sub__(self, other):
        _check_same(self.spec, other.spec)
        return FieldElem(self.spec, int(self.spec.sub_idx(self.idx, other.idx)))

    def __neg__(self):
        return FieldElem(self.spec, int(self.spec.neg_idx(self.idx)))

    def __mul__(self, other):
        return ff_mul(self, other)

    def __truediv__(self, other):
        return ff_mul(self, ff_inv(other))

    def __pow__(self, e: int):
        return ff_pow(self, e)

    def __eq__(self, other):
        return isinstance(other, FieldElem) and self.idx == other.idx and self.spec == other.spec

    def __hash__(self):
        return hash((self.spec, self.idx))

    def __bool__(self):
        return self.idx != 0

    def __repr__(self):
        terms = []
        for i, c in enumerate(self.coeffs):
            if c:
                mono = "1" if i == 0 else ("a" if i == 1 else f"a^{i}")
                terms.append(mono if c == 1 and i else f"{c}" if i == 0 else f"{c}*{mono}")
        return " + ".join(reversed(terms)) or "0"


def ff_add(x: FieldElem, y: FieldElem) -> FieldElem:
    _check_same(x.spec, y.spec)
    return FieldElem(x.spec, int(x.spec.add_idx(x.idx, y.idx)))


def ff_mul(x: FieldElem, y: FieldElem) -> FieldElem:
    _check_same(x.spec, y.spec)
    return FieldElem(x.spec, int(x.spec.mul_idx(x.idx, y.idx)))


def ff_inv(x: FieldElem) -> FieldElem:
    if x.idx == 0:
        raise DomainError("zero has no inverse")
    return FieldElem(x.spec, int(x.spec.inv_idx(x.idx)))


def ff_pow(x: FieldElem, e: int) -> FieldElem:
    return FieldElem(x.spec, x.spec.pow_idx(x.idx, e))


def frobenius(x: FieldElem, j: int = 1) -> FieldElem:
    """x^(p^j)."""
    spec = x.spec
    return FieldElem(spec, spec.pow_idx(x.idx, spec.p ** (j % spec.r)))


def trace(x: FieldElem) -> int:
    return int(x.spec.trace_table[x.idx])


def discrete_log(x: FieldElem) -> int:
    if x.idx == 0:
        raise DomainError("zero has no logarithm")
    return int(x.spec.log_table[x.idx])


def mult_char(a: int, x: FieldElem) -> complex:
    """chi_a(g^j) = exp(2 pi i a j / (q-1)); chi_a(0) = 0 unless a = 0 (mod q-1)."""
    n = x.spec.q - 1
    if x.idx == 0:
        return 1.0 + 0j if a % n == 0 else 0j
    return _root_of_unity(a * discrete_log(x), n)


def add_char(b: FieldElem, x: FieldElem) -> complex:
    """psi_b(x) = exp(2 pi i Tr(b x) / p)."""
    return _root_of_unity(trace(ff_mul(b, x)), b.spec.p)


def _root_of_unity(k: int, n: int) -> complex:
    k %= n
    # exact values for the real cases keep sums like the Legendre table clean
    if k == 0:
        return 1.0 + 0j
    if 2 * k == n:
        return -1.0 + 0j
    return cmath.exp(2j * math.pi * k / n)


def mult_char_table(spec: FieldSpec, a: int) -> np.ndarray:
    """chi_a over all field indices, chi_a(0) = 0 for nontrivial a."""
    n = spec.q - 1
    vals = np.exp(2j * np.pi * ((a * spec.log_table) % n) / n)
    vals[0] = 1.0 if a % n == 0 else 0.0
    return vals


def add_char_table(spec: FieldSpec, b: int) -> np.ndarray:
    """psi_b over all field indices."""
    tr = spec.trace_table[spec.mul_idx(np.full(spec.q, b), np.arange(spec.q))]
    return np.exp(2j * np.pi * tr / spec.p)


def quadratic_char_index(spec: FieldSpec) -> int:
    if spec.p == 2:
        raise DomainError("characteristic 2 has no quadratic character")
    return (spec.q - 1) // 2


def gauss_sum_classical(a: int, b: FieldElem, spec: FieldSpec, strict: bool = True) -> complex:
    """Sum over x of chi_a(x) psi_b(x).

    With ``strict`` (the default) trivial characters are rejected; pass
    ``strict=False`` to evaluate the degenerate sums too.
    """
    _check_same(spec, b.spec)
    if strict and (a % (spec.q - 1) == 0 or b.idx == 0):
        raise DomainError("Gauss sums need nontrivial characters")
    return complex(np.sum(mult_char_table(spec, a) * add_char_table(spec, b.idx)))


def field_qft_matrix(spec: FieldSpec) -> np.ndarray:
    """Unitary with entries exp(2 pi i Tr(x y) / p) / sqrt(q), rows y, columns x."""
    q = spec.q
    if q > 4096:
        raise ResourceError("dense field transform limited to q <= 4096")
    xs = np.arange(q)
    prod = spec.mul_idx(xs[:, None], xs[None, :])
    return np.exp(2j * np.pi * spec.trace_table[prod] / spec.p) / math.sqrt(q)
