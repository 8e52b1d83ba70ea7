"""Hidden shifts: the shifted Legendre symbol over F_q, Gauss sum estimation by
phase estimation, and the (Z_p)^n hidden shift with linearization."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from itertools import combinations_with_replacement
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np

from .errors import DomainError, MoreSamplesNeeded, PromiseError, ResourceError
from .finitefield import FieldSpec, field_qft_matrix, mult_char_table
from .quantumsim import apply_qft, phase_estimation_distribution, sample_index

# --- shifted Legendre symbol ------------------------------------------------------


@dataclass
class ShiftInstance:
    """f_1(x) = f_0(x + s) on a domain described by ``domain``."""

    domain: str
    params: Dict
    shift: object
    oracle: Callable


def legendre_table(spec: FieldSpec) -> np.ndarray:
    """Quadratic character over field indices: 0 at 0, +1 on squares, -1 otherwise."""
    if spec.p == 2:
        raise DomainError("the quadratic character needs odd characteristic")
    chi = np.where(spec.log_table % 2 == 0, 1, -1).astype(np.int64)
    chi[0] = 0
    return chi


def legendre_oracle(spec: FieldSpec, s: int) -> Callable[[int], int]:
    """x -> chi(x + s) on field indices."""
    chi = legendre_table(spec)

    def f(x: int) -> int:
        return int(chi[spec.add_idx(int(x), s)])

    return f


def legendre_instance(spec: FieldSpec, s: int) -> ShiftInstance:
    return ShiftInstance(f"F_{spec.q}", spec.to_json(), s, legendre_oracle(spec, s))


# ancilla register values 0, 1, 2 hold chi = 0, +1, -1
_CHI_CODE = {0: 0, 1: 1, -1: 2}


@dataclass
class LegendreAttempt:
    result: int
    branch: str  # "zero" when step 2 found chi = 0, else "fourier"
    states: Dict[str, np.ndarray] = field(default_factory=dict, repr=False)

    def to_json(self) -> dict:
        return {"result": self.result, "branch": self.branch}


def _field_ft(spec: FieldSpec) -> np.ndarray:
    if spec.r == 1:
        return None  # prime fields use the FFT
    return field_qft_matrix(spec)


def _apply_ft(spec: FieldSpec, F, vec: np.ndarray) -> np.ndarray:
    return apply_qft(vec) if F is None else F @ vec


def legendre_attempt(spec: FieldSpec, oracle: Callable[[int], int], rng: np.random.Generator,
                     keep_states: bool = False) -> LegendreAttempt:
    """Steps 1-6 once, with the oracle written into an explicit ancilla."""
    q = spec.q
    chi = legendre_table(spec)
    # step 1: |x, f(x)>
    values = np.array([oracle(x) for x in range(q)], dtype=np.int64)
    if not np.isin(values, (-1, 0, 1)).all():
        raise PromiseError("oracle values are not Legendre symbols")
    codes = np.array([_CHI_CODE[int(v)] for v in values])
    joint = np.zeros((q, 3), dtype=complex)
    joint[np.arange(q), codes] = 1 / math.sqrt(q)
    # step 2: is the ancilla |0>?
    p_zero = float(np.sum(np.abs(joint[:, 0]) ** 2))
    if rng.random() < p_zero:
        x = sample_index(np.abs(joint[:, 0]) ** 2, rng)
        return LegendreAttempt(int(spec.neg_idx(x)), "zero")
    joint[:, 0] = 0
    joint /= math.sqrt(1 - p_zero)
    # step 3: phase (-1)^b on the sign bit, then uncompute f into the ancilla
    joint[:, 2] *= -1
    psi3 = joint[np.arange(q), codes]
    # step 4: Fourier transform over the field
    F = _field_ft(spec)
    psi4 = _apply_ft(spec, F, psi3)
    # step 5: |y> -> chi(y)|y> on nonzero y
    corr = chi.astype(complex)
    corr[0] = 1
    psi5 = corr * psi4
    # step 6: Fourier transform and measure
    psi6 = _apply_ft(spec, F, psi5)
    probs = np.abs(psi6) ** 2
    out = sample_index(probs, rng)
    states = {"step3": psi3, "step4": psi4, "step5": psi5, "step6": psi6} if keep_states else {}
    return LegendreAttempt(int(out), "fourier", states)


def legendre_success_probability(q: int) -> float:
    """Exact per-attempt success probability: 1/q + ((q-1)/q)^2."""
    return 1 / q + ((q - 1) / q) ** 2


def legendre_verify(spec: FieldSpec, oracle: Callable[[int], int], s: int, rng: np.random.Generator,
                    probes: int = 3) -> bool:
    chi = legendre_table(spec)
    for x in rng.integers(0, spec.q, size=probes):
        if oracle(int(x)) != chi[spec.add_idx(int(x), s)]:
            return False
    return True


@dataclass
class LegendreResult:
    shift: int
    attempts: List[LegendreAttempt]

    def to_json(self) -> dict:
        return {"shift": self.shift, "attempts": [a.to_json() for a in self.attempts]}


def legendre_shift_fq_run(spec: FieldSpec, oracle: Callable[[int], int], rng: np.random.Generator,
                          max_attempts: int = 64, probes: int = 3) -> LegendreResult:
    attempts = []
    for _ in range(max_attempts):
        at = legendre_attempt(spec, oracle, rng)
        attempts.append(at)
        if legendre_verify(spec, oracle, at.result, rng, probes):
            return LegendreResult(at.result, attempts)
    raise PromiseError(f"no shift passed verification in {max_attempts} attempts")


def legendre_shift_fq(spec: FieldSpec, oracle: Callable[[int], int], rng: np.random.Generator) -> int:
    """Hidden shift s (as a field index) of x -> chi(x + s) on field indices."""
    return legendre_shift_fq_run(spec, oracle, rng).shift


def legendre_shift(p: int, oracle: Callable[[int], int], rng: np.random.Generator) -> int:
    """Hidden shift s of x -> chi(x + s) over the prime field F_p."""
    return legendre_shift_fq(FieldSpec(p), oracle, rng)


# --- Gauss sums ----------------------------------------------------------------------

def gauss_unitary(spec: FieldSpec, a: int, b: int) -> np.ndarray:
    """The single-qubit conditional phase as an operator on qubit (x) ancilla.

    The |0> block is the identity (the two phase-kickback factors cancel).
    The |1> block is D_a F M_b D_a: kickback chi_a, multiply by b, field
    transform, then the chi_a correction, with chi_a(0) read as 1.  On the
    ancilla state |F_q^*> the |1> block has eigenvalue G(chi_a, psi_b)/sqrt q.
    """
    q = spec.q
    if a % (q - 1) == 0 or b % q == 0:
        raise DomainError("Gauss sum estimation needs nontrivial characters")
    D = mult_char_table(spec, a)
    D[0] = 1
    M = np.zeros((q, q))
    M[spec.mul_idx(np.full(q, b), np.arange(q)), np.arange(q)] = 1
    F = field_qft_matrix(spec)
    W1 = (D[:, None] * F) @ M * D[None, :]
    out = np.zeros((2 * q, 2 * q), dtype=complex)
    out[:q, :q] = np.eye(q)
    out[q:, q:] = W1
    return out


def gauss_eigenstate(spec: FieldSpec) -> np.ndarray:
    """|1> (x) uniform superposition over the nonzero field elements."""
    q = spec.q
    v = np.zeros(2 * q, dtype=complex)
    v[q + 1:] = 1 / math.sqrt(q - 1)
    return v


def gauss_bits(delta: float) -> int:
    """Bits of phase estimation so that one grid step is at most delta."""
    if not 0 < delta < math.pi:
        raise DomainError("precision must lie in (0, pi)")
    return math.ceil(math.log2(2 * math.pi / delta))


def _iterated_powers(U: np.ndarray):
    cache: List[np.ndarray] = []

    def act(x: int, vec: np.ndarray) -> np.ndarray:
        if not cache or cache[0] is not vec:
            cache.clear()
            cache.append(vec)
        while len(cache) <= x + 1:
            cache.append(U @ cache[-1])
        return cache[x + 1]

    return act


def gauss_phase_distribution(spec: FieldSpec, a: int, b: int, delta: float) -> np.ndarray:
    n = gauss_bits(delta)
    U = gauss_unitary(spec, a, b)
    return phase_estimation_distribution(_iterated_powers(U), gauss_eigenstate(spec), n)


def gauss_sum_estimate(spec: FieldSpec, a: int, b: int, delta: float, rng: np.random.Generator) -> float:
    """Estimate phi in [0, 2 pi) with G(chi_a, psi_b) = sqrt(q) e^{i phi}."""
    probs = gauss_phase_distribution(spec, a, b, delta)
    y = sample_index(probs, rng)
    return 2 * math.pi * y / len(probs)


def circular_distance(x: float, y: float) -> float:
    d = (x - y) % (2 * math.pi)
    return min(d, 2 * math.pi - d)


# --- (Z_p)^n hidden shift --------------------------------------------------------------

def _check_shift(p: int, n: int, s: Sequence[int]) -> np.ndarray:
    s = np.asarray(s, dtype=np.int64) % p
    if s.shape != (n,):
        raise DomainError("shift must have n coordinates")
    if not s.any():
        raise DomainError("the zero shift is degenerate")
    return s


def zpn_shift_samples(p: int, n: int, s: Sequence[int], count: int, rng: np.random.Generator,
                      batch: int = 256) -> np.ndarray:
    """``count`` outcomes y, each from a full run conditioned on the second register reading 1.

    A run prepares (|z,0> + |z+s,1>)/sqrt 2 for uniform z, Fourier transforms
    over (Z_p)^n and Z_2, and measures; runs reading 0 are repeated.
    """
    s = _check_shift(p, n, s)
    if p**n * 2 > 2**22:
        raise ResourceError("state simulation limited to p^n <= 2^21")
    shape = (p,) * n
    size = p**n
    strides = np.array([p ** (n - 1 - i) for i in range(n)], dtype=np.int64)
    out: List[int] = []
    while len(out) < count:
        b = min(batch, 2 * (count - len(out)) + 4)
        z = rng.integers(0, size, size=b)
        zc = (z[:, None] // strides) % p
        zs = ((zc + s) % p) @ strides
        amps = np.zeros((b, size, 2), dtype=complex)
        amps[np.arange(b), z, 0] = amps[np.arange(b), zs, 1] = 1 / math.sqrt(2)
        amps = apply_qft(amps.reshape((b,) + shape + (2,)), axes=tuple(range(1, n + 2))).reshape(b, size, 2)
        probs = np.abs(amps.reshape(b, -1)) ** 2
        cdf = np.cumsum(probs, axis=1)
        idx = np.minimum((cdf < rng.random(b)[:, None] * cdf[:, -1:]).sum(axis=1), 2 * size - 1)
        y, bit = np.divmod(idx, 2)
        out.extend(int(v) for v in y[bit == 1])
    ys = np.array(out[:count], dtype=np.int64)
    return (ys[:, None] // strides) % p


def zpn_shift_sample(p: int, n: int, s: Sequence[int], rng: np.random.Generator) -> np.ndarray:
    return zpn_shift_samples(p, n, s, 1, rng)[0]


def zpn_shift_distribution(p: int, n: int, s: Sequence[int]) -> np.ndarray:
    """Exact Pr(y | second register 1), by averaging the simulated state over z."""
    s = _check_shift(p, n, s)
    size = p**n
    strides = np.array([p ** (n - 1 - i) for i in range(n)], dtype=np.int64)
    coords = (np.arange(size)[:, None] // strides) % p
    zs = ((coords + s) % p) @ strides
    amps = np.zeros((size, size, 2), dtype=complex)
    amps[np.arange(size), np.arange(size), 0] = amps[np.arange(size), zs, 1] = 1 / math.sqrt(2)
    amps = apply_qft(amps.reshape((size,) + (p,) * n + (2,)), axes=tuple(range(1, n + 2))).reshape(size, size, 2)
    joint = (np.abs(amps) ** 2).mean(axis=0)
    return joint[:, 1] / joint[:, 1].sum()


def zpn_shift_formula(p: int, n: int, s: Sequence[int]) -> np.ndarray:
    """(2/p^n) sin^2(pi y.s / p) over y in C order."""
    s = _check_shift(p, n, s)
    strides = np.array([p ** (n - 1 - i) for i in range(n)], dtype=np.int64)
    coords = (np.arange(p**n)[:, None] // strides) % p
    dots = (coords @ s) % p
    return 2 / p**n * np.sin(np.pi * dots / p) ** 2


def solve_mod_p(A: np.ndarray, b: np.ndarray, p: int) -> Tuple[Optional[np.ndarray], int]:
    """Gaussian elimination over F_p.  Returns (unique solution or None, rank)."""
    A = np.asarray(A, dtype=np.int64) % p
    b = np.asarray(b, dtype=np.int64) % p
    rows, cols = A.shape
    M = np.concatenate([A, b[:, None]], axis=1)
    r = 0
    pivots = []
    for c in range(cols):
        nz = np.flatnonzero(M[r:, c])
        if nz.size == 0:
            continue
        piv = r + nz[0]
        M[[r, piv]] = M[[piv, r]]
        M[r] = M[r] * pow(int(M[r, c]), -1, p) % p
        others = np.flatnonzero(M[:, c])
        others = others[others != r]
        M[others] = (M[others] - M[others, c:c + 1] * M[r]) % p
        pivots.append(c)
        r += 1
        if r == rows:
            break
    if M[r:, cols].any():
        raise PromiseError("inconsistent linear system")
    if r < cols:
        return None, r
    x = np.zeros(cols, dtype=np.int64)
    for i, c in enumerate(pivots):
        x[c] = M[i, cols]
    return x, r


@dataclass
class LinearizedSystem:
    """Rows of (y . s)^{p-1} = 1 with every degree-(p-1) monomial of s as an unknown."""

    p: int
    n: int
    monomials: List[Tuple[int, ...]]
    rows: List[np.ndarray] = field(default_factory=list)
    rhs: List[int] = field(default_factory=list)

    @classmethod
    def empty(cls, p: int, n: int) -> "LinearizedSystem":
        monos = list(combinations_with_replacement(range(n), p - 1))
        return cls(p, n, monos)

    @property
    def unknowns(self) -> int:
        return len(self.monomials)

    def add_sample(self, y: Sequence[int]) -> None:
        y = [int(v) % self.p for v in y]
        row = np.zeros(self.unknowns, dtype=np.int64)
        for j, mono in enumerate(self.monomials):
            counts: Dict[int, int] = {}
            for i in mono:
                counts[i] = counts.get(i, 0) + 1
            coef = math.factorial(self.p - 1)
            term = 1
            for i, c in counts.items():
                coef //= math.factorial(c)
                term = term * pow(y[i], c, self.p) % self.p
            row[j] = coef * term % self.p
        self.rows.append(row)
        self.rhs.append(1)

    def solve(self) -> np.ndarray:
        if len(self.rows) < self.unknowns:
            raise MoreSamplesNeeded(f"{len(self.rows)} rows for {self.unknowns} unknowns")
        z, rank = solve_mod_p(np.array(self.rows), np.array(self.rhs), self.p)
        if z is None:
            raise MoreSamplesNeeded(f"rank {rank} < {self.unknowns}")
        return z


def _recover_shift(system: LinearizedSystem, z: np.ndarray) -> np.ndarray:
    """Read s (normalised so its first nonzero coordinate is 1) off the monomial values."""
    p, n = system.p, system.n
    index = {m: j for j, m in enumerate(system.monomials)}
    for i in range(n):
        if z[index[(i,) * (p - 1)]] % p:
            s = np.zeros(n, dtype=np.int64)
            for j in range(n):
                mono = tuple(sorted((i,) * (p - 2) + (j,)))
                s[j] = z[index[mono]] % p
            return s
    raise PromiseError("linearized solution has no nonzero coordinate")


def zpn_shift_solve(p: int, n: int, samples: Sequence[Sequence[int]],
                    holdout: Optional[Sequence[Sequence[int]]] = None) -> List[Tuple[int, ...]]:
    """All candidates alpha s, alpha in F_p^*, consistent with the samples.

    Raises MoreSamplesNeeded while the linear system is underdetermined.
    """
    if p not in (2, 3, 5):
        raise DomainError("linearization is implemented for p in {2, 3, 5}")
    system = LinearizedSystem.empty(p, n)
    for y in samples:
        system.add_sample(y)
    z = system.solve()
    s = _recover_shift(system, z)
    for y in list(samples) + list(holdout or []):
        if int(np.dot(np.asarray(y, dtype=np.int64) % p, s)) % p == 0:
            raise PromiseError("recovered shift violates a sample inequation")
    return sorted(tuple(int(v) for v in (a * s) % p) for a in range(1, p))


@dataclass
class ZpnShiftResult:
    candidates: List[Tuple[int, ...]]
    samples_used: int

    def to_json(self) -> dict:
        return {"candidates": [list(c) for c in self.candidates], "samples_used": self.samples_used}


def zpn_shift(p: int, n: int, s: Sequence[int], rng: np.random.Generator,
              initial: Optional[int] = None, max_samples: int = 100000) -> ZpnShiftResult:
    """Sample and solve, doubling the sample count while the system is underdetermined."""
    unknowns = math.comb(n + p - 2, p - 1)
    count = initial or 2 * unknowns + 8
    ys = list(zpn_shift_samples(p, n, s, count, rng))
    while True:
        holdout = list(zpn_shift_samples(p, n, s, 8, rng))
        try:
            return ZpnShiftResult(zpn_shift_solve(p, n, ys, holdout), len(ys) + len(holdout))
        except MoreSamplesNeeded:
            if len(ys) >= max_samples:
                raise ResourceError("sample budget exhausted")
            ys += list(zpn_shift_samples(p, n, s, len(ys), rng))
