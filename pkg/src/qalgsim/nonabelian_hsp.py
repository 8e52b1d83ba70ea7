"""Non-Abelian hidden subgroups: normal subgroups by weak Fourier sampling, the
Kuperberg sieve for dihedral groups, and the two-copy Heisenberg algorithm."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, Tuple

import numpy as np

from .abelian_hsp import HspInstance
from .errors import DomainError, PromiseError, ResourceError
from .grouprep import FiniteGroup, HeisenbergGroup, Subgroup, fourier_matrix, irrep_row_slices, irreps, subgroup_from_mask
from .numtheory import is_prime, sqrt_mod
from .quantumsim import apply_qft, collapse_labels, sample_index

# --- normal subgroups -------------------------------------------------------------


def weak_fourier_samples(G: FiniteGroup, labels: np.ndarray, count: int, rng: np.random.Generator) -> np.ndarray:
    """Irrep indices (into ``irreps(G)``) from ``count`` runs of weak Fourier sampling.

    Each run queries the oracle on a uniform superposition, so the register
    collapses to a uniformly random coset state, then applies the Fourier
    transform over G and measures only the irrep label.
    """
    F = fourier_matrix(G)
    slices = irrep_row_slices(G)
    labels = np.asarray(labels).ravel()
    xs = rng.integers(0, G.order, size=count)
    states = (labels[:, None] == labels[xs][None, :]).astype(float)
    states /= np.sqrt(states.sum(axis=0, keepdims=True))
    power = np.abs(F @ states) ** 2
    block = np.stack([power[s].sum(axis=0) for s in slices], axis=1)
    cdf = np.cumsum(block, axis=1)
    u = rng.random(count) * cdf[:, -1]
    return np.minimum((cdf < u[:, None]).sum(axis=1), len(slices) - 1)


def weak_fourier_distribution(G: FiniteGroup, labels: np.ndarray) -> np.ndarray:
    """Exact irrep-label distribution of ``weak_fourier_samples``."""
    F = fourier_matrix(G)
    labels = np.asarray(labels).ravel()
    states = (labels[:, None] == labels[None, :]).astype(float)
    states /= np.sqrt(states.sum(axis=0, keepdims=True))
    power = (np.abs(F @ states) ** 2).mean(axis=1)
    return np.array([power[s].sum() for s in irrep_row_slices(G)])


@dataclass
class NormalHspRun:
    subgroup: Subgroup
    irreps_sampled: List[str]

    def to_json(self) -> dict:
        return {"subgroup": self.subgroup.to_json(), "irreps": self.irreps_sampled}


def normal_hsp_run(G: FiniteGroup, oracle: Callable, rng: np.random.Generator,
                   samples: Optional[int] = None, max_extra: int = 64) -> NormalHspRun:
    """Intersect kernels of sampled irreps; keep sampling while the oracle
    disagrees on a generator of the current intersection."""
    inst = HspInstance(G, oracle)
    labels = inst.label_table()
    reps = irreps(G)
    kernels = [rep.kernel_mask for rep in reps]
    T = 4 * math.ceil(math.log2(G.order)) if samples is None else samples
    drawn = list(weak_fourier_samples(G, labels, T, rng))
    mask = np.ones(G.order, dtype=bool)
    for i in drawn:
        mask &= kernels[i]
    extra = 0
    while True:
        K = subgroup_from_mask(G, mask)
        if all(labels[G.index(g)] == labels[0] for g in K.generators):
            break
        if extra == max_extra:
            raise PromiseError("kernel intersection never matched the oracle; is the hidden subgroup normal?")
        (i,) = weak_fourier_samples(G, labels, 1, rng)
        drawn.append(i)
        mask &= kernels[i]
        extra += 1
    # the oracle hides K only if it also separates the cosets of K
    if len(np.unique(labels)) * K.order != G.order:
        raise PromiseError("the oracle does not hide the recovered normal subgroup")
    return NormalHspRun(K, [reps[i].label_str for i in drawn])


def normal_hsp(G: FiniteGroup, oracle: Callable, rng: np.random.Generator, samples: Optional[int] = None) -> Subgroup:
    return normal_hsp_run(G, oracle, rng, samples).subgroup


# --- dihedral coset states and the sieve --------------------------------------------

def dihedral_fourier_sample(N: int, y: int, rng: np.random.Generator) -> Tuple[int, np.ndarray]:
    """Coset state of <(y,1)> in D_N, Fourier transform on the Z_N register,
    measure it.  Returns k and the remaining qubit, phase-fixed so its
    |0> amplitude is real and positive."""
    z = int(rng.integers(N))
    amps = np.zeros((N, 2), dtype=complex)
    amps[z, 0] = amps[(y + z) % N, 1] = 1 / math.sqrt(2)
    out = apply_qft(amps, axes=0)
    k = sample_index((np.abs(out) ** 2).sum(axis=1), rng)
    qubit = out[k] / np.linalg.norm(out[k])
    return k, qubit * np.exp(-1j * np.angle(qubit[0]))


def phase_qubit(N: int, y: int, k: int) -> np.ndarray:
    """(|0> + w_N^{yk}|1>)/sqrt 2."""
    return np.array([1, np.exp(2j * np.pi * ((y * k) % N) / N)]) / math.sqrt(2)


def sieve_combine(p: int, q: int, N: int, rng: np.random.Generator) -> Tuple[int, str]:
    """Symbolic combination: index p+q or p-q (mod N), each with probability 1/2."""
    if rng.random() < 0.5:
        return (p + q) % N, "+"
    return (p - q) % N, "-"


def sieve_combine_explicit(psi_p: np.ndarray, psi_q: np.ndarray, rng: np.random.Generator) -> Tuple[np.ndarray, str]:
    """CNOT from the first qubit onto the second, then measure the second.

    Outcome 0 leaves the first qubit in |psi_{p+q}>, outcome 1 in |psi_{p-q}>
    (up to global phase)."""
    joint = np.kron(psi_p, psi_q).reshape(2, 2)
    joint[1] = joint[1, ::-1].copy()
    probs = (np.abs(joint) ** 2).sum(axis=0)
    bit = sample_index(probs, rng)
    rest = joint[:, bit] / math.sqrt(probs[bit])
    return rest * np.exp(-1j * np.angle(rest[0])), "+-"[bit]


def _combine_batch(psi_p: np.ndarray, psi_q: np.ndarray, rng: np.random.Generator):
    """Vectorised ``sieve_combine_explicit`` over rows."""
    joint = psi_p[:, :, None] * psi_q[:, None, :]
    joint[:, 1, :] = joint[:, 1, ::-1]
    probs = (np.abs(joint) ** 2).sum(axis=1)
    minus = rng.random(len(psi_p)) * probs.sum(axis=1) >= probs[:, 0]
    rest = joint[np.arange(len(psi_p)), :, minus.astype(int)]
    rest /= np.linalg.norm(rest, axis=1, keepdims=True)
    return rest * np.exp(-1j * np.angle(rest[:, :1])), minus


@dataclass
class SievePool:
    """Sieve states: indices k and, in explicit mode, their qubits."""

    n: int
    k: np.ndarray
    qubits: Optional[np.ndarray] = None
    stage: int = 0

    @property
    def m(self) -> int:
        return math.isqrt(self.n - 1) + 1 if self.n > 1 else 1

    @property
    def N(self) -> int:
        return 2**self.n

    def zeroed_bits(self, stage: Optional[int] = None) -> int:
        j = self.stage if stage is None else stage
        return min(self.m * j, max(self.n - 1, 0))

    def check_invariant(self) -> None:
        mask = (1 << self.zeroed_bits()) - 1
        if np.any(self.k & mask):
            raise AssertionError(f"stage {self.stage}: an index has a nonzero bit below {self.zeroed_bits()}")

    def __len__(self) -> int:
        return len(self.k)


@dataclass
class SieveResult:
    bit: int
    telemetry: List[dict] = field(default_factory=list)
    outcome: str = "+"

    def to_json(self) -> dict:
        return {"bit": self.bit, "outcome": self.outcome, "stages": self.telemetry}


def default_pool_size(n: int, constant: int = 8, cap: int = 10**6) -> int:
    m = math.isqrt(n - 1) + 1 if n > 1 else 1
    return min(cap, constant * 16**m)


def _dihedral_label_table(oracle: Callable, N: int) -> np.ndarray:
    ids: Dict = {}
    return np.array([[ids.setdefault(oracle((x, a)), len(ids)) for a in (0, 1)] for x in range(N)], dtype=np.int64)


def _oracle_pool(oracle: Callable, n: int, size: int, rng: np.random.Generator, batch: int = 4096):
    """Dihedral coset states from an oracle on D_N elements (x, a), Fourier
    transformed on Z_N and measured; returns indices and qubits."""
    N = 2**n
    labels = _dihedral_label_table(oracle, N)
    flat = labels.ravel()
    ks, qs = [], []
    for start in range(0, size, batch):
        b = min(batch, size - start)
        xs = rng.integers(0, flat.size, size=b)
        amps = (flat[None, :] == flat[xs][:, None]).astype(complex).reshape(b, N, 2)
        amps /= np.sqrt((np.abs(amps) ** 2).sum(axis=(1, 2), keepdims=True))
        out = apply_qft(amps, axes=1)
        marg = (np.abs(out) ** 2).sum(axis=2)
        cdf = np.cumsum(marg, axis=1)
        k = np.minimum((cdf < rng.random(b)[:, None] * cdf[:, -1:]).sum(axis=1), N - 1)
        qubit = out[np.arange(b), k]
        qubit /= np.linalg.norm(qubit, axis=1, keepdims=True)
        ks.append(k)
        qs.append(qubit * np.exp(-1j * np.angle(qubit[:, :1])))
    return np.concatenate(ks), np.concatenate(qs)


def sieve_least_bit(n: int, rng: np.random.Generator, y: Optional[int] = None, oracle: Optional[Callable] = None,
                    pool_size: Optional[int] = None) -> SieveResult:
    """Least significant bit of the hidden reflection in D_{2^n}.

    Exactly one of ``y`` (symbolic mode: states tracked by their index, the
    final measurement computed from y) and ``oracle`` (explicit qubits drawn
    from the oracle) must be given.
    """
    if (y is None) == (oracle is None):
        raise DomainError("give exactly one of y or oracle")
    if n < 1:
        raise DomainError("n must be at least 1")
    N = 2**n
    size = default_pool_size(n) if pool_size is None else pool_size
    if oracle is None:
        pool = SievePool(n, rng.integers(0, N, size=size))
    else:
        k, qubits = _oracle_pool(oracle, n, size, rng)
        pool = SievePool(n, k, qubits)
    telemetry = [{"stage": 0, "pool": len(pool)}]
    pool.check_invariant()
    for j in range(pool.m):
        lo, hi = pool.zeroed_bits(j), pool.zeroed_bits(j + 1)
        if hi == lo:
            break
        bucket = (pool.k >> lo) & ((1 << (hi - lo)) - 1)
        order = np.argsort(bucket, kind="stable")
        b = bucket[order]
        starts = np.r_[0, np.flatnonzero(np.diff(b)) + 1] if len(b) else np.zeros(0, dtype=int)
        counts = np.diff(np.r_[starts, len(b)])
        idx = np.arange(len(b))
        pos = idx - np.repeat(starts, counts)
        ends = np.repeat(starts + counts, counts)
        first = np.flatnonzero((pos % 2 == 0) & (idx + 1 < ends))
        ip, iq = order[first], order[first + 1]
        p, q = pool.k[ip], pool.k[iq]
        if pool.qubits is None:
            minus = rng.random(len(p)) < 0.5
            new_q = None
        else:
            new_q, minus = _combine_batch(pool.qubits[ip], pool.qubits[iq], rng)
            new_q = new_q[minus]
        pool = SievePool(n, ((p - q) % N)[minus], new_q, j + 1)
        pool.check_invariant()
        telemetry.append({
            "stage": j + 1,
            "pairs": int(len(p)),
            "unpaired": int(len(b) - 2 * len(p)),
            "plus_discarded": int((~minus).sum()),
            "pool": len(pool),
        })
    top = np.flatnonzero(pool.k == N // 2)
    telemetry.append({"terminal_half": int(len(top)), "terminal_zero": int((pool.k == 0).sum())})
    if len(top) == 0:
        raise ResourceError("sieve ran out of states before reaching k = N/2; enlarge the pool")
    if pool.qubits is None:
        bit = int(y) % 2  # |psi_{N/2}> = |+> or |-> according to the parity of y
    else:
        qubit = pool.qubits[top[0]]
        minus_amp = (qubit[0] - qubit[1]) / math.sqrt(2)
        bit = int(rng.random() < abs(minus_amp) ** 2)
    return SieveResult(bit, telemetry, "+-"[bit])


@dataclass
class KuperbergResult:
    y: int
    bits: List[int]
    levels: List[SieveResult]

    def to_json(self) -> dict:
        return {"y": self.y, "bits": self.bits, "levels": [lv.to_json() for lv in self.levels]}


def kuperberg_sieve(n: int, rng: np.random.Generator, y: Optional[int] = None, oracle: Optional[Callable] = None,
                    pool_constant: int = 8, pool_cap: int = 10**6) -> KuperbergResult:
    """All bits of y, lowest first, by restricting to D_{N/2} after each bit.

    After learning b = y mod 2, the map (x, a) -> (2x + a b, a) embeds D_{N/2}
    in D_N and the pulled-back oracle hides <((y - b)/2, 1)>.
    """
    if (y is None) == (oracle is None):
        raise DomainError("give exactly one of y or oracle")
    bits, levels = [], []
    cur_y = None if y is None else int(y) % 2**n
    cur_oracle = oracle
    for level in range(n):
        nn = n - level
        res = sieve_least_bit(nn, rng, y=cur_y, oracle=cur_oracle,
                              pool_size=default_pool_size(nn, pool_constant, pool_cap))
        b = res.bit
        bits.append(b)
        levels.append(res)
        if cur_y is not None:
            cur_y = (cur_y - b) // 2
        else:
            cur_oracle = _pullback(cur_oracle, nn, b)
    return KuperbergResult(sum(b << i for i, b in enumerate(bits)), bits, levels)


def _pullback(oracle: Callable, n: int, b: int) -> Callable:
    N = 2**n

    def f(g):
        x, a = g
        return oracle(((2 * x + a * b) % N, a))

    return f


def dihedral_reflection_oracle(n: int, y: int) -> Callable:
    """Oracle on D_{2^n} elements (x, a) hiding <(y, 1)>: labels the coset {g, g(y,1)}."""
    N = 2**n

    def f(g):
        x, a = g
        other = ((x + y) % N, 1) if a == 0 else ((x - y) % N, 0)
        return min((x % N, a), other)

    return f


# --- Heisenberg group ---------------------------------------------------------------

@dataclass(frozen=True)
class HeisenbergSamplePair:
    s: int
    t: int
    u: int
    v: int

    def degenerate(self, p: int) -> bool:
        return (self.s * self.u * (self.s + self.u)) % p == 0


def heisenberg_delta(pair: HeisenbergSamplePair, alpha: int, beta: int, p: int) -> int:
    s, t, u, v = pair.s, pair.t, pair.u, pair.v
    return ((2 * beta * s + alpha * s - alpha * alpha - 2 * alpha * t) * (s + u) * u
            + (alpha * u + t * u - s * v) ** 2) % p


def heisenberg_roots(pair: HeisenbergSamplePair, alpha: int, beta: int, p: int) -> List[Tuple[int, int]]:
    """Closed-form solutions (x, y) of s x + u y = alpha,
    s C(x,2) + t x + u C(y,2) + v y = beta, for su(s+u) != 0."""
    if pair.degenerate(p):
        raise DomainError("closed form needs s u (s + u) != 0")
    s, t, u, v = pair.s, pair.t, pair.u, pair.v
    r = sqrt_mod(heisenberg_delta(pair, alpha, beta, p), p)
    if r is None:
        return []
    ix = pow(s * (s + u), -1, p)
    iy = pow(u * (s + u), -1, p)
    out = []
    for sign in ((1, -1) if r else (1,)):
        x = (alpha * s + s * v - t * u + sign * r) * ix % p
        y = (alpha * u + t * u - s * v - sign * r) * iy % p
        out.append((x, y))
    return out


def heisenberg_solutions_brute(pair: HeisenbergSamplePair, p: int) -> Dict[Tuple[int, int], List[Tuple[int, int]]]:
    """Solution sets S_{alpha,beta} by enumerating all (x, y)."""
    out: Dict[Tuple[int, int], List[Tuple[int, int]]] = {}
    for x in range(p):
        for y in range(p):
            out.setdefault(_alpha_beta(pair, x, y, p), []).append((x, y))
    return out


def _alpha_beta(pair: HeisenbergSamplePair, x: int, y: int, p: int) -> Tuple[int, int]:
    s, t, u, v = pair.s, pair.t, pair.u, pair.v
    alpha = (s * x + u * y) % p
    beta = (s * (x * (x - 1) // 2) + t * x + u * (y * (y - 1) // 2) + v * y) % p
    return alpha, beta


def heisenberg_success_probability(pair: HeisenbergSamplePair, p: int) -> float:
    """(sum_{alpha,beta} sqrt|S_{alpha,beta}|)^2 / p^4."""
    total = sum(math.sqrt(len(heisenberg_roots(pair, a, b, p))) for a in range(p) for b in range(p))
    return total * total / p**4


def quantum_sampling_unitary(pair: HeisenbergSamplePair, p: int) -> np.ndarray:
    """Unitary on C^{p^2} (index x p + y -> alpha p + beta) sending the uniform
    superposition over each nonempty S_{alpha,beta} to |alpha, beta>.

    Differences of two-element solution sets go to the (alpha, beta) with no
    solutions, in increasing order; there are exactly as many of each.
    """
    U = np.zeros((p * p, p * p))
    empty, diffs = [], []
    for a in range(p):
        for b in range(p):
            sols = heisenberg_roots(pair, a, b, p)
            row = a * p + b
            if not sols:
                empty.append(row)
                continue
            cols = [x * p + y for x, y in sols]
            U[row, cols] = 1 / math.sqrt(len(cols))
            if len(cols) == 2:
                diffs.append(cols)
    if len(empty) != len(diffs):
        raise AssertionError("solution sets do not partition the plane")
    for row, (c0, c1) in zip(empty, diffs):
        U[row, c0], U[row, c1] = 1 / math.sqrt(2), -1 / math.sqrt(2)
    return U


@dataclass
class HeisenbergAttempt:
    pair: HeisenbergSamplePair
    result: Tuple[int, int]
    redraws: int
    success_probability: float
    state_after_sampling: np.ndarray = field(repr=False)

    def to_json(self) -> dict:
        return {
            "stuv": [self.pair.s, self.pair.t, self.pair.u, self.pair.v],
            "result": list(self.result),
            "redraws": self.redraws,
            "success_probability": self.success_probability,
        }


def heisenberg_oracle(p: int, a: int, b: int) -> Tuple[HeisenbergGroup, Callable]:
    from .abelian_hsp import HiddenSubgroupOracle
    from .grouprep import make_subgroup

    G = HeisenbergGroup(p)
    H = make_subgroup(G, [(a % p, b % p, 1)])
    return G, HiddenSubgroupOracle(G, H)


def _coset_sample(labels: np.ndarray, p: int, rng: np.random.Generator):
    """One coset state, QFT on the first two registers, measure them.
    Returns (s, t) and the normalised state of the third register."""
    amps = np.full((p, p, p), p ** -1.5, dtype=complex)
    _, amps = collapse_labels(amps, labels.reshape(p, p, p), rng)
    out = apply_qft(amps, axes=(0, 1))
    marg = (np.abs(out) ** 2).sum(axis=2)
    i = sample_index(marg, rng)
    s, t = divmod(i, p)
    vec = out[s, t]
    return s, t, vec / np.linalg.norm(vec)


def heisenberg_attempt(p: int, oracle: Callable, rng: np.random.Generator, max_redraws: int = 1000) -> HeisenbergAttempt:
    """Steps 1-5 once, redrawing the coset states while su(s+u) = 0."""
    if not is_prime(p) or p < 3:
        raise DomainError("Heisenberg HSP needs an odd prime p")
    G = HeisenbergGroup(p)
    labels = HspInstance(G, oracle).label_table()
    for redraws in range(max_redraws + 1):
        s, t, x_state = _coset_sample(labels, p, rng)
        u, v, y_state = _coset_sample(labels, p, rng)
        pair = HeisenbergSamplePair(s, t, u, v)
        if not pair.degenerate(p):
            break
    else:
        raise ResourceError("too many degenerate draws")
    two = np.kron(x_state, y_state)
    after = quantum_sampling_unitary(pair, p) @ two
    final = apply_qft(after.reshape(p, p), inverse=True)
    i = sample_index(np.abs(final) ** 2, rng)
    return HeisenbergAttempt(pair, divmod(i, p), redraws, heisenberg_success_probability(pair, p), after.reshape(p, p))


@dataclass
class HeisenbergResult:
    a: int
    b: int
    attempts: List[HeisenbergAttempt]

    def to_json(self) -> dict:
        return {"a": self.a, "b": self.b, "attempts": [at.to_json() for at in self.attempts]}


def heisenberg_verify(p: int, oracle: Callable, a: int, b: int, rng: np.random.Generator, probes: int = 3) -> bool:
    """Does f(g) = f(g (a,b,1)) on a few random g?"""
    G = HeisenbergGroup(p)
    h = (a, b, 1)
    for i in rng.integers(0, G.order, size=probes):
        g = G.element(int(i))
        if oracle(g) != oracle(G.mul(g, h)):
            return False
    return True


def heisenberg_hsp_run(p: int, oracle: Callable, rng: np.random.Generator, max_attempts: int = 64) -> HeisenbergResult:
    attempts = []
    for _ in range(max_attempts):
        at = heisenberg_attempt(p, oracle, rng)
        attempts.append(at)
        a, b = at.result
        if heisenberg_verify(p, oracle, a, b, rng):
            return HeisenbergResult(a, b, attempts)
    raise PromiseError(f"no verified (a, b) after {max_attempts} attempts")


def heisenberg_hsp(p: int, oracle: Callable, rng: np.random.Generator) -> Tuple[int, int]:
    res = heisenberg_hsp_run(p, oracle, rng)
    return res.a, res.b
