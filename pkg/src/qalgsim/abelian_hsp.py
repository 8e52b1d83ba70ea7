"""Period finding, discrete logarithms, factoring and the Abelian HSP.

Oracles are callables returning opaque hashable labels.  Two optional
methods let the simulator avoid evaluating an oracle on every point of a
large domain:

``table(Q)``
    integer label array for 0..Q-1 (labels compared for equality only);
``level_set(x, Q)``
    the level set of ``x`` inside [0, Q) as an arithmetic progression
    ``(start, step, count)``.

Solvers never look inside labels; they only compare them.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any, Callable, Dict, Hashable, List, Optional, Sequence, Tuple

import numpy as np

from .errors import DomainError, PromiseError, ResourceError
from .grouprep import AbelianGroup, FiniteGroup, Subgroup, subgroup_from_mask
from .numtheory import (
    Factorization,
    closest_convergent,
    continued_fraction,
    factor_trial,
    gcd_ext,
    is_perfect_power,
    is_prime,
    lcm,
    multiplicative_order,
)
from .quantumsim import (
    apply_qft,
    collapse_labels,
    progression_fourier_probability,
    sample_index,
    sample_progression_fourier,
)

DENSE_Q_LIMIT = 2**12
MAX_DENSE = 2**20
MAX_ROUNDS = 64
SPECTRA_LIMIT = 2**22


# --- oracles --------------------------------------------------------------------

class PeriodicOracle:
    """x -> x mod r: r-periodic on the integers and injective within a period."""

    def __init__(self, r: int):
        if r < 1:
            raise DomainError("period must be positive")
        self._r = int(r)

    def __call__(self, x: int) -> int:
        return int(x) % self._r

    def table(self, Q: int) -> np.ndarray:
        return np.arange(Q, dtype=np.int64) % self._r

    def level_set(self, x: int, Q: int) -> Tuple[int, int, int]:
        s = int(x) % self._r
        return s, self._r, (Q - 1 - s) // self._r + 1


class _CycleOracle:
    """Shared machinery for x -> h^x in a cyclic group.

    The simulator finds the cycle length classically so it can describe level
    sets as progressions; the solvers only ever see labels.
    """

    _period: Optional[int] = None

    def _cycle_length(self) -> int:
        raise NotImplementedError

    @property
    def _r(self) -> int:
        if self._period is None:
            self._period = self._cycle_length()
        return self._period

    def table(self, Q: int) -> np.ndarray:
        r = self._r
        return np.arange(Q, dtype=np.int64) % r

    def level_set(self, x: int, Q: int) -> Tuple[int, int, int]:
        r = self._r
        s = int(x) % r
        return s, r, (Q - 1 - s) // r + 1


class ModExpOracle(_CycleOracle):
    """x -> a^x mod N."""

    def __init__(self, a: int, N: int):
        if math.gcd(a, N) != 1:
            raise DomainError("base must be a unit modulo N")
        self.a, self.N = a % N, N

    def __call__(self, x: int) -> int:
        return pow(self.a, int(x), self.N)

    def _cycle_length(self) -> int:
        return multiplicative_order(self.a, self.N)


class GroupPowerOracle(_CycleOracle):
    """j -> g^j for a group exposing mul/pow/identity."""

    def __init__(self, group, g, walk_limit: int = 10**7):
        self.group, self.g, self.walk_limit = group, g, walk_limit

    def __call__(self, j: int):
        return self.group.pow(self.g, int(j))

    def _cycle_length(self) -> int:
        cur, r = self.g, 1
        while cur != self.group.identity:
            cur = self.group.mul(cur, self.g)
            r += 1
            if r > self.walk_limit:
                raise ResourceError("cycle walk exceeded its limit")
        return r


class PseudoPeriodicOracle:
    """k -> floor(k mod r) for real r > 1.

    Label c is taken exactly on {c + ceil(l r)}, so f(k) = f(k + [l r]) with
    the rounding direction fixed by k; the top label is only partially
    populated when r is not an integer.
    """

    def __init__(self, r: float):
        if r <= 1:
            raise DomainError("pseudoperiod must exceed 1")
        self.r = float(r)

    def __call__(self, k: int) -> int:
        return int(math.floor(k % self.r))

    def table(self, Q: int) -> np.ndarray:
        return np.floor(np.mod(np.arange(Q, dtype=float), self.r)).astype(np.int64)


def _label_table(oracle: Callable, Q: int) -> np.ndarray:
    if hasattr(oracle, "table"):
        return np.asarray(oracle.table(Q))
    if Q > MAX_DENSE:
        raise ResourceError("oracle tabulation limited to 2^20 points")
    ids: Dict[Hashable, int] = {}
    return np.array([ids.setdefault(oracle(x), len(ids)) for x in range(Q)], dtype=np.int64)


def fourier_sample(oracle: Callable, Q: int, rng: np.random.Generator) -> int:
    """One run of the standard method over Z_Q: uniform superposition, oracle
    query (ancilla discarded), Fourier transform, measurement."""
    if Q > DENSE_Q_LIMIT and hasattr(oracle, "level_set") and Q & (Q - 1) == 0:
        x = int(rng.integers(Q))
        start, step, count = oracle.level_set(x, Q)
        return sample_progression_fourier(start, step, count, Q, rng)
    labels = _label_table(oracle, Q)
    amps = np.full(Q, 1 / math.sqrt(Q), dtype=complex)
    _, amps = collapse_labels(amps, labels, rng)
    out = apply_qft(amps)
    return sample_index(np.abs(out) ** 2, rng)


def fourier_distribution(oracle: Callable, Q: int) -> np.ndarray:
    """Exact outcome distribution of ``fourier_sample`` (mixture over level sets)."""
    labels = _label_table(oracle, Q)
    probs = np.zeros(Q)
    for lab in np.unique(labels):
        mask = labels == lab
        amps = apply_qft(mask / math.sqrt(mask.sum()))
        probs += mask.sum() / Q * np.abs(amps) ** 2
    return probs


def coset_fourier_state(oracle: Callable, Q: int, x0: int) -> np.ndarray:
    """Amplitudes after the Fourier transform, given the query collapsed onto f(x0)."""
    labels = _label_table(oracle, Q)
    mask = labels == labels[x0 % Q]
    return apply_qft(mask / math.sqrt(mask.sum()))


def level_fourier_probability(k: int, r: int, n: int, Q: int) -> float:
    """sin^2(pi k r n / Q) / (n Q sin^2(pi k r / Q)) for a level set of n points spaced r apart."""
    return progression_fourier_probability(k, 0, r, n, Q)


def closest_peak_mass(oracle: Callable, Q: int, r: int) -> float:
    """Exact total probability of the outcomes round(jQ/r), j = 0..r-1."""
    probs = fourier_distribution(oracle, Q)
    peaks = {round(j * Q / r) % Q for j in range(r)}
    return float(sum(probs[k] for k in peaks))


# --- period finding ---------------------------------------------------------------

@dataclass
class PeriodResult:
    period: Any
    trials_used: int
    transcript: List[int] = field(default_factory=list)
    modulus: int = 0

    def to_json(self) -> dict:
        return {
            "period": self.period,
            "trials_used": self.trials_used,
            "transcript": [int(t) for t in self.transcript],
            "modulus": self.modulus,
        }


def _probe(oracle: Callable, L: int, rng: np.random.Generator, checks: int = 4) -> bool:
    base = [0] + [int(x) for x in rng.integers(0, 4 * L + 8, size=checks)]
    return all(oracle(x) == oracle(x + L) for x in base)


def _reduce_period(oracle: Callable, L: int) -> int:
    f0 = oracle(0)
    for p in factor_trial(L).primes():
        while L % p == 0 and oracle(L // p) == f0:
            L //= p
    return L


def period_find_zn(oracle: Callable, N: int, rng: np.random.Generator, max_rounds: int = MAX_ROUNDS) -> PeriodResult:
    """Period of an oracle on Z_N whose period divides N."""
    if N < 1:
        raise DomainError("N must be positive")
    L, transcript = 1, []
    f0 = oracle(0)
    for t in range(1, max_rounds + 1):
        y = fourier_sample(oracle, N, rng)
        transcript.append(y)
        L = lcm(L, N // math.gcd(y, N))
        if oracle(L % N) == f0:
            if not all(oracle(x) == oracle((x + L) % N) for x in rng.integers(0, N, size=4)):
                raise PromiseError("oracle is not periodic with the recovered period")
            return PeriodResult(L, t, transcript, N)
    raise PromiseError(f"no period found in {max_rounds} rounds; the oracle may not be periodic mod N")


def _z_rounds(oracle, Q, bound, rng, rounds, transcript) -> Optional[int]:
    L = 1
    f0 = oracle(0)
    for _ in range(rounds):
        k = fourier_sample(oracle, Q, rng)
        transcript.append(k)
        q = closest_convergent(k, Q, bound).denominator
        L = lcm(L, q)
        if L > bound:
            L = q
        if oracle(L) == f0:
            return _reduce_period(oracle, L)
    return None


def period_find_z(oracle: Callable, period_bound: Optional[int], rng: np.random.Generator,
                  max_rounds: int = MAX_ROUNDS, max_log_q: int = 64) -> PeriodResult:
    """Period of an oracle on the integers, injective within a period.

    With a bound, the Fourier modulus is the least power of two exceeding the
    bound squared.  Without one, Q doubles from 2, trying a few rounds at each
    size with the bound isqrt(Q - 1).
    """
    transcript: List[int] = []
    if period_bound is not None:
        if period_bound < 1:
            raise DomainError("period bound must be positive")
        Q = 1 << (period_bound * period_bound).bit_length()
        L = _z_rounds(oracle, Q, period_bound, rng, max_rounds, transcript)
        if L is None:
            raise PromiseError(f"no period <= {period_bound} found in {max_rounds} rounds")
    else:
        Q, L = 2, None
        while L is None:
            if Q.bit_length() > max_log_q:
                raise ResourceError("period search exceeded the modulus cap")
            L = _z_rounds(oracle, Q, max(1, math.isqrt(Q - 1)), rng, 8, transcript)
            if L is None:
                Q *= 2
    if not _probe(oracle, L, rng):
        raise PromiseError("oracle is not periodic with the recovered period")
    return PeriodResult(L, len(transcript), transcript, Q)


def period_find_pseudo(oracle: Callable, period_bound: float, rng: np.random.Generator,
                       N: Optional[int] = None, max_samples: int = 64, checks: int = 16) -> PeriodResult:
    """Real-valued period estimate for a pseudoperiodic oracle.

    Samples are kept only when k < N / log(bound).  Every pair of kept samples
    k1 < k2 is expanded as a continued fraction; a convergent j/j' proposes
    r ~ jN/k1.  A proposal is accepted when most random offsets x satisfy
    f(x) = f(x + m) for an integer m within 1 of it; the smallest accepted
    proposal is returned.  ``max_samples`` is the retry budget.
    """
    if period_bound <= 1:
        raise DomainError("period bound must exceed 1")
    if N is None:
        N = 1 << math.ceil(math.log2(3 * period_bound * period_bound))
    window = N / max(1.0, math.log(period_bound))
    kept: List[int] = []
    transcript: List[int] = []
    tried: Dict[float, bool] = {}
    for _ in range(max_samples):
        k = fourier_sample(oracle, N, rng)
        transcript.append(k)
        if k == 0 or k >= window:
            continue
        for k_old in kept:
            k1, k2 = sorted((k, k_old))
            if k1 == k2:
                continue
            for c in continued_fraction(k1, k2, int(period_bound) + 1).convergents[1:]:
                est = c.numerator * N / k1
                if not 1 < est <= period_bound + 1:
                    continue
                key = round(est, 9)
                if key not in tried:
                    tried[key] = _pseudo_check(oracle, est, N, rng, checks)
        kept.append(k)
        good = sorted(e for e, ok in tried.items() if ok)
        if good:
            return PeriodResult(good[0], len(transcript), transcript, N)
    raise PromiseError("no pseudoperiod estimate passed the oracle check")


def _pseudo_check(oracle, est, N, rng, checks) -> bool:
    span = range(max(1, math.floor(est) - 1), math.ceil(est) + 2)
    hits = 0
    for x in rng.integers(0, N, size=checks):
        fx = oracle(int(x))
        hits += any(oracle(int(x) + m) == fx for m in span if abs(m - est) <= 1 + 1e-9)
    return hits * 2 > checks


# --- factoring ---------------------------------------------------------------------

@dataclass
class FactorRound:
    a: int
    order: Optional[int]
    factor: Optional[int]
    outcome: str

    def to_json(self) -> dict:
        return {"a": self.a, "order": self.order, "factor": self.factor, "outcome": self.outcome}


def order_find(a: int, N: int, rng: np.random.Generator) -> PeriodResult:
    return period_find_z(ModExpOracle(a, N), N, rng)


def factor_round(N: int, rng: np.random.Generator, a: Optional[int] = None) -> FactorRound:
    """One pass of the reduction from factoring to order finding."""
    if N < 4:
        raise DomainError("factor_round needs N >= 4")
    if a is None:
        a = int(rng.integers(2, N))
    g = math.gcd(a, N)
    if g > 1:
        return FactorRound(a, None, g, "shared-factor")
    r = order_find(a, N, rng).period
    if r % 2:
        return FactorRound(a, r, None, "odd-order")
    y = pow(a, r // 2, N)
    if y == N - 1:
        return FactorRound(a, r, None, "minus-one")
    return FactorRound(a, r, math.gcd(y - 1, N), "split")


def _split(N: int, rng: np.random.Generator, max_rounds: int) -> int:
    if N % 2 == 0:
        return 2
    pp = is_perfect_power(N)
    if pp:
        return pp[0]
    for _ in range(max_rounds):
        d = factor_round(N, rng).factor
        if d:
            return d
    raise ResourceError(f"no factor of {N} after {max_rounds} rounds")


def factor(N: int, rng: np.random.Generator, max_rounds: int = 256) -> Factorization:
    if N < 2:
        raise DomainError("factor needs N >= 2")
    primes, stack = [], [N]
    while stack:
        m = stack.pop()
        if m == 1:
            continue
        if is_prime(m):
            primes.append(m)
            continue
        d = _split(m, rng, max_rounds)
        stack += [d, m // d]
    return Factorization.from_primes(primes)


# --- discrete logarithm ------------------------------------------------------------

class ZpStarGroup:
    """The multiplicative group of F_p."""

    def __init__(self, p: int):
        if not is_prime(p):
            raise DomainError("Z_p^* needs a prime p")
        self.p = p
        self.identity = 1

    def mul(self, a: int, b: int) -> int:
        return a * b % self.p

    def pow(self, a: int, k: int) -> int:
        return pow(a, k, self.p)

    @property
    def size_bound(self) -> int:
        return self.p - 1

    def contains(self, a) -> bool:
        return isinstance(a, int) and 0 < a < self.p


@dataclass
class DlogResult:
    log: int
    order: int
    rounds: int
    transcript: List[Tuple[Tuple[int, int], Tuple[int, int]]]

    def to_json(self) -> dict:
        return {
            "log": self.log,
            "order": self.order,
            "rounds": self.rounds,
            "transcript": [[list(a), list(b)] for a, b in self.transcript],
        }


class DlogSampler:
    """Fourier sampling for f(alpha, beta) = x^alpha g^beta on Z_N x Z_N."""

    def __init__(self, group, g, x, N: int):
        if N * N > MAX_DENSE:
            raise ResourceError("discrete-log simulation limited to N <= 1024")
        self.N = N
        gp = [group.identity]
        for _ in range(N - 1):
            gp.append(group.mul(gp[-1], g))
        ids: Dict[Hashable, int] = {}
        labels = np.empty((N, N), dtype=np.int64)
        xa = group.identity
        for a in range(N):
            for b in range(N):
                labels[a, b] = ids.setdefault(group.mul(xa, gp[b]), len(ids))
            xa = group.mul(xa, x)
        self.labels = labels
        self._amps = np.full((N, N), 1 / N, dtype=complex)

    def sample(self, rng: np.random.Generator) -> Tuple[int, int]:
        _, amps = collapse_labels(self._amps, self.labels, rng)
        probs = np.abs(apply_qft(amps)) ** 2
        i = sample_index(probs, rng)
        return divmod(i, self.N)

    def round(self, rng: np.random.Generator) -> Tuple[Tuple[int, int], Tuple[int, int], bool]:
        s1, s2 = self.sample(rng), self.sample(rng)
        return s1, s2, math.gcd(s1[1], s2[1]) == 1


def discrete_log_run(group, g, x, rng: np.random.Generator, order: Optional[int] = None,
                     max_rounds: int = MAX_ROUNDS) -> DlogResult:
    if x == g:
        return DlogResult(1, order or 0, 0, [])
    if x == group.identity:
        return DlogResult(0, order or 0, 0, [])
    N = order or period_find_z(GroupPowerOracle(group, g), group.size_bound, rng).period
    sampler = DlogSampler(group, g, x, N)
    transcript = []
    for t in range(1, max_rounds + 1):
        (mu1, nu1), (mu2, nu2), coprime = sampler.round(rng)
        transcript.append(((mu1, nu1), (mu2, nu2)))
        if not coprime:
            continue
        _, lam1, lam2 = gcd_ext(nu1, nu2)
        s = (lam1 * mu1 + lam2 * mu2) % N
        if group.pow(g, s) != x:
            raise PromiseError("x does not lie in the subgroup generated by g")
        return DlogResult(s, N, t, transcript)
    raise PromiseError(f"no coprime pair in {max_rounds} rounds; x may not lie in <g>")


def discrete_log(group, g, x, rng: np.random.Generator, order: Optional[int] = None) -> int:
    return discrete_log_run(group, g, x, rng, order).log


# --- general Abelian HSP -------------------------------------------------------------

class HiddenSubgroupOracle:
    """Labels each element by the smallest index in its left coset gH."""

    def __init__(self, group: FiniteGroup, H: Subgroup):
        self.group = group
        idx = np.arange(group.order, dtype=np.int64)
        self._labels = group.mul_idx(idx[:, None], H.indices[None, :]).min(axis=1)

    def __call__(self, g) -> int:
        return int(self._labels[self.group.index(g)])

    def table(self) -> np.ndarray:
        return self._labels


@dataclass
class HspInstance:
    group: FiniteGroup
    oracle: Callable
    promise: Dict[str, Any] = field(default_factory=dict)

    @classmethod
    def from_subgroup(cls, group: FiniteGroup, H: Subgroup) -> "HspInstance":
        return cls(group, HiddenSubgroupOracle(group, H), {"hides": "subgroup"})

    def label_table(self) -> np.ndarray:
        if hasattr(self.oracle, "table"):
            return np.asarray(self.oracle.table())
        if self.group.order > MAX_DENSE:
            raise ResourceError("oracle tabulation limited to 2^20 elements")
        ids: Dict[Hashable, int] = {}
        return np.array([ids.setdefault(self.oracle(self.group.element(i)), len(ids))
                         for i in range(self.group.order)], dtype=np.int64)

    def spectra(self, labels: np.ndarray):
        """Cached ``_coset_spectra`` when the table of all coset transforms is small."""
        if "_spectra" not in self.__dict__:
            cosets = len(np.unique(labels))
            self._spectra = _coset_spectra(labels) if cosets * labels.size <= SPECTRA_LIMIT else None
        return self._spectra

    def check_promise(self, H: Subgroup) -> bool:
        """Exhaustive check that the oracle hides H."""
        lab = self.label_table()
        G = self.group
        idx = np.arange(G.order, dtype=np.int64)
        same = lab[:, None] == lab[None, :]
        diff = G.mul_idx(G.inv_idx(idx)[:, None], idx[None, :])
        return bool(np.array_equal(same, H.mask[diff]))


@dataclass
class HspRun:
    subgroup: Subgroup
    samples: List[Tuple[int, ...]]

    def to_json(self) -> dict:
        return {"subgroup": self.subgroup.to_json(), "samples": [list(s) for s in self.samples]}


def _coset_spectra(labels: np.ndarray):
    """Outcome CDFs of the Fourier transform of every coset state, one row per
    distinct label, plus the map from element index to row."""
    flat = labels.ravel()
    uniq, inv = np.unique(flat, return_inverse=True)
    masks = inv[None, :] == np.arange(len(uniq))[:, None]
    amps = masks / np.sqrt(masks.sum(axis=1, keepdims=True))
    out = apply_qft(amps.reshape((len(uniq),) + labels.shape), axes=tuple(range(1, labels.ndim + 1)))
    return inv.ravel(), np.cumsum(np.abs(out.reshape(len(uniq), -1)) ** 2, axis=1)


def _batched_fourier_samples(labels: np.ndarray, count: int, rng: np.random.Generator,
                             spectra=None) -> np.ndarray:
    """``count`` independent runs of the standard method on a product of cyclic
    groups.  Returns flat outcome indices.  ``spectra`` from ``_coset_spectra``
    avoids recomputing the transform of coset states already seen."""
    if count == 0:
        return np.zeros(0, dtype=np.int64)
    flat = labels.ravel()
    xs = rng.integers(0, flat.size, size=count)  # the uniform superposition's query outcome
    if spectra is None:
        masks = flat[None, :] == flat[xs][:, None]
        amps = masks / np.sqrt(masks.sum(axis=1, keepdims=True))
        out = apply_qft(amps.reshape((count,) + labels.shape), axes=tuple(range(1, labels.ndim + 1)))
        cdf = np.cumsum(np.abs(out.reshape(count, -1)) ** 2, axis=1)
    else:
        inv, rows = spectra
        cdf = rows[inv[xs]]
    u = rng.random(count) * cdf[:, -1]
    return np.minimum((cdf < u[:, None]).sum(axis=1), flat.size - 1)


def _kernel_mask(G: AbelianGroup, ys: Sequence[Tuple[int, ...]]) -> np.ndarray:
    """Elements x with sum_i y_i x_i / n_i integral for every sampled y."""
    if not ys or not G.orders:
        return np.ones(G.order, dtype=bool)
    L = math.lcm(*G.orders)
    scale = np.array([L // n for n in G.orders], dtype=np.int64)
    coords = G.coords(np.arange(G.order))
    phases = coords @ (np.asarray(ys, dtype=np.int64) * scale).T
    return ~(phases % L).any(axis=1)


def abelian_hsp_run(instance: HspInstance, rng: np.random.Generator, samples: Optional[int] = None,
                    verify: bool = True, max_extra: int = 64) -> HspRun:
    """Fourier-sample T characters, intersect their kernels, return the result.

    T defaults to 4 ceil(log2 |G|).  With ``verify`` the oracle is probed on
    the generators of the candidate, and more samples are drawn while some
    generator is not in the hidden subgroup.
    """
    G = instance.group
    if not isinstance(G, AbelianGroup):
        raise DomainError("abelian_hsp needs an Abelian group")
    T = 4 * math.ceil(math.log2(G.order)) if samples is None else samples
    labels = instance.label_table().reshape(G.orders or (1,))
    spectra = instance.spectra(labels)

    def draw(count):
        ys = G.coords(_batched_fourier_samples(labels, count, rng, spectra)).reshape(count, len(G.orders))
        return [tuple(int(v) for v in y) for y in ys]

    ys = draw(T)
    mask = _kernel_mask(G, ys)
    if verify:
        f0 = instance.oracle(G.identity)
        extra = 0
        while True:
            K = subgroup_from_mask(G, mask)
            if all(instance.oracle(g) == f0 for g in K.generators):
                break
            if extra == max_extra:
                raise PromiseError("kernel intersection did not settle on a hidden subgroup")
            (y,) = draw(1)
            ys.append(y)
            mask &= _kernel_mask(G, [y])
            extra += 1
    return HspRun(subgroup_from_mask(G, mask), ys)


def abelian_hsp(instance: HspInstance, rng: np.random.Generator, samples: Optional[int] = None,
                verify: bool = True) -> Subgroup:
    return abelian_hsp_run(instance, rng, samples, verify).subgroup
