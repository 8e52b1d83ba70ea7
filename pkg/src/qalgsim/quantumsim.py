"""Exact state-vector and density-matrix simulation.

States live on explicit, labelled bases; Fourier transforms over Z_N and
products of cyclic groups are applied with FFTs, and measurement draws from
the exact outcome distribution by inverse-CDF sampling.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Dict, Hashable, List, Optional, Sequence, Tuple

import numpy as np

from .errors import DomainError, ResourceError

TOL = 1e-10
MAX_DENSE_QFT = 2**20


def sample_index(probs: np.ndarray, rng: np.random.Generator) -> int:
    """Inverse-CDF draw from a (not necessarily normalised) probability vector."""
    probs = np.asarray(probs, dtype=float).ravel()
    cdf = np.cumsum(np.clip(probs, 0.0, None))
    total = cdf[-1]
    if total <= 0:
        raise DomainError("cannot sample from an all-zero distribution")
    i = int(np.searchsorted(cdf, rng.random() * total, side="right"))
    return min(i, len(cdf) - 1)


class PureState:
    """Normalised amplitudes over an ordered list of distinct basis labels."""

    def __init__(self, basis: Sequence[Hashable], amplitudes, check: bool = True):
        self.basis = list(basis)
        self.amplitudes = np.asarray(amplitudes, dtype=complex).ravel()
        if len(self.basis) != self.amplitudes.size:
            raise DomainError("basis and amplitude lengths differ")
        self._lookup: Optional[Dict[Hashable, int]] = None
        if check:
            if len(set(self.basis)) != len(self.basis):
                raise DomainError("basis labels must be unique")
            if abs(self.norm() - 1.0) > TOL:
                raise DomainError(f"state is not normalised (norm {self.norm()})")

    @classmethod
    def uniform(cls, basis: Sequence[Hashable]) -> "PureState":
        n = len(basis)
        return cls(basis, np.full(n, 1 / math.sqrt(n)))

    @classmethod
    def basis_state(cls, basis: Sequence[Hashable], label: Hashable) -> "PureState":
        amps = np.zeros(len(basis), dtype=complex)
        amps[list(basis).index(label)] = 1.0
        return cls(basis, amps)

    def norm(self) -> float:
        return float(np.sqrt(np.sum(np.abs(self.amplitudes) ** 2)))

    def index_of(self, label: Hashable) -> int:
        if self._lookup is None:
            self._lookup = {b: i for i, b in enumerate(self.basis)}
        return self._lookup[label]

    def amplitude(self, label: Hashable) -> complex:
        return complex(self.amplitudes[self.index_of(label)])

    def probabilities(self) -> np.ndarray:
        return np.abs(self.amplitudes) ** 2

    def sample(self, rng: np.random.Generator) -> Hashable:
        return self.basis[sample_index(self.probabilities(), rng)]

    def inner(self, other: "PureState") -> complex:
        if self.basis != other.basis:
            raise DomainError("states live on different bases")
        return complex(np.vdot(self.amplitudes, other.amplitudes))

    def evolve(self, unitary: np.ndarray) -> "PureState":
        return PureState(self.basis, unitary @ self.amplitudes)

    def density(self) -> "DensityMatrix":
        return DensityMatrix(self.basis, np.outer(self.amplitudes, np.conj(self.amplitudes)))

    def support(self) -> List[Hashable]:
        return [b for b, a in zip(self.basis, self.amplitudes) if abs(a) > TOL]

    def __repr__(self):
        shown = ", ".join(f"{b}: {a:.4g}" for b, a in zip(self.basis, self.amplitudes) if abs(a) > TOL)
        return f"PureState({{{shown}}})"


class DensityMatrix:
    def __init__(self, basis: Sequence[Hashable], matrix, check: bool = True):
        self.basis = list(basis)
        self.matrix = np.asarray(matrix, dtype=complex)
        n = len(self.basis)
        if self.matrix.shape != (n, n):
            raise DomainError("matrix shape does not match the basis")
        if check:
            self.validate()

    def validate(self, tol: float = TOL) -> None:
        m = self.matrix
        if np.max(np.abs(m - m.conj().T), initial=0.0) > tol:
            raise DomainError("density matrix is not Hermitian")
        if abs(np.trace(m) - 1.0) > tol:
            raise DomainError("density matrix does not have unit trace")
        if np.min(np.linalg.eigvalsh(m)) < -tol:
            raise DomainError("density matrix has a negative eigenvalue")

    @classmethod
    def mixture(cls, basis, weights: Sequence[float], states: Sequence[PureState]) -> "DensityMatrix":
        m = np.zeros((len(basis), len(basis)), dtype=complex)
        for w, s in zip(weights, states):
            m += w * np.outer(s.amplitudes, np.conj(s.amplitudes))
        return cls(basis, m)

    def eigenvalues(self) -> np.ndarray:
        return np.linalg.eigvalsh(self.matrix)

    def rank(self, tol: float = 1e-9) -> int:
        return int(np.sum(self.eigenvalues() > tol))


# --- oracle queries -----------------------------------------------------------

def oracle_collapse(state: PureState, f: Callable, rng: np.random.Generator) -> PureState:
    """Query f into an ancilla and discard it.

    The ancilla is never looked at again, so the register is left in the
    restriction of the state to a level set of f, chosen with probability
    equal to that level set's mass.
    """
    probs = state.probabilities()
    if probs.sum() <= TOL:
        raise DomainError("state has empty support")
    labels = [f(b) for b in state.basis]
    masses: Dict[Hashable, float] = {}
    for lab, pr in zip(labels, probs):
        masses[lab] = masses.get(lab, 0.0) + pr
    keys = [k for k, v in masses.items() if v > TOL * TOL]
    pick = keys[sample_index(np.array([masses[k] for k in keys]), rng)]
    mask = np.array([lab == pick for lab in labels])
    amps = np.where(mask, state.amplitudes, 0)
    return PureState(state.basis, amps / np.sqrt(masses[pick]), check=False)


def collapse_labels(amplitudes: np.ndarray, labels: np.ndarray, rng: np.random.Generator):
    """Array version of oracle_collapse for integer label arrays.

    Returns (label, renormalised amplitudes).
    """
    probs = np.abs(amplitudes) ** 2
    i = sample_index(probs.ravel(), rng)
    lab = labels.ravel()[i]
    mask = labels == lab
    new = np.where(mask, amplitudes, 0)
    return lab, new / np.sqrt(np.sum(probs[mask]))


def collapse_ensemble(state: PureState, f: Callable) -> List[Tuple[float, PureState]]:
    """Every possible post-query state with its probability."""
    probs = state.probabilities()
    labels = [f(b) for b in state.basis]
    out = []
    for lab in dict.fromkeys(labels):
        mask = np.array([x == lab for x in labels])
        mass = float(probs[mask].sum())
        if mass > TOL * TOL:
            out.append((mass, PureState(state.basis, np.where(mask, state.amplitudes, 0) / math.sqrt(mass))))
    return out


def ancilla_traced_density(state: PureState, f: Callable) -> DensityMatrix:
    """Compute |x>|f(x)> in an explicit second register and trace it out."""
    values = list(dict.fromkeys(f(b) for b in state.basis))
    vpos = {v: i for i, v in enumerate(values)}
    joint = np.zeros((len(state.basis), len(values)), dtype=complex)
    for i, b in enumerate(state.basis):
        joint[i, vpos[f(b)]] = state.amplitudes[i]
    return DensityMatrix(state.basis, joint @ joint.conj().T)


# --- Fourier transforms -------------------------------------------------------

def qft_dense(N: int) -> np.ndarray:
    """(1/sqrt N) sum_{x,y} w_N^{xy} |y><x|."""
    if N < 1:
        raise DomainError("N must be positive")
    if N > 4096:
        raise ResourceError("explicit QFT matrices are limited to N <= 4096; use apply_qft")
    k = np.arange(N)
    return np.exp(2j * np.pi * (np.outer(k, k) % N) / N) / math.sqrt(N)


def apply_qft(amplitudes: np.ndarray, axes=None, inverse: bool = False) -> np.ndarray:
    """Fourier transform over the product of cyclic groups given by the array shape."""
    a = np.asarray(amplitudes, dtype=complex)
    axes = tuple(range(a.ndim)) if axes is None else tuple(np.atleast_1d(axes))
    size = math.prod(a.shape[ax] for ax in axes)
    if size > MAX_DENSE_QFT:
        raise ResourceError("dense transforms limited to 2^20 amplitudes")
    if inverse:
        return np.fft.fftn(a, axes=axes) / math.sqrt(size)
    return np.fft.ifftn(a, axes=axes) * math.sqrt(size)


def shift_operator(N: int, s: int = 1) -> np.ndarray:
    """P_s |x> = |x + s>."""
    m = np.zeros((N, N))
    m[(np.arange(N) + s) % N, np.arange(N)] = 1
    return m


# --- the QFT circuit over Z_{2^n} -----------------------------------------------

@dataclass(frozen=True)
class Gate:
    kind: str  # "H" or "CR"
    q: int = -1
    r: int = 0
    ctrl: int = -1
    tgt: int = -1

    def to_json(self) -> dict:
        if self.kind == "H":
            return {"gate": "H", "q": self.q}
        return {"gate": "CR", "r": self.r, "ctrl": self.ctrl, "tgt": self.tgt}


GateList = List[Gate]


def qft_circuit(n: int, cutoff: Optional[int] = None) -> GateList:
    """Hadamards and controlled R_r = diag(1, exp(2 pi i / 2^r)) on n qubits.

    Qubit j carries bit j of x (qubit 0 is least significant).  The most
    significant qubit is processed first; its output ends up holding the
    lowest output bit, so the result is the DFT followed by a bit reversal.
    Rotations with r > cutoff are dropped.
    """
    if not 1 <= n <= 20:
        raise DomainError("qft_circuit supports 1 <= n <= 20 qubits")
    gates: GateList = []
    for tgt in range(n - 1, -1, -1):
        gates.append(Gate("H", q=tgt))
        for r in range(2, tgt + 2):
            if cutoff is None or r <= cutoff:
                gates.append(Gate("CR", r=r, ctrl=tgt - r + 1, tgt=tgt))
    return gates


def gates_to_json(gates: GateList) -> List[dict]:
    return [g.to_json() for g in gates]


def apply_gates(state: np.ndarray, gates: GateList, n: int) -> np.ndarray:
    """Apply gates to a (2^n,) vector or to every column of a (2^n, k) matrix."""
    vec = np.array(state, dtype=complex)
    cols = vec.reshape(2**n, -1)
    idx = np.arange(2**n)
    inv_sqrt2 = 1 / math.sqrt(2)
    for g in gates:
        if g.kind == "H":
            if not 0 <= g.q < n:
                raise DomainError("qubit index out of range")
            # axis order after reshape: most significant qubit first
            t = cols.reshape((2,) * n + (-1,))
            ax = n - 1 - g.q
            a0 = np.take(t, 0, axis=ax)
            a1 = np.take(t, 1, axis=ax)
            t = np.stack(((a0 + a1) * inv_sqrt2, (a0 - a1) * inv_sqrt2), axis=ax)
            cols = t.reshape(2**n, -1)
        elif g.kind == "CR":
            if not (0 <= g.ctrl < n and 0 <= g.tgt < n) or g.r < 1:
                raise DomainError("bad controlled rotation")
            both = ((idx >> g.ctrl) & 1) & ((idx >> g.tgt) & 1)
            phase = np.where(both == 1, np.exp(2j * np.pi / 2**g.r), 1.0)
            cols = cols * phase[:, None]
        else:
            raise DomainError(f"unknown gate {g.kind}")
    return cols.reshape(vec.shape)


def circuit_unitary(gates: GateList, n: int) -> np.ndarray:
    return apply_gates(np.eye(2**n, dtype=complex), gates, n)


def bit_reversal(n: int) -> np.ndarray:
    """Permutation matrix |x> -> |reverse_n(x)>."""
    N = 2**n
    rev = np.array([int(format(x, f"0{n}b")[::-1], 2) for x in range(N)]) if n else np.zeros(1, int)
    m = np.zeros((N, N))
    m[rev, np.arange(N)] = 1
    return m


# --- phase estimation and the Hadamard test -------------------------------------

def powers_of(U: np.ndarray) -> Callable[[int, np.ndarray], np.ndarray]:
    """controlled_powers callable for an explicit unitary matrix."""
    cache = {0: np.eye(U.shape[0], dtype=complex)}

    def act(x: int, vec: np.ndarray) -> np.ndarray:
        if x not in cache:
            cache[x] = np.linalg.matrix_power(U, x)
        return cache[x] @ vec

    return act


def phase_estimation_distribution(controlled_powers, eigenstate, n: int) -> np.ndarray:
    """Outcome distribution of the n-bit estimation circuit (inverse QFT on the control register)."""
    vec = eigenstate.amplitudes if isinstance(eigenstate, PureState) else np.asarray(eigenstate, complex)
    M = 2**n
    joint = np.empty((M, vec.size), dtype=complex)
    for x in range(M):
        joint[x] = controlled_powers(x, vec)
    joint /= math.sqrt(M)
    out = apply_qft(joint, axes=0, inverse=True)
    return np.sum(np.abs(out) ** 2, axis=1)


def phase_estimation(controlled_powers, eigenstate, n: int, rng: np.random.Generator) -> int:
    return sample_index(phase_estimation_distribution(controlled_powers, eigenstate, n), rng)


def phase_estimation_closed_form(phi: float, n: int) -> np.ndarray:
    """|2^-n sum_x exp(i x (phi - 2 pi y / 2^n))|^2 for every y."""
    M = 2**n
    x = np.arange(M)
    y = np.arange(M)
    amp = np.exp(1j * np.outer(phi - 2 * np.pi * y / M, x)).sum(axis=1) / M
    return np.abs(amp) ** 2


def hadamard_test_expectation(U: np.ndarray, state, imaginary: bool = False) -> float:
    probs = _hadamard_test_probs(U, state, imaginary)
    return float(probs[0] - probs[1])


def _hadamard_test_probs(U: np.ndarray, state, imaginary: bool) -> np.ndarray:
    psi = state.amplitudes if isinstance(state, PureState) else np.asarray(state, complex)
    if U.shape != (psi.size, psi.size):
        raise DomainError("unitary dimension does not match the state")
    # control qubit after H: (|0>|psi> + |1>U|psi>)/sqrt2
    branch0 = psi / math.sqrt(2)
    branch1 = (U @ psi) / math.sqrt(2)
    if imaginary:
        branch1 = -1j * branch1  # S^dagger on the control
    plus = (branch0 + branch1) / math.sqrt(2)
    minus = (branch0 - branch1) / math.sqrt(2)
    return np.array([np.vdot(plus, plus).real, np.vdot(minus, minus).real])


def hadamard_test(U: np.ndarray, state, imaginary: bool, rng: np.random.Generator) -> int:
    """Single run: +1 for control outcome 0, -1 for outcome 1."""
    return 1 if sample_index(_hadamard_test_probs(U, state, imaginary), rng) == 0 else -1


# --- hidden subgroup states ---------------------------------------------------

def hidden_subgroup_state(G, H) -> DensityMatrix:
    """Uniform mixture of the left coset states xH, one term per distinct coset."""
    from .grouprep import _as_subgroup

    if G.order > 256:
        raise ResourceError("dense hidden subgroup states limited to |G| <= 256")
    H = _as_subgroup(G, H)
    seen = np.zeros(G.order, dtype=bool)
    m = np.zeros((G.order, G.order), dtype=complex)
    weight = H.order / G.order
    for x in range(G.order):
        if seen[x]:
            continue
        coset = G.mul_idx(x, H.indices)
        seen[coset] = True
        v = np.zeros(G.order)
        v[coset] = 1 / math.sqrt(H.order)
        m += weight * np.outer(v, v)
    return DensityMatrix(G.elements, m)


def _psd_sqrt(m: np.ndarray) -> np.ndarray:
    w, v = np.linalg.eigh(m)
    # rounding noise of order 1e-17 on null eigenvalues would otherwise
    # contribute ~1e-9 after the square root
    w = np.where(w > 1e-12 * max(float(w.max()), 1.0), w, 0.0)
    w = np.sqrt(w)
    return (v * w) @ v.conj().T


def fidelity(rho, sigma) -> float:
    """Tr |sqrt(rho) sqrt(sigma)|, the sum of singular values."""
    a = rho.matrix if isinstance(rho, DensityMatrix) else np.asarray(rho)
    b = sigma.matrix if isinstance(sigma, DensityMatrix) else np.asarray(sigma)
    s = np.linalg.svd(_psd_sqrt(a) @ _psd_sqrt(b), compute_uv=False)
    return float(min(1.0, s.sum()))


# --- Fourier sampling of arithmetic progressions -------------------------------

def progression_fourier_probability(y: int, start: int, step: int, count: int, Q: int) -> float:
    """Pr(y) after the Z_Q transform of the uniform state on start + j*step, j < count."""
    theta = (step * y) % Q
    return _fejer(count, theta, Q) / (count * Q)


def _fejer(n: int, num: int, den: int) -> float:
    """|sum_{l<n} exp(2 pi i l num/den)|^2, with num/den reduced mod 1 exactly."""
    num %= den
    if num == 0:
        return float(n * n)
    s_n = math.sin(math.pi * ((n * num) % (2 * den)) / den)
    s_1 = math.sin(math.pi * num / den)
    return (s_n / s_1) ** 2


def _box_prefix_prob(c: int, t: int, m: int, k: int) -> float:
    """Pr(u = c mod 2^t) for u drawn from the Z_{2^k} transform of a uniform box of length m."""
    M = 2 ** (k - t)
    n0, rem = divmod(m, M)
    total = rem * _fejer(n0 + 1, c, 2**t) if rem else 0.0
    if n0:
        total += (M - rem) * _fejer(n0, c, 2**t)
    return M * total / (2**k * m)


def sample_box_fourier(m: int, k: int, rng: np.random.Generator) -> int:
    """Exact draw of u from Pr(u) = |sum_{j<m} w^{uj}|^2 / (m 2^k), bit by bit from the bottom."""
    if not 1 <= m <= 2**k:
        raise DomainError("box length must lie in [1, 2^k]")
    c = 0
    p_c = 1.0
    for t in range(k):
        p0 = _box_prefix_prob(c, t + 1, m, k)
        p1 = max(p_c - p0, 0.0)
        if rng.random() * (p0 + p1) >= p0:
            c += 2**t
            p_c = p1
        else:
            p_c = p0
    return c


def sample_progression_fourier(start: int, step: int, count: int, Q: int, rng: np.random.Generator) -> int:
    """Measure the Z_Q transform (Q a power of two) of a uniform arithmetic progression.

    Cost is polynomial in log Q: the distribution depends on y only through
    step*y mod Q, which reduces the problem to a box of length ``count`` in
    Z_{Q/g} with g = gcd(step, Q).
    """
    if Q & (Q - 1):
        raise DomainError("progression sampler needs a power-of-two modulus")
    if count < 1 or step < 1 or start < 0 or start + (count - 1) * step >= Q:
        raise DomainError("progression does not fit in Z_Q")
    g = math.gcd(step, Q)
    Qp = Q // g
    u = sample_box_fourier(count, Qp.bit_length() - 1, rng)
    y0 = (u * pow(step // g, -1, Qp)) % Qp if Qp > 1 else 0
    return int(y0 + Qp * int(rng.integers(g)))


def distribution_json(outcomes: Sequence, probs: Sequence[float], tol: float = 0.0) -> List[dict]:
    out = []
    for o, p in zip(outcomes, probs):
        if p > tol:
            out.append({"outcome": o if isinstance(o, (int, str)) else list(o), "probability": float(p)})
    return out
