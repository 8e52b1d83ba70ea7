import math

import numpy as np
import pytest

from qalgsim.abelian_hsp import HiddenSubgroupOracle, HspInstance
from qalgsim.errors import DomainError, PromiseError, ResourceError
from qalgsim.grouprep import (
    AbelianGroup,
    DihedralGroup,
    HeisenbergGroup,
    make_subgroup,
    subgroups,
    wfs_distribution,
)
from qalgsim.nonabelian_hsp import (
    HeisenbergSamplePair,
    SievePool,
    default_pool_size,
    dihedral_fourier_sample,
    dihedral_reflection_oracle,
    heisenberg_attempt,
    heisenberg_delta,
    heisenberg_hsp,
    heisenberg_oracle,
    heisenberg_roots,
    heisenberg_solutions_brute,
    heisenberg_success_probability,
    kuperberg_sieve,
    normal_hsp,
    normal_hsp_run,
    phase_qubit,
    quantum_sampling_unitary,
    sieve_combine,
    sieve_combine_explicit,
    sieve_least_bit,
    weak_fourier_distribution,
    weak_fourier_samples,
)

CHI2_63_999 = 103.4  # 0.999 quantile of chi-square with 63 degrees of freedom


def rng(seed=0):
    return np.random.default_rng(seed)


def _same_up_to_phase(a, b, tol=1e-10):
    return abs(abs(np.vdot(a, b)) - 1) < tol


# --- normal subgroups --------------------------------------------------------------------------

def test_normal_hsp_abelian_group():
    G = AbelianGroup([4, 6])
    for H in subgroups(G):
        assert normal_hsp(G, HiddenSubgroupOracle(G, H), rng()).same_as(H)


def test_normal_hsp_d4_rotations_within_eight_rounds():
    G = DihedralGroup(4)
    H = make_subgroup(G, [(1, 0)])
    oracle = HiddenSubgroupOracle(G, H)
    good = 0
    for seed in range(100):
        run = normal_hsp_run(G, oracle, rng(seed), samples=1)
        good += run.subgroup.same_as(H) and len(run.irreps_sampled) <= 8
    assert good >= 95


@pytest.mark.parametrize("G", [DihedralGroup(4), DihedralGroup(6), HeisenbergGroup(3)], ids=str)
def test_normal_hsp_all_normal_subgroups(G):
    for H in subgroups(G):
        if H.is_normal:
            assert normal_hsp(G, HiddenSubgroupOracle(G, H), rng()).same_as(H)


def test_normal_hsp_heisenberg_center():
    G = HeisenbergGroup(3)
    Z = make_subgroup(G, [(1, 0, 0)])
    assert normal_hsp(G, HiddenSubgroupOracle(G, Z), rng()).same_as(Z)


def test_normal_hsp_rejects_non_normal_hidden_subgroup():
    G = DihedralGroup(4)
    H = make_subgroup(G, [(0, 1)])
    assert not H.is_normal
    with pytest.raises(PromiseError):
        normal_hsp(G, HiddenSubgroupOracle(G, H), rng())


@pytest.mark.parametrize("G", [DihedralGroup(4), HeisenbergGroup(3)], ids=str)
def test_weak_fourier_sampling_statistics(G):
    count = 10_000
    for H in subgroups(G):
        labels = HspInstance.from_subgroup(G, H).label_table()
        p = wfs_distribution(G, H)
        assert np.allclose(weak_fourier_distribution(G, labels), p, atol=1e-12)
        freq = np.bincount(weak_fourier_samples(G, labels, count, rng(H.order)), minlength=len(p)) / count
        sigma = np.sqrt(p * (1 - p) / count)
        assert np.all(np.abs(freq - p) <= 3 * sigma + 1e-12)


# --- dihedral coset states -----------------------------------------------------------------------

def test_dihedral_sample_examples():
    N = 16
    plus = np.array([1, 1]) / math.sqrt(2)
    for seed in range(200):
        k, q = dihedral_fourier_sample(N, 5, rng(seed))
        assert _same_up_to_phase(q, phase_qubit(N, 5, k))
        if k == 0:
            assert np.allclose(q, plus)
    for y in range(N):
        q = phase_qubit(N, y, N // 2)
        minus_weight = abs(q[0] - q[1]) ** 2 / 2
        assert minus_weight == pytest.approx(y % 2)


def test_dihedral_sample_index_is_uniform():
    N, count = 64, 10_000
    g = rng(7)
    ks = [dihedral_fourier_sample(N, 37, g)[0] for _ in range(count)]
    obs = np.bincount(ks, minlength=N)
    chi2 = ((obs - count / N) ** 2 / (count / N)).sum()
    assert chi2 < CHI2_63_999


def test_sieve_combine_examples():
    N = 32
    outs = {sieve_combine(5, 5, N, rng(s))[0] for s in range(50)}
    assert outs == {10, 0}
    assert {sieve_combine(7, 0, N, rng(s))[0] for s in range(20)} == {7}
    g = rng(11)
    signs = [sieve_combine(3, 9, N, g)[1] for _ in range(10_000)]
    assert abs(signs.count("+") / 10_000 - 0.5) <= 0.02


def test_sieve_combine_explicit_matches_symbolic_law():
    N, y = 16, 11
    for p in range(N):
        for q in range(N):
            a, b = phase_qubit(N, y, p), phase_qubit(N, y, q)
            joint = np.kron(a, b).reshape(2, 2)
            joint[1] = joint[1, ::-1].copy()
            probs = (np.abs(joint) ** 2).sum(axis=0)
            assert np.allclose(probs, 0.5)
            for seed in range(4):
                state, sign = sieve_combine_explicit(a, b, rng(seed))
                want = (p + q) % N if sign == "+" else (p - q) % N
                assert _same_up_to_phase(state, phase_qubit(N, y, want))


# --- Kuperberg sieve -----------------------------------------------------------------------------

def test_sieve_parity_small_case():
    oracle = dihedral_reflection_oracle(2, 3)
    hits = sum(sieve_least_bit(2, rng(s), oracle=oracle).bit == 1 for s in range(100))
    assert hits >= 90


def test_sieve_even_y_gives_plus():
    for seed in range(20):
        res = sieve_least_bit(4, rng(seed), oracle=dihedral_reflection_oracle(4, 6))
        assert res.outcome == "+"


def test_sieve_stage_invariant_and_telemetry():
    res = sieve_least_bit(9, rng(), y=123)
    stages = [t for t in res.telemetry if "stage" in t]
    assert stages[0]["pool"] == default_pool_size(9)
    for before, after in zip(stages, stages[1:]):
        assert after["pairs"] * 2 + after["unpaired"] == before["pool"]
        assert after["pool"] + after["plus_discarded"] == after["pairs"]
    pool = SievePool(4, np.array([0, 4, 8, 12]), stage=1)
    pool.check_invariant()
    with pytest.raises(AssertionError):
        SievePool(4, np.array([2]), stage=1).check_invariant()


def test_kuperberg_full_recovery_symbolic():
    g = rng(5)
    ys = g.integers(0, 256, size=50)
    hits = sum(kuperberg_sieve(8, rng(i), y=int(y)).y == y for i, y in enumerate(ys))
    assert hits >= 40


def test_kuperberg_oracle_mode_small():
    for y in (0, 1, 6, 13):
        assert kuperberg_sieve(4, rng(y), oracle=dihedral_reflection_oracle(4, y)).y == y


def test_kuperberg_errors():
    with pytest.raises(DomainError):
        kuperberg_sieve(4, rng())
    with pytest.raises(ResourceError):
        sieve_least_bit(8, rng(), y=3, pool_size=4)


def test_reflection_oracle_hides_reflection():
    n, y = 3, 5
    G = DihedralGroup(2**n)
    H = make_subgroup(G, [(y, 1)])
    assert HspInstance(G, dihedral_reflection_oracle(n, y)).check_promise(H)


# --- Heisenberg ----------------------------------------------------------------------------------

def test_delta_solution_counts_exhaustive_p5():
    p = 5
    for s in range(p):
        for u in range(p):
            for t in range(p):
                for v in range(p):
                    pair = HeisenbergSamplePair(s, t, u, v)
                    if pair.degenerate(p):
                        continue
                    brute = heisenberg_solutions_brute(pair, p)
                    for a in range(p):
                        for b in range(p):
                            sols = sorted(brute.get((a, b), []))
                            assert sorted(heisenberg_roots(pair, a, b, p)) == sols
                            d = heisenberg_delta(pair, a, b, p)
                            leg = 0 if d == 0 else (1 if pow(d, (p - 1) // 2, p) == 1 else -1)
                            assert len(sols) == 1 + leg


def test_degenerate_pair_rejected():
    with pytest.raises(DomainError):
        heisenberg_roots(HeisenbergSamplePair(0, 1, 1, 1), 0, 0, 5)


@pytest.mark.parametrize("p", [3, 5])
def test_quantum_sampling_unitary_is_orthogonal(p):
    g = rng(p)
    for _ in range(10):
        s, u = int(g.integers(1, p)), int(g.integers(1, p))
        if (s + u) % p == 0:
            continue
        U = quantum_sampling_unitary(HeisenbergSamplePair(s, int(g.integers(p)), u, int(g.integers(p))), p)
        assert np.allclose(U @ U.T, np.eye(p * p), atol=1e-12)


@pytest.mark.parametrize("p,a,b", [(3, 1, 2), (3, 0, 0), (5, 2, 3), (5, 4, 1)])
def test_state_after_sampling_matches_brute_counts(p, a, b):
    _, oracle = heisenberg_oracle(p, a, b)
    w = np.exp(2j * np.pi / p)
    for seed in range(5):
        at = heisenberg_attempt(p, oracle, rng(seed))
        brute = heisenberg_solutions_brute(at.pair, p)
        S = np.array([[len(brute.get((al, be), [])) for be in range(p)] for al in range(p)])
        phase = np.array([[w ** (al * a + be * b) for be in range(p)] for al in range(p)])
        want = phase * np.sqrt(S) / p
        A = at.state_after_sampling
        ratio = np.vdot(want, A)
        assert abs(abs(ratio) - 1) < 1e-10
        assert np.allclose(A, ratio * want, atol=1e-10)
        assert at.success_probability == pytest.approx(np.sqrt(S).sum() ** 2 / p**4)


def test_success_probability_near_half():
    p = 7
    g = rng()
    probs = []
    for _ in range(200):
        s, u = int(g.integers(1, p)), int(g.integers(1, p))
        if (s + u) % p:
            probs.append(heisenberg_success_probability(HeisenbergSamplePair(s, int(g.integers(p)), u, int(g.integers(p))), p))
    assert 0.35 <= np.mean(probs) <= 0.65


@pytest.mark.parametrize("p,a,b", [(3, 0, 0), (3, 2, 1), (5, 2, 3), (7, 4, 1)])
def test_heisenberg_hsp_recovers(p, a, b):
    _, oracle = heisenberg_oracle(p, a, b)
    for seed in range(3):
        assert heisenberg_hsp(p, oracle, rng(seed)) == (a, b)


def test_heisenberg_rejects_bad_prime():
    _, oracle = heisenberg_oracle(3, 1, 1)
    with pytest.raises(DomainError):
        heisenberg_attempt(9, oracle, rng())
