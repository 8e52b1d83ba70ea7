"""Acceptance criteria, one test each.  Every test records a PASS/FAIL line
that is printed in the terminal summary."""

import math

import numpy as np
import sympy

from qalgsim.abelian_hsp import (
    DlogSampler,
    HiddenSubgroupOracle,
    HspInstance,
    PeriodicOracle,
    ZpStarGroup,
    abelian_hsp_run,
    closest_peak_mass,
    coset_fourier_state,
    discrete_log,
    factor,
    factor_round,
    fourier_distribution,
)
from qalgsim.ecgroup import INFINITY, CurveSpec, ECGroup, ec_add, ec_enumerate, ec_order, ec_scalar_mul
from qalgsim.finitefield import FieldSpec, ff_add, ff_mul, gauss_sum_classical
from qalgsim.grouprep import (
    AbelianGroup,
    DihedralGroup,
    HeisenbergGroup,
    abelian_groups_of_order,
    irreps,
    subgroups,
    wfs_distribution,
)
from qalgsim.hiddenshift import (
    circular_distance,
    gauss_phase_distribution,
    gauss_sum_estimate,
    legendre_attempt,
    legendre_oracle,
    zpn_shift,
    zpn_shift_distribution,
    zpn_shift_formula,
)
from qalgsim.nonabelian_hsp import (
    HeisenbergSamplePair,
    heisenberg_attempt,
    heisenberg_delta,
    heisenberg_oracle,
    heisenberg_solutions_brute,
    dihedral_reflection_oracle,
    kuperberg_sieve,
    weak_fourier_samples,
)
from qalgsim.numtheory import jacobi, pell_fundamental
from qalgsim.quantumsim import bit_reversal, circuit_unitary, fidelity, hidden_subgroup_state, qft_circuit, qft_dense

SIX_OVER_PI2 = 6 / math.pi**2


def test_qft_correctness(criterion):
    with criterion(1, "QFT circuit vs dense transform", 10) as c:
        errs = []
        for n in range(1, 11):
            U = bit_reversal(n) @ circuit_unitary(qft_circuit(n), n)
            errs.append(np.linalg.norm(U - qft_dense(2**n), 2))
        c.note(f"max exact error {max(errs):.1e}")
        assert max(errs) <= 1e-10
        n = 10
        cutoff = math.ceil(math.log2(n)) + 2
        U = bit_reversal(n) @ circuit_unitary(qft_circuit(n, cutoff), n)
        err = np.linalg.norm(U - qft_dense(2**n), 2)
        c.note(f"cutoff {cutoff} error {err:.4f}")
        assert err <= 0.1


def test_period_zn_exact(criterion):
    with criterion(2, "period finding over Z_N: exact interference pattern", 30) as c:
        cases = 0
        for N in range(1, 65):
            for r in (d for d in range(1, N + 1) if N % d == 0):
                oracle = PeriodicOracle(r)
                peaks = np.arange(r) * (N // r)
                for s in range(r):
                    want = np.zeros(N, dtype=complex)
                    want[peaks] = np.exp(2j * np.pi * s * np.arange(r) / r) / math.sqrt(r)
                    assert np.max(np.abs(coset_fourier_state(oracle, N, s) - want)) <= 1e-10
                probs = fourier_distribution(oracle, N)
                want = np.zeros(N)
                want[peaks] = 1 / r
                assert np.max(np.abs(probs - want)) <= 1e-10
                cases += 1
        c.note(f"{cases} (N, r) pairs")


def test_period_z_peak_mass(criterion):
    with criterion(3, "period finding over Z: closest-peak mass", 10) as c:
        for r in (3, 6, 10):
            mass = closest_peak_mass(PeriodicOracle(r), 2**10, r)
            c.note(f"r={r}: {mass:.4f}")
            assert mass >= 4 / math.pi**2


def test_factoring(criterion):
    with criterion(4, "factoring and single-round success", 120) as c:
        for N in (15, 21, 35, 91, 2047):
            want = sympy.factorint(N)
            for seed in range(3):
                got = factor(N, np.random.default_rng([seed, N]))
                assert dict(got.prime_powers) == want
            rng = np.random.default_rng([100, N])
            units = [a for a in range(2, N) if math.gcd(a, N) == 1]
            wins = sum(factor_round(N, rng, a=int(rng.choice(units))).outcome == "split" for _ in range(500))
            c.note(f"N={N}: {wins / 500:.3f}")
            assert wins / 500 >= 0.4


def _f7_curve():
    return CurveSpec(7, -1, 1)


def test_discrete_log(criterion):
    with criterion(5, "discrete log: recovery and coprime-pair rate", 60) as c:
        curve = _f7_curve()
        pts = [P for P in ec_enumerate(curve) if P != INFINITY]
        g = max(pts, key=lambda P: ec_order(P, curve))
        cases = [
            ("Z17*", ZpStarGroup(17), 3, 16),
            ("Z101*", ZpStarGroup(101), 2, 100),
            ("F7 curve", ECGroup(curve), g, ec_order(g, curve)),
        ]
        rates_ok = True
        for name, group, gen, order in cases:
            for seed, k in enumerate((1, 3, 5, order - 1)):
                x = group.pow(gen, k)
                assert discrete_log(group, gen, x, np.random.default_rng([seed, 5])) == k % order
            sampler = DlogSampler(group, gen, group.pow(gen, 3), order)
            rng = np.random.default_rng([5, order])
            rate = sum(sampler.round(rng)[2] for _ in range(2000)) / 2000
            sigma = math.sqrt(SIX_OVER_PI2 * (1 - SIX_OVER_PI2) / 2000)
            ok = abs(rate - SIX_OVER_PI2) <= 3 * sigma
            rates_ok &= ok
            c.note(f"{name} N={order} rate {rate:.3f}{'' if ok else ' outside 3 sigma'}")
        assert rates_ok


def test_abelian_hsp(criterion):
    with criterion(6, "Abelian HSP over all groups of order <= 64", 60) as c:
        runs, failures = 0, []
        for order in range(1, 65):
            T = 4 * math.ceil(math.log2(order)) if order > 1 else 0
            for gi, G in enumerate(abelian_groups_of_order(order)):
                for hi, H in enumerate(subgroups(G)):
                    inst = HspInstance.from_subgroup(G, H)
                    for seed in range(5):
                        rng = np.random.default_rng([seed, order, gi, hi])
                        run = abelian_hsp_run(inst, rng, samples=T, verify=False)
                        if not run.subgroup.same_as(H):
                            failures.append(f"{G} |H|={H.order} seed {seed}")
                        runs += 1
        c.note(f"{runs} runs, {len(failures)} wrong" + (f" ({', '.join(failures)})" if failures else ""))
        assert not failures


def test_fidelity_bound(criterion):
    with criterion(7, "hidden subgroup state fidelity bound", 30) as c:
        worst = 0.0
        for G in (AbelianGroup([2, 2, 2]), DihedralGroup(4), DihedralGroup(6)):
            subs = subgroups(G)
            states = [hidden_subgroup_state(G, H) for H in subs]
            for i in range(len(subs)):
                for j in range(i + 1, len(subs)):
                    F = fidelity(states[i], states[j])
                    worst = max(worst, F)
                    assert F <= 1 / math.sqrt(2) + 1e-10
        c.note(f"largest fidelity {worst:.6f}")


def test_weak_fourier_sampling(criterion):
    with criterion(8, "weak Fourier sampling frequencies", 60) as c:
        count = 10**4
        worst = 0.0
        for G in (DihedralGroup(6), HeisenbergGroup(3)):
            for hi, H in enumerate(subgroups(G)):
                labels = HiddenSubgroupOracle(G, H).table()
                draws = weak_fourier_samples(G, labels, count, np.random.default_rng([8, hi, G.order]))
                freq = np.bincount(draws, minlength=len(irreps(G))) / count
                p = wfs_distribution(G, H)
                sd = np.sqrt(p * (1 - p) / count)
                zero = sd < 1e-12
                assert np.all(freq[zero] == np.round(p[zero]))
                if (~zero).any():
                    worst = max(worst, float(np.max(np.abs(freq - p)[~zero] / sd[~zero])))
        c.note(f"largest deviation {worst:.2f} sigma")
        assert worst <= 3


def test_kuperberg(criterion):
    with criterion(9, "Kuperberg sieve, n = 8", 120) as c:
        n = 8
        hits = 0
        for seed in range(50):
            rng = np.random.default_rng([9, seed])
            y = int(rng.integers(2**n))
            hits += kuperberg_sieve(n, rng, y=y).y == y
        c.note(f"symbolic {hits}/50")
        explicit = 0
        for seed in range(5):
            rng = np.random.default_rng([90, seed])
            y = int(rng.integers(2**n))
            explicit += kuperberg_sieve(n, rng, oracle=dihedral_reflection_oracle(n, y)).y == y
        c.note(f"explicit {explicit}/5")
        assert hits >= 40
        assert explicit >= 4


def test_heisenberg(criterion):
    with criterion(10, "Heisenberg HSP", 120) as c:
        for p, (a, b) in ((5, (2, 3)), (7, (4, 1))):
            _, oracle = heisenberg_oracle(p, a, b)
            rng = np.random.default_rng([10, p])
            wins = sum(heisenberg_attempt(p, oracle, rng).result == (a, b) for _ in range(2000))
            c.note(f"p={p}: {wins / 2000:.3f}")
            assert 0.35 <= wins / 2000 <= 0.65
        p = 5
        checked = 0
        for s in range(1, p):
            for u in range(1, p):
                if (s + u) % p == 0:
                    continue
                for t in range(p):
                    for v in range(p):
                        pair = HeisenbergSamplePair(s, t, u, v)
                        sols = heisenberg_solutions_brute(pair, p)
                        for alpha in range(p):
                            for beta in range(p):
                                d = heisenberg_delta(pair, alpha, beta, p)
                                want = 1 if d == 0 else (2 if jacobi(d, p) == 1 else 0)
                                assert len(sols.get((alpha, beta), [])) == want
                                checked += 1
        c.note(f"{checked} delta cases")


def test_legendre_shift(criterion):
    with criterion(11, "shifted Legendre symbol", 60) as c:
        spec = FieldSpec(101)
        oracle = legendre_oracle(spec, 40)
        rng = np.random.default_rng(11)
        wins = sum(legendre_attempt(spec, oracle, rng).result == 40 for _ in range(500))
        c.note(f"p=101: {wins / 500:.3f}")
        assert wins / 500 >= 0.9
        for p in sympy.primerange(3, 32):
            spec = FieldSpec(p)
            chi_hat_1 = sum(jacobi(x, p) * np.exp(2j * np.pi * x / p) for x in range(p)) / math.sqrt(p)
            for s in range(p):
                g = np.random.default_rng([s, p])
                at = legendre_attempt(spec, legendre_oracle(spec, s), g, keep_states=True)
                while at.branch != "fourier":
                    at = legendre_attempt(spec, legendre_oracle(spec, s), g, keep_states=True)
                y = np.arange(p)
                want = chi_hat_1 / math.sqrt(p - 1) * np.exp(-2j * np.pi * s * y / p)
                want[0] = 0
                assert np.max(np.abs(at.states["step5"] - want)) <= 1e-10
        c.note("phase-corrected state exact for p <= 31")


def test_gauss_sums(criterion):
    with criterion(12, "Gauss sums", 60) as c:
        for q, (p, r) in {5: (5, 1), 7: (7, 1), 8: (2, 3), 9: (3, 2), 11: (11, 1), 13: (13, 1)}.items():
            spec = FieldSpec(p, r)
            for a in range(1, q - 1):
                for b in range(1, q):
                    G = gauss_sum_classical(a, spec.elem(b), spec)
                    assert abs(abs(G) - math.sqrt(q)) <= 1e-9
        delta = 0.1
        for q in (5, 7, 11):
            spec = FieldSpec(q)
            hits = total = 0
            worst_exact = 1.0
            rng = np.random.default_rng(12)
            for a in range(1, q - 1):
                for b in range(1, q):
                    G = gauss_sum_classical(a, spec.elem(b), spec)
                    phi = math.atan2(G.imag, G.real) % (2 * math.pi)
                    probs = gauss_phase_distribution(spec, a, b, delta)
                    grid = 2 * math.pi * np.arange(len(probs)) / len(probs)
                    close = np.array([circular_distance(g, phi) <= delta for g in grid])
                    worst_exact = min(worst_exact, float(probs[close].sum()))
                    for _ in range(10):
                        hits += circular_distance(gauss_sum_estimate(spec, a, b, delta, rng), phi) <= delta
                        total += 1
            c.note(f"q={q}: {hits / total:.3f} (exact min {worst_exact:.3f})")
            assert hits / total >= 0.75
            assert worst_exact >= 0.75


def test_zpn_hidden_shift(criterion):
    with criterion(13, "(Z_p)^n hidden shift", 60) as c:
        wins = 0
        for seed in range(100):
            rng = np.random.default_rng([13, seed])
            s = tuple(int(v) for v in rng.integers(0, 2, size=10))
            if not any(s):
                s = (1,) + s[1:]
            wins += zpn_shift(2, 10, s, rng, initial=64).candidates == [s]
        c.note(f"p=2 n=10: {wins}/100")
        assert wins >= 99
        for seed in range(5):
            rng = np.random.default_rng([31, seed])
            s = np.array(rng.integers(0, 3, size=4))
            if not s.any():
                s[0] = 1
            want = sorted(tuple(int(v) for v in (k * s) % 3) for k in (1, 2))
            assert zpn_shift(3, 4, s, rng).candidates == want
        for s in [(a, b) for a in range(3) for b in range(3) if a or b]:
            assert np.max(np.abs(zpn_shift_distribution(3, 2, s) - zpn_shift_formula(3, 2, s))) <= 1e-10


GF8_TABLE = [
    [0, 0, 0, 0, 0, 0, 0, 0],
    [0, 1, 2, 3, 4, 5, 6, 7],
    [0, 2, 4, 6, 3, 1, 7, 5],
    [0, 3, 6, 5, 7, 4, 1, 2],
    [0, 4, 3, 7, 6, 2, 5, 1],
    [0, 5, 1, 4, 2, 7, 3, 6],
    [0, 6, 7, 1, 5, 3, 2, 4],
    [0, 7, 5, 2, 1, 6, 4, 3],
]

PELL_ROWS = {
    2: (3, 2),
    3: (2, 1),
    5: (9, 4),
    13: (649, 180),
    14: (15, 4),
    6009: (131634010632725315892594469510599473884013975, 1698114661157803451688949237883146576681644),
    6013: (40929908599, 527831340),
}

F7_POINTS = {INFINITY, (0, 1), (0, 6), (1, 1), (1, 6), (2, 0), (3, 2), (3, 5), (5, 3), (5, 4), (6, 1), (6, 6)}


def test_classical_anchors(criterion):
    with criterion(14, "classical anchors: Pell, GF(8), F7 curve", 30) as c:
        for d, row in PELL_ROWS.items():
            assert pell_fundamental(d) == row
        spec = FieldSpec(2, 3, modulus=(1, 1, 0, 1))
        for i in range(8):
            for j in range(8):
                assert ff_mul(spec.elem(i), spec.elem(j)).idx == GF8_TABLE[i][j]
                assert ff_add(spec.elem(i), spec.elem(j)).idx == i ^ j
        curve = _f7_curve()
        pts = ec_enumerate(curve)
        assert len(pts) == 12 and set(pts) == F7_POINTS
        for P in pts:
            for Q in pts:
                PQ = ec_add(P, Q, curve)
                for T in pts:
                    assert ec_add(PQ, T, curve) == ec_add(P, ec_add(Q, T, curve), curve)
        assert all(ec_scalar_mul(12, P, curve) == INFINITY for P in pts)
        c.note(f"{len(PELL_ROWS)} Pell rows, 64 products, 1728 triples")
