"""Command-line driver: one subcommand per algorithm, JSON reports on stdout.

Exit codes: 0 after a completed run, 1 on a domain, promise or resource
error, 2 on bad usage.  Reports are byte-identical for identical flags
unless ``--timing`` adds the wall-clock time.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
import time
from typing import Callable, List, Optional

import numpy as np

from . import __version__
from .abelian_hsp import (
    HiddenSubgroupOracle,
    HspInstance,
    PeriodicOracle,
    PseudoPeriodicOracle,
    ZpStarGroup,
    abelian_hsp_run,
    discrete_log_run,
    factor,
    fourier_distribution,
    period_find_pseudo,
    period_find_z,
    period_find_zn,
)
from .ecgroup import CurveSpec, ECGroup, ec_enumerate, ec_order, ec_scalar_mul, point_to_json
from .errors import QalgError
from .finitefield import FieldSpec, gauss_sum_classical, quadratic_char_index
from .grouprep import (
    AbelianGroup,
    DihedralGroup,
    FiniteGroup,
    HeisenbergGroup,
    distribution_json,
    irreps,
    make_subgroup,
    wfs_distribution,
)
from .hiddenshift import (
    circular_distance,
    gauss_phase_distribution,
    gauss_sum_estimate,
    legendre_attempt,
    legendre_oracle,
    legendre_success_probability,
    zpn_shift,
)
from .nonabelian_hsp import (
    dihedral_reflection_oracle,
    heisenberg_attempt,
    heisenberg_oracle,
    kuperberg_sieve,
    normal_hsp_run,
)
from .quantumsim import bit_reversal, circuit_unitary, qft_circuit, qft_dense
from .quantumsim import distribution_json as outcome_json


class Report:
    """Accumulates trials for one RunReport."""

    def __init__(self, args: argparse.Namespace, params: dict):
        self.args = args
        self.params = params
        self.successes = 0
        self.trials = 0
        self.transcript: List = []
        self.result: dict = {}
        self.distribution: Optional[list] = None
        self._start = time.perf_counter()

    def rng(self, i: int) -> np.random.Generator:
        return np.random.default_rng([self.args.seed, i])

    def out_of_time(self) -> bool:
        cap = self.args.max_seconds
        return cap is not None and time.perf_counter() - self._start > cap

    def run_trials(self, body: Callable[[np.random.Generator], tuple]) -> None:
        """body(rng) -> (success, transcript entry)."""
        for i in range(self.args.trials):
            if self.out_of_time():
                self.result["stopped_early"] = True
                break
            ok, entry = body(self.rng(i))
            self.trials += 1
            self.successes += int(bool(ok))
            self.transcript.append(entry)

    def to_json(self) -> dict:
        wall = time.perf_counter() - self._start if self.args.timing else None
        out = {
            "algorithm": self.args.command,
            "version": __version__,
            "parameters": self.params,
            "seed": self.args.seed,
            "trials": self.trials,
            "successes": self.successes,
            "wall_time": wall,
            "result": self.result,
        }
        if self.distribution is not None:
            out["distribution"] = self.distribution
        if self.args.transcript:
            out["transcript"] = self.transcript
        return out


def _ints(text: str) -> List[int]:
    return [int(t) for t in text.replace(" ", "").split(",") if t]


def parse_group(text: str) -> FiniteGroup:
    """D<n>, Heis<p>, or Z<n1>xZ<n2>... ; a bare list like 2,2,2 also means an Abelian group."""
    t = text.strip()
    if t.startswith("Heis"):
        return HeisenbergGroup(int(t[4:]))
    if t.startswith("D"):
        return DihedralGroup(int(t[1:]))
    if t.startswith("Z"):
        return AbelianGroup([int(part[1:]) for part in t.split("x")])
    return AbelianGroup(_ints(t))


def parse_elements(text: str) -> List[tuple]:
    """'1,0;0,1' -> [(1, 0), (0, 1)]."""
    return [tuple(_ints(chunk)) for chunk in text.split(";") if chunk.strip()]


def _first(rep: Report, key: str) -> dict:
    return {key: rep.transcript[0][key]} if rep.transcript else {}


# --- subcommands -------------------------------------------------------------------

def cmd_factor(args, rep: Report) -> None:
    def body(rng):
        f = factor(args.N, rng)
        return f.value() == args.N, f.to_json()

    rep.run_trials(body)
    if rep.transcript:
        first = rep.transcript[0]
        rep.result = {"factors": first, "product": math.prod(p**e for p, e in first)}


def cmd_period_zn(args, rep: Report) -> None:
    oracle = PeriodicOracle(args.r)

    def body(rng):
        res = period_find_zn(oracle, args.N, rng)
        return res.period == args.r, res.to_json()

    rep.run_trials(body)
    rep.result = _first(rep, "period")
    if args.distribution:
        probs = fourier_distribution(oracle, args.N)
        rep.distribution = outcome_json(range(args.N), probs, tol=1e-15)


def cmd_period_z(args, rep: Report) -> None:
    oracle = PeriodicOracle(args.r)

    def body(rng):
        res = period_find_z(oracle, args.bound, rng)
        return res.period == args.r, res.to_json()

    rep.run_trials(body)
    rep.result = _first(rep, "period")
    if args.distribution and args.bound:
        Q = 1 << (args.bound * args.bound).bit_length()
        rep.distribution = outcome_json(range(Q), fourier_distribution(oracle, Q), tol=1e-15)


def cmd_period_pseudo(args, rep: Report) -> None:
    oracle = PseudoPeriodicOracle(args.r)

    def body(rng):
        res = period_find_pseudo(oracle, args.bound, rng, N=args.N, max_samples=args.max_samples)
        return abs(res.period - args.r) <= 1, res.to_json()

    rep.run_trials(body)
    rep.result = _first(rep, "period")


def cmd_dlog(args, rep: Report) -> None:
    if args.ec:
        curve = CurveSpec(args.p, args.a, args.b)
        group = ECGroup(curve)
        g = (args.gx, args.gy)
        x = ec_scalar_mul(args.k, g, curve)
        rep.params["x"] = point_to_json(x)
    else:
        group = ZpStarGroup(args.p)
        g, x = args.g, args.x

    def body(rng):
        res = discrete_log_run(group, g, x, rng, order=args.order)
        return group.pow(g, res.log) == x, res.to_json()

    rep.run_trials(body)
    if rep.transcript:
        rep.result = {"log": rep.transcript[0]["log"], "order": rep.transcript[0]["order"]}


def cmd_hsp_abelian(args, rep: Report) -> None:
    G = parse_group(args.group)
    if not isinstance(G, AbelianGroup):
        return _usage_error("hsp-abelian needs an Abelian group")
    H = make_subgroup(G, parse_elements(args.hidden))
    inst = HspInstance.from_subgroup(G, H)

    def body(rng):
        run = abelian_hsp_run(inst, rng, samples=args.samples, verify=not args.no_verify)
        return run.subgroup.same_as(H), run.to_json()

    rep.run_trials(body)
    rep.result = {"hidden": H.to_json()}


def cmd_hsp_normal(args, rep: Report) -> None:
    G = parse_group(args.group)
    H = make_subgroup(G, parse_elements(args.hidden))
    oracle = HiddenSubgroupOracle(G, H)

    def body(rng):
        run = normal_hsp_run(G, oracle, rng, samples=args.samples)
        return run.subgroup.same_as(H), run.to_json()

    rep.run_trials(body)
    rep.result = {"hidden": H.to_json()}
    if args.distribution:
        rep.distribution = distribution_json(G, wfs_distribution(G, H))


def cmd_dihedral_sieve(args, rep: Report) -> None:
    def body(rng):
        y = args.y if args.y is not None else int(rng.integers(2**args.n))
        if args.oracle_mode:
            res = kuperberg_sieve(args.n, rng, oracle=dihedral_reflection_oracle(args.n, y),
                                  pool_constant=args.pool_constant)
        else:
            res = kuperberg_sieve(args.n, rng, y=y, pool_constant=args.pool_constant)
        entry = res.to_json()
        entry["hidden"] = y
        return res.y == y, entry

    rep.run_trials(body)
    rep.result = _first(rep, "y")


def cmd_heisenberg(args, rep: Report) -> None:
    _, oracle = heisenberg_oracle(args.p, args.a, args.b)
    probs = []

    def body(rng):
        at = heisenberg_attempt(args.p, oracle, rng)
        probs.append(at.success_probability)
        return at.result == (args.a % args.p, args.b % args.p), at.to_json()

    rep.run_trials(body)
    if probs:
        rep.result = {"mean_exact_success_probability": float(np.mean(probs))}


def cmd_legendre(args, rep: Report) -> None:
    spec = FieldSpec(args.p, args.r)
    oracle = legendre_oracle(spec, args.s)

    def body(rng):
        at = legendre_attempt(spec, oracle, rng)
        return at.result == args.s, at.to_json()

    rep.run_trials(body)
    rep.result = {"exact_success_probability": legendre_success_probability(spec.q)}


def cmd_gauss_sum(args, rep: Report) -> None:
    spec = FieldSpec(args.p, args.r)
    a = args.a if args.a is not None else quadratic_char_index(spec)
    G = gauss_sum_classical(a, spec.elem(args.b), spec)
    phi = math.atan2(G.imag, G.real) % (2 * math.pi)

    def body(rng):
        est = gauss_sum_estimate(spec, a, args.b, args.delta, rng)
        return circular_distance(est, phi) <= args.delta, {"estimate": est}

    rep.run_trials(body)
    rep.result = {"classical": {"re": G.real, "im": G.imag, "abs": abs(G), "phase": phi}}
    if args.distribution:
        probs = gauss_phase_distribution(spec, a, args.b, args.delta)
        rep.distribution = outcome_json(range(len(probs)), probs, tol=1e-15)


def cmd_zpn_shift(args, rep: Report) -> None:
    s = tuple(v % args.p for v in _ints(args.s))
    n = len(s)

    def body(rng):
        res = zpn_shift(args.p, n, s, rng)
        return s in res.candidates, res.to_json()

    rep.run_trials(body)
    rep.result = _first(rep, "candidates")


def cmd_qft_check(args, rep: Report) -> None:
    n = args.n
    gates = qft_circuit(n, args.cutoff)
    U = bit_reversal(n) @ circuit_unitary(gates, n)
    err = float(np.linalg.norm(U - qft_dense(2**n), 2))
    rep.trials, rep.successes = 1, int(err <= args.tol)
    rep.result = {"operator_norm_error": err, "gates": len(gates), "tolerance": args.tol}


def cmd_ec(args, rep: Report) -> None:
    curve = CurveSpec(args.p, args.a, args.b)
    out: dict = {"curve": curve.to_json()}
    if args.enumerate or args.orders:
        pts = ec_enumerate(curve)
        out["count"] = len(pts)
        out["hasse_ok"] = abs(len(pts) - (args.p + 1)) <= 2 * math.sqrt(args.p)
        out["points"] = [point_to_json(P) for P in pts]
        if args.orders:
            out["orders"] = [ec_order(P, curve) for P in pts]
    rep.trials, rep.successes = 1, 1
    rep.result = out


def cmd_irreps(args, rep: Report) -> None:
    G = parse_group(args.group)
    reps = irreps(G)
    rep.result = {
        "group": G.describe(),
        "order": G.order,
        "irreps": [{"label": r.label_str, "dim": r.dim} for r in reps],
        "sum_of_squares": sum(r.dim**2 for r in reps),
    }
    rep.trials, rep.successes = 1, int(rep.result["sum_of_squares"] == G.order)
    if args.hidden:
        H = make_subgroup(G, parse_elements(args.hidden))
        rep.distribution = distribution_json(G, wfs_distribution(G, H))


COMMANDS = {
    "factor": cmd_factor,
    "period-zn": cmd_period_zn,
    "period-z": cmd_period_z,
    "period-pseudo": cmd_period_pseudo,
    "dlog": cmd_dlog,
    "hsp-abelian": cmd_hsp_abelian,
    "hsp-normal": cmd_hsp_normal,
    "dihedral-sieve": cmd_dihedral_sieve,
    "heisenberg": cmd_heisenberg,
    "legendre-shift": cmd_legendre,
    "gauss-sum": cmd_gauss_sum,
    "zpn-shift": cmd_zpn_shift,
    "qft-check": cmd_qft_check,
    "ec": cmd_ec,
    "irreps": cmd_irreps,
}


def _usage_error(msg: str) -> int:
    print(f"usage error: {msg}", file=sys.stderr)
    return 2


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--trials", type=int, default=1)
    fmt = common.add_mutually_exclusive_group()
    fmt.add_argument("--json", action="store_true", help="compact JSON (default)")
    fmt.add_argument("--pretty", action="store_true", help="indented JSON")
    common.add_argument("--max-seconds", type=float, default=None, help="stop starting new trials after this long")
    common.add_argument("--timing", action="store_true", help="report wall time (breaks byte-identical output)")
    common.add_argument("--transcript", action="store_true", help="include per-trial transcripts")

    parser = argparse.ArgumentParser(prog="qalgsim", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("factor", parents=[common], help="factor an integer")
    p.add_argument("N", type=int)

    p = sub.add_parser("period-zn", parents=[common], help="period finding over Z_N")
    p.add_argument("--N", type=int, required=True)
    p.add_argument("--r", type=int, required=True)
    p.add_argument("--distribution", action="store_true")

    p = sub.add_parser("period-z", parents=[common], help="period finding over the integers")
    p.add_argument("--r", type=int, required=True)
    p.add_argument("--bound", type=int, default=None, help="period bound; omit to double Q from 2")
    p.add_argument("--distribution", action="store_true")

    p = sub.add_parser("period-pseudo", parents=[common], help="real period of a pseudoperiodic oracle")
    p.add_argument("--r", type=float, required=True)
    p.add_argument("--bound", type=float, required=True)
    p.add_argument("--N", type=int, default=None)
    p.add_argument("--max-samples", type=int, default=64)

    p = sub.add_parser("dlog", parents=[common], help="discrete logarithm in Z_p^* or on a curve")
    p.add_argument("--p", type=int, required=True)
    p.add_argument("--g", type=int, default=None)
    p.add_argument("--x", type=int, default=None)
    p.add_argument("--ec", action="store_true", help="use the curve y^2 = x^3 + a x + b")
    p.add_argument("--a", type=int, default=0)
    p.add_argument("--b", type=int, default=0)
    p.add_argument("--gx", type=int, default=None)
    p.add_argument("--gy", type=int, default=None)
    p.add_argument("--k", type=int, default=None, help="curve mode: x = k g")
    p.add_argument("--order", type=int, default=None, help="group order if known")

    p = sub.add_parser("hsp-abelian", parents=[common], help="Abelian hidden subgroup")
    p.add_argument("--group", required=True, help="e.g. Z2xZ2xZ2 or 2,2,2")
    p.add_argument("--hidden", required=True, help="generators, e.g. '1,0,1;0,1,1'")
    p.add_argument("--samples", type=int, default=None)
    p.add_argument("--no-verify", action="store_true")

    p = sub.add_parser("hsp-normal", parents=[common], help="normal hidden subgroup by weak Fourier sampling")
    p.add_argument("--group", required=True, help="D<n>, Heis<p> or Z<n>x...")
    p.add_argument("--hidden", required=True)
    p.add_argument("--samples", type=int, default=None)
    p.add_argument("--distribution", action="store_true")

    p = sub.add_parser("dihedral-sieve", parents=[common], help="Kuperberg sieve on D_{2^n}")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--y", type=int, default=None, help="hidden reflection; random per trial if omitted")
    p.add_argument("--pool-constant", type=int, default=8)
    p.add_argument("--oracle-mode", action="store_true", help="draw explicit qubits from an oracle")

    p = sub.add_parser("heisenberg", parents=[common], help="two-copy Heisenberg HSP attempts")
    p.add_argument("--p", type=int, required=True)
    p.add_argument("--a", type=int, required=True)
    p.add_argument("--b", type=int, required=True)

    p = sub.add_parser("legendre-shift", parents=[common], help="shifted Legendre symbol attempts")
    p.add_argument("--p", type=int, required=True)
    p.add_argument("--r", type=int, default=1, help="extension degree (field F_{p^r})")
    p.add_argument("--s", type=int, required=True, help="shift as a field index")

    p = sub.add_parser("gauss-sum", parents=[common], help="Gauss sum phase estimation")
    p.add_argument("--p", type=int, required=True)
    p.add_argument("--r", type=int, default=1)
    p.add_argument("--a", type=int, default=None, help="multiplicative character; default quadratic")
    p.add_argument("--b", type=int, default=1, help="additive character as a field index")
    p.add_argument("--delta", type=float, default=0.1)
    p.add_argument("--distribution", action="store_true")

    p = sub.add_parser("zpn-shift", parents=[common], help="hidden shift in (Z_p)^n")
    p.add_argument("--p", type=int, required=True)
    p.add_argument("--s", required=True, help="shift, e.g. 1,0,2")

    p = sub.add_parser("qft-check", parents=[common], help="QFT circuit against the dense transform")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--cutoff", type=int, default=None)
    p.add_argument("--tol", type=float, default=0.1)

    p = sub.add_parser("ec", parents=[common], help="elliptic curve points")
    p.add_argument("--p", type=int, required=True)
    p.add_argument("--a", type=int, required=True)
    p.add_argument("--b", type=int, required=True)
    p.add_argument("--enumerate", action="store_true")
    p.add_argument("--orders", action="store_true")

    p = sub.add_parser("irreps", parents=[common], help="irreps of a group")
    p.add_argument("--group", required=True)
    p.add_argument("--hidden", default=None, help="also dump weak Fourier sampling probabilities")
    return parser


def _check_dlog_args(args) -> Optional[str]:
    if args.ec:
        if None in (args.gx, args.gy, args.k):
            return "--ec needs --gx, --gy and --k"
    elif None in (args.g, args.x):
        return "dlog needs --g and --x (or --ec ...)"
    return None


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)
    if args.command == "dlog":
        msg = _check_dlog_args(args)
        if msg:
            parser.print_usage(sys.stderr)
            return _usage_error(msg)
    if args.trials < 1:
        return _usage_error("--trials must be positive")
    skip = {"command", "seed", "trials", "json", "pretty", "max_seconds", "timing", "transcript"}
    params = {k: v for k, v in sorted(vars(args).items()) if k not in skip}
    rep = Report(args, params)
    try:
        code = COMMANDS[args.command](args, rep)
    except QalgError as e:
        print(json.dumps({"algorithm": args.command, "error": type(e).__name__, "message": str(e)}),
              file=sys.stderr)
        return 1
    if isinstance(code, int):
        return code
    indent = 2 if args.pretty else None
    print(json.dumps(rep.to_json(), indent=indent, sort_keys=False))
    return 0


def main_entry() -> None:
    sys.exit(main())


if __name__ == "__main__":
    main_entry()
