"""Command-line experiment runner.

Subcommands: lemmas, construct, bounds, simulate, blowup. Tables go to
stdout (or --out) as CSV or JSON; diagnostics go to stderr. The exit status
is nonzero when an embedded check fails or an argument is rejected.
"""

from __future__ import annotations

import argparse
import math
import sys
from fractions import Fraction
from math import comb
from typing import Optional, Sequence

from . import walkmodel as wm
from .graph import Graph, complete_graph, random_graph, unique_pm_bipartite
from .markov import RATIONAL_CAP, simulate_search
from .matching import (
    count_pm_complete,
    enumerate_perfect_matchings,
    maximum_matching_bipartite,
    pm_count_upper_bound,
)
from .report import dumps_json, rows_to_csv
from .rng import SplitMix64, stream_seed

LEMMA_MAX_N = 6
BLOWUP_MAX_N = 50
BOUND_CHECK_GRAPHS_PER_N = 40


class UsageError(ValueError):
    pass


def _emit(rows, fmt: str, out: Optional[str], single: bool = False, columns=None):
    if fmt == "json":
        text = dumps_json(rows[0] if single else rows) + "\n"
    else:
        text = rows_to_csv(rows, columns)
    _write(text, out)


def _write(text: str, out: Optional[str]):
    if out is None:
        sys.stdout.write(text)
        return
    try:
        with open(out, "w", newline="") as fh:
            fh.write(text)
    except OSError as exc:
        raise OSError(f"cannot write {out}: {exc.strerror or exc}") from exc


def _log_fraction(v: Fraction) -> float:
    return math.log(v.numerator) - math.log(v.denominator)


def _sqrt_fraction(v: Fraction) -> float:
    if v == 0:
        return 0.0
    lg = 0.5 * _log_fraction(v)
    return math.exp(lg) if lg < 709.0 else math.inf


# lemmas


def bound_check_graphs(n: int, seed: int, count: int = BOUND_CHECK_GRAPHS_PER_N) -> list[Graph]:
    """Seeded random graphs on 2n vertices with n <= m <= C(2n, 2) edges."""
    top = comb(2 * n, 2)
    graphs = []
    for k in range(count):
        gen = SplitMix64(stream_seed(seed, 1000 * n + k))
        m = n + gen.next_u64() % (top - n + 1)
        graphs.append(random_graph(2 * n, m, gen.next_u64()))
    return graphs


def lemma_rows(max_n: int, seed: int = 0) -> list[dict]:
    if not 1 <= max_n <= LEMMA_MAX_N:
        raise UsageError(f"--max-n must be in [1, {LEMMA_MAX_N}] for enumeration, got {max_n}")
    rows = []

    def add(n, check, expected, observed):
        rows.append({"n": n, "check": check, "expected": expected, "observed": observed,
                     "passed": expected == observed})

    for n in range(1, max_n + 1):
        add(n, "complete_count", count_pm_complete(n), len(enumerate_perfect_matchings(complete_graph(n))))
        violations = 0
        for g in bound_check_graphs(n, seed):
            if len(enumerate_perfect_matchings(g)) > pm_count_upper_bound(g.num_edges, n):
                violations += 1
        add(n, "count_bound_violations", 0, violations)
        g = unique_pm_bipartite(n)
        add(n, "unique_edges", n * (n + 1) // 2, g.num_edges)
        found = enumerate_perfect_matchings(g)
        add(n, "unique_pm_count", 1, len(found))
        diagonal = " ".join(f"{i}-{n + i}" for i in range(n))
        add(n, "unique_matching", diagonal, " ".join(found[0].to_json()) if found else "")
        add(n, "unique_augmenting", diagonal, " ".join(maximum_matching_bipartite(g).to_json()))
    return rows


def cmd_lemmas(args) -> int:
    rows = lemma_rows(args.max_n, args.seed)
    _emit(rows, args.format, args.out)
    failed = [r for r in rows if not r["passed"]]
    for r in failed:
        print(f"FAILED n={r['n']} {r['check']}: expected {r['expected']}, got {r['observed']}", file=sys.stderr)
    return 1 if failed else 0


# construct


def cmd_construct(args) -> int:
    _write(unique_pm_bipartite(args.n).to_edgelist(), args.out)
    return 0


# bounds


def _instance(args) -> wm.WalkInstance:
    return wm.johnson_instance(args.n, args.r, lazy=args.lazy, c=args.c, epsilon=args.epsilon,
                               rational_cap=args.rational_cap)


def bounds_row(args) -> dict:
    rep = wm.analyze(_instance(args), compute_exact_tau=True, exact_cap=args.exact_cap)
    row = {"r": args.r, "lazy": args.lazy, "c": float(args.c), "epsilon": float(args.epsilon)}
    row.update(rep.as_dict())
    return row


def cmd_bounds(args) -> int:
    _emit([bounds_row(args)], args.format, args.out, single=True)
    return 0


# simulate


def simulate_row(args) -> dict:
    inst = _instance(args)
    idx, _ = wm.pi_min(inst)
    y1 = wm.marked_set(inst, inst.perfect_matchings[idx])
    stats = simulate_search(inst.chain, y1, args.trials, args.seed, max_steps=args.max_steps,
                            backend=args.backend)
    tau = None
    if inst.num_states <= args.exact_cap:
        tau = wm.analyze(inst, exact_cap=args.exact_cap).exact_tau
    within = None
    if tau is not None and stats.timeouts == 0 and stats.trials > 1:
        within = abs(stats.mean - float(tau)) <= 3 * stats.stderr
    return {
        "n": args.n, "r": args.r, "lazy": args.lazy, "trials": stats.trials, "seed": args.seed,
        "target_index": idx, "mean": stats.mean, "std": stats.std, "stderr": stats.stderr,
        "min_steps": int(stats.steps.min()), "max_steps": int(stats.steps.max()),
        "timeouts": stats.timeouts, "exact_tau": tau, "within_3se": within,
    }


def cmd_simulate(args) -> int:
    if args.trials < 1:
        raise UsageError("--trials must be >= 1")
    row = simulate_row(args)
    _emit([row], args.format, args.out, single=True)
    if row["timeouts"]:
        print(f"{row['timeouts']} trials hit --max-steps without reaching the target", file=sys.stderr)
        return 1
    if row["within_3se"] is False:
        print("trial mean is more than 3 standard errors from the exact hitting time", file=sys.stderr)
        return 1
    return 0


# blowup


def subset_size(n: int, policy: str, c: float, epsilon: float) -> int:
    m = n * (2 * n - 1)
    if policy == "n":
        return n
    r = math.floor(wm.query_budget(n, c, epsilon) * (1 + 1e-12))
    return min(max(r, n), m)


BLOWUP_COLUMNS = ["n", "m", "r", "phi", "pi_min", "eq1", "sqrt_eq1", "eq1_loglog_slope",
                  "asymptotic_ratio", "exact_tau"]


def blowup_rows(max_n: int, policy: str = "n", c: float = 1.0, epsilon: float = 1.0,
                exact_cap: int = wm.EXACT_TAU_CAP_FLOAT) -> list[dict]:
    if not 2 <= max_n <= BLOWUP_MAX_N:
        raise UsageError(f"--max-n must be in [2, {BLOWUP_MAX_N}], got {max_n}")
    if policy not in ("n", "budget"):
        raise UsageError(f"unknown --r-policy {policy!r}")
    rows = []
    prev = None
    for n in range(2, max_n + 1):
        m = n * (2 * n - 1)
        r = subset_size(n, policy, c, epsilon)
        pmin = wm.johnson_pi_marked(n, r)
        eq1 = wm.eq1_lower_bound(pmin)
        slope = None
        if prev is not None and eq1 > 0 and prev[1] > 0:
            slope = (_log_fraction(eq1) - _log_fraction(prev[1])) / (math.log(n) - math.log(prev[0]))
        tau = None
        if comb(m, r) <= exact_cap:
            inst = wm.johnson_instance(n, r, lazy=(m - r < 2), c=c, epsilon=epsilon)
            tau = wm.analyze(inst, exact_cap=exact_cap).exact_tau
        rows.append({
            "n": n, "m": m, "r": r, "phi": count_pm_complete(n), "pi_min": pmin, "eq1": eq1,
            "sqrt_eq1": _sqrt_fraction(eq1), "eq1_loglog_slope": slope,
            "asymptotic_ratio": wm.asymptotic_ratio(n, c, epsilon), "exact_tau": tau,
        })
        prev = (n, eq1)
    return rows


def cmd_blowup(args) -> int:
    rows = blowup_rows(args.max_n, args.r_policy, args.c, args.epsilon, args.exact_cap)
    _emit(rows, args.format, args.out, columns=BLOWUP_COLUMNS)
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="qwmatch", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("--format", choices=("csv", "json"), default="csv", help="output format (default csv)")
        sp.add_argument("--out", default=None, metavar="PATH", help="write to PATH instead of stdout")

    def budget(sp):
        sp.add_argument("--c", type=float, default=1.0, help="budget constant c in c(2n)^(2-eps)")
        sp.add_argument("--epsilon", type=float, default=1.0, help="budget exponent gap eps")

    def instance(sp):
        sp.add_argument("--n", type=int, required=True, help="half the vertex count of K_2n")
        sp.add_argument("--r", type=int, required=True, help="edges per walk state (n <= r <= n(2n-1))")
        sp.add_argument("--lazy", action="store_true", help="hold with probability 1/2 at each step")
        sp.add_argument("--exact-cap", type=int, default=wm.EXACT_TAU_CAP_FLOAT,
                        help="largest state count for the exact hitting-time solve")
        sp.add_argument("--rational-cap", type=int, default=RATIONAL_CAP,
                        help="largest state count kept in exact rational arithmetic")
        budget(sp)

    sp = sub.add_parser("lemmas", help="check perfect-matching counts and the unique-matching family")
    sp.add_argument("--max-n", type=int, default=5, help="largest n checked (1..6)")
    sp.add_argument("--seed", type=int, default=0, help="seed for the random-graph checks")
    common(sp)
    sp.set_defaults(func=cmd_lemmas)

    sp = sub.add_parser("construct", help="write the unique-perfect-matching bipartite graph")
    sp.add_argument("--n", type=int, required=True, help="part size; the graph has 2n vertices")
    sp.add_argument("--out", default=None, metavar="PATH", help="write to PATH instead of stdout")
    sp.set_defaults(func=cmd_construct)

    sp = sub.add_parser("bounds", help="bound report for a Johnson walk instance")
    instance(sp)
    common(sp)
    sp.set_defaults(func=cmd_bounds)

    sp = sub.add_parser("simulate", help="Monte-Carlo random-walk search on a Johnson instance")
    instance(sp)
    sp.add_argument("--trials", type=int, default=10000, help="independent walks")
    sp.add_argument("--seed", type=int, default=0, help="master seed; trial i uses stream i")
    sp.add_argument("--max-steps", type=int, default=1_000_000, help="per-trial step cap")
    sp.add_argument("--backend", choices=("numba", "numpy"), default=None,
                    help="walk kernel (default: $QWMATCH_BACKEND or numba)")
    common(sp)
    sp.set_defaults(func=cmd_simulate)

    sp = sub.add_parser("blowup", help="growth of the hitting-time lower bound with n")
    sp.add_argument("--max-n", type=int, default=12, help="last row of the table (2..50)")
    sp.add_argument("--r-policy", choices=("n", "budget"), default="n",
                    help="r = n, or r = floor(c(2n)^(2-eps)) clamped to [n, m]")
    sp.add_argument("--exact-cap", type=int, default=wm.EXACT_TAU_CAP_FLOAT,
                    help="largest state count for the exact hitting-time column")
    budget(sp)
    common(sp)
    sp.set_defaults(func=cmd_blowup)
    return p


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except OSError as exc:
        print(f"qwmatch: {exc}", file=sys.stderr)
        return 1
    except (UsageError, ValueError) as exc:
        print(f"qwmatch {args.command}: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
