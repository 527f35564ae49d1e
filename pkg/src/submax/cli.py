"""``submax`` command line.

Subcommands: ``usm``, ``card``, ``verify``, ``bench``, ``tight``.  Exit codes:
0 success, 1 some bench rows failed, 2 bad input, 3 a guarantee was violated.
"""
from __future__ import annotations

import argparse
import csv
import glob
import io
import math
import os
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path

from . import baselines, card, tightcase, usm, verify
from .errors import InvalidInputError, SubmaxError
from .instances import dump_instance, load_instance
from .oracle import MAX_BRUTE_N, MAX_CHECK_N, ValueOracle, brute_force_opt, opt_from_table

EXIT_OK, EXIT_PARTIAL, EXIT_INPUT, EXIT_VERIFY = 0, 1, 2, 3

HEADER = ["instance", "algo", "k", "seed", "value", "opt", "ratio", "queries", "max_support", "ms"]
ALGOS = ("usm", "usm-generic", "double-greedy", "card", "random-greedy")
_CARDINALITY_ALGOS = ("card", "random-greedy")
_RANDOMIZED_ALGOS = ("double-greedy", "random-greedy")


@dataclass
class RunReport:
    instance: str
    algo: str
    value: float | None
    query_count: int | None
    max_support: int | None = None
    k: int | None = None
    seed: int | None = None
    opt: float | None = None
    wall_time_ms: float | None = None
    error: str | None = None

    @property
    def ratio(self) -> float | None:
        if self.opt is None or self.value is None:
            return None
        return self.value / self.opt if self.opt != 0 else 1.0

    def row(self) -> list[str]:
        def fmt(v):
            return "" if v is None else repr(v) if isinstance(v, float) else str(v)

        value = "FAILED" if self.error else fmt(self.value)
        ms = "" if self.wall_time_ms is None else f"{self.wall_time_ms:.3f}"
        return [self.instance, self.algo, fmt(self.k), fmt(self.seed), value, fmt(self.opt),
                fmt(self.ratio), fmt(self.query_count), fmt(self.max_support), ms]


def write_csv(rows: list[RunReport], path: str | None) -> None:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(HEADER)
    for r in rows:
        w.writerow(r.row())
    if path:
        Path(path).write_text(buf.getvalue())
    else:
        sys.stdout.write(buf.getvalue())


def optimum(oracle: ValueOracle, k: int | None = None) -> float | None:
    if oracle.n > MAX_BRUTE_N:
        return None
    return float(brute_force_opt(oracle.copy(), cardinality_bound=k)[1])


def run_algo(oracle: ValueOracle, algo: str, k: int | None = None, seed: int | None = None,
             order=None) -> RunReport:
    """Run one algorithm on a private copy of ``oracle`` (fresh query counter)."""
    own = oracle.copy()
    ident = oracle.spec.get("id", oracle.name) if oracle.spec else oracle.name
    t0 = time.perf_counter()
    support = None
    if algo == "usm" or algo == "usm-generic":
        _, value, stats = usm.run(own, order=order, solver_mode="generic" if algo == "usm-generic" else "knapsack")
        support = stats.max_support
    elif algo == "card":
        _, value, stats = card.run(own, k)
        support = stats.max_support
    elif algo == "double-greedy":
        _, value = baselines.randomized_double_greedy(own, seed)
    elif algo == "random-greedy":
        _, value = baselines.random_greedy_cardinality(own, k, seed)
    else:
        raise InvalidInputError(f"unknown algorithm {algo!r}; choose from {', '.join(ALGOS)}")
    ms = (time.perf_counter() - t0) * 1000
    return RunReport(instance=ident, algo=algo, value=float(value), query_count=own.query_count,
                     max_support=support, k=k, seed=seed, wall_time_ms=ms)


def _parse_int_list(text: str) -> list[int]:
    try:
        return [int(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def _parse_range(text: str) -> list[int]:
    """``"5"`` -> [5], ``"0:10"`` -> 0..9, ``"1,4,7"`` -> [1, 4, 7]."""
    if ":" in text:
        try:
            lo, hi = (int(t) for t in text.split(":"))
        except ValueError:
            raise argparse.ArgumentTypeError(f"bad seed range {text!r}") from None
        return list(range(lo, hi))
    return _parse_int_list(text)


def _finish_report(rep: RunReport, opt: float | None, timing: bool) -> RunReport:
    rep.opt = opt
    if not timing:
        rep.wall_time_ms = None
    return rep


def _print_violations(violations: list[verify.Violation]) -> None:
    shown = set()
    for v in violations:
        print(f"VIOLATION [{v.suite}] {v.message}", file=sys.stderr)
        if v.instance and v.instance not in shown:
            shown.add(v.instance)
            print(v.instance)


def cmd_usm(args) -> int:
    oracle = load_instance(args.instance)
    order = args.order
    if order is not None and sorted(order) != list(range(oracle.n)):
        raise InvalidInputError(f"--order must be a permutation of 0..{oracle.n - 1}")
    algo = "usm" if args.solver == "knapsack" else "usm-generic"
    rep = run_algo(oracle, algo, order=order)
    write_csv([_finish_report(rep, optimum(oracle), args.timing)], args.report)
    if args.verify:
        errs = verify.check_usm_run(oracle, order=order, solver_mode=args.solver)
        if errs:
            _print_violations([verify.Violation("usm", e, dump_instance(oracle)) for e in errs])
            return EXIT_VERIFY
    return EXIT_OK


def cmd_card(args) -> int:
    oracle = load_instance(args.instance)
    if not 0 <= args.k <= oracle.n:
        raise InvalidInputError(f"--k must lie in [0, {oracle.n}]")
    rep = run_algo(oracle, "card", k=args.k)
    write_csv([_finish_report(rep, optimum(oracle, args.k), args.timing)], args.report)
    if args.verify:
        errs = verify.check_card_run(oracle, args.k)
        if errs:
            _print_violations([verify.Violation("card", e, dump_instance(oracle)) for e in errs])
            return EXIT_VERIFY
    return EXIT_OK


def cmd_verify(args) -> int:
    if args.suite == "tight":
        violations = verify.verify_tight(tuple(args.k) if args.k else (32, 64, 128))
    elif args.suite == "lp":
        violations = verify.verify_lp(args.seeds)
    else:
        if args.n_max < 4 or args.n_max > MAX_CHECK_N:
            raise InvalidInputError(f"--n-max must lie in [4, {MAX_CHECK_N}]")
        violations = verify.SUITES[args.suite](args.seeds, args.n_max)
    if violations:
        _print_violations(violations)
        print(f"{args.suite}: {len(violations)} violation(s)", file=sys.stderr)
        return EXIT_VERIFY
    print(f"{args.suite}: ok")
    return EXIT_OK


def _bench_jobs(args, oracles):
    for path, oracle in oracles:
        for algo in args.algos:
            ks = args.k if algo in _CARDINALITY_ALGOS else [None]
            seeds = args.seeds if algo in _RANDOMIZED_ALGOS else [None]
            for k in ks:
                for seed in seeds:
                    yield path, oracle, algo, k, seed


def cmd_bench(args) -> int:
    for algo in args.algos:
        if algo not in ALGOS:
            raise InvalidInputError(f"unknown algorithm {algo!r}; choose from {', '.join(ALGOS)}")
    paths = sorted(glob.glob(args.instances))
    oracles = []
    failed_loads = []
    for p in paths:
        try:
            oracles.append((p, load_instance(p)))
        except InvalidInputError as exc:
            failed_loads.append(RunReport(instance=Path(p).stem, algo="load", value=None,
                                          query_count=None, error=str(exc)))
    jobs = list(_bench_jobs(args, oracles))

    # one exhaustive table per instance serves every k
    wanted: dict[str, set] = {}
    for path, oracle, algo, k, seed in jobs:
        if k is None or 0 <= k <= oracle.n:
            wanted.setdefault(path, set()).add(k)
    opt_cache: dict[tuple[str, int | None], float | None] = {}
    for path, oracle in oracles:
        if path not in wanted:
            continue
        table = oracle.copy().values() if oracle.n <= MAX_BRUTE_N else None
        for k in wanted[path]:
            opt_cache[(path, k)] = None if table is None else opt_from_table(table, k)[1]

    def job(spec) -> RunReport:
        path, oracle, algo, k, seed = spec
        try:
            if k is not None and not 0 <= k <= oracle.n:
                raise InvalidInputError(f"k={k} exceeds n={oracle.n}")
            rep = run_algo(oracle, algo, k=k, seed=seed)
        except (SubmaxError, ValueError, RuntimeError) as exc:
            ident = oracle.spec.get("id", Path(path).stem)
            return RunReport(instance=ident, algo=algo, value=None, query_count=None, k=k, seed=seed,
                             error=str(exc))
        return _finish_report(rep, opt_cache[(path, k)], args.timing)

    threads = max(1, int(os.environ.get("SUBMAX_THREADS", "1") or 1))
    if threads == 1:
        rows = [job(j) for j in jobs]
    else:
        # map() yields in submission order, so the CSV does not depend on scheduling
        with ThreadPoolExecutor(max_workers=threads) as pool:
            rows = list(pool.map(job, jobs))
    rows = failed_loads + rows
    write_csv(rows, args.out)
    failures = [r for r in rows if r.error]
    for r in failures:
        print(f"row failed: {r.instance} {r.algo}: {r.error}", file=sys.stderr)
    return EXIT_PARTIAL if failures else EXIT_OK


def cmd_tight(args) -> int:
    try:
        run = tightcase.adversarial_run(args.k, args.ell)
    except tightcase.AdversarialTraceError as exc:
        print(f"trace deviated: {exc}", file=sys.stderr)
        return EXIT_VERIFY
    bound = math.exp(-1) + args.ell / args.k
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["i", "z", "case", "support", "expected_value", "best_value", "ratio", "min_gap", "max_tuple_error"])
    for t in run.trace:
        # f(O) = 1, so the ratio equals the best value in the support
        w.writerow([t.i, repr(t.z), t.case, t.support, repr(t.expected_value), repr(t.max_value),
                    repr(t.max_value), repr(t.min_gap), repr(t.max_tuple_error)])
    w.writerow(["final", "", "", len(run.distribution), "", repr(run.value), repr(run.value), "", ""])
    if args.out:
        Path(args.out).write_text(buf.getvalue())
    else:
        sys.stdout.write(buf.getvalue())
    print(f"final ratio {run.value:.6f} (bound 1/e + ell/k = {bound:.6f})", file=sys.stderr)
    return EXIT_OK if run.value <= bound + 1e-9 else EXIT_VERIFY


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="submax", description="Deterministic submodular maximization.")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("usm", help="unconstrained maximization (deterministic double greedy)")
    p.add_argument("instance")
    p.add_argument("--order", type=_parse_int_list, help="processing order, e.g. 2,0,1")
    p.add_argument("--solver", choices=usm.SOLVER_MODES, default="knapsack")
    p.add_argument("--report", help="CSV output path (default: stdout)")
    p.add_argument("--verify", action="store_true", help="check every per-iteration guarantee")
    p.add_argument("--timing", action="store_true", help="fill the ms column")
    p.set_defaults(func=cmd_usm)

    p = sub.add_parser("card", help="cardinality-constrained maximization")
    p.add_argument("instance")
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--report")
    p.add_argument("--verify", action="store_true")
    p.add_argument("--timing", action="store_true")
    p.set_defaults(func=cmd_card)

    p = sub.add_parser("verify", help="run a property suite on seeded instances")
    p.add_argument("--suite", choices=sorted(verify.SUITES), required=True)
    p.add_argument("--seeds", type=int, default=100)
    p.add_argument("--n-max", type=int, default=10)
    p.add_argument("--k", type=_parse_int_list, help="tight suite only: values of k")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("bench", help="sweep algorithms x instances x seeds into a CSV")
    p.add_argument("--algos", type=lambda s: [a.strip() for a in s.split(",") if a.strip()],
                   default=["usm", "double-greedy"])
    p.add_argument("--instances", required=True, help="glob of instance JSON files")
    p.add_argument("--seeds", type=_parse_range, default=[0])
    p.add_argument("--k", type=_parse_int_list, default=[2])
    p.add_argument("--out")
    p.add_argument("--timing", action="store_true")
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("tight", help="adversarial trace on the hard instance")
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--ell", type=float, default=tightcase.DEFAULT_ELL)
    p.add_argument("--out")
    p.set_defaults(func=cmd_tight)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return EXIT_INPUT if exc.code else EXIT_OK
    try:
        return args.func(args)
    except InvalidInputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
