"""Property suites: run the algorithms on seeded instances and check every
per-iteration guarantee against brute-force optima.

Each ``check_*`` function returns a list of human-readable violation messages
(empty when everything holds).  The ``verify_*`` suites sweep seeds and
return :class:`Violation` records carrying the offending instance.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import card, tightcase, usm
from .distribution import MASS_TOL, expectation, prob_not_containing, total_mass
from .extreme_point import (
    SignedKnapsackItem,
    enumerate_vertices,
    knapsack_as_lp,
    knapsack_vertex_optimum,
    solve_basic_optimal,
    solve_signed_knapsack,
    DenseLP,
)
from .errors import InfeasibleError, SubmaxError
from .instances import dump_instance, random_coverage_instance, random_cut_instance, random_submodular_table
from .oracle import ValueOracle, as_mask, opt_from_table

LEMMA_TOL = 1e-7
TOL = 1e-9


@dataclass
class Violation:
    suite: str
    message: str
    instance: str | None = None


def _opt_mask(values: np.ndarray, k: int | None = None) -> int:
    return as_mask(opt_from_table(values, k)[0], values.shape[0].bit_length() - 1)


def usm_lemma_gaps(values: np.ndarray, history, opt: int) -> list[float]:
    """Per-iteration slack of the potential inequality for the double greedy.

    ``E_i[f(X) + f(Y)] - E_{i-1}[f(X) + f(Y)]`` minus twice the drop of
    ``E[f((OPT | X) & Y)]``; non-negative when the inequality holds.
    """
    pot = [expectation(d, lambda s: values[s.x] + values[s.y]) for d in history]
    opt_val = [expectation(d, lambda s: values[(opt | s.x) & s.y]) for d in history]
    return [(pot[i] - pot[i - 1]) - 2 * (opt_val[i - 1] - opt_val[i]) for i in range(1, len(history))]


def card_improvement_gaps(values: np.ndarray, history, opt: int, k: int) -> list[float]:
    """Per-round slack of ``E_i[f] - E_{i-1}[f] >= E_{i-1}[f(OPT | S) - f(S)] / k``."""
    ev = [expectation(d, lambda s: values[s]) for d in history]
    return [(ev[i] - ev[i - 1]) - expectation(history[i - 1], lambda s: values[opt | s] - values[s]) / k
            for i in range(1, len(history))]


def check_usm_run(oracle: ValueOracle, order=None, solver_mode: str = "knapsack") -> list[str]:
    n = oracle.n
    values = oracle.copy().values()
    opt = _opt_mask(values)
    run_oracle = oracle.copy()
    sol, val, stats = usm.run(run_oracle, order=order, solver_mode=solver_mode, keep_history=True)
    order = list(range(n)) if order is None else list(order)
    errs = []
    if val < 0.5 * values[opt] - TOL:
        errs.append(f"ratio: value {val!r} < OPT/2 = {values[opt] / 2!r}")
    if abs(val - values[as_mask(sol, n)]) > TOL:
        errs.append("reported value does not match f(solution)")
    growth = 1 if solver_mode == "knapsack" else 2
    for i, d in enumerate(stats.history):
        if abs(total_mass(d) - 1) > MASS_TOL or min(d.probs) <= 0:
            errs.append(f"iteration {i}: invalid distribution")
        if len(d) > growth * i + 1:
            errs.append(f"iteration {i}: support {len(d)} > {growth * i + 1}")
        done = sum(1 << u for u in order[:i])
        for s in d.states:
            if s.x & ~s.y or s.x & ~done or (~s.y & oracle.ground_mask) & ~done or (s.x ^ s.y) & done:
                errs.append(f"iteration {i}: state {s} breaks the processed-prefix invariant")
                break
    for i, rec in enumerate(stats.records, start=1):
        if np.any(rec.gains.a + rec.gains.b < -TOL):
            errs.append(f"iteration {i}: a + b < 0 (f not submodular?)")
        s1, s2 = usm.constraint_slacks(stats.history[i - 1], rec.gains, rec.z, rec.w)
        if min(s1, s2) < -TOL:
            errs.append(f"iteration {i}: split constraint violated by {-min(s1, s2):g}")
    for i, q in enumerate(stats.queries_per_iteration, start=1):
        if q > 4 * i - 2:
            errs.append(f"iteration {i}: {q} queries > 4i - 2 = {4 * i - 2}")
    if stats.query_count > 2 * n * n + 2 * n and n > 0:
        errs.append(f"total queries {stats.query_count} > 2n^2 + 2n")
    if stats.query_count != run_oracle.query_count:
        errs.append("query accounting mismatch")
    if any(s.x != s.y for s in stats.history[-1].states):
        errs.append("final states have X != Y")
    for i, gap in enumerate(usm_lemma_gaps(values, stats.history, opt), start=1):
        if gap < -LEMMA_TOL:
            errs.append(f"iteration {i}: potential lemma violated by {-gap:g}")
    return errs


def check_card_run(oracle: ValueOracle, k: int) -> list[str]:
    n = oracle.n
    values = oracle.copy().values()
    opt = _opt_mask(values, k)
    run_oracle = oracle.copy()
    sol, val, stats = card.run(run_oracle, k, keep_history=True)
    errs = []
    if k >= 1:
        ratio = (1 - 1 / k) ** (k - 1)
        if val < ratio * values[opt] - TOL:
            errs.append(f"ratio: value {val!r} < {ratio:.6f} * OPT = {ratio * values[opt]!r}")
    if len(sol) > k:
        errs.append(f"solution has {len(sol)} > k elements")
    for i, d in enumerate(stats.history):
        if abs(total_mass(d) - 1) > MASS_TOL or min(d.probs) <= 0:
            errs.append(f"round {i}: invalid distribution")
        if len(d) > k * i + 1:
            errs.append(f"round {i}: support {len(d)} > ki + 1")
        if any(bin(s).count("1") > i for s in d.states):
            errs.append(f"round {i}: a state has more than {i} elements")
        for u in range(n):
            if prob_not_containing(d, u) < (1 - 1 / k) ** i - LEMMA_TOL:
                errs.append(f"round {i}: Pr[{u} not in S] below (1 - 1/k)^i")
                break
        if k and i and expectation(d, lambda s: values[s]) < (i / k) * (1 - 1 / k) ** (i - 1) * values[opt] - LEMMA_TOL:
            errs.append(f"round {i}: expected value below the running bound")
    if len(stats.history[-1]) > k * k + 1:
        errs.append("final support exceeds k^2 + 1")
    for i, rec in enumerate(stats.records, start=1):
        if rec.solution is None:
            continue
        prev = stats.history[i - 1]
        if rec.solution.nonzero_count > rec.lp.n_rows:
            errs.append(f"round {i}: basic solution has too many nonzeros")
        if not rec.lp.is_feasible(rec.solution.x):
            errs.append(f"round {i}: transfer solution infeasible")
        fallback = card.fallback_assignment(prev, rec.candidates, k)
        if rec.lp.c @ rec.solution.x < rec.lp.c @ fallback - TOL:
            errs.append(f"round {i}: LP objective below the fallback assignment")
        if rec.queries > n * len(prev):
            errs.append(f"round {i}: {rec.queries} queries > n |D|")
    if k and stats.query_count > 4 * k * k * n:
        errs.append(f"total queries {stats.query_count} > 4k^2 n")
    if stats.query_count != run_oracle.query_count:
        errs.append("query accounting mismatch")
    for i, gap in enumerate(card_improvement_gaps(values, stats.history, opt, k), start=1):
        if gap < -LEMMA_TOL:
            errs.append(f"round {i}: improvement lemma violated by {-gap:g}")
    return errs


def suite_instance(seed: int, n: int) -> ValueOracle:
    """Instance family used by the suites: mostly random tables, some cuts and coverages."""
    kind = seed % 5
    if kind == 3 and n >= 2:
        return random_cut_instance(n, seed)
    if kind == 4 and n >= 1:
        return random_coverage_instance(n, seed)
    return random_submodular_table(n, seed)


def verify_usm(seeds: int = 100, n_max: int = 10) -> list[Violation]:
    out = []
    for seed in range(seeds):
        n = 2 + seed % max(1, n_max - 1)
        oracle = suite_instance(seed, n)
        for mode in usm.SOLVER_MODES:
            for msg in check_usm_run(oracle, solver_mode=mode):
                out.append(Violation("usm", f"[{mode}] {msg}", dump_instance(oracle)))
    return out


def verify_card(seeds: int = 100, n_max: int = 10) -> list[Violation]:
    out = []
    for seed in range(seeds):
        n = min(n_max, 4 + seed % max(1, n_max - 3))
        k = 1 + seed % min(4, n)
        oracle = suite_instance(seed, n)
        for msg in check_card_run(oracle, k):
            out.append(Violation("card", f"[k={k}] {msg}", dump_instance(oracle)))
    return out


def random_knapsack(rng: np.random.Generator, max_items: int = 8) -> tuple[list[SignedKnapsackItem], float]:
    m = int(rng.integers(0, max_items + 1))
    items = []
    for j in range(m):
        v = float(rng.normal()) if rng.uniform() > 0.1 else 0.0
        s = float(rng.normal()) if rng.uniform() > 0.1 else 0.0
        items.append(SignedKnapsackItem(v, s, j))
    return items, float(rng.normal())


def random_lp(rng: np.random.Generator, max_vars: int = 6, max_rows: int = 6) -> DenseLP:
    """Feasible, bounded small LP with integer data.

    A non-negative point ``x0`` is drawn first and right-hand sides are set so
    that it satisfies every row; the first inequality has positive
    coefficients, which bounds the region.  Duplicate equality rows are
    planted now and then to exercise degeneracy.
    """
    n = int(rng.integers(1, max_vars + 1))
    rows = int(rng.integers(1, max_rows + 1))
    x0 = rng.integers(0, 3, n) * (rng.uniform(size=n) < 0.6)
    n_eq = int(rng.integers(0, rows))
    n_ub = rows - n_eq
    A_ub = rng.integers(-4, 5, (n_ub, n)).astype(float)
    A_ub[0] = rng.integers(1, 4, n)
    b_ub = A_ub @ x0 + rng.integers(0, 3, n_ub) * (rng.uniform(size=n_ub) < 0.5)
    A_eq = rng.integers(-4, 5, (n_eq, n)).astype(float)
    if n_eq > 1 and rng.uniform() < 0.3:
        A_eq[1] = A_eq[0]
    return DenseLP(c=rng.integers(-5, 6, n).astype(float), A_ub=A_ub, b_ub=b_ub,
                   A_eq=A_eq, b_eq=A_eq @ x0)


def check_knapsack(items, B) -> list[str]:
    try:
        ref = knapsack_vertex_optimum(items, B)
    except InfeasibleError:
        try:
            solve_signed_knapsack(items, B)
        except InfeasibleError:
            return []
        return ["solver accepted an infeasible knapsack"]
    sol = solve_signed_knapsack(items, B)
    errs = []
    if abs(sol.objective - ref) > TOL:
        errs.append(f"density rule {sol.objective!r} != vertex optimum {ref!r}")
    if len(sol.fractional) > 1:
        errs.append(f"{len(sol.fractional)} fractional items")
    if sum(it.s * z for it, z in zip(items, sol.z)) > B + TOL:
        errs.append("budget exceeded")
    simplex = solve_basic_optimal(knapsack_as_lp(items, B))
    if abs(simplex.objective - ref) > TOL:
        errs.append(f"simplex {simplex.objective!r} != vertex optimum {ref!r}")
    return errs


def check_lp(lp: DenseLP) -> list[str]:
    a = solve_basic_optimal(lp)
    b = enumerate_vertices(lp)
    errs = []
    if abs(a.objective - b.objective) > TOL:
        errs.append(f"simplex {a.objective!r} != enumeration {b.objective!r}")
    if a.nonzero_count > lp.n_rows:
        errs.append(f"{a.nonzero_count} nonzeros > {lp.n_rows} rows")
    if not lp.is_feasible(a.x):
        errs.append("simplex point infeasible")
    return errs


def verify_lp(seeds: int = 1000) -> list[Violation]:
    rng = np.random.default_rng(seeds)
    out = []
    for _ in range(seeds):
        items, B = random_knapsack(rng)
        for msg in check_knapsack(items, B):
            out.append(Violation("lp", f"knapsack: {msg}",
                                 repr({"items": [(it.v, it.s) for it in items], "B": B})))
        lp = random_lp(rng)
        for msg in check_lp(lp):
            out.append(Violation("lp", f"dense LP: {msg}",
                                 repr({"c": lp.c.tolist(), "A_ub": lp.A_ub.tolist(), "b_ub": lp.b_ub.tolist(),
                                       "A_eq": lp.A_eq.tolist(), "b_eq": lp.b_eq.tolist()})))
    return out


def verify_tight(ks=(32, 64, 128), ell: float = tightcase.DEFAULT_ELL) -> list[Violation]:
    out = []
    for k in ks:
        try:
            run = tightcase.adversarial_run(k, ell)
        except SubmaxError as exc:
            out.append(Violation("tight", f"k={k}: {exc}"))
            continue
        bound = math.exp(-1) + ell / k
        if run.value > bound + TOL:
            out.append(Violation("tight", f"k={k}: final value {run.value!r} > 1/e + ell/k = {bound!r}"))
        f_o = tightcase.tight_f((1 << k) - 1, k, ell)
        if abs(f_o - 1.0) > TOL:
            out.append(Violation("tight", f"k={k}: f(O) = {f_o!r}"))
    return out


SUITES = {"usm": verify_usm, "card": verify_card, "lp": verify_lp, "tight": verify_tight}
