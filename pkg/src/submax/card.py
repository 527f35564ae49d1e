"""Deterministic random greedy for ``max f(S)`` subject to ``|S| <= k``.

The random greedy picks, in each of ``k`` rounds, a uniformly random element
among the (up to) ``k`` elements of largest marginal gain.  This module keeps
the distribution over the current set explicitly.  Each round every state
``S`` sends a fraction ``x(u, S)`` of its probability to ``S + u`` for
candidates ``u`` in ``M`` and keeps a fraction ``l(S)``; the fractions form an
optimal extreme point of

    max  sum_u E[x(u, S) f(u | S)]
    s.t. E[x(u, S)] <= Pr[u not in S] / k      for every u in M
         sum_u x(u, S) + l(S) = 1               for every state S
         x, l >= 0

so the support grows by at most ``k`` states per round.  The best final set
is a ``(1 - 1/k)^(k-1) >= 1/e`` approximation for non-negative submodular f.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .distribution import PROB_FLOOR, WeightedDistribution, expectation, prob_not_containing, unify
from .errors import InfeasibleError, InvalidInputError, UnboundedError
from .extreme_point import BasicSolution, DenseLP, solve_basic_optimal
from .oracle import ValueOracle, as_mask, from_mask
from .usm import ValueCache


@dataclass
class CandidateSet:
    """Chosen candidates with their expected marginals.

    ``state_marginals[j, t]`` is ``f(M[t] | S_j)`` for the ``j``-th state of the
    distribution the candidates were chosen against.
    """

    elements: tuple[int, ...]
    expected: tuple[float, ...]
    state_marginals: np.ndarray

    @property
    def mask(self) -> int:
        return sum(1 << u for u in self.elements)


@dataclass
class RoundRecord:
    candidates: CandidateSet
    solution: BasicSolution | None
    lp: DenseLP | None
    queries: int


@dataclass
class RunStats:
    query_count: int = 0
    max_support: int = 1
    support_sizes: list[int] = field(default_factory=list)
    queries_per_iteration: list[int] = field(default_factory=list)
    expected_values: list[float] = field(default_factory=list)
    records: list[RoundRecord] = field(default_factory=list)
    history: list[WeightedDistribution] | None = None


def top_candidates(expected: np.ndarray, k: int) -> list[int]:
    """Indices of the up-to-``k`` largest strictly positive entries, ties by index."""
    order = sorted((i for i in range(len(expected)) if expected[i] > 0),
                   key=lambda i: (-expected[i], i))
    return order[:k]


def expected_marginals(dist: WeightedDistribution, oracle: ValueOracle,
                       cache: ValueCache | None = None) -> tuple[np.ndarray, np.ndarray]:
    """Per-state marginals (states x elements) and their expectation.

    ``f(u | S)`` is 0 without a query when ``u`` is already in ``S``.
    """
    f = cache or ValueCache(oracle)
    n = oracle.n
    marg = np.zeros((len(dist), n))
    for j, s in enumerate(dist.states):
        base = f(s)
        for u in range(n):
            if not s >> u & 1:
                marg[j, u] = f(s | 1 << u) - base
    return marg, np.asarray(dist.probs) @ marg


def select_M(dist: WeightedDistribution, oracle: ValueOracle, k: int,
             cache: ValueCache | None = None) -> CandidateSet:
    marg, expected = expected_marginals(dist, oracle, cache)
    chosen = top_candidates(expected, k)
    return CandidateSet(tuple(chosen), tuple(float(expected[u]) for u in chosen), marg[:, chosen])


def build_lp(dist: WeightedDistribution, M: CandidateSet, k: int) -> DenseLP:
    """Transfer LP over ``[x(M[0], S_0) .. x(M[-1], S_0), x(M[0], S_1), .., l(S_0), .., l(S_{m-1})]``.

    Variables for ``u`` already in ``S`` are kept (their marginal is 0).
    """
    p = np.asarray(dist.probs)
    m, c = len(dist), len(M.elements)
    nx = m * c
    obj = np.concatenate([(p[:, None] * M.state_marginals).reshape(-1), np.zeros(m)])
    A_ub = np.zeros((c, nx + m))
    b_ub = np.zeros(c)
    for t, u in enumerate(M.elements):
        A_ub[t, t:nx:c] = p
        b_ub[t] = prob_not_containing(dist, u) / k
    A_eq = np.zeros((m, nx + m))
    for j in range(m):
        A_eq[j, j * c:(j + 1) * c] = 1.0
        A_eq[j, nx + j] = 1.0
    return DenseLP(c=obj, A_ub=A_ub, b_ub=b_ub, A_eq=A_eq, b_eq=np.ones(m))


def fallback_assignment(dist: WeightedDistribution, M: CandidateSet, k: int) -> np.ndarray:
    """``x(u, S) = 1[u not in S] / k`` and ``l(S) = 1 - |M \\ S| / k``, always feasible."""
    m, c = len(dist), len(M.elements)
    x = np.zeros(m * c + m)
    for j, s in enumerate(dist.states):
        outside = [t for t, u in enumerate(M.elements) if not s >> u & 1]
        for t in outside:
            x[j * c + t] = 1.0 / k
        x[m * c + j] = 1.0 - len(outside) / k
    return x


def apply_transfer(dist: WeightedDistribution, M: CandidateSet, x: np.ndarray,
                   merge: bool = True) -> WeightedDistribution:
    m, c = len(dist), len(M.elements)
    out = []
    for j, (p, s) in enumerate(dist):
        for t, u in enumerate(M.elements):
            if x[j * c + t] > PROB_FLOOR:
                out.append((x[j * c + t] * p, s | 1 << u))
        if x[m * c + j] > PROB_FLOOR:
            out.append((x[m * c + j] * p, s))
    new = WeightedDistribution(out)
    if merge:
        return unify(new)
    mass = sum(new.probs)
    return WeightedDistribution((q / mass, s) for q, s in new)


def _round(dist, oracle, k, f, merge):
    M = select_M(dist, oracle, k, f)
    if not M.elements:
        return dist, None, M, None
    lp = build_lp(dist, M, k)
    try:
        sol = solve_basic_optimal(lp)
    except (InfeasibleError, UnboundedError) as exc:
        raise RuntimeError(f"transfer LP failed: {exc}") from exc
    return apply_transfer(dist, M, sol.x, merge), sol, M, lp


def step(dist: WeightedDistribution, oracle: ValueOracle, k: int,
         cache: ValueCache | None = None, merge: bool = True) -> WeightedDistribution:
    """One round; a round with no positive candidate leaves ``dist`` unchanged."""
    return _round(dist, oracle, k, cache or ValueCache(oracle), merge)[0]


def run(oracle: ValueOracle, k: int, merge: bool = True,
        keep_history: bool = False) -> tuple[frozenset, float, RunStats]:
    """Deterministic ``(1 - 1/k)^(k-1)``-approximation for ``max_{|S| <= k} f(S)``.

    Returns the best set over the final support (ties to the smallest
    bitmask), its value, and run statistics.
    """
    n = oracle.n
    if not 0 <= k <= n:
        raise InvalidInputError(f"cardinality bound must satisfy 0 <= k <= n={n}, got {k}")
    start = oracle.query_count
    f = ValueCache(oracle)
    dist = WeightedDistribution.point(0)
    stats = RunStats(history=[dist] if keep_history else None)
    stats.support_sizes.append(1)
    stats.expected_values.append(expectation(dist, f))

    for _ in range(k):
        before = oracle.query_count
        new, sol, M, lp = _round(dist, oracle, k, f, merge)
        stats.records.append(RoundRecord(M, sol, lp, oracle.query_count - before))
        dist = new
        stats.queries_per_iteration.append(oracle.query_count - before)
        stats.support_sizes.append(len(dist))
        stats.expected_values.append(expectation(dist, f))
        if keep_history:
            stats.history.append(dist)

    best_mask, best_val = 0, -np.inf
    for s in sorted(dist.states):
        val = f(s)
        if val > best_val:
            best_mask, best_val = s, val
    stats.query_count = oracle.query_count - start
    stats.max_support = max(stats.support_sizes)
    return from_mask(best_mask), float(best_val), stats


def check_decrease_lemma(dist: WeightedDistribution, T, oracle: ValueOracle, tol: float = 1e-9) -> bool:
    """Check ``E[f(T u S)] >= f(T) * min_u Pr[u not in S]`` over the ground set."""
    t = as_mask(T, oracle.n)
    lhs = expectation(dist, lambda s: oracle.eval(t | s))
    min_out = min((prob_not_containing(dist, u) for u in range(oracle.n)), default=1.0)
    return lhs >= oracle.eval(t) * min_out - tol
