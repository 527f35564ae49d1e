"""Deterministic double greedy for unconstrained submodular maximization.

The randomized double greedy keeps a pair ``(X, Y)`` with ``X`` growing from
the empty set and ``Y`` shrinking from the ground set, and flips a biased coin
per element.  Here the coin is replaced by an explicit distribution over
pairs.  For element ``u`` every state ``(X, Y)`` splits its probability into a
share ``z`` that adds ``u`` to ``X`` and a share ``w = 1 - z`` that removes
``u`` from ``Y``, where ``(z, w)`` is an extreme point of the linear system

    E[z a + w b] >= 2 E[z b],    E[z a + w b] >= 2 E[w a],    z + w = 1,

with ``a = f(X + u) - f(X)`` and ``b = f(Y - u) - f(Y)``.  An extreme point has
few fractional coordinates, so the support grows by at most one state per
element (two with the generic simplex).  The best final state is a
1/2-approximation whenever ``f`` is non-negative and submodular.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import NamedTuple, Sequence

import numpy as np

from .distribution import PROB_FLOOR, WeightedDistribution, expectation, unify
from .errors import InfeasibleError, InvalidInputError
from .extreme_point import DenseLP, SignedKnapsackItem, solve_basic_optimal, solve_signed_knapsack
from .oracle import ValueOracle, from_mask

SOLVER_MODES = ("knapsack", "generic")


class PairState(NamedTuple):
    x: int
    y: int


@dataclass
class StepGains:
    a: np.ndarray
    b: np.ndarray


@dataclass
class IterationRecord:
    element: int
    z: np.ndarray
    w: np.ndarray
    gains: StepGains
    queries: int
    support: int


@dataclass
class RunStats:
    query_count: int = 0
    setup_queries: int = 0
    max_support: int = 1
    support_sizes: list[int] = field(default_factory=list)
    queries_per_iteration: list[int] = field(default_factory=list)
    potentials: list[float] = field(default_factory=list)
    records: list[IterationRecord] = field(default_factory=list)
    history: list[WeightedDistribution] | None = None


class ValueCache:
    """Per-run memo of f by bitmask; every miss is one oracle query."""

    def __init__(self, oracle: ValueOracle):
        self.oracle = oracle
        self._values: dict[int, float] = {}

    def __call__(self, mask: int) -> float:
        try:
            return self._values[mask]
        except KeyError:
            val = self._values[mask] = self.oracle.eval(mask)
            return val


def compute_gains(dist: WeightedDistribution, u: int, oracle: ValueOracle,
                  cache: ValueCache | None = None) -> StepGains:
    f = cache or ValueCache(oracle)
    bit = 1 << u
    a = np.array([f(s.x | bit) - f(s.x) for s in dist.states])
    b = np.array([f(s.y & ~bit) - f(s.y) for s in dist.states])
    return StepGains(a=a, b=b)


def reduce_to_knapsack(gains: StepGains, dist: WeightedDistribution) -> tuple[list[SignedKnapsackItem], float]:
    """Knapsack whose optimum ``z`` (with ``w = 1 - z``) is feasible for the split system.

    The first inequality becomes the objective ``E[z (a - 3b)]``; the second
    is rewritten as ``E[z (b - 3a)] <= E[b - 2a]``.
    """
    p = np.asarray(dist.probs)
    v = p * (gains.a - 3 * gains.b)
    s = p * (gains.b - 3 * gains.a)
    B = float(np.sum(p * (gains.b - 2 * gains.a)))
    items = [SignedKnapsackItem(float(vj), float(sj), j) for j, (vj, sj) in enumerate(zip(v, s))]
    return items, B


def split_lp(gains: StepGains, dist: WeightedDistribution) -> DenseLP:
    """The split system as a dense LP over ``[z_0..z_{m-1}, w_0..w_{m-1}]``.

    The objective maximizes the expected gain ``E[z a + w b]``.
    """
    p = np.asarray(dist.probs)
    a, b = gains.a, gains.b
    m = len(p)
    A_ub = np.vstack([
        np.concatenate([p * (2 * b - a), -p * b]),
        np.concatenate([-p * a, p * (2 * a - b)]),
    ])
    A_eq = np.hstack([np.eye(m), np.eye(m)])
    return DenseLP(c=np.concatenate([p * a, p * b]), A_ub=A_ub, b_ub=np.zeros(2),
                   A_eq=A_eq, b_eq=np.ones(m))


def constraint_slacks(dist: WeightedDistribution, gains: StepGains,
                      z: np.ndarray, w: np.ndarray) -> tuple[float, float]:
    """Slack of both split inequalities (non-negative when satisfied)."""
    p = np.asarray(dist.probs)
    gain = float(np.sum(p * (z * gains.a + w * gains.b)))
    return gain - 2 * float(np.sum(p * z * gains.b)), gain - 2 * float(np.sum(p * w * gains.a))


def feasible_split(gains: StepGains) -> tuple[np.ndarray, np.ndarray]:
    """Coin biases of the randomized double greedy, a feasible split."""
    ap = np.maximum(gains.a, 0.0)
    bp = np.maximum(gains.b, 0.0)
    den = ap + bp
    z = np.where(den > 0, ap / np.where(den > 0, den, 1.0), 1.0)
    return z, 1.0 - z


def solve_split(gains: StepGains, dist: WeightedDistribution,
                solver_mode: str = "knapsack") -> tuple[np.ndarray, np.ndarray]:
    if solver_mode == "knapsack":
        items, B = reduce_to_knapsack(gains, dist)
        try:
            z = solve_signed_knapsack(items, B).z
        except InfeasibleError as exc:
            raise RuntimeError(f"split system infeasible; is f submodular? ({exc})") from exc
        return z, 1.0 - z
    if solver_mode == "generic":
        m = len(dist)
        try:
            x = solve_basic_optimal(split_lp(gains, dist)).x
        except InfeasibleError as exc:
            raise RuntimeError(f"split system infeasible; is f submodular? ({exc})") from exc
        return x[:m], x[m:]
    raise InvalidInputError(f"unknown solver mode {solver_mode!r}; expected one of {SOLVER_MODES}")


def _apply_split(dist: WeightedDistribution, u: int, z: np.ndarray, w: np.ndarray,
                 merge: bool) -> WeightedDistribution:
    bit = 1 << u
    out = []
    for p, s, zj, wj in zip(dist.probs, dist.states, z, w):
        if zj > PROB_FLOOR:
            out.append((zj * p, PairState(s.x | bit, s.y)))
        if wj > PROB_FLOOR:
            out.append((wj * p, PairState(s.x, s.y & ~bit)))
    new = WeightedDistribution(out)
    if merge:
        return unify(new)
    mass = sum(new.probs)
    return WeightedDistribution((p / mass, s) for p, s in new)


def step(dist: WeightedDistribution, u: int, oracle: ValueOracle, solver_mode: str = "knapsack",
         cache: ValueCache | None = None, merge: bool = True) -> WeightedDistribution:
    """Process element ``u``: split every state between adding and dropping it."""
    gains = compute_gains(dist, u, oracle, cache)
    z, w = solve_split(gains, dist, solver_mode)
    return _apply_split(dist, u, z, w, merge)


def initial_distribution(n: int) -> WeightedDistribution:
    return WeightedDistribution.point(PairState(0, (1 << n) - 1))


def run(oracle: ValueOracle, order: Sequence[int] | None = None, solver_mode: str = "knapsack",
        merge: bool = True, keep_history: bool = False) -> tuple[frozenset, float, RunStats]:
    """Deterministic 1/2-approximation for ``max f(S)``.

    Parameters
    ----------
    oracle : ValueOracle
        Non-negative submodular function (the guarantee is void otherwise).
    order : sequence of int, optional
        Processing order; defaults to ``0, 1, ..., n-1``.
    solver_mode : {"knapsack", "generic"}
        ``"knapsack"`` uses the density-rule solver (support grows by <= 1 per
        element); ``"generic"`` solves the full split LP by simplex (<= 2).
    merge : bool
        Unify identical states after every element.
    keep_history : bool
        Store every intermediate distribution in ``stats.history``.

    Returns
    -------
    (solution, value, stats)
        The best ``X`` over the final support (ties to the smallest bitmask).
    """
    n = oracle.n
    if order is None:
        order = list(range(n))
    order = [int(u) for u in order]
    if sorted(order) != list(range(n)):
        raise InvalidInputError(f"order must be a permutation of 0..{n - 1}")
    if solver_mode not in SOLVER_MODES:
        raise InvalidInputError(f"unknown solver mode {solver_mode!r}")

    start = oracle.query_count
    f = ValueCache(oracle)
    dist = initial_distribution(n)
    potential = lambda d: expectation(d, lambda s: f(s.x) + f(s.y))  # noqa: E731

    stats = RunStats(history=[dist] if keep_history else None)
    stats.potentials.append(potential(dist))
    stats.setup_queries = oracle.query_count - start
    stats.support_sizes.append(len(dist))

    for u in order:
        before = oracle.query_count
        gains = compute_gains(dist, u, oracle, f)
        z, w = solve_split(gains, dist, solver_mode)
        stats.records.append(IterationRecord(u, z, w, gains, oracle.query_count - before, len(dist)))
        dist = _apply_split(dist, u, z, w, merge)
        stats.queries_per_iteration.append(oracle.query_count - before)
        stats.support_sizes.append(len(dist))
        stats.potentials.append(potential(dist))
        if keep_history:
            stats.history.append(dist)

    best_mask, best_val = None, -np.inf
    for s in sorted(dist.states):
        val = f(s.x)
        if val > best_val:
            best_mask, best_val = s.x, val
    stats.query_count = oracle.query_count - start
    stats.max_support = max(stats.support_sizes)
    return from_mask(best_mask), float(best_val), stats
