"""A hard instance for the cardinality algorithm.

Ground set: ``O = {0, .., k-1}`` (the optimum, ``f(O) = 1``) followed by
``Y = {k, .., 2k-1}``.  With ``x = |S & O| / k`` and ``y = |S & Y| / k``::

    f(S) = x (1 - y) + (g(y) + ell * y / k) (1 - x)
    g(t) = (t - 1) ln(1 - t)   for t <= 1 - 1/e,   1/e otherwise

:func:`adversarial_run` replays the cardinality algorithm while forcing one
particular optimal extreme point each round, which keeps the distribution on
cyclic runs of ``Y`` and ends with value at most ``1/e + ell/k``.

Y elements are numbered cyclically: position ``j`` in ``0..k-1`` is element
``k + j`` and positions wrap modulo ``k``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .card import CandidateSet, build_lp, top_candidates
from .distribution import PROB_FLOOR, WeightedDistribution, expectation, unify
from .errors import AdversarialTraceError, InvalidInputError
from .extreme_point import solve_basic_optimal
from .oracle import ValueOracle, as_mask, popcount

DEFAULT_ELL = 17.0
_FLAT = 1.0 - math.exp(-1.0)
_FLOOR_EPS = 1e-9


def g(x: float) -> float:
    if not 0.0 <= x <= 1.0:
        raise InvalidInputError(f"g is defined on [0, 1], got {x}")
    if x <= _FLAT:
        return (x - 1.0) * math.log1p(-x) if x < 1.0 else 0.0
    return math.exp(-1.0)


def tight_value(n_o: int, n_y: int, k: int, ell: float = DEFAULT_ELL) -> float:
    x, y = n_o / k, n_y / k
    return x * (1 - y) + (g(y) + ell * n_y / k ** 2) * (1 - x)


def tight_f(S, k: int, ell: float = DEFAULT_ELL) -> float:
    mask = as_mask(S, 2 * k)
    return tight_value(popcount(mask & ((1 << k) - 1)), popcount(mask >> k), k, ell)


def marginal_Y(y: float, x: float, k: int, ell: float = DEFAULT_ELL) -> float:
    """Gain of adding a Y element to a set with fractions ``x`` of O and ``y`` of Y."""
    return -x / k + (1 - x) * (g(min(y + 1 / k, 1.0)) - g(y) + ell / k ** 2)


def marginal_O(y: float, x: float, k: int, ell: float = DEFAULT_ELL) -> float:
    """Gain of adding an O element; does not depend on ``x``."""
    return ((1 - y) - (g(y) + ell * y / k)) / k


def make_tight_oracle(k: int, ell: float = DEFAULT_ELL) -> ValueOracle:
    if k < 1:
        raise InvalidInputError("k must be positive")
    return ValueOracle(2 * k, lambda m: tight_f(m, k, ell), "tight",
                       {"type": "tight", "n": 2 * k, "k": k, "ell": ell})


def check_tight_submodular(k: int, ell: float = DEFAULT_ELL, tol: float = 1e-9) -> bool:
    """Submodularity on the (|S & O|, |S & Y|) count lattice.

    ``f`` depends only on the two counts, so diminishing returns reduces to
    both unit increments being non-increasing in both counts.
    """
    F = np.array([[tight_value(a, b, k, ell) for b in range(k + 1)] for a in range(k + 1)])
    dO = F[1:, :] - F[:-1, :]
    dY = F[:, 1:] - F[:, :-1]
    return bool(np.all(np.diff(dO, axis=0) <= tol) and np.all(np.diff(dO, axis=1) <= tol)
                and np.all(np.diff(dY, axis=1) <= tol) and np.all(np.diff(dY, axis=0) <= tol))


def _floor_kz(z: float, k: int) -> int:
    return min(k, int(math.floor(k * z + _FLOOR_EPS)))


def _run_mask(start: int, length: int, k: int) -> int:
    mask = 0
    for t in range(length):
        mask |= 1 << (k + (start + t) % k)
    return mask


def cyclic_tuples(z: float, k: int) -> list[tuple[float, str, int, int]]:
    """Un-merged tuples ``(p, kind, start, mask)`` of the cyclic distribution.

    For each start ``j``: the long run of length ``floor(kz) + 1`` with
    probability ``z - floor(kz)/k`` and the short run of length ``floor(kz)``
    with probability ``(floor(kz) + 1)/k - z``.
    """
    if not 0.0 <= z <= 1.0:
        raise InvalidInputError(f"z must lie in [0, 1], got {z}")
    fl = _floor_kz(z, k)
    p_long = max(z - fl / k, 0.0)
    p_short = max((fl + 1) / k - z, 0.0)
    out = []
    for j in range(k):
        out.append((p_long, "L", j, _run_mask(j, fl + 1, k)))
        out.append((p_short, "S", j, _run_mask(j, fl, k)))
    return out


def dist_z(z: float, k: int) -> WeightedDistribution:
    """Cyclic distribution with ``Pr[u in S] = z`` for every ``u`` in Y, unified."""
    return unify(WeightedDistribution((p, mask) for p, _, _, mask in cyclic_tuples(z, k)))


@dataclass
class TraceRow:
    i: int
    z: float
    case: int
    support: int
    expected_value: float
    max_value: float
    min_gap: float
    max_tuple_error: float
    lp_gap: float | None = None


@dataclass
class TightRun:
    k: int
    ell: float
    distribution: WeightedDistribution
    value: float
    trace: list[TraceRow] = field(default_factory=list)


def _expected_marginals(dist: WeightedDistribution, k: int, ell: float):
    masks = np.array(dist.states, dtype=object)
    probs = np.asarray(dist.probs)
    if any(int(s) & ((1 << k) - 1) for s in masks):
        raise AdversarialTraceError("a state contains an element of O")
    member = np.array([[int(s) >> (k + j) & 1 for j in range(k)] for s in masks], dtype=bool)
    ny = member.sum(axis=1)
    mY = np.array([marginal_Y(c / k, 0.0, k, ell) for c in ny])
    mO = np.array([marginal_O(c / k, 0.0, k, ell) for c in ny])
    state_marg = np.where(member, 0.0, mY[:, None])
    exp_y = probs @ state_marg
    exp_o = np.full(k, float(probs @ mO))
    return np.concatenate([exp_o, exp_y]), state_marg, member


def _compare(a: WeightedDistribution, b: WeightedDistribution) -> float:
    da, db = a.as_dict(), b.as_dict()
    return max((abs(da.get(s, 0.0) - db.get(s, 0.0)) for s in set(da) | set(db)), default=0.0)


def adversarial_run(k: int, ell: float = DEFAULT_ELL, tol: float = 1e-7,
                    verify_optimal: bool = False) -> TightRun:
    """Replay the cardinality algorithm on the hard instance with forced extreme points.

    Every round checks that the candidate set is exactly Y, builds the forced
    transfer, verifies it against the transfer LP constraints, applies it and
    compares the result with the predicted cyclic distribution at
    ``z_i = 1 - (1 - 1/k)^i``.  With ``verify_optimal`` the transfer LP is also
    solved by simplex and the forced point must match its optimum.

    Raises
    ------
    AdversarialTraceError
        On any deviation from the predicted trajectory.
    """
    if k < ell or ell < 6 * math.e:
        raise InvalidInputError(f"need k >= ell >= 6e, got k={k}, ell={ell}")
    y_elems = list(range(k, 2 * k))
    dist = WeightedDistribution.point(0)
    err0 = _compare(dist, dist_z(0.0, k))
    if err0 > tol:
        raise AdversarialTraceError(f"initial distribution differs from D(0) by {err0:g}")
    value_of = lambda s: tight_f(s, k, ell)  # noqa: E731
    run = TightRun(k=k, ell=ell, distribution=dist, value=0.0)
    z_prev = 0.0

    for i in range(1, k + 1):
        z = 1.0 - (1.0 - 1.0 / k) ** i
        expected, state_marg, member = _expected_marginals(dist, k, ell)
        chosen = top_candidates(expected, k)
        if sorted(chosen) != y_elems:
            raise AdversarialTraceError(f"round {i}: candidate set is not Y")
        gap = float(expected[k:].min() - expected[:k].max())

        fl_prev, fl = _floor_kz(z_prev, k), _floor_kz(z, k)
        masses: dict[tuple[int, int], float] = {}

        def put(state: int, pos: int, mass: float) -> None:
            if mass > PROB_FLOOR:
                key = (state, k + pos % k)
                masses[key] = masses.get(key, 0.0) + mass

        if fl == fl_prev:
            case = 1
            for p, kind, j, mask in cyclic_tuples(z_prev, k):
                if kind == "S":
                    put(mask, j + fl, z - z_prev)
        elif fl == fl_prev + 1:
            case = 2
            for p, kind, j, mask in cyclic_tuples(z_prev, k):
                if kind == "S":
                    put(mask, j + fl_prev, p)
                else:
                    put(mask, j + fl, (k * z_prev - z_prev - fl_prev) / k)
        else:
            raise AdversarialTraceError(f"round {i}: run length jumped from {fl_prev} to {fl}")

        prob = dist.as_dict()
        index = {s: j for j, s in enumerate(dist.states)}
        per_u = np.zeros(k)
        per_state = dict.fromkeys(dist.states, 0.0)
        for (s, u), mass in masses.items():
            if s not in prob:
                raise AdversarialTraceError(f"round {i}: transfer from a state outside the support")
            if s >> u & 1:
                raise AdversarialTraceError(f"round {i}: transfer adds an element already present")
            per_u[u - k] += mass
            per_state[s] += mass / prob[s]
        cap = (1.0 - member.T.astype(float)) @ np.asarray(dist.probs) / k
        if np.max(np.abs(per_u - cap)) > tol or np.max(np.abs(cap - (1 - z_prev) / k)) > tol:
            raise AdversarialTraceError(f"round {i}: candidate constraints not tight at 1/k (1 - z)")
        if max(per_state.values()) > 1.0 + tol:
            raise AdversarialTraceError(f"round {i}: a state transfers more than its mass")

        objective = sum(mass * state_marg[index[s], u - k] for (s, u), mass in masses.items())
        lp_gap = None
        if verify_optimal:
            M = CandidateSet(tuple(y_elems), tuple(expected[k:]), state_marg)
            opt = solve_basic_optimal(build_lp(dist, M, k)).objective
            lp_gap = opt - objective
            if lp_gap > tol:
                raise AdversarialTraceError(f"round {i}: forced point is {lp_gap:g} below the LP optimum")

        out = []
        for s in dist.states:
            stay = prob[s] * (1.0 - per_state[s])
            if stay > PROB_FLOOR:
                out.append((stay, s))
        out.extend((mass, s | 1 << u) for (s, u), mass in masses.items())
        dist = unify(WeightedDistribution(out))

        err = _compare(dist, dist_z(z, k))
        if err > tol:
            raise AdversarialTraceError(f"round {i}: distribution differs from D(z_{i}) by {err:g}")
        run.trace.append(TraceRow(
            i=i, z=z, case=case, support=len(dist),
            expected_value=expectation(dist, value_of),
            max_value=max(value_of(s) for s in dist.states),
            min_gap=gap, max_tuple_error=err, lp_gap=lp_gap))
        z_prev = z

    run.distribution = dist
    run.value = max(value_of(s) for s in dist.states)
    return run
