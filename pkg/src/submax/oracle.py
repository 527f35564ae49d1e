"""Value oracles over a ground set {0, ..., n-1}.

Sets are handled internally as integer bitmasks (bit ``u`` set iff element
``u`` is in the set).  Public entry points accept either a bitmask ``int`` or
any iterable of element indices; results that leave the package are
``frozenset`` objects.

Every call to :meth:`ValueOracle.eval` increments ``query_count`` by exactly
one.  There is no memoization at this layer; algorithms cache what they need.
"""
from __future__ import annotations

from typing import Callable, Iterable, Sequence, Union

import numpy as np

from .errors import CapacityError, InvalidInputError

ElementSet = Union[int, Iterable[int]]

MAX_TABLE_N = 24
MAX_CHECK_N = 14
MAX_BRUTE_N = 20
MAX_MASK_N = 64
TOL = 1e-9


def as_mask(S: ElementSet, n: int) -> int:
    """Convert ``S`` to a bitmask over ``n`` elements, validating indices."""
    if isinstance(S, (int, np.integer)) and not isinstance(S, bool):
        mask = int(S)
        if mask < 0 or mask >> n:
            raise InvalidInputError(f"bitmask {mask:#x} has bits outside 0..{n - 1}")
        return mask
    mask = 0
    for u in S:
        u = int(u)
        if not 0 <= u < n:
            raise InvalidInputError(f"element {u} outside ground set 0..{n - 1}")
        mask |= 1 << u
    return mask


def from_mask(mask: int) -> frozenset:
    out = []
    u = 0
    while mask:
        if mask & 1:
            out.append(u)
        mask >>= 1
        u += 1
    return frozenset(out)


def popcount(mask: int) -> int:
    return bin(mask).count("1")


class ValueOracle:
    """Counted black-box evaluator of a set function.

    Parameters
    ----------
    n : int
        Size of the ground set.
    fn : callable
        Maps a bitmask to a real value.  Must be deterministic.
    name : str
        Family label used in reports.
    spec : dict, optional
        JSON-serializable instance description (see :mod:`submax.instances`).
    batch : callable, optional
        Vectorized form of ``fn`` on an ``int64`` array of masks; only used to
        speed up :meth:`values`, which still counts one query per set.
    """

    def __init__(self, n: int, fn: Callable[[int], float], name: str = "custom",
                 spec: dict | None = None, batch: Callable[[np.ndarray], np.ndarray] | None = None):
        if n < 0:
            raise InvalidInputError("ground set size must be non-negative")
        if n > MAX_MASK_N:
            raise CapacityError(f"n={n} exceeds the supported maximum {MAX_MASK_N}")
        self.n = n
        self._fn = fn
        self.name = name
        self.spec = spec
        self._batch = batch
        self.query_count = 0

    @property
    def ground_mask(self) -> int:
        return (1 << self.n) - 1

    def eval(self, S: ElementSet) -> float:
        mask = as_mask(S, self.n)
        self.query_count += 1
        return float(self._fn(mask))

    __call__ = eval

    def marginal(self, u: int, S: ElementSet) -> float:
        """f(S + u) - f(S); always two queries."""
        if not 0 <= u < self.n:
            raise InvalidInputError(f"element {u} outside ground set 0..{self.n - 1}")
        mask = as_mask(S, self.n)
        return self.eval(mask | (1 << u)) - self.eval(mask)

    def values(self) -> np.ndarray:
        """All 2^n values indexed by bitmask (2^n counted queries)."""
        if self.n > MAX_TABLE_N:
            raise CapacityError(f"n={self.n} too large to tabulate")
        if self._batch is None:
            return np.array([self.eval(m) for m in range(1 << self.n)], dtype=float)
        self.query_count += 1 << self.n
        return np.asarray(self._batch(np.arange(1 << self.n, dtype=np.int64)), dtype=float)

    def copy(self) -> "ValueOracle":
        """Same function, fresh query counter."""
        return ValueOracle(self.n, self._fn, self.name, self.spec, self._batch)

    def reset_count(self) -> None:
        self.query_count = 0

    def __repr__(self) -> str:
        return f"ValueOracle(name={self.name!r}, n={self.n}, queries={self.query_count})"


def make_table_function(values: Sequence[float]) -> ValueOracle:
    vals = np.array(values, dtype=float)
    if vals.ndim != 1:
        raise InvalidInputError("table must be one-dimensional")
    size = vals.shape[0]
    if size == 0 or size & (size - 1):
        raise InvalidInputError(f"table length {size} is not a power of two")
    n = size.bit_length() - 1
    if n > MAX_TABLE_N:
        raise CapacityError(f"table functions support n <= {MAX_TABLE_N}")
    if not np.all(np.isfinite(vals)):
        raise InvalidInputError("table values must be finite")
    vals.setflags(write=False)
    lookup = vals.tolist()
    return ValueOracle(n, lookup.__getitem__, "table",
                       {"type": "table", "n": n, "values": lookup}, batch=lambda m: vals[m])


def make_modular(weights: Sequence[float]) -> ValueOracle:
    w = [float(x) for x in weights]
    n = len(w)

    def fn(mask: int) -> float:
        return sum(w[u] for u in range(n) if mask >> u & 1)

    def batch(masks: np.ndarray) -> np.ndarray:
        out = np.zeros(masks.shape[0])
        for u in range(n):
            out += w[u] * (masks >> u & 1)
        return out

    return ValueOracle(n, fn, "modular", {"type": "modular", "n": n, "weights": w}, batch)


def make_cut_function(edges: Iterable[Sequence[float]], n: int | None = None) -> ValueOracle:
    """Weighted cut function of an undirected graph.

    ``edges`` holds ``(u, v, weight)`` triples (weight defaults to 1 when a
    pair is given).  ``n`` defaults to one more than the largest endpoint.
    """
    parsed = []
    for e in edges:
        if len(e) == 2:
            u, v, wt = e[0], e[1], 1.0
        elif len(e) == 3:
            u, v, wt = e
        else:
            raise InvalidInputError(f"edge {e!r} must be (u, v) or (u, v, weight)")
        if int(u) != u or int(v) != v:
            raise InvalidInputError(f"edge endpoints must be integers: {e!r}")
        parsed.append((int(u), int(v), float(wt)))
    if n is None:
        n = 1 + max((max(u, v) for u, v, _ in parsed), default=-1)
    for u, v, wt in parsed:
        if not (0 <= u < n and 0 <= v < n):
            raise InvalidInputError(f"edge ({u}, {v}) references an element outside 0..{n - 1}")
        if wt < 0 or not np.isfinite(wt):
            raise InvalidInputError(f"edge ({u}, {v}) has invalid weight {wt}")

    def fn(mask: int) -> float:
        return sum(wt for u, v, wt in parsed if (mask >> u & 1) != (mask >> v & 1))

    def batch(masks: np.ndarray) -> np.ndarray:
        out = np.zeros(masks.shape[0])
        for u, v, wt in parsed:
            out += wt * ((masks >> u ^ masks >> v) & 1)
        return out

    return ValueOracle(n, fn, "cut",
                       {"type": "cut", "n": n, "edges": [[u, v, wt] for u, v, wt in parsed]}, batch)


def make_coverage_function(sets: Sequence[Iterable[int]],
                           weights: Sequence[float] | None = None) -> ValueOracle:
    """Weighted coverage: element ``u`` covers universe items ``sets[u]``."""
    covers = [frozenset(int(a) for a in s) for s in sets]
    n = len(covers)
    universe = 1 + max((max(c) for c in covers if c), default=-1)
    if weights is None:
        weights = [1.0] * universe
    w = [float(x) for x in weights]
    if len(w) < universe:
        raise InvalidInputError(f"coverage references item {universe - 1} but only {len(w)} weights given")
    if any(a < 0 for c in covers for a in c):
        raise InvalidInputError("universe items must be non-negative indices")
    if any(x < 0 or not np.isfinite(x) for x in w):
        raise InvalidInputError("coverage weights must be finite and non-negative")
    item_masks = [sum(1 << a for a in c) for c in covers]

    def fn(mask: int) -> float:
        covered = 0
        for u in range(n):
            if mask >> u & 1:
                covered |= item_masks[u]
        return sum(w[a] for a in range(len(w)) if covered >> a & 1)

    # element masks covering each universe item
    holders = [sum(1 << u for u in range(n) if a in covers[u]) for a in range(len(w))]

    def batch(masks: np.ndarray) -> np.ndarray:
        out = np.zeros(masks.shape[0])
        for a, h in enumerate(holders):
            if h:
                out += w[a] * ((masks & h) != 0)
        return out

    return ValueOracle(n, fn, "coverage",
                       {"type": "coverage", "n": n, "sets": [sorted(c) for c in covers], "weights": w}, batch)


def _require_small(oracle: ValueOracle, limit: int) -> None:
    if oracle.n > limit:
        raise CapacityError(f"exhaustive routine limited to n <= {limit}, got n={oracle.n}")


def submodularity_violation(values: np.ndarray) -> float:
    """Largest amount by which diminishing returns fails on a full table.

    For each element ``u`` the marginal vector ``m_u[A] = f(A+u) - f(A)``
    (``A`` ranging over sets without ``u``) is compared with its superset
    maximum, computed by a sum-over-subsets style sweep.  Returns
    ``max over u, A of (max_{B >= A, u not in B} m_u[B]) - m_u[A]``, which is
    ``<= 0`` exactly when ``f`` is submodular.
    """
    size = values.shape[0]
    n = size.bit_length() - 1
    if n <= 1:
        return -np.inf if n == 0 else 0.0
    masks = np.arange(size)
    worst = -np.inf
    for u in range(n):
        bit = 1 << u
        base = masks[(masks & bit) == 0]
        marg = values[base | bit] - values[base]
        # re-index marginals over the n-1 remaining bits
        sup = np.full(1 << n, -np.inf)
        sup[base] = marg
        for v in range(n):
            if v == u:
                continue
            vb = 1 << v
            lo = base[(base & vb) == 0]
            sup[lo] = np.maximum(sup[lo], sup[lo | vb])
        worst = max(worst, float(np.max(sup[base] - marg)))
    return worst


def check_submodular(oracle: ValueOracle, tol: float = TOL) -> bool:
    """Exhaustively verify f(A+u) - f(A) >= f(B+u) - f(B) for all A <= B, u not in B."""
    _require_small(oracle, MAX_CHECK_N)
    return submodularity_violation(oracle.values()) <= tol


def check_nonnegative(oracle: ValueOracle, tol: float = TOL) -> bool:
    _require_small(oracle, MAX_CHECK_N)
    return bool(np.all(oracle.values() >= -tol))


def brute_force_opt(oracle: ValueOracle, cardinality_bound: int | None = None) -> tuple[frozenset, float]:
    """Exact maximizer by enumeration; ties go to the smallest bitmask."""
    _require_small(oracle, MAX_BRUTE_N)
    return opt_from_table(oracle.values(), cardinality_bound)


def set_sizes(n: int) -> np.ndarray:
    """``|S|`` for every bitmask ``S`` of an ``n``-element ground set."""
    masks = np.arange(1 << n, dtype=np.int64)
    sizes = np.zeros(1 << n, dtype=np.int64)
    for u in range(n):
        sizes += masks >> u & 1
    return sizes


def opt_from_table(values: np.ndarray, cardinality_bound: int | None = None) -> tuple[frozenset, float]:
    """Maximizer of a full value table, optionally over sets of size <= bound."""
    if cardinality_bound is not None:
        if cardinality_bound < 0:
            raise InvalidInputError("cardinality bound must be non-negative")
        n = values.shape[0].bit_length() - 1
        values = np.where(set_sizes(n) <= cardinality_bound, values, -np.inf)
    best = int(np.argmax(values))
    return from_mask(best), float(values[best])

