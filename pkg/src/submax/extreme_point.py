"""Solvers that return extreme-point (basic) optimal solutions.

* :func:`solve_signed_knapsack` -- fractional knapsack whose values and sizes
  may be negative, solved with a density rule that leaves at most one item
  fractional.
* :func:`solve_basic_optimal` -- dense two-phase simplex with Bland's rule.
* :func:`enumerate_vertices` -- exhaustive basis enumeration, for testing.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import CapacityError, InfeasibleError, InvalidInputError, UnboundedError

TOL = 1e-9
ZERO = 1e-12
MAX_ENUM_SIZE = 24
_MAX_PIVOTS = 100_000


# ---------------------------------------------------------------------------
# signed fractional knapsack

@dataclass(frozen=True)
class SignedKnapsackItem:
    v: float
    s: float
    id: int


@dataclass
class KnapsackSolution:
    z: np.ndarray
    objective: float

    @property
    def fractional(self) -> list[int]:
        return [j for j, zj in enumerate(self.z) if TOL < zj < 1 - TOL]


def solve_signed_knapsack(items: Sequence[SignedKnapsackItem], B: float) -> KnapsackSolution:
    """Maximize sum v_j z_j subject to sum s_j z_j <= B, 0 <= z_j <= 1.

    Items are classified by sign:

    * ``v >= 0, s < 0`` and ``v > 0, s == 0`` are always taken (they add value
      or free capacity at no cost);
    * ``v <= 0, s >= 0`` and ``v < 0, s == 0`` are never taken;
    * ``v > 0, s > 0`` ("positive") are bought in decreasing ``v/s`` order;
    * ``v < 0, s < 0`` ("negative", selling capacity at price ``v/s``) are
      used in increasing ``v/s`` order.

    If the mandatory picks leave negative capacity, the cheapest negative
    items are taken first until the budget is met.  Positive items then fill
    the remaining capacity, after which positive and negative items are
    paired while the next positive density is at least the next negative
    price.  Ties in density are broken by ``id``.  At most one item ends
    fractional.

    Raises
    ------
    InfeasibleError
        If even every negative item cannot restore a non-negative capacity.
    """
    m = len(items)
    z = np.zeros(m)
    for it in items:
        if not (np.isfinite(it.v) and np.isfinite(it.s)):
            raise InvalidInputError(f"non-finite knapsack item {it}")
    if not np.isfinite(B):
        raise InvalidInputError("non-finite knapsack budget")

    cap = float(B)
    pos: list[int] = []
    neg: list[int] = []
    for j, it in enumerate(items):
        if (it.v >= 0 and it.s < 0) or (it.v > 0 and it.s == 0):
            z[j] = 1.0
            cap -= it.s
        elif it.v > 0 and it.s > 0:
            pos.append(j)
        elif it.v < 0 and it.s < 0:
            neg.append(j)
    pos.sort(key=lambda j: (-items[j].v / items[j].s, items[j].id))
    neg.sort(key=lambda j: (items[j].v / items[j].s, items[j].id))

    scale = 1.0 + abs(B) + sum(abs(it.s) for it in items)
    # remaining capacity units still available from the current item
    ni = 0
    neg_left = [-items[j].s for j in neg]
    pi = 0
    pos_left = [items[j].s for j in pos]

    def take_neg(amount: float) -> None:
        j = neg[ni]
        neg_left[ni] -= amount
        z[j] = 1.0 - neg_left[ni] / -items[j].s

    def take_pos(amount: float) -> None:
        j = pos[pi]
        pos_left[pi] -= amount
        z[j] = 1.0 - pos_left[pi] / items[j].s

    # restore feasibility by selling the cheapest capacity
    while cap < 0 and ni < len(neg):
        amount = min(neg_left[ni], -cap)
        take_neg(amount)
        cap += amount
        if neg_left[ni] <= 0:
            ni += 1
    if cap < -TOL * scale:
        raise InfeasibleError(f"knapsack budget short by {-cap:g} after all capacity sales")
    cap = max(cap, 0.0)

    # fill free capacity with the densest positive items
    while cap > 0 and pi < len(pos):
        amount = min(pos_left[pi], cap)
        take_pos(amount)
        cap -= amount
        if pos_left[pi] <= 0:
            pi += 1

    # buy more capacity while it pays off
    while pi < len(pos) and ni < len(neg):
        jp, jn = pos[pi], neg[ni]
        if items[jp].v / items[jp].s < items[jn].v / items[jn].s:
            break
        amount = min(pos_left[pi], neg_left[ni])
        take_pos(amount)
        take_neg(amount)
        if pos_left[pi] <= 0:
            pi += 1
        if neg_left[ni] <= 0:
            ni += 1

    z[np.abs(z) <= ZERO] = 0.0
    z[np.abs(z - 1.0) <= ZERO] = 1.0
    np.clip(z, 0.0, 1.0, out=z)
    objective = float(sum(it.v * zj for it, zj in zip(items, z)))
    return KnapsackSolution(z=z, objective=objective)


def knapsack_as_lp(items: Sequence[SignedKnapsackItem], B: float) -> "DenseLP":
    """The same knapsack written as a :class:`DenseLP` (budget row + unit boxes)."""
    m = len(items)
    A_ub = np.vstack([np.array([[it.s for it in items]]), np.eye(m)]) if m else np.zeros((1, 0))
    b_ub = np.concatenate([[B], np.ones(m)])
    return DenseLP(c=np.array([it.v for it in items], dtype=float), A_ub=A_ub, b_ub=b_ub)


def knapsack_vertex_optimum(items: Sequence[SignedKnapsackItem], B: float) -> float:
    """Brute-force optimum over every vertex of the knapsack polytope.

    A vertex of ``{0 <= z <= 1, s.z <= B}`` has at most one coordinate off
    ``{0, 1}``, fixed by making the budget row tight.  All such candidates are
    scored and the best feasible one returned.
    """
    m = len(items)
    v = np.array([it.v for it in items], dtype=float)
    s = np.array([it.s for it in items], dtype=float)
    if m == 0:
        if B < -TOL:
            raise InfeasibleError("empty knapsack with negative budget")
        return 0.0
    corners = ((np.arange(1 << m)[:, None] >> np.arange(m)) & 1).astype(float)
    cands = [corners]
    for j in range(m):
        if s[j] == 0:
            continue
        rest = corners[corners[:, j] == 0]
        zj = (B - rest @ s) / s[j]
        ok = (zj > 0) & (zj < 1)
        c = rest[ok].copy()
        c[:, j] = zj[ok]
        cands.append(c)
    allc = np.vstack(cands)
    feasible = allc @ s <= B + TOL * (1 + np.abs(s).sum() + abs(B))
    if not feasible.any():
        raise InfeasibleError("knapsack has no feasible vertex")
    return float(np.max(allc[feasible] @ v))


# ---------------------------------------------------------------------------
# dense LPs

@dataclass
class DenseLP:
    """``max c.x  s.t.  A_ub x <= b_ub,  A_eq x = b_eq,  x >= 0``."""

    c: np.ndarray
    A_ub: np.ndarray = field(default=None)
    b_ub: np.ndarray = field(default=None)
    A_eq: np.ndarray = field(default=None)
    b_eq: np.ndarray = field(default=None)

    def __post_init__(self):
        self.c = np.asarray(self.c, dtype=float).reshape(-1)
        n = self.c.shape[0]
        self.A_ub, self.b_ub = self._rows(self.A_ub, self.b_ub, n, "inequality")
        self.A_eq, self.b_eq = self._rows(self.A_eq, self.b_eq, n, "equality")

    @staticmethod
    def _rows(A, b, n, what):
        if A is None:
            A = np.zeros((0, n))
        A = np.asarray(A, dtype=float)
        if A.ndim == 1:
            A = A.reshape(1, -1) if A.size else np.zeros((0, n))
        b = np.zeros(0) if b is None else np.asarray(b, dtype=float).reshape(-1)
        if A.shape[1] != n or A.shape[0] != b.shape[0]:
            raise InvalidInputError(f"{what} rows have shape {A.shape} / {b.shape}, expected (*, {n})")
        return A, b

    @property
    def n_vars(self) -> int:
        return self.c.shape[0]

    @property
    def n_rows(self) -> int:
        return self.A_ub.shape[0] + self.A_eq.shape[0]

    def is_feasible(self, x: np.ndarray, tol: float = TOL) -> bool:
        x = np.asarray(x, dtype=float)
        return bool(np.all(x >= -tol)
                    and np.all(self.A_ub @ x <= self.b_ub + tol)
                    and np.all(np.abs(self.A_eq @ x - self.b_eq) <= tol))


@dataclass
class BasicSolution:
    x: np.ndarray
    objective: float
    nonzero_count: int


def _finish(lp: DenseLP, x: np.ndarray) -> BasicSolution:
    x = np.where(np.abs(x) <= ZERO, 0.0, x)
    x = np.maximum(x, 0.0)
    return BasicSolution(x=x, objective=float(lp.c @ x), nonzero_count=int(np.count_nonzero(x)))


def _pivot(T: np.ndarray, basis: list[int], r: int, j: int) -> None:
    T[r] /= T[r, j]
    col = T[:, j].copy()
    col[r] = 0.0
    T -= np.outer(col, T[r])
    T[:, j] = 0.0
    T[r, j] = 1.0
    basis[r] = j


def _run_simplex(T: np.ndarray, basis: list[int], n_cols: int, tol: float) -> None:
    """Maximize over the tableau in place.

    ``T[:-1]`` holds constraint rows ``[A | b]``; ``T[-1]`` holds reduced
    costs (negative entries may enter) with the negated objective value in the
    last column.  Columns ``>= n_cols`` are barred from entering.  Bland's
    rule: lowest-index entering column, lowest-index leaving basic variable
    among ratio ties.
    """
    m = T.shape[0] - 1
    for _ in range(_MAX_PIVOTS):
        obj = T[-1, :n_cols]
        candidates = np.nonzero(obj < -tol)[0]
        if candidates.size == 0:
            return
        j = int(candidates[0])
        col = T[:m, j]
        rows = np.nonzero(col > tol)[0]
        if rows.size == 0:
            raise UnboundedError(f"objective unbounded along column {j}")
        ratios = T[rows, -1] / col[rows]
        best = ratios.min()
        tied = rows[ratios <= best + tol * max(1.0, abs(best))]
        r = int(min(tied, key=lambda i: basis[i]))
        _pivot(T, basis, r, j)
    raise RuntimeError("simplex exceeded its pivot budget")


def solve_basic_optimal(lp: DenseLP, tol: float = TOL) -> BasicSolution:
    """Optimal basic feasible solution by two-phase dense simplex.

    Inequality rows receive slack columns; rows that cannot start from their
    slack (equalities, and inequalities with negative right-hand side) receive
    artificial columns driven out in phase one.  Redundant equality rows are
    dropped when their artificial cannot be pivoted out.
    """
    n = lp.n_vars
    mu = lp.A_ub.shape[0]
    me = lp.A_eq.shape[0]
    m = mu + me
    if m == 0:
        if np.any(lp.c > tol):
            raise UnboundedError("no constraints and a positive objective coefficient")
        return _finish(lp, np.zeros(n))

    A = np.zeros((m, n + mu))
    A[:mu, :n] = lp.A_ub
    A[:mu, n:] = np.eye(mu)
    A[mu:, :n] = lp.A_eq
    b = np.concatenate([lp.b_ub, lp.b_eq])
    flip = b < 0
    A[flip] *= -1
    b[flip] *= -1

    needs_art = [i for i in range(m) if i >= mu or flip[i]]
    n_struct = n + mu
    n_art = len(needs_art)
    T = np.zeros((m + 1, n_struct + n_art + 1))
    T[:m, :n_struct] = A
    T[:m, -1] = b
    basis = [n + i if i < mu else -1 for i in range(m)]
    for k, i in enumerate(needs_art):
        T[i, n_struct + k] = 1.0
        basis[i] = n_struct + k

    scale = 1.0 + float(np.abs(b).max(initial=0.0))
    if n_art:
        # phase one: maximize -sum(artificials)
        T[-1, n_struct:n_struct + n_art] = 1.0
        for i in needs_art:
            T[-1] -= T[i]
        _run_simplex(T, basis, n_struct + n_art, tol)
        if T[-1, -1] < -tol * scale:
            raise InfeasibleError(f"phase one ended with infeasibility {T[-1, -1]:g}")
        # drive remaining artificials out of the basis
        r = 0
        while r < T.shape[0] - 1:
            if basis[r] >= n_struct:
                row = T[r, :n_struct]
                cands = np.nonzero(np.abs(row) > tol)[0]
                if cands.size:
                    _pivot(T, basis, r, int(cands[0]))
                else:
                    T = np.delete(T, r, axis=0)
                    del basis[r]
                    continue
            r += 1
        T = np.delete(T, np.s_[n_struct:n_struct + n_art], axis=1)

    T[-1] = 0.0
    T[-1, :n] = -lp.c
    for r, j in enumerate(basis):
        if T[-1, j] != 0.0:
            T[-1] -= T[-1, j] * T[r]
    _run_simplex(T, basis, n_struct, tol)

    x = np.zeros(n_struct)
    for r, j in enumerate(basis):
        x[j] = T[r, -1]
    return _finish(lp, x[:n])


def enumerate_vertices(lp: DenseLP, tol: float = TOL) -> BasicSolution:
    """Best basic feasible solution found by trying every column basis.

    The LP is put in equality form with slack columns; a maximal independent
    set of rows is kept, and every choice of that many columns with a
    non-singular submatrix is solved and checked against all original rows.
    Assumes the LP is bounded.  Limited to ``n_vars + n_rows <= 24``.
    """
    n = lp.n_vars
    mu = lp.A_ub.shape[0]
    if n + lp.n_rows > MAX_ENUM_SIZE:
        raise CapacityError(f"vertex enumeration limited to vars + rows <= {MAX_ENUM_SIZE}")
    A = np.zeros((lp.n_rows, n + mu))
    A[:mu, :n] = lp.A_ub
    A[:mu, n:] = np.eye(mu)
    A[mu:, :n] = lp.A_eq
    b = np.concatenate([lp.b_ub, lp.b_eq])
    N = n + mu

    keep: list[int] = []
    for i in range(A.shape[0]):
        trial = keep + [i]
        if np.linalg.matrix_rank(A[trial], tol=1e-10) == len(trial):
            keep = trial
    Ak, bk = A[keep], b[keep]
    r = len(keep)

    def feasible(full: np.ndarray) -> bool:
        return bool(np.all(full >= -tol) and np.all(np.abs(A @ full - b) <= tol * (1 + np.abs(b))))

    best = None
    if r == 0:
        x = np.zeros(N)
        if feasible(x):
            best = x
    else:
        combos = np.array(list(itertools.combinations(range(N), r)), dtype=int)
        for start in range(0, len(combos), 4096):
            chunk = combos[start:start + 4096]
            sub = Ak[:, chunk].transpose(1, 0, 2)
            sv = np.linalg.svd(sub, compute_uv=False)
            ok = sv[:, -1] > 1e-10 * np.maximum(sv[:, 0], 1.0)
            if not ok.any():
                continue
            chunk, sub = chunk[ok], sub[ok]
            xb = np.linalg.solve(sub, np.broadcast_to(bk, (len(chunk), r))[..., None])[..., 0]
            for cols, vals in zip(chunk, xb):
                if np.any(vals < -tol):
                    continue
                full = np.zeros(N)
                full[cols] = vals
                if not feasible(full):
                    continue
                if best is None or lp.c @ full[:n] > lp.c @ best[:n] + tol:
                    best = full
    if best is None:
        raise InfeasibleError("no feasible basic solution")
    return _finish(lp, best[:n])
