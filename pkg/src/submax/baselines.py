"""Seeded randomized reference algorithms.

Both use :class:`SplitMix64` so that a ``(instance, seed)`` pair reproduces the
same run bit for bit on any platform.

SplitMix64 (all arithmetic mod 2^64)::

    state += 0x9E3779B97F4A7C15
    z = state
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9
    z = (z ^ (z >> 27)) * 0x94D049BB133111EB
    return z ^ (z >> 31)

``random()`` returns ``(next() >> 11) * 2**-53`` in ``[0, 1)``.
``below(m)`` draws ``r = next()`` until ``r < 2**64 - (2**64 % m)`` and
returns ``r % m``.
"""
from __future__ import annotations

from .oracle import ValueOracle, from_mask
from .usm import ValueCache
from .card import top_candidates

_MASK64 = (1 << 64) - 1


class SplitMix64:
    def __init__(self, seed: int):
        self.state = seed & _MASK64

    def next(self) -> int:
        self.state = (self.state + 0x9E3779B97F4A7C15) & _MASK64
        z = self.state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
        return z ^ (z >> 31)

    def random(self) -> float:
        return (self.next() >> 11) * (1.0 / (1 << 53))

    def below(self, m: int) -> int:
        if m <= 0:
            raise ValueError("below() needs a positive bound")
        limit = (1 << 64) - ((1 << 64) % m)
        while True:
            r = self.next()
            if r < limit:
                return r % m


def randomized_double_greedy(oracle: ValueOracle, seed: int) -> tuple[frozenset, float]:
    """Linear-time randomized double greedy (expected 1/2-approximation).

    Element ``u`` joins ``X`` with probability ``a+ / (a+ + b+)`` (1 when both
    are zero) and otherwise leaves ``Y``.  Uses ``2n + 2`` queries at most.
    """
    rng = SplitMix64(seed)
    f = ValueCache(oracle)
    x, y = 0, oracle.ground_mask
    for u in range(oracle.n):
        bit = 1 << u
        a = max(f(x | bit) - f(x), 0.0)
        b = max(f(y & ~bit) - f(y), 0.0)
        keep = 1.0 if a + b <= 0 else a / (a + b)
        if rng.random() < keep:
            x |= bit
        else:
            y &= ~bit
    return from_mask(x), f(x)


def random_greedy_cardinality(oracle: ValueOracle, k: int, seed: int) -> tuple[frozenset, float]:
    """Random greedy: each round add a uniform pick among the top-k positive marginals.

    The candidate list is padded to ``k`` slots: a slot index is drawn with
    ``below(k)`` and the round adds nothing when it lands past the real
    candidates.  Each candidate is therefore added with probability ``1/k``.
    """
    if not 0 <= k <= oracle.n:
        raise ValueError(f"need 0 <= k <= n, got k={k}")
    rng = SplitMix64(seed)
    f = ValueCache(oracle)
    s = 0
    for _ in range(k):
        base = f(s)
        gains = [f(s | 1 << u) - base if not s >> u & 1 else 0.0 for u in range(oracle.n)]
        cands = top_candidates(gains, k)
        if cands:
            slot = rng.below(k)
            if slot < len(cands):
                s |= 1 << cands[slot]
    return from_mask(s), f(s)
