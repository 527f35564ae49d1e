"""Explicit finite distributions over algorithm states.

A distribution is an ordered multiset of ``(p, state)`` tuples.  States are
hashable and orderable: a bitmask ``int`` for set states, a ``(X, Y)`` pair of
bitmasks for double-greedy states.  Identical states may appear more than
once until :func:`unify` merges them.
"""
from __future__ import annotations

from typing import Callable, Generic, Hashable, Iterable, Iterator, TypeVar

PROB_FLOOR = 1e-12
MASS_TOL = 1e-9

State = TypeVar("State", bound=Hashable)


class WeightedDistribution(Generic[State]):
    """Multiset of ``(probability, state)`` tuples.

    Construction does not normalize or validate; call :meth:`validate` or
    :func:`unify` for that.
    """

    __slots__ = ("probs", "states")

    def __init__(self, tuples: Iterable[tuple[float, State]] = ()):
        self.probs: list[float] = []
        self.states: list[State] = []
        for p, s in tuples:
            self.probs.append(float(p))
            self.states.append(s)

    @classmethod
    def point(cls, state: State) -> "WeightedDistribution[State]":
        return cls([(1.0, state)])

    def __len__(self) -> int:
        return len(self.states)

    def __iter__(self) -> Iterator[tuple[float, State]]:
        return zip(self.probs, self.states)

    def __repr__(self) -> str:
        body = ", ".join(f"({p:.6g}, {s!r})" for p, s in self)
        return f"WeightedDistribution([{body}])"

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, WeightedDistribution):
            return NotImplemented
        return self.probs == other.probs and self.states == other.states

    def support(self) -> set:
        return set(self.states)

    def as_dict(self) -> dict:
        out: dict = {}
        for p, s in self:
            out[s] = out.get(s, 0.0) + p
        return out

    def validate(self, tol: float = MASS_TOL) -> None:
        if any(p <= PROB_FLOOR for p in self.probs):
            raise ValueError("distribution holds a non-positive or dust probability")
        mass = total_mass(self)
        if abs(mass - 1.0) > tol:
            raise ValueError(f"distribution mass {mass!r} differs from 1")


def total_mass(dist: WeightedDistribution) -> float:
    return float(sum(dist.probs))


def unify(dist: WeightedDistribution, floor: float = PROB_FLOOR) -> WeightedDistribution:
    """Merge identical states, drop dust, renormalize, sort states ascending."""
    merged = dist.as_dict()
    kept = {s: p for s, p in merged.items() if p > floor}
    mass = sum(kept.values())
    if mass <= 0:
        raise ValueError("distribution has no mass above the probability floor")
    return WeightedDistribution((kept[s] / mass, s) for s in sorted(kept))


def expectation(dist: WeightedDistribution, phi: Callable[[State], float]) -> float:
    return float(sum(p * phi(s) for p, s in dist))


def prob_not_containing(dist: WeightedDistribution, u: int) -> float:
    """Pr[u not in S] for a distribution over bitmask states."""
    bit = 1 << u
    return float(sum(p for p, s in dist if not s & bit))


def prob_containing(dist: WeightedDistribution, u: int) -> float:
    bit = 1 << u
    return float(sum(p for p, s in dist if s & bit))


def _state_hex(state) -> str:
    if isinstance(state, tuple):
        return ":".join(format(part, "x") for part in state)
    return format(state, "x")


def dump(dist: WeightedDistribution) -> str:
    """Debug dump: one ``p<TAB>hex`` line per tuple, sorted by state.

    Pair states print as ``xhex:yhex``.  Probabilities use ``repr`` so the
    output round-trips exactly.
    """
    rows = sorted(zip(dist.states, dist.probs), key=lambda t: t[0])
    return "".join(f"{p!r}\t{_state_hex(s)}\n" for s, p in rows)


def load_dump(text: str, pairs: bool = False) -> WeightedDistribution:
    tuples = []
    for line in text.splitlines():
        if not line.strip():
            continue
        p, key = line.split("\t")
        if pairs:
            state = tuple(int(part, 16) for part in key.split(":"))
        else:
            state = int(key, 16)
        tuples.append((float(p), state))
    return WeightedDistribution(tuples)
