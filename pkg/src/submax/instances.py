"""Seeded random instances and the JSON instance file format.

File format
-----------
One JSON object per file, discriminated by ``type``::

    {"type": "table",    "n": 2, "values": [0, 1, 1, 1.5]}
    {"type": "modular",  "n": 3, "weights": [2, -1, 3]}
    {"type": "cut",      "n": 3, "edges": [[0, 1, 1.0], [1, 2, 1.0], [0, 2, 1.0]]}
    {"type": "coverage", "n": 2, "sets": [[0, 1], [1, 2]], "weights": [1, 1, 1]}
    {"type": "tight",    "n": 40, "k": 20, "ell": 17}

``values`` is indexed by bitmask.  Cut edges are ``[u, v, weight]`` (weight
optional, default 1).  Coverage ``weights`` is optional (unit weights).
``tight`` is the hard instance of :mod:`submax.tightcase` (``ell`` optional).  An
optional ``"id"`` string names the instance in reports.

Random tables
-------------
:func:`random_submodular_table` draws, from ``numpy.random.default_rng(seed)``:

1. a graph cut: every pair joined with probability 1/2, weight ~ U(0, 1);
2. a coverage function: ``n + 2`` universe items, each element covers each
   item with probability 0.3, item weights ~ U(0, 1);
3. a concave-of-modular term ``sqrt(sum_{u in S} w_u)``, ``w ~ U(0, 1)``;
4. a signed modular term with weights ~ U(-1, 1);

mixes them with coefficients ~ U(0, 1) (the modular one ~ U(0, 0.5)),
tabulates the sum, shifts it so the minimum is 0 and adds ``U(0, 0.1)`` to
every value.  The table is accepted only if the exhaustive submodularity
check passes; otherwise the next draw from the same stream is used.
"""
from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .errors import InvalidInputError
from .oracle import (
    MAX_CHECK_N,
    ValueOracle,
    make_coverage_function,
    make_cut_function,
    make_modular,
    make_table_function,
    submodularity_violation,
)

_MAX_TRIES = 100


def _candidate_table(n: int, rng: np.random.Generator) -> np.ndarray:
    masks = np.arange(1 << n)
    member = ((masks[:, None] >> np.arange(n)) & 1).astype(bool)

    weights = np.triu(rng.uniform(0, 1, (n, n)) * (rng.uniform(0, 1, (n, n)) < 0.5), 1)
    inside = member.astype(float)
    cut = np.einsum("si,ij,sj->s", inside, weights, 1 - inside) + np.einsum(
        "si,ij,sj->s", 1 - inside, weights, inside)

    items = n + 2
    covers = rng.uniform(0, 1, (n, items)) < 0.3
    item_w = rng.uniform(0, 1, items)
    covered = (member.astype(int) @ covers.astype(int)) > 0
    coverage = covered.astype(float) @ item_w

    concave = np.sqrt(inside @ rng.uniform(0, 1, n))
    modular = inside @ rng.uniform(-1, 1, n)

    coef = rng.uniform(0, 1, 3)
    vals = coef[0] * cut + coef[1] * coverage + coef[2] * concave + rng.uniform(0, 0.5) * modular
    return vals - vals.min() + rng.uniform(0, 0.1)


def random_submodular_table(n: int, seed: int) -> ValueOracle:
    """Seeded non-negative submodular table on ``n <= 14`` elements."""
    if not 0 <= n <= MAX_CHECK_N:
        raise InvalidInputError(f"random tables need 0 <= n <= {MAX_CHECK_N}")
    rng = np.random.default_rng(seed)
    for _ in range(_MAX_TRIES):
        vals = _candidate_table(n, rng)
        if submodularity_violation(vals) <= 1e-12:
            oracle = make_table_function(vals)
            oracle.spec["id"] = f"table-n{n}-s{seed}"
            return oracle
    raise RuntimeError(f"no submodular table accepted after {_MAX_TRIES} draws")


def random_cut_instance(n: int, seed: int, p: float = 0.5) -> ValueOracle:
    rng = np.random.default_rng(seed)
    edges = [[u, v, round(float(rng.uniform(0.1, 1.0)), 6)]
             for u in range(n) for v in range(u + 1, n) if rng.uniform() < p]
    oracle = make_cut_function(edges, n=n)
    oracle.spec["id"] = f"cut-n{n}-s{seed}"
    return oracle


def random_coverage_instance(n: int, seed: int, universe: int | None = None,
                             p: float = 0.3) -> ValueOracle:
    rng = np.random.default_rng(seed)
    universe = universe or 2 * n
    sets = [[a for a in range(universe) if rng.uniform() < p] for _ in range(n)]
    weights = [round(float(x), 6) for x in rng.uniform(0.1, 1.0, universe)]
    oracle = make_coverage_function(sets, weights)
    oracle.spec["id"] = f"coverage-n{n}-s{seed}"
    return oracle


def oracle_from_dict(doc: dict) -> ValueOracle:
    """Build an oracle from a parsed instance document."""
    if not isinstance(doc, dict):
        raise InvalidInputError("instance must be a JSON object")
    kind = doc.get("type")
    try:
        if kind == "table":
            oracle = make_table_function(doc["values"])
        elif kind == "modular":
            oracle = make_modular(doc["weights"])
        elif kind == "cut":
            oracle = make_cut_function(doc["edges"], n=doc.get("n"))
        elif kind == "coverage":
            oracle = make_coverage_function(doc["sets"], doc.get("weights"))
        elif kind == "tight":
            from .tightcase import DEFAULT_ELL, make_tight_oracle
            oracle = make_tight_oracle(int(doc["k"]), float(doc.get("ell", DEFAULT_ELL)))
        else:
            raise InvalidInputError(f"unknown instance type {kind!r}")
    except KeyError as exc:
        raise InvalidInputError(f"{kind} instance missing field {exc.args[0]!r}") from None
    except (TypeError, ValueError) as exc:
        if isinstance(exc, InvalidInputError):
            raise
        raise InvalidInputError(f"malformed {kind} instance: {exc}") from None
    if "n" in doc and doc["n"] != oracle.n:
        raise InvalidInputError(f"declared n={doc['n']} but data implies n={oracle.n}")
    if "id" in doc:
        oracle.spec["id"] = str(doc["id"])
    return oracle


def load_instance(path: str | Path) -> ValueOracle:
    path = Path(path)
    try:
        doc = json.loads(path.read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise InvalidInputError(f"cannot read instance {path}: {exc}") from None
    oracle = oracle_from_dict(doc)
    oracle.spec.setdefault("id", path.stem)
    return oracle


def dump_instance(oracle: ValueOracle) -> str:
    """Serialize an oracle built by this package back to the file format."""
    if oracle.spec is None:
        raise InvalidInputError("oracle has no serializable description")
    return json.dumps(oracle.spec, sort_keys=True)
