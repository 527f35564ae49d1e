import itertools
import json

import numpy as np
import pytest

from submax.errors import CapacityError, InvalidInputError
from submax.instances import (
    dump_instance,
    load_instance,
    oracle_from_dict,
    random_coverage_instance,
    random_cut_instance,
    random_submodular_table,
)
from submax.oracle import (
    ValueOracle,
    as_mask,
    brute_force_opt,
    check_nonnegative,
    check_submodular,
    from_mask,
    make_coverage_function,
    make_cut_function,
    make_modular,
    make_table_function,
    submodularity_violation,
)


def naive_violation(values):
    """max over all pairs of f(A|B) + f(A&B) - f(A) - f(B)."""
    size = len(values)
    return max(values[a | b] + values[a & b] - values[a] - values[b]
               for a in range(size) for b in range(size))


def naive_dr_violation(values, n):
    """max over u, A <= B (u not in B) of f(B+u) - f(B) - (f(A+u) - f(A))."""
    worst = -np.inf
    for u in range(n):
        bit = 1 << u
        for b in range(1 << n):
            if b & bit:
                continue
            a = b
            while True:
                worst = max(worst, values[b | bit] - values[b] - values[a | bit] + values[a])
                if a == 0:
                    break
                a = (a - 1) & b
    return worst


def naive_opt(values, n, k=None):
    best = -np.inf
    for r in range(n + 1 if k is None else k + 1):
        for combo in itertools.combinations(range(n), r):
            best = max(best, values[sum(1 << u for u in combo)])
    return best


def test_mask_roundtrip():
    assert as_mask({0, 2}, 3) == 0b101
    assert as_mask(0b11, 2) == 3
    assert from_mask(0b1010) == frozenset({1, 3})
    with pytest.raises(InvalidInputError):
        as_mask({3}, 3)
    with pytest.raises(InvalidInputError):
        as_mask(8, 3)


def test_query_counting():
    f = make_modular([1.0, 2.0, 3.0])
    assert f.query_count == 0
    f.eval({0})
    f({1})
    assert f.query_count == 2
    assert f.marginal(2, {0}) == 3.0
    assert f.query_count == 4
    f.values()
    assert f.query_count == 4 + 8
    g = f.copy()
    assert g.query_count == 0 and f.query_count == 12
    f.reset_count()
    assert f.query_count == 0


def test_table_function_copies_and_validates():
    vals = np.array([0.0, 1.0, 1.0, 1.5])
    f = make_table_function(vals)
    vals[3] = 100.0
    assert f.eval(3) == 1.5
    with pytest.raises(InvalidInputError):
        make_table_function([0, 1, 2])
    with pytest.raises(InvalidInputError):
        make_table_function([])


def test_family_values_by_hand():
    tri = make_cut_function([[0, 1], [1, 2], [0, 2]])
    assert [tri.eval(m) for m in range(8)] == [0, 2, 2, 2, 2, 2, 2, 0]
    weighted = make_cut_function([[0, 1, 2.5]], n=3)
    assert weighted.n == 3 and weighted.eval({0}) == 2.5 and weighted.eval({2}) == 0
    cov = make_coverage_function([[0, 1], [1, 2]], [1.0, 2.0, 4.0])
    assert cov.eval(set()) == 0 and cov.eval({0}) == 3 and cov.eval({1}) == 6 and cov.eval({0, 1}) == 7
    mod = make_modular([2, -1, 3])
    assert mod.eval({0, 2}) == 5 and mod.eval({1}) == -1


@pytest.mark.parametrize("seed", range(30))
def test_violation_matches_naive_definitions(seed):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(2, 6))
    if seed % 2:
        vals = random_submodular_table(n, seed).values()
    else:
        vals = rng.uniform(0, 1, 1 << n)
    got = submodularity_violation(vals)
    assert got == pytest.approx(naive_dr_violation(vals, n), abs=1e-12)
    # the pairwise and diminishing-returns forms agree on the yes/no question
    assert (got <= 1e-12) == (naive_violation(vals) <= 1e-12)


def test_check_submodular_rejects_supermodular():
    sq = ValueOracle(4, lambda m: bin(m).count("1") ** 2)
    assert not check_submodular(sq)
    assert check_submodular(make_cut_function([[0, 1], [2, 3], [1, 2]]))
    assert check_nonnegative(make_cut_function([[0, 1]]))
    assert not check_nonnegative(make_modular([1, -1]))


def test_checks_refuse_large_n():
    big = make_modular([1.0] * 15)
    with pytest.raises(CapacityError):
        check_submodular(big)
    with pytest.raises(CapacityError):
        brute_force_opt(make_modular([1.0] * 21))


@pytest.mark.parametrize("seed", range(20))
def test_brute_force_matches_enumeration(seed):
    n = 2 + seed % 6
    f = random_submodular_table(n, seed)
    vals = f.copy().values()
    S, v = brute_force_opt(f)
    assert v == naive_opt(vals, n) and vals[as_mask(S, n)] == v
    k = 1 + seed % n
    S, v = brute_force_opt(f, cardinality_bound=k)
    assert len(S) <= k and v == naive_opt(vals, n, k)


def test_brute_force_ties_to_smallest_mask():
    f = make_modular([1.0, 1.0])
    assert brute_force_opt(f, cardinality_bound=1) == (frozenset({0}), 1.0)


@pytest.mark.parametrize("n", [2, 5, 8, 10])
def test_random_tables_are_reproducible_and_valid(n):
    a = random_submodular_table(n, 7).values()
    b = random_submodular_table(n, 7).values()
    assert np.array_equal(a, b)
    assert a.min() >= 0
    assert submodularity_violation(a) <= 1e-12
    assert not np.array_equal(a, random_submodular_table(n, 8).values())


def test_random_families_submodular():
    for seed in range(5):
        assert check_submodular(random_cut_instance(7, seed))
        assert check_submodular(random_coverage_instance(7, seed))


def test_instance_roundtrip(tmp_path):
    for f in [random_submodular_table(3, 1), random_cut_instance(5, 2), random_coverage_instance(4, 3),
              make_modular([2, -1, 3])]:
        doc = json.loads(dump_instance(f))
        g = oracle_from_dict(doc)
        assert np.array_equal(f.copy().values(), g.values())
        path = tmp_path / "inst.json"
        path.write_text(dump_instance(f))
        assert np.array_equal(load_instance(path).values(), f.copy().values())


def test_golden_instance_files(data_dir):
    f = load_instance(data_dir / "modular3.json")
    assert f.spec["id"] == "modular3" and f.n == 3
    t = load_instance(data_dir / "table2.json")
    assert list(t.values()) == [0.0, 1.0, 1.0, 1.5]
    assert t.spec["id"] == "table2"
    c = load_instance(data_dir / "triangle_cut.json")
    assert c.eval({0}) == 2.0 and c.eval({0, 1, 2}) == 0.0
    tight = oracle_from_dict({"type": "tight", "n": 8, "k": 4})
    assert tight.eval(0b1111) == pytest.approx(1.0)


@pytest.mark.parametrize("doc", [
    [],
    {"type": "nope"},
    {"type": "table"},
    {"type": "table", "values": [1, 2, 3]},
    {"type": "modular", "n": 4, "weights": [1, 2]},
    {"type": "cut", "edges": [[0]]},
    {"type": "coverage", "sets": 5},
])
def test_malformed_instances(doc):
    with pytest.raises(InvalidInputError):
        oracle_from_dict(doc)


def test_unreadable_file(tmp_path, data_dir):
    with pytest.raises(InvalidInputError):
        load_instance(tmp_path / "missing.json")
    with pytest.raises(InvalidInputError):
        load_instance(data_dir / "malformed.json")
