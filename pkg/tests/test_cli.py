import csv
import io

import numpy as np
import pytest

from submax import card, cli
from submax.extreme_point import BasicSolution
from submax.instances import dump_instance, random_cut_instance, random_submodular_table


def run_cli(capsys, *argv):
    code = cli.main([str(a) for a in argv])
    out, err = capsys.readouterr()
    return code, out, err


def rows_of(text):
    return list(csv.DictReader(io.StringIO(text)))


@pytest.fixture
def table8(tmp_path):
    path = tmp_path / "table8.json"
    path.write_text(dump_instance(random_submodular_table(8, 21)))
    return path


def test_usm_modular_golden(capsys, data_dir, tmp_path):
    report = tmp_path / "r.csv"
    code, _, _ = run_cli(capsys, "usm", data_dir / "modular3.json", "--report", report)
    assert code == 0
    assert report.read_text() == (data_dir / "usm_modular3.csv").read_text()
    row = rows_of(report.read_text())[0]
    assert float(row["value"]) == 5.0 and float(row["ratio"]) == 1.0


def test_usm_solver_modes(capsys, table8):
    supports = {}
    for mode in ("knapsack", "generic"):
        code, out, _ = run_cli(capsys, "usm", table8, "--solver", mode, "--verify")
        assert code == 0
        row = rows_of(out)[0]
        assert float(row["value"]) >= 0.5 * float(row["opt"]) - 1e-9
        supports[mode] = int(row["max_support"])
    assert supports["knapsack"] <= 8 + 1 and supports["generic"] <= 2 * 8 + 1


def test_usm_order_flag(capsys, data_dir):
    code, out, _ = run_cli(capsys, "usm", data_dir / "modular3.json", "--order", "2,0,1")
    assert code == 0 and float(rows_of(out)[0]["value"]) == 5.0
    code, _, err = run_cli(capsys, "usm", data_dir / "modular3.json", "--order", "0,0,1")
    assert code == 2 and "permutation" in err


def test_input_errors(capsys, data_dir, tmp_path):
    assert run_cli(capsys, "usm", data_dir / "malformed.json")[0] == 2
    assert run_cli(capsys, "usm", tmp_path / "missing.json")[0] == 2
    assert run_cli(capsys, "card", data_dir / "modular3.json", "--k", "9")[0] == 2
    assert run_cli(capsys, "usm")[0] == 2
    assert run_cli(capsys, "frobnicate")[0] == 2


def test_card_ratio(capsys, table8):
    code, out, _ = run_cli(capsys, "card", table8, "--k", "3", "--verify")
    assert code == 0
    row = rows_of(out)[0]
    assert float(row["ratio"]) >= 4 / 9
    assert row["k"] == "3"


def test_card_k_zero(capsys, table8):
    code, out, _ = run_cli(capsys, "card", table8, "--k", "0")
    row = rows_of(out)[0]
    assert code == 0 and float(row["value"]) == random_submodular_table(8, 21).eval(0)


def test_verify_suites(capsys):
    assert run_cli(capsys, "verify", "--suite", "lp", "--seeds", "1000")[0] == 0
    assert run_cli(capsys, "verify", "--suite", "card", "--n-max", "10", "--seeds", "60")[0] == 0
    assert run_cli(capsys, "verify", "--suite", "usm", "--n-max", "8", "--seeds", "40")[0] == 0
    assert run_cli(capsys, "verify", "--suite", "tight", "--k", "17")[0] == 0


def test_verify_flags_injected_faulty_solver(capsys, monkeypatch):
    def lazy_solver(lp, tol=1e-9):
        # keep every state where it is: feasible but useless
        x = np.zeros(lp.n_vars)
        x[lp.n_vars - lp.A_eq.shape[0]:] = 1.0
        return BasicSolution(x=x, objective=0.0, nonzero_count=lp.A_eq.shape[0])

    monkeypatch.setattr(card, "solve_basic_optimal", lazy_solver)
    code, out, err = run_cli(capsys, "verify", "--suite", "card", "--seeds", "10", "--n-max", "8")
    assert code == 3
    assert "VIOLATION" in err
    assert '"type":' in out  # counterexample dumped in the instance format


def make_bench_dir(tmp_path, ns=(6, 10, 14)):
    d = tmp_path / "inst"
    d.mkdir()
    for i, n in enumerate(ns):
        (d / f"cut{i:02d}.json").write_text(dump_instance(random_cut_instance(n, i)))
    return d


def test_bench_empty_glob(capsys, tmp_path):
    out = tmp_path / "empty.csv"
    code, _, _ = run_cli(capsys, "bench", "--instances", tmp_path / "none" / "*.json", "--out", out)
    assert code == 0
    assert out.read_text() == ",".join(cli.HEADER) + "\n"


def test_bench_bit_stable_and_thread_independent(capsys, tmp_path, monkeypatch):
    d = make_bench_dir(tmp_path)
    args = ["bench", "--algos", "usm,double-greedy,card,random-greedy", "--instances", d / "*.json",
            "--seeds", "0:3", "--k", "2,3"]
    outputs = []
    for threads in ("1", "1", "4"):
        monkeypatch.setenv("SUBMAX_THREADS", threads)
        out = tmp_path / f"b{len(outputs)}.csv"
        assert run_cli(capsys, *args, "--out", out)[0] == 0
        outputs.append(out.read_bytes())
    assert outputs[0] == outputs[1] == outputs[2]
    rows = rows_of(outputs[0].decode())
    # per instance: 1 usm + 3 double-greedy + 2 card + 6 random-greedy
    assert len(rows) == 3 * 12
    assert all(r["ms"] == "" for r in rows)


def test_bench_partial_failure(capsys, tmp_path, data_dir):
    d = make_bench_dir(tmp_path, ns=(6,))
    (d / "zz_bad.json").write_text((data_dir / "malformed.json").read_text())
    out = tmp_path / "b.csv"
    code, _, err = run_cli(capsys, "bench", "--algos", "card", "--k", "2,7", "--instances", d / "*.json", "--out", out)
    assert code == 1
    rows = rows_of(out.read_text())
    assert [r["value"] for r in rows].count("FAILED") == 2  # unreadable file + k > n
    assert any(r["value"] not in ("", "FAILED") for r in rows)
    assert "row failed" in err


def test_bench_timing_column(capsys, tmp_path):
    d = make_bench_dir(tmp_path, ns=(5,))
    code, out, _ = run_cli(capsys, "bench", "--instances", d / "*.json", "--timing")
    assert code == 0 and all(float(r["ms"]) >= 0 for r in rows_of(out))


def test_bench_rejects_unknown_algo(capsys, tmp_path):
    assert run_cli(capsys, "bench", "--algos", "magic", "--instances", tmp_path / "*.json")[0] == 2


def test_tight_trace(capsys, tmp_path):
    out = tmp_path / "t.csv"
    code, _, err = run_cli(capsys, "tight", "--k", "32", "--ell", "17", "--out", out)
    assert code == 0 and "final ratio" in err
    rows = rows_of(out.read_text())
    assert len(rows) == 33 and rows[-1]["i"] == "final"
    assert float(rows[-1]["ratio"]) <= np.exp(-1) + 17 / 32
    assert run_cli(capsys, "tight", "--k", "10")[0] == 2
