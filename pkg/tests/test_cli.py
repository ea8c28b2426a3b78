import csv
import io
import json

import pytest

from congestcut import cli
from congestcut import graph as G
from congestcut.errors import BudgetViolation, NoCutFound
from congestcut.lowerbound import gen_weighted_cut_instance


@pytest.fixture
def files(tmp_path):
    out = {}
    for name, g in {
        "dumbbell": G.dumbbell(),
        "cycle16": G.cycle(16),
        "instance": gen_weighted_cut_instance(16, 4, 1, {1, 2}, {2, 3}),
    }.items():
        path = tmp_path / f"{name}.txt"
        G.write_graph(g, path)
        out[name] = str(path)
    return out


def run(capsys, *argv):
    code = cli.main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def test_exact_dumbbell(capsys, files):
    code, out, _ = run(capsys, "exact", files["dumbbell"])
    report = json.loads(out)
    assert code == 0 and report["weight"] == 1 and report["schema"] == cli.SCHEMA


def test_lb_verify(capsys, files):
    code, out, _ = run(capsys, "lb-verify", files["instance"], "--k", "4")
    rec = json.loads(out)["records"][0]
    assert code == 0 and rec["c_observed"] <= 2


def test_matula_cycle(capsys, files):
    code, out, _ = run(capsys, "matula", files["cycle16"], "--epsilon", "0.5", "--seed", "7")
    rec = json.loads(out)["records"][0]
    assert code == 0 and rec["cut_weight"] == 2 and rec["ratio"] == 1.0


def test_ledger_only_drops_measured_rounds(capsys, files):
    code, out, _ = run(capsys, "approx-conn", files["dumbbell"], "--seed", "1", "--ledger-only")
    rec = json.loads(out)["records"][0]
    assert code == 0 and "measured_rounds" not in rec and rec["ledger_rounds"] > 0


def test_randomized_command_needs_seed(capsys, files):
    with pytest.raises(SystemExit) as info:
        cli.main(["matula", files["cycle16"]])
    assert info.value.code == 2


def test_missing_file_exit_2(capsys, tmp_path):
    code, _, err = run(capsys, "exact", str(tmp_path / "nope.txt"))
    assert code == 2 and err


def test_no_cut_exit_3(capsys, files, monkeypatch):
    import congestcut.matula as M

    def boom(*a, **k):
        raise NoCutFound("nothing passed")

    monkeypatch.setattr(M, "matula_mincut", boom)
    code, _, err = run(capsys, "matula", files["cycle16"], "--seed", "1")
    assert code == 3 and "no cut" in err


def test_budget_violation_exit_4(capsys, files, monkeypatch):
    import congestcut.layering as L

    def boom(*a, **k):
        raise BudgetViolation(0, 1, 99, 32)

    monkeypatch.setattr(L, "layering_mincut", boom)
    code, _, err = run(capsys, "layering", files["dumbbell"], "--seed", "1")
    assert code == 4 and "budget" in err


def test_csv_output(capsys, files, tmp_path):
    report = tmp_path / "r.csv"
    code, _, _ = run(capsys, "sample-exp", files["cycle16"], "--seed", "3", "--trials", "10", "--p", "1", "0.1", "--out", "csv", "--report", str(report))
    rows = list(csv.DictReader(io.StringIO(report.read_text())))
    assert code == 0 and len(rows) == 2
    assert list(rows[0].keys()) == cli.CSV_COLUMNS
    assert float(rows[0]["value"]) == 1.0


def test_gen_writes_graph_and_sidecar(capsys, tmp_path):
    path = tmp_path / "h.txt"
    code, out, _ = run(capsys, "gen", "cut-instance", "--n", "16", "--k", "4", "--X", "1,2", "--Y", "2,3", "--graph-out", str(path))
    assert code == 0
    side = json.loads((tmp_path / "h.txt.json").read_text())
    assert side["expected_lambda"] == 4
    assert G.lambda_of(G.read_graph(path)) == 4


def test_diam_exp(capsys, tmp_path):
    path = tmp_path / "hp.txt"
    run(capsys, "gen", "dissemination", "--n", "32", "--lam", "2", "--which", "Hprime", "--graph-out", str(path))
    code, out, _ = run(capsys, "diam-exp", str(path), "--seed", "2", "--trials", "5", "--p", "0", "--threshold", "3")
    report = json.loads(out)
    assert code == 0 and report["aggregate"]["disconnected"] == 5


def test_suite_subset(capsys):
    code, out, err = run(capsys, "suite", "--criteria", "1,12")
    assert code == 0 and json.loads(out)["aggregate"]["all_passed"]
    assert "criterion  1:" in err and "criterion 12:" in err
