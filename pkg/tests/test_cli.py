import json

import pytest

from pdtlab import ledger
from pdtlab.circuits import MAJ3_NETLIST
from pdtlab.cli import main
from pdtlab.core import build_named, read_truth_table
from pdtlab.pdt import read_tree, verify_tree


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_measures_json(capsys):
    code, out, _ = run(capsys, "measures", "--fn", "maj:7", "--json")
    assert code == 0
    obj = json.loads(out)
    assert (obj["gran"], obj["spar"], obj["deg2"]) == (4, 64, 4)


def test_measures_anf_and_spectrum(capsys, tmp_path):
    spec = tmp_path / "s.txt"
    code, out, _ = run(capsys, "measures", "--fn", "and:2", "--anf", "--spectrum-out", str(spec))
    assert code == 0 and "anf:" in out
    lines = spec.read_text().splitlines()
    assert len(lines) == 4


def test_solve_and_witness(capsys, tmp_path):
    w = tmp_path / "w.tree"
    code, out, _ = run(capsys, "solve", "--fn", "maj:5", "--witness-out", str(w))
    assert code == 0
    obj = json.loads(out)
    assert obj["exact_depth"] == 4 and obj["witness_verified"]
    assert verify_tree(read_tree(w, 5), build_named("maj", 5)).ok


def test_solve_budget_interval_exit_1(capsys):
    code, out, _ = run(capsys, "solve", "--fn", "random:7,3", "--max-nodes", "1")
    obj = json.loads(out)
    if "interval" in obj:
        assert code == 1
        lo, hi = obj["interval"]
        assert lo <= hi
    else:
        assert code == 0


def test_strategy(capsys, tmp_path):
    t = tmp_path / "t.tree"
    code, out, _ = run(capsys, "strategy", "--name", "thr3", "--n", "10", "--json", "--emit-tree", str(t))
    assert code == 0
    obj = json.loads(out)
    assert obj["correct"] and obj["worst_case"] == 9
    assert verify_tree(read_tree(t, 10), build_named("thr", 10, 3)).ok


def test_strategy_missing_n(capsys):
    code, _, err = run(capsys, "strategy", "--name", "maj")
    assert code == 2 and "--n" in err


def test_reduce_thr_workflow(capsys, tmp_path):
    t = tmp_path / "thr3.tree"
    r = tmp_path / "thr2.tree"
    assert run(capsys, "strategy", "--name", "thr3", "--n", "10", "--emit-tree", str(t))[0] == 0
    code, out, _ = run(capsys, "reduce-thr", "--tree", str(t), "--n", "8", "--k", "2", "--json", "--emit-tree", str(r))
    assert code == 0
    obj = json.loads(out)
    assert obj["correct"] and obj["worst_case"] <= 8
    assert verify_tree(read_tree(r, 8), build_named("thr", 8, 2)).ok


def test_refute_shallow_tree(capsys, tmp_path):
    t = tmp_path / "t.tree"
    t.write_text("(q 1 (0 (leaf 1)) (1 (leaf -1)))\n")
    code, out, _ = run(capsys, "refute", "--fn", "maj:3", "--tree", str(t), "--json")
    assert code == 0
    obj = json.loads(out)
    assert obj["refuted"] and obj["rechecked"]


def test_refute_not_applicable(capsys, tmp_path):
    f = tmp_path / "f.pdttt"
    assert run(capsys, "export", "--fn", "maj:3", "--out", str(f))[0] == 0
    t = tmp_path / "deep.tree"
    assert run(capsys, "strategy", "--name", "maj", "--n", "3", "--emit-tree", str(t))[0] == 0
    code, out, _ = run(capsys, "refute", "--file", str(f), "--tree", str(t), "--json")
    assert code == 1 and json.loads(out)["refuted"] is False


def test_circuit(capsys, tmp_path):
    net = tmp_path / "maj3.net"
    net.write_text(MAJ3_NETLIST)
    code, out, _ = run(capsys, "circuit", "--file", str(net), "--to-pdt", "--json")
    assert code == 0
    obj = json.loads(out)
    assert obj["and_count"] == 1 and obj["worst_case"] == 2 and obj["correct"]


def test_export_roundtrip(capsys, tmp_path):
    out = tmp_path / "ip.pdttt"
    assert run(capsys, "export", "--fn", "ip:2", "--out", str(out))[0] == 0
    assert read_truth_table(out) == build_named("ip", 2)


@pytest.mark.parametrize(
    "argv",
    [
        ["measures"],
        ["measures", "--fn", "maj:3", "--file", "x"],
        ["measures", "--fn", "nosuch:3"],
        ["measures", "--file", "/nonexistent/file"],
        ["circuit", "--file", "/nonexistent/file"],
    ],
)
def test_bad_input_exit_2(capsys, argv):
    assert run(capsys, *argv)[0] == 2


def test_bad_tree_file(capsys, tmp_path):
    t = tmp_path / "bad.tree"
    t.write_text("(? 1 (leaf 1)")
    assert run(capsys, "refute", "--fn", "maj:3", "--tree", str(t))[0] == 2


def test_ledger_append_only(capsys, tmp_path):
    path = tmp_path / "runs.jsonl"
    for _ in range(2):
        assert run(capsys, "measures", "--fn", "thr:10,3", "--ledger", str(path))[0] == 0
    first = path.read_text()
    assert run(capsys, "solve", "--fn", "maj:4", "--ledger", str(path))[0] == 0
    assert path.read_text().startswith(first)
    rows = ledger.read(path)
    assert [r["kind"] for r in rows] == ["measures", "measures", "solve"]
    keys = ("function_id", "n", "spar", "gran", "deg2", "bounds")
    assert all(rows[0][k] == rows[1][k] for k in keys)
    assert rows[0]["gran"] == 7 and rows[2]["exact_depth"] == 4


def test_ledger_env(capsys, tmp_path, monkeypatch):
    path = tmp_path / "env.jsonl"
    monkeypatch.setenv(ledger.LEDGER_ENV, str(path))
    assert run(capsys, "strategy", "--name", "maj", "--n", "6")[0] == 0
    rows = ledger.read(path)
    assert rows[0]["kind"] == "strategy" and rows[0]["function_id"] == "maj:6"


def test_ledger_content_id_for_files(capsys, tmp_path):
    f = tmp_path / "f.pdttt"
    path = tmp_path / "l.jsonl"
    run(capsys, "export", "--fn", "maj:5", "--out", str(f))
    run(capsys, "measures", "--file", str(f), "--ledger", str(path))
    assert ledger.read(path)[0]["function_id"].startswith("sha256:")


def test_ledger_validation(tmp_path):
    with pytest.raises(ledger.LedgerError):
        ledger.validate({"kind": "x"})
    good = {"kind": "solve", "function_id": "a", "n": 1, "started": "s", "finished": "f", "tool_version": "v"}
    ledger.validate(good)
    with pytest.raises(ledger.LedgerError):
        ledger.validate({**good, "exact_depth": 1, "interval": [0, 1]})
    with pytest.raises(ledger.LedgerError):
        ledger.validate({**good, "interval": [3, 1]})
    p = tmp_path / "broken.jsonl"
    p.write_text("{not json\n")
    with pytest.raises(ledger.LedgerError):
        ledger.read(p)


def test_suite_deterministic(capsys):
    argv = ["suite", "--seed", "7", "--cases", "5", "--max-n", "6", "--json"]
    code1, out1, _ = run(capsys, *argv)
    code2, out2, _ = run(capsys, *argv)
    assert code1 == code2 == 0
    d1 = [json.loads(l)["case_digest"] for l in out1.splitlines() if l.startswith("{")]
    d2 = [json.loads(l)["case_digest"] for l in out2.splitlines() if l.startswith("{")]
    assert d1 == d2 and len(d1) == 6


def test_suite_seed_changes_cases(capsys):
    base = ["suite", "--cases", "5", "--max-n", "6", "--json", "--only", "core"]
    out_a = run(capsys, *base, "--seed", "1")[1]
    out_b = run(capsys, *base, "--seed", "2")[1]
    assert out_a.splitlines()[0] != out_b.splitlines()[0]


def test_corollary(capsys):
    code, out, _ = run(capsys, "corollary", "--max-n", "12")
    assert code == 0 and out.count("\n") == 12


def test_argparse_rejects_unknown_command():
    with pytest.raises(SystemExit) as exc:
        main(["frobnicate"])
    assert exc.value.code == 2
