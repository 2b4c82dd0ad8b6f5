import csv
import io

import pytest

from eftsim.cli import main
from eftsim.tree_core import FamilyTree


def run(argv, capsys):
    code = main(argv)
    out, err = capsys.readouterr()
    return code, out, err


def test_verify_critical_egwt(capsys):
    code, out, err = run(["verify", "--suite", "critical-egwt", "--seed", "7", "--n", "100000"], capsys)
    assert code == 0, err
    rows = list(csv.DictReader(io.StringIO(out)))
    assert rows and all(r["verdict"] == "pass" for r in rows)
    assert list(rows[0]) == ["test_name", "lhs", "rhs", "stderr", "z", "N", "verdict"]


def test_sample_is_reproducible(capsys):
    argv = ["sample", "--family", "egwt", "--pi", "0:1/2,2:1/2", "--spine", "6", "--seed", "1"]
    _, a, _ = run(argv, capsys)
    _, b, _ = run(argv, capsys)
    assert a == b and a
    t = FamilyTree.from_text(a)
    assert t.valid_radius >= 6


def test_sample_to_directory(tmp_path, capsys):
    code, out, _ = run(["sample", "--family", "canopy", "--seed", "2", "--n", "3",
                        "--out", str(tmp_path)], capsys)
    assert code == 0 and out == ""
    assert (tmp_path / "trees.txt").read_text()


def test_out_from_environment(tmp_path, monkeypatch, capsys):
    monkeypatch.setenv("EFTSIM_OUT", str(tmp_path))
    assert run(["sample", "--family", "gwt", "--seed", "3"], capsys)[0] == 0
    assert (tmp_path / "trees.txt").exists()


def test_classify_random_graphs(capsys):
    code, out, err = run(["classify", "--random-functional-graphs", "1000", "--max-v", "50",
                          "--seed", "4"], capsys)
    assert code == 0
    rows = list(csv.DictReader(io.StringIO(out)))
    assert {r["ok"] for r in rows} == {"1"}
    assert len({r["graph_id"] for r in rows}) == 1000
    assert "all unique-cycle" in err


def test_classify_drainage(capsys):
    code, out, _ = run(["classify", "--drainage", "6", "4", "--seed", "5"], capsys)
    assert code == 0 and out.startswith("graph_id,component_id")


def test_sigma_exact(capsys):
    code, out, _ = run(["sigma", "--exact", "--order", "1", "--max-vertices", "3", "--seed", "0"], capsys)
    assert code == 0 and out.strip()


def test_sigma_mc(capsys):
    code, out, _ = run(["sigma", "--order", "1", "--n", "50", "--seed", "6"], capsys)
    assert code == 0
    assert out.count("\n") > 0


def test_dl(tmp_path, capsys):
    code, _, err = run(["dl", "--pi1", "1:1/2,3:1/2", "--pi2", "1:1", "--windows", "2",
                        "--n", "20000", "--seed", "8", "--out", str(tmp_path)], capsys)
    assert code == 0, err
    text = (tmp_path / "dl_windows.txt").read_text()
    assert text.count("# window") == 2 and "identities=ok" in text
    assert (tmp_path / "dl_report.csv").read_text().startswith("test_name,")


def test_params_file(tmp_path, capsys):
    p = tmp_path / "run.txt"
    p.write_text('family = "gwt"\npi = [[0, 1, 2], [2, 1, 2]]\ndepth = 3\n')
    a = run(["sample", "--params", str(p), "--seed", "9"], capsys)[1]
    b = run(["sample", "--family", "gwt", "--pi", "0:1/2,2:1/2", "--depth", "3", "--seed", "9"],
            capsys)[1]
    assert a == b


@pytest.mark.parametrize("argv,kind", [
    (["sample", "--family", "egwt"], "UsageError"),
    (["sample", "--seed", "1", "--pi", "0:1/2"], "ValueError"),
    (["sample", "--seed", "1", "--params", "/nonexistent/p.txt"], "UsageError"),
    (["verify", "--seed", "1"], "UsageError"),
    (["classify", "--seed", "1"], "UsageError"),
    (["sample", "--seed", "1", "--n", "0"], "UsageError"),
    (["dl", "--seed", "1", "--pi2", "0:1/2,2:1/2"], "ValueError"),
])
def test_error_lines(argv, kind, capsys):
    code, out, err = run(argv, capsys)
    assert code == 2
    lines = err.strip().splitlines()
    assert len(lines) == 1 and lines[0].startswith(f"ERROR {kind}:")


def test_unknown_param_key(tmp_path, capsys):
    p = tmp_path / "bad.txt"
    p.write_text("colour = 3\n")
    code, _, err = run(["sample", "--params", str(p), "--seed", "1"], capsys)
    assert code == 2 and "colour" in err


def test_failed_verdict_exits_one(capsys, monkeypatch):
    import eftsim.cli as cli
    from eftsim.verify import EstimatorReport

    monkeypatch.setattr(cli, "run_suite", lambda *a: [EstimatorReport.exact("x", 1, 2, 1)])
    code, out, err = run(["verify", "--suite", "critical-egwt", "--seed", "1"], capsys)
    assert code == 1 and "FAIL x" in err
