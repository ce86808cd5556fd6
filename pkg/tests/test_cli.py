import json

import pytest

from oracles import recursive_value
from treeeval.bp import BranchingProgram, parse_dot
from treeeval.cli import main
from treeeval.tree import TreeShape, random_instance, save_instance


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_pebble_find_prints_cost_and_witness(capsys):
    code, out, _ = run(capsys, "pebble", "find", "--d", "2", "--h", "3", "--variant", "fractional", "--c", "2")
    assert code == 0
    assert "5/2" in out
    assert "finish" in out


def test_verify_exhaustive(capsys):
    code, out, _ = run(capsys, "verify", "--d", "2", "--h", "2", "--k", "2", "--compiler", "black", "--mode", "exhaustive")
    assert code == 0
    assert "64/64 inputs OK" in out


def test_missing_instance_is_a_usage_error(capsys, tmp_path):
    code, _, err = run(capsys, "eval", "--instance", str(tmp_path / "missing.json"))
    assert code == 2
    assert "not found" in err


def test_bad_flags_exit_2(capsys):
    assert run(capsys, "pebble", "find", "--d", "2")[0] == 2
    assert run(capsys, "compile", "--d", "2", "--h", "2", "--k", "2", "--compiler", "logsave")[0] == 2
    assert run(capsys, "compile", "--d", "2", "--h", "3", "--k", "2", "--compiler", "logsave", "--m", "5")[0] == 2


def test_eval_matches_the_recursion(capsys, tmp_path):
    inst = random_instance(TreeShape(2, 3), 3, 9)
    path = tmp_path / "inst.json"
    save_instance(inst, path)
    code, out, _ = run(capsys, "--json", "eval", "--instance", str(path))
    assert code == 0
    assert json.loads(out)["value"] == recursive_value(inst)
    code, out, _ = run(capsys, "eval", "--instance", str(path), "--kind", "boolean")
    assert out.strip() == str(recursive_value(inst) == 1)


def test_json_mode(capsys):
    code, out, _ = run(capsys, "--json", "pebble", "find", "--d", "2", "--h", "3", "--variant", "black")
    assert code == 0
    data = json.loads(out)
    assert data["cost"] == "3"


def test_pebble_show_and_verify_round_trip(capsys, tmp_path):
    path = tmp_path / "ws.txt"
    code, out, _ = run(capsys, "pebble", "show", "--d", "2", "--h", "4", "--variant", "whiteslide",
                       "--out", str(path))
    assert code == 0 and "8/3" in out
    code, out, _ = run(capsys, "pebble", "verify", "--sequence", str(path), "--variant", "whiteslide")
    assert code == 0 and "8/3" in out
    code, _, _ = run(capsys, "pebble", "verify", "--sequence", str(path), "--variant", "fractional")
    assert code == 1


def test_search_on_split_dag(capsys, tmp_path):
    dag = tmp_path / "gp.txt"
    code, out, _ = run(capsys, "--json", "search", "--graph", "Gprime", "--d", "2", "--h", "3", "--split", "2",
                       "--export-dag", str(dag))
    assert code == 0 and json.loads(out)["cost"] == "6"
    code, out, _ = run(capsys, "--json", "search", "--dag", str(dag))
    assert code == 0 and json.loads(out)["cost"] == "6"


def test_compile_then_check_the_saved_program(capsys, tmp_path):
    code, _, _ = run(capsys, "compile", "--d", "2", "--h", "2", "--k", "2", "--compiler", "fractional",
                     "--out", str(tmp_path))
    assert code == 0
    prog = tmp_path / "fractional_d2_h2_k2.bp.json"
    report = json.loads((tmp_path / "fractional_d2_h2_k2.report.json").read_text())
    bp = BranchingProgram.from_json(json.loads(prog.read_text()))
    assert report["states"] == bp.size
    flags = ["--d", "2", "--h", "2", "--k", "2", "--program", str(prog)]
    assert run(capsys, "verify", *flags)[0] == 0
    assert run(capsys, "thrifty", *flags)[0] == 0
    dot = tmp_path / "p.dot"
    assert run(capsys, "export-dot", *flags, "--out", str(dot))[0] == 0
    assert parse_dot(dot.read_text()).size == bp.size


def test_thrifty_failure_prints_a_witness(capsys):
    code, out, _ = run(capsys, "thrifty", "--d", "2", "--h", "3", "--k", "2", "--compiler", "logsave", "--m", "2")
    assert code == 1
    assert "counterexample" in out


def test_exhaustive_cap_is_a_usage_error(capsys):
    assert run(capsys, "verify", "--d", "2", "--h", "3", "--k", "3", "--compiler", "black")[0] == 2


@pytest.mark.slow
def test_report_is_deterministic(capsys, tmp_path):
    flags = ["--hs", "2-4", "--frac-hs", "3", "--ks", "2-5", "--jobs", "2"]
    a, b = tmp_path / "a", tmp_path / "b"
    assert run(capsys, "report", "--out", str(a), *flags)[0] == 0
    assert run(capsys, "report", "--out", str(b), *flags)[0] == 0
    names = sorted(p.name for p in a.iterdir())
    assert names == ["exponents.csv", "exponents.md", "neciporuk.csv", "neciporuk.md", "pebbling.csv", "pebbling.md"]
    for name in names:
        # the embedded invocation differs only in the output directory
        assert (a / name).read_text().replace(str(a), "X") == (b / name).read_text().replace(str(b), "X")
    rows = [line.split(",") for line in (a / "pebbling.csv").read_text().splitlines()[2:]]
    for variant, d, h, c, formula, found, _ in rows:
        if variant in ("black", "bw"):
            assert formula == found
