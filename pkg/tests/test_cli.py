import json
import subprocess
import sys

import pytest

from feh.cli import main
from feh.library import corpus_dir
from feh.parser import parse_file
from feh.simple_check import check_st
from feh import terms as T

CORPUS = corpus_dir()


def path(name):
    return str(CORPUS / name)


def run(argv, capsys):
    code = main(argv)
    out = capsys.readouterr()
    return code, out.out, out.err


def test_reach_c_ex1_is_yes(capsys):
    code, out, _ = run(["reach", path("c_ex1.feh"), "--json"], capsys)
    assert code == 0 and json.loads(out)["verdict"] == "Yes"


def test_reach_exit_codes(capsys):
    assert run(["reach", path("c_ex5.feh")], capsys)[0] == 1
    assert run(["reach", path("c_ex5.feh"), "--budget", "3"], capsys)[0] == 2
    code, out, _ = run(["reach", path("c_ex4.feh"), "--route", "via-cps", "--json"], capsys)
    assert code == 1 and json.loads(out)["verdict"] is None


def test_check(capsys):
    assert run(["check", path("c_ex4.feh"), "--system", "atm"], capsys)[0] == 1
    code, out, _ = run(["check", path("c_ex3.feh"), "--system", "atm", "--json"], capsys)
    data = json.loads(out)
    assert code == 0 and data["typable"] and data["type"] == "Bool / pure"
    assert run(["check", path("c_ex3.feh"), "--system", "st"], capsys)[0] == 1


def test_run(capsys):
    code, out, _ = run(["run", path("c_ex2.feh")], capsys)
    assert code == 0 and "returned true" in out
    code, out, _ = run(["run", path("c_ex5.feh")], capsys)
    assert code == 1 and "cycle" in out
    code, out, _ = run(["run", path("c_ex3.feh"), "--trace", "--budget", "100"], capsys)
    assert code == 0 and out.startswith("0: ")


def test_parse(capsys):
    code, out, _ = run(["parse", path("c_ex1.feh")], capsys)
    assert code == 0 and "main" in out


def test_cps_writes_target_and_sidecar(tmp_path, capsys):
    out = tmp_path / "t.feh"
    deriv = tmp_path / "d.json"
    code, _, _ = run(["cps", path("c_ex3.feh"), "-o", str(out), "--deriv", str(deriv)], capsys)
    assert code == 0
    target = parse_file(out)
    assert not T.contains(target.core(), (T.Handle, T.Op))
    assert str(check_st(target.signature(), {}, target.core())) == "Bool"
    side = json.loads((tmp_path / "t.feh.json").read_text())
    assert side == {"source_type": "Bool / pure", "target_type": "Bool"}
    assert json.loads(deriv.read_text())["rule"]
    assert run(["cps", path("c_ex4.feh"), "-o", str(out)], capsys)[0] == 1


def test_minsky(tmp_path, capsys):
    assert run(["minsky", "simulate", path("three_state.mm"), "--fuel", "10"], capsys)[0] == 0
    assert run(["minsky", "simulate", path("inc_loop.mm"), "--fuel", "10"], capsys)[0] == 2
    out = tmp_path / "m.feh"
    assert run(["minsky", "compile", path("three_state.mm"), "-o", str(out)], capsys)[0] == 0
    assert run(["reach", str(out)], capsys)[0] == 0


def test_usage_errors(tmp_path, capsys):
    code, _, err = run(["reach"], capsys)
    assert code == 3 and "usage" in err
    assert run(["frobnicate"], capsys)[0] == 3
    assert run(["run", path("c_ex1.feh"), "--budget", "0"], capsys)[0] == 3
    assert run(["run", str(tmp_path / "missing.feh")], capsys)[0] == 3
    bad = tmp_path / "bad.feh"
    bad.write_text("main let x = in x")
    code, _, err = run(["parse", str(bad)], capsys)
    assert code == 3 and "1:" in err


def test_json_is_stable(capsys):
    first = run(["check", path("c_ex1.feh"), "--system", "atm", "--json"], capsys)[1]
    second = run(["check", path("c_ex1.feh"), "--system", "atm", "--json"], capsys)[1]
    assert first == second


def test_budget_environment_variable(monkeypatch, capsys):
    monkeypatch.setenv("FEH_BUDGET", "3")
    assert run(["run", path("c_ex2.feh")], capsys)[0] == 2


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "feh", "check", path("c_ex1.feh"), "--system", "st"], capture_output=True, text=True)
    assert proc.returncode == 0 and "Bool" in proc.stdout
