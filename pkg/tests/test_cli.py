import csv
import io
import re
import subprocess
import sys
from pathlib import Path

import pytest

from selbias.cli import build_parser, parse_grid, parse_query, run
from selbias.errors import EmptyGrid, GridSyntax

ROOT = Path(__file__).resolve().parents[1]
FIX = ROOT / "fixtures"
GOLDEN = Path(__file__).resolve().parent / "golden"


def call(*argv):
    out, err = io.StringIO(), io.StringIO()
    code = run([str(a) for a in argv], out, err)
    return code, out.getvalue(), err.getvalue()


# check -----------------------------------------------------------------------

def test_check_dag_a():
    code, out, err = call("check", FIX / "dag_a.cg", "--exposure", "X", "--outcome", "Y",
                          "--adjust", "W", "--selection", "S")
    assert code == 0 and err == ""
    assert "P(Y_x): NOT RECOVERABLE, witness {Y}" in out
    assert "OR: RECOVERABLE via X⫫S|(Y,W)" in out


def test_check_with_scm_adds_numeric_column(tmp_path):
    scm = tmp_path / "a.scm"
    scm.write_text("var W : bernoulli 0.4\nvar X parents W : table 0.3 0.6\n"
                   "var Y parents W X : table 0.1 0.3 0.2 0.7\n"
                   "var S parents Y : table 0.2 0.9\n")
    code, out, _ = call("check", FIX / "dag_a.cg", "--exposure", "X", "--outcome", "Y",
                        "--adjust", "W", "--scm", scm)
    assert code == 0
    assert "C2  X ⫫ S | (Y, W): HOLDS (graphical), holds numerically" in out
    assert "C2  Y ⫫ S | (X, W): FAILS (graphical), fails numerically" in out


def test_check_scm_missing_selection_exit_3():
    code, _, err = call("check", FIX / "case_ii.cg", "--exposure", "X", "--outcome", "R_sev",
                        "--scm", FIX / "study_default.scm")
    assert code == 3 and "'S'" in err


def test_check_case_i():
    code, out, _ = call("check", FIX / "case_i.cg", "--exposure", "X", "--outcome", "F",
                        "--adjust", "W")
    assert code == 0
    assert "OR: RECOVERABLE via X⫫S|(F,W)" in out


def test_check_missing_file_exit_2():
    code, out, err = call("check", "missing.cg", "--exposure", "X", "--outcome", "Y")
    assert code == 2 and out == ""
    assert "missing.cg" in err


def test_check_parse_error_names_line_and_token(tmp_path):
    bad = tmp_path / "bad.cg"
    bad.write_text("node A\nnode B\nedge A C\n")
    code, _, err = call("check", bad, "--exposure", "A", "--outcome", "B", "--selection", "S")
    assert code == 2
    assert f"{bad}:3:" in err and "'C'" in err


def test_check_cycle_exit_3(tmp_path):
    bad = tmp_path / "cyc.cg"
    bad.write_text("node A\nnode B\nsnode S\nedge A B\nedge B A\nedge B S\n")
    code, _, err = call("check", bad, "--exposure", "A", "--outcome", "B")
    assert code == 3
    assert str(bad) in err and "cycle" in err


def test_check_unknown_node_exit_3():
    code, _, err = call("check", FIX / "dag_a.cg", "--exposure", "X", "--outcome", "Q")
    assert code == 3 and "'Q'" in err


def test_check_needs_selection():
    code, _, err = call("check", FIX / "accident_full.cg", "--exposure", "X", "--outcome", "R")
    assert code == 1 and "--selection" in err


# usage -------------------------------------------------------------------

@pytest.mark.parametrize("argv", [[], ["frobnicate"], ["check", "--bogus"],
                                  ["sweep", "--out", "x.csv"],
                                  ["sweep", "--paper-default", "--grid", "nu=1", "--out", "x"],
                                  ["demo", "appendix-z"]])
def test_usage_errors_exit_1(argv):
    code, out, err = call(*argv)
    assert code == 1 and out == ""
    assert "error:" in err


@pytest.mark.parametrize("sub", ["", "check", "eval", "sweep", "paf", "demo"])
def test_usage_text_golden(sub, monkeypatch):
    monkeypatch.setenv("COLUMNS", "80")
    code, out, _ = call(*([sub] if sub else []), "--help")
    assert code == 0
    assert out == (GOLDEN / f"usage{'_' + sub if sub else ''}.txt").read_text()


def test_usage_lists_every_flag(monkeypatch):
    monkeypatch.setenv("COLUMNS", "80")
    parser = build_parser()
    subs = parser._subparsers._group_actions[0].choices
    for name, sp in subs.items():
        _, out, _ = call(name, "--help")
        for action in sp._actions:
            for flag in action.option_strings:
                assert flag in out, (name, flag)


# eval and paf ------------------------------------------------------------

def test_eval_exact_and_mc():
    argv = ["eval", FIX / "study_default.scm", "--query", "F=1 | X=1, A_sev=1",
            "--query", "R_sev=1 | do(X=0)", "--mc", "50000", "--seed", "4"]
    code, out, _ = call(*argv)
    assert code == 0
    assert re.search(r"^P\(F=1 \| X=1, A_sev=1\) = 0\.16249", out, re.M)
    assert "P(R_sev=1 | do(X=0)) = " in out
    assert "PCG64" in out
    assert call(*argv)[1] == out


def test_eval_unknown_variable_and_zero_event(tmp_path):
    code, _, err = call("eval", FIX / "study_default.scm", "--query", "Q=1")
    assert code == 3
    scm = tmp_path / "z.scm"
    scm.write_text("var A : bernoulli 0\nvar B parents A : and\n")
    code, _, err = call("eval", scm, "--query", "B=1 | A=1")
    assert code == 4 and "zero probability" in err


def test_eval_bad_query_is_usage():
    code, _, _ = call("eval", FIX / "study_default.scm", "--query", "F=2")
    assert code == 1


def test_paf_command(tmp_path):
    code, out, _ = call("paf", FIX / "study_default.scm", "--exposure", "X", "--outcome", "R_sev")
    assert code == 0
    vals = [float(line.split()[-1]) for line in out.splitlines()[:4]]
    assert max(vals) - min(vals) < 1e-12


def test_paf_positivity_exit_4(tmp_path):
    scm = tmp_path / "p.scm"
    scm.write_text("var W : bernoulli 0.5\nvar X parents W : table 0 0.5\n"
                   "var R parents X W : table 0.1 0.2 0.3 0.4\n")
    code, _, err = call("paf", scm, "--exposure", "X", "--outcome", "R", "--adjust", "W")
    assert code == 4 and "W" in err


# sweep -----------------------------------------------------------------------

def test_sweep_paper_default(tmp_path):
    out_csv = tmp_path / "sweep.csv"
    code, out, _ = call("sweep", "--paper-default", "--out", out_csv)
    assert code == 0
    rows = list(csv.reader(out_csv.open()))
    assert len(rows) == 65
    assert "64 rows" in out
    assert "," not in out  # CSV only goes to the file


def test_sweep_is_byte_identical(tmp_path):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    ra = call("sweep", "--grid", "alpha_x=1;beta_x=0;gamma_v=3", "--out", a, "--mc", "1000000",
              "--seed", "9")
    rb = call("sweep", "--grid", "alpha_x=1;beta_x=0;gamma_v=3", "--out", b, "--mc", "1000000",
              "--seed", "9")
    assert ra[0] == 0
    assert ra[1].replace(str(a), "") == rb[1].replace(str(b), "")
    assert a.read_bytes() == b.read_bytes()
    assert "mc " in ra[1]


def test_sweep_empty_grid_exit_2(tmp_path):
    code, _, err = call("sweep", "--grid", "alpha_x=3:1:0", "--out", tmp_path / "x.csv")
    assert code == 2
    assert not (tmp_path / "x.csv").exists()


def test_sweep_engine_flag(tmp_path):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    call("sweep", "--grid", "alpha_x=0:1:1;gamma_v=2", "--out", a)
    call("sweep", "--grid", "alpha_x=0:1:1;gamma_v=2", "--out", b, "--engine")
    ra, rb = list(csv.reader(a.open())), list(csv.reader(b.open()))
    for x, y in zip(ra[1:], rb[1:]):
        assert float(x[9]) == pytest.approx(float(y[9]), rel=1e-9)


# grid and query parsing ----------------------------------------------------

def test_parse_grid_examples():
    pts = parse_grid("alpha_x=0:1:3;beta_x=1;gamma_v=0:1:3")
    assert len(pts) == 16
    assert (pts[0].alpha_x, pts[0].gamma_v, pts[1].gamma_v, pts[4].alpha_x) == (0, 0, 1, 1)
    p = pts[0]
    assert (p.beta_v, p.gamma_f, p.nu, p.offset_sign) == (1, 4, 13, -1)
    assert len(parse_grid("nu=12:0.5:13")) == 3
    assert parse_grid("offset_sign=1")[0].offset_sign == 1


@pytest.mark.parametrize("spec", ["", "alpha=1", "alpha_x", "alpha_x=a", "alpha_x=0:1",
                                  "alpha_x=1;alpha_x=2", "alpha_x=0:0:3", "alpha_x=0:-1:3"])
def test_parse_grid_syntax_errors(spec):
    with pytest.raises(GridSyntax):
        parse_grid(spec)


def test_parse_grid_empty():
    with pytest.raises(EmptyGrid):
        parse_grid("alpha_x=3:1:0")


def test_parse_query():
    assert parse_query("Y=1 | do(X=1), W=0") == ({"Y": 1}, {"X": 1}, {"W": 0})
    assert parse_query("Y=1") == ({"Y": 1}, {}, {})


def test_module_entry_point():
    res = subprocess.run([sys.executable, "-m", "selbias", "demo", "appendix-d"],
                         capture_output=True, text=True, check=False)
    assert res.returncode == 0
    assert "ACE = " in res.stdout


def test_demo_appendix_e():
    code, out, _ = call("demo", "appendix-e")
    assert code == 0
    gaps = [float(line.rsplit(" ", 1)[-1]) for line in out.splitlines()[1:]]
    assert gaps[0] <= 1e-10 and gaps[1] <= 1e-10 and gaps[2] > 1e-3
