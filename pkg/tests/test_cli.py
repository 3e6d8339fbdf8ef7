"""Command-line behaviour: reports, exit codes, CSV output and golden files.

Each golden file is a JSON report whose ``config`` block is the header: the
argument vector is rebuilt from it and the regenerated report must match the
file byte for byte.  Set INFOL_REGEN_GOLDEN=1 to rewrite the files.
"""

from __future__ import annotations

import csv
import io
import json
import os
import subprocess
import sys
from pathlib import Path

import pytest

from infol.cli import main, run

GOLDEN = Path(__file__).parent / "golden"

GOLDEN_CASES = {
    "infcoh_Q_line": ["infcoh", "--algebra", "Q[x]", "--levels", "2", "--prec", "8", "--deg", "6"],
    "infcoh_F3_line": ["infcoh", "--algebra", "Fp[x]", "--p", "3", "--levels", "2", "--prec", "8", "--deg", "6"],
    "derham_F3_line": ["derham", "--algebra", "Fp[x]", "--p", "3", "--deg", "10"],
    "compare_Q_plane": ["compare", "--algebra", "Q[x,y]", "--prec", "5", "--deg", "4"],
    "redshift_Z": ["redshift-demo", "--over", "Z", "--weights", "3"],
    "divided_power_Z": ["divided-power", "--over", "Z", "--trunc", "5"],
    "divided_power_F2": ["divided-power", "--over", "F2", "--trunc", "5"],
    "integrate_pair_Q": ["integrate", "--demo", "pair-groupoid", "--algebra", "Q[x]", "--prec", "6"],
    "integrate_Ga_F5": ["integrate", "--demo", "Ga", "--over", "F5", "--prec", "6"],
}


def argv_from_config(config: dict) -> list[str]:
    argv = [config["command"]]
    for key in sorted(config):
        if key != "command":
            argv += [f"--{key}", str(config[key])]
    return argv


def ok(argv):
    code, out, err = run(argv)
    assert code == 0, err
    return json.loads(out)


@pytest.mark.parametrize("name", sorted(GOLDEN_CASES))
def test_golden_files_regenerate(name):
    path = GOLDEN / f"{name}.json"
    code, out, err = run(GOLDEN_CASES[name])
    assert code == 0, err
    if os.environ.get("INFOL_REGEN_GOLDEN"):
        GOLDEN.mkdir(exist_ok=True)
        path.write_text(out, encoding="utf-8")
    stored = path.read_text(encoding="utf-8")
    header = json.loads(stored)["config"]
    code, regen, err = run(argv_from_config(header))
    assert code == 0, err
    assert regen == stored


def test_reports_are_byte_deterministic():
    argv = GOLDEN_CASES["integrate_Ga_F5"]
    assert run(argv) == run(argv)


def test_infcoh_report():
    rep = ok(GOLDEN_CASES["infcoh_Q_line"])
    rows = {r["degree"]: r for r in rep["table"]}
    assert rows[0]["rank"] == 1 and rows[0]["trusted"] and rows[0]["torsion"] == []
    assert rows[1]["rank"] == 0 and rows[1]["trusted"]
    assert rep["config"]["algebra"] == "Q[x]" and "version" in rep
    rep3 = ok(GOLDEN_CASES["infcoh_F3_line"])
    assert {r["degree"]: r["rank"] for r in rep3["table"]}[0] == 1


def test_unsound_truncation_exit_3():
    code, out, err = run(["infcoh", "--algebra", "Q[x]", "--prec", "3", "--deg", "6"])
    assert code == 3 and out == ""
    code, out, err = run(["infcoh", "--algebra", "Fp[x]", "--p", "3", "--prec", "3", "--deg", "6"])
    assert code == 3 and "x^3" in err
    assert run(["divided-power", "--trunc", "4"])[0] == 3


@pytest.mark.parametrize(
    "argv",
    [
        ["infcoh", "--algebra", "Q[x"],
        ["infcoh", "--algebra", "Fp[x]"],
        ["infcoh", "--algebra", "Q[x]", "--p", "3"],
        ["infcoh", "--algebra", "Q[x]", "--prec", "0"],
        ["infcoh"],
        ["nonsense"],
        ["integrate", "--demo", "torus"],
        ["divided-power", "--over", "R"],
        ["infcoh", "--algebra", "Q[x]", "--levels", "two"],
    ],
)
def test_parse_errors_exit_2(argv):
    code, out, err = run(argv)
    assert code == 2 and out == "" and err.startswith("infol:")


def test_compare():
    rep = ok(GOLDEN_CASES["compare_Q_plane"])
    assert rep["verdict"] == "equivalent"
    code, _, err = run(["compare", "--algebra", "Fp[x]", "--p", "3"])
    assert code == 4 and "characteristic" in err


def test_derham_classes():
    rep = ok(GOLDEN_CASES["derham_F3_line"])
    assert rep["classes"]["1"] == ["x^2 dx", "x^5 dx", "x^8 dx"]


def test_divided_power_reports():
    assert ok(GOLDEN_CASES["divided_power_Z"])["scalar"] == 2
    f2 = ok(GOLDEN_CASES["divided_power_F2"])
    assert f2["scalar"] == 0 and f2["square_is_boundary"]
    f5 = ok(["divided-power", "--over", "Fp", "--p", "5"])
    assert f5["scalar"] == 2 and f5["scalar_is_unit"]


def test_redshift_demo():
    rep = ok(GOLDEN_CASES["redshift_Z"])
    assert rep["verdict"] == "pass"
    assert {(r["piece"], r["weight"], r["degree"]) for r in rep["table"]} >= {("u", 3, 6), ("v", -3, -6)}


@pytest.mark.parametrize("demo,extra", [("unit", ["--algebra", "Q[x]"]), ("pair-groupoid", ["--algebra", "F3[x]"]), ("Ga", ["--over", "F3"]), ("Gm", ["--over", "Q"])])
def test_integrate_demos(demo, extra):
    rep = ok(["integrate", "--demo", demo, "--prec", "6", *extra])
    assert rep["round_trip"] == "pass"
    assert rep["cotangent_rank"] == (0 if demo == "unit" else 1)


def test_csv_output():
    code, out, err = run(GOLDEN_CASES["infcoh_Q_line"] + ["--format", "csv"])
    assert code == 0
    rows = list(csv.DictReader(io.StringIO(out)))
    assert rows[0].keys() >= {"degree", "rank", "torsion", "trusted"}
    assert {r["degree"]: r["rank"] for r in rows}["0"] == "1"


def test_out_file(tmp_path):
    target = tmp_path / "report.json"
    code, out, _ = run(GOLDEN_CASES["infcoh_Q_line"] + ["--out", str(target)])
    assert code == 0 and out == ""
    assert json.loads(target.read_text())["table"]


def test_main_and_module_entry(capsys):
    assert main(["divided-power", "--over", "Z"]) == 0
    assert json.loads(capsys.readouterr().out)["scalar"] == 2
    proc = subprocess.run([sys.executable, "-m", "infol", "compare", "--algebra", "Fp[x]", "--p", "3"], capture_output=True, text=True)
    assert proc.returncode == 4
    assert run(["--help"])[0] == 0
