from __future__ import annotations

import io
import json
import os
import subprocess
import sys
from pathlib import Path

import pytest

from airy.cli import ConfigError, dispatch, load_config, verify_suite
from airy.series import Window

GOLDEN = Path(__file__).parent / "golden"

# name, argv, exit status
CASES = [
    ("gravity_correlators", ["gravity", "correlators", "--genus", "1", "--degree", "3", "--vars", "3"], 0),
    ("gravity_correlators_csv", ["gravity", "correlators", "--genus", "1", "--degree", "2", "--vars", "2",
                                 "--format", "csv"], 0),
    ("gravity_free_energy", ["gravity", "free-energy", "--g", "1", "--degree", "2", "--vars", "2"], 0),
    ("gravity_free_energy_u", ["gravity", "free-energy", "--g", "0", "--degree", "4", "--vars", "1",
                               "--coords", "u"], 0),
    ("gravity_kdv", ["gravity", "kdv", "--n", "1", "--degree", "3", "--vars", "2", "--genus", "1"], 0),
    ("burgers_f0", ["burgers", "f0", "--vars", "2", "--degree", "5"], 0),
    ("burgers_solve", ["burgers", "solve", "--initial", "0,1,1/2", "--order", "3"], 0),
    ("burgers_solve_picard", ["burgers", "solve", "--initial", "1,1", "--order", "2", "--method", "picard"], 0),
    ("burgers_catalan", ["burgers", "catalan", "--m", "3", "--order", "5"], 0),
    ("deform_check_x2", ["deform", "check-x2", "--vars", "3", "--degree", "4"], 0),
    ("deform_coeffs_c", ["deform", "coeffs", "--which", "c", "--vars", "2", "--degree", "2"], 0),
    ("deform_example", ["deform", "example", "--order", "3"], 0),
    ("lg_sigma", ["lg", "sigma", "--n", "3"], 0),
    ("lg_correlator", ["lg", "correlator", "--indices", "1,2,3", "--m", "1"], 0),
    ("lg_structure", ["lg", "structure", "--j", "2", "--k", "4"], 0),
    ("fock_bessel", ["fock", "bessel", "--n", "6"], 0),
    ("fock_commutator_trivial", ["fock", "commutator", "--m", "1", "--n", "1"], 0),
    ("fock_commutator_central", ["fock", "commutator", "--m", "2", "--n", "-2"], 1),
    ("fock_residual", ["fock", "residual", "--vars", "2", "--degree", "3", "--genus", "1"], 0),
    ("fock_residual_w4", ["fock", "residual", "--power", "4", "--vars", "2", "--degree", "2", "--genus", "1"], 0),
]


def run(argv):
    out, err = io.StringIO(), io.StringIO()
    code = dispatch(argv, out, err)
    return code, out.getvalue(), err.getvalue()


@pytest.mark.parametrize("name,argv,status", CASES, ids=[c[0] for c in CASES])
def test_golden(name, argv, status):
    code, out, _ = run(argv)
    path = GOLDEN / f"{name}.out"
    if os.environ.get("AIRY_REGEN_GOLDEN"):
        path.write_text(out)
    assert code == status
    assert out == path.read_text()


def test_json_lines_parse():
    _, out, _ = run(["gravity", "correlators", "--genus", "0", "--degree", "4", "--vars", "1"])
    rows = [json.loads(line) for line in out.splitlines()]
    assert {"g": 0, "alphas": [0, 0, 0], "value": "1/1"} in rows


def test_rationals_are_strings():
    _, out, _ = run(["lg", "sigma", "--n", "2"])
    data = json.loads(out)
    assert all(isinstance(t["c"], str) and "/" in t["c"] for t in data["terms"])


def test_config_precedence(tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("# window\ndegree = 3\nvars=4\ngenus=0\nformat=csv\n")
    # the flag beats the file for format, the file beats the defaults for the window
    code, out, _ = run(["gravity", "correlators", "--config", str(cfg), "--format", "json", "--vars", "0"])
    assert code == 0
    assert out.strip() == '{"alphas": [0, 0, 0], "g": 0, "value": "1/1"}'


def test_config_unknown_key_warns(tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("colour=blue\n")
    code, _, err = run(["lg", "sigma", "--config", str(cfg)])
    assert code == 0 and "unknown config key 'colour'" in err


def test_malformed_config(tmp_path):
    cfg = tmp_path / "bad.cfg"
    cfg.write_text("degree 4\n")
    code, out, err = run(["lg", "sigma", "--config", str(cfg)])
    assert code == 2 and out == "" and "expected key=value" in err
    with pytest.raises(ConfigError):
        load_config(str(tmp_path / "missing.cfg"))


def test_bad_values_exit_2(tmp_path):
    assert run(["lg", "correlator", "--indices", "a,b"])[0] == 2
    assert run(["burgers", "solve", "--initial", "x"])[0] == 2
    assert run(["gravity", "correlators", "--degree", "-1"])[0] == 2
    assert run(["lg", "correlator", "--indices", "1,1,1,1"])[0] == 2


def test_usage_error_exit_2(capsys):
    assert run(["gravity"])[0] == 2
    assert run(["fock", "residual", "--power", "3"])[0] == 2


def test_out_file(tmp_path):
    target = tmp_path / "sigma.json"
    code, out, _ = run(["lg", "sigma", "--n", "1", "--out", str(target)])
    assert code == 0 and out == ""
    assert json.loads(target.read_text())["n"] == 1


def test_verify_quick():
    code, out, _ = run(["verify", "--level", "quick"])
    data = json.loads(out)
    assert code == 0 and data["ok"]
    assert len(data["checks"]) == 15


def test_verify_suite_names_are_unique():
    names = [c["name"] for c in verify_suite(Window(3, 3, 1))]
    assert len(names) == len(set(names))


def test_console_script_entry_point():
    proc = subprocess.run([sys.executable, "-m", "airy", "fock", "bessel", "--n", "2"],
                          capture_output=True, text=True, check=False)
    assert proc.returncode == 0
    assert json.loads(proc.stdout)["T"] == [1, 1]
