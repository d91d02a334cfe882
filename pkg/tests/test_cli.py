import csv
import json
import subprocess
import sys

import jsonschema
import pytest
from click.testing import CliRunner

from tilecocycle.cli import MANIFEST_SCHEMA, main

from conftest import raw_doc


def _run(args, env=None):
    runner = CliRunner()
    return runner.invoke(main, args, env=env, catch_exceptions=False)


def _write(tmp_path, name, doc):
    p = tmp_path / f"{name}.json"
    p.write_text(json.dumps(doc))
    return str(p)


@pytest.fixture
def tmpd_path(tmp_path):
    return _write(tmp_path, "tmpd", raw_doc("tmpd"))


def _manifest(out):
    m = json.loads((out / "manifest.json").read_text())
    jsonschema.validate(m, MANIFEST_SCHEMA)
    return m


def test_validate_broken_covering(tmp_path):
    path = _write(tmp_path, "broken", raw_doc("broken_covering"))
    out = tmp_path / "o"
    res = _run(["validate", "--config", path, "--out", str(out)])
    assert res.exit_code == 1
    err = json.loads(res.stderr.strip().splitlines()[-1])
    first = err["failures"][0]
    assert first["rule"] == 0 and first["rule_name"] == "missing-digit" and first["parent"] == "a"
    assert _manifest(out)["status"] == "failed"
    assert json.loads((out / "error.json").read_text())["error"] == "validation"


def test_validate_golden(tmp_path, tmpd_path):
    res = _run(["validate", "--config", tmpd_path, "--out", str(tmp_path / "o")])
    assert res.exit_code == 0
    assert json.loads((tmp_path / "o" / "validation.json").read_text())["passed"]


def test_config_error_exit_code(tmp_path):
    doc = raw_doc("tmpd")
    doc["sampler"]["p"] = [0.5, 0.6]
    res = _run(["twist", "--config", _write(tmp_path, "bad", doc), "--out", str(tmp_path / "o")])
    assert res.exit_code == 2
    err = json.loads(res.stderr)
    assert {"pointer": "/sampler/p", "message": "probabilities sum 1.1"} in err["errors"]


def test_twist_contract_and_determinism(tmp_path, tmpd_path):
    a, b = tmp_path / "a", tmp_path / "b"
    assert _run(["twist", "--config", tmpd_path, "--out", str(a)]).exit_code == 0
    assert _run(["twist", "--config", tmpd_path, "--out", str(b), "--workers", "2"]).exit_code == 0
    rows = list(csv.DictReader((a / "twist.csv").open()))
    assert list(rows[0]) == ["lambda_1", "R", "re", "im", "abs", "method", "seed"]
    assert len(rows) == 64 * 13
    fits = json.loads((a / "twist_fit.json").read_text())
    assert len(fits) == 64 and all("slope" in f for f in fits)
    assert (a / "twist.csv").read_bytes() == (b / "twist.csv").read_bytes()
    assert (a / "twist_fit.json").read_bytes() == (b / "twist_fit.json").read_bytes()
    m = _manifest(b)
    assert m["workers"] == 2 and {o["path"] for o in m["outputs"]} == {"twist.csv", "twist_fit.json"}


def test_seed_override_changes_output(tmp_path, tmpd_path):
    a, b = tmp_path / "a", tmp_path / "b"
    _run(["twist", "--config", tmpd_path, "--out", str(a)])
    _run(["twist", "--config", tmpd_path, "--out", str(b), "--seed", "3"])
    assert _manifest(b)["seed"] == 3
    assert (a / "twist.csv").read_bytes() != (b / "twist.csv").read_bytes()


def test_veech_exact_csv(tmp_path, tmpd_path):
    out = tmp_path / "o"
    assert _run(["veech", "--config", tmpd_path, "--out", str(out)]).exit_code == 0
    one = list(csv.DictReader((out / "veech-0.csv").open()))
    third = list(csv.DictReader((out / "veech-1.csv").open()))
    assert list(one[0]) == ["j", "k_j", "dist", "indicator", "D_N"]
    assert all(r["D_N"] == "1" for r in one)
    assert all(r["D_N"] == "0" and r["dist"] == "1/3" for r in third)


def test_exponents_records(tmp_path, tmpd_path):
    out = tmp_path / "o"
    assert _run(["exponents", "--config", tmpd_path, "--out", str(out)]).exit_code == 0
    recs = json.loads((out / "exponents.json").read_text())
    assert all({"name", "value", "stderr", "n"} <= set(r) for r in recs)
    top = next(r for r in recs if r["name"] == "trace_top")
    assert abs(top["value"] - 0.6931471805599453) < 1e-6


def test_small_runs_of_remaining_commands(tmp_path):
    doc = raw_doc("tmpd")
    doc["experiments"]["spectral-bound"] = {"lambda": [[0.3]], "r": [0.05, 0.02], "n_samples": 8}
    doc["experiments"]["deform"]["R_grid"] = {"lo": 32, "hi": 4096, "count": 10}
    doc["experiments"]["decompose"] = {"R": [10, 50], "n_tilings": 2}
    path = _write(tmp_path, "small", doc)
    for cmd, files in [("spectral-bound", {"spectral_bound.json"}), ("deform", {"deform.json", "deform-0.csv"}),
                       ("decompose", {"decompose.csv", "decompose.json"})]:
        out = tmp_path / cmd
        res = _run([cmd, "--config", path, "--out", str(out)])
        assert res.exit_code == 0, res.stderr
        assert files <= {o["path"] for o in _manifest(out)["outputs"]}
    windows = json.loads((tmp_path / "decompose" / "decompose.json").read_text())["windows"]
    assert all(w["conserved"] for w in windows)
    bounds = json.loads((tmp_path / "spectral-bound" / "spectral_bound.json").read_text())
    assert "decay_slope" in bounds[0]


def test_missing_experiment_section(tmp_path):
    doc = raw_doc("tmpd")
    del doc["experiments"]["veech"]
    out = tmp_path / "o"
    res = _run(["veech", "--config", _write(tmp_path, "nov", doc), "--out", str(out)])
    assert res.exit_code == 1
    assert "no 'veech' section" in json.loads((out / "error.json").read_text())["message"]


def test_workers_from_environment(tmp_path, tmpd_path):
    out = tmp_path / "o"
    _run(["validate", "--config", tmpd_path, "--out", str(out)], env={"TILECOCYCLE_WORKERS": "3"})
    assert _manifest(out)["workers"] == 3


def test_console_script(tmp_path, tmpd_path):
    proc = subprocess.run([sys.executable, "-m", "tilecocycle.cli", "validate", "--config", tmpd_path,
                           "--out", str(tmp_path / "o")], capture_output=True, text=True)
    assert proc.returncode == 0, proc.stderr
    assert (tmp_path / "o" / "manifest.json").exists()
