import json
import subprocess
import sys

import pytest

from smoothlab.catalog import CheckId
from smoothlab.cli import load_config, main, parse_config
from smoothlab.errors import ConfigError


def write(path, text):
    path.write_text(text)
    return str(path)


def test_jackson_smoke(tmp_path):
    cfg = write(tmp_path / "run.toml", 'checks = ["JACKSON_TRIG"]\n[global]\nseed = 42\n')
    out = tmp_path / "out"
    assert main(["run", cfg, "--out", str(out)]) == 0
    assert sorted(p.name for p in out.iterdir()) == ["JACKSON_TRIG.csv", "JACKSON_TRIG.json",
                                                      "summary.json"]
    summary = json.loads((out / "summary.json").read_text())
    per = json.loads((out / "JACKSON_TRIG.json").read_text())
    assert summary["JACKSON_TRIG"]["verdict"] == per["verdict"] == "pass"
    assert set(summary["JACKSON_TRIG"]) == {"verdict", "max_ratio", "fitted", "runtime"}
    assert (out / "JACKSON_TRIG.csv").read_text().startswith("check,param_json,sweep_value,")


def test_empty_checks(tmp_path):
    cfg = write(tmp_path / "run.json", '{"checks": []}')
    assert main(["run", cfg, "--out", str(tmp_path / "o")]) == 0
    assert json.loads((tmp_path / "o" / "summary.json").read_text()) == {}


def test_misspelled_check(tmp_path, capsys):
    cfg = write(tmp_path / "run.toml", 'checks = ["JACKSON_TRIGG"]\n')
    assert main(["run", cfg, "--out", str(tmp_path / "o")]) == 2
    err = capsys.readouterr().err
    assert "did you mean 'JACKSON_TRIG'" in err and "DIRECT_TRIG" in err
    assert not (tmp_path / "o").exists()


def test_failing_check_still_writes(tmp_path):
    cfg = write(tmp_path / "run.toml",
                'format = "csv"\n[[checks]]\nid = "BRIDGE_TRIG"\nparams = {verdict = {cap = 1e-9}}\n')
    out = tmp_path / "o"
    assert main(["run", cfg, "--out", str(out), "--seed", "1"]) == 1
    assert (out / "BRIDGE_TRIG.csv").exists() and not (out / "BRIDGE_TRIG.json").exists()
    assert json.loads((out / "summary.json").read_text())["BRIDGE_TRIG"]["verdict"] == "fail"


def test_runtime_error_is_reported(tmp_path):
    cfg = write(tmp_path / "run.json",
                json.dumps({"checks": [{"id": "LP_DERIV_DEFECT", "params": {"f": {"family": "abs"}}}]}))
    out = tmp_path / "o"
    assert main(["run", cfg, "--out", str(out)]) == 1
    entry = json.loads((out / "summary.json").read_text())["LP_DERIV_DEFECT"]
    assert entry["verdict"] == "error" and "ConfigError" in entry["error"]


@pytest.mark.parametrize("data", [
    {"checks": "some"},
    {"checks": [{"name": "x"}]},
    {"checks": [{"id": "DIRECT_TRIG", "params": {"nope": 1}}]},
    {"checks": [{"id": "DIRECT_TRIG", "params": {"f": {"family": "nope"}}}]},
    {"checks": ["PR1T", "PR1T"]},
    {"checks": [{"id": "PR1T", "params": {"gamma": -1}}]},
    {"checks": [], "global": {"seeds": 1}},
    {"checks": [], "global": {"seed": -1}},
    {"checks": [], "global": {"quadrature": {"base_panels": 8}}},
    {"checks": [], "global": {"solver": {"bogus": 1}}},
    {"checks": [], "format": "xml"},
    {"checks": [], "extra": 1},
])
def test_parse_errors(data):
    with pytest.raises(ConfigError):
        parse_config(data)


def test_parse_overrides_and_names():
    cfg = parse_config({"checks": ["PR1T", {"id": "PR1T", "name": "PR1T_control",
                                            "params": {"gamma": 0.0}}],
                        "global": {"seed": 7, "output_dir": "x", "solver": {"starts": 2},
                                   "quadrature": {"rel_tol": 1e-7}}})
    assert [e.name for e in cfg.checks] == ["PR1T", "PR1T_control"]
    assert cfg.seed == 7 and cfg.solver == {"starts": 2} and cfg.quadrature == {"rel_tol": 1e-7}


def test_all_expands():
    cfg = parse_config({"checks": "all"})
    assert len(cfg.checks) == len(CheckId) + 2


def test_bad_files(tmp_path):
    with pytest.raises(ConfigError):
        load_config(tmp_path / "missing.toml")
    with pytest.raises(ConfigError):
        load_config(write(tmp_path / "bad.toml", "checks = [\n"))
    with pytest.raises(ConfigError):
        load_config(write(tmp_path / "run.yaml", "checks: []\n"))


def test_jobs_from_environment(tmp_path, monkeypatch):
    cfg = write(tmp_path / "run.json", '{"checks": []}')
    monkeypatch.setenv("SMOOTHLAB_JOBS", "zero")
    assert main(["run", cfg, "--out", str(tmp_path / "o")]) == 2
    monkeypatch.setenv("SMOOTHLAB_JOBS", "2")
    assert main(["run", cfg, "--out", str(tmp_path / "o")]) == 0
    assert main(["run", cfg, "--out", str(tmp_path / "o"), "--jobs", "0"]) == 2


def test_list_checks(capsys):
    assert main(["list-checks"]) == 0
    text = capsys.readouterr().out
    assert "DIRECT_TRIG" in text and "E_n(f)_p <= C n^-r" in text
    assert main(["list-checks", "--json"]) == 0
    rows = json.loads(capsys.readouterr().out)
    assert len(rows) == len(CheckId)
    assert [r["id"] for r in rows] == [c.value for c in CheckId]
    assert all(r["statement"] in text and r["description"] in text for r in rows)


def test_module_entry_point():
    res = subprocess.run([sys.executable, "-m", "smoothlab", "list-checks", "--json"],
                         capture_output=True, text=True, check=True)
    assert len(json.loads(res.stdout)) == len(CheckId)
