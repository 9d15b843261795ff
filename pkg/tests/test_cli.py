from __future__ import annotations

import csv
import json
import subprocess
import sys
from pathlib import Path

import pytest
import yaml

from roumieu.cli import main
from roumieu.cli.config import ConfigError, bundled_path, load_config
from roumieu.cli.report import strip_timings

SMALL = {
    "version": 1,
    "seed": 7,
    "weights": {"family": "gevrey", "s": 2.0, "N": 64},
    "K_max": 8,
    "N_max": 10,
    "functions": {"phi": {"kind": "bump", "center": 0.1, "radius": 1.0}, "f": {"kind": "bump", "center": 0.2, "radius": 0.5}},
    "rsequences": {"linear": {"family": "linear", "N": 256}},
    "units": {"plateau": {"kind": "plateau", "schedule": {"scale": 1.0, "power": 1.0}}},
    "distributions": {
        "d0": {"kind": "delta", "at": 0.0},
        "dd": {"delta": {"at": 0.3, "order": 1, "coef": [0.0, 1.0]}},
        "f": {"kind": "density", "function": "f"},
        "one": {"kind": "poly", "coeffs": [1.0]},
    },
    "test_functions": ["phi"],
    "pairs": [
        {"name": "delta/bump", "S": "d0", "T": "f"},
        {"name": "Ddelta/delta", "S": "dd", "T": "d0"},
        {"name": "one/one", "S": "one", "T": "one", "expect": "not_convolvable"},
    ],
    "suites": ["weights", "komatsu", "convolution"],
    "checks": {"convolution": {"units": ["plateau"]}},
}


def write(tmp_path: Path, cfg: dict, name: str = "cfg.yaml") -> Path:
    p = tmp_path / name
    p.write_text(yaml.safe_dump(cfg), encoding="utf-8")
    return p


@pytest.fixture(scope="module")
def small_runs(tmp_path_factory):
    tmp = tmp_path_factory.mktemp("small")
    cfg = write(tmp, SMALL)
    codes = [main(["run", str(cfg), "--out", str(tmp / f"out{i}")]) for i in (1, 2)]
    return tmp, codes


def test_small_run_passes(small_runs, capsys):
    tmp, codes = small_runs
    assert codes == [0, 0]
    rep = json.loads((tmp / "out1" / "report.json").read_text())
    assert rep["passed"] and set(rep["suites"]) == {"weights", "komatsu", "convolution"}
    assert rep["suites"]["convolution"]["checks"]["one/one"]["passed"]


def test_runs_are_deterministic(small_runs):
    tmp, _ = small_runs
    a = json.loads((tmp / "out1" / "report.json").read_text())
    b = json.loads((tmp / "out2" / "report.json").read_text())
    assert strip_timings(a) == strip_timings(b)
    csvs = sorted(p.name for p in (tmp / "out1").glob("*.csv"))
    assert csvs
    for name in csvs:
        assert (tmp / "out1" / name).read_bytes() == (tmp / "out2" / name).read_bytes()


def test_csv_columns(small_runs):
    tmp, _ = small_runs
    path = next((tmp / "out1").glob("convolution_*.csv"))
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    assert rows[0] == ["n", "value_re", "value_im", "mode", "unit_id"]
    assert all(int(r[0]) >= 1 and r[3] in ("eps", "pi", "pi1", "pi2") for r in rows[1:])


def test_unannotated_constant_pair_fails(tmp_path):
    cfg = dict(SMALL, suites=["convolution"])
    cfg["pairs"] = [{"name": "one/one", "S": "one", "T": "one"}]
    code = main(["run", str(write(tmp_path, cfg)), "--out", str(tmp_path / "out")])
    assert code == 1
    rep = json.loads((tmp_path / "out" / "report.json").read_text())
    assert "one/one" in rep["suites"]["convolution"]["counterexample"]


def test_explain_lists_violating_index(tmp_path, capsys):
    cfg = dict(SMALL, suites=["weights"], weights={"family": "gevrey", "s": 1.0, "N": 13000})
    assert main(["run", str(write(tmp_path, cfg)), "--out", str(tmp_path / "out")]) == 1
    capsys.readouterr()
    assert main(["explain", str(tmp_path / "out" / "report.json")]) == 0
    text = capsys.readouterr().out
    assert "FAIL  weights" in text and "(12367,)" in text


def test_out_dir_from_environment(tmp_path, monkeypatch):
    monkeypatch.setenv("ROUMIEU_OUT", str(tmp_path / "envout"))
    assert main(["run", str(write(tmp_path, SMALL)), "--suites", "weights"]) == 0
    rep = json.loads((tmp_path / "envout" / "report.json").read_text())
    assert list(rep["suites"]) == ["weights"]


@pytest.mark.parametrize(
    "mutate",
    [
        lambda c: c.update(suites=["nope"]),
        lambda c: c.update(suites=[]),
        lambda c: c.update(K_max=4),
        lambda c: c.update(pairs=[{"name": "x", "S": "missing", "T": "d0"}]),
        lambda c: c["checks"].update(convolution={"units": ["missing"]}),
        lambda c: c.update(bogus=1),
    ],
)
def test_config_errors_exit_2(tmp_path, mutate):
    cfg = json.loads(json.dumps(SMALL))
    mutate(cfg)
    assert main(["run", str(write(tmp_path, cfg)), "--out", str(tmp_path / "out")]) == 2


def test_usage_errors_exit_2(tmp_path):
    assert main(["run", str(tmp_path / "absent.yaml")]) == 2
    assert main(["run", str(write(tmp_path, SMALL)), "--suites", ","]) == 2
    assert main(["explain", str(tmp_path / "absent.json")]) == 2
    (tmp_path / "bad.json").write_text("{}")
    assert main(["explain", str(tmp_path / "bad.json")]) == 2
    assert main(["frobnicate"]) == 2


def test_nested_distribution_spec(tmp_path):
    cfg = load_config(write(tmp_path, SMALL))
    (term,) = cfg.distributions["dd"].points
    assert term.order == (1,) and term.coef == 1j and term.at.tolist() == [0.3]
    bad = json.loads(json.dumps(SMALL))
    bad["distributions"]["dd"] = {"delta": {}, "poly": {}}
    with pytest.raises(ConfigError):
        load_config(write(tmp_path, bad, "bad.yaml"))


def test_module_entry_point(tmp_path):
    out = subprocess.run(
        [sys.executable, "-m", "roumieu.cli", "run", str(write(tmp_path, SMALL)), "--suites", "weights", "--out", str(tmp_path / "o")],
        capture_output=True,
        text=True,
    )
    assert out.returncode == 0 and "weights" in out.stdout and "PASS" in out.stdout
