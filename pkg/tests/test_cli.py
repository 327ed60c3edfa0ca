import csv
import subprocess
import sys

import pytest

from leonetsim import __version__
from leonetsim.cli import EXIT_CONFIG, EXIT_OK, EXIT_USAGE, OUT_ENV, main
from leonetsim.fileio.ins import read_ins
from leonetsim.scenario import template_text

from test_fileio import SMALL


@pytest.fixture
def small(tmp_path):
    cfg = tmp_path / "small.yaml"
    cfg.write_text(SMALL)
    return cfg


def _rows(path):
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


@pytest.mark.parametrize("cmd", [[], ["gen"], ["run"], ["flow"], ["analyze"]])
def test_version_and_help(cmd, capsys):
    with pytest.raises(SystemExit) as exc:
        main(cmd + ["--version"])
    assert exc.value.code == 0
    assert capsys.readouterr().out.strip() == f"leonetsim {__version__}"
    with pytest.raises(SystemExit) as exc:
        main(cmd + ["--help"])
    assert exc.value.code == 0


def test_module_entry_point():
    out = subprocess.run([sys.executable, "-m", "leonetsim", "--version"], capture_output=True, text=True)
    assert out.returncode == 0 and __version__ in out.stdout


def test_bad_usage_exits_1(tmp_path, capsys):
    with pytest.raises(SystemExit) as exc:
        main(["frobnicate"])
    assert exc.value.code == EXIT_USAGE
    assert main(["gen", str(tmp_path / "missing.yaml")]) == EXIT_USAGE
    assert main(["run", str(tmp_path / "nowhere"), "contest"]) == EXIT_USAGE


def test_config_errors_exit_2(tmp_path, capsys):
    bad = tmp_path / "bad.yaml"
    bad.write_text("name: x\n")
    assert main(["gen", str(bad), "--out", str(tmp_path)]) == EXIT_CONFIG
    assert "layers" in capsys.readouterr().err
    bad.write_text(SMALL.replace("planes: 5", "planes: 7"))
    assert main(["gen", str(bad), "--out", str(tmp_path)]) == EXIT_CONFIG


def test_gen_uses_out_env(small, tmp_path, monkeypatch, capsys):
    monkeypatch.setenv(OUT_ENV, str(tmp_path / "env"))
    assert main(["gen", str(small)]) == EXIT_OK
    folder = tmp_path / "env" / "small.sce"
    assert capsys.readouterr().out.strip() == str(folder)
    assert (folder / "config.yaml").exists() and len(list(folder.iterdir())) == 13


def test_run_and_analyze(small, tmp_path, capsys):
    assert main(["gen", str(small), "--out", str(tmp_path)]) == EXIT_OK
    sce = tmp_path / "small.sce"
    ins = tmp_path / "e2e.ins"
    args = ["run", str(sce), "edge2edge", "--pair", "GS-0000", "MS-000", "--out", str(ins)]
    assert main(args) == EXIT_OK
    first = ins.read_bytes()
    assert main(args) == EXIT_OK
    assert ins.read_bytes() == first
    series = read_ins(first.decode())
    assert len(series.records) == 6
    assert series.meta["scenario_name"] == "small" and series.meta["grid"]["count"] == 6
    # the aircraft only exists from 20 s to 40 s
    assert not any(r.found for r in series.records if r.t in (0.0, 10.0, 50.0))

    table = tmp_path / "e2e.csv"
    capsys.readouterr()
    assert main(["analyze", str(ins), "--csv", str(table)]) == EXIT_OK
    assert capsys.readouterr().out.startswith("6 records")
    rows = _rows(table)
    assert len(rows) == 6 and rows[0]["pair"] == "GS-0000-MS-000"
    assert rows[0]["latency_ms"] == ""

    assert main(["analyze", str(ins), "--csv", str(table), "--metrics", "churn"]) == EXIT_OK
    assert all(r["stretch"] == "" for r in _rows(table))
    assert main(["analyze", str(ins), "--metrics", "speed"]) == EXIT_USAGE


def test_run_errors(small, tmp_path):
    assert main(["run", str(small), "edge2edge", "--out", str(tmp_path / "x.ins")]) == EXIT_USAGE
    assert main(["run", str(small), "edge2edge", "--pair", "GS-0000", "GS-0009"]) == EXIT_CONFIG
    assert main(["run", str(small), "contest", "--threshold", "0"]) == EXIT_USAGE


def test_contest(small, tmp_path):
    ins = tmp_path / "c.ins"
    assert main(["run", str(small), "contest", "--threshold", "3", "--policy", "least_hop", "--out", str(ins)]) == 0
    series = read_ins(ins.read_text())
    assert len(series.records) == 6 * 3
    assert series.meta["policy"] == "least_hop"


def test_analyze_malformed(tmp_path):
    bad = tmp_path / "bad.ins"
    bad.write_text('{"format": "leonetsim-ins/1"}\n{"t": 0}\n')
    assert main(["analyze", str(bad)]) == EXIT_CONFIG


def test_flow_density10(tmp_path, capsys):
    cfg = tmp_path / "density10.yaml"
    cfg.write_text(template_text("density10"))
    out = tmp_path / "flow.csv"
    assert main(["flow", str(cfg), "--pairs", "100", "--out", str(out)]) == EXIT_OK
    rows = _rows(out)
    assert len(rows) == 10
    assert all(r["structure"] == "*Grid 1" and r["density"] == "100" for r in rows)
    assert all(float(r["capacity_bps"]) > 0 for r in rows)
    summary = _rows(tmp_path / "flow_summary.csv")
    assert [r["metric"] for r in summary] == ["throughput_bps", "capacity_bps", "utilization"]
    text = out.read_bytes()
    assert main(["flow", str(cfg), "--pairs", "100", "--out", str(out)]) == EXIT_OK
    assert out.read_bytes() == text
    assert main(["flow", str(cfg), "--pairs", "0"]) == EXIT_CONFIG
    assert main(["flow", str(cfg), "--structure", "Hex 2"]) == EXIT_CONFIG


def test_flow_structure_override(tmp_path):
    cfg = tmp_path / "density10.yaml"
    cfg.write_text(template_text("density10"))
    out = tmp_path / "plus.csv"
    assert main(["flow", str(cfg), "--pairs", "20", "--structure", "+Grid 1", "--aggregate", "sum",
                 "--out", str(out)]) == EXIT_OK
    rows = _rows(out)
    assert {r["structure"] for r in rows} == {"+Grid 1"}
    assert all(0.0 <= float(r["utilization"]) <= 1.0 for r in rows)
