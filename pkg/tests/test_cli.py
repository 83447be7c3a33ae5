import csv
import io
from pathlib import Path

import pytest

from fwbreak.cli import main, parse_range

CONFIGS = Path(__file__).resolve().parents[1] / "configs"


def test_run_writes_outputs(tmp_path, capsys):
    assert main(["run", str(CONFIGS / "zero.yaml"), "--out", str(tmp_path)]) == 0
    names = sorted(p.name for p in tmp_path.iterdir())
    assert "zero.json" in names and "zero.csv" in names
    assert {f"zero_{k}.svg" for k in ("norms", "slopes", "envelope", "profile_snapshots")} <= set(names)
    assert "Completed" in capsys.readouterr().out


def test_run_no_plots(tmp_path):
    assert main(["run", str(CONFIGS / "zero.yaml"), "--out", str(tmp_path), "--no-plots"]) == 0
    assert not list(tmp_path.glob("*.svg"))


def test_plot_from_artifact(tmp_path):
    main(["run", str(CONFIGS / "zero.yaml"), "--out", str(tmp_path), "--no-plots"])
    out = tmp_path / "n.svg"
    assert main(["plot", str(tmp_path / "zero.json"), "--kind", "norms", "--out", str(out)]) == 0
    assert out.exists()
    assert main(["plot", str(tmp_path / "zero.json"), "--kind", "slopes"]) == 0
    assert (tmp_path / "zero_slopes.svg").exists()


def test_bad_config_exit_code(tmp_path, capsys):
    bad = tmp_path / "bad.yaml"
    bad.write_text("initial_data: zero\nn: 100\nt_final: 0.1\n")
    assert main(["run", str(bad), "--out", str(tmp_path)]) == 2
    assert "n: must be a power of two" in capsys.readouterr().err


def test_unknown_plot_kind_rejected(tmp_path):
    with pytest.raises(SystemExit):
        main(["plot", str(tmp_path / "a.json"), "--kind", "bogus"])


def test_verify_filter(capsys):
    assert main(["verify", "--filter", "kernel"]) == 0
    out = capsys.readouterr().out
    assert "PASS" in out and "FAIL" not in out


def test_sweep_table(tmp_path):
    cfg = tmp_path / "sweep.yaml"
    cfg.write_text("initial_data: {kind: two_mode, a1: -0.5, a2: -0.25}\nn: 64\nt_final: 0.02\n")
    out = tmp_path / "table.csv"
    assert main(["sweep", str(cfg), "--param", "initial_data.a1=-0.5:0.0:3", "--out", str(out)]) == 0
    table = list(csv.DictReader(io.StringIO(out.read_text())))
    assert [float(r["initial_data.a1"]) for r in table] == [-0.5, -0.25, 0.0]
    assert table[0]["criterion_met"] == "True"
    assert table[-1]["predicted_T_upper"] == ""


def test_sweep_call_string_template(tmp_path, capsys):
    cfg = tmp_path / "sweep.yaml"
    cfg.write_text("initial_data: sine(0.1, 1)\nn: 32\nt_final: 0.01\n")
    assert main(["sweep", str(cfg), "--param", "initial_data.a=0.1,0.2"]) == 0
    lines = capsys.readouterr().out.strip().splitlines()
    assert lines[0].startswith("initial_data.a,criterion_value") and len(lines) == 3


def test_sweep_bad_param(tmp_path):
    assert main(["sweep", str(CONFIGS / "zero.yaml"), "--param", "n"]) == 2


def test_parse_range():
    assert parse_range("0:1:3") == [0.0, 0.5, 1.0]
    assert parse_range("1,2.5") == [1.0, 2.5]
    with pytest.raises(ValueError):
        parse_range("0:1")
