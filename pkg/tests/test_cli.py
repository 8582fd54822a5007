import json
import os

from pimsim.cli import main
from pimsim.config import load_config


def test_dump_config(capsys):
    assert main(["arith", "--dump-config"]) == 0
    out = capsys.readouterr().out
    assert "frequency_hz = 350000000.0" in out
    # the dump round-trips through the loader
    assert load_config(out).dpu.dispatch_interval == 11


def test_arith_sweep_writes_outputs(tmp_path, capsys):
    code = main(["arith", "--out", str(tmp_path), "--tasklets", "1", "11"])
    assert code == 0
    assert (tmp_path / "arith.csv").exists()
    payload = json.loads((tmp_path / "arith.json").read_text())
    assert payload["rows"]


def test_bench_subset(tmp_path):
    code = main(["bench", "--out", str(tmp_path), "--bench", "va"])
    assert code == 0
    text = (tmp_path / "bench.csv").read_text()
    assert "va" in text and "pass" in text


def test_config_file_and_seed(tmp_path):
    config = tmp_path / "alt.cfg"
    config.write_text("frequency_hz = 267e6\n")
    code = main(["gups", "--config", str(config), "--out", str(tmp_path),
                 "--tasklets", "16"])
    assert code == 0


def test_missing_config_errors(tmp_path, capsys):
    assert main(["arith", "--config", str(tmp_path / "nope.cfg")]) == 1
    assert "error" in capsys.readouterr().err


def test_bad_config_errors(tmp_path, capsys):
    config = tmp_path / "bad.cfg"
    config.write_text("dispatch_interval_cycles = 20\n")
    assert main(["arith", "--config", str(config)]) == 1
    assert "dispatch_interval" in capsys.readouterr().err
