import json

import pytest

from pimsim.config import load_config
from pimsim.errors import ConfigError
from pimsim.experiments import (SweepSpec, run_sweep, scaling_rows,
                                weak_params, write_results)


def small_spec(kind, **kw):
    spec = SweepSpec(kind=kind, tasklets=[1, 2, 11, 16], dpus=[1, 4],
                     out_dir="unused")
    for k, v in kw.items():
        setattr(spec, k, v)
    return spec


def test_arith_sweep_rows(cfg):
    rows = run_sweep(small_spec("arith", ops=[("add", "int32")]), cfg)
    assert len(rows) == 4
    flat = [r["throughput_ops_per_s"] for r in rows if r["tasklets"] >= 11]
    assert len(set(flat)) == 1           # flat at 11 and beyond


def test_wram_sweep_covers_variants(cfg):
    rows = run_sweep(small_spec("wram-stream"), cfg)
    assert {r["variant"] for r in rows} == {"COPY", "ADD", "SCALE", "TRIAD"}


def test_gups_and_stride_sweeps(cfg):
    rows = run_sweep(small_spec("gups", tasklets=[1, 16]), cfg)
    assert len(rows) == 2
    rows = run_sweep(small_spec("stride", tasklets=[16], sizes=[1, 16]), cfg)
    assert {(r["mode"], r["stride"]) for r in rows} == \
        {("coarse", 1), ("coarse", 16), ("fine", 1), ("fine", 16)}


def test_roofline_sweep_knee_column(cfg):
    spec = small_spec("roofline", tasklets=[16], ops=[("add", "int32")])
    rows = run_sweep(spec, cfg)
    assert all(r["saturation_intensity"] == 0.25 for r in rows)


def test_transfer_sweep(cfg):
    spec = small_spec("transfer", dpus=[1, 64], sizes=[32 << 20])
    rows = run_sweep(spec, cfg)
    broadcast = [r for r in rows if r["mode"] == "broadcast"]
    assert all(r["direction"] == "cpu_to_dpu" for r in broadcast)


def test_bench_sweep(cfg):
    spec = small_spec("bench", bench_names=["va", "red"])
    rows = run_sweep(spec, cfg)
    assert [r["name"] for r in rows] == ["va", "red"]
    assert all(r["verdict"] == "pass" for r in rows)


def test_invalid_kind_rejected(cfg):
    spec = small_spec("arith")
    spec.kind = "warp"
    with pytest.raises(ConfigError):
        run_sweep(spec, cfg)


def test_empty_axis_rejected(cfg):
    spec = small_spec("arith", tasklets=[])
    with pytest.raises(ConfigError):
        run_sweep(spec, cfg)


def test_scaling_rows_strong_monotone(cfg):
    rows = scaling_rows("va", cfg, [1, 4, 16], weak=False)
    cycles = [r["dpu_cycles"] for r in rows]
    assert cycles[0] > cycles[1] > cycles[2]


def test_weak_params_scales_load():
    base = weak_params("va", {"n": 1}, 1)
    quad = weak_params("va", {"n": 1}, 4)
    assert quad["n"] == 4 * base["n"]
    assert weak_params("mlp", {}, 8)["batch"] == 8


def test_write_results_deterministic_csv(cfg, tmp_path):
    spec = small_spec("arith", ops=[("add", "int32")])
    rows = run_sweep(spec, cfg)
    csv1, json1 = write_results(rows, tmp_path / "a", "arith", cfg, spec)
    csv2, json2 = write_results(rows, tmp_path / "b", "arith", cfg, spec)
    assert open(csv1, "rb").read() == open(csv2, "rb").read()
    payload = json.load(open(json1))
    # JSON is the lossless superset: rows plus spec echo, config, timestamp
    assert payload["rows"] and payload["config"] and payload["timestamp"]
    assert payload["spec"]["kind"] == "arith"
    header = open(csv1).readline().strip().split(",")
    assert header == ["experiment", "op", "dtype", "tasklets",
                      "throughput_ops_per_s"]
