"""Microbenchmark sweeps and scaling experiments with CSV/JSON output.

Every sweep produces one row per grid point with all inputs echoed. CSV files
are byte-identical across reruns of the same spec; the JSON sidecar is the
lossless superset and carries the only timestamp.
"""

from __future__ import annotations

import csv
import io
import json
import os
import time
from dataclasses import dataclass, field, replace

import numpy as np

from . import benchmarks
from .config import SystemConfig, dump_config
from .errors import ConfigError
from .hostlink import TransferPlan, transfer_time
from .memory import (MRAM_VARIANTS, WRAM_VARIANTS, mram_stream_bandwidth,
                     random_access_bandwidth, strided_bandwidth,
                     wram_stream_bandwidth)
from .pipeline import (arithmetic_throughput, default_intensity_grid,
                       roofline_throughput, saturation_point_on_grid)

EXPERIMENT_KINDS = ("arith", "wram-stream", "mram-stream", "stride", "gups",
                    "roofline", "transfer", "bench", "scale-strong",
                    "scale-weak", "accept")


@dataclass
class SweepSpec:
    kind: str
    tasklets: list = field(default_factory=lambda: list(range(1, 25)))
    dpus: list = field(default_factory=lambda: [1, 4, 16, 64])
    sizes: list = field(default_factory=list)
    intensities: list = field(default_factory=default_intensity_grid)
    ops: list = field(default_factory=lambda: [("add", "int32")])
    bench_names: list = field(default_factory=lambda: list(benchmarks.BENCHMARK_NAMES))
    seed: int = 1
    out_dir: str = "results"

    def validate(self) -> None:
        if self.kind not in EXPERIMENT_KINDS:
            raise ConfigError(f"unknown experiment kind {self.kind!r}")
        for axis in ("tasklets", "dpus"):
            values = getattr(self, axis)
            if not values or any(v < 1 for v in values):
                raise ConfigError(f"{axis} axis must be nonempty and positive")


def run_sweep(spec: SweepSpec, cfg: SystemConfig) -> list:
    """Dispatch one sweep; returns the result rows (list of dicts)."""
    spec.validate()
    d, table = cfg.dpu, cfg.cost_table
    rows = []

    if spec.kind == "arith":
        for op, dtype in spec.ops:
            for t in spec.tasklets:
                rows.append({
                    "experiment": "arith", "op": op, "dtype": dtype,
                    "tasklets": t,
                    "throughput_ops_per_s": arithmetic_throughput(
                        op, dtype, t, d, table),
                })
    elif spec.kind == "wram-stream":
        for variant in WRAM_VARIANTS:
            for t in spec.tasklets:
                r = wram_stream_bandwidth(variant, t, d, table)
                rows.append({
                    "experiment": "wram-stream", "variant": variant,
                    "tasklets": t, "bytes": r.bytes_moved, "cycles": r.cycles,
                    "bandwidth_bytes_per_s": r.bandwidth,
                })
    elif spec.kind == "mram-stream":
        sizes = spec.sizes or [1024]
        for variant in MRAM_VARIANTS:
            for size in sizes:
                for t in spec.tasklets:
                    r = mram_stream_bandwidth(variant, t, size, d, table)
                    rows.append({
                        "experiment": "mram-stream", "variant": variant,
                        "transfer_bytes": size, "tasklets": t,
                        "bytes": r.bytes_moved, "cycles": r.cycles,
                        "bandwidth_bytes_per_s": r.bandwidth,
                    })
    elif spec.kind == "stride":
        strides = spec.sizes or [1, 2, 4, 8, 16, 32]
        for mode in ("coarse", "fine"):
            for stride in strides:
                for t in spec.tasklets:
                    r = strided_bandwidth(mode, stride, t, d, table)
                    rows.append({
                        "experiment": "stride", "mode": mode, "stride": stride,
                        "tasklets": t, "bytes": r.bytes_moved,
                        "cycles": r.cycles, "bandwidth_bytes_per_s": r.bandwidth,
                    })
    elif spec.kind == "gups":
        for t in spec.tasklets:
            r = random_access_bandwidth(t, d)
            rows.append({
                "experiment": "gups", "tasklets": t, "bytes": r.bytes_moved,
                "cycles": r.cycles, "bandwidth_bytes_per_s": r.bandwidth,
            })
    elif spec.kind == "roofline":
        for op, dtype in spec.ops:
            for t in spec.tasklets:
                knee = saturation_point_on_grid(op, dtype, t, d, table,
                                                spec.intensities)
                for oi in spec.intensities:
                    rows.append({
                        "experiment": "roofline", "op": op, "dtype": dtype,
                        "tasklets": t, "intensity_ops_per_byte": oi,
                        "throughput_ops_per_s": roofline_throughput(
                            op, dtype, t, oi, d, table),
                        "saturation_intensity": knee,
                    })
    elif spec.kind == "transfer":
        sizes = spec.sizes or [8, 64, 512, 2048, 1 << 15, 1 << 20, 32 << 20]
        for mode in ("serial", "parallel", "broadcast"):
            directions = ("cpu_to_dpu",) if mode == "broadcast" \
                else ("cpu_to_dpu", "dpu_to_cpu")
            for direction in directions:
                for n in spec.dpus:
                    for size in sizes:
                        plan = TransferPlan(mode, direction, (size,) * n)
                        r = transfer_time(plan, cfg)
                        rows.append({
                            "experiment": "transfer", "mode": mode,
                            "direction": direction, "dpus": n,
                            "buffer_bytes": size, "seconds": r.seconds,
                            "bandwidth_bytes_per_s": r.effective_bandwidth,
                        })
    elif spec.kind == "bench":
        for name in spec.bench_names:
            bspec = benchmarks.desk_spec(name, seed=spec.seed)
            record, _ = benchmarks.run_benchmark(name, bspec, cfg)
            rows.append(record.as_row())
    elif spec.kind in ("scale-strong", "scale-weak"):
        weak = spec.kind == "scale-weak"
        for name in spec.bench_names:
            rows.extend(scaling_rows(name, cfg, spec.dpus, weak=weak,
                                     seed=spec.seed))
    elif spec.kind == "accept":
        from .acceptance import run_acceptance
        for crit in run_acceptance(cfg):
            rows.append({"experiment": "accept", "criterion": crit.name,
                         "passed": crit.passed, "margin": crit.margin,
                         "detail": crit.detail})
    return rows


def scaling_rows(name: str, cfg: SystemConfig, dpu_counts, weak: bool,
                 seed: int = 1) -> list:
    """One row per DPU count; strong keeps the problem fixed, weak the load."""
    rows = []
    for n_dpus in dpu_counts:
        bspec = benchmarks.scale_spec(name, seed=seed, n_dpus=n_dpus)
        if weak:
            bspec = replace(bspec, params=weak_params(name, bspec.params,
                                                      n_dpus))
        record, _ = benchmarks.run_benchmark(name, bspec, cfg, check=False)
        row = record.as_row()
        row.update({"experiment": spec_kind_name(weak), "benchmark": name,
                    "dpus": n_dpus})
        if name == "nw":
            row["longest_diagonal_cycles"] = record.phase_cycles.get(
                "longest_diagonal", 0)
        rows.append(row)
    return rows


def spec_kind_name(weak: bool) -> str:
    return "scale-weak" if weak else "scale-strong"


# per-DPU load for weak scaling, scaled up with the DPU count
_WEAK_BASE = {
    "va": {"n": 1 << 16}, "gemv": {"rows": 64, "cols": 512},
    "spmv": {"rows": 256, "cols": 4096},
    "sel": {"n": 1 << 16}, "uni": {"n": 1 << 16},
    "bs": {"queries": 1 << 8, "n": 1 << 15},
    "ts": {"n": 1 << 12, "m": 64}, "bfs": {"vertices": 256},
    "mlp": {"layers": 3, "width": 64},
    "nw": {"bps": 64},
    "hst-s": {"height": 128, "width": 256, "bins": 256},
    "hst-l": {"height": 64, "width": 128, "bins": 256},
    "red": {"n": 1 << 16},
    "scan-ssa": {"n": 1 << 16}, "scan-rss": {"n": 1 << 16},
    "trns": {"mp": 64, "m": 8, "np": 1, "n": 8},
}

# DPU-count grids; the contention-bound histogram drops the single-DPU
# strong point to keep the full suite inside its runtime budget
STRONG_GRIDS = {"hst-l": [4, 16, 64]}


def strong_grid(name: str, default=(1, 4, 16, 64)) -> list:
    return list(STRONG_GRIDS.get(name, default))


def weak_params(name: str, base_params: dict, n_dpus: int) -> dict:
    """Grow the dataset linearly with the DPU count at fixed per-DPU load."""
    params = dict(base_params)
    base = _WEAK_BASE[name]
    params.update(base)
    if name in ("va", "sel", "uni", "red", "scan-ssa", "scan-rss"):
        params["n"] = base["n"] * n_dpus
    elif name == "gemv":
        params["rows"] = base["rows"] * n_dpus
    elif name == "spmv":
        params["rows"] = base["rows"] * n_dpus
    elif name == "bs":
        params["queries"] = base["queries"] * n_dpus
    elif name == "ts":
        params["n"] = base["n"] * n_dpus
    elif name == "bfs":
        params["vertices"] = base["vertices"] * n_dpus
    elif name == "mlp":
        params["batch"] = n_dpus      # data-parallel inference, one input per DPU
    elif name == "nw":
        params["bps"] = base["bps"] * n_dpus
        params["block"] = base["bps"]
    elif name in ("hst-s", "hst-l"):
        params["height"] = base["height"] * n_dpus
    elif name == "trns":
        params["np"] = n_dpus
    return params


# ---------------------------------------------------------------------------
# writers

def write_results(rows: list, out_dir: str, name: str,
                  cfg: SystemConfig = None, spec: SweepSpec = None) -> tuple:
    """Write rows to <out_dir>/<name>.csv and .json; returns the two paths."""
    os.makedirs(out_dir, exist_ok=True)
    csv_path = os.path.join(out_dir, f"{name}.csv")
    json_path = os.path.join(out_dir, f"{name}.json")

    columns: list = []
    for row in rows:
        for key in row:
            if key not in columns:
                columns.append(key)
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=columns, restval="",
                            lineterminator="\n")
    writer.writeheader()
    for row in rows:
        writer.writerow({k: _csv_value(v) for k, v in row.items()})
    with open(csv_path, "w") as fh:
        fh.write(buf.getvalue())

    payload = {
        "experiment": name,
        "timestamp": time.strftime("%Y-%m-%dT%H:%M:%S"),
        "rows": [_json_row(r) for r in rows],
    }
    if spec is not None:
        payload["spec"] = {k: v for k, v in vars(spec).items()}
    if cfg is not None:
        payload["config"] = dump_config(cfg)
    with open(json_path, "w") as fh:
        json.dump(payload, fh, indent=1, default=_json_value)
        fh.write("\n")
    return csv_path, json_path


def _csv_value(v):
    if isinstance(v, float):
        return repr(v)
    return v


def _json_row(row):
    return {k: _json_value(v) for k, v in row.items()}


def _json_value(v):
    if isinstance(v, (np.integer,)):
        return int(v)
    if isinstance(v, (np.floating,)):
        return float(v)
    if isinstance(v, np.ndarray):
        return v.tolist()
    if isinstance(v, tuple):
        return list(v)
    return v
