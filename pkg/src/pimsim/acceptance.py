"""Acceptance criteria: every calibrated figure the model must reproduce.

Each criterion returns its pass/fail verdict together with the worst margin
observed, so a failing run localizes the regression immediately. Reference
values are the measured rates of the modeled 2,556-DPU system at 350 MHz.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass

import numpy as np

from . import benchmarks
from .config import SystemConfig, load_config
from .engine import Burst, deterministic_schedule
from .hostlink import TransferPlan, transfer_time
from .memory import (mram_stream_bandwidth, mram_stream_saturation,
                     random_access_bandwidth, strided_bandwidth,
                     wram_stream_bandwidth)
from .pipeline import (arithmetic_throughput, default_intensity_grid,
                       pipeline_cycles, saturation_point_on_grid)

# measured single-DPU reference points used for calibration checks
REFERENCE_THROUGHPUT_MOPS = {
    ("add", "int32"): 58.56, ("sub", "int32"): 58.56,
    ("add", "int64"): 50.16,
    ("mul", "int32"): (10.27, 11.27),
    ("mul", "int64"): 2.56, ("div", "int64"): 1.40,
    ("add", "float32"): 4.91, ("sub", "float32"): 4.59,
    ("mul", "float32"): 1.91, ("div", "float32"): 0.34,
    ("add", "float64"): 3.32, ("sub", "float64"): 3.11,
    ("mul", "float64"): 0.53, ("div", "float64"): 0.16,
}
REFERENCE_WRAM_MB_S = {"COPY": 2818.98, "ADD": 1682.46,
                       "SCALE": 42.03, "TRIAD": 61.66}
REFERENCE_MRAM_2048_MB_S = {"read": 628.23, "write": 633.22}
REFERENCE_COPY_DMA_MB_S = 624.02
REFERENCE_STRIDED_MB_S = {1: 622.36, 16: 38.95}
REFERENCE_GUPS_MB_S = 72.58
REFERENCE_LINK_GB_S = {
    ("serial", "cpu_to_dpu", 1): 0.33, ("serial", "dpu_to_cpu", 1): 0.12,
    ("parallel", "cpu_to_dpu", 64): 6.68, ("parallel", "dpu_to_cpu", 64): 4.74,
    ("broadcast", "cpu_to_dpu", 64): 16.88,
}
ROOFLINE_TARGETS = {("add", "int32"): 1 / 4, ("mul", "int32"): 1 / 32,
                    ("add", "float32"): 1 / 64, ("mul", "float32"): 1 / 128}

BALANCED_KERNELS = ("va", "gemv", "sel", "uni", "bs", "ts", "mlp",
                    "hst-s", "hst-l", "red", "scan-ssa", "scan-rss", "trns")


@dataclass
class CriterionResult:
    name: str
    passed: bool
    margin: float          # worst relative distance from its bound (<=1 passes)
    detail: str

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return f"[{status}] {self.name:28s} margin={self.margin:7.3f}  {self.detail}"


def _rel(value: float, reference: float) -> float:
    return abs(value - reference) / abs(reference)


class _Check:
    """Collects sub-checks; margin is the worst fraction-of-tolerance used."""

    def __init__(self):
        self.worst = 0.0
        self.failures = []

    def within(self, label: str, value: float, reference: float,
               tolerance: float) -> None:
        frac = _rel(value, reference) / tolerance if tolerance else math.inf
        self.worst = max(self.worst, frac)
        if frac > 1.0:
            self.failures.append(f"{label}={value:.6g} want {reference:.6g}"
                                 f"±{tolerance:.0%}")

    def true(self, label: str, condition: bool) -> None:
        if not condition:
            self.worst = max(self.worst, math.inf)
            self.failures.append(label)

    def result(self, name: str, detail: str = "") -> CriterionResult:
        extra = "; ".join(self.failures[:4])
        return CriterionResult(name, not self.failures, self.worst,
                               extra or detail)


def criterion_arithmetic(cfg: SystemConfig) -> CriterionResult:
    d, table = cfg.dpu, cfg.cost_table
    c = _Check()
    f = d.frequency_hz
    for tasklets in (11, 16, 24):
        c.within("add/int32", arithmetic_throughput("add", "int32", tasklets, d, table),
                 f / 6, 1e-12)
        c.within("add/int64", arithmetic_throughput("add", "int64", tasklets, d, table),
                 f / 7, 1e-12)
        c.within("mul/int32", arithmetic_throughput("mul", "int32", tasklets, d, table),
                 f / 32, 1e-12)
    lo, hi = REFERENCE_THROUGHPUT_MOPS[("mul", "int32")]
    mul = arithmetic_throughput("mul", "int32", 16, d, table) / 1e6
    c.true(f"mul/int32 {mul:.2f} in 5% of [{lo}, {hi}]",
           lo * 0.95 <= mul <= hi * 1.05)
    c.within("add/int32 vs measured",
             arithmetic_throughput("add", "int32", 16, d, table) / 1e6,
             REFERENCE_THROUGHPUT_MOPS[("add", "int32")], 0.05)
    c.within("add/int64 vs measured",
             arithmetic_throughput("add", "int64", 16, d, table) / 1e6,
             REFERENCE_THROUGHPUT_MOPS[("add", "int64")], 0.05)
    return c.result("1 arithmetic throughput")


def criterion_wram(cfg: SystemConfig) -> CriterionResult:
    d, table = cfg.dpu, cfg.cost_table
    c = _Check()
    c.within("COPY", wram_stream_bandwidth("COPY", 16, d, table).bandwidth,
             2800e6, 1e-12)
    c.within("ADD", wram_stream_bandwidth("ADD", 16, d, table).bandwidth,
             1680e6, 1e-12)
    for variant in ("SCALE", "TRIAD"):
        c.within(variant, wram_stream_bandwidth(variant, 16, d, table).bandwidth / 1e6,
                 REFERENCE_WRAM_MB_S[variant], 0.10)
    return c.result("2 WRAM streaming")


def criterion_mram(cfg: SystemConfig) -> CriterionResult:
    from .memory import DmaRequest, dma_bandwidth, dma_latency
    d = cfg.dpu
    c = _Check()
    c.within("read 8 B", dma_latency(DmaRequest("mram_to_wram", 8), d), 81, 1e-12)
    c.within("read 128 B", dma_latency(DmaRequest("mram_to_wram", 128), d), 141, 1e-12)
    c.within("read 2048 B", dma_bandwidth(2048, "mram_to_wram", d) / 1e6,
             REFERENCE_MRAM_2048_MB_S["read"], 0.05)
    c.within("write 2048 B", dma_bandwidth(2048, "wram_to_mram", d) / 1e6,
             REFERENCE_MRAM_2048_MB_S["write"], 0.05)
    return c.result("3 MRAM latency/bandwidth")


def criterion_stream_saturation(cfg: SystemConfig) -> CriterionResult:
    d, table = cfg.dpu, cfg.cost_table
    c = _Check()
    expect = {"COPY-DMA": (2, 2), "COPY": (3, 5), "ADD": (5, 7),
              "SCALE": (11, 11), "TRIAD": (11, 11)}
    sats = {}
    for variant, (lo, hi) in expect.items():
        sat, _ = mram_stream_saturation(variant, 1024, d, table)
        sats[variant] = sat
        c.true(f"{variant} saturates at {sat}, want [{lo},{hi}]",
               lo <= sat <= hi)
    bw = mram_stream_bandwidth("COPY-DMA", 16, 1024, d, table).bandwidth / 1e6
    c.within("COPY-DMA bandwidth", bw, REFERENCE_COPY_DMA_MB_S, 0.05)
    return c.result("4 stream saturation",
                    " ".join(f"{k}={v}" for k, v in sats.items()))


def criterion_strided(cfg: SystemConfig) -> CriterionResult:
    d = cfg.dpu
    c = _Check()
    for stride, ref in REFERENCE_STRIDED_MB_S.items():
        bw = strided_bandwidth("coarse", stride, 16, d).bandwidth / 1e6
        c.within(f"coarse stride {stride}", bw, ref, 0.05)
    gups = random_access_bandwidth(16, d).bandwidth / 1e6
    c.within("random access", gups, REFERENCE_GUPS_MB_S, 0.10)
    return c.result("5 strided and random access")


def criterion_roofline(cfg: SystemConfig) -> CriterionResult:
    d, table = cfg.dpu, cfg.cost_table
    grid = default_intensity_grid()
    c = _Check()
    for (op, dtype), target in ROOFLINE_TARGETS.items():
        knee = saturation_point_on_grid(op, dtype, 16, d, table, grid)
        steps = abs(math.log2(knee) - math.log2(target))
        c.true(f"{op}/{dtype} knee {knee} vs {target} ({steps:.0f} steps)",
               steps <= 1.0)
    # per-tasklet curves flatten once the pipeline is full
    from .pipeline import roofline_throughput
    for oi in (1 / 64, 1 / 4, 8.0):
        t11 = roofline_throughput("add", "int32", 11, oi, d, table)
        for t in (12, 16, 24):
            c.within(f"flat T={t} oi={oi}", roofline_throughput(
                "add", "int32", t, oi, d, table), t11, 1e-9)
    return c.result("6 roofline knees")


def criterion_hostlink(cfg: SystemConfig) -> CriterionResult:
    c = _Check()
    size = 32 << 20
    for (mode, direction, n), ref in REFERENCE_LINK_GB_S.items():
        plan = TransferPlan(mode, direction, (size,) * n)
        bw = transfer_time(plan, cfg).effective_bandwidth / 1e9
        c.within(f"{mode}/{direction}/{n}", bw, ref, 0.02)
    flat = [transfer_time(TransferPlan("serial", "cpu_to_dpu", (size,) * n),
                          cfg).effective_bandwidth for n in (1, 4, 16, 64)]
    c.within("serial flat", max(flat), min(flat), 1e-9)
    return c.result("7 host link calibration")


def criterion_functional(cfg: SystemConfig, seeds: int = 100) -> CriterionResult:
    c = _Check()
    failures = 0
    for seed in range(1, seeds + 1):
        for name in benchmarks.BENCHMARK_NAMES:
            record, _ = benchmarks.run_benchmark(
                name, benchmarks.desk_spec(name, seed=seed), cfg)
            if not record.correct:
                failures += 1
                c.true(f"{name} seed {seed}", False)
    return c.result("8 functional correctness",
                    f"{seeds} seeds x {len(benchmarks.BENCHMARK_NAMES)} benchmarks")


def criterion_scaling(cfg: SystemConfig) -> CriterionResult:
    from .experiments import scaling_rows, strong_grid
    c = _Check()
    for name in BALANCED_KERNELS:
        rows = scaling_rows(name, cfg, strong_grid(name), weak=False)
        cycles = [r["dpu_cycles"] for r in rows]
        for a, b in zip(cycles, cycles[1:]):
            c.true(f"{name} strong speedup {a / b:.2f} >= 3.1", a / b >= 3.1)
        rows = scaling_rows(name, cfg, [1, 4, 16, 64], weak=True)
        weak_cycles = [r["dpu_cycles"] for r in rows]
        flat = max(weak_cycles) / min(weak_cycles) - 1
        c.true(f"{name} weak flat {flat:.3f} <= 0.05", flat <= 0.05)

    # BFS host-side merge cost rises linearly with the DPU count
    bfs_rows = scaling_rows("bfs", cfg, [1, 2, 4, 8, 16, 32, 64], weak=False)
    x = np.array([r["dpus"] for r in bfs_rows], dtype=float)
    y = np.array([r["inter_dpu_seconds"] for r in bfs_rows])
    slope, intercept = np.polyfit(x, y, 1)
    fit = slope * x + intercept
    ss_res = float(np.sum((y - fit) ** 2))
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    r2 = 1 - ss_res / ss_tot if ss_tot else 1.0
    c.true(f"bfs inter-DPU linear R2={r2:.4f} >= 0.95", r2 >= 0.95)

    nw_rows = scaling_rows("nw", cfg, [1, 2, 4, 8], weak=True)
    diag = [r["longest_diagonal_cycles"] for r in nw_rows]
    flat = max(diag) / min(diag) - 1
    c.true(f"nw longest-diagonal flat {flat:.3f} <= 0.10", flat <= 0.10)
    total = [r["dpu_cycles"] for r in nw_rows]
    c.true("nw full problem grows", total[-1] > 2 * total[0])
    return c.result("9 scaling shapes")


def criterion_crossovers(cfg: SystemConfig) -> CriterionResult:
    c = _Check()
    image = None
    for bins in (256, 512, 1024):
        s, l = _hst_pair(cfg, bins)
        c.true(f"hst-s wins at {bins} bins ({s} vs {l})", s < l)
    for bins in (4096,):
        s, l = _hst_pair(cfg, bins)
        c.true(f"hst-l wins at {bins} bins ({s} vs {l})", l < s)

    for n in (2048, 8192):
        ssa, rss = _scan_pair(cfg, n)
        c.true(f"scan-ssa wins at {n} ({ssa} vs {rss})", ssa < rss)
    for n in (16384, 65536):
        ssa, rss = _scan_pair(cfg, n)
        c.true(f"scan-rss wins at {n} ({ssa} vs {rss})", rss < ssa)

    cycles = {}
    for variant in ("SINGLE", "BARRIER", "HANDS"):
        spec = benchmarks.BenchmarkSpec(
            "red", {"n": 2 * 1024 * 1024, "variant": variant},
            tasklets=16, n_dpus=1)
        record, _ = benchmarks.run_red(spec, cfg, check=False)
        cycles[variant] = record.dpu_cycles
    c.true(f"red SINGLE {cycles['SINGLE']} <= HANDS {cycles['HANDS']}",
           cycles["SINGLE"] <= cycles["HANDS"])
    c.true(f"red HANDS {cycles['HANDS']} < BARRIER {cycles['BARRIER']}",
           cycles["HANDS"] < cycles["BARRIER"])
    c.within("red SINGLE vs HANDS", cycles["SINGLE"], cycles["HANDS"], 0.10)
    return c.result("10 variant crossovers")


def _hst_pair(cfg: SystemConfig, bins: int):
    params = {"height": 96, "width": 256, "bins": bins}
    s, _ = benchmarks.run_hst_s(benchmarks.BenchmarkSpec(
        "hst-s", dict(params), tasklets=16, n_dpus=1), cfg, check=False)
    l, _ = benchmarks.run_hst_l(benchmarks.BenchmarkSpec(
        "hst-l", dict(params), tasklets=16, n_dpus=1), cfg, check=False)
    return s.dpu_cycles, l.dpu_cycles


def _scan_pair(cfg: SystemConfig, n: int):
    ssa, _ = benchmarks.run_scan(benchmarks.BenchmarkSpec(
        "scan-ssa", {"n": n, "variant": "ssa"}, tasklets=16, n_dpus=1),
        cfg, check=False)
    rss, _ = benchmarks.run_scan(benchmarks.BenchmarkSpec(
        "scan-rss", {"n": n, "variant": "rss"}, tasklets=16, n_dpus=1),
        cfg, check=False)
    return ssa.dpu_cycles, rss.dpu_cycles


def criterion_backend_agreement(cfg: SystemConfig, trials: int = 1000) -> CriterionResult:
    d, table = cfg.dpu, cfg.cost_table
    rng = random.Random(20240 + trials)
    c = _Check()
    worst = 0
    for _ in range(trials):
        tasklets = rng.randint(1, d.max_tasklets)
        mix = [rng.randint(0, 600) for _ in range(tasklets)]
        closed = pipeline_cycles(mix, d, table).cycles
        event = deterministic_schedule([[Burst(n)] for n in mix], d).total_cycles
        worst = max(worst, abs(closed - event))
    c.true(f"worst |closed-event| = {worst} <= {d.pipeline_depth}",
           worst <= d.pipeline_depth)
    return c.result("11 backend agreement", f"worst diff {worst} cycles")


def run_acceptance(cfg: SystemConfig = None, seeds: int = 100,
                   verbose: bool = False) -> list:
    """Run all criteria; returns the list of CriterionResult."""
    cfg = cfg or load_config()
    checks = [
        criterion_arithmetic,
        criterion_wram,
        criterion_mram,
        criterion_stream_saturation,
        criterion_strided,
        criterion_roofline,
        criterion_hostlink,
        lambda c: criterion_functional(c, seeds=seeds),
        criterion_scaling,
        criterion_crossovers,
        criterion_backend_agreement,
    ]
    results = []
    for check in checks:
        result = check(cfg)
        results.append(result)
        if verbose:
            print(result.line(), flush=True)
    return results
