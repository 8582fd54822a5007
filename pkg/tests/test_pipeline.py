import math
import random

import pytest

from pimsim.config import InstructionMix
from pimsim.errors import ConfigError
from pimsim.pipeline import (arithmetic_throughput, default_intensity_grid,
                             memory_roof_bytes_per_s, pipeline_cycles,
                             roofline_throughput, saturation_point_on_grid)


def issue_oracle(counts, interval=11, depth=14):
    """Cycle-stepped reference scheduler: single issue, per-tasklet spacing,
    greedy longest-remaining-first among eligible tasklets."""
    remaining = list(counts)
    last = [-interval] * len(counts)
    now = 0
    issued_last = 0
    while any(remaining):
        eligible = [i for i, r in enumerate(remaining)
                    if r > 0 and now - last[i] >= interval]
        if eligible:
            pick = max(eligible, key=lambda i: (remaining[i], -i))
            remaining[pick] -= 1
            last[pick] = now
            issued_last = now
        now += 1
    return issued_last + 1 + depth if any(counts) else depth


def test_single_tasklet_closed_form(dpu, table):
    report = pipeline_cycles([100], dpu, table)
    assert report.cycles == 11 * 100 + 14 == 1114
    assert report.limiting_factor == "per-tasklet dispatch"


def test_sixteen_tasklets_closed_form(dpu, table):
    report = pipeline_cycles([100] * 16, dpu, table)
    assert report.cycles == 1600 + 14
    assert report.limiting_factor == "aggregate issue"


def test_drain_only(dpu, table):
    assert pipeline_cycles([0] * 11, dpu, table).cycles == 14


def test_utilization_bounded(dpu, table):
    report = pipeline_cycles([50, 100, 150], dpu, table)
    assert 0 <= report.issue_utilization <= 1
    assert report.cycles >= 300


def test_zero_tasklets_rejected(dpu, table):
    with pytest.raises(ConfigError):
        pipeline_cycles([], dpu, table)


def test_accepts_instruction_mixes(dpu, table):
    mix = InstructionMix()
    mix.add_loop("add", "int32", 10, table)
    assert mix.total_instructions(table) == 60
    assert pipeline_cycles([mix], dpu, table).cycles == 60 * 11 + 14


def test_closed_form_matches_issue_oracle(dpu, table):
    rng = random.Random(11)
    for _ in range(200):
        t = rng.randint(1, 24)
        counts = [rng.randint(0, 120) for _ in range(t)]
        closed = pipeline_cycles(counts, dpu, table).cycles
        oracle = issue_oracle(counts)
        assert abs(closed - oracle) <= dpu.pipeline_depth, counts


def test_throughput_reference_points(dpu, table):
    assert arithmetic_throughput("add", "int32", 16, dpu, table) == pytest.approx(58.33e6, rel=1e-3)
    assert arithmetic_throughput("add", "int64", 16, dpu, table) == pytest.approx(50.0e6, rel=1e-9)
    assert arithmetic_throughput("mul", "int32", 16, dpu, table) == pytest.approx(10.94e6, rel=1e-3)
    # single tasklet: dispatch-interval scaling
    assert arithmetic_throughput("add", "int32", 1, dpu, table) == pytest.approx(58.33e6 / 11, rel=1e-3)


def test_throughput_saturates_at_dispatch_interval(dpu, table):
    for op, dtype in (("add", "int32"), ("mul", "int64"), ("div", "float64")):
        at11 = arithmetic_throughput(op, dtype, 11, dpu, table)
        values = [arithmetic_throughput(op, dtype, t, dpu, table)
                  for t in range(1, 25)]
        assert values == sorted(values)           # nondecreasing
        for t in range(11, 25):
            assert arithmetic_throughput(op, dtype, t, dpu, table) == at11


def test_doubling_8_to_16_matches_dispatch_ratio(dpu, table):
    """Fixed total work split over 8 vs 16 tasklets speeds up by 11/8."""
    work = 8800
    c8 = pipeline_cycles([work // 8] * 8, dpu, table).cycles
    c16 = pipeline_cycles([work // 16] * 16, dpu, table).cycles
    assert c8 / c16 == pytest.approx(11 / 8, rel=0.02)


def test_roofline_compute_bound_at_high_intensity(dpu, table):
    compute = arithmetic_throughput("add", "int32", 16, dpu, table)
    assert roofline_throughput("add", "int32", 16, 1e9, dpu, table) == compute


def test_roofline_memory_bound_at_low_intensity(dpu, table):
    oi = 1 / 2048
    expected = oi * memory_roof_bytes_per_s(16, dpu)
    assert roofline_throughput("add", "int32", 16, oi, dpu, table) == pytest.approx(expected)


def test_roofline_knees(dpu, table):
    grid = default_intensity_grid()
    targets = {("add", "int32"): 1 / 4, ("mul", "int32"): 1 / 32,
               ("add", "float32"): 1 / 64, ("mul", "float32"): 1 / 128}
    for (op, dtype), target in targets.items():
        knee = saturation_point_on_grid(op, dtype, 16, dpu, table, grid)
        assert abs(math.log2(knee) - math.log2(target)) <= 1.0


def test_roofline_rejects_nonpositive_intensity(dpu, table):
    with pytest.raises(ConfigError):
        roofline_throughput("add", "int32", 16, 0.0, dpu, table)
