"""Fine-grained multithreaded pipeline timing.

A DPU issues at most one instruction per cycle, and consecutive instructions
of the same tasklet must be spaced ``dispatch_interval`` cycles apart, so at
least that many tasklets are needed to fill the pipeline. This module gives
the closed-form cycle count for a set of per-tasklet instruction mixes, the
per-operation throughput predictor, and the roofline combination of that
compute ceiling with the streamed memory bandwidth.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

from .config import DpuConfig, InstructionCostTable, InstructionMix
from .errors import ConfigError


@dataclass(frozen=True)
class PipelineReport:
    cycles: int
    issue_utilization: float           # issued instructions / cycles, <= 1
    limiting_factor: str               # "per-tasklet dispatch" | "aggregate issue"


def pipeline_cycles(mixes: list, cfg: DpuConfig,
                    table: InstructionCostTable) -> PipelineReport:
    """Closed-form pipeline cycles for one compute burst per tasklet.

    cycles = max(sum_i n_i, dispatch_interval * max_i n_i) + pipeline_depth.
    The sum term is the aggregate single-issue bound; the max term is the
    slowest tasklet gated by its own dispatch spacing; one pipeline_depth is
    added for the final drain.
    """
    if not mixes:
        raise ConfigError("pipeline_cycles requires at least one tasklet")
    if len(mixes) > cfg.max_tasklets:
        raise ConfigError(f"{len(mixes)} tasklets exceed max_tasklets={cfg.max_tasklets}")
    counts = [m.total_instructions(table) if isinstance(m, InstructionMix) else int(m)
              for m in mixes]
    total = sum(counts)
    slowest = max(counts)
    dispatch_bound = cfg.dispatch_interval * slowest
    cycles = max(total, dispatch_bound) + cfg.pipeline_depth
    limiting = "per-tasklet dispatch" if dispatch_bound >= total else "aggregate issue"
    return PipelineReport(
        cycles=cycles,
        issue_utilization=total / cycles if cycles else 0.0,
        limiting_factor=limiting,
    )


def arithmetic_throughput(op: str, dtype: str, tasklets: int, cfg: DpuConfig,
                          table: InstructionCostTable) -> float:
    """Operations per second for the streaming read-modify-write loop.

    frequency / instructions-per-operation, scaled by the pipeline fill
    fraction min(T, dispatch_interval) / dispatch_interval; flat at 11+
    tasklets.
    """
    if tasklets < 1:
        raise ConfigError("tasklets must be >= 1")
    n = table.throughput_instructions(op, dtype)
    fill = min(tasklets, cfg.dispatch_interval) / cfg.dispatch_interval
    return cfg.frequency_hz / n * fill


@lru_cache(maxsize=256)
def memory_roof_bytes_per_s(tasklets: int, cfg: DpuConfig) -> float:
    """Fetch-side streaming bandwidth bounding low-intensity kernels.

    A streamed read-modify-write moves each fetched byte twice through the
    serialized DMA engine (read tile in, write tile back), so the fetch rate
    is the full-duplex streaming rate over two. Uses the largest practical
    tile (1024 B); one enqueued tasklet keeps the engine busy, two saturate it.
    """
    from .memory import mram_stream_bandwidth
    report = mram_stream_bandwidth("COPY-DMA", max(1, min(tasklets, 4)), 1024, cfg,
                                   footprint_bytes=1 << 18)
    return report.bandwidth / 2.0


def roofline_throughput(op: str, dtype: str, tasklets: int,
                        operational_intensity: float, cfg: DpuConfig,
                        table: InstructionCostTable) -> float:
    """min(compute ceiling, operational_intensity * memory bandwidth), in OPS."""
    if operational_intensity <= 0:
        raise ConfigError("operational_intensity must be positive")
    compute = arithmetic_throughput(op, dtype, tasklets, cfg, table)
    memory = operational_intensity * memory_roof_bytes_per_s(tasklets, cfg)
    return min(compute, memory)


def saturation_intensity(op: str, dtype: str, tasklets: int, cfg: DpuConfig,
                         table: InstructionCostTable) -> float:
    """Operational intensity (OP/B) where the memory bound meets the compute bound."""
    compute = arithmetic_throughput(op, dtype, tasklets, cfg, table)
    return compute / memory_roof_bytes_per_s(tasklets, cfg)


def saturation_point_on_grid(op: str, dtype: str, tasklets: int, cfg: DpuConfig,
                             table: InstructionCostTable, grid: list) -> float:
    """Smallest grid intensity at which throughput reaches the compute ceiling."""
    compute = arithmetic_throughput(op, dtype, tasklets, cfg, table)
    memory_rate = memory_roof_bytes_per_s(tasklets, cfg)
    for oi in sorted(grid):
        if oi * memory_rate >= compute:
            return oi
    return max(grid)


def default_intensity_grid() -> list:
    """Powers of two from 1/2048 to 8 OP/B."""
    return [2.0 ** e for e in range(-11, 4)]
