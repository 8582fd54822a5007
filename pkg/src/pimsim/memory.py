"""WRAM and MRAM bandwidth models.

WRAM load/store costs one pipeline instruction regardless of access pattern,
so WRAM streaming bandwidth is a pure pipeline computation. MRAM moves data
through a serialized DMA engine with an affine latency (fixed cost plus cost
per byte); the streaming, strided, and random-access figures come from
replaying small synthetic kernels through the event engine.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .config import DpuConfig, InstructionCostTable
from .engine import Burst, Dma, deterministic_schedule, validate_dma
from .errors import CapacityError, ConfigError

WRAM_VARIANTS = ("COPY", "ADD", "SCALE", "TRIAD")
MRAM_VARIANTS = ("COPY-DMA", "COPY", "ADD", "SCALE", "TRIAD")

# threshold for calling a tasklet count "saturating": within 0.5% of the peak
_SATURATION_FRACTION = 0.995


@dataclass(frozen=True)
class DmaRequest:
    direction: str                  # mram_to_wram | wram_to_mram
    size: int                       # bytes
    issuing_tasklet: int = 0

    def engine_direction(self) -> str:
        return "read" if self.direction == "mram_to_wram" else "write"


@dataclass(frozen=True)
class BandwidthReport:
    bytes_moved: int
    cycles: int
    bandwidth: float                # bytes per second at the configured frequency
    saturating_tasklets: int = 0


def _report(bytes_moved: int, cycles: int, cfg: DpuConfig,
            saturating: int = 0) -> BandwidthReport:
    return BandwidthReport(
        bytes_moved=bytes_moved,
        cycles=cycles,
        bandwidth=bytes_moved * cfg.frequency_hz / cycles,
        saturating_tasklets=saturating,
    )


def dma_latency(req: DmaRequest, cfg: DpuConfig) -> int:
    """Affine DMA cost: fixed direction-dependent cost plus cost per byte."""
    validate_dma(req.size, cfg)
    alpha = cfg.dma_alpha_read if req.engine_direction() == "read" else cfg.dma_alpha_write
    return math.ceil(alpha + cfg.dma_beta * req.size)


def dma_bandwidth(size: int, direction: str, cfg: DpuConfig) -> float:
    """Bytes per second of a single transfer; asymptote is frequency / beta."""
    req = DmaRequest(direction=direction, size=size)
    return size * cfg.frequency_hz / dma_latency(req, cfg)


# ---------------------------------------------------------------------------
# WRAM streaming (pipeline-bound by definition)

def _wram_variant_shape(variant: str, table: InstructionCostTable):
    """(instructions, bytes accessed) per element group of the STREAM variant."""
    ld = table.cost("wram_load", "int64")
    st = table.cost("wram_store", "int64")
    if variant == "COPY":
        return ld + st, 16
    if variant == "ADD":
        return 2 * ld + table.cost("add", "int64") + st, 24
    if variant == "SCALE":
        return ld + table.cost("mul", "int64") + st, 16
    if variant == "TRIAD":
        return (2 * ld + table.cost("mul", "int64")
                + table.cost("add", "int64") + st, 24)
    raise ConfigError(f"unknown WRAM stream variant {variant!r}")


def wram_stream_bandwidth(variant: str, tasklets: int, cfg: DpuConfig,
                          table: InstructionCostTable) -> BandwidthReport:
    """Unrolled STREAM loop over WRAM: b bytes per n instructions per element."""
    if tasklets < 1:
        raise ConfigError("tasklets must be >= 1")
    n, b = _wram_variant_shape(variant, table)
    fill = min(tasklets, cfg.dispatch_interval)
    # `fill` tasklets each move b bytes per n * dispatch_interval cycles
    return _report(b * fill, n * cfg.dispatch_interval, cfg,
                   saturating=cfg.dispatch_interval)


# ---------------------------------------------------------------------------
# MRAM streaming through the serialized DMA engine

_LOOP_SETUP = 6      # per-tile address/size bookkeeping and branch

def _mram_variant_shape(variant: str, table: InstructionCostTable):
    """(reads per tile, instructions per element, bytes counted per element)."""
    if variant == "COPY-DMA":
        return 1, 0, 16
    if variant == "COPY":
        n, b = _wram_variant_shape("COPY", table)
        return 1, n, b
    if variant == "ADD":
        n, b = _wram_variant_shape("ADD", table)
        return 2, n, b
    if variant == "SCALE":
        n, b = _wram_variant_shape("SCALE", table)
        return 1, n, b
    if variant == "TRIAD":
        n, b = _wram_variant_shape("TRIAD", table)
        return 2, n, b
    raise ConfigError(f"unknown MRAM stream variant {variant!r}")


def _stream_traces(variant: str, tasklets: int, transfer_size: int,
                   cfg: DpuConfig, table: InstructionCostTable,
                   footprint_bytes: int):
    reads, instr_per_el, bytes_per_el = _mram_variant_shape(variant, table)
    elements_per_tile = transfer_size // 8
    buffers = reads + 1                      # input tiles plus the output tile
    if tasklets * buffers * transfer_size > cfg.wram_bytes:
        raise CapacityError(
            f"{tasklets} tasklets x {buffers} x {transfer_size} B tile buffers "
            f"exceed WRAM ({cfg.wram_bytes} B)")
    tiles = max(1, footprint_bytes // transfer_size)
    traces = [[] for _ in range(tasklets)]
    for tile in range(tiles):
        t = traces[tile % tasklets]
        t.append(Burst(_LOOP_SETUP))
        for _ in range(reads):
            t.append(Dma("read", transfer_size))
        if instr_per_el:
            t.append(Burst(instr_per_el * elements_per_tile))
        t.append(Dma("write", transfer_size))
    total_bytes = tiles * elements_per_tile * bytes_per_el
    return traces, total_bytes


def mram_stream_bandwidth(variant: str, tasklets: int, transfer_size: int,
                          cfg: DpuConfig, table: InstructionCostTable = None,
                          footprint_bytes: int = 1 << 20) -> BandwidthReport:
    """Sustained bandwidth of the streamed STREAM variants, event-driven."""
    if tasklets < 1:
        raise ConfigError("tasklets must be >= 1")
    validate_dma(transfer_size, cfg)
    table = table or InstructionCostTable()
    traces, total_bytes = _stream_traces(variant, tasklets, transfer_size, cfg,
                                         table, footprint_bytes)
    timeline = deterministic_schedule(traces, cfg)
    return _report(total_bytes, timeline.total_cycles, cfg)


def mram_stream_saturation(variant: str, transfer_size: int, cfg: DpuConfig,
                           table: InstructionCostTable = None,
                           max_tasklets: int = 16,
                           footprint_bytes: int = 1 << 20):
    """(saturating tasklet count, peak report) over 1..max_tasklets."""
    reports = [mram_stream_bandwidth(variant, t, transfer_size, cfg, table,
                                     footprint_bytes)
               for t in range(1, max_tasklets + 1)]
    peak = max(r.bandwidth for r in reports)
    for t, r in enumerate(reports, start=1):
        if r.bandwidth >= _SATURATION_FRACTION * peak:
            return t, reports[-1]
    return max_tasklets, reports[-1]


# ---------------------------------------------------------------------------
# strided and random access

_FINE_SETUP = 8      # per-element index/address computation and branch
_FINE_MODIFY = 3     # read-modify-write update between the two transfers


def _fine_grained_traces(tasklets: int, elements: int, cfg: DpuConfig):
    element_size = cfg.dma_min_bytes
    traces = [[] for _ in range(tasklets)]
    for i in range(elements):
        t = traces[i % tasklets]
        t.append(Burst(_FINE_SETUP))
        t.append(Dma("read", element_size))
        t.append(Burst(_FINE_MODIFY))
        t.append(Dma("write", element_size))
    return traces, elements * 2 * element_size


def random_access_bandwidth(tasklets: int, cfg: DpuConfig,
                            elements: int = 2048) -> BandwidthReport:
    """Read-modify-write on random array positions via fine-grained DMA.

    The positions themselves do not matter for timing (every 8-byte request
    costs the same), so the model is the fine-grained request stream.
    """
    if tasklets < 1:
        raise ConfigError("tasklets must be >= 1")
    traces, total_bytes = _fine_grained_traces(tasklets, elements, cfg)
    timeline = deterministic_schedule(traces, cfg)
    return _report(total_bytes, timeline.total_cycles, cfg)


def strided_bandwidth(mode: str, stride: int, tasklets: int, cfg: DpuConfig,
                      table: InstructionCostTable = None,
                      footprint_bytes: int = 1 << 19) -> BandwidthReport:
    """Effective (used-byte) bandwidth of strided copies.

    coarse: stream large contiguous segments and stride through them in WRAM,
    so only 1/stride of the transferred bytes are useful. fine: transfer only
    the used elements with minimum-size requests.
    """
    if stride < 1:
        raise ConfigError("stride must be >= 1")
    if tasklets < 1:
        raise ConfigError("tasklets must be >= 1")
    table = table or InstructionCostTable()
    if mode == "coarse":
        segment = min(1024, cfg.dma_max_bytes)
        used_per_tile = max(1, (segment // 8) // stride)
        tiles = max(1, footprint_bytes // segment)
        traces = [[] for _ in range(tasklets)]
        for tile in range(tiles):
            t = traces[tile % tasklets]
            t.append(Burst(_LOOP_SETUP))
            t.append(Dma("read", segment))
            t.append(Burst(2 * used_per_tile))       # WRAM pick/place of used elements
            t.append(Dma("write", segment))
        timeline = deterministic_schedule(traces, cfg)
        used_bytes = tiles * used_per_tile * 16      # 8 read + 8 written per element
        return _report(used_bytes, timeline.total_cycles, cfg)
    if mode == "fine":
        # per-used-element cost does not depend on the stride
        traces, total_bytes = _fine_grained_traces(tasklets, 2048, cfg)
        timeline = deterministic_schedule(traces, cfg)
        return _report(total_bytes, timeline.total_cycles, cfg)
    raise ConfigError(f"unknown strided mode {mode!r}")


def strided_crossover(tasklets: int, cfg: DpuConfig,
                      table: InstructionCostTable = None,
                      max_stride: int = 64) -> int:
    """Smallest stride at which fine-grained DMA overtakes coarse-grained."""
    fine = strided_bandwidth("fine", 1, tasklets, cfg, table)
    for stride in range(1, max_stride + 1):
        coarse = strided_bandwidth("coarse", stride, tasklets, cfg, table)
        if fine.bandwidth >= coarse.bandwidth:
            return stride
    return max_stride
