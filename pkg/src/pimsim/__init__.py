"""Cycle-approximate model of a DRAM processing-in-memory system.

The package couples an analytic timing layer (pipeline throughput, DMA and
host-link pricing) with an event-driven tasklet runtime that executes a
16-workload benchmark suite functionally while producing per-DPU cycle
timelines.
"""

from .config import (DpuConfig, HostLinkConfig, InstructionCostTable,
                     InstructionMix, SyncCost, SystemConfig, dump_config,
                     load_config)
from .engine import Burst, Dma, KernelTimeline, Sync, deterministic_schedule
from .hostlink import TransferPlan, rank_partition, system_transfer_time, transfer_time
from .memory import (BandwidthReport, DmaRequest, dma_bandwidth, dma_latency,
                     mram_stream_bandwidth, mram_stream_saturation,
                     random_access_bandwidth, strided_bandwidth,
                     strided_crossover, wram_stream_bandwidth)
from .pipeline import (PipelineReport, arithmetic_throughput, pipeline_cycles,
                       roofline_throughput, saturation_intensity,
                       saturation_point_on_grid)
from .runtime import LaunchResult, MramSpace, TaskletContext, launch_kernel

__version__ = "0.1.0"
