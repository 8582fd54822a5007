"""CPU<->DPU transfer pricing.

Single-transfer bandwidth follows a saturating curve with its knee at 2 KB.
Parallel transfers inside a rank scale by a calibrated sublinear speedup
table; serial transfers add up; broadcast pushes one buffer to every DPU at
its own (higher) rate. Transfers to different ranks are not simultaneous, so
rank times add.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .config import HostLinkConfig, SystemConfig
from .errors import TransferPlanError

MODES = ("serial", "parallel", "broadcast")
DIRECTIONS = ("cpu_to_dpu", "dpu_to_cpu")


@dataclass(frozen=True)
class TransferPlan:
    mode: str
    direction: str
    sizes: tuple                   # per-DPU buffer sizes in bytes

    def __post_init__(self):
        if self.mode not in MODES:
            raise TransferPlanError(f"unknown transfer mode {self.mode!r}")
        if self.direction not in DIRECTIONS:
            raise TransferPlanError(f"unknown direction {self.direction!r}")
        if not self.sizes:
            raise TransferPlanError("a transfer plan needs at least one buffer")
        if any(s < 0 for s in self.sizes):
            raise TransferPlanError("buffer sizes must be nonnegative")
        if self.mode == "parallel" and len(set(self.sizes)) > 1:
            raise TransferPlanError("parallel transfers require equal per-DPU sizes")
        if self.mode == "broadcast" and self.direction != "cpu_to_dpu":
            raise TransferPlanError("broadcast transfers only run CPU to DPU")


@dataclass(frozen=True)
class TransferReport:
    seconds: float
    payload_bytes: int
    effective_bandwidth: float     # payload / seconds


def _single_bandwidth(size: float, bmax: float, link: HostLinkConfig) -> float:
    return bmax * size / (size + link.s_half_bytes)


def _speedup(table: dict, n: int) -> float:
    if n in table:
        return table[n]
    keys = sorted(table)
    if n <= keys[0]:
        return table[keys[0]]
    if n >= keys[-1]:
        return table[keys[-1]]
    for lo, hi in zip(keys, keys[1:]):
        if lo < n < hi:
            frac = (math.log(n) - math.log(lo)) / (math.log(hi) - math.log(lo))
            return math.exp(math.log(table[lo]) * (1 - frac) + math.log(table[hi]) * frac)
    return table[keys[-1]]


def transfer_time(plan: TransferPlan, cfg: SystemConfig) -> TransferReport:
    """Seconds and effective bandwidth of one transfer within a single rank."""
    link = cfg.host_link
    bmax = (link.cpu_dpu_bmax_bytes_per_s if plan.direction == "cpu_to_dpu"
            else link.dpu_cpu_bmax_bytes_per_s)
    payload = int(sum(plan.sizes))
    if payload == 0:
        return TransferReport(0.0, 0, 0.0)

    if plan.mode == "serial":
        seconds = sum(s / _single_bandwidth(s, bmax, link)
                      for s in plan.sizes if s > 0)
    elif plan.mode == "parallel":
        size = plan.sizes[0]
        n = len(plan.sizes)
        table = (link.cpu_dpu_speedup if plan.direction == "cpu_to_dpu"
                 else link.dpu_cpu_speedup)
        single = size / _single_bandwidth(size, bmax, link)
        seconds = single * n / _speedup(table, n)
    else:  # broadcast
        size = plan.sizes[0]
        if len(set(plan.sizes)) > 1:
            raise TransferPlanError("broadcast sends one buffer to every DPU")
        n = len(plan.sizes)
        # scale the single-DPU curve up to the broadcast peak at a full rank
        base = _single_bandwidth(size, link.cpu_dpu_bmax_bytes_per_s, link)
        peak_ratio = link.broadcast_bmax_bytes_per_s / link.cpu_dpu_bmax_bytes_per_s
        rate = base * _speedup({1: 1.0, 64: peak_ratio}, n)
        seconds = size * n / rate

    seconds = max(seconds, payload / link.rank_peak_bytes_per_s)
    return TransferReport(seconds, payload, payload / seconds)


def rank_partition(plan: TransferPlan, cfg: SystemConfig) -> list:
    """Split a whole-system plan into per-rank sub-plans (ranks serialize)."""
    per_rank = cfg.dpus_per_rank
    if len(plan.sizes) > cfg.total_dpus:
        raise TransferPlanError(
            f"plan covers {len(plan.sizes)} DPUs but the system has {cfg.total_dpus}")
    return [
        TransferPlan(plan.mode, plan.direction,
                     tuple(plan.sizes[i:i + per_rank]))
        for i in range(0, len(plan.sizes), per_rank)
    ]


def system_transfer_time(plan: TransferPlan, cfg: SystemConfig) -> TransferReport:
    """Price a transfer that may span ranks; rank times add up."""
    seconds = 0.0
    payload = 0
    for sub in rank_partition(plan, cfg):
        report = transfer_time(sub, cfg)
        seconds += report.seconds
        payload += report.payload_bytes
    bandwidth = payload / seconds if seconds > 0 else 0.0
    return TransferReport(seconds, payload, bandwidth)
