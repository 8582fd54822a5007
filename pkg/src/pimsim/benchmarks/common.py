"""Shared benchmark plumbing: specs, records, and host-side accounting."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..config import SystemConfig
from ..errors import ConfigError
from ..hostlink import TransferPlan, system_transfer_time
from ..runtime import launch_kernel


@dataclass
class BenchmarkSpec:
    name: str
    params: dict = field(default_factory=dict)    # dataset shape parameters
    tasklets: int = 16
    n_dpus: int = 4
    tile_bytes: int = 1024
    seed: int = 1

    def as_dict(self) -> dict:
        return {"name": self.name, "tasklets": self.tasklets,
                "n_dpus": self.n_dpus, "tile_bytes": self.tile_bytes,
                "seed": self.seed, **{f"param_{k}": v for k, v in self.params.items()}}


@dataclass
class ExperimentRecord:
    spec: BenchmarkSpec
    dpu_cycles: int = 0
    dpu_seconds: float = 0.0
    inter_dpu_seconds: float = 0.0
    cpu_to_dpu_seconds: float = 0.0
    dpu_to_cpu_seconds: float = 0.0
    correct: bool = False
    verdict: str = "not-checked"
    phase_cycles: dict = field(default_factory=dict)

    @property
    def total_seconds(self) -> float:
        return (self.dpu_seconds + self.inter_dpu_seconds
                + self.cpu_to_dpu_seconds + self.dpu_to_cpu_seconds)

    def as_row(self) -> dict:
        row = self.spec.as_dict()
        row.update({
            "dpu_cycles": self.dpu_cycles,
            "dpu_seconds": self.dpu_seconds,
            "inter_dpu_seconds": self.inter_dpu_seconds,
            "cpu_to_dpu_seconds": self.cpu_to_dpu_seconds,
            "dpu_to_cpu_seconds": self.dpu_to_cpu_seconds,
            "total_seconds": self.total_seconds,
            "verdict": self.verdict,
        })
        return row


class HostRun:
    """Accumulates the four time-breakdown buckets of one benchmark run.

    Kernel launches are synchronous: per launch round the host waits for the
    slowest DPU, so DPU time is the max of the per-DPU cycle counts.
    """

    def __init__(self, cfg: SystemConfig, tasklets: int):
        self.cfg = cfg
        self.tasklets = tasklets
        self.record_cycles = 0
        self.dpu_seconds = 0.0
        self.inter_dpu_seconds = 0.0
        self.cpu_to_dpu_seconds = 0.0
        self.dpu_to_cpu_seconds = 0.0
        self.phase_cycles = {}

    def launch_round(self, kernel, per_dpu_inputs: list, params_per_dpu=None,
                     phase: str = "kernel", tasklets: int = None) -> list:
        """Run one kernel on every DPU; returns the per-DPU LaunchResults."""
        tasklets = tasklets or self.tasklets
        results = []
        for i, inputs in enumerate(per_dpu_inputs):
            params = params_per_dpu[i] if params_per_dpu else {}
            results.append(launch_kernel(kernel, tasklets, inputs,
                                         self.cfg.dpu, self.cfg.cost_table,
                                         params=params))
        cycles = max(r.timeline.total_cycles for r in results)
        self.record_cycles += cycles
        self.dpu_seconds += cycles / self.cfg.dpu.frequency_hz
        self.phase_cycles[phase] = self.phase_cycles.get(phase, 0) + cycles
        return results

    # -- transfer pricing ----------------------------------------------------
    def _price(self, mode: str, direction: str, sizes) -> float:
        sizes = tuple(int(s) for s in sizes)
        if not sizes or sum(sizes) == 0:
            return 0.0
        plan = TransferPlan(mode, direction, sizes)
        return system_transfer_time(plan, self.cfg).seconds

    def distribute(self, arrays_per_dpu: list, bucket: str = "cpu_to_dpu") -> None:
        """Price moving per-DPU input buffers from host memory to MRAM banks."""
        sizes = [sum(a.nbytes for a in arrays.values()) for arrays in arrays_per_dpu]
        self.send(sizes, bucket)

    def send(self, sizes, bucket: str = "cpu_to_dpu", serial: bool = False) -> None:
        sizes = [int(s) for s in sizes]
        mode = "serial" if serial or len(set(sizes)) > 1 else "parallel"
        self._add(bucket, self._price(mode, "cpu_to_dpu", sizes))

    def broadcast(self, nbytes: int, n_dpus: int, bucket: str = "cpu_to_dpu") -> None:
        self._add(bucket, self._price("broadcast", "cpu_to_dpu", (nbytes,) * n_dpus))

    def retrieve(self, sizes, bucket: str = "dpu_to_cpu", serial: bool = False) -> None:
        sizes = [int(s) for s in sizes]
        mode = "serial" if serial or len(set(sizes)) > 1 else "parallel"
        self._add(bucket, self._price(mode, "dpu_to_cpu", sizes))

    def repeated_serial(self, direction: str, size: int, count: int,
                        bucket: str) -> None:
        """Price ``count`` back-to-back serial transfers of ``size`` bytes."""
        if size <= 0 or count <= 0:
            return
        one = self._price("serial", direction, (size,))
        self._add(bucket, one * count)

    def repeated_parallel(self, size: int, rounds: int, n_dpus: int,
                          bucket: str = "cpu_to_dpu",
                          direction: str = "cpu_to_dpu") -> None:
        """Price ``rounds`` parallel pushes of one ``size``-byte buffer per DPU."""
        if size <= 0 or rounds <= 0:
            return
        one = self._price("parallel", direction, (size,) * n_dpus)
        self._add(bucket, one * rounds)

    def _add(self, bucket: str, seconds: float) -> None:
        if bucket == "cpu_to_dpu":
            self.cpu_to_dpu_seconds += seconds
        elif bucket == "dpu_to_cpu":
            self.dpu_to_cpu_seconds += seconds
        elif bucket == "inter_dpu":
            self.inter_dpu_seconds += seconds
        else:
            raise ConfigError(f"unknown time bucket {bucket!r}")

    def finish(self, spec: BenchmarkSpec, correct: bool,
               detail: str = "") -> ExperimentRecord:
        verdict = "pass" if correct else ("fail" + (f": {detail}" if detail else ""))
        return ExperimentRecord(
            spec=spec,
            dpu_cycles=self.record_cycles,
            dpu_seconds=self.dpu_seconds,
            inter_dpu_seconds=self.inter_dpu_seconds,
            cpu_to_dpu_seconds=self.cpu_to_dpu_seconds,
            dpu_to_cpu_seconds=self.dpu_to_cpu_seconds,
            correct=correct,
            verdict=verdict,
            phase_cycles=dict(self.phase_cycles),
        )


def split_even(total: int, parts: int) -> list:
    """Contiguous (start, count) ranges; earlier parts get the remainder."""
    base, extra = divmod(total, parts)
    out = []
    start = 0
    for i in range(parts):
        count = base + (1 if i < extra else 0)
        out.append((start, count))
        start += count
    return out


def tile_ranges(count: int, tile_elems: int) -> list:
    """(offset, length) tiles covering ``count`` elements."""
    return [(off, min(tile_elems, count - off))
            for off in range(0, count, tile_elems)]


def exact_match(result: np.ndarray, expected: np.ndarray) -> bool:
    return (result.shape == expected.shape
            and bool(np.array_equal(result, expected)))


def close_match(result: np.ndarray, expected: np.ndarray,
                rtol: float = 1e-6) -> bool:
    if result.shape != expected.shape:
        return False
    return bool(np.allclose(result, expected, rtol=rtol, atol=0.0))
