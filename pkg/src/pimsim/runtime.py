"""SPMD tasklet execution environment.

Kernels run functionally on real data through an instrumented operation
surface; every operation also appends its cost to the tasklet's trace, and
the trace replay (``engine.deterministic_schedule``) produces the timeline.
The functional pass is a deterministic cooperative round-robin: a tasklet
runs until it blocks on a synchronization primitive, so outputs never depend
on the timing model (disabling timing changes no output bytes).

A kernel is a callable ``kernel(ctx, **params)``. Kernels that synchronize
are written as generators and ``yield`` the context's sync operations;
kernels without synchronization may be plain functions. Compute is charged
in aggregated per-tile bursts via ``ctx.charge*``; DMA via ``ctx.mram_read``
and ``ctx.mram_write`` which also move the bytes.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass

import numpy as np

from .config import DpuConfig, InstructionCostTable, InstructionMix
from .engine import Burst, Dma, KernelTimeline, Sync, deterministic_schedule
from .errors import CapacityError, DeadlockError, DmaError


def _round_up(value: int, granularity: int) -> int:
    return ((value + granularity - 1) // granularity) * granularity


class MramSpace:
    """One DPU's MRAM bank: named arrays with a byte-capacity budget."""

    def __init__(self, cfg: DpuConfig):
        self._cfg = cfg
        self._arrays = {}
        self._used = 0

    def alloc(self, name: str, array: np.ndarray) -> np.ndarray:
        if name in self._arrays:
            raise CapacityError(f"MRAM array {name!r} already exists")
        nbytes = array.nbytes
        if self._used + nbytes > self._cfg.mram_bytes:
            raise CapacityError(
                f"MRAM overflow: {self._used + nbytes} > {self._cfg.mram_bytes} bytes")
        stored = np.array(array, copy=True)
        self._arrays[name] = stored
        self._used += nbytes
        return stored

    def get(self, name: str) -> np.ndarray:
        return self._arrays[name]

    def __contains__(self, name):
        return name in self._arrays


class _WramAllocator:
    """Shared WRAM budget of one DPU; allocations never outlive a launch."""

    def __init__(self, capacity: int):
        self.capacity = capacity
        self.used = 0

    def take(self, nbytes: int) -> None:
        if self.used + nbytes > self.capacity:
            raise CapacityError(
                f"WRAM overflow: {self.used + nbytes} > {self.capacity} bytes")
        self.used += nbytes


class TaskletContext:
    """Instrumented surface one tasklet uses to touch memory and synchronize."""

    def __init__(self, tid: int, n_tasklets: int, mram: MramSpace,
                 wram: _WramAllocator, cfg: DpuConfig, table: InstructionCostTable):
        self.tid = tid
        self.n_tasklets = n_tasklets
        self._mram = mram
        self._wram = wram
        self._cfg = cfg
        self._table = table
        self._mix = InstructionMix()
        self._trace = []
        self.mix_total = InstructionMix()

    # -- WRAM ---------------------------------------------------------------
    def wram_alloc(self, count: int, dtype) -> np.ndarray:
        buf = np.zeros(count, dtype=dtype)
        self._wram.take(buf.nbytes)
        return buf

    # -- instruction charging -------------------------------------------------
    def charge(self, op: str, dtype: str, count: int = 1) -> None:
        self._mix.add(op, dtype, count)
        self.mix_total.add(op, dtype, count)

    def charge_loop(self, op: str, dtype: str, iterations: int) -> None:
        """One streaming read-modify-write loop round per iteration."""
        self._mix.add_loop(op, dtype, iterations, self._table)
        self.mix_total.add_loop(op, dtype, iterations, self._table)

    def wram_load(self, dtype: str, count: int = 1) -> None:
        self.charge("wram_load", dtype, count)

    def wram_store(self, dtype: str, count: int = 1) -> None:
        self.charge("wram_store", dtype, count)

    def arith(self, op: str, dtype: str, count: int = 1) -> None:
        self.charge(op, dtype, count)

    # -- DMA ------------------------------------------------------------------
    def _dma_size(self, count: int, itemsize: int) -> int:
        nbytes = _round_up(max(count, 1) * itemsize, self._cfg.dma_granularity)
        nbytes = max(nbytes, self._cfg.dma_min_bytes)
        if nbytes > self._cfg.dma_max_bytes:
            raise DmaError(
                f"transfer of {nbytes} bytes exceeds the {self._cfg.dma_max_bytes}-byte "
                f"DMA limit")
        return nbytes

    def mram_read(self, name: str, offset: int, wbuf: np.ndarray, count: int) -> None:
        """Copy ``count`` elements of MRAM array ``name`` into ``wbuf``."""
        src = self._mram.get(name)
        wbuf[:count] = src[offset:offset + count]
        self._flush()
        self._trace.append(Dma("read", self._dma_size(count, src.itemsize)))

    def mram_write(self, name: str, offset: int, wbuf: np.ndarray, count: int) -> None:
        dst = self._mram.get(name)
        dst[offset:offset + count] = wbuf[:count]
        self._flush()
        self._trace.append(Dma("write", self._dma_size(count, dst.itemsize)))

    # -- synchronization (yield the returned object) --------------------------
    def barrier_wait(self, obj=0) -> Sync:
        return self._sync("barrier", obj)

    def mutex_lock(self, obj=0) -> Sync:
        return self._sync("mutex_lock", obj)

    def mutex_unlock(self, obj=0) -> Sync:
        return self._sync("mutex_unlock", obj)

    def handshake_notify(self) -> Sync:
        return self._sync("handshake_notify", self.tid)

    def handshake_wait_for(self, notifier: int) -> Sync:
        return self._sync("handshake_wait", notifier)

    def sem_give(self, obj=0) -> Sync:
        return self._sync("sem_give", obj)

    def sem_take(self, obj=0) -> Sync:
        return self._sync("sem_take", obj)

    def _sync(self, kind: str, obj) -> Sync:
        self._flush()
        op = Sync(kind, obj)
        self._trace.append(op)
        return op

    def _flush(self) -> None:
        if self._mix.counts:
            n = self._mix.total_instructions(self._table)
            if n:
                self._trace.append(Burst(n))
            self._mix = InstructionMix()

    def finish(self) -> list:
        self._flush()
        return self._trace


@dataclass
class LaunchResult:
    mram: MramSpace
    timeline: KernelTimeline
    mixes: list                    # per-tasklet InstructionMix


class _FunctionalSync:
    """Deterministic functional semantics of the sync primitives."""

    def __init__(self, n: int):
        self.n = n
        self.barriers = {}
        self.mutex_holder = {}
        self.mutex_queue = {}
        self.tokens = {}
        self.waiters = {}
        self.pending_notifiers = {}
        self.sem_count = {}
        self.sem_queue = {}

    def apply(self, tid: int, op: Sync, wake: list) -> bool:
        """Returns True when the tasklet may continue running."""
        kind, obj = op.kind, op.obj
        if kind == "barrier":
            arrived = self.barriers.setdefault(obj, [])
            arrived.append(tid)
            if len(arrived) == self.n:
                wake.extend(sorted(arrived))
                self.barriers[obj] = []
            return False
        if kind == "mutex_lock":
            if self.mutex_holder.get(obj) is None:
                self.mutex_holder[obj] = tid
                return True
            self.mutex_queue.setdefault(obj, []).append(tid)
            return False
        if kind == "mutex_unlock":
            if self.mutex_holder.get(obj) != tid:
                raise DeadlockError(
                    f"tasklet {tid} unlocked mutex {obj!r} it does not hold")
            queue = self.mutex_queue.get(obj, [])
            if queue:
                nxt = queue.pop(0)
                self.mutex_holder[obj] = nxt
                wake.append(nxt)
            else:
                self.mutex_holder[obj] = None
            return True
        if kind == "handshake_notify":
            src = tid
            waiting = self.waiters.get(src, [])
            if waiting:
                wake.append(waiting.pop(0))
                return True
            if self.tokens.get(src):
                self.pending_notifiers[src] = tid
                return False
            self.tokens[src] = True
            return True
        if kind == "handshake_wait":
            src = obj
            if self.tokens.get(src):
                self.tokens[src] = False
                pending = self.pending_notifiers.pop(src, None)
                if pending is not None:
                    self.tokens[src] = True
                    wake.append(pending)
                return True
            self.waiters.setdefault(src, []).append(tid)
            return False
        if kind == "sem_give":
            queue = self.sem_queue.get(obj, [])
            if queue:
                wake.append(queue.pop(0))
            else:
                self.sem_count[obj] = self.sem_count.get(obj, 0) + 1
            return True
        if kind == "sem_take":
            if self.sem_count.get(obj, 0) > 0:
                self.sem_count[obj] -= 1
                return True
            self.sem_queue.setdefault(obj, []).append(tid)
            return False
        raise ValueError(f"unknown sync kind {kind!r}")

    def check_balanced(self) -> None:
        for obj, holder in self.mutex_holder.items():
            if holder is not None:
                raise DeadlockError(f"mutex {obj!r} still held at kernel end")


def launch_kernel(kernel, tasklets: int, dpu_inputs: dict, cfg: DpuConfig,
                  table: InstructionCostTable, params: dict = None,
                  timing: bool = True, trace_file=None) -> LaunchResult:
    """Run one kernel on one DPU with ``tasklets`` tasklets.

    ``dpu_inputs`` maps MRAM array names to numpy arrays (copied in).
    Returns the mutated MRAM space and the kernel timeline. The timeline is
    all-zero when ``timing`` is disabled; outputs are identical either way.
    """
    if not 1 <= tasklets <= cfg.max_tasklets:
        raise CapacityError(
            f"tasklet count {tasklets} outside 1..{cfg.max_tasklets}")
    params = params or {}
    mram = MramSpace(cfg)
    for name, array in dpu_inputs.items():
        mram.alloc(name, array)
    wram = _WramAllocator(cfg.wram_bytes)
    contexts = [TaskletContext(t, tasklets, mram, wram, cfg, table)
                for t in range(tasklets)]

    gens = []
    done = [False] * tasklets
    for ctx in contexts:
        result = kernel(ctx, **params)
        if result is None or not hasattr(result, "send"):
            gens.append(None)
            done[ctx.tid] = True
        else:
            gens.append(result)

    sync = _FunctionalSync(tasklets)
    runnable = deque(t for t in range(tasklets) if not done[t])
    blocked = set()
    while runnable:
        tid = runnable.popleft()
        gen = gens[tid]
        proceed = True
        while proceed:
            try:
                op = next(gen)
            except StopIteration:
                done[tid] = True
                break
            wake: list = []
            proceed = sync.apply(tid, op, wake)
            for w in wake:
                if w in blocked:
                    blocked.discard(w)
                    runnable.append(w)
                elif w == tid and not proceed:
                    proceed = True        # woken by its own barrier completion
            if not proceed and not done[tid]:
                blocked.add(tid)
        if not runnable and blocked:
            raise DeadlockError(
                f"no runnable tasklet; blocked on synchronization: {sorted(blocked)}")
    sync.check_balanced()

    traces = [ctx.finish() for ctx in contexts]
    if trace_file is not None:
        _dump_traces(traces, trace_file)
    if timing:
        timeline = deterministic_schedule(traces, cfg)
    else:
        timeline = KernelTimeline(0, 0, 0, 0, 0)
    return LaunchResult(mram=mram, timeline=timeline,
                        mixes=[ctx.mix_total for ctx in contexts])


def _dump_traces(traces, fh) -> None:
    """One record per line: tasklet id, event kind, payload."""
    for tid, trace in enumerate(traces):
        for seg in trace:
            if isinstance(seg, Burst):
                fh.write(f"{tid} burst {seg.instructions}\n")
            elif isinstance(seg, Dma):
                fh.write(f"{tid} dma {seg.direction} {seg.size}\n")
            else:
                fh.write(f"{tid} sync {seg.kind} {seg.obj}\n")
