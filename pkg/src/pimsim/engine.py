"""Deterministic event-driven timing of per-tasklet traces.

A trace is the ordered list of what one tasklet did: aggregated compute
bursts, DMA requests, and synchronization events. Replaying the traces of all
tasklets of a DPU through this engine yields the kernel timeline.

Model rules:
  * the pipeline issues at most one instruction per cycle in aggregate and at
    most one instruction per ``dispatch_interval`` cycles per tasklet; bursts
    progress as a fluid schedule that serves the tasklets with the most
    remaining work first (water-filling), which reproduces the closed-form
    ``max(sum, interval * max)`` bound for simultaneous bursts;
  * the DMA engine serves one request at a time, FIFO; a request blocks the
    issuing tasklet until it completes; requests no larger than
    ``fine_dma_threshold_bytes`` that were already enqueued when the engine
    picked them up hide ``fine_dma_overlap`` of the fixed cost;
  * sync primitives cost ``DpuConfig.sync`` cycles and wake waiters in FIFO
    order.

Identical inputs always produce identical timelines.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass, field

from .config import DpuConfig
from .errors import DeadlockError, DmaError

_EPS = 1e-9


# ---------------------------------------------------------------------------
# trace segments

@dataclass(frozen=True)
class Burst:
    instructions: int


@dataclass(frozen=True)
class Dma:
    direction: str          # "read" (MRAM->WRAM) or "write" (WRAM->MRAM)
    size: int               # bytes


@dataclass(frozen=True)
class Sync:
    kind: str               # barrier | mutex_lock | mutex_unlock |
                            # handshake_notify | handshake_wait | sem_give | sem_take
    obj: object = 0         # object id; for handshakes, the notifier tasklet id


@dataclass(frozen=True)
class KernelTimeline:
    total_cycles: int
    pipeline_busy_cycles: int
    dma_busy_cycles: int
    sync_stall_cycles: int
    issued_instructions: int

    def validate(self) -> None:
        assert self.total_cycles >= max(self.pipeline_busy_cycles, self.dma_busy_cycles)
        assert min(self.total_cycles, self.pipeline_busy_cycles,
                   self.dma_busy_cycles, self.sync_stall_cycles) >= 0


def validate_dma(size: int, cfg: DpuConfig) -> None:
    if size < cfg.dma_min_bytes or size > cfg.dma_max_bytes:
        raise DmaError(
            f"DMA size {size} outside [{cfg.dma_min_bytes}, {cfg.dma_max_bytes}]")
    if size % cfg.dma_granularity:
        raise DmaError(f"DMA size {size} not a multiple of {cfg.dma_granularity}")


def dma_service_cycles(direction: str, size: int, cfg: DpuConfig,
                       queued: bool) -> int:
    """Integer service time of one DMA request, rounded up."""
    alpha = cfg.dma_alpha_read if direction == "read" else cfg.dma_alpha_write
    if queued and size <= cfg.fine_dma_threshold_bytes:
        alpha = alpha * (1.0 - cfg.fine_dma_overlap)
    return math.ceil(alpha + cfg.dma_beta * size)


# ---------------------------------------------------------------------------
# fluid issue-rate allocation

def _issue_rates(remaining: list, interval: int) -> list:
    """Proportional water-filling rates for concurrent bursts.

    Each burst gets ``min(1/interval, lam * work)`` with ``lam`` chosen so the
    rates sum to ``min(1, k/interval)``: longer bursts are served at the
    per-tasklet dispatch cap when it binds, everything else drains at rates
    proportional to remaining work so equal bursts finish together. Within an
    interval the capped/uncapped split cannot change, so piecewise-constant
    rates recomputed at events realize the policy exactly.
    """
    k = len(remaining)
    cap = 1.0 / interval
    budget = min(1.0, k * cap)
    work = [w for _, w in remaining]
    order = sorted(range(k), key=lambda i: -work[i])
    suffix = [0.0] * (k + 1)
    for j in range(k - 1, -1, -1):
        suffix[j] = suffix[j + 1] + work[order[j]]

    rates = [0.0] * k
    m = 0
    lam = 0.0
    while m < k:
        resid = budget - m * cap
        if resid <= _EPS or suffix[m] <= _EPS:
            lam = 0.0
            break
        lam = resid / suffix[m]
        if lam * work[order[m]] <= cap + _EPS:
            break
        m += 1
    for j, idx in enumerate(order):
        rates[idx] = cap if j < m else lam * work[idx]
    return rates


# ---------------------------------------------------------------------------
# engine state

_COMPUTE, _BLOCKED, _DONE = 0, 1, 2


class _Tasklet:
    __slots__ = ("tid", "segments", "pos", "state", "remaining", "issued")

    def __init__(self, tid, segments):
        self.tid = tid
        self.segments = segments
        self.pos = 0
        self.state = _BLOCKED      # becomes _COMPUTE/_BLOCKED when started
        self.remaining = 0.0
        self.issued = 0


class _Mutex:
    __slots__ = ("holder", "queue")

    def __init__(self):
        self.holder = None
        self.queue = []


class _Semaphore:
    __slots__ = ("count", "queue")

    def __init__(self):
        self.count = 0
        self.queue = []


def deterministic_schedule(traces: list, cfg: DpuConfig) -> KernelTimeline:
    """Replay per-tasklet traces; returns the DPU's cycle breakdown.

    ``traces`` is one list of segments per tasklet. Raises DeadlockError when
    no tasklet can make progress while synchronization is pending.
    """
    sync = cfg.sync
    tasklets = [_Tasklet(i, list(t)) for i, t in enumerate(traces)]
    n = len(tasklets)

    now = 0.0
    wake_heap = []              # (time, seq, tid)
    wake_seq = 0

    dma_queue = []              # (tid, direction, size) FIFO
    dma_busy_until = -1.0
    dma_current = None          # tid being served
    dma_busy_total = 0.0
    last_dma_end = 0.0

    barriers = {}               # obj -> list of arrived tids
    mutexes = {}
    handshake_tokens = {}       # notifier tid -> True
    handshake_waiters = {}      # notifier tid -> list of waiting tids
    handshake_notifiers = {}    # notifier tid -> tid blocked on a full token slot
    semaphores = {}

    pipeline_wall = 0.0
    sync_stall_wall = 0.0
    last_issue_end = 0.0
    total_issued = 0

    def schedule_wake(tid, at):
        nonlocal wake_seq
        heapq.heappush(wake_heap, (at, wake_seq, tid))
        wake_seq += 1

    def start_dma(tid, direction, size, queued):
        nonlocal dma_busy_until, dma_current
        service = dma_service_cycles(direction, size, cfg, queued)
        dma_current = tid
        dma_busy_until = now + service

    def enqueue_dma(tid, direction, size):
        validate_dma(size, cfg)
        if dma_current is None:
            start_dma(tid, direction, size, queued=False)
        else:
            dma_queue.append((tid, direction, size))

    def advance(t: _Tasklet):
        """Run a tasklet's trace from its current position until it blocks."""
        nonlocal total_issued, last_issue_end
        while t.pos < len(t.segments):
            seg = t.segments[t.pos]
            t.pos += 1
            if isinstance(seg, Burst):
                if seg.instructions > 0:
                    t.state = _COMPUTE
                    t.remaining = float(seg.instructions)
                    t.issued += seg.instructions
                    total_issued += seg.instructions
                    return
                continue
            if isinstance(seg, Dma):
                t.state = _BLOCKED
                enqueue_dma(t.tid, seg.direction, seg.size)
                return
            _apply_sync(t, seg)
            if t.state == _BLOCKED:
                return
        t.state = _DONE

    def _apply_sync(t: _Tasklet, seg: Sync):
        kind, obj = seg.kind, seg.obj
        if kind == "barrier":
            arrived = barriers.setdefault(obj, [])
            arrived.append(t.tid)
            t.state = _BLOCKED
            if len(arrived) == n:
                release = now + sync.barrier(n)
                for tid in arrived:
                    schedule_wake(tid, release)
                barriers[obj] = []
        elif kind == "mutex_lock":
            m = mutexes.setdefault(obj, _Mutex())
            t.state = _BLOCKED
            if m.holder is None:
                m.holder = t.tid
                schedule_wake(t.tid, now + sync.mutex_acquire)
            else:
                m.queue.append(t.tid)
        elif kind == "mutex_unlock":
            m = mutexes.get(obj)
            if m is None or m.holder != t.tid:
                raise DeadlockError(
                    f"tasklet {t.tid} unlocked mutex {obj!r} it does not hold")
            if m.queue:
                nxt = m.queue.pop(0)
                m.holder = nxt
                grant = (now + sync.mutex_release + sync.mutex_acquire
                         + sync.mutex_per_waiter * len(m.queue))
                schedule_wake(nxt, grant)
            else:
                m.holder = None
            t.state = _BLOCKED
            schedule_wake(t.tid, now + sync.mutex_release)
        elif kind == "handshake_notify":
            src = t.tid
            waiters = handshake_waiters.get(src)
            if waiters:
                schedule_wake(waiters.pop(0), now + sync.handshake_wait)
            elif handshake_tokens.get(src):
                handshake_notifiers[src] = t.tid     # one-token slot is full
                t.state = _BLOCKED
                return
            else:
                handshake_tokens[src] = True
            t.state = _BLOCKED
            schedule_wake(t.tid, now + sync.handshake_notify)
        elif kind == "handshake_wait":
            src = obj
            if handshake_tokens.get(src):
                handshake_tokens[src] = False
                pending = handshake_notifiers.pop(src, None)
                if pending is not None:
                    handshake_tokens[src] = True
                    schedule_wake(pending, now + sync.handshake_notify)
                t.state = _BLOCKED
                schedule_wake(t.tid, now + sync.handshake_wait)
            else:
                handshake_waiters.setdefault(src, []).append(t.tid)
                t.state = _BLOCKED
        elif kind == "sem_give":
            s = semaphores.setdefault(obj, _Semaphore())
            if s.queue:
                schedule_wake(s.queue.pop(0), now + sync.semaphore_op)
            else:
                s.count += 1
            t.state = _BLOCKED
            schedule_wake(t.tid, now + sync.semaphore_op)
        elif kind == "sem_take":
            s = semaphores.setdefault(obj, _Semaphore())
            if s.count > 0:
                s.count -= 1
                t.state = _BLOCKED
                schedule_wake(t.tid, now + sync.semaphore_op)
            else:
                s.queue.append(t.tid)
                t.state = _BLOCKED
        else:
            raise ValueError(f"unknown sync kind {kind!r}")

    for t in tasklets:
        advance(t)

    while True:
        computing = [t for t in tasklets if t.state == _COMPUTE]
        if computing:
            rates = _issue_rates([(t.tid, t.remaining) for t in computing],
                                 cfg.dispatch_interval)
        else:
            rates = []

        candidates = []
        for t, r in zip(computing, rates):
            if r > 0:
                candidates.append(t.remaining / r)
        if dma_current is not None:
            candidates.append(dma_busy_until - now)
        if wake_heap:
            candidates.append(wake_heap[0][0] - now)

        if not candidates:
            if any(t.state == _BLOCKED for t in tasklets):
                pending = [t.tid for t in tasklets if t.state == _BLOCKED]
                raise DeadlockError(f"no runnable tasklet; blocked: {pending}")
            break

        delta = max(0.0, min(candidates))
        if computing:
            pipeline_wall += delta
            for t, r in zip(computing, rates):
                t.remaining -= r * delta
        elif dma_current is None and any(t.state == _BLOCKED for t in tasklets):
            sync_stall_wall += delta
        if dma_current is not None:
            dma_busy_total += min(delta, max(0.0, dma_busy_until - now))
        now += delta

        # burst completions
        for t in computing:
            if t.state == _COMPUTE and t.remaining <= _EPS:
                t.remaining = 0.0
                last_issue_end = max(last_issue_end, now)
                advance(t)
        # DMA completion
        if dma_current is not None and now >= dma_busy_until - _EPS:
            finished = dma_current
            last_dma_end = max(last_dma_end, dma_busy_until)
            dma_current = None
            if dma_queue:
                tid, direction, size = dma_queue.pop(0)
                start_dma(tid, direction, size, queued=True)
            done_t = tasklets[finished]
            advance(done_t)
        # scheduled wakes
        while wake_heap and wake_heap[0][0] <= now + _EPS:
            _, _, tid = heapq.heappop(wake_heap)
            advance(tasklets[tid])

    for name, m in mutexes.items():
        if m.holder is not None:
            raise DeadlockError(f"mutex {name!r} still held at kernel end")

    drain = cfg.pipeline_depth
    total = max(last_dma_end, last_issue_end + (drain if total_issued else 0), drain)
    return KernelTimeline(
        total_cycles=math.ceil(total - _EPS),
        pipeline_busy_cycles=math.ceil(pipeline_wall - _EPS) if pipeline_wall > _EPS else 0,
        dma_busy_cycles=math.ceil(dma_busy_total - _EPS) if dma_busy_total > _EPS else 0,
        sync_stall_cycles=math.ceil(sync_stall_wall - _EPS) if sync_stall_wall > _EPS else 0,
        issued_instructions=total_issued,
    )
