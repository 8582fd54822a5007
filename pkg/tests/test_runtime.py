import io

import numpy as np
import pytest

from pimsim.errors import CapacityError, DeadlockError, DmaError
from pimsim.runtime import launch_kernel


def copy_kernel(ctx, n, tile):
    buf = ctx.wram_alloc(tile, np.int32)
    for off in range(0, n, tile):
        cnt = min(tile, n - off)
        ctx.mram_read("src", off, buf, cnt)
        ctx.charge_loop("add", "int32", cnt)
        ctx.mram_write("dst", off, buf, cnt)


def barrier_kernel(ctx):
    ctx.charge("add", "int32", ctx.tid + 1)
    yield ctx.barrier_wait()
    ctx.charge("add", "int32", 1)


def test_functional_copy_and_timing(cfg):
    src = np.arange(1024, dtype=np.int32)
    result = launch_kernel(copy_kernel, 4,
                           {"src": src, "dst": np.zeros(1024, np.int32)},
                           cfg.dpu, cfg.cost_table,
                           params={"n": 1024, "tile": 256})
    assert np.array_equal(result.mram.get("dst"), src)
    assert result.timeline.total_cycles > 0
    assert result.timeline.dma_busy_cycles > 0


def test_outputs_independent_of_timing(cfg):
    src = np.arange(512, dtype=np.int32) * 3
    kwargs = dict(cfg=None)
    a = launch_kernel(copy_kernel, 3, {"src": src, "dst": np.zeros(512, np.int32)},
                      cfg.dpu, cfg.cost_table, params={"n": 512, "tile": 128},
                      timing=True)
    b = launch_kernel(copy_kernel, 3, {"src": src, "dst": np.zeros(512, np.int32)},
                      cfg.dpu, cfg.cost_table, params={"n": 512, "tile": 128},
                      timing=False)
    assert np.array_equal(a.mram.get("dst"), b.mram.get("dst"))
    assert b.timeline.total_cycles == 0


def test_repeated_runs_identical(cfg):
    src = np.arange(512, dtype=np.int32)
    runs = []
    for _ in range(2):
        r = launch_kernel(copy_kernel, 5,
                          {"src": src, "dst": np.zeros(512, np.int32)},
                          cfg.dpu, cfg.cost_table, params={"n": 512, "tile": 64})
        runs.append((r.mram.get("dst").tobytes(), r.timeline))
    assert runs[0] == runs[1]


def test_barrier_kernel_runs(cfg):
    r = launch_kernel(barrier_kernel, 8, {}, cfg.dpu, cfg.cost_table)
    assert r.timeline.total_cycles > cfg.dpu.sync.barrier(8)
    assert r.timeline.issued_instructions == sum(range(1, 9)) + 8


def test_wram_overflow(cfg):
    def hog(ctx):
        ctx.wram_alloc(cfg.dpu.wram_bytes // 4 + 1, np.int32)
    with pytest.raises(CapacityError):
        launch_kernel(hog, 4, {}, cfg.dpu, cfg.cost_table)


def test_mram_overflow(cfg):
    big = np.zeros(cfg.dpu.mram_bytes // 8 + 1, dtype=np.int64)
    with pytest.raises(CapacityError):
        launch_kernel(copy_kernel, 1, {"src": big}, cfg.dpu, cfg.cost_table,
                      params={"n": 1, "tile": 1})


def test_tasklet_count_bounds(cfg):
    with pytest.raises(CapacityError):
        launch_kernel(copy_kernel, 0, {}, cfg.dpu, cfg.cost_table,
                      params={"n": 0, "tile": 8})
    with pytest.raises(CapacityError):
        launch_kernel(copy_kernel, 25, {}, cfg.dpu, cfg.cost_table,
                      params={"n": 0, "tile": 8})


def test_unmatched_mutex_lock_deadlocks(cfg):
    def bad(ctx):
        yield ctx.mutex_lock(0)   # never released; second tasklet hangs
    with pytest.raises(DeadlockError):
        launch_kernel(bad, 2, {}, cfg.dpu, cfg.cost_table)


def test_oversized_transfer_rejected(cfg):
    def bad(ctx):
        buf = ctx.wram_alloc(1024, np.int64)
        ctx.mram_read("src", 0, buf, 1024)    # 8192 bytes > DMA limit
    with pytest.raises(DmaError):
        launch_kernel(bad, 1, {"src": np.zeros(1024, np.int64)},
                      cfg.dpu, cfg.cost_table)


def test_handshake_chain_prefix_sums(cfg):
    """Chained offsets equal the sequential prefix sum of per-tasklet counts."""
    shared = {"offset": 0, "log": {}}

    def chain(ctx, shared):
        count = (ctx.tid + 1) * 3
        if ctx.tid > 0:
            yield ctx.handshake_wait_for(ctx.tid - 1)
        shared["log"][ctx.tid] = shared["offset"]
        shared["offset"] += count
        if ctx.tid < ctx.n_tasklets - 1:
            yield ctx.handshake_notify()

    launch_kernel(chain, 8, {}, cfg.dpu, cfg.cost_table,
                  params={"shared": shared})
    expected = 0
    for tid in range(8):
        assert shared["log"][tid] == expected
        expected += (tid + 1) * 3


def test_trace_dump_format(cfg):
    src = np.arange(64, dtype=np.int32)
    out = io.StringIO()
    launch_kernel(copy_kernel, 2, {"src": src, "dst": np.zeros(64, np.int32)},
                  cfg.dpu, cfg.cost_table, params={"n": 64, "tile": 32},
                  trace_file=out)
    lines = out.getvalue().strip().splitlines()
    assert lines, "trace dump is empty"
    for line in lines:
        fields = line.split()
        assert fields[0].isdigit()
        assert fields[1] in ("burst", "dma", "sync")
