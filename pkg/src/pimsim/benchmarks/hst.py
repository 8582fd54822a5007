"""Image histogram, in two flavors.

The short version (HST-S) gives every tasklet a private WRAM histogram and
merges them after a barrier, so WRAM capacity caps the tasklet count as the
bin count grows. The long version (HST-L) keeps one histogram per DPU and
serializes updates through a mutex, so its speed is independent of the bin
count but contention-bound; it runs best at 8 tasklets.
"""

from __future__ import annotations

import math

import numpy as np

from .. import datasets
from ..config import SystemConfig
from .common import BenchmarkSpec, HostRun, exact_match, split_even, tile_ranges
from . import oracles

# WRAM a tasklet needs besides its private histogram: tile buffer plus stack
HST_S_WRAM_OVERHEAD = 3072


def hst_s_tasklets(bins: int, max_tasklets: int, wram_bytes: int) -> int:
    """Largest power-of-two tasklet count whose private histograms fit WRAM."""
    t = 1
    while (2 * t <= max_tasklets
           and 2 * t * (4 * bins + HST_S_WRAM_OVERHEAD) <= wram_bytes):
        t *= 2
    return t


def _bin_shift(bins: int) -> int:
    return max(0, 12 - int(math.log2(bins)))


def hst_s_kernel(ctx, n_pixels, bins, tile_elems, shared):
    local = ctx.wram_alloc(bins, np.uint32)
    shared["locals"][ctx.tid] = local        # private histograms live in WRAM
    buf = ctx.wram_alloc(tile_elems, np.uint32)
    shift = _bin_shift(bins)
    tiles = tile_ranges(n_pixels, tile_elems)
    for idx in range(ctx.tid, len(tiles), ctx.n_tasklets):
        off, cnt = tiles[idx]
        ctx.charge("address_calc", "uint32", 2)
        ctx.charge("add", "int32", 2)
        ctx.charge("branch", "uint32", 1)
        ctx.mram_read("image", off, buf, cnt)
        np.add.at(local, buf[:cnt] >> shift, 1)
        # per pixel: load, shift, bin load/add/store, index, branch
        ctx.wram_load("uint32", 2 * cnt)
        ctx.charge("bitwise", "uint32", cnt)
        ctx.arith("add", "uint32", cnt)
        ctx.wram_store("uint32", cnt)
        ctx.charge("address_calc", "uint32", cnt)
        ctx.charge("add", "int32", cnt)
        ctx.charge("branch", "uint32", cnt)
    yield ctx.barrier_wait()
    # parallel merge: each tasklet sums its bin range across all histograms
    s, c = split_even(bins, ctx.n_tasklets)[ctx.tid]
    for other in shared["locals"]:
        shared["hist"][s:s + c] += other[s:s + c]
    ctx.wram_load("uint32", 2 * c * ctx.n_tasklets)
    ctx.arith("add", "uint32", c * ctx.n_tasklets)
    ctx.wram_store("uint32", c * ctx.n_tasklets)
    yield ctx.barrier_wait()
    if ctx.tid == 0:
        out = ctx.wram_alloc(bins, np.uint32)
        out[:] = shared["hist"]
        for off, cnt in tile_ranges(bins, tile_elems):
            ctx.mram_write("hist", off, out[off:], cnt)


def hst_l_kernel(ctx, n_pixels, bins, tile_elems, shared):
    """One shared histogram; every bin update runs under the mutex."""
    buf = ctx.wram_alloc(tile_elems, np.uint32)
    shift = _bin_shift(bins)
    hist = shared["hist"]
    tiles = tile_ranges(n_pixels, tile_elems)
    for idx in range(ctx.tid, len(tiles), ctx.n_tasklets):
        off, cnt = tiles[idx]
        ctx.charge("address_calc", "uint32", 2)
        ctx.charge("add", "int32", 2)
        ctx.charge("branch", "uint32", 1)
        ctx.mram_read("image", off, buf, cnt)
        for px in buf[:cnt]:
            # pixel load and bin computation run outside the critical section
            ctx.wram_load("uint32", 1)
            ctx.charge("bitwise", "uint32", 1)
            ctx.charge("address_calc", "uint32", 1)
            ctx.charge("add", "int32", 1)
            ctx.charge("branch", "uint32", 1)
            yield ctx.mutex_lock(0)
            ctx.wram_load("uint32", 1)
            ctx.arith("add", "uint32", 1)
            ctx.wram_store("uint32", 1)
            hist[int(px) >> shift] += np.uint32(1)
            yield ctx.mutex_unlock(0)
    yield ctx.barrier_wait()
    if ctx.tid == 0:
        out = ctx.wram_alloc(bins, np.uint32)
        out[:] = hist
        for off, cnt in tile_ranges(bins, tile_elems):
            ctx.mram_write("hist", off, out[off:], cnt)


def _run_hst(spec: BenchmarkSpec, cfg: SystemConfig, long_version: bool,
             data=None, check=True):
    bins = spec.params.get("bins", 256)
    if data is None:
        image = datasets.image_12bit(spec.seed, spec.params["height"],
                                     spec.params["width"]).ravel()
    else:
        image = data.ravel()
    n = len(image)
    host = HostRun(cfg, spec.tasklets)
    parts = split_even(n, spec.n_dpus)
    tile_elems = spec.tile_bytes // 4

    if long_version:
        tasklets = min(spec.tasklets, 8)     # contention optimum
        kernel = hst_l_kernel
    else:
        tasklets = min(spec.tasklets,
                       hst_s_tasklets(bins, cfg.dpu.max_tasklets,
                                      cfg.dpu.wram_bytes))
        kernel = hst_s_kernel

    inputs, params, shareds = [], [], []
    for s, c in parts:
        shared = {"hist": np.zeros(bins, dtype=np.uint32),
                  "locals": [None] * tasklets}
        shareds.append(shared)
        inputs.append({"image": image[s:s + c],
                       "hist": np.zeros(bins, dtype=np.uint32)})
        params.append({"n_pixels": c, "bins": bins, "tile_elems": tile_elems,
                       "shared": shared})
    host.distribute([{"image": d["image"]} for d in inputs])
    results = host.launch_round(kernel, inputs, params, tasklets=tasklets)
    host.retrieve([4 * bins] * spec.n_dpus, bucket="inter_dpu")

    hist = np.zeros(bins, dtype=np.uint32)
    for r in results:
        hist += r.mram.get("hist")
    correct = exact_match(hist, oracles.hst(image, bins)) if check else True
    record = host.finish(spec, correct)
    if not check:
        record.verdict = "skipped"
    return record, hist


def run_hst_s(spec: BenchmarkSpec, cfg: SystemConfig, data=None, check=True):
    return _run_hst(spec, cfg, long_version=False, data=data, check=check)


def run_hst_l(spec: BenchmarkSpec, cfg: SystemConfig, data=None, check=True):
    return _run_hst(spec, cfg, long_version=True, data=data, check=check)
