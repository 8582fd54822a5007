"""Database operators: select (filter) and unique (run deduplication).

Both kernels stream tiles round by round. Within a round every tasklet
filters its tile in WRAM, then a handshake chain threads the running output
offset from tasklet 0 upward (a prefix sum over per-tasklet counts), and each
tasklet writes its survivors to MRAM at its assigned offset. Outputs have
data-dependent sizes, so the host retrieves them with serial transfers.
"""

from __future__ import annotations

import numpy as np

from .. import datasets
from ..config import SystemConfig
from .common import (BenchmarkSpec, HostRun, exact_match, split_even,
                     tile_ranges)
from . import oracles

PREDICATES = {
    "odd": lambda v: v % 2 != 0,
    "positive": lambda v: v > 0,
    "all": lambda v: True,
    "none": lambda v: False,
}


def _predicate_mask(name: str, tile: np.ndarray) -> np.ndarray:
    if name == "odd":
        return tile % 2 != 0
    if name == "positive":
        return tile > 0
    if name == "all":
        return np.ones(len(tile), dtype=bool)
    if name == "none":
        return np.zeros(len(tile), dtype=bool)
    raise KeyError(name)


def _filter_kernel(ctx, n, tile_elems, predicate, unique, shared):
    """Shared body of SEL and UNI; ``shared`` carries the chained state.

    shared["offset"]: running output offset (prefix sum over kept counts).
    shared["last"]:   last raw element seen, for cross-tile deduplication.
    The chain is a ring: tasklet i waits for i-1, tasklet 0 waits for the
    last tasklet's previous round, so offsets thread through in tile order.
    """
    T = ctx.n_tasklets
    buf_in = ctx.wram_alloc(tile_elems, np.int64)
    buf_out = ctx.wram_alloc(tile_elems, np.int64)
    tiles = tile_ranges(n, tile_elems)
    rounds = (len(tiles) + T - 1) // T
    for rnd in range(rounds):
        idx = rnd * T + ctx.tid
        tile = None
        inner = None
        if idx < len(tiles):
            off, cnt = tiles[idx]
            ctx.charge("address_calc", "int64", 2)
            ctx.charge("add", "int32", 2)
            ctx.charge("branch", "int64", 1)
            ctx.mram_read("x", off, buf_in, cnt)
            tile = buf_in[:cnt].copy()
            if unique:
                inner = tile[1:] != tile[:-1]      # decisions for elements 1..cnt-1
            else:
                inner = _predicate_mask(predicate, tile)
            ctx.wram_load("int64", cnt)
            ctx.arith("compare", "int64", cnt)
            ctx.charge("branch", "int64", cnt)
            ctx.charge("add", "int32", cnt)
        if ctx.tid > 0:
            yield ctx.handshake_wait_for(ctx.tid - 1)
        my_offset = shared["offset"]
        kept = 0
        if tile is not None and len(tile):
            if unique:
                keep_first = shared["last"] is None or tile[0] != shared["last"]
                mask = np.concatenate(([keep_first], inner))
                shared["last"] = tile[-1]
            else:
                mask = inner
            selected = tile[mask]
            kept = len(selected)
            buf_out[:kept] = selected
            ctx.wram_store("int64", kept)
            shared["offset"] = my_offset + kept
            ctx.charge("add", "int64", 1)
        if ctx.tid < T - 1:
            yield ctx.handshake_notify()
        if kept:
            ctx.mram_write("out", my_offset, buf_out, kept)
        if T > 1:
            # close the ring so round r+1 starts after round r completed
            if ctx.tid == T - 1:
                yield ctx.handshake_notify()
            elif ctx.tid == 0 and rnd < rounds - 1:
                yield ctx.handshake_wait_for(T - 1)
    shared["count"] = shared["offset"]


def _run_filter(spec: BenchmarkSpec, cfg: SystemConfig, unique: bool,
                data=None, check=True):
    n = spec.params["n"]
    predicate = spec.params.get("predicate", "odd")
    if data is None:
        if unique:
            # runs of repeated values so deduplication has work to do
            raw = datasets.int_vector(spec.seed, n, "int64", 0, 5, "uni_steps")
            x = np.cumsum(raw // 2, dtype=np.int64)
        else:
            x = datasets.int_vector(spec.seed, n, "int64", -1000, 1000, "sel_x")
    else:
        x = data
    host = HostRun(cfg, spec.tasklets)
    parts = split_even(n, spec.n_dpus)
    tile_elems = spec.tile_bytes // 8

    inputs = [{"x": x[s:s + c], "out": np.zeros(max(c, 1), dtype=np.int64)}
              for s, c in parts]
    host.distribute([{"x": d["x"]} for d in inputs])
    shareds = [{"offset": 0, "last": None} for _ in parts]
    params = [{"n": c, "tile_elems": tile_elems, "predicate": predicate,
               "unique": unique, "shared": shareds[i]}
              for i, (_, c) in enumerate(parts)]
    results = host.launch_round(_filter_kernel, inputs, params)

    counts = [sh["count"] for sh in shareds]
    # per-DPU survivor counts come back first, then the data, all serial
    host.retrieve([8] * spec.n_dpus, bucket="inter_dpu", serial=True)
    host.retrieve([8 * max(c, 1) for c in counts], serial=True)

    chunks = [results[i].mram.get("out")[:counts[i]] for i in range(len(parts))]
    if unique:
        merged = []
        for i, chunk in enumerate(chunks):
            chunk = list(chunk)
            if merged and chunk and chunk[0] == merged[-1]:
                chunk = chunk[1:]          # duplicate across the DPU boundary
            merged.extend(chunk)
        out = np.array(merged, dtype=np.int64)
        expected = oracles.uni(x) if check else None
    else:
        out = np.concatenate(chunks) if chunks else np.empty(0, dtype=np.int64)
        expected = oracles.sel(x, PREDICATES[predicate]) if check else None
    correct = exact_match(out, expected) if check else True
    record = host.finish(spec, correct)
    if not check:
        record.verdict = "skipped"
    return record, out


def run_sel(spec: BenchmarkSpec, cfg: SystemConfig, data=None, check=True):
    return _run_filter(spec, cfg, unique=False, data=data, check=check)


def run_uni(spec: BenchmarkSpec, cfg: SystemConfig, data=None, check=True):
    return _run_filter(spec, cfg, unique=True, data=data, check=check)
