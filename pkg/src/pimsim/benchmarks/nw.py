"""Global sequence alignment scoring by blocked wavefront dynamic programming.

The score matrix is cut into square blocks. Block anti-diagonals run one
host iteration each: the blocks of a diagonal spread over the DPUs, every
DPU fills its block with a tasklet wavefront over small sub-blocks (barrier
between sub-diagonals), and the host then exchanges the block boundaries
needed by the next diagonal. The host finally assembles the matrix and walks
the traceback.
"""

from __future__ import annotations

import numpy as np

from .. import datasets
from ..config import SystemConfig
from .common import BenchmarkSpec, HostRun, exact_match
from . import oracles

_NEG = np.iinfo(np.int64).min // 4


def _fill_block(top: np.ndarray, left: np.ndarray, corner: int,
                sub_a: np.ndarray, sub_b: np.ndarray,
                match: int, mismatch: int, gap: int) -> np.ndarray:
    """Fill one block given its north and west boundaries, row by row.

    The in-row recurrence H[j] = max(cand[j], H[j-1] + gap) unrolls to a
    running maximum of cand[k] - gap*k, keeping each row one vector sweep.
    """
    h, w = len(sub_a), len(sub_b)
    block = np.empty((h, w), dtype=np.int64)
    prev = top.astype(np.int64)
    prev_corner = int(corner)
    idx = np.arange(w, dtype=np.int64)
    for i in range(h):
        sub = np.where(sub_b == sub_a[i], match, mismatch).astype(np.int64)
        diag = np.empty(w, dtype=np.int64)
        diag[0] = prev_corner
        diag[1:] = prev[:-1]
        cand = np.maximum(diag + sub, prev + gap)
        u = cand - gap * idx
        u[0] = max(u[0], int(left[i]) + gap)
        block[i] = np.maximum.accumulate(u) + gap * idx
        prev_corner = int(left[i])
        prev = block[i]
    return block.astype(np.int32)


def nw_block_kernel(ctx, height, width, sub, shared):
    """Tasklet wavefront over sub-blocks; one barrier per sub-diagonal."""
    if ctx.tid == 0:
        shared["block"] = _fill_block(
            shared["top"], shared["left"], shared["corner"],
            shared["sub_a"], shared["sub_b"],
            shared["match"], shared["mismatch"], shared["gap"])
    rows = (height + sub - 1) // sub
    cols = (width + sub - 1) // sub
    buf = ctx.wram_alloc(512, np.int32)
    for sd in range(rows + cols - 1):
        lo = max(0, sd - cols + 1)
        hi = min(rows - 1, sd)
        mine = sum(1 for k in range(lo, hi + 1)
                   if (k - lo) % ctx.n_tasklets == ctx.tid)
        if mine:
            cells = mine * sub * sub
            ctx.charge("address_calc", "int32", 4 * mine)
            ctx.charge("add", "int32", 4 * mine)
            ctx.charge("branch", "int32", 2 * mine)
            # north/west boundary cells in, finished sub-block cells out
            ctx.mram_read("cells", 0, buf, min(2 * sub * mine, 510))
            ctx.wram_load("int32", 3 * cells)
            ctx.arith("compare", "int32", 3 * cells)
            ctx.arith("add", "int32", 3 * cells)
            ctx.wram_store("int32", cells)
            ctx.mram_write("cells", 0, buf, min(sub * sub * mine, 510))
        yield ctx.barrier_wait()


def run_nw(spec: BenchmarkSpec, cfg: SystemConfig, data=None, check=True):
    bps = spec.params["bps"]
    sub = spec.params.get("sub_block", 2)
    match = spec.params.get("match", 0)
    mismatch = spec.params.get("mismatch", -1)
    gap = spec.params.get("gap", -1)
    if data is None:
        seq_a = datasets.dna_sequence(spec.seed, bps, "nw_a")
        seq_b = datasets.dna_sequence(spec.seed, bps, "nw_b")
    else:
        seq_a, seq_b = data
    la, lb = len(seq_a), len(seq_b)
    host = HostRun(cfg, spec.tasklets)
    block = spec.params.get("block") or max(
        sub, (max(la, lb) + spec.n_dpus - 1) // spec.n_dpus)

    score = np.zeros((la + 1, lb + 1), dtype=np.int32)
    score[0, :] = np.arange(lb + 1, dtype=np.int32) * gap
    score[:, 0] = np.arange(la + 1, dtype=np.int32) * gap
    rows = (la + block - 1) // block
    cols = (lb + block - 1) // block
    host.broadcast(seq_a.nbytes + seq_b.nbytes, spec.n_dpus)

    longest_cycles = 0
    for d in range(rows + cols - 1):
        blocks = [(i, d - i) for i in range(max(0, d - cols + 1),
                                            min(rows - 1, d) + 1)]
        active = min(len(blocks), spec.n_dpus)
        # boundary rows/columns for this diagonal travel through the host
        host.send([8 * block + 8] * active, bucket="inter_dpu")
        inputs, params, shareds = [], [], []
        for (bi, bj) in blocks:
            r0, c0 = bi * block + 1, bj * block + 1
            r1, c1 = min(r0 + block, la + 1), min(c0 + block, lb + 1)
            shared = {
                "top": score[r0 - 1, c0:c1].copy(),
                "left": score[r0:r1, c0 - 1].copy(),
                "corner": int(score[r0 - 1, c0 - 1]),
                "sub_a": seq_a[r0 - 1:r1 - 1], "sub_b": seq_b[c0 - 1:c1 - 1],
                "match": match, "mismatch": mismatch, "gap": gap,
                "where": (r0, c0, r1, c1),
            }
            shareds.append(shared)
            inputs.append({"cells": np.zeros(1024, dtype=np.int32)})
            params.append({"height": r1 - r0, "width": c1 - c0,
                           "sub": sub, "shared": shared})
        # blocks beyond the DPU count queue up as extra launch rounds
        round_results = []
        for base in range(0, len(inputs), spec.n_dpus):
            round_results += host.launch_round(
                nw_block_kernel, inputs[base:base + spec.n_dpus],
                params[base:base + spec.n_dpus], phase=f"diag{d}")
        if len(blocks) == min(rows, cols):
            longest_cycles = max(longest_cycles,
                                 max(r.timeline.total_cycles
                                     for r in round_results))
        for shared in shareds:
            r0, c0, r1, c1 = shared["where"]
            score[r0:r1, c0:c1] = shared["block"]
        host.retrieve([8 * block + 8] * active, bucket="inter_dpu")

    correct = exact_match(score, oracles.nw(seq_a, seq_b, match, mismatch,
                                            gap)) if check else True
    record = host.finish(spec, correct)
    record.phase_cycles["longest_diagonal"] = longest_cycles
    if not check:
        record.verdict = "skipped"
    alignment = traceback_alignment(score, seq_a, seq_b, match, mismatch, gap)
    return record, (score, int(score[la, lb]), alignment)


def traceback_alignment(score, seq_a, seq_b, match, mismatch, gap):
    """Walk one optimal path from the bottom-right corner back to the origin.

    Returns (i, j) index pairs; -1 marks a gap on that side.
    """
    i, j = len(seq_a), len(seq_b)
    pairs = []
    while i > 0 or j > 0:
        if i > 0 and j > 0:
            sub = match if seq_a[i - 1] == seq_b[j - 1] else mismatch
            if score[i, j] == score[i - 1, j - 1] + sub:
                pairs.append((i - 1, j - 1))
                i, j = i - 1, j - 1
                continue
        if i > 0 and score[i, j] == score[i - 1, j] + gap:
            i -= 1
            pairs.append((i, -1))
            continue
        j -= 1
        pairs.append((-1, j))
    pairs.reverse()
    return pairs
