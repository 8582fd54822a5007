import math

import numpy as np
import pytest

from pimsim.benchmarks import (BenchmarkSpec, desk_spec, run_benchmark,
                               BENCHMARK_NAMES)
from pimsim.benchmarks import oracles
from pimsim.benchmarks.analytics import run_bs, run_ts
from pimsim.benchmarks.db import run_sel, run_uni
from pimsim.benchmarks.dense import run_gemv, run_mlp, run_va
from pimsim.benchmarks.graphs import run_bfs
from pimsim.benchmarks.hst import hst_s_tasklets, run_hst_l, run_hst_s
from pimsim.benchmarks.nw import run_nw, traceback_alignment
from pimsim.benchmarks.primitives import run_red, run_scan
from pimsim.benchmarks.spmv import run_spmv
from pimsim.benchmarks.trns import run_trns


def spec(name, params, tasklets=4, n_dpus=2, seed=1):
    return BenchmarkSpec(name, params, tasklets=tasklets, n_dpus=n_dpus,
                         seed=seed)


# --- va ---------------------------------------------------------------------

def test_va_small_literal(cfg):
    a = np.array([1, 2, 3], dtype=np.int32)
    b = np.array([4, 5, 6], dtype=np.int32)
    record, out = run_va(spec("va", {"n": 3}, tasklets=2, n_dpus=1), cfg,
                         data=(a, b))
    assert record.correct and np.array_equal(out, [5, 7, 9])


def test_va_zero_length(cfg):
    a = np.empty(0, dtype=np.int32)
    record, out = run_va(spec("va", {"n": 0}, tasklets=2, n_dpus=1), cfg,
                         data=(a, a.copy()))
    assert record.correct and len(out) == 0


def test_va_random_against_scalar_loop(cfg):
    record, out = run_va(spec("va", {"n": 65536}, tasklets=16, n_dpus=4), cfg)
    assert record.correct
    # independent scalar spot check
    from pimsim import datasets
    a = datasets.int_vector(1, 65536, "int32", tag="va_a")
    b = datasets.int_vector(1, 65536, "int32", tag="va_b")
    for i in (0, 1, 65535, 32768):
        assert out[i] == a[i] + b[i]


# --- gemv -------------------------------------------------------------------

def test_gemv_identity(cfg):
    n = 8
    eye = np.eye(n, dtype=np.uint32)
    v = np.arange(1, n + 1, dtype=np.uint32)
    record, out = run_gemv(spec("gemv", {"rows": n, "cols": n}), cfg,
                           data=(eye, v))
    assert record.correct and np.array_equal(out, v)


def test_gemv_two_by_two(cfg):
    mat = np.array([[1, 2], [3, 4]], dtype=np.uint32)
    v = np.array([1, 1], dtype=np.uint32)
    record, out = run_gemv(spec("gemv", {"rows": 2, "cols": 2},
                                tasklets=2, n_dpus=1), cfg, data=(mat, v))
    assert record.correct and np.array_equal(out, [3, 7])


def test_gemv_random(cfg):
    record, _ = run_gemv(spec("gemv", {"rows": 256, "cols": 64},
                              tasklets=16, n_dpus=4), cfg)
    assert record.correct


# --- spmv -------------------------------------------------------------------

def test_spmv_diagonal(cfg):
    n = 8
    ro = np.arange(n + 1, dtype=np.int64)
    ci = np.arange(n, dtype=np.int64)
    vals = np.full(n, 3.0)
    x = np.arange(n, dtype=np.float64)
    record, out = run_spmv(spec("spmv", {}), cfg, data=(ro, ci, vals, x))
    assert record.correct and np.allclose(out, 3.0 * x)


def test_spmv_empty_rows(cfg):
    ro = np.array([0, 0, 1, 1], dtype=np.int64)
    ci = np.array([2], dtype=np.int64)
    vals = np.array([5.0])
    x = np.array([1.0, 1.0, 2.0])
    record, out = run_spmv(spec("spmv", {}, tasklets=2, n_dpus=1), cfg,
                           data=(ro, ci, vals, x))
    assert record.correct
    assert out[0] == 0.0 and out[1] == 10.0 and out[2] == 0.0


def test_spmv_random_within_tolerance(cfg):
    record, _ = run_spmv(spec("spmv", {"rows": 512, "cols": 512,
                                       "density": 0.01},
                              tasklets=16, n_dpus=4), cfg)
    assert record.correct


# --- sel / uni --------------------------------------------------------------

def test_sel_all_pass_identity(cfg):
    record, out = run_sel(spec("sel", {"n": 512, "predicate": "all"}), cfg)
    assert record.correct and len(out) == 512


def test_sel_all_fail_empty(cfg):
    record, out = run_sel(spec("sel", {"n": 512, "predicate": "none"}), cfg)
    assert record.correct and len(out) == 0


def test_sel_order_preserved(cfg):
    data = np.array([9, 2, 7, 4, 5, 6, 3, 8, 1, 0], dtype=np.int64)
    record, out = run_sel(spec("sel", {"n": 10, "predicate": "odd"},
                               tasklets=2, n_dpus=1), cfg, data=data)
    assert record.correct and np.array_equal(out, [9, 7, 5, 3, 1])


def test_uni_dedup(cfg):
    data = np.array([1, 1, 2, 2, 3], dtype=np.int64)
    record, out = run_uni(spec("uni", {"n": 5}, tasklets=2, n_dpus=1), cfg,
                          data=data)
    assert record.correct and np.array_equal(out, [1, 2, 3])


def test_uni_all_equal(cfg):
    record, out = run_uni(spec("uni", {"n": 4096}), cfg,
                          data=np.zeros(4096, dtype=np.int64))
    assert record.correct and np.array_equal(out, [0])


def test_uni_boundary_duplicate_removed_once(cfg):
    # runs of 200 cross both tile and DPU boundaries
    data = (np.arange(2048, dtype=np.int64) // 200)
    record, out = run_uni(spec("uni", {"n": 2048}, tasklets=4, n_dpus=2), cfg,
                          data=data)
    assert record.correct
    assert np.array_equal(out, np.unique(data))


# --- bs ---------------------------------------------------------------------

def test_bs_first_and_last(cfg):
    haystack = np.arange(0, 512, 2, dtype=np.int64) + 1
    queries = np.array([haystack[0], haystack[-1]], dtype=np.int64)
    record, out = run_bs(spec("bs", {}, tasklets=2, n_dpus=2), cfg,
                         data=(haystack, queries))
    assert record.correct
    assert out[0] == 0 and out[1] == len(haystack) - 1


def test_bs_random_queries(cfg):
    record, _ = run_bs(spec("bs", {"n": 2048, "queries": 512},
                            tasklets=8, n_dpus=4), cfg)
    assert record.correct


# --- ts ---------------------------------------------------------------------

def test_ts_exact_window_distance_zero(cfg):
    series = np.cumsum(np.arange(400) % 13 - 6).astype(np.int32)
    query = series[37:37 + 64].copy()
    record, (dist, at) = run_ts(spec("ts", {}, tasklets=4, n_dpus=2), cfg,
                                data=(series, query))
    assert record.correct
    assert dist == 0.0
    assert np.array_equal(series[at:at + 64], query)


def test_ts_degenerate_windows_skipped(cfg):
    series = np.zeros(256, dtype=np.int32)
    series[128:] = np.arange(128)
    query = np.arange(64, dtype=np.int32)
    record, (dist, at) = run_ts(spec("ts", {}, tasklets=4, n_dpus=2), cfg,
                                data=(series, query))
    assert record.correct
    assert math.isfinite(dist)


def test_ts_constant_query_undefined(cfg):
    series = np.arange(256, dtype=np.int32)
    query = np.full(64, 7, dtype=np.int32)
    record, (dist, at) = run_ts(spec("ts", {}), cfg, data=(series, query))
    assert record.correct
    assert math.isinf(dist) and at == -1


def test_ts_random_matches_brute_force(cfg):
    record, _ = run_ts(spec("ts", {"n": 4096, "m": 64},
                            tasklets=16, n_dpus=4), cfg)
    assert record.correct


# --- bfs --------------------------------------------------------------------

def test_bfs_path_graph(cfg):
    ro = np.array([0, 1, 3, 4], dtype=np.int64)
    ci = np.array([1, 0, 2, 1], dtype=np.int64)
    record, dist = run_bfs(spec("bfs", {}, tasklets=2, n_dpus=2), cfg,
                           data=(ro, ci))
    assert record.correct and np.array_equal(dist, [0, 1, 2])


def test_bfs_disconnected_vertex_sentinel(cfg):
    ro = np.array([0, 1, 2, 2], dtype=np.int64)
    ci = np.array([1, 0], dtype=np.int64)
    record, dist = run_bfs(spec("bfs", {}, tasklets=2, n_dpus=1), cfg,
                           data=(ro, ci))
    assert record.correct and dist[2] == -1


def test_bfs_synthetic_graph(cfg):
    record, _ = run_bfs(spec("bfs", {"vertices": 2048},
                             tasklets=16, n_dpus=4), cfg)
    assert record.correct


# --- mlp --------------------------------------------------------------------

def test_mlp_identity_weights_pass_input_through(cfg):
    w = np.eye(8, dtype=np.int32)
    x = np.arange(1, 9, dtype=np.int32)
    record, out = run_mlp(spec("mlp", {"layers": 2, "width": 8}), cfg,
                          data=([w, w.copy()], x))
    assert record.correct and np.array_equal(out, x)


def test_mlp_negative_preactivation_zeroed(cfg):
    w = -np.eye(8, dtype=np.int32)
    x = np.arange(1, 9, dtype=np.int32)
    record, out = run_mlp(spec("mlp", {"layers": 1, "width": 8}), cfg,
                          data=([w], x))
    assert record.correct and np.array_equal(out, np.zeros(8, dtype=np.int32))


def test_mlp_three_layers_random(cfg):
    record, _ = run_mlp(spec("mlp", {"layers": 3, "width": 128},
                             tasklets=16, n_dpus=4), cfg)
    assert record.correct


# --- nw ---------------------------------------------------------------------

def test_nw_identical_sequences(cfg):
    s = np.array([0, 1, 2, 3] * 8, dtype=np.int32)
    record, (score, best, aln) = run_nw(spec("nw", {"bps": 32}), cfg,
                                        data=(s, s.copy()))
    assert record.correct and best == 0


def test_nw_empty_versus_k(cfg):
    a = np.empty(0, dtype=np.int32)
    b = np.array([0, 1, 2, 3, 0], dtype=np.int32)
    record, (score, best, aln) = run_nw(
        spec("nw", {"bps": 5}, tasklets=2, n_dpus=1), cfg, data=(a, b))
    assert record.correct and best == -5       # k gap penalties


def test_nw_random_against_full_dp(cfg):
    record, (score, best, aln) = run_nw(spec("nw", {"bps": 128},
                                             tasklets=16, n_dpus=4), cfg)
    assert record.correct


def test_nw_traceback_scores_consistent(cfg):
    from pimsim import datasets
    a = datasets.dna_sequence(3, 48, "nw_a")
    b = datasets.dna_sequence(3, 48, "nw_b")
    record, (score, best, aln) = run_nw(spec("nw", {"bps": 48}), cfg,
                                        data=(a, b))
    total = 0
    for (i, j) in aln:
        if i < 0 or j < 0:
            total += -1                        # gap
        else:
            total += 0 if a[i] == b[j] else -1
    assert total == best


# --- hst --------------------------------------------------------------------

def test_hst_uniform_image_equal_bins(cfg):
    image = np.repeat(np.arange(4096, dtype=np.uint32), 2)
    for runner in (run_hst_s, run_hst_l):
        record, hist = runner(spec("hst", {"bins": 16}), cfg, data=image)
        assert record.correct
        assert np.all(hist == hist[0])


def test_hst_single_value_image(cfg):
    image = np.full(4096, 1234, dtype=np.uint32)
    record, hist = run_hst_s(spec("hst", {"bins": 64}), cfg, data=image)
    assert record.correct
    assert hist.sum() == 4096 and np.count_nonzero(hist) == 1


def test_hst_random_12bit(cfg):
    for runner in (run_hst_s, run_hst_l):
        record, _ = runner(spec("hst", {"height": 64, "width": 64,
                                        "bins": 256}, tasklets=16, n_dpus=2),
                           cfg)
        assert record.correct


def test_hst_s_wram_limit_shrinks_tasklets(cfg):
    assert hst_s_tasklets(256, 24, 65536) == 16
    assert hst_s_tasklets(4096, 24, 65536) == 2
    t1024 = hst_s_tasklets(1024, 24, 65536)
    t4096 = hst_s_tasklets(4096, 24, 65536)
    assert t4096 < t1024 <= 16


# --- red --------------------------------------------------------------------

def test_red_one_to_ten(cfg):
    record, total = run_red(spec("red", {"n": 10}, tasklets=4, n_dpus=1), cfg,
                            data=np.arange(1, 11, dtype=np.int64))
    assert record.correct and total == 55


def test_red_empty(cfg):
    record, total = run_red(spec("red", {"n": 0}, tasklets=2, n_dpus=1), cfg,
                            data=np.empty(0, dtype=np.int64))
    assert record.correct and total == 0


def test_red_variants_agree(cfg):
    data = np.arange(-500, 1500, dtype=np.int64)
    totals = set()
    for variant in ("SINGLE", "BARRIER", "HANDS"):
        record, total = run_red(spec("red", {"n": len(data),
                                             "variant": variant},
                                     tasklets=16, n_dpus=2), cfg, data=data)
        assert record.correct
        totals.add(int(total))
    assert len(totals) == 1


# --- scan -------------------------------------------------------------------

def test_scan_literal(cfg):
    data = np.array([1, 2, 3, 4], dtype=np.int64)
    for variant in ("ssa", "rss"):
        record, out = run_scan(spec("scan", {"n": 4, "variant": variant},
                                    tasklets=2, n_dpus=1), cfg, data=data)
        assert record.correct and np.array_equal(out, [0, 1, 3, 6])


def test_scan_zeros(cfg):
    data = np.zeros(2048, dtype=np.int64)
    for variant in ("ssa", "rss"):
        record, out = run_scan(spec("scan", {"n": 2048, "variant": variant}),
                               cfg, data=data)
        assert record.correct and not out.any()


def test_scan_random_multi_dpu(cfg):
    for variant in ("ssa", "rss"):
        record, _ = run_scan(spec("scan", {"n": 20000, "variant": variant},
                                  tasklets=16, n_dpus=4), cfg)
        assert record.correct


# --- trns -------------------------------------------------------------------

def test_trns_square_scalar_tiles(cfg):
    record, out = run_trns(spec("trns", {"mp": 2, "m": 1, "np": 2, "n": 1}),
                           cfg, data=np.array([1, 2, 3, 4], dtype=np.int64))
    assert record.correct and np.array_equal(out, [1, 3, 2, 4])


def test_trns_plain_transpose(cfg):
    record, out = run_trns(spec("trns", {"mp": 4, "m": 1, "np": 2, "n": 1}),
                           cfg)
    assert record.correct


def test_trns_tiled_random(cfg):
    record, _ = run_trns(spec("trns", {"mp": 64, "m": 4, "np": 8, "n": 8},
                              tasklets=16, n_dpus=4), cfg)
    assert record.correct


# --- whole-suite smoke ------------------------------------------------------

def test_every_benchmark_desk_run(cfg):
    for name in BENCHMARK_NAMES:
        record, _ = run_benchmark(name, desk_spec(name, seed=11), cfg)
        assert record.correct, name
        assert record.dpu_seconds > 0
        assert record.total_seconds >= record.dpu_seconds


def test_unknown_benchmark_name(cfg):
    with pytest.raises(KeyError):
        run_benchmark("sort", desk_spec("va"), cfg)
