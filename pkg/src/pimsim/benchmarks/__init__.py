"""The 16-workload benchmark suite: registry and desk-scale defaults."""

from __future__ import annotations

from .common import BenchmarkSpec, ExperimentRecord, HostRun
from .dense import run_va, run_gemv, run_mlp
from .spmv import run_spmv
from .db import run_sel, run_uni
from .analytics import run_bs, run_ts
from .graphs import run_bfs
from .nw import run_nw
from .hst import run_hst_s, run_hst_l
from .primitives import run_red, run_scan
from .trns import run_trns


def _run_scan_ssa(spec, cfg, data=None, check=True):
    spec.params.setdefault("variant", "ssa")
    return run_scan(spec, cfg, data=data, check=check)


def _run_scan_rss(spec, cfg, data=None, check=True):
    spec.params = {**spec.params, "variant": "rss"}
    return run_scan(spec, cfg, data=data, check=check)


RUNNERS = {
    "va": run_va,
    "gemv": run_gemv,
    "spmv": run_spmv,
    "sel": run_sel,
    "uni": run_uni,
    "bs": run_bs,
    "ts": run_ts,
    "bfs": run_bfs,
    "mlp": run_mlp,
    "nw": run_nw,
    "hst-s": run_hst_s,
    "hst-l": run_hst_l,
    "red": run_red,
    "scan-ssa": _run_scan_ssa,
    "scan-rss": _run_scan_rss,
    "trns": run_trns,
}

BENCHMARK_NAMES = tuple(RUNNERS)

# quick desk-scale dataset shapes (seconds per run, oracle included)
DESK_PARAMS = {
    "va": {"n": 16384},
    "gemv": {"rows": 128, "cols": 64},
    "spmv": {"rows": 256, "cols": 256, "density": 0.01},
    "sel": {"n": 16384},
    "uni": {"n": 16384},
    "bs": {"n": 1024, "queries": 512},
    "ts": {"n": 2048, "m": 64},
    "bfs": {"vertices": 512},
    "mlp": {"layers": 3, "width": 64},
    "nw": {"bps": 64},
    "hst-s": {"height": 64, "width": 64, "bins": 256},
    "hst-l": {"height": 64, "width": 64, "bins": 256},
    "red": {"n": 16384},
    "scan-ssa": {"n": 8192},
    "scan-rss": {"n": 8192},
    "trns": {"mp": 16, "m": 4, "np": 8, "n": 8},
}

# larger shapes for the scaling experiments; sized so fixed synchronization
# costs stay small against per-DPU work at 64 DPUs
SCALE_PARAMS = {
    "va": {"n": 2 ** 21},
    "gemv": {"rows": 2048, "cols": 512},
    "spmv": {"rows": 4096, "cols": 4096, "density": 0.002},
    "sel": {"n": 2 ** 21},
    "uni": {"n": 2 ** 21},
    "bs": {"n": 2 ** 15, "queries": 2 ** 12},
    "ts": {"n": 2 ** 16, "m": 64},
    "bfs": {"vertices": 2048},
    "mlp": {"layers": 3, "width": 1024},
    "nw": {"bps": 512},
    "hst-s": {"height": 3072, "width": 2048, "bins": 256},
    "hst-l": {"height": 768, "width": 512, "bins": 256},
    "red": {"n": 2 ** 22},
    "scan-ssa": {"n": 2 ** 21},
    "scan-rss": {"n": 2 ** 21},
    "trns": {"mp": 64, "m": 8, "np": 64, "n": 8},
}


def run_benchmark(name: str, spec: BenchmarkSpec, cfg, data=None, check=True):
    """Run one benchmark end to end; returns (ExperimentRecord, output)."""
    try:
        runner = RUNNERS[name]
    except KeyError:
        raise KeyError(f"unknown benchmark {name!r}; choose from "
                       f"{', '.join(BENCHMARK_NAMES)}") from None
    return runner(spec, cfg, data=data, check=check)


def desk_spec(name: str, seed: int = 1, tasklets: int = 16,
              n_dpus: int = 4) -> BenchmarkSpec:
    return BenchmarkSpec(name, dict(DESK_PARAMS[name]), tasklets=tasklets,
                         n_dpus=n_dpus, seed=seed)


def scale_spec(name: str, seed: int = 1, tasklets: int = 16,
               n_dpus: int = 64) -> BenchmarkSpec:
    return BenchmarkSpec(name, dict(SCALE_PARAMS[name]), tasklets=tasklets,
                         n_dpus=n_dpus, seed=seed)
