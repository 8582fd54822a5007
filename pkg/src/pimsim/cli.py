"""Command-line driver.

    pim-model <experiment> [--config FILE] [--out DIR] [--seed N]
              [--dpus N [N ...]] [--tasklets N [N ...]] [--bench NAME [...]]
              [--seeds N] [--dump-config]

Experiments: arith, wram-stream, mram-stream, stride, gups, roofline,
transfer, bench, scale-strong, scale-weak, accept. Results land in
<out>/<experiment>.csv and .json. Exit codes: 0 success, 1 error,
2 acceptance failures.
"""

from __future__ import annotations

import argparse
import sys

from . import benchmarks
from .acceptance import run_acceptance
from .config import dump_config, load_config
from .errors import PimError
from .experiments import EXPERIMENT_KINDS, SweepSpec, run_sweep, write_results


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="pim-model",
        description="Cycle-approximate in-memory-processing system model")
    parser.add_argument("experiment", choices=EXPERIMENT_KINDS,
                        help="experiment kind to run")
    parser.add_argument("--config", metavar="FILE",
                        help="flat key=value configuration file")
    parser.add_argument("--out", metavar="DIR", default="results",
                        help="output directory (default: results)")
    parser.add_argument("--seed", type=int, default=1, metavar="N")
    parser.add_argument("--dpus", type=int, nargs="+", metavar="N",
                        help="DPU-count grid")
    parser.add_argument("--tasklets", type=int, nargs="+", metavar="N",
                        help="tasklet grid")
    parser.add_argument("--bench", nargs="+", metavar="NAME",
                        choices=list(benchmarks.BENCHMARK_NAMES),
                        help="restrict benchmark experiments to these names")
    parser.add_argument("--seeds", type=int, default=100, metavar="N",
                        help="seed count for the functional criterion")
    parser.add_argument("--dump-config", action="store_true",
                        help="print the effective configuration and exit")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        source = ""
        if args.config:
            with open(args.config) as fh:
                source = fh.read()
        cfg = load_config(source)
    except (OSError, PimError) as err:
        print(f"error: {err}", file=sys.stderr)
        return 1

    if args.dump_config:
        print(dump_config(cfg), end="")
        return 0

    if args.experiment == "accept":
        results = run_acceptance(cfg, seeds=args.seeds, verbose=True)
        rows = [{"experiment": "accept", "criterion": r.name,
                 "passed": r.passed, "margin": r.margin, "detail": r.detail}
                for r in results]
        write_results(rows, args.out, "accept", cfg=cfg)
        failed = [r for r in results if not r.passed]
        print(f"{len(results) - len(failed)}/{len(results)} criteria passed")
        return 2 if failed else 0

    spec = SweepSpec(kind=args.experiment, seed=args.seed, out_dir=args.out)
    if args.tasklets:
        spec.tasklets = args.tasklets
    if args.dpus:
        spec.dpus = args.dpus
    if args.bench:
        spec.bench_names = args.bench
    try:
        rows = run_sweep(spec, cfg)
        csv_path, json_path = write_results(rows, args.out, args.experiment,
                                            cfg=cfg, spec=spec)
    except PimError as err:
        print(f"error: {err}", file=sys.stderr)
        return 1
    print(f"{len(rows)} rows -> {csv_path}, {json_path}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
