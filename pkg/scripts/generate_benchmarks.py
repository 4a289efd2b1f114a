"""Materialize every registered benchmark as a file the loader can find.

Writes one .xmgb file per config into the data directory (or --out),
so ``load_named`` and the CLI's --benchmark flags work offline.  Sizes
follow the shipped presets unless overridden.
"""

from __future__ import annotations

import argparse
import logging
import time
from pathlib import Path

from rulegrid.benchgen import CONFIGS, config_with_seed, generate_benchmark, ruleset_stats
from rulegrid.benchio import Benchmark, benchmark_path, data_dir, save_benchmark

DEFAULT_SIZE = 10_000


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--configs", nargs="*", default=sorted(CONFIGS), choices=sorted(CONFIGS))
    parser.add_argument("--num", type=int, default=DEFAULT_SIZE, help="tasks per benchmark")
    parser.add_argument("--seed", type=int, default=None, help="override the preset seed")
    parser.add_argument("--out", type=Path, default=None, help="directory; default: data dir")
    parser.add_argument("--force", action="store_true", help="overwrite existing files")
    args = parser.parse_args(argv)

    logging.basicConfig(level=logging.INFO, format="%(message)s")
    out_dir = args.out if args.out is not None else data_dir()
    out_dir.mkdir(parents=True, exist_ok=True)

    for name in args.configs:
        path = out_dir / benchmark_path(name).name
        if path.exists() and not args.force:
            print(f"{name}: {path} exists, skipping (--force to overwrite)")
            continue
        cfg = config_with_seed(name, args.seed)
        t0 = time.perf_counter()
        tasks = generate_benchmark(cfg, args.num)
        save_benchmark(path, Benchmark(tuple(tasks), name, cfg.random_seed))
        elapsed = time.perf_counter() - t0
        hist = ruleset_stats(tasks)
        print(
            f"{name}: {len(tasks)} tasks in {elapsed:.1f}s -> {path} "
            f"(rules {min(hist)}..{max(hist)}, {path.stat().st_size:,} bytes)"
        )
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
