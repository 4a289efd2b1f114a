"""Full throughput sweep: batch-size, grid-size and rule-count curves.

Runs the three standard measurements and writes one CSV per curve into
--out, printing each row as it lands.  The reported number is the
minimum steps-per-second over --repeats runs, so curves are stable
enough to compare across commits.
"""

from __future__ import annotations

import argparse
import time
from pathlib import Path

from rulegrid.harness import (
    GRID_SIZE_VALUES,
    NUM_RULES_VALUES,
    bench_scaling,
    bench_throughput,
    write_csv,
)

BATCH_SIZES = (1, 4, 16, 64, 256, 1024, 4096)


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--env", default="XLand-MiniGrid-R1-9x9")
    parser.add_argument("--steps", type=int, default=512)
    parser.add_argument("--repeats", type=int, default=3)
    parser.add_argument("--workers", type=int, default=1)
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--out", type=Path, default=Path("benchmark_results"))
    args = parser.parse_args(argv)

    args.out.mkdir(parents=True, exist_ok=True)
    t0 = time.perf_counter()

    rows = bench_throughput(
        args.env, BATCH_SIZES, args.steps, args.repeats, args.workers, args.seed
    )
    for num_envs, sps in rows:
        print(f"batch {num_envs:>5}: {sps:>12,.0f} SPS")
    write_csv(args.out / "throughput.csv", ("num_envs", "sps"), rows)

    for axis, values in (("grid_size", GRID_SIZE_VALUES), ("num_rules", NUM_RULES_VALUES)):
        rows = bench_scaling(
            axis, values, repeats=args.repeats, workers=args.workers, seed=args.seed
        )
        for value, sps in rows:
            print(f"{axis} {value:>3}: {sps:>12,.0f} SPS")
        write_csv(args.out / f"{axis}.csv", (axis, "sps"), rows)

    print(f"wrote 3 CSVs to {args.out} in {time.perf_counter() - t0:.1f}s")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
