#!/usr/bin/env python3
"""Run the simulated benchmarks end to end and print the summary tables.

Each config compares the four methods on one preset with ten replicates.
Results land under results/<preset>/ as per-run trace CSVs plus summary.csv.
Pass --quick to shrink the matrix for a fast sanity run.
"""

import argparse
import sys
from pathlib import Path

from yoasovi.cli import main as cli_main

CONFIGS = ["sim_p2k2.yaml", "sim_p2k3.yaml", "sim_p3k4.yaml"]


def main() -> int:
    parser = argparse.ArgumentParser()
    parser.add_argument("--quick", action="store_true",
                        help="2 replicates and 100 iterations instead of the full runs")
    parser.add_argument("--jobs", type=int, default=1)
    parser.add_argument("--out", default="results")
    args = parser.parse_args()

    config_dir = Path(__file__).resolve().parent.parent / "configs"
    worst = 0
    for name in CONFIGS:
        preset = name.removesuffix(".yaml")
        print(f"\n=== {preset} ===")
        argv = ["run", "--config", str(config_dir / name),
                "--jobs", str(args.jobs),
                "--out", str(Path(args.out) / preset)]
        if args.quick:
            argv += ["--replicates", "2", "--max-iters", "100"]
        worst = max(worst, cli_main(argv))
    return worst


if __name__ == "__main__":
    sys.exit(main())
