#!/usr/bin/env python3
"""Run every canned experiment into one results directory.

Usage:
  python scripts/run_presets.py --out results --seed 0 [--compensate]
"""

import argparse
import time

from cfcsim.presets import PRESETS, run_preset


def main() -> None:
    parser = argparse.ArgumentParser(description="Run all presets")
    parser.add_argument("--out", default="results", help="output root (default: results)")
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--compensate", action="store_true", help="decode with dead-time compensation")
    parser.add_argument("--parallel", type=int, default=1)
    args = parser.parse_args()

    for name in sorted(PRESETS):
        t0 = time.perf_counter()
        result = run_preset(
            name, f"{args.out}/{name}",
            seed=args.seed, compensate=args.compensate, parallel=args.parallel,
        )
        print(f"{name}: {len(result.files)} files in {time.perf_counter() - t0:.1f}s -> {result.out_dir}")


if __name__ == "__main__":
    main()
