#!/usr/bin/env python3
"""Run the bundled program suite across seeds and print the solve table.

    python3 scripts/run_suite.py
    python3 scripts/run_suite.py --seeds 0,1,2 --hidden 1 --out out/h1.csv

With defaults this reproduces the headline numbers: every .nt file under
programs/, seeds 0..4, five hidden units per output.
"""

import argparse
import sys
from pathlib import Path

REPO = Path(__file__).resolve().parents[1]
sys.path.insert(0, str(REPO / "src"))

from neuroterm.pipeline import PipelineConfig, bench, discover_solver  # noqa: E402


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--programs", default=str(REPO / "programs"), help="directory of .nt files")
    ap.add_argument("--seeds", default="0,1,2,3,4")
    ap.add_argument("--samples", type=int, default=1000)
    ap.add_argument("--hidden", type=int, default=5)
    ap.add_argument("--strategy", default="pas", choices=["uniform", "gaussian", "pas"])
    ap.add_argument("--retries", type=int, default=3)
    ap.add_argument("--timeout", type=float, default=60.0)
    ap.add_argument("--out", default=str(REPO / "out" / "bench.csv"), help="csv destination")
    args = ap.parse_args()

    solver = discover_solver()
    if solver is None:
        print("error: no solver (install z3 or node for scripts/z3_stdin.js)", file=sys.stderr)
        return 5
    cfg = PipelineConfig(
        samples=args.samples,
        strategy=args.strategy,
        hidden=args.hidden,
        retries=args.retries,
        timeout=args.timeout,
        solver=solver,
    )
    seeds = [int(s) for s in args.seeds.split(",") if s.strip() != ""]
    summary = bench(args.programs, cfg, seeds=seeds, out_csv=args.out)
    print(summary.table())
    print(f"\ntotal wall time: {summary.elapsed:.0f}s")
    print(f"rows written to {args.out}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
