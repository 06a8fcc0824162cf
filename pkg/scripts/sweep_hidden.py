#!/usr/bin/env python3
"""Ablation over the per-output hidden width.

    python3 scripts/sweep_hidden.py --widths 1,2,5,8 --seeds 0,1,2

Runs the bundled suite once per width and reports problems solved per seed;
expect the single-unit column to lose the programs whose descent needs more
than one linear piece.  A full sweep is slow (minutes per width).
"""

import argparse
import csv
import sys
from pathlib import Path

REPO = Path(__file__).resolve().parents[1]
sys.path.insert(0, str(REPO / "src"))

from neuroterm.pipeline import PipelineConfig, bench, discover_solver  # noqa: E402


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--programs", default=str(REPO / "programs"))
    ap.add_argument("--widths", default="1,2,3,5,8")
    ap.add_argument("--seeds", default="0,1,2,3,4")
    ap.add_argument("--out", default=str(REPO / "out" / "sweep_hidden.csv"))
    args = ap.parse_args()

    solver = discover_solver()
    if solver is None:
        print("error: no solver (install z3 or node for scripts/z3_stdin.js)", file=sys.stderr)
        return 5
    widths = [int(w) for w in args.widths.split(",") if w.strip() != ""]
    seeds = [int(s) for s in args.seeds.split(",") if s.strip() != ""]

    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    results = []
    for h in widths:
        summary = bench(args.programs, PipelineConfig(hidden=h, solver=solver), seeds=seeds)
        results.append((h, summary))
        solved = [summary.per_seed_solved[s] for s in seeds]
        print(f"h={h}: solved per seed {solved}, avg rate {summary.avg_rate:.1%}, {summary.elapsed:.0f}s")

    with out.open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["hidden", "seed", "program", "verdict", "attempts", "elapsed_s"])
        for h, summary in results:
            for r in summary.rows:
                w.writerow([h, r.seed, r.program, r.verdict, r.attempts, f"{r.elapsed:.3f}"])
    print(f"rows written to {out}")

    print("\nwidth  " + " ".join(f"s{s}" for s in seeds) + "  avg")
    for h, summary in results:
        solved = " ".join(str(summary.per_seed_solved[s]).ljust(len(f"s{s}")) for s in seeds)
        print(f"{str(h).ljust(6)} {solved}  {summary.avg_rate:.1%}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
