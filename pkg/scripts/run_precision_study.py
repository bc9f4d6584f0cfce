#!/usr/bin/env python3
"""Measure how coarsening effect annotations changes synthesis effort.

Runs every bundled goal under precise, class-level, and purity-level effect
annotations and reports candidates evaluated per cell.

Usage:
    python scripts/run_precision_study.py [--goals DIR] [--budget N] [--out CSV]
"""

import argparse
import csv
import sys
import time
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "src"))

from effsynth.driver import synthesize
from effsynth.goalfile import load_goal_file
from effsynth.search import PRECISIONS, SearchConfig


def main() -> int:
    ap = argparse.ArgumentParser()
    ap.add_argument("--goals", default=str(Path(__file__).resolve().parents[1] / "goals"))
    ap.add_argument("--budget", type=int, default=100_000)
    ap.add_argument("--timeout", type=float, default=300.0)
    ap.add_argument("--out", default="-")
    args = ap.parse_args()

    rows = []
    for path in sorted(Path(args.goals).glob("*.goal")):
        gf, ct, world = load_goal_file(str(path))
        for precision in PRECISIONS:
            cfg = SearchConfig(precision=precision, candidate_budget=args.budget,
                               timeout_s=args.timeout)
            t0 = time.monotonic()
            program, report = synthesize(gf.goal, ct, world, cfg)
            wall = time.monotonic() - t0
            rows.append({
                "goal": gf.goal.name,
                "precision": precision,
                "success": int(report.success),
                "wall_s": f"{wall:.2f}",
                "candidates_evaluated": report.candidates_evaluated,
            })
            print(f"{gf.goal.name:16s} {precision:8s} success={report.success} "
                  f"evals={report.candidates_evaluated:7d} {wall:6.1f}s",
                  file=sys.stderr)

    out = sys.stdout if args.out == "-" else open(args.out, "w", newline="")
    writer = csv.DictWriter(out, fieldnames=list(rows[0]))
    writer.writeheader()
    writer.writerows(rows)
    if out is not sys.stdout:
        out.close()
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
