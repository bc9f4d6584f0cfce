#!/usr/bin/env python3
"""Compare the four guidance modes on every bundled goal.

Writes one CSV row per goal x mode with success, wall time, and the number of
candidates evaluated, mirroring the search-guidance comparison experiment.

Usage:
    python scripts/run_guidance_ablation.py [--goals DIR] [--budget N] [--out CSV]
"""

import argparse
import csv
import sys
import time
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "src"))

from effsynth.driver import synthesize
from effsynth.goalfile import load_goal_file
from effsynth.search import MODES, SearchConfig


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
        for mode in MODES:
            cfg = SearchConfig(mode=mode, candidate_budget=args.budget,
                               timeout_s=args.timeout)
            t0 = time.monotonic()
            program, report = synthesize(gf.goal, ct, world, cfg)
            wall = time.monotonic() - t0
            rows.append({
                "goal": gf.goal.name,
                "mode": mode,
                "success": int(report.success),
                "wall_s": f"{wall:.2f}",
                "candidates_evaluated": report.candidates_evaluated,
                "paths": report.paths if program else "",
            })
            print(f"{gf.goal.name:16s} {mode:13s} success={report.success} "
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
