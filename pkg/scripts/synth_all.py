#!/usr/bin/env python3
"""Synthesize every bundled goal and print the programs.

Usage:
    python scripts/synth_all.py [--goals DIR]
"""

import argparse
import sys
import time
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "src"))

from effsynth.driver import synthesize
from effsynth.goalfile import load_goal_file, print_program
from effsynth.search import SearchConfig


def main() -> int:
    ap = argparse.ArgumentParser()
    ap.add_argument("--goals", default=str(Path(__file__).resolve().parents[1] / "goals"))
    args = ap.parse_args()
    failures = 0
    for path in sorted(Path(args.goals).glob("*.goal")):
        gf, ct, world = load_goal_file(str(path))
        t0 = time.monotonic()
        program, report = synthesize(gf.goal, ct, world, SearchConfig())
        wall = time.monotonic() - t0
        print(f";; {path.name}: {wall:.2f}s, "
              f"{report.candidates_evaluated} candidates, paths={report.paths}")
        if program is None:
            print(";; NO SOLUTION")
            failures += 1
        else:
            print(print_program(program))
        print()
    return 1 if failures else 0


if __name__ == "__main__":
    raise SystemExit(main())
