#!/usr/bin/env python3
"""Run the three production sweeps and drop CSV + JSON artifacts under out/.

Usage: python scripts/run_sweeps.py [--seed N] [--samples N] [--outdir DIR]
"""

import argparse
import pathlib
import sys

from qescrow.cli import main as qescrow_main


def run(outdir: pathlib.Path, seed: int, samples: int) -> int:
    outdir.mkdir(parents=True, exist_ok=True)
    jobs = [
        ("coinflip", []),
        ("escrow-binding", []),
        ("escrow-sealing", []),
    ]
    worst = 0
    for name, extra in jobs:
        for fmt in ("csv", "json"):
            argv = [name, "--seed", str(seed), "--samples", str(samples),
                    "--format", fmt, "--out", str(outdir / f"{name}.{fmt}")] + extra
            code = qescrow_main(argv)
            worst = max(worst, code)
    return worst


if __name__ == "__main__":
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--samples", type=int, default=500)
    parser.add_argument("--outdir", default="out")
    args = parser.parse_args()
    sys.exit(run(pathlib.Path(args.outdir), args.seed, args.samples))
