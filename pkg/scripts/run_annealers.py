#!/usr/bin/env python3
"""Run both annealers on the L=5 chain and export their convergence traces.

The swap search heats a thermal state (T_i = 1J into a T_b = 4J bath) while
killing its overlap with the slowest diagonal mode; the unitary search
eliminates the slow coherence pair of a random mixed state at T_b = 0.1J.
Expect convergence below 1e-6 after a few thousand (swap) and a few tens of
thousands (unitary) iterations.
"""

import argparse
import sys
from pathlib import Path

from mpemba.cli import main as cli_main

CONFIG_DIR = Path(__file__).resolve().parent.parent / "configs"


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out", default="out/annealers")
    parser.add_argument("--seed", type=int, default=None)
    args = parser.parse_args()
    extra = ["--seed", str(args.seed)] if args.seed is not None else []
    worst = 0
    for name in ("metropolis_swap", "metropolis_unitary"):
        rc = cli_main([
            "metropolis", "--config", str(CONFIG_DIR / f"{name}.json"),
            "--out", f"{args.out}/{name}",
        ] + extra)
        worst = max(worst, rc)
    return worst


if __name__ == "__main__":
    sys.exit(main())
