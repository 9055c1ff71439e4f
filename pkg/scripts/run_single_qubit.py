#!/usr/bin/env python3
"""Single-qubit Mpemba experiment: spectrum, both trajectories, certificate.

Reproduces the qubit datasets (Bloch inversion r -> (0, 0, 0.545), crossing
of the free-energy curves, L1 decay-rate doubling) from the checked-in
config.  Outputs land under --out (default out/qubit_demo).
"""

import argparse
import sys
from pathlib import Path

from mpemba.cli import main as cli_main

CONFIG = Path(__file__).resolve().parent.parent / "configs" / "qubit_demo.json"


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out", default="out/qubit_demo")
    args = parser.parse_args()
    for command in ("spectrum", "evolve", "mpemba"):
        rc = cli_main([command, "--config", str(CONFIG), "--out", args.out])
        if rc != 0:
            return rc
    print(f"single-qubit datasets written to {args.out}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
