#!/usr/bin/env python3
"""Maximum-distance search for the three hardware setups (no PA, +20 dB PA,
+20 dB PA + lens).  Writes distance.csv."""

import sys

from lightlink.cli import main

if __name__ == "__main__":
    args = sys.argv[1:]
    sys.exit(main(["distance", "--out", "results/distance"] + args))
