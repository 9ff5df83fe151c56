#!/usr/bin/env python3
"""Full-scale FSR-vs-RSSI sweep: 8 MCS x 17 RSSI points x 1000 frames of
1000 bytes, at 20 and 40 MHz.  Writes fsr_20mhz.csv / fsr_40mhz.csv.

Takes tens of minutes at full scale; pass --frames 100 for a smoke run.
"""

import sys

from lightlink.cli import main

if __name__ == "__main__":
    args = sys.argv[1:]
    sys.exit(main(["sweep", "--out", "results/sweep"] + args))
