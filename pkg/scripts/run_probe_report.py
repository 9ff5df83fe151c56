#!/usr/bin/env python3
"""Probe-point distortion report (16-QAM transmission through the default
chain): per-point power/noise/SNR/EVM table, constellation dumps, raw I/Q
captures, and per-subcarrier receive power."""

import sys

from lightlink.cli import main

if __name__ == "__main__":
    args = sys.argv[1:]
    sys.exit(main(["probe", "--out", "results/probe"] + args))
