#!/usr/bin/env python3
"""Swept-field hysteresis loops on the 1 x 2 x 0.02 micron permalloy film.

Desk scale by default (25 x 50 cells, 50 field steps per sweep).  Pass
--paper-scale for the full benchmark resolution (50 x 100 cells of 20 nm,
200 field steps, canting +1 degree); that run takes hours and targets a
y-loop coercive field of 5.4688 mT and an x-loop one of 2.7188 mT.

Usage: python scripts/run_nist_benchmark.py [--axis {x,y}] [--paper-scale] [--out DIR]
"""

import sys

from llimex.io_cli import cli_main


def main(argv=None):
    argv = list(sys.argv[1:] if argv is None else argv)
    return cli_main(["hysteresis"] + argv)


if __name__ == "__main__":
    sys.exit(main())
