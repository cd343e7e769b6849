#!/usr/bin/env python3
"""Relax the thin-film element into its metastable states.

Starts from the flux-closure, C, and S configurations on the 1 x 2 x 0.02
micron permalloy element and relaxes each with the projected second-order
scheme at 1 ps steps until the energy stalls.  Writes energy traces and final
snapshots via the CLI plumbing.

Usage: python scripts/run_equilibrium.py [--paper-scale] [--max-steps N] [--out DIR]
"""

import sys

from llimex.io_cli import cli_main


def main(argv=None):
    argv = list(sys.argv[1:] if argv is None else argv)
    return cli_main(["relax"] + argv)


if __name__ == "__main__":
    sys.exit(main())
