#!/usr/bin/env python3
"""Reproduce the manufactured-solution convergence tables.

Runs every table protocol at its published scale and prints errors plus
fitted orders.  The temporal sweeps integrate to T = tau with k = tau/d;
the spatial sweep holds k tiny; the third-order scheme couples k = c h^(2/3).

Usage: python scripts/reproduce_tables.py [--quick] [--skip-bdf2]
  --quick      desk-scale variants (same protocols, smaller grids)
  --skip-bdf2  leave out the GMRES-based comparison rows
"""

import argparse
import sys

from llimex.linsolve import GmresConfig
from llimex.steppers import SchemeId
from llimex.experiments import RefinementSpec, convergence_study


def show(title, report):
    print(f"\n=== {title}")
    print(f"{'k':>12} {'h':>10} {'linf':>12} {'l2':>12} {'h1':>12} {'secs':>8}")
    for s in report.samples:
        print(
            f"{s.k:12.6g} {s.h:10.5g} {s.linf:12.4e} {s.l2:12.4e} "
            f"{s.h1:12.4e} {s.wall_time:8.2f}"
        )
    fo = report.fitted_order
    print(f"{'order':>12} {'':>10} {fo['linf']:12.4f} {fo['l2']:12.4f} {fo['h1']:12.4f}")


def main(argv=None):
    ap = argparse.ArgumentParser()
    ap.add_argument("--quick", action="store_true")
    ap.add_argument("--skip-bdf2", action="store_true")
    args = ap.parse_args(argv)

    q = args.quick
    gmres = GmresConfig(rel_tol=1e-12)

    tau = 1e-3 if q else 1e-4
    n1 = 400 if q else 5000
    spec = RefinementSpec(
        mode="temporal", final_time=tau, ks=tuple(tau / d for d in (5, 10, 15, 20, 25)),
        n_fixed=n1,
    )
    show("temporal, 2nd order, 1-D", convergence_study(SchemeId.IMEXRK2, 1, spec))
    if not args.skip_bdf2:
        show(
            "temporal, BDF2, 1-D",
            convergence_study(SchemeId.BDF2, 1, spec, gmres_cfg=gmres),
        )

    spec = RefinementSpec(
        mode="spatial", final_time=1e-3, ns=(50, 100, 150, 200, 250),
        k_fixed=1e-6 if q else 1e-7,
    )
    show("spatial, 2nd order, 1-D", convergence_study(SchemeId.IMEXRK2, 1, spec))

    spec = RefinementSpec(
        mode="temporal", final_time=1.0, ks=(1 / 4, 1 / 6, 1 / 8, 1 / 10),
        n_fixed=8 if q else 16,
    )
    show("temporal, 2nd order, 3-D", convergence_study(SchemeId.IMEXRK2, 3, spec))

    spec = RefinementSpec(
        mode="spatial", final_time=1.0, ns=(3, 5, 7, 9, 11), k_fixed=1e-4,
    )
    show("spatial, 2nd order, 3-D", convergence_study(SchemeId.IMEXRK2, 3, spec))

    spec = RefinementSpec(mode="coupled", final_time=1.0, ns=(3, 4, 5, 6), coupling=0.01)
    show("coupled, 3rd order, 1-D", convergence_study(SchemeId.IMEXRK3, 1, spec))

    spec = RefinementSpec(mode="coupled", final_time=1.0, ns=(3, 4, 5, 6), coupling=0.001)
    show("coupled, 3rd order, 3-D", convergence_study(SchemeId.IMEXRK3, 3, spec))

    tau = 2e-2
    spec = RefinementSpec(
        mode="paired", final_time=tau, ks=tuple(tau / d for d in (3, 4, 5, 6)),
        ns=(3, 4, 5, 6),
    )
    show("paired, four-stage scheme, 1-D", convergence_study(SchemeId.SSPIMEXRK2, 1, spec))

    tau = 1e-3
    spec = RefinementSpec(
        mode="paired", final_time=tau, ks=tuple(tau / d for d in (8, 10, 12, 14)),
        ns=(8, 10, 12, 14),
    )
    show("paired, four-stage scheme, 3-D", convergence_study(SchemeId.SSPIMEXRK2, 3, spec))
    return 0


if __name__ == "__main__":
    sys.exit(main())
