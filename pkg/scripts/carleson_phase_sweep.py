"""Sweep (beta, gamma) and compare the numerical Carleson verdict with the phase oracle."""
import argparse
import csv
import sys

import numpy as np

from genhilbert import measure as M
from genhilbert import verify as V


def main(argv=None):
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--s", type=float, default=1.0)
    p.add_argument("--q", type=float, default=0.0)
    p.add_argument("--betas", type=float, nargs="+", default=list(np.arange(0.5, 3.01, 0.25)))
    p.add_argument("--gammas", type=float, nargs="+", default=[-2.0, -1.0, 0.0, 1.0])
    p.add_argument("--depth", type=int, default=128)
    args = p.parse_args(argv)

    w = csv.writer(sys.stdout, lineterminator="\n")
    w.writerow(["beta", "gamma", "sup", "bounded", "vanishing", "oracle_bounded",
                "oracle_vanishing", "agree"])
    disagreements = 0
    for b in args.betas:
        for g in args.gammas:
            m = M.PowerLogDensity(1.0, b, g)
            rep = M.carleson_report(m, args.s, args.q, depth=args.depth)
            ob, ov = V.oracle_phase(m, args.s, args.q)
            agree = (rep.verdict_bounded, rep.verdict_vanishing) == (ob, ov)
            disagreements += not agree
            w.writerow(["%g" % b, "%g" % g, "%.17g" % rep.sup_estimate, rep.verdict_bounded,
                        rep.verdict_vanishing, ob, ov, agree])
    print(f"# disagreements: {disagreements}", file=sys.stderr)
    return int(disagreements > 0)


if __name__ == "__main__":
    sys.exit(main())
