"""Essential-norm brackets (witness limsup vs tail-ratio formula) over a beta range."""
import argparse
import json
import sys

from genhilbert import measure as M
from genhilbert import operator as O


def main(argv=None):
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--mode", choices=["power", "log"], default="power")
    p.add_argument("--alpha", type=float, default=2.0)
    p.add_argument("--gamma", type=float, default=0.0)
    p.add_argument("--betas", type=float, nargs="+", default=[1.75, 2.0, 2.25, 2.5, 3.0])
    args = p.parse_args(argv)

    alpha = 1.0 if args.mode == "log" else args.alpha
    rows = []
    for b in args.betas:
        m = M.PowerLogDensity(1.0, b, args.gamma)
        try:
            rec = O.essnorm_bracket(m, args.mode, alpha).to_record()
            rec.pop("grid")
        except O.HypothesisViolation as exc:
            rec = {"mode": args.mode, "alpha": alpha, "hypothesis_violation": str(exc)}
        rows.append({"beta": b, "gamma": args.gamma, **rec})
    json.dump(rows, sys.stdout, indent=2)
    print()


if __name__ == "__main__":
    main()
