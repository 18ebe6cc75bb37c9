"""Coefficient-route vs integral-route residuals over a measure x input matrix."""
import argparse
import sys

from genhilbert import analytic as A
from genhilbert import measure as M
from genhilbert import operator as O

MEASURES = ["lebesgue", "power_log beta=2", "power_log beta=3",
            "power_log beta=1 gamma=-2", "atoms 0.5:1"]


def main(argv=None):
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--lams", type=float, nargs="+", default=[0.5, 0.9, 0.99])
    p.add_argument("--alpha", type=float, default=2.0)
    p.add_argument("--trunc", type=int, default=A.DEFAULT_N)
    args = p.parse_args(argv)

    print("measure,input,residual,bound")
    for spec in MEASURES:
        op = O.HankelOperator(M.parse_measure(spec), args.trunc)
        for lam in args.lams:
            f = A.test_function_power(lam, args.alpha, args.trunc)
            try:
                r = O.agreement_residual(op, f)
                print(f"{spec},power({lam:g}),{r.value:.3e},{r.bound:.3e}")
            except O.CertificationError as exc:
                print(f"{spec},power({lam:g}),nan,{exc}", file=sys.stderr)


if __name__ == "__main__":
    main()
