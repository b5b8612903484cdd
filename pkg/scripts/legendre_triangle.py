"""Two routes to the dual free energy on the r = 3 triangle curve."""
import argparse

from instantons.limitshape import legendre_check, xi_from_gaps
from instantons.swcurve import SWCurve, periods_a, periods_a_dual


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--coeffs", default="1,0,-3.5,0")
    ap.add_argument("--lam", type=float, default=1.0)
    args = ap.parse_args()
    C = SWCurve(tuple(float(c) for c in args.coeffs.split(",")), args.lam)
    print("a  =", periods_a(C))
    print("aD =", periods_a_dual(C).a_dual)
    xi = xi_from_gaps(C).xi
    print("xi =", [float(v) for v in xi])
    rep = legendre_check(xi, args.lam)
    print(f"relative gap {rep.relative_gap:.2e}, gradient identity error {rep.gradient_error:.2e}")


if __name__ == "__main__":
    main()
