"""Time-averaged MCMC profile at r = 1 compared with the arcsine shape."""
import argparse

import numpy as np

from instantons.limitshape import psi_star_values
from instantons.partitions import PeriodicPotential
from instantons.sampler import batch_means, mcmc_profile_average
from instantons.swcurve import SWCurve


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--eps", type=float, default=0.05)
    ap.add_argument("--steps", type=int, default=10_000_000)
    ap.add_argument("--seed", type=int, default=20240607)
    args = ap.parse_args()
    grid = np.linspace(-3, 3, 1201)
    avg = mcmc_profile_average(PeriodicPotential((0.0,)), args.eps, 1.0, args.steps, args.seed, grid)
    ref = psi_star_values(grid, SWCurve((1.0, 0.0), 1.0))
    l1 = np.trapezoid(np.abs(avg.mean_profile - ref), grid)
    burn = len(avg.sizes) // 5
    mean, se = batch_means(avg.sizes[burn:] * args.eps ** 2, 10)
    print(f"L1 distance to arcsine {l1:.4f}")
    print(f"eps^2 |lambda| = {mean:.3f} +- {se:.3f} (limit 1)")


if __name__ == "__main__":
    main()
