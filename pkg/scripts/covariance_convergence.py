"""Convergence study for the truncated sheet covariance.

Tabulates S_J = m2^2 sum_{i<=J} (int_[0,x] e_i)(int_[0,y] e_i) against the
exact covariance M min(x, y), fits the empirical decay rate of the gap on
the top octave, and reports the level where the gap would cross 1e-3.

The gap decays like J^{-1/2} (indicator data in the Hermite-function
basis), so the 1e-3 target sits near J ~ 2e5, far beyond J = 400.

Usage: python scripts/covariance_convergence.py [--x 1.0] [--j-max 3200]
"""

import argparse
import math

import numpy as np

from levysheet.basis import TensorBasisOrdering, build_ortho_polys
from levysheet.measures import two_point_measure
from levysheet.whitenoise import covariance_partial_sum, covariance_target


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--x", type=float, default=1.0, help="evaluation point")
    ap.add_argument("--j-max", type=int, default=3200,
                    help="largest truncation level (doubling ladder)")
    args = ap.parse_args()

    measure = two_point_measure()
    system = build_ortho_polys(measure)
    target = covariance_target([args.x], [args.x], measure.moment(2))

    levels = []
    J = 50
    while J <= args.j_max:
        levels.append(J)
        J *= 2
    print(f"target M*min(x,x) = {target!r}")
    print(f"{'J':>7} {'S_J':>12} {'gap':>10}")
    gaps = []
    for J in levels:
        ordering = TensorBasisOrdering(n=1)
        s = covariance_partial_sum([args.x], [args.x], J, system, ordering)
        gap = abs(s - target)
        gaps.append(gap)
        print(f"{J:7d} {s:12.6f} {gap:10.2e}")

    # log-log slope over the last three doublings
    lv = np.log(np.asarray(levels[-4:], float))
    lg = np.log(np.asarray(gaps[-4:], float))
    slope = float(np.polyfit(lv, lg, 1)[0])
    j_cross = levels[-1] * (gaps[-1] / 1e-3) ** (-1.0 / slope)
    print(f"fitted gap ~ J^{slope:.3f}")
    print(f"projected J for gap = 1e-3: ~{j_cross:.1e} "
          f"(J=400 gives {gaps[0] * math.sqrt(levels[0] / 400):.1e} "
          f"by the fitted rate)")


if __name__ == "__main__":
    main()
