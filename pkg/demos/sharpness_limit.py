#!/usr/bin/env python3
"""Attain the PSD bound: the worst-case ratio meets sigma^2 as the error vanishes.

For each quality gamma, build the explicit worst iterate/direction pair
on the optimal level-set position t1 and shrink the interval-relative
error delta.  The measured one-step contraction ratio approaches the
squared sharp factor from below; the gap closes linearly in delta.  The
ratio evaluation runs on shifted quantities, so the delta = 1e-8 rows
are exact to roughly machine precision rather than drowned in
cancellation.
"""

import numpy as np

from psdlab import WorstCaseSetup, t_star, worst_case_instance

MU_SETS = (np.array([1.0, 0.5, 0.1]), np.array([2.0, 1.0, 0.25]))
GAMMAS = (0.2, 0.5, 0.8)
DELTAS = (1e-2, 1e-4, 1e-6, 1e-8)


def main():
    for mus in MU_SETS:
        kappa = (mus[1] - mus[2]) / (mus[0] - mus[2])
        print(f"reciprocal eigenvalues {tuple(mus)}, kappa = {kappa:.6f}")
        for gamma in GAMMAS:
            sigma = (kappa + gamma * (2 - kappa)) / ((2 - kappa) + gamma * kappa)
            t1 = t_star(kappa, gamma)
            print(f"  gamma={gamma}: sigma^2 = {sigma**2:.10f}, t1 = {t1:.6f}")
            print(f"    {'delta':>8} {'measured ratio':>18} {'gap to sigma^2':>16}")
            for delta in DELTAS:
                result = worst_case_instance(
                    WorstCaseSetup(mus=mus, gamma=gamma, delta=delta, t=t1)
                )
                gap = result.predicted_ratio - result.measured_ratio
                print(f"    {delta:>8.0e} {result.measured_ratio:>18.12f} {gap:>16.3e}")
        print()
    print("The gap scales like delta itself: the bound is not just valid,")
    print("it is the exact worst case in the vanishing-error limit.")


if __name__ == "__main__":
    main()
