#!/usr/bin/env python3
"""Search for the global worst case in 4-D: it lives in 3 coordinates.

The two-level worst case (over the level set of the Rayleigh quotient,
and over all admissible preconditioner directions at each point) is
searched by seeded random restarts of a derivative-free descent, with
the inner cone minimum evaluated by sampling, never by the closed form.
The optimizer found concentrates on the predicted three coordinates and
never beats the closed-form 3-D worst value.
"""

import numpy as np

from psdlab import Spectrum, three_d_concentration_check

MUS = np.array([1.0, 0.6, 0.3, 0.1])
GAMMA = 0.5
MU0 = 0.8


def main():
    spectrum = Spectrum(lambdas=1.0 / MUS)
    report = three_d_concentration_check(
        spectrum, gamma=GAMMA, mu0=MU0, n_outer=20, seed=42
    )
    print(report.summary())
    print()
    if report.n_significant <= 3 and report.beats_reference_by <= 1e-6:
        print("outcome: the search confirms the 3-D concentration of the worst case.")
    else:
        print("outcome: UNEXPECTED - the search disagrees with the 3-D reduction.")


if __name__ == "__main__":
    main()
