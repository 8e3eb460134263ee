"""Closed-form convergence factors and per-step bound certification.

Every solver in the hierarchy contracts the interval-relative error

    delta_{i,i+1}(xi) = (xi - lambda_i) / (lambda_{i+1} - xi)

by at least ``sigma**2`` per step (or jumps below ``lambda_i``), where
``sigma`` is the solver's sharp factor:

    INVIT(1):   lambda_i / lambda_{i+1}
    PINVIT(1):  gamma + (1 - gamma) * lambda_i / lambda_{i+1}
    INVIT(2):   kappa / (2 - kappa)
    PSD:        (kappa + gamma * (2 - kappa)) / ((2 - kappa) + gamma * kappa)

with ``kappa = lambda_i (lambda_n - lambda_{i+1}) /
(lambda_{i+1} (lambda_n - lambda_i))``.  :func:`certify_step` checks one
observed step against the appropriate factor.
"""

import math
from dataclasses import dataclass

import numpy as np

from .errors import IntervalError

__all__ = [
    "HOLDS",
    "PASSED_LAMBDA_I",
    "VIOLATED",
    "BoundFactors",
    "BoundCheck",
    "locate_interval",
    "delta",
    "kappa",
    "sigma",
    "factors",
    "certify_step",
]

HOLDS = "holds"
PASSED_LAMBDA_I = "passed_lambda_i"
VIOLATED = "violated"

# Relative tolerance on the bound-ratio comparison; violations beyond it
# are treated as genuine bugs, not floating point noise.
RATIO_TOL = 1e-9

# Relative tolerance for "the step passed lambda_i": exact-subspace steps
# land on lambda_i up to roundoff amplified by the spectral spread.
_PASS_TOL = 1e-10

# Monotonicity slack: rho may not increase beyond this relative amount.
_MONOTONE_TOL = 1e-12


def _value_of(x):
    """Accept a plain number or a RayleighValue-like object."""
    return float(getattr(x, "rho", x))


def locate_interval(spectrum, value):
    """Index ``i`` with ``lambda_i <= value < lambda_{i+1}`` (0-based, left closed)."""
    lam = spectrum.lambdas
    value = float(value)
    if not math.isfinite(value):
        raise IntervalError(f"value {value} is not finite")
    if value < lam[0] * (1.0 - 1e-12) or value >= lam[-1]:
        raise IntervalError(
            f"value {value!r} outside the open spectral range [{lam[0]!r}, {lam[-1]!r})"
        )
    i = int(np.searchsorted(lam, value, side="right")) - 1
    return max(i, 0)


def delta(spectrum, i, xi):
    """Interval-relative error ``(xi - lambda_i) / (lambda_{i+1} - xi)``.

    Zero exactly at ``xi = lambda_i`` and unbounded as ``xi`` approaches
    ``lambda_{i+1}`` from the left.
    """
    lam = spectrum.lambdas
    if not 0 <= i <= len(lam) - 2:
        raise IntervalError(f"interval index {i} out of range for n={len(lam)}")
    xi = float(xi)
    if not lam[i] <= xi < lam[i + 1]:
        raise IntervalError(
            f"value {xi!r} outside [{lam[i]!r}, {lam[i + 1]!r})"
        )
    return (xi - lam[i]) / (lam[i + 1] - xi)


def kappa(spectrum, i):
    """Spectral ratio controlling the steepest-descent factors.

    Defined for interior intervals only: the topmost interval
    (``i + 1`` pointing at ``lambda_n``) makes the ratio degenerate and
    raises, as do vanishing gaps.
    """
    lam = spectrum.lambdas
    n = len(lam)
    if not 0 <= i <= n - 2:
        raise IntervalError(f"interval index {i} out of range for n={n}")
    if i + 1 == n - 1:
        raise ValueError(
            "kappa is undefined on the topmost interval (i+1 = n); "
            "the steepest-descent factor degenerates there"
        )
    if not lam[i] < lam[i + 1] < lam[-1]:
        raise ValueError(
            "kappa needs strict gaps lambda_i < lambda_{i+1} < lambda_n"
        )
    return float(lam[i] * (lam[-1] - lam[i + 1]) / (lam[i + 1] * (lam[-1] - lam[i])))


def _kappa_lenient(spectrum, i):
    """kappa with the topmost interval mapped to its limit value 0."""
    lam = spectrum.lambdas
    if i + 1 == len(lam) - 1:
        return 0.0
    return kappa(spectrum, i)


def _sigma_from_kappa(kind_value, k, q, gamma):
    if kind_value == "invit1":
        return q
    if kind_value == "pinvit1":
        return gamma + (1.0 - gamma) * q
    if kind_value == "invit2":
        return k / (2.0 - k)
    if kind_value == "psd":
        return (k + gamma * (2.0 - k)) / ((2.0 - k) + gamma * k)
    raise ValueError(f"unknown solver kind {kind_value!r}")


def _kind_value(kind):
    return getattr(kind, "value", str(kind)).lower()


def sigma(kind, spectrum, i, gamma=0.0):
    """Sharp per-step factor of a solver kind on interval ``i``.

    ``gamma`` is ignored (treated as 0) for the non-preconditioned
    kinds.  ``gamma = 1`` is admitted as the boundary value of the pure
    formula even though no admissible preconditioner attains it.
    """
    if not 0.0 <= gamma <= 1.0:
        raise ValueError("gamma must lie in [0, 1]")
    kv = _kind_value(kind)
    lam = spectrum.lambdas
    if not 0 <= i <= len(lam) - 2:
        raise IntervalError(f"interval index {i} out of range for n={len(lam)}")
    q = float(lam[i] / lam[i + 1])
    if kv in ("invit2", "psd"):
        k = kappa(spectrum, i)
    else:
        k = None
    if kv in ("invit1", "invit2"):
        gamma = 0.0
    return float(_sigma_from_kappa(kv, k, q, gamma))


@dataclass(frozen=True)
class BoundFactors:
    """All four sharp factors for one interval and preconditioner quality."""

    interval_index: int
    gamma: float
    kappa: float
    sigma_invit1: float
    sigma_pinvit1: float
    sigma_invit2: float
    sigma_psd: float


def factors(spectrum, i, gamma=0.0):
    """Bundle :func:`kappa` and the four :func:`sigma` values for interval ``i``."""
    k = kappa(spectrum, i)
    lam = spectrum.lambdas
    q = float(lam[i] / lam[i + 1])
    return BoundFactors(
        interval_index=i,
        gamma=float(gamma),
        kappa=k,
        sigma_invit1=_sigma_from_kappa("invit1", k, q, 0.0),
        sigma_pinvit1=_sigma_from_kappa("pinvit1", k, q, gamma),
        sigma_invit2=_sigma_from_kappa("invit2", k, q, 0.0),
        sigma_psd=_sigma_from_kappa("psd", k, q, gamma),
    )


@dataclass(frozen=True)
class BoundCheck:
    """Verdict of one certified step.

    ``verdict`` is ``"violated"`` only when the ratio exceeds
    ``sigma_squared`` beyond the relative tolerance ``RATIO_TOL`` *and*
    the new value stayed above ``lambda_i``.
    """

    kind: str
    gamma: float
    interval_index: int
    delta_before: float
    delta_after: float
    ratio: float
    sigma_squared: float
    slack: float
    verdict: str
    note: str = ""


def certify_step(spectrum, gamma, rho_before, rho_after, kind="psd", deltas=None):
    """Check one solver step against its sharp bound.

    ``rho_before`` must lie inside the spectral range; the interval is
    located by left-closed bracketing.  The outcome is either the
    ``passed_lambda_i`` branch (the step jumped at or below
    ``lambda_i``), a ratio comparison against ``sigma**2``
    (``holds`` / ``violated``), or ``violated`` with a note when
    monotonicity failed.

    ``deltas`` may carry the pair of interval-relative errors computed
    by the caller on a route free of cancellation (the solver driver
    evaluates them from per-eigenvalue distances in its diagonalized
    coordinates); values at or below zero mean the step passed
    ``lambda_i``.  Without it the deltas come from the ``rho`` values
    directly, whose resolution degrades once ``rho - lambda_i``
    approaches roundoff.
    """
    kv = _kind_value(kind)
    rb = _value_of(rho_before)
    ra = _value_of(rho_after)
    gamma = float(gamma)
    if kv in ("invit1", "invit2"):
        gamma = 0.0
    i = locate_interval(spectrum, rb)
    lam = spectrum.lambdas
    lam_i, lam_i1 = float(lam[i]), float(lam[i + 1])
    q = lam_i / lam_i1
    k = _kappa_lenient(spectrum, i)
    sig = _sigma_from_kappa(kv, k, q, gamma)
    sig_sq = sig * sig

    if not math.isfinite(ra):
        return BoundCheck(
            kind=kv, gamma=gamma, interval_index=i, delta_before=None,
            delta_after=None, ratio=None, sigma_squared=sig_sq, slack=None,
            verdict=VIOLATED, note=f"rho after step is not finite: {ra!r}",
        )
    if ra > rb * (1.0 + _MONOTONE_TOL):
        return BoundCheck(
            kind=kv, gamma=gamma, interval_index=i, delta_before=None,
            delta_after=None, ratio=None, sigma_squared=sig_sq, slack=None,
            verdict=VIOLATED,
            note=f"monotonicity violated: rho rose from {rb!r} to {ra!r}",
        )

    if deltas is not None:
        d_before, d_after = (float(d) for d in deltas)
    else:
        d_before = (rb - lam_i) / (lam_i1 - rb)
        d_after = None
    if (d_after is not None and d_after <= 0.0) or (
        d_after is None and ra <= lam_i * (1.0 + _PASS_TOL)
    ):
        return BoundCheck(
            kind=kv, gamma=gamma, interval_index=i, delta_before=d_before,
            delta_after=None, ratio=None, sigma_squared=sig_sq, slack=None,
            verdict=PASSED_LAMBDA_I, note="",
        )
    if d_before <= 0.0:
        # started at lambda_i exactly; monotonicity already pinned ra there
        return BoundCheck(
            kind=kv, gamma=gamma, interval_index=i, delta_before=d_before,
            delta_after=d_after, ratio=None, sigma_squared=sig_sq, slack=None,
            verdict=PASSED_LAMBDA_I, note="",
        )
    if d_after is None:
        # ra > lambda_i strictly; monotonicity gives ra <= rb < lambda_{i+1},
        # so the delta is well defined here.
        d_after = (ra - lam_i) / (lam_i1 - ra)
    ratio = d_after / d_before
    slack = sig_sq - ratio
    verdict = HOLDS if ratio <= sig_sq * (1.0 + RATIO_TOL) else VIOLATED
    note = "" if verdict == HOLDS else (
        f"ratio {ratio!r} exceeds sigma^2 {sig_sq!r} beyond tolerance"
    )
    return BoundCheck(
        kind=kv, gamma=gamma, interval_index=i, delta_before=d_before,
        delta_after=d_after, ratio=ratio, sigma_squared=sig_sq, slack=slack,
        verdict=verdict, note=note,
    )
