"""The four gradient eigensolver iterations and the stepping driver.

All four solvers move from ``x`` along the preconditioned residual
``T (Ax - rho(x) Bx)``.  The fixed-step kinds subtract it outright; the
steepest-descent kinds Rayleigh-Ritz the two-dimensional span of ``x``
and the search direction, which performs the optimal line search
implicitly.  INVIT(1) and INVIT(2) are the same iterations with the
exact inverse ``T = A^-1`` (quality ``gamma = 0``).
"""

import enum
import math
from dataclasses import dataclass

import numpy as np

from . import bounds
from .errors import DegenerateSubspaceError, NumericFailure
from .pencil import (
    RayleighValue,
    diagonalize,
    rayleigh,
    rayleigh_ritz,
)
from .precond import Preconditioner, synthetic_gamma_preconditioner

__all__ = [
    "SolverKind",
    "StepResult",
    "IterationRecord",
    "RunResult",
    "pinvit1_step",
    "psd_step",
    "invit1_step",
    "invit2_step",
    "run",
]

# An iterate counts as converged once its residual is this small
# relative to ||Ax||.
_EIGENVECTOR_TOL = 1e-13

# A search direction shorter than this relative to ||x|| cannot span a
# second dimension in floating point.
_DEGENERATE_DIRECTION_TOL = 1e-14


class SolverKind(enum.Enum):
    INVIT1 = "invit1"
    PINVIT1 = "pinvit1"
    INVIT2 = "invit2"
    PSD = "psd"

    @classmethod
    def parse(cls, name):
        try:
            return cls(str(name).lower())
        except ValueError:
            raise ValueError(f"unknown solver kind {name!r}") from None


@dataclass(frozen=True)
class StepResult:
    """Outcome of a single solver step.

    ``converged`` is set when the input was already (numerically) an
    eigenvector or the search subspace degenerated; the iterate is then
    returned unchanged (up to normalization).
    """

    x: np.ndarray
    rho: RayleighValue
    theta_opt: float = None
    converged: bool = False


def _unit(x):
    return x / np.linalg.norm(x)


def _apply(precond, r):
    if precond is None:
        return r
    if isinstance(precond, Preconditioner):
        return precond.apply(r)
    return np.asarray(precond, dtype=float) @ r


def _converged_result(x, value):
    return StepResult(x=_unit(x), rho=value, theta_opt=None, converged=True)


def pinvit1_step(pencil, precond, x):
    """One fixed-step update ``x' = x - T (Ax - rho(x) Bx)``, normalized."""
    x = np.asarray(x, dtype=float)
    value = rayleigh(pencil, x)
    ax = pencil.a @ x
    r = ax - value.rho * (pencil.b @ x)
    if np.linalg.norm(r) < _EIGENVECTOR_TOL * np.linalg.norm(ax):
        return _converged_result(x, value)
    x_next = _unit(x - _apply(precond, r))
    return StepResult(x=x_next, rho=rayleigh(pencil, x_next), theta_opt=1.0)


def psd_step(pencil, precond, x):
    """One preconditioned steepest descent step.

    Rayleigh-Ritz on ``span{x, T r}`` returns the Ritz vector of the
    smaller Ritz value (in the ``lambda`` convention); the implicit step
    length is recovered from the Ritz vector's coordinates in the
    ``[x, Tr]`` basis and reported as ``theta_opt`` (``inf`` when the
    ``x`` coordinate vanishes).
    """
    x = np.asarray(x, dtype=float)
    value = rayleigh(pencil, x)
    ax = pencil.a @ x
    r = ax - value.rho * (pencil.b @ x)
    if np.linalg.norm(r) < _EIGENVECTOR_TOL * np.linalg.norm(ax):
        return _converged_result(x, value)
    d = _apply(precond, r)
    if np.linalg.norm(d) < _DEGENERATE_DIRECTION_TOL * np.linalg.norm(x):
        return _converged_result(x, value)
    try:
        pairs = rayleigh_ritz(pencil, [x, d])
    except DegenerateSubspaceError:
        # T r parallel to x: stationary for the line search.
        return _converged_result(x, value)
    best = pairs[0]  # smallest lambda-form Ritz value
    c_x, c_d = best.basis_coefficients
    if abs(c_x) < 1e-14 * max(abs(c_x), abs(c_d)):
        theta = math.inf
    else:
        theta = -c_d / c_x
    return StepResult(
        x=best.vector,
        rho=RayleighValue.from_rho(best.value),
        theta_opt=theta,
    )


def invit1_step(pencil, x):
    """Fixed-step update with the exact inverse: ``x' = rho(x) A^-1 B x``."""
    x = np.asarray(x, dtype=float)
    value = rayleigh(pencil, x)
    ax = pencil.a @ x
    r = ax - value.rho * (pencil.b @ x)
    if np.linalg.norm(r) < _EIGENVECTOR_TOL * np.linalg.norm(ax):
        return _converged_result(x, value)
    x_next = _unit(x - pencil.solve_a(r))
    return StepResult(x=x_next, rho=rayleigh(pencil, x_next), theta_opt=1.0)


def invit2_step(pencil, x):
    """Steepest descent with the exact inverse (optimal line search)."""
    x = np.asarray(x, dtype=float)
    value = rayleigh(pencil, x)
    ax = pencil.a @ x
    r = ax - value.rho * (pencil.b @ x)
    if np.linalg.norm(r) < _EIGENVECTOR_TOL * np.linalg.norm(ax):
        return _converged_result(x, value)
    d = pencil.solve_a(r)
    try:
        pairs = rayleigh_ritz(pencil, [x, d])
    except DegenerateSubspaceError:
        return _converged_result(x, value)
    best = pairs[0]
    c_x, c_d = best.basis_coefficients
    theta = math.inf if abs(c_x) < 1e-14 * max(abs(c_x), abs(c_d)) else -c_d / c_x
    return StepResult(x=best.vector, rho=RayleighValue.from_rho(best.value), theta_opt=theta)


@dataclass(frozen=True)
class IterationRecord:
    """One row of a solver run.

    ``x`` is reported in the pencil's original coordinates but
    normalized in the transformed ones; ``residual_norm`` is the
    transformed-coordinate residual of the unit iterate, so the
    stopping test ``residual_norm < residual_tol`` is relative to
    ``||Ax||``.  ``delta`` is the interval-relative error of ``rho``
    against the pencil's spectrum (``None`` outside the spectral
    range), and ``bound`` the certification verdict for the step that
    produced this record (``None`` for the initial record or when
    certification is off).
    """

    step_index: int
    x: np.ndarray
    rho: RayleighValue
    residual_norm: float
    delta: float = None
    bound: bounds.BoundCheck = None
    theta_opt: float = None


@dataclass
class RunResult:
    """Records of one run plus its termination status.

    ``status`` is one of ``"converged"`` (residual or delta tolerance
    met, or a stationary point was reached) and ``"max_steps"``.
    ``certified`` tells whether per-step bound checks ran;
    ``certify_note`` explains when they were skipped.
    """

    records: list
    status: str
    kind: SolverKind
    certified: bool
    certify_gamma: float = None
    certify_note: str = ""

    @property
    def final(self):
        return self.records[-1]

    def violations(self):
        return [
            rec for rec in self.records
            if rec.bound is not None and rec.bound.verdict == bounds.VIOLATED
        ]


def _mu_delta(mus, z, i):
    """Interval-relative error of ``z`` on interval ``i``, cancellation free.

    Evaluated in the diagonalized coordinates from per-eigenvalue
    distances (``mus`` descending pairs with ascending ``lambdas`` by
    index), so the result keeps full relative accuracy even when the
    iterate is within roundoff of an eigenvector.  May come out at or
    below zero when the value sits at ``lambda_i`` (reciprocal-form
    ``mus[i]``) or beyond.
    """
    w = z * z
    p = float((mus[i] - mus) @ w)
    q = float((mus - mus[i + 1]) @ w)
    return p / q


def _delta_or_none(spectrum, mus, z, rho):
    lam = spectrum.lambdas
    if rho >= lam[-1]:
        return None
    if rho <= lam[0]:
        return 0.0
    i = bounds.locate_interval(spectrum, rho)
    # lambda-form delta differs from the reciprocal form by lam_i/lam_{i+1}
    return max(0.0, _mu_delta(mus, z, i) * lam[i] / lam[i + 1])


def _certification_gamma(kind, quality):
    """The gamma a certified run must use, or (None, reason) when it cannot.

    The steepest-descent bound is scaling invariant, so it always uses
    the rescaled-form gamma.  The fixed-step bound needs the two-sided
    quality of the preconditioner *as handed over*; if that exceeds 1
    the run is not certifiable and the check is skipped rather than
    reported as a violation.
    """
    if kind in (SolverKind.INVIT1, SolverKind.INVIT2):
        return 0.0, ""
    if quality is None:
        return None, "preconditioner quality unknown"
    if kind == SolverKind.PSD:
        gamma = quality.scaled_gamma()
        if gamma is None:
            return None, "preconditioner quality unknown"
        return gamma, ""
    gamma = quality.as_is_gamma()
    if gamma is None:
        return None, "preconditioner quality unknown"
    if gamma >= 1.0:
        return None, (
            f"fixed-step quality mismatch: as-handed gamma {gamma:.6g} >= 1 "
            "(rescale the preconditioner)"
        )
    return gamma, ""


def run(pencil, precond, x0, kind, *, max_steps=500, residual_tol=1e-10,
        delta_tol=None, certify=True):
    """Drive a solver to convergence, recording and certifying every step.

    All internal math happens in the diagonalized coordinates of the
    pencil; reported iterates are mapped back.  The run stops when the
    (relative) residual falls below ``residual_tol``, when ``delta``
    falls below ``delta_tol`` (if given), at a stationary point, or
    after ``max_steps`` steps.  The Rayleigh quotient is asserted to be
    nonincreasing; a genuine increase raises :class:`NumericFailure`.
    """
    kind = SolverKind.parse(kind) if not isinstance(kind, SolverKind) else kind
    x0 = np.asarray(x0, dtype=float)
    if not np.any(x0):
        raise ValueError("x0 must be nonzero")
    form = diagonalize(pencil)
    spectrum = form.spectrum()
    mu_pencil = form.diagonal_pencil()

    if kind in (SolverKind.INVIT1, SolverKind.INVIT2):
        # Exact inverse preconditioning is the identity in these coordinates.
        t = synthetic_gamma_preconditioner(form, 0.0, seed=0, mode="identity")
        quality = t.quality
    else:
        if precond is None:
            raise ValueError(f"{kind.value} needs a preconditioner")
        t = precond.in_coords("diagonal", form)
        quality = t.quality
    cert_gamma, cert_note = _certification_gamma(kind, quality)
    certifying = certify and cert_gamma is not None

    fixed_step = kind in (SolverKind.INVIT1, SolverKind.PINVIT1)
    cert_kind = "pinvit1" if fixed_step else "psd"
    # The line-search kinds decrease rho structurally; the fixed-step kinds
    # only under an admissible (two-sided) preconditioner quality.
    monotone_guaranteed = not fixed_step or cert_gamma is not None

    mus = form.mus
    z = _unit(form.to_diagonal(x0))
    value = rayleigh(mu_pencil, z)
    res_norm = float(np.linalg.norm(z - value.rho * (mu_pencil.b @ z)))
    records = [
        IterationRecord(
            step_index=0,
            x=form.from_diagonal(z),
            rho=value,
            residual_norm=res_norm,
            delta=_delta_or_none(spectrum, mus, z, value.rho),
        )
    ]
    status = "max_steps"
    if res_norm < residual_tol:
        status = "converged"
        max_steps = 0

    for step_index in range(1, max_steps + 1):
        step = pinvit1_step(mu_pencil, t, z) if fixed_step else psd_step(mu_pencil, t, z)
        rho_prev = value
        z_prev = z
        z, value = step.x, step.rho
        if not math.isfinite(value.rho):
            raise NumericFailure(
                f"step {step_index} produced a non-finite Rayleigh quotient "
                f"({value.rho!r}); aborting"
            )
        if monotone_guaranteed and value.rho > rho_prev.rho * (1.0 + 1e-12):
            raise NumericFailure(
                f"step {step_index} increased the Rayleigh quotient from "
                f"{rho_prev.rho!r} to {value.rho!r}"
            )
        bound = None
        if certifying and not step.converged and rho_prev.rho < spectrum.lambdas[-1]:
            i = bounds.locate_interval(spectrum, rho_prev.rho)
            bound = bounds.certify_step(
                spectrum, cert_gamma, rho_prev, value, kind=cert_kind,
                deltas=(_mu_delta(mus, z_prev, i), _mu_delta(mus, z, i)),
            )
        res_norm = float(np.linalg.norm(z - value.rho * (mu_pencil.b @ z)))
        delta_now = _delta_or_none(spectrum, mus, z, value.rho)
        records.append(
            IterationRecord(
                step_index=step_index,
                x=form.from_diagonal(z),
                rho=value,
                residual_norm=res_norm,
                delta=delta_now,
                bound=bound,
                theta_opt=step.theta_opt,
            )
        )
        if step.converged or res_norm < residual_tol:
            status = "converged"
            break
        if delta_tol is not None and delta_now is not None and delta_now < delta_tol:
            status = "converged"
            break

    return RunResult(
        records=records,
        status=status,
        kind=kind,
        certified=certifying,
        certify_gamma=cert_gamma,
        certify_note=cert_note,
    )
