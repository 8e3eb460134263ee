"""Cyclic Jacobi eigensolver for small dense symmetric matrices.

All projected eigenproblems in this package are tiny (a handful of basis
vectors) or at most desk scale (a few hundred rows), where cyclic Jacobi
is backward stable and keeps the package free of LAPACK-specific
behavior.  The public signature mirrors ``numpy.linalg.eigh``.
"""

import numpy as np

from .errors import NumericFailure

# Sweeps stop once the off-diagonal Frobenius norm drops below this
# multiple of the Frobenius norm of the input.
OFF_DIAGONAL_TOL = 1e-14

_MAX_SWEEPS = 60


def jacobi_eigh(m):
    """Eigenvalues and eigenvectors of a symmetric matrix by cyclic Jacobi rotations.

    Parameters
    ----------
    m : (n, n) array_like
        Symmetric matrix.  Only the symmetric part is meaningful; the
        routine does not symmetrize its input.

    Returns
    -------
    w : (n,) ndarray
        Eigenvalues in ascending order.
    v : (n, n) ndarray
        Orthonormal eigenvectors, ``v[:, k]`` belonging to ``w[k]``.
    """
    a = np.array(m, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError("expected a square matrix")
    n = a.shape[0]
    if n == 1:
        return a[0, :1].copy(), np.eye(1)
    if n == 2:
        return _eigh_2x2(a[0, 0], a[1, 1], a[0, 1])
    v = np.eye(n)

    norm_f = np.linalg.norm(a, "fro")
    if norm_f == 0.0:
        return np.zeros(n), v
    off_tol = OFF_DIAGONAL_TOL * norm_f
    # Rotations on entries already far below the stopping threshold cannot
    # change the outcome; skipping them keeps diagonal inputs O(n^2).
    skip_tol = off_tol / (2.0 * n)

    for _ in range(_MAX_SWEEPS):
        off = np.sqrt(2.0 * np.sum(np.triu(a, 1) ** 2))
        if off <= off_tol:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                if abs(apq) <= skip_tol:
                    continue
                tau = (a[q, q] - a[p, p]) / (2.0 * apq)
                if tau >= 0.0:
                    t = 1.0 / (tau + np.sqrt(1.0 + tau * tau))
                else:
                    t = -1.0 / (-tau + np.sqrt(1.0 + tau * tau))
                c = 1.0 / np.sqrt(1.0 + t * t)
                s = t * c

                ap = a[:, p].copy()
                aq = a[:, q].copy()
                a[:, p] = c * ap - s * aq
                a[:, q] = s * ap + c * aq
                ap = a[p, :].copy()
                aq = a[q, :].copy()
                a[p, :] = c * ap - s * aq
                a[q, :] = s * ap + c * aq
                a[p, q] = 0.0
                a[q, p] = 0.0

                vp = v[:, p].copy()
                vq = v[:, q].copy()
                v[:, p] = c * vp - s * vq
                v[:, q] = s * vp + c * vq
    else:
        raise NumericFailure(
            f"Jacobi sweeps did not converge within {_MAX_SWEEPS} sweeps "
            f"(off-diagonal norm {off:.3e}, tolerance {off_tol:.3e})"
        )

    w = np.diag(a).copy()
    order = np.argsort(w, kind="stable")
    return w[order], v[:, order]


def _eigh_2x2(a11, a22, a12):
    """The two-dimensional case: a single Jacobi rotation, in closed form."""
    if a12 == 0.0:
        if a11 <= a22:
            return np.array([a11, a22]), np.eye(2)
        return np.array([a22, a11]), np.array([[0.0, 1.0], [1.0, 0.0]])
    tau = (a22 - a11) / (2.0 * a12)
    if tau >= 0.0:
        t = 1.0 / (tau + np.sqrt(1.0 + tau * tau))
    else:
        t = -1.0 / (-tau + np.sqrt(1.0 + tau * tau))
    c = 1.0 / np.sqrt(1.0 + t * t)
    s = t * c
    w1 = a11 - t * a12
    w2 = a22 + t * a12
    if w1 <= w2:
        return np.array([w1, w2]), np.array([[c, s], [-s, c]])
    return np.array([w2, w1]), np.array([[s, c], [c, -s]])
