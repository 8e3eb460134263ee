"""Pencil algebra for symmetric positive definite matrix pairs.

A pencil is a pair ``(A, B)`` of s.p.d. matrices whose generalized
eigenvalues ``A x = lambda B x`` are the target of the gradient
eigensolvers in :mod:`psdlab.iterate`.  The analysis-friendly picture is
the reciprocal one: the congruence of :func:`diagonalize` maps the pair
to ``A = I`` and ``B = diag(mu_1, ..., mu_n)`` with ``mu_i = 1/lambda_i``
in decreasing order, and all solver-internal math happens in those
coordinates.
"""

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from .errors import DegenerateSubspaceError
from .jacobi import jacobi_eigh

__all__ = [
    "SymmetricPencil",
    "Spectrum",
    "RayleighValue",
    "DiagonalForm",
    "RitzPair",
    "rayleigh",
    "residual",
    "diagonalize",
    "rayleigh_ritz",
    "orthonormalize",
    "generate_problem",
]


def _as_dense(m):
    if hasattr(m, "toarray"):  # scipy.sparse at desk scale: densify
        m = m.toarray()
    return np.array(m, dtype=float)


class SymmetricPencil:
    """Matrix pair ``(A, B)``, both symmetric positive definite.

    Symmetry must hold exactly on the stored entries; positivity is
    checked through an attempted Cholesky factorization at construction
    time.  Instances are immutable and safe to share.
    """

    def __init__(self, a, b):
        a = _as_dense(a)
        b = _as_dense(b)
        if a.ndim != 2 or a.shape[0] != a.shape[1]:
            raise ValueError("A must be square")
        if b.shape != a.shape:
            raise ValueError("A and B must have identical shape")
        if not np.array_equal(a, a.T):
            raise ValueError("A is not exactly symmetric as stored")
        if not np.array_equal(b, b.T):
            raise ValueError("B is not exactly symmetric as stored")
        try:
            chol_a = np.linalg.cholesky(a)
        except np.linalg.LinAlgError as exc:
            raise ValueError("A is not positive definite") from exc
        try:
            np.linalg.cholesky(b)
        except np.linalg.LinAlgError as exc:
            raise ValueError("B is not positive definite") from exc
        a.flags.writeable = False
        b.flags.writeable = False
        self._a = a
        self._b = b
        self._chol_a = chol_a
        self._diag_form = None

    @property
    def a(self):
        return self._a

    @property
    def b(self):
        return self._b

    @property
    def n(self):
        return self._a.shape[0]

    def solve_a(self, rhs):
        """Apply the exact inverse of A through its Cholesky factor."""
        y = scipy.linalg.solve_triangular(self._chol_a, rhs, lower=True)
        return scipy.linalg.solve_triangular(self._chol_a.T, y, lower=False)

    def __repr__(self):
        return f"SymmetricPencil(n={self.n})"


@dataclass(frozen=True)
class Spectrum:
    """Generalized eigenvalues of a pencil and their reciprocals.

    ``lambdas`` is nondecreasing, ``mus = 1/lambdas`` nonincreasing; the
    index pairing ``mus[i] * lambdas[i] == 1`` is preserved.
    """

    lambdas: np.ndarray
    mus: np.ndarray = None

    def __post_init__(self):
        lam = np.array(self.lambdas, dtype=float)
        if lam.ndim != 1 or lam.size == 0:
            raise ValueError("lambdas must be a nonempty 1-D sequence")
        if np.any(lam <= 0):
            raise ValueError("all eigenvalues must be positive")
        if np.any(np.diff(lam) < 0):
            raise ValueError("lambdas must be nondecreasing")
        mus = self.mus
        if mus is None:
            mus = 1.0 / lam
        else:
            mus = np.array(mus, dtype=float)
            if mus.shape != lam.shape or np.any(np.abs(mus * lam - 1.0) > 1e-12):
                raise ValueError("mus must be the elementwise reciprocals of lambdas")
        lam.flags.writeable = False
        mus.flags.writeable = False
        object.__setattr__(self, "lambdas", lam)
        object.__setattr__(self, "mus", mus)

    def __len__(self):
        return self.lambdas.size


@dataclass(frozen=True)
class RayleighValue:
    """A Rayleigh quotient in both conventions: ``rho`` and ``mu = 1/rho``."""

    rho: float
    mu: float

    @classmethod
    def from_rho(cls, rho):
        return cls(rho=float(rho), mu=1.0 / float(rho))

    @classmethod
    def from_mu(cls, mu):
        return cls(rho=1.0 / float(mu), mu=float(mu))


@dataclass(frozen=True)
class RitzPair:
    """One Ritz approximation from a projected pencil.

    ``value`` is the Ritz value in the convention named by ``form``
    (``"lambda"`` or ``"mu"``); ``vector`` has unit Euclidean norm;
    ``basis_coefficients`` are the coordinates of ``vector`` in the
    caller's (non-orthonormalized) basis, sign-fixed so that the first
    nonzero coefficient is positive.
    """

    value: float
    form: str
    vector: np.ndarray
    basis_coefficients: np.ndarray

    @property
    def rho(self):
        return self.value if self.form == "lambda" else 1.0 / self.value

    @property
    def mu(self):
        return self.value if self.form == "mu" else 1.0 / self.value


def rayleigh(pencil, x):
    """Rayleigh quotient ``(x, Ax) / (x, Bx)`` of a nonzero vector.

    Returns a :class:`RayleighValue` carrying both ``rho`` and its
    reciprocal ``mu``.  Scale invariant: ``rayleigh(pencil, c*x)`` equals
    ``rayleigh(pencil, x)`` for every ``c != 0``.
    """
    x = np.asarray(x, dtype=float)
    if not np.any(x):
        raise ValueError("Rayleigh quotient of the zero vector is undefined")
    num = float(x @ (pencil.a @ x))
    den = float(x @ (pencil.b @ x))
    return RayleighValue(rho=num / den, mu=den / num)


def residual(pencil, x, value=None, form="lambda"):
    """Eigen-residual of ``x``: ``Ax - rho(x) Bx`` or ``Bx - mu(x) Ax``.

    The ``"mu"`` form is the one used in the diagonalized coordinates
    (where ``A = I`` and the residual is orthogonal to ``x``).
    """
    x = np.asarray(x, dtype=float)
    if value is None:
        value = rayleigh(pencil, x)
    if form == "lambda":
        return pencil.a @ x - value.rho * (pencil.b @ x)
    if form == "mu":
        return pencil.b @ x - value.mu * (pencil.a @ x)
    raise ValueError(f"unknown residual form {form!r}")


@dataclass
class DiagonalForm:
    """Congruence carrying a pencil to ``A = I``, ``B = diag(mus)``.

    ``basis`` maps original coordinates to diagonalized ones
    (``z = basis @ x``); ``inverse_basis`` maps back.  ``mus`` is stored
    in decreasing order, so ``lambdas = 1/mus`` reversed is ascending.
    """

    mus: np.ndarray
    basis: np.ndarray
    inverse_basis: np.ndarray
    _spectrum: Spectrum = field(default=None, repr=False)
    _pencil: SymmetricPencil = field(default=None, repr=False)

    @property
    def n(self):
        return self.mus.size

    def to_diagonal(self, x):
        return self.basis @ np.asarray(x, dtype=float)

    def from_diagonal(self, z):
        return self.inverse_basis @ np.asarray(z, dtype=float)

    def transform_operator(self, t):
        """Conjugate an operator given in pencil coordinates into diagonal ones."""
        m = self.basis @ np.asarray(t, dtype=float) @ self.basis.T
        return (m + m.T) / 2.0

    def untransform_operator(self, t):
        m = self.inverse_basis @ np.asarray(t, dtype=float) @ self.inverse_basis.T
        return (m + m.T) / 2.0

    def spectrum(self):
        if self._spectrum is None:
            self._spectrum = Spectrum(lambdas=1.0 / self.mus)
        return self._spectrum

    def diagonal_pencil(self):
        """The transformed pencil ``(I, diag(mus))`` as a :class:`SymmetricPencil`."""
        if self._pencil is None:
            self._pencil = SymmetricPencil(np.eye(self.n), np.diag(self.mus))
        return self._pencil


def diagonalize(pencil):
    """Compute (and cache on the pencil) its :class:`DiagonalForm`.

    The congruence is the Cholesky factorization ``A = C C^T`` followed by
    an orthogonal diagonalization of ``C^-1 B C^-T``; the reciprocal
    eigenvalues come out in decreasing order.
    """
    if pencil._diag_form is not None:
        return pencil._diag_form
    c = pencil._chol_a
    tmp = scipy.linalg.solve_triangular(c, pencil.b, lower=True)
    bt = scipy.linalg.solve_triangular(c, tmp.T, lower=True)
    bt = (bt + bt.T) / 2.0
    mus, q = jacobi_eigh(bt)
    mus = mus[::-1]
    q = q[:, ::-1]
    # z = Q^T C^T x diagonalizes; x = C^-T Q z maps back.
    basis = q.T @ c.T
    inverse_basis = scipy.linalg.solve_triangular(c.T, q, lower=False)
    form = DiagonalForm(mus=mus, basis=basis, inverse_basis=inverse_basis)
    pencil._diag_form = form
    return form


def orthonormalize(vectors, tol=1e-10):
    """Euclidean orthonormalization by modified Gram-Schmidt.

    One reorthogonalization pass is applied to every column.  A column
    whose post-orthogonalization norm falls below ``tol`` times its
    original norm is declared linearly dependent and raises
    :class:`DegenerateSubspaceError` carrying the detected rank.

    Returns ``(Q, R)`` with ``column_stack(vectors) == Q @ R``.
    """
    v = np.column_stack([np.asarray(col, dtype=float) for col in vectors])
    n, k = v.shape
    q = np.zeros((n, k))
    r = np.zeros((k, k))
    rank = 0
    dependent = []
    for j in range(k):
        w = v[:, j].copy()
        pre = np.linalg.norm(w)
        if pre == 0.0:
            dependent.append(j)
            continue
        for _ in range(2):  # MGS plus one reorthogonalization pass
            for i in range(rank):
                h = q[:, i] @ w
                r[i, j] += h
                w = w - h * q[:, i]
        post = np.linalg.norm(w)
        if post < tol * pre:
            dependent.append(j)
            continue
        r[j, j] = post
        q[:, rank] = w / post
        rank += 1
    if dependent:
        raise DegenerateSubspaceError(
            f"basis is rank deficient: rank {rank} for {k} vectors "
            f"(dependent columns {dependent})",
            rank=rank,
        )
    return q, r


def rayleigh_ritz(pencil, basis_vectors, form="lambda"):
    """Ritz pairs of the pencil over the span of ``basis_vectors``.

    The basis is orthonormalized (Euclidean), the projected pencil is
    reduced through its small Cholesky factor, and the resulting dense
    symmetric eigenproblem is solved by Jacobi rotations.  Pairs are
    returned sorted by ascending ``lambda`` (equivalently descending
    ``mu``), each with unit-norm vector and caller-basis coefficients.
    """
    if form not in ("lambda", "mu"):
        raise ValueError(f"unknown Ritz value form {form!r}")
    q, r = orthonormalize(basis_vectors)
    k = q.shape[1]
    pa = q.T @ (pencil.a @ q)
    pb = q.T @ (pencil.b @ q)
    pa = (pa + pa.T) / 2.0
    pb = (pb + pb.T) / 2.0
    mu_vals, z = _projected_mu_eig(pa, pb, k)

    pairs = []
    for idx in range(k - 1, -1, -1):  # descending mu == ascending lambda
        coeff_orth = z[:, idx]
        vec = q @ coeff_orth
        vec = vec / np.linalg.norm(vec)
        if k == 2:
            raw1 = coeff_orth[1] / r[1, 1]
            raw = np.array([(coeff_orth[0] - r[0, 1] * raw1) / r[0, 0], raw1])
        else:
            raw = scipy.linalg.solve_triangular(r, coeff_orth, lower=False)
        scale = np.max(np.abs(raw))
        raw = raw / scale
        nonzero = np.nonzero(np.abs(raw) > 1e-14)[0]
        if nonzero.size and raw[nonzero[0]] < 0:
            raw = -raw
            vec = -vec
        mu_i = mu_vals[idx]
        value = mu_i if form == "mu" else 1.0 / mu_i
        pairs.append(
            RitzPair(value=float(value), form=form, vector=vec, basis_coefficients=raw)
        )
    return pairs


def _projected_mu_eig(pa, pb, k):
    """Reciprocal-form eigenpairs of the projected pencil ``(pb, pa)``.

    Reduce through the Cholesky factor of ``pa``, solve the symmetric
    problem by Jacobi rotations, and map eigenvectors back to the
    orthonormalized basis.  The two-dimensional case (the line-search
    hot path) is carried out in scalar closed form.
    """
    if k == 2:
        a11, a21, a22 = pa[0, 0], pa[1, 0], pa[1, 1]
        if a11 <= 0.0:
            raise DegenerateSubspaceError(
                "projected A block is numerically singular", rank=1
            )
        l11 = np.sqrt(a11)
        l21 = a21 / l11
        disc = a22 - l21 * l21
        if disc <= 0.0:
            raise DegenerateSubspaceError(
                "projected A block is numerically singular", rank=1
            )
        l22 = np.sqrt(disc)
        inv11 = 1.0 / l11
        inv21 = -l21 / (l11 * l22)
        inv22 = 1.0 / l22
        b11, b12, b22 = pb[0, 0], pb[0, 1], pb[1, 1]
        t11 = inv11 * b11
        t12 = inv11 * b12
        t21 = inv21 * b11 + inv22 * b12
        t22 = inv21 * b12 + inv22 * b22
        m11 = t11 * inv11
        m12 = t11 * inv21 + t12 * inv22
        m22 = t21 * inv21 + t22 * inv22
        mu_vals, y = jacobi_eigh(np.array([[m11, m12], [m12, m22]]))
        z = np.array([
            [inv11 * y[0, 0] + inv21 * y[1, 0], inv11 * y[0, 1] + inv21 * y[1, 1]],
            [inv22 * y[1, 0], inv22 * y[1, 1]],
        ])
        return mu_vals, z
    try:
        l = np.linalg.cholesky(pa)
    except np.linalg.LinAlgError as exc:  # cannot happen for s.p.d. A and full rank
        raise DegenerateSubspaceError(
            "projected A block is numerically singular", rank=k - 1
        ) from exc
    tmp = scipy.linalg.solve_triangular(l, pb, lower=True)
    m = scipy.linalg.solve_triangular(l, tmp.T, lower=True)
    m = (m + m.T) / 2.0
    mu_vals, y = jacobi_eigh(m)  # ascending in mu
    z = scipy.linalg.solve_triangular(l.T, y, lower=False)
    return mu_vals, z


# -- test problem generation -------------------------------------------------


def _laplacian_1d(n, h):
    main = np.full(n, 2.0)
    off = np.full(n - 1, -1.0)
    a = np.diag(main) + np.diag(off, 1) + np.diag(off, -1)
    return a / (h * h)


def _mass_1d(n, h):
    main = np.full(n, 4.0)
    off = np.full(n - 1, 1.0)
    return (np.diag(main) + np.diag(off, 1) + np.diag(off, -1)) * (h / 6.0)


def generate_problem(kind, **params):
    """Construct a test pencil.

    Parameters
    ----------
    kind : {"diagonal", "laplacian1d", "laplacian2d", "matrix_market"}
        ``diagonal``: ``A = diag(lambdas)``, ``B = I`` (needs
        ``lambdas``, at least three values).
        ``laplacian1d``: second-difference stiffness matrix on ``n``
        interior points of a unit-spaced grid scaled by ``1/h**2``;
        ``mass`` selects ``B``: ``"identity"`` or the ``"fem"``
        tridiagonal ``(h/6) tridiag(1, 4, 1)``.
        ``laplacian2d``: five-point stencil on an ``nx`` by ``ny``
        interior grid; ``mass="fem"`` is the tensor-product mass matrix.
        ``matrix_market``: read ``path_a`` (and optionally ``path_b``)
        in real symmetric coordinate format; ``B = I`` if no
        ``path_b``.
    """
    if kind == "diagonal":
        lambdas = np.asarray(params["lambdas"], dtype=float)
        if lambdas.size < 3:
            raise ValueError("diagonal problems need at least 3 eigenvalues")
        if np.any(lambdas <= 0):
            raise ValueError("diagonal entries must be positive")
        return SymmetricPencil(np.diag(lambdas), np.eye(lambdas.size))

    if kind == "laplacian1d":
        n = int(params["n"])
        h = float(params.get("h", 1.0))
        if n < 2:
            raise ValueError("laplacian1d needs n >= 2")
        a = _laplacian_1d(n, h)
        mass = params.get("mass", "identity")
        if mass == "identity":
            b = np.eye(n)
        elif mass == "fem":
            b = _mass_1d(n, h)
        else:
            raise ValueError(f"unknown mass kind {mass!r}")
        return SymmetricPencil(a, b)

    if kind == "laplacian2d":
        nx = int(params["nx"])
        ny = int(params.get("ny", nx))
        h = float(params.get("h", 1.0))
        if nx < 2 or ny < 2:
            raise ValueError("laplacian2d needs nx, ny >= 2")
        tx = _laplacian_1d(nx, h)
        ty = _laplacian_1d(ny, h)
        a = np.kron(np.eye(ny), tx) + np.kron(ty, np.eye(nx))
        mass = params.get("mass", "identity")
        if mass == "identity":
            b = np.eye(nx * ny)
        elif mass == "fem":
            b = np.kron(_mass_1d(ny, h), _mass_1d(nx, h))
        else:
            raise ValueError(f"unknown mass kind {mass!r}")
        return SymmetricPencil(a, b)

    if kind == "matrix_market":
        from . import mmio

        a = mmio.read_matrix(params["path_a"])
        path_b = params.get("path_b")
        b = mmio.read_matrix(path_b) if path_b else np.eye(a.shape[0])
        return SymmetricPencil(a, b)

    raise ValueError(f"unknown problem kind {kind!r}")
