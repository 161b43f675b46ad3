"""Small dense real-matrix toolkit.

Matrices are plain ``numpy.ndarray`` objects of dtype float64 and two
dimensions.  The factorizations here are written out by hand rather than
delegated to LAPACK so that the singularity threshold and pivot reporting
are under our control.
"""

from dataclasses import dataclass

import numpy as np

from .errors import NumericOverflowError, ShapeError, SingularMatrixError

EPS = np.finfo(np.float64).eps


def as_matrix(x, name="matrix"):
    """Coerce ``x`` to a finite 2-D float64 array (a copy)."""
    a = np.array(x, dtype=np.float64)
    if a.ndim != 2 or a.shape[0] < 1 or a.shape[1] < 1:
        raise ShapeError(f"{name} must be a non-empty 2-D array, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ValueError(f"{name} has non-finite entries")
    return a


def row(v):
    """Return ``v`` as a 1×n matrix."""
    return as_matrix(np.asarray(v, dtype=np.float64).reshape(1, -1))


def col(v):
    """Return ``v`` as an n×1 matrix."""
    return as_matrix(np.asarray(v, dtype=np.float64).reshape(-1, 1))


def max_abs(a):
    return float(np.max(np.abs(a))) if np.size(a) else 0.0


def _require_square(a, op):
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ShapeError(f"{op} needs a square matrix, got shape {a.shape}")


def default_tolerance(a):
    """Scale-invariant threshold ``n * eps * max|a_ij|``."""
    return max(a.shape) * EPS * max_abs(a)


def matmul(a, b):
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.ndim != 2 or b.ndim != 2 or a.shape[1] != b.shape[0]:
        raise ShapeError(f"cannot multiply {a.shape} by {b.shape}")
    out = a @ b
    if not np.all(np.isfinite(out)):
        raise NumericOverflowError("matrix product overflowed")
    return out


@dataclass(frozen=True)
class LuFactors:
    """Result of :func:`lu_decompose`.

    ``lu`` holds the unit lower factor below the diagonal and the upper
    factor on and above it, so that ``a[perm] == L @ U``.
    """

    lu: np.ndarray
    perm: np.ndarray
    parity: int
    singular: bool
    pivot_index: int | None = None  # first pivot that fell below threshold

    @property
    def L(self):
        n = self.lu.shape[0]
        return np.tril(self.lu, -1) + np.eye(n)

    @property
    def U(self):
        return np.triu(self.lu)

    @property
    def P(self):
        """Permutation matrix with ``P @ a == L @ U``."""
        return np.eye(self.lu.shape[0])[self.perm]


def lu_decompose(a):
    """LU factorization with partial (row) pivoting."""
    a = np.array(a, dtype=np.float64)
    _require_square(a, "lu_decompose")
    n = a.shape[0]
    thresh = default_tolerance(a)
    perm = np.arange(n)
    parity = 1
    bad = None
    for k in range(n):
        p = k + int(np.argmax(np.abs(a[k:, k])))
        if p != k:
            a[[k, p]] = a[[p, k]]
            perm[[k, p]] = perm[[p, k]]
            parity = -parity
        piv = a[k, k]
        if abs(piv) <= thresh:
            if bad is None:
                bad = k
            if piv == 0.0:
                continue
        a[k + 1:, k] /= piv
        a[k + 1:, k + 1:] -= np.outer(a[k + 1:, k], a[k, k + 1:])
    return LuFactors(lu=a, perm=perm, parity=parity, singular=bad is not None,
                     pivot_index=bad)


def lu_solve(f, b):
    """Solve ``a x = b`` given ``f = lu_decompose(a)``; ``b`` may be a matrix."""
    if f.singular:
        raise SingularMatrixError(f.pivot_index)
    lu = f.lu
    n = lu.shape[0]
    x = np.array(b, dtype=np.float64)[f.perm]
    for i in range(n):
        x[i] -= lu[i, :i] @ x[:i]
    for i in range(n - 1, -1, -1):
        x[i] = (x[i] - lu[i, i + 1:] @ x[i + 1:]) / lu[i, i]
    return x


def inverse(a):
    a = np.asarray(a, dtype=np.float64)
    _require_square(a, "inverse")
    return lu_solve(lu_decompose(a), np.eye(a.shape[0]))


def determinant(a):
    a = np.asarray(a, dtype=np.float64)
    _require_square(a, "determinant")
    f = lu_decompose(a)
    if f.singular:
        return 0.0
    return float(f.parity * np.prod(np.diag(f.lu)))


def rank_with_tolerance(a, tol=0.0):
    """Numerical rank by Gaussian elimination with complete pivoting.

    Counts pivots whose magnitude exceeds ``tol``.  ``tol == 0`` selects
    :func:`default_tolerance`.
    """
    if tol < 0:
        raise ValueError("tol must be non-negative")
    a = np.array(a, dtype=np.float64)
    if a.ndim != 2:
        raise ShapeError(f"rank needs a 2-D array, got shape {a.shape}")
    if tol == 0:
        tol = default_tolerance(a)
    m, n = a.shape
    r = 0
    for k in range(min(m, n)):
        sub = np.abs(a[k:, k:])
        i, j = np.unravel_index(int(np.argmax(sub)), sub.shape)
        if sub[i, j] <= tol:
            break
        i += k
        j += k
        a[[k, i]] = a[[i, k]]
        a[:, [k, j]] = a[:, [j, k]]
        a[k + 1:, k] /= a[k, k]
        a[k + 1:, k + 1:] -= np.outer(a[k + 1:, k], a[k, k + 1:])
        r += 1
    return r
