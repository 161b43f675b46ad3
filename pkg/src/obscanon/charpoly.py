"""Characteristic polynomials and the generalized Fibonacci sequence.

Polynomials are monic and stored by their lower coefficients in ascending
power order: ``coeffs[k]`` multiplies ``s**k`` in

    s**n + a[n-1] s**(n-1) + ... + a[1] s + a[0].
"""

from dataclasses import dataclass

import numpy as np

from .densemat import determinant
from .errors import ConjugacyError, NumericOverflowError, ShapeError


@dataclass(frozen=True, eq=False)
class MonicPoly:
    coeffs: np.ndarray

    def __post_init__(self):
        c = np.array(self.coeffs, dtype=np.float64).reshape(-1)
        if c.size < 1:
            raise ValueError("a monic polynomial needs degree >= 1")
        if not np.all(np.isfinite(c)):
            raise NumericOverflowError("polynomial coefficients are not finite")
        c.setflags(write=False)
        object.__setattr__(self, "coeffs", c)

    @property
    def degree(self):
        return self.coeffs.size

    def __eq__(self, other):
        if not isinstance(other, MonicPoly):
            return NotImplemented
        return np.array_equal(self.coeffs, other.coeffs)

    def __hash__(self):
        return hash(self.coeffs.tobytes())

    def __repr__(self):
        return f"MonicPoly({self.coeffs.tolist()})"

    def full(self):
        """All n+1 coefficients, ascending, ending with the leading 1."""
        return np.append(self.coeffs, 1.0)

    def __call__(self, s):
        return np.polynomial.polynomial.polyval(s, self.full())


@dataclass(frozen=True, eq=False)
class FibSequence:
    """Values F_0 .. F_{n-1} generated from a monic polynomial."""

    values: np.ndarray
    source: MonicPoly


def companion_matrix(p):
    """Companion matrix with unit superdiagonal and ``-a`` along the last row."""
    n = p.degree
    a = np.diag(np.ones(n - 1), 1)
    a[-1, :] = -p.coeffs
    return a


def _companion_coeffs(a):
    """Read coefficients off an exactly structured companion matrix, else None.

    Both the bottom-row and first-column layouts are recognized.
    """
    n = a.shape[0]
    shift = np.diag(np.ones(n - 1), 1)
    bottom = shift.copy()
    bottom[-1, :] = a[-1, :]
    if np.array_equal(a, bottom):
        return -a[-1, :]
    first = shift.copy()
    first[:, 0] = a[:, 0]
    if n > 1 and np.array_equal(a, first):
        return -a[::-1, 0]
    return None


def hessenberg_reduce(a):
    """Orthogonally similar upper Hessenberg form via Householder reflections."""
    h = np.array(a, dtype=np.float64)
    n = h.shape[0]
    for k in range(n - 2):
        x = h[k + 1:, k]
        alpha = np.linalg.norm(x)
        if alpha == 0.0 or np.all(x[1:] == 0.0):
            continue
        v = x.copy()
        v[0] += np.copysign(alpha, x[0])
        v /= np.linalg.norm(v)
        h[k + 1:, :] -= 2.0 * np.outer(v, v @ h[k + 1:, :])
        h[:, k + 1:] -= 2.0 * np.outer(h[:, k + 1:] @ v, v)
        h[k + 2:, k] = 0.0
    return h


def _la_budde(h):
    """Characteristic polynomial of an upper Hessenberg matrix.

    Builds the polynomials of the leading principal submatrices; returns
    all n+1 ascending coefficients.
    """
    n = h.shape[0]
    polys = [np.array([1.0])]
    for i in range(n):
        p = np.zeros(i + 2)
        p[1:] += polys[i]
        p[:-1] -= h[i, i] * polys[i]
        beta = 1.0
        for m in range(1, i + 1):
            beta *= h[i - m + 1, i - m]
            term = h[i - m, i] * beta * polys[i - m]
            p[:term.size] -= term
        polys.append(p)
    return polys[n]


def _faddeev_leverrier(a):
    n = a.shape[0]
    coeffs = np.zeros(n)
    m = np.zeros_like(a)
    c_prev = 1.0
    eye = np.eye(n)
    for k in range(1, n + 1):
        m = a @ m + c_prev * eye
        c_prev = -np.trace(a @ m) / k
        coeffs[n - k] = c_prev
    return coeffs


def char_poly(a, method="hessenberg", exploit_structure=True):
    """Coefficients of ``det(sI - a)``.

    ``method="hessenberg"`` (default) reduces ``a`` to Hessenberg form by
    Householder similarity and runs La Budde's recurrence.
    ``method="faddeev-leverrier"`` uses the trace recurrence instead; it is
    exact on small integer matrices but loses digits on large-norm,
    strongly non-normal inputs.

    Matrices that are exactly in a companion layout have their coefficients
    read off directly when ``exploit_structure`` is set, which makes the
    companion/char_poly round trip exact.
    """
    a = np.asarray(a, dtype=np.float64)
    if a.ndim != 2 or a.shape[0] != a.shape[1] or a.shape[0] < 1:
        raise ShapeError(f"char_poly needs a square matrix, got shape {a.shape}")
    if exploit_structure:
        c = _companion_coeffs(a)
        if c is not None:
            return MonicPoly(c)
    with np.errstate(over="ignore", invalid="ignore"):
        if method == "hessenberg":
            coeffs = _la_budde(hessenberg_reduce(a))[:-1]
        elif method == "faddeev-leverrier":
            coeffs = _faddeev_leverrier(a)
        else:
            raise ValueError(f"unknown method {method!r}")
    if not np.all(np.isfinite(coeffs)):
        raise NumericOverflowError("characteristic polynomial overflowed")
    return MonicPoly(coeffs)


def poly_from_roots(roots, tol=1e-12):
    """Monic polynomial with the given roots.

    Complex roots must come in conjugate pairs; each pair is folded into a
    real quadratic factor so the arithmetic stays real.
    """
    roots = [complex(r) for r in roots]
    if not roots:
        raise ValueError("need at least one root")
    poly = np.array([1.0])
    pending = []
    for r in roots:
        if abs(r.imag) <= tol * max(1.0, abs(r)):
            poly = np.convolve(poly, [-r.real, 1.0])
        else:
            pending.append(r)
    while pending:
        r = pending.pop(0)
        for idx, q in enumerate(pending):
            if abs(q - r.conjugate()) <= tol * max(1.0, abs(r)):
                del pending[idx]
                break
        else:
            raise ConjugacyError(f"complex root {r} has no conjugate partner")
        poly = np.convolve(poly, [abs(r) ** 2, -2.0 * r.real, 1.0])
    return MonicPoly(poly[:-1])


def fibonacci_sequence(p):
    """F_0 = 1 and F_k = sum_{i=1..k} -a[n-i] F_{k-i} for k < n."""
    n = p.degree
    a = p.coeffs
    f = np.zeros(n)
    f[0] = 1.0
    for k in range(1, n):
        f[k] = -sum(a[n - i] * f[k - i] for i in range(1, k + 1))
    return FibSequence(values=f, source=p)


def hessenberg_matrix(p, k, negate=False):
    """k×k lower Hessenberg matrix built from the top coefficients of ``p``.

    Entry (i, j) with j <= i is ``a[n-1-(i-j)]``; the superdiagonal is -1.
    So the first row reads ``(a[n-1], -1, 0, ...)`` and the last row
    ``(a[n-k], a[n-k+1], ..., a[n-1])``.  ``negate`` flips the sign of the
    coefficient entries but leaves the superdiagonal alone.
    """
    n = p.degree
    if not 1 <= k <= n - 1:
        raise IndexError(f"k must lie in 1..{n - 1}, got {k}")
    a = -p.coeffs if negate else p.coeffs
    h = np.diag(-np.ones(k - 1), 1)
    for i in range(k):
        for j in range(i + 1):
            h[i, j] = a[n - 1 - (i - j)]
    return h


# Candidate readings of "F_k = det(H_k)", in reporting priority order.
CONVENTIONS = ("as-printed", "negated-coefficients", "alternating-sign")


@dataclass(frozen=True)
class HessenbergCheck:
    det: float
    fk: float
    matches_fk: bool  # |det| == |F_k| within rel_tol
    sign: int | None  # F_k / det when the magnitudes agree
    conventions: tuple  # every candidate reading that reproduces F_k
    convention: str | None  # first entry of ``conventions``


def _close(x, y, rel_tol):
    scale = max(abs(x), abs(y))
    return abs(x - y) <= rel_tol * scale if scale > 0 else True


def hessenberg_det_check(p, k, rel_tol=1e-9):
    """Compare ``det(H_k)`` with the recursively computed ``F_k``.

    The recursion is authoritative.  Besides the plain magnitude test, each
    reading in :data:`CONVENTIONS` is evaluated and the ones that reproduce
    ``F_k`` exactly (to ``rel_tol``) are reported.
    """
    fk = float(fibonacci_sequence(p).values[k])
    det = determinant(hessenberg_matrix(p, k))
    matches = _close(abs(det), abs(fk), rel_tol)
    sign = None
    if matches:
        sign = -1 if (det != 0 and fk != 0 and np.sign(det) != np.sign(fk)) else 1
    candidates = {
        "as-printed": det,
        "negated-coefficients": determinant(hessenberg_matrix(p, k, negate=True)),
        "alternating-sign": (-1) ** k * det,
    }
    found = tuple(c for c in CONVENTIONS if _close(candidates[c], fk, rel_tol))
    return HessenbergCheck(
        det=det, fk=fk, matches_fk=matches, sign=sign, conventions=found,
        convention=found[0] if found else None,
    )
