"""Observability and observer realizations of single-output LTI systems.

Two routes lead from the observability companion form to the observer
companion form:

* the direct route, one unit lower-triangular Toeplitz change of basis
  ``P`` whose inverse is filled with generalized Fibonacci values;
* the step route, ``n - 1`` elementary factors ``P_1 .. P_{n-1}``, each
  touching a single column, applied one after the other.

Index convention: ``build_P_step(p, i)`` uses the 1-based step number
``i``.  Its off-diagonal entries live in 1-based column ``n - i``, that is
0-based column ``n - i - 1``, on the rows below the diagonal.
"""

from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .charpoly import MonicPoly, char_poly, companion_matrix, fibonacci_sequence
from .densemat import as_matrix, inverse, matmul, max_abs, rank_with_tolerance
from .errors import (
    FormValidationError,
    InternalConsistencyError,
    MissingInputMatrixError,
    NotObservableError,
    ShapeError,
)

TRANSFORM_TOL = 1e-8
FORM_TOL = 1e-8


@dataclass(frozen=True, eq=False)
class System:
    """State-space triple ``(A, B, C)`` with a single output.

    ``B`` is optional and, when given, is an n×1 column.
    """

    A: np.ndarray
    C: np.ndarray
    B: np.ndarray | None = None

    def __post_init__(self):
        A = as_matrix(self.A, "A")
        n = A.shape[0]
        if A.shape != (n, n):
            raise ShapeError(f"A must be square, got {A.shape}")
        C = as_matrix(np.reshape(self.C, (1, -1)), "C")
        if C.shape != (1, n):
            raise ShapeError(f"C must be 1x{n}, got {C.shape}")
        B = self.B
        if B is not None:
            B = as_matrix(np.reshape(B, (-1, 1)), "B")
            if B.shape != (n, 1):
                raise ShapeError(f"B must be {n}x1, got {B.shape}")
        for m in (A, B, C):
            if m is not None:
                m.setflags(write=False)
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "C", C)
        object.__setattr__(self, "B", B)

    @property
    def n(self):
        return self.A.shape[0]

    def __eq__(self, other):
        if not isinstance(other, System):
            return NotImplemented
        if (self.B is None) != (other.B is None):
            return False
        return (
            np.array_equal(self.A, other.A)
            and np.array_equal(self.C, other.C)
            and (self.B is None or np.array_equal(self.B, other.B))
        )

    __hash__ = None


@dataclass(frozen=True, eq=False)
class Transform:
    """Change of basis ``x_new = T x`` together with its inverse."""

    T: np.ndarray
    Tinv: np.ndarray
    provenance: str
    residual: float = field(init=False)

    PROVENANCES = ("direct-toeplitz", "step-product", "observability-basis", "composed")

    def __post_init__(self):
        if self.provenance not in self.PROVENANCES:
            raise ValueError(f"unknown provenance {self.provenance!r}")
        T = as_matrix(self.T, "T")
        Tinv = as_matrix(self.Tinv, "Tinv")
        if T.shape[0] != T.shape[1] or T.shape != Tinv.shape:
            raise ShapeError(f"transform shapes {T.shape} and {Tinv.shape}")
        res = max_abs(T @ Tinv - np.eye(T.shape[0]))
        if not res < TRANSFORM_TOL:
            raise InternalConsistencyError(
                f"{self.provenance} transform: max|T Tinv - I| = {res:.3e}"
            )
        T.setflags(write=False)
        Tinv.setflags(write=False)
        object.__setattr__(self, "T", T)
        object.__setattr__(self, "Tinv", Tinv)
        object.__setattr__(self, "residual", res)

    def apply(self, sys):
        """Express ``sys`` in the new coordinates."""
        B = None if sys.B is None else matmul(self.T, sys.B)
        return System(
            A=matmul(matmul(self.T, sys.A), self.Tinv),
            C=matmul(sys.C, self.Tinv),
            B=B,
        )

    def then(self, other, provenance="composed"):
        """Transform equal to applying ``self`` first and ``other`` second."""
        return Transform(
            matmul(other.T, self.T), matmul(self.Tinv, other.Tinv), provenance
        )


class Step(NamedTuple):
    m: int
    A: np.ndarray
    P: np.ndarray
    C: np.ndarray


@dataclass(frozen=True, eq=False)
class RealizationTrace:
    """Sequence of realizations from observability form (m = 0) to observer form.

    ``steps[0].P`` is the identity; for m >= 1 ``steps[m].P`` is the factor
    that produced ``steps[m].A`` from ``steps[m-1].A``.
    """

    steps: tuple
    charpoly: MonicPoly

    def product(self):
        """``P_{n-1} ... P_1``."""
        n = self.charpoly.degree
        acc = np.eye(n)
        for s in self.steps[1:]:
            acc = s.P @ acc
        return acc

    @property
    def final(self):
        return self.steps[-1].A


class ObservabilityReport(NamedTuple):
    observable: bool
    condition: float
    rank: int


def e1(n):
    c = np.zeros((1, n))
    c[0, 0] = 1.0
    return c


def observability_matrix(sys):
    """Rows ``C, CA, ..., CA^(n-1)``."""
    n = sys.n
    rows = [sys.C[0]]
    for _ in range(n - 1):
        rows.append(rows[-1] @ sys.A)
    return np.array(rows)


def controllability_matrix(A, B):
    """Columns ``B, AB, ..., A^(n-1)B``."""
    A = np.asarray(A, dtype=np.float64)
    cols = [np.asarray(B, dtype=np.float64).reshape(-1)]
    for _ in range(A.shape[0] - 1):
        cols.append(A @ cols[-1])
    return np.array(cols).T


def is_observable(sys, tol=0.0):
    """Rank test on the observability matrix.

    ``condition`` is the cheap estimate ``n * max|O| * max|O^-1|`` and is
    infinite when ``O`` is rank deficient.
    """
    O = observability_matrix(sys)
    r = rank_with_tolerance(O, tol)
    if r < sys.n:
        return ObservabilityReport(False, float("inf"), r)
    cond = max_abs(O) * max_abs(inverse(O)) * sys.n
    return ObservabilityReport(True, cond, r)


def _require_observable(sys, tol):
    report = is_observable(sys, tol)
    if not report.observable:
        raise NotObservableError(report.rank, sys.n)
    return report


def canonicalize_observability(sys):
    """Snap to the exact bottom-row companion layout (and C = e1)."""
    p = MonicPoly(-sys.A[-1, :])
    return System(companion_matrix(p), e1(sys.n), sys.B)


def canonicalize_observer(sys):
    """Snap to the exact first-column companion layout (and C = e1)."""
    A, _ = observer_form_matrices(MonicPoly(-sys.A[::-1, 0]))
    return System(A, e1(sys.n), sys.B)


def to_observability_form(sys, tol=0.0, snap=False):
    """Change to the basis given by the observability matrix ``O``.

    Returns the new system and the ``observability-basis`` transform with
    ``T = O``, so ``A_obsv = O A O^-1``, ``C_obsv = C O^-1`` and
    ``B_obsv = O B``.
    """
    _require_observable(sys, tol)
    O = observability_matrix(sys)
    t = Transform(O, inverse(O), "observability-basis")
    out = t.apply(sys)
    if snap:
        out = canonicalize_observability(out)
    return out, t


def observer_form_matrices(p):
    """Observer companion pair: ``-a[n-1] .. -a[0]`` down the first column."""
    n = p.degree
    A = np.diag(np.ones(n - 1), 1)
    A[:, 0] = -p.coeffs[::-1]
    return A, e1(n)


def build_P(p):
    """Direct Toeplitz transform from observability to observer form.

    ``T`` is unit lower-triangular Toeplitz with first column
    ``(1, a[n-1], ..., a[1])``; ``Tinv`` has first column ``(F_0, ..., F_{n-1})``.
    """
    n = p.degree
    first = np.concatenate(([1.0], p.coeffs[:0:-1]))
    fib = fibonacci_sequence(p).values
    T = np.zeros((n, n))
    Tinv = np.zeros((n, n))
    for d in range(n):
        idx = np.arange(d, n)
        T[idx, idx - d] = first[d]
        Tinv[idx, idx - d] = fib[d]
    return Transform(T, Tinv, "direct-toeplitz")


def build_P_step(p, i):
    """Elementary factor ``P_i`` (1-based ``i`` in ``1..n-1``).

    Identity except below the diagonal of 0-based column ``j = n - i - 1``,
    where rows ``j+1 .. n-1`` hold ``+a[n-1], ..., +a[n-i]``.  The inverse
    carries the same entries negated.
    """
    n = p.degree
    if not 1 <= i <= n - 1:
        raise IndexError(f"step index must lie in 1..{n - 1}, got {i}")
    j = n - i - 1
    vals = p.coeffs[n - 1:n - i - 1:-1]
    T = np.eye(n)
    Tinv = np.eye(n)
    T[j + 1:, j] = vals
    Tinv[j + 1:, j] = -vals
    return Transform(T, Tinv, "step-product")


def validate_observability_form(sys, tol=FORM_TOL):
    """Raise :class:`FormValidationError` unless ``sys`` is in bottom-row companion form."""
    n = sys.n
    expected = np.diag(np.ones(n - 1), 1)
    bad = []
    for i in range(n - 1):
        for j in range(n):
            v = sys.A[i, j]
            if abs(v - expected[i, j]) > tol:
                bad.append((i, j, float(v), float(expected[i, j])))
    ce = e1(n)[0]
    for j in range(n):
        if abs(sys.C[0, j] - ce[j]) > tol:
            bad.append(("C", j, float(sys.C[0, j]), float(ce[j])))
    if bad:
        raise FormValidationError(bad)


def realization_sequence(sys_obsv, tol=FORM_TOL):
    """Walk from observability form to observer form one elementary step at a time.

    ``A_m = P_m A_{m-1} P_m^-1`` and ``C_m = C_{m-1} P_m^-1`` for
    ``m = 1 .. n-1``.
    """
    validate_observability_form(sys_obsv, tol)
    n = sys_obsv.n
    p = MonicPoly(-sys_obsv.A[-1, :])
    A = np.array(sys_obsv.A)
    C = np.array(sys_obsv.C)
    steps = [Step(0, A, np.eye(n), C)]
    for m in range(1, n):
        pm = build_P_step(p, m)
        A = pm.T @ A @ pm.Tinv
        C = C @ pm.Tinv
        steps.append(Step(m, A, np.array(pm.T), C))
    return RealizationTrace(tuple(steps), p)


def step_product_transform(p):
    """``P_{n-1} ... P_1`` assembled from the elementary factors."""
    n = p.degree
    T = np.eye(n)
    Tinv = np.eye(n)
    for i in range(1, n):
        f = build_P_step(p, i)
        T = f.T @ T
        Tinv = Tinv @ f.Tinv
    return Transform(T, Tinv, "step-product")


class ObserverResult(NamedTuple):
    system: System
    transform: Transform
    trace: RealizationTrace
    observability: System
    charpoly: MonicPoly


def to_observer_form(sys, tol=0.0, snap=False):
    """Observer companion realization of an observable system.

    The returned transform is ``T = P O`` (provenance ``composed``); the
    system is produced by the direct Toeplitz route and the elementary
    step trace is computed alongside it.
    """
    sys_obsv, t_obsv = to_observability_form(sys, tol)
    p = MonicPoly(-sys_obsv.A[-1, :])
    t_p = build_P(p)
    total = t_obsv.then(t_p)
    sys_obs = t_p.apply(sys_obsv)
    trace = realization_sequence(sys_obsv)
    if snap:
        sys_obs = canonicalize_observer(sys_obs)
        sys_obsv = canonicalize_observability(sys_obsv)
    return ObserverResult(sys_obs, total, trace, sys_obsv, p)


def dualize(sys):
    """Dual system ``(A^T, C^T, B^T)``; an involution."""
    if sys.B is None:
        raise MissingInputMatrixError("dualize needs an input matrix B")
    return System(A=sys.A.T, B=sys.C.T, C=sys.B.T)


def to_controller_form(sys, tol=0.0):
    """Controller companion realization via duality.

    Returns ``(system, T)`` with ``T`` mapping the original state to the
    controller coordinates.
    """
    dual = dualize(sys)
    res = to_observer_form(dual, tol)
    ctrl = dualize(res.system)
    # dual coordinates z = S x_d; back in primal terms x_c = S^-T x
    t = Transform(res.transform.Tinv.T, res.transform.T.T, "composed")
    return ctrl, t
