"""Luenberger observer gains by pole placement in observer coordinates.

In the observer companion form the error dynamics ``A_obs - L_obs C_obs``
differ from ``A_obs`` only in the first column, whose entry for ``s**k``
becomes ``-a[k] - l[k]``.  Matching a desired polynomial is therefore a
coefficient-wise subtraction; the gain is then pulled back to the original
coordinates through ``T = P O``.
"""

from dataclasses import dataclass

import numpy as np

from .charpoly import MonicPoly, char_poly
from .densemat import matmul, max_abs
from .errors import ShapeError
from .realizations import to_observer_form

RESIDUAL_LIMIT = 1e-6
CONDITION_LIMIT = 1e8


@dataclass(frozen=True, eq=False)
class ObserverDesign:
    """Gain in both coordinate systems plus the achieved placement error.

    ``gain_observer`` is ordered like the first column of the observer
    form, ``l[n-1]`` at the top and ``l[0]`` at the bottom.
    """

    desired: MonicPoly
    plant: MonicPoly
    gain_observer: np.ndarray
    gain_original: np.ndarray
    residual: float
    condition: float
    warnings: tuple = ()


def design_gain_observer_coords(plant, desired):
    """``l[k] = d[k] - a[k]``, returned as an n×1 column from ``l[n-1]`` down."""
    if plant.degree != desired.degree:
        raise ShapeError(
            f"plant has degree {plant.degree} but desired has degree {desired.degree}"
        )
    gains = desired.coeffs - plant.coeffs
    return gains[::-1].reshape(-1, 1).copy()


def verify_gain(sys, L, desired):
    """Max coefficient gap between ``char_poly(A - L C)`` and ``desired``."""
    L = np.asarray(L, dtype=np.float64).reshape(-1, 1)
    if L.shape[0] != sys.n or desired.degree != sys.n:
        raise ShapeError("gain and desired polynomial must match the system order")
    closed = sys.A - matmul(L, sys.C)
    return max_abs(char_poly(closed).coeffs - desired.coeffs)


def design_observer(sys, desired, tol=0.0):
    """Place the observer error poles of ``sys`` at the roots of ``desired``.

    Poor conditioning does not raise; it is reported in ``warnings``.
    """
    if desired.degree != sys.n:
        raise ShapeError(f"desired polynomial has degree {desired.degree}, system order {sys.n}")
    res = to_observer_form(sys, tol)
    l_obs = design_gain_observer_coords(res.charpoly, desired)
    L = matmul(res.transform.Tinv, l_obs)
    residual = verify_gain(sys, L, desired)
    T = res.transform
    cond = max_abs(T.T) * max_abs(T.Tinv) * sys.n
    notes = []
    if cond > CONDITION_LIMIT:
        notes.append(f"ill-conditioned transform (condition estimate {cond:.3g})")
    if not residual < RESIDUAL_LIMIT:
        notes.append(f"placement residual {residual:.3g} exceeds {RESIDUAL_LIMIT:g}")
    return ObserverDesign(
        desired=desired,
        plant=res.charpoly,
        gain_observer=l_obs,
        gain_original=L,
        residual=residual,
        condition=cond,
        warnings=tuple(notes),
    )
