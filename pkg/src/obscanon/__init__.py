"""Observability and observer canonical realizations of single-output LTI
systems, with Luenberger observer design and verification."""

from .charpoly import (
    FibSequence,
    MonicPoly,
    char_poly,
    fibonacci_sequence,
    hessenberg_det_check,
    hessenberg_matrix,
    poly_from_roots,
)
from .observer import ObserverDesign, design_gain_observer_coords, design_observer, verify_gain
from .realizations import (
    RealizationTrace,
    System,
    Transform,
    build_P,
    build_P_step,
    dualize,
    is_observable,
    observability_matrix,
    observer_form_matrices,
    realization_sequence,
    to_observability_form,
    to_observer_form,
)
from .sim import Trajectory, estimate_decay_rate, simulate

__version__ = "0.1.0"
