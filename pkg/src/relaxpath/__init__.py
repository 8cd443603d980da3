"""Exact relaxation paths for relaxed maximum entropy estimation."""
from ._kernels import available_backends, backend, set_backend
from .cascade import CascadeStage, cascade_eval, cascade_step, run_cascade
from .config import TOL, Tolerances
from .core import (
    KKTReport,
    PrimalDualPoint,
    ProblemInstance,
    SegmentSums,
    direct_sums,
    dual_from,
    evaluate_G,
    kkt_check,
    point_at,
    primal_from,
    signs_at,
    solve_mu_at,
    sums_from_signs,
    theta,
    unweight,
    validate_instance,
    weighted_transform,
)
from .errors import *  # noqa: F401,F403
from .path import (
    Breakpoint,
    RelaxationPath,
    Transition,
    apply_transition,
    first_breakpoint_check,
    next_intersection,
    path_eval,
    track_local,
    track_sparse,
    track_uniform,
)
from .selection import (
    ModelOption,
    ValidationCounts,
    segment_minimize,
    select_models,
    validation_loss,
)
from .sqpath import (
    SqSegmentSums,
    sq_primal_from,
    sq_projection_oracle,
    sq_solve_mu_at,
    sq_track_local,
)
from .sweepline import SweepState, queue_audit, track_global

__version__ = "0.1.0"
