"""Reachable sets, control sets, growth rates and eigensets of planar
bilinear control systems ``x' = (A + sum u_i B_i) x`` with box controls."""

from .accessibility import AccessibilityReport, check_accessibility, lie_algebra_basis
from .bilinear import (
    BilinearSystem,
    PwcControl,
    ShiftedSystem,
    drift_matrix,
    flow,
    flow_matrix,
    log_flow,
    shifted_flow,
)
from .eigenset import (
    EigensetError,
    EigensetResult,
    VerificationReport,
    construct_from_witness,
    construct_general,
    union_family,
    verify_eigenset,
)
from .kernels import BACKEND
from .matops import ExpmRangeError, expm, lie_bracket, lognorm2, operator_norm, span_rank
from .scenario import Scenario, ScenarioError, load_scenario
from .spectrum import RateBracket, RayReturnCertificate, compute_R, ray_return_search, xi_estimate
from .sphere_cs import ControlSetArc, build_reach_graph, invariant_control_sets
from .starset import (
    ReachOptions,
    StarSet2,
    hausdorff,
    linear_image,
    make_ball,
    make_polar,
    make_polygon,
    make_segment,
    reach_step,
    scale,
    union,
)

__version__ = "0.1.0"
