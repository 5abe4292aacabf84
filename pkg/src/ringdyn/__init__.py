"""Dynamics of a point mass in the field of a fixed homogeneous circle.

The potential at a point depends only on the extreme distances (d, D) to
the circle and equals -M/agm(d, D); everything else in the package builds
on that identity: analytic gradients through the AGM iteration, the planar
effective-potential analysis with its critical radii, adaptive trajectory
integration with collision cutoff, and the straight-wire limit of a huge
circle.
"""

from .errors import DomainError, IntegrationError, OnCircleError, StateError
from .planar import (
    CriticalData,
    EffectiveParams,
    RegimeClassification,
    classify_regime,
    critical_data,
    critical_radii,
    dV_dr,
    effective_potential,
    g,
    g_prime,
    phase_portrait,
    potential_inside,
    potential_outside,
)
from .potential import (
    Circle,
    DistancePair,
    agm_potential,
    agm_potential_partials,
    dist_extremes,
    gradient,
    potential,
    rescale_solution,
)
from .simulate import (
    CartesianState,
    CollisionReport,
    CylindricalState,
    ShapeReport,
    StabilityReport,
    Trajectory,
    detect_collision,
    integrate_cartesian,
    integrate_reduced,
    read_trajectory_csv,
    stability_probe,
    summarize_trajectory,
    time_to_collision_quadrature,
    trajectory_shape_check,
    write_trajectory_csv,
)
from .special import AgmResult, agm, chi, elliptic_f, elliptic_f_prime
from .wire import (
    WIRE_CALIBRATION,
    HComponents,
    WireLimitPoint,
    convergence_scan,
    decomposition,
    grad_W,
    grad_W_limit,
    h_components,
    wire_potential,
)

__version__ = "0.1.0"

__all__ = [
    "AgmResult",
    "CartesianState",
    "Circle",
    "CollisionReport",
    "CriticalData",
    "CylindricalState",
    "DistancePair",
    "DomainError",
    "EffectiveParams",
    "HComponents",
    "IntegrationError",
    "OnCircleError",
    "RegimeClassification",
    "ShapeReport",
    "StabilityReport",
    "StateError",
    "Trajectory",
    "WIRE_CALIBRATION",
    "WireLimitPoint",
    "agm",
    "agm_potential",
    "agm_potential_partials",
    "chi",
    "classify_regime",
    "convergence_scan",
    "critical_data",
    "critical_radii",
    "dV_dr",
    "decomposition",
    "detect_collision",
    "dist_extremes",
    "effective_potential",
    "elliptic_f",
    "elliptic_f_prime",
    "g",
    "g_prime",
    "grad_W",
    "grad_W_limit",
    "gradient",
    "h_components",
    "integrate_cartesian",
    "integrate_reduced",
    "phase_portrait",
    "potential",
    "potential_inside",
    "potential_outside",
    "read_trajectory_csv",
    "rescale_solution",
    "stability_probe",
    "summarize_trajectory",
    "time_to_collision_quadrature",
    "trajectory_shape_check",
    "wire_potential",
    "write_trajectory_csv",
    "__version__",
]
