"""Locate a sound source from exact arrival times by refining covers of balls.

Given sensors ``r_i`` and arrival times ``t_i = t0 + rho(r_i, s)`` in an l_p
space, :func:`rcd_solve` returns a point within a chosen precision delta of
the source s, starting from any ball known to contain it.
"""

from .analysis import (
    GradConfig,
    GridOracleConfig,
    grid_argmin_defect,
    gradient_descent_D2,
    verify_local_min,
)
from .cover import (
    Ball,
    CoverLevel,
    dedupe_centers,
    nearest_lattice_center,
    refine_ball,
    unit_lattice_centers,
)
from .estimator import SoundRangingLocator
from .exceptions import (
    CapacityError,
    DegenerateBasisError,
    DegenerateLayoutError,
    EmptyCoverError,
    InvalidInputError,
    InvalidInstanceError,
    NumericalError,
    SoundRangingError,
)
from .geometry import Basis, NormSpec, distance, norm, validate_auerbach
from .problem import (
    DefectKind,
    GroundTruth,
    SRProblem,
    backward_moments,
    defect,
    forward_simulate,
    interval_defect,
    make_unique_layout,
)
from .solver import (
    NoisyConfig,
    SolveResult,
    SolverConfig,
    Status,
    noisy_solve,
    prune_test,
    rcd_solve,
    stopping_check,
)

__all__ = [
    "GradConfig",
    "GridOracleConfig",
    "grid_argmin_defect",
    "gradient_descent_D2",
    "verify_local_min",
    "Ball",
    "CoverLevel",
    "dedupe_centers",
    "nearest_lattice_center",
    "refine_ball",
    "unit_lattice_centers",
    "SoundRangingLocator",
    "CapacityError",
    "DegenerateBasisError",
    "DegenerateLayoutError",
    "EmptyCoverError",
    "InvalidInputError",
    "InvalidInstanceError",
    "NumericalError",
    "SoundRangingError",
    "Basis",
    "NormSpec",
    "distance",
    "norm",
    "validate_auerbach",
    "DefectKind",
    "GroundTruth",
    "SRProblem",
    "backward_moments",
    "defect",
    "forward_simulate",
    "interval_defect",
    "make_unique_layout",
    "NoisyConfig",
    "SolveResult",
    "SolverConfig",
    "Status",
    "noisy_solve",
    "prune_test",
    "rcd_solve",
    "stopping_check",
]

__version__ = "0.1.0"
