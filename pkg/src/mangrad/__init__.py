"""Randomized tangent-direction gradient descent on Riemannian manifolds.

Core pieces: manifolds with closed-form exponential maps (R^n, spheres,
SU(n)), direction laws on unit tangent spheres, the projected descent loop
with per-step descent certificates, a saddle-passage laboratory (discrete
angle process, diffusion limit, Ornstein-Uhlenbeck bounds), unitary
2-design verification, and the distributional checks backing it all.
"""

from .cost import CostFunction, GroundStateCost, QuadraticSaddle, saddle_angle
from .designs import (
    DesignReport,
    FiniteUnitarySet,
    clifford_1q,
    commutant_dimension,
    haar_moment_operator,
    leave_one_out_span,
    load_unitary_set,
    moment_operator,
    pauli_1q,
    verify_design,
)
from .errors import (
    CapabilityError,
    ConfigError,
    LawError,
    MangradError,
    NumericError,
    UndefinedAngleError,
    UsageError,
)
from .groundstate import (
    GroundStateProblem,
    projected_derivative,
    run_groundstate_ensemble,
    saddle_statistics,
)
from .manifold import Euclidean, Manifold, SpecialUnitary, Sphere
from .rgd import (
    CriticalKind,
    EnsembleSummary,
    RgdConfig,
    TrajectoryRecord,
    classify_critical,
    ensemble_run,
    rgd_run,
    rgd_step,
)
from .rng import RngStream
from .sampler import (
    DesignConjugateLaw,
    DirectionLaw,
    DiscreteVectorFieldLaw,
    HaarSphereLaw,
    expectation_check,
    overlap_floor,
    project_gradient,
    projection_sphere_check,
    sample_direction,
)
from .saddlelab import (
    AngleProcessParams,
    Ecdf,
    HittingTimes,
    OuParams,
    angle_step,
    combined_tau_approximation,
    deterministic_tail_time,
    ks_distance,
    ou_hitting_lower_cdf,
    ou_sigma_tilde,
    simulate_angle_hitting,
    simulate_ou_hitting,
)
from .stats import BetaLaw, beta_cdf, erf, ks_bound_check, normal_cdf, tail_bound_check, u_last_cdf

__version__ = "0.1.0"
