"""Exact coherent states of driven N-body inverse-square oscillators,
with numerical verification tooling."""

from .classical import (
    CanonicalParameters,
    CanonicalSolution,
    ClassicalSolution,
    DisplacementSolution,
    TrajectoryFrame,
    canonical_center_coefficients,
    canonical_frame,
    canonical_initial_conditions,
    ermakov_residual,
    frame_at,
    solve_classical,
    solve_displacement,
)
from .errors import (
    CSCoherentError,
    DegenerateSolutionError,
    InsufficientSamplesError,
    MethodError,
    ParameterError,
    ScenarioError,
    ScheduleError,
    SingularConfigurationError,
    SpanError,
    UnsupportedConstructionError,
)
from .models import (
    ModelSpec,
    calogero_b,
    energy_of,
    homogeneity_defect,
    jacobi_forward,
    jacobi_inverse,
    potential_eval,
    translation_defect,
)
from .schedules import (
    Constant,
    ParameterSchedule,
    PiecewisePolynomial,
    Sinusoid,
    TableInterpolant,
    constant_schedule,
)
from .states import (
    Envelope,
    StateEvaluator,
    boosted_trig_state,
    closed_form_density,
    semicircle_support,
    coherent_state,
    laguerre,
    phase_angle,
    stationary_state,
    transform_density,
    with_phase_evolution,
)
from .verify import (
    NormEstimate,
    ResidualReport,
    eigen_check,
    exchange_defect,
    hamiltonian_ratio,
    marginal_density,
    marginal_scan,
    norm_estimate,
    residual_scan,
    sample_configurations,
    schrodinger_residual,
    suggested_steps,
)
from .scenario import Scenario, parse_scenario
from .runner import run_scenario

__version__ = "0.1.0"
