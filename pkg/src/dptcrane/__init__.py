"""Modelling, pole-placement control and simulation of a double-pendulum overhead crane."""

from .certify import RoaCertificate, estimate_sigma, region_of_attraction, solve_lyapunov, vdot
from .config import ScenarioConfig, figure_preset
from .dynamics import (
    REFERENCE_PARAMS,
    ActuationVariant,
    CraneParams,
    accel,
    bias_vector,
    control_forces,
    delta,
    energy,
    feedforward_hoist_force,
    mass_matrix,
    theta_l1,
    vector_field,
)
from .errors import (
    CraneError,
    EmptyTrajectory,
    InvalidParameters,
    NotHurwitz,
    NoValidRadius,
    PlacementFailed,
    SingularConfiguration,
    StepSizeUnderflow,
    Uncontrollable,
)
from .linmodel import LinearModel, analytic_linearization, fd_linearization
from .pipeline import ScenarioResult, run_scenario
from .sim import (
    IntegratorOptions,
    Trajectory,
    compare_variants,
    energy_audit,
    integrate,
    integrate_open_loop,
    settling_time,
)
from .synthesis import (
    REFERENCE_POLES,
    GainMatrix,
    PoleSet,
    closed_loop_eigs,
    controllability_matrix,
    controllability_rank,
    reference_gain,
    place_poles,
)

__version__ = "0.1.0"
