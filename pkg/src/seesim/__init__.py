"""Simulation and control toolkit for a parallel soft fluidic ultrasound end-effector."""

from .config import RobotConfig, load_config
from .control import (
    ActuatorFit,
    ControlConfig,
    RunLog,
    TriangleTrajectory,
    open_loop_rates,
    pi_step,
    run_closed_loop,
    tracking_summary,
    triangle_trajectory,
    volume_extension,
)
from .environment import (
    ElasticPatch,
    TissueParams,
    clamp_contact_force,
    indentation_sweep,
    patch_wrench,
    serial_stiffness,
    visceral_stiffness,
)
from .errors import (
    ConfigError,
    EmptyCloudError,
    InsufficientSamplesError,
    InvalidParameterError,
    NonFiniteInputError,
    ScenarioError,
    SeesimError,
    SingularSystemError,
    StepSizeError,
)
from .mechanics import (
    FramePlacement,
    SfaParams,
    SmallDisplacement,
    Wrench,
    cross_matrix,
    rotation_update,
    rotation_vector,
    timoshenko_phi,
    timoshenko_stiffness,
    wrench_adjoint,
)
from .model import (
    AugmentedSystem,
    SeeGeometry,
    SeeState,
    assemble_augmented,
    augmented_system,
    build_sfa_frames,
    deflated_state,
    displacement_probe,
    effective_tip_stiffness,
    fraction_to_volume,
    inflate,
    jacobian_theta,
    jacobian_v,
    lumped_stiffness,
    max_injected_volume,
    simulate_quasistatic,
    solve_increment,
)
from .scenarios import Scenario, load_scenario, run_scenario
from .session import TeleopSession, replay_session
from .workspace import (
    KminEstimate,
    PoseCloud,
    Requirement,
    coverage,
    force_deflection,
    map_workspace,
    repeatability_stats,
    summarize_workspace,
)

__version__ = "0.1.0"
