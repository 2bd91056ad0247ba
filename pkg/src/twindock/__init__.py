"""Twin-rudder ship positioning at desk scale.

A deterministic 3-DOF simulator and control stack for a scale-model ship
whose twin rudders redirect constant propeller thrust: a regression-fitted
command-to-forces model with a hover rudder angle, nondiagonal control
forces allocation, a decoupled PID with pose-error frame rotation,
waypoint lookahead guidance, and scripted docking/position-keeping
scenarios with seeded gust disturbances.
"""

from .allocation import (
    FORCE_SATURATION,
    ActuatorCommand,
    ActuatorLayout,
    ActuatorLimits,
    Allocator,
    POSITIONING_LIMITS,
    RequiredForces,
    TRANSITION_LIMITS,
    build_z,
    limits_preset,
    saturate_forces,
    to_physical,
)
from .controller import (
    PidGains,
    PidState,
    Pose,
    Velocities,
    pid_step,
    pose_error,
    rotation,
    wrap_angle,
)
from .errors import (
    ConfigError,
    DegenerateScale,
    DivergedRun,
    NonFiniteState,
    RangeViolation,
    RankDeficientDesign,
    SingularAllocation,
    SingularModel,
    TwindockError,
)
from .forces import (
    BowThrusterModel,
    CfdSample,
    FullForceModel,
    ResidualReport,
    RudderForceModel,
    ScalingParams,
    actuator_forces,
    bow_thruster_force,
    builtin_samples,
    command_to_forces,
    dynamic_pressure_scale,
    fit_rudder_model,
    inflow_velocity,
    linearity_diagnostic,
    load_samples,
    nondimensionalize,
    redimensionalize,
    rudder_forces,
    scale_model,
)
from .guidance import (
    LosParams,
    WaypointDatabase,
    desired_pose,
    heading_rudder_command,
    load_waypoints,
    los_heading,
    nearest_index,
)
from .harness import (
    ScenarioConfig,
    ScenarioMetrics,
    ScenarioResult,
    TraceRecord,
    config_from_dict,
    config_to_dict,
    emit_trace,
    load_config,
    read_trace,
    run_scenario,
)
from .scenarios import builtin_config, straight_path, uturn_path
from .vessel import GustModel, SensorModel, SimState, VesselParams, step, transition_step

__version__ = "0.1.0"
