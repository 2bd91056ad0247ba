"""Scenario runner: wires guidance, control, allocation and the vessel sim.

A run is a three-stage mission. The transition stage sails the ship under
line-of-sight heading control at full rudder travel toward a designated
receiving waypoint. Inside the receiving radius the positioning controller
takes over (docking stage): waypoint lookahead setpoints, ship-frame PID,
force saturation, allocation, and clamped rate-limited commands, at 10 Hz
with five integration substeps per control step. When the final waypoint
has become the standing setpoint and the ship has slowed below the speed
threshold, the run enters position keeping and holds the dock pose for the
configured duration.

Each control step emits one trace record; runs are deterministic given the
configuration and seed.
"""

from __future__ import annotations

import csv
import json
from dataclasses import asdict, dataclass, field, fields, replace
from math import hypot

import numpy as np

from .allocation import (
    FORCE_SATURATION,
    ActuatorCommand,
    ActuatorLayout,
    ActuatorLimits,
    build_z,
    limits_preset,
    saturate_forces,
    to_physical,
)
from .controller import PidGains, PidState, Pose, Velocities, pid_step, pose_error
from .errors import ConfigError, DivergedRun
from .forces import BowThrusterModel, FullForceModel, builtin_samples, fit_rudder_model, load_samples
from .guidance import LosParams, WaypointDatabase, desired_pose, heading_rudder_command, los_heading, nearest_index
from .vessel import GustModel, SensorModel, SimState, VesselParams, step, transition_step

__all__ = [
    "TRACE_FIELDS",
    "STAGES",
    "TraceRecord",
    "ScenarioConfig",
    "ScenarioMetrics",
    "ScenarioResult",
    "run_scenario",
    "emit_trace",
    "read_trace",
    "config_to_dict",
    "config_from_dict",
    "load_config",
]

STAGES = ("transition", "docking", "keeping")

# Propeller revolution (rps) at which the transition thrust is calibrated.
_REFERENCE_N = 10.0


@dataclass(frozen=True)
class TraceRecord:
    """One control step: state, commands, saturated force demand, errors."""

    t: float
    x0: float
    y0: float
    psi: float
    u: float
    v: float
    r: float
    delta_p: float
    delta_s: float
    n_b: float
    x_req: float
    y_req: float
    n_req: float
    e_x: float
    e_y: float
    e_psi: float
    stage: str


TRACE_FIELDS = tuple(f.name for f in fields(TraceRecord))


@dataclass(frozen=True)
class ScenarioConfig:
    """Everything a scenario run needs, serializable to a JSON document.

    Attributes
    ----------
    waypoints : ndarray, shape (q, 3)
        Reference poses (x0 m, y0 m, psi rad). Loaded from a plain-text
        table when built from a document with a ``waypoint_file`` key.
    receiving_index, receiving_radius :
        Waypoint index of the receiving point and the proximity radius (m)
        that switches the run from transition to docking.
    speed_threshold, final_radius :
        Stop criteria: planar speed (m/s) gating keeping entry and the
        dock-arrival radius (m) used by the convergence metric.
    keeping_duration : float
        Seconds of position keeping after keeping entry before the run ends.
    transition_n_prop : float
        Propeller revolution in the transition stage (rps); thrust scales
        with its square relative to the 10 rps reference.
    """

    name: str = "custom"
    waypoints: np.ndarray = field(default_factory=lambda: np.zeros((1, 3)))
    delta_k: int = 10
    receiving_index: int = 0
    receiving_radius: float = 1.5
    speed_threshold: float = 0.02
    final_radius: float = 0.1
    keeping_duration: float = 300.0
    max_time: float = 900.0
    gains: PidGains = field(default_factory=PidGains)
    force_saturation: np.ndarray = field(default_factory=lambda: FORCE_SATURATION.copy())
    transition_n_prop: float = 10.0
    transition_limits: ActuatorLimits | None = None
    docking_limits: ActuatorLimits | None = None
    vessel: VesselParams = field(default_factory=VesselParams)
    gust: GustModel | None = None
    los: LosParams = field(default_factory=LosParams)
    sensor_noise_std: np.ndarray = field(default_factory=lambda: np.zeros(6))
    sensor_tau: float | None = None
    start_pose: Pose = field(default_factory=lambda: Pose(0.0, 0.0, 0.0))
    start_speed: float = 0.1
    seed: int = 0
    control_dt: float = 0.1
    substeps: int = 5
    bounding_box: float = 50.0
    force_data: str | None = None

    def __post_init__(self):
        rows = np.atleast_2d(np.asarray(self.waypoints, dtype=float))
        object.__setattr__(self, "waypoints", rows)
        object.__setattr__(self, "sensor_noise_std", np.asarray(self.sensor_noise_std, dtype=float))
        box = np.asarray(self.force_saturation, dtype=float)
        if box.shape != (3, 2) or (box[:, 0] > box[:, 1]).any():
            raise ConfigError("force_saturation must be three ordered intervals")
        object.__setattr__(self, "force_saturation", box)
        if rows.shape[1] != 3 or rows.shape[0] < 1:
            raise ConfigError(f"waypoints must be a (q, 3) array, got {rows.shape}")
        if not 0 <= self.receiving_index < rows.shape[0]:
            raise ConfigError(f"receiving_index {self.receiving_index} outside waypoint range")
        if self.receiving_radius <= 0 or self.final_radius <= 0:
            raise ConfigError("radii must be positive")
        if self.keeping_duration < 0 or self.max_time <= 0:
            raise ConfigError("durations must be non-negative (max_time positive)")
        if self.control_dt <= 0 or self.substeps < 1:
            raise ConfigError("control_dt must be positive and substeps at least 1")
        if self.speed_threshold <= 0:
            raise ConfigError("speed_threshold must be positive")


@dataclass(frozen=True)
class ScenarioMetrics:
    """Summary numbers for one run; keeping statistics are dock-relative."""

    converged: bool
    time_to_dock: float | None
    overshoot: float
    max_keeping_dev: float
    max_keeping_dev_lpp: float
    rms_keeping_error: float
    duration: float

    def as_dict(self) -> dict:
        return asdict(self)


@dataclass(frozen=True)
class ScenarioResult:
    records: list[TraceRecord]
    metrics: ScenarioMetrics


def _force_model(cfg: ScenarioConfig) -> FullForceModel:
    samples = load_samples(cfg.force_data) if cfg.force_data else builtin_samples()
    return FullForceModel(rudder=fit_rudder_model(samples), bow=BowThrusterModel())


def _rate_limited(target: float, previous: float, interval: tuple[float, float], max_step: float) -> float:
    clamped = min(max(target, interval[0]), interval[1])
    return previous + min(max(clamped - previous, -max_step), max_step)


def run_scenario(cfg: ScenarioConfig) -> ScenarioResult:
    """Execute the three-stage mission and return the trace plus metrics.

    Raises
    ------
    ConfigError
        Invalid configuration (also raised by the config constructor).
    DivergedRun
        The ship left the configured bounding box, signalling instability.
    """
    model = _force_model(cfg)
    layout = cfg.vessel.layout
    allocator = build_z(layout, model)
    db = WaypointDatabase(rows=cfg.waypoints, delta_k=cfg.delta_k)
    transition_limits = cfg.transition_limits or limits_preset("transition", cfg.transition_n_prop)
    docking_limits = cfg.docking_limits or limits_preset("positioning")
    thrust_scale = (transition_limits.n_prop / _REFERENCE_N) ** 2
    gust = replace(cfg.gust, seed=cfg.seed) if cfg.gust is not None else None
    sensor = None
    if cfg.sensor_noise_std.any() or cfg.sensor_tau is not None:
        sensor = SensorModel(cfg.sensor_noise_std, seed=cfg.seed + 1, tau=cfg.sensor_tau)

    hover = model.rudder.hover_angle
    receiving_xy = db.rows[cfg.receiving_index, :2]
    final_xy = db.rows[-1, :2]
    last_row = len(db) - 1

    state = SimState(
        eta=cfg.start_pose,
        vel=Velocities(cfg.start_speed, 0.0, 0.0),
        actuators=ActuatorCommand(0.0, 0.0, 0.0),
        t=0.0,
    )
    stage = "transition"
    pid = PidState()
    sat_flags = np.zeros(3, dtype=bool)
    records: list[TraceRecord] = []
    keeping_start = None
    dt = cfg.control_dt
    dt_sub = dt / cfg.substeps
    n_steps = int(round(cfg.max_time / dt))

    for k in range(n_steps):
        t = k * dt
        true_eta, true_vel = state.eta, state.vel
        if sensor is not None:
            meas_eta, meas_vel = sensor.read(state)
        else:
            meas_eta, meas_vel = true_eta, true_vel

        # Stage switches act before the step's command is computed.
        if stage == "transition" and hypot(
            meas_eta.x0 - receiving_xy[0], meas_eta.y0 - receiving_xy[1]
        ) <= cfg.receiving_radius:
            stage = "docking"
            pid = pid.reset()
            sat_flags = np.zeros(3, dtype=bool)
            # Rudders swing to hover during the controller handoff.
            state = replace(state, actuators=ActuatorCommand(hover[0], hover[1], 0.0))
        if stage == "docking":
            j = nearest_index(db, meas_eta)
            if (
                min(j + db.delta_k, last_row) == last_row
                and hypot(meas_vel.u, meas_vel.v) < cfg.speed_threshold
                and hypot(meas_eta.x0 - final_xy[0], meas_eta.y0 - final_xy[1])
                <= cfg.final_radius
            ):
                stage = "keeping"
                pid = pid.reset()
                keeping_start = t

        eta_d = desired_pose(db, meas_eta)
        e = pose_error(meas_eta, eta_d)

        if stage == "transition":
            psi_d = los_heading(meas_eta, db, cfg.los)
            dp_cmd, ds_cmd = heading_rudder_command(psi_d, meas_eta, meas_vel, cfg.los)
            max_step = transition_limits.rudder_rate * dt
            prev = state.actuators
            cmd = ActuatorCommand(
                _rate_limited(dp_cmd, prev.delta_p, transition_limits.delta_p_range, max_step),
                _rate_limited(ds_cmd, prev.delta_s, transition_limits.delta_s_range, max_step),
                0.0,
            )
            f_req_arr = np.zeros(3)
            state = replace(state, actuators=cmd)
            for _ in range(cfg.substeps):
                state = transition_step(state, cfg.vessel, gust, dt_sub, thrust_scale)
        else:
            f_raw, pid = pid_step(cfg.gains, pid, e, meas_vel, dt, sat_flags)
            f_req, sat_flags = saturate_forces(f_raw, cfg.force_saturation)
            u_mod = allocator.allocate(f_req)
            cmd = to_physical(u_mod, model, docking_limits, state.actuators, dt)
            f_req_arr = f_req.as_array()
            state = replace(state, actuators=cmd)
            for _ in range(cfg.substeps):
                state = step(state, model, layout, cfg.vessel, gust, dt_sub)

        records.append(TraceRecord(
            t=t,
            x0=true_eta.x0,
            y0=true_eta.y0,
            psi=true_eta.psi,
            u=true_vel.u,
            v=true_vel.v,
            r=true_vel.r,
            delta_p=cmd.delta_p,
            delta_s=cmd.delta_s,
            n_b=cmd.n_b,
            x_req=f_req_arr[0],
            y_req=f_req_arr[1],
            n_req=f_req_arr[2],
            e_x=e[0],
            e_y=e[1],
            e_psi=e[2],
            stage=stage,
        ))

        state = replace(state, t=(k + 1) * dt)  # keep the clock free of substep drift
        if abs(state.eta.x0) > cfg.bounding_box or abs(state.eta.y0) > cfg.bounding_box:
            raise DivergedRun(
                f"ship left the {cfg.bounding_box} m bounding box at t={state.t:.1f}s"
            )
        if keeping_start is not None and state.t - keeping_start >= cfg.keeping_duration:
            break

    metrics = _compute_metrics(cfg, records, final_xy)
    return ScenarioResult(records=records, metrics=metrics)


def _compute_metrics(cfg: ScenarioConfig, records: list[TraceRecord], final_xy) -> ScenarioMetrics:
    rows = cfg.waypoints
    # Approach direction at the dock, for the signed overshoot projection.
    if len(rows) >= 2:
        dx, dy = rows[-1, 0] - rows[-2, 0], rows[-1, 1] - rows[-2, 1]
    else:
        dx, dy = 1.0, 0.0
    norm = hypot(dx, dy) or 1.0
    ax, ay = dx / norm, dy / norm

    time_to_dock = None
    overshoot = 0.0
    keeping_devs = []
    for rec in records:
        ex0, ey0 = rec.x0 - final_xy[0], rec.y0 - final_xy[1]
        dist = hypot(ex0, ey0)
        speed = hypot(rec.u, rec.v)
        if time_to_dock is None and dist <= cfg.final_radius and speed < cfg.speed_threshold:
            time_to_dock = rec.t
        if rec.stage != "transition":
            overshoot = max(overshoot, ex0 * ax + ey0 * ay)
        if rec.stage == "keeping":
            keeping_devs.append(dist)

    if keeping_devs:
        devs = np.asarray(keeping_devs)
        max_dev = float(devs.max())
        rms = float(np.sqrt(np.mean(devs**2)))
    else:
        max_dev = float("nan")
        rms = float("nan")
    return ScenarioMetrics(
        converged=time_to_dock is not None,
        time_to_dock=time_to_dock,
        overshoot=overshoot,
        max_keeping_dev=max_dev,
        max_keeping_dev_lpp=max_dev / cfg.vessel.l_pp,
        rms_keeping_error=rms,
        duration=records[-1].t + cfg.control_dt if records else 0.0,
    )


def emit_trace(records: list[TraceRecord], path) -> None:
    """Write a trace CSV: header row plus one row per control step.

    Numeric fields are printed with nine significant digits, so a reparse
    and re-emit reproduces the file byte for byte.
    """
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(TRACE_FIELDS)
        for rec in records:
            row = [f"{getattr(rec, name):.9g}" for name in TRACE_FIELDS[:-1]]
            row.append(rec.stage)
            writer.writerow(row)


def read_trace(path) -> list[TraceRecord]:
    """Parse a trace CSV back into records."""
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        return [
            TraceRecord(**{
                name: (row[name] if name == "stage" else float(row[name]))
                for name in TRACE_FIELDS
            })
            for row in reader
        ]


def _los_to_dict(p: LosParams) -> dict:
    return {
        "lookahead_distance": p.lookahead_distance,
        "heading_kp": p.heading_kp,
        "heading_kd": p.heading_kd,
        "acceptance_radius": p.acceptance_radius,
    }


def _limits_to_dict(limits: ActuatorLimits | None) -> dict | None:
    if limits is None:
        return None
    return {
        "delta_p_range": list(limits.delta_p_range),
        "delta_s_range": list(limits.delta_s_range),
        "rudder_rate": limits.rudder_rate,
        "n_b_range": list(limits.n_b_range),
        "n_prop": limits.n_prop,
    }


def _limits_from_dict(doc: dict | None) -> ActuatorLimits | None:
    if doc is None:
        return None
    return ActuatorLimits(
        delta_p_range=tuple(doc["delta_p_range"]),
        delta_s_range=tuple(doc["delta_s_range"]),
        rudder_rate=doc["rudder_rate"],
        n_b_range=tuple(doc["n_b_range"]),
        n_prop=doc["n_prop"],
    )


def config_to_dict(cfg: ScenarioConfig) -> dict:
    """Plain-JSON-serializable view of a scenario configuration."""
    doc = {
        "name": cfg.name,
        "waypoints": cfg.waypoints.tolist(),
        "delta_k": cfg.delta_k,
        "receiving_index": cfg.receiving_index,
        "receiving_radius": cfg.receiving_radius,
        "speed_threshold": cfg.speed_threshold,
        "final_radius": cfg.final_radius,
        "keeping_duration": cfg.keeping_duration,
        "max_time": cfg.max_time,
        "gains": {
            "k_p": cfg.gains.k_p.tolist(),
            "k_i": cfg.gains.k_i.tolist(),
            "k_d": cfg.gains.k_d.tolist(),
        },
        "force_saturation": cfg.force_saturation.tolist(),
        "transition_n_prop": cfg.transition_n_prop,
        "transition_limits": _limits_to_dict(cfg.transition_limits),
        "docking_limits": _limits_to_dict(cfg.docking_limits),
        "vessel": {
            "inertia": cfg.vessel.inertia.tolist(),
            "lin_damping": cfg.vessel.lin_damping.tolist(),
            "quad_damping": cfg.vessel.quad_damping.tolist(),
            "l_pp": cfg.vessel.l_pp,
            "layout": {"x_fr": cfg.vessel.layout.x_fr, "x_b": cfg.vessel.layout.x_b},
            "prop_thrust_at_zero_rudder": cfg.vessel.prop_thrust_at_zero_rudder,
            "steer_gain": cfg.vessel.steer_gain,
        },
        "gust": None if cfg.gust is None else {
            "mean_force": cfg.gust.mean_force.tolist(),
            "burst_amplitude": cfg.gust.burst_amplitude,
            "burst_duration": cfg.gust.burst_duration,
            "burst_interval": cfg.gust.burst_interval,
            "seed": cfg.gust.seed,
        },
        "los": _los_to_dict(cfg.los),
        "sensor_noise_std": cfg.sensor_noise_std.tolist(),
        "sensor_tau": cfg.sensor_tau,
        "start_pose": [cfg.start_pose.x0, cfg.start_pose.y0, cfg.start_pose.psi],
        "start_speed": cfg.start_speed,
        "seed": cfg.seed,
        "control_dt": cfg.control_dt,
        "substeps": cfg.substeps,
        "bounding_box": cfg.bounding_box,
        "force_data": cfg.force_data,
    }
    return doc


def config_from_dict(doc: dict) -> ScenarioConfig:
    """Build a configuration from a JSON document (see ``config_to_dict``).

    A ``waypoint_file`` key names a plain-text waypoint table to load in
    place of inline rows.
    """
    doc = dict(doc)
    try:
        if "waypoint_file" in doc and doc["waypoint_file"]:
            try:
                waypoints = np.loadtxt(doc.pop("waypoint_file"), ndmin=2)
            except OSError as exc:
                raise ConfigError(f"cannot read waypoint file: {exc}") from exc
        else:
            waypoints = np.asarray(doc.pop("waypoints"), dtype=float)
        vessel_doc = doc.pop("vessel", {})
        layout_doc = vessel_doc.pop("layout", {})
        vessel = VesselParams(
            **{**vessel_doc, "layout": ActuatorLayout(**layout_doc)}
        ) if vessel_doc or layout_doc else VesselParams()
        gust_doc = doc.pop("gust", None)
        gust = GustModel(**gust_doc) if gust_doc else None
        gains_doc = doc.pop("gains", None)
        gains = PidGains(**{k: np.asarray(v) for k, v in gains_doc.items()}) if gains_doc else PidGains()
        los_doc = doc.pop("los", None)
        los = LosParams(**los_doc) if los_doc else LosParams()
        start = doc.pop("start_pose", [0.0, 0.0, 0.0])
        transition_limits = _limits_from_dict(doc.pop("transition_limits", None))
        docking_limits = _limits_from_dict(doc.pop("docking_limits", None))
        return ScenarioConfig(
            waypoints=waypoints,
            vessel=vessel,
            gust=gust,
            gains=gains,
            los=los,
            start_pose=Pose(*start),
            transition_limits=transition_limits,
            docking_limits=docking_limits,
            **doc,
        )
    except (TypeError, KeyError, ValueError) as exc:
        raise ConfigError(f"invalid scenario configuration: {exc}") from exc


def load_config(path) -> ScenarioConfig:
    """Read a scenario configuration JSON file."""
    try:
        with open(path) as fh:
            doc = json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config file: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config file {path} is not valid JSON: {exc}") from exc
    return config_from_dict(doc)
