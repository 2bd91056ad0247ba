"""Planar 3-DOF vessel dynamics, gust disturbance and sensor models.

This is the physics closure for desk-scale simulation: diagonal effective
inertia per axis with linear plus quadratic damping, driven by the
actuator forces through their application points. Coefficients are not
identified hydrodynamics; the defaults are calibrated so the closed loop
reproduces the observed acceleration and crash-stop timescales of the
3 m model, and every value is exposed in the scenario config.

Two force regimes exist. In the positioning stages the bollard-pull force
model supplies the actuator forces. In the transition stage, where the
ship sails at speed with rudders near zero, that model does not apply;
propulsion is a constant net thrust and steering is a simple lift force at
the rudder position proportional to the mirrored deflection and the
squared speed.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from math import cos, isfinite, sin

import numpy as np

from .allocation import ActuatorCommand, ActuatorLayout
from .controller import Pose, Velocities, wrap_angle
from .errors import NonFiniteState
from .forces import FullForceModel, actuator_forces

__all__ = [
    "VesselParams",
    "GustModel",
    "SimState",
    "step",
    "transition_step",
    "SensorModel",
]


@dataclass(frozen=True)
class VesselParams:
    """Rigid-body closure parameters for the 3 m scale model.

    ``inertia`` holds the effective (mass plus added-mass) values per axis
    (kg, kg, kg m^2); damping is per axis, linear (N s/m, N m s/rad) and
    quadratic (N s^2/m^2, N m s^2/rad^2). ``prop_thrust_at_zero_rudder``
    is the net surge drive with centered rudders at the reference 10 rps,
    used only in the transition stage, and ``steer_gain`` the transition
    steering-force coefficient (N per deg per (m/s)^2).
    """

    inertia: np.ndarray = field(default_factory=lambda: np.array([220.0, 280.0, 130.0]))
    lin_damping: np.ndarray = field(default_factory=lambda: np.array([2.0, 8.0, 6.0]))
    quad_damping: np.ndarray = field(default_factory=lambda: np.array([7.5, 40.0, 15.0]))
    l_pp: float = 3.0
    layout: ActuatorLayout = field(default_factory=ActuatorLayout)
    prop_thrust_at_zero_rudder: float = 2.0
    steer_gain: float = 0.25

    def __post_init__(self):
        inertia = np.asarray(self.inertia, dtype=float)
        lin = np.asarray(self.lin_damping, dtype=float)
        quad = np.asarray(self.quad_damping, dtype=float)
        if (inertia <= 0).any():
            raise ValueError("effective inertias must be strictly positive")
        if (lin < 0).any() or (quad < 0).any():
            raise ValueError("damping coefficients must be non-negative")
        object.__setattr__(self, "inertia", inertia)
        object.__setattr__(self, "lin_damping", lin)
        object.__setattr__(self, "quad_damping", quad)


@dataclass(frozen=True)
class GustModel:
    """Seeded piecewise-constant gust force pulses in the earth frame.

    Bursts start every ``burst_interval`` seconds and last
    ``burst_duration`` seconds; each burst has a random direction and a
    magnitude between half and full ``burst_amplitude``, derived from the
    seed and the burst index, so the force at any time is a pure function
    of the model and ``t``. ``mean_force`` acts at all times.
    """

    mean_force: np.ndarray = field(default_factory=lambda: np.zeros(2))
    burst_amplitude: float = 0.0
    burst_duration: float = 10.0
    burst_interval: float = 60.0
    seed: int = 0

    def __post_init__(self):
        mean = np.asarray(self.mean_force, dtype=float)
        if self.burst_amplitude < 0 or self.burst_duration < 0:
            raise ValueError("gust amplitudes and durations must be non-negative")
        if self.burst_interval <= 0:
            raise ValueError("burst_interval must be positive")
        object.__setattr__(self, "mean_force", mean)

    def force(self, t: float) -> np.ndarray:
        """Earth-frame gust force (N) at time ``t``."""
        out = self.mean_force.copy()
        if self.burst_amplitude > 0:
            k = int(t // self.burst_interval)
            if k >= 0 and t - k * self.burst_interval < self.burst_duration:
                rng = np.random.default_rng([self.seed, k])
                magnitude = self.burst_amplitude * rng.uniform(0.5, 1.0)
                angle = rng.uniform(0.0, 2.0 * np.pi)
                out += magnitude * np.array([np.cos(angle), np.sin(angle)])
        return out

    def burst_windows(self, t_end: float) -> list[tuple[float, float]]:
        """Burst (start, end) intervals that begin before ``t_end``."""
        if self.burst_amplitude <= 0:
            return []
        starts = np.arange(0.0, t_end, self.burst_interval)
        return [(float(s), float(s + self.burst_duration)) for s in starts]


@dataclass(frozen=True)
class SimState:
    """Full simulation state: pose, velocities, held actuator commands, time."""

    eta: Pose
    vel: Velocities
    actuators: ActuatorCommand
    t: float = 0.0


def _advance(state: SimState, fx: float, fy: float, nz: float,
             params: VesselParams, gust: GustModel | None, dt: float) -> SimState:
    """Explicit-Euler advance given actuator body forces (before damping)."""
    u, v, r = state.vel.u, state.vel.v, state.vel.r
    psi = state.eta.psi
    c, s = cos(psi), sin(psi)

    if gust is not None:
        gx, gy = gust.force(state.t)
        fx += c * gx + s * gy
        fy += -s * gx + c * gy

    d1, d2 = params.lin_damping, params.quad_damping
    fx -= d1[0] * u + d2[0] * u * abs(u)
    fy -= d1[1] * v + d2[1] * v * abs(v)
    nz -= d1[2] * r + d2[2] * r * abs(r)

    m = params.inertia
    u_new = u + dt * fx / m[0]
    v_new = v + dt * fy / m[1]
    r_new = r + dt * nz / m[2]

    x_new = state.eta.x0 + dt * (c * u - s * v)
    y_new = state.eta.y0 + dt * (s * u + c * v)
    psi_new = wrap_angle(psi + dt * r)

    for value in (u_new, v_new, r_new, x_new, y_new, psi_new):
        if not isfinite(value):
            raise NonFiniteState(f"state became non-finite at t={state.t:.2f}s")
    return replace(
        state,
        eta=Pose(x_new, y_new, psi_new),
        vel=Velocities(u_new, v_new, r_new),
        t=state.t + dt,
    )


def step(
    state: SimState,
    model: FullForceModel,
    layout: ActuatorLayout,
    params: VesselParams,
    gust: GustModel | None,
    dt: float,
) -> SimState:
    """Advance one integration step with the positioning-stage force model.

    Body forces compose from the actuator forces at their application
    points: the rudder force acts at ``x_fr`` and the bow thruster at
    ``x_b``, so both contribute to sway and the yaw moment. Deterministic
    given the gust seed.
    """
    if dt <= 0:
        raise ValueError(f"dt must be positive, got {dt}")
    cmd = state.actuators
    x_ct, y_ct, y_b = actuator_forces(model, cmd.delta_p, cmd.delta_s, cmd.n_b)
    fx = x_ct
    fy = y_ct + y_b
    nz = y_ct * layout.x_fr + y_b * layout.x_b
    return _advance(state, fx, fy, nz, params, gust, dt)


def transition_step(
    state: SimState,
    params: VesselParams,
    gust: GustModel | None,
    dt: float,
    thrust_scale: float = 1.0,
) -> SimState:
    """Advance one integration step with the transition-stage closure.

    Surge drive is the constant net propeller thrust (scaled by the squared
    revolution ratio when running below the reference rps); the mirrored
    rudder deflection produces a speed-dependent lateral force at the
    rudder position. The bow thruster is off in this stage.
    """
    if dt <= 0:
        raise ValueError(f"dt must be positive, got {dt}")
    cmd = state.actuators
    steer = 0.5 * (cmd.delta_p - cmd.delta_s)  # mirrored-pair deflection, deg
    u = state.vel.u
    y_rudder = -params.steer_gain * steer * u * abs(u)
    fx = params.prop_thrust_at_zero_rudder * thrust_scale
    fy = y_rudder
    nz = y_rudder * params.layout.x_fr
    return _advance(state, fx, fy, nz, params, gust, dt)


class SensorModel:
    """Gaussian measurement noise with an optional first-order low-pass.

    ``noise_std`` holds per-channel standard deviations for
    (x0, y0, psi, u, v, r); zeros give exact readings. With ``tau`` set,
    readings pass through a low-pass with that time constant, advanced by
    the wall time between reads. The internal generator is seeded, so a
    model replays the same noise sequence run after run.
    """

    def __init__(self, noise_std=(0, 0, 0, 0, 0, 0), seed: int = 0, tau: float | None = None):
        self.noise_std = np.asarray(noise_std, dtype=float)
        if self.noise_std.shape != (6,) or (self.noise_std < 0).any():
            raise ValueError("noise_std must be six non-negative entries")
        if tau is not None and tau <= 0:
            raise ValueError("low-pass time constant must be positive")
        self.seed = seed
        self.tau = tau
        self._rng = np.random.default_rng(seed)
        self._filtered: np.ndarray | None = None
        self._last_t: float | None = None

    def read(self, state: SimState) -> tuple[Pose, Velocities]:
        """Measured pose and velocities for the current state."""
        raw = np.concatenate([state.eta.as_array(), state.vel.as_array()])
        if self.noise_std.any():
            raw = raw + self._rng.normal(0.0, self.noise_std)
        if self.tau is not None:
            if self._filtered is None:
                self._filtered = raw.copy()
            else:
                dt = state.t - (self._last_t if self._last_t is not None else state.t)
                alpha = min(dt / self.tau, 1.0) if dt > 0 else 0.0
                self._filtered = self._filtered + alpha * (raw - self._filtered)
            self._last_t = state.t
            raw = self._filtered
        return Pose(raw[0], raw[1], raw[2]), Velocities(raw[3], raw[4], raw[5])
