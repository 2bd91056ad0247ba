"""Pose-error rotation and the decoupled PID force controller.

The pose error is formed in the earth-fixed frame, its yaw component
wrapped to (-pi, pi], and then rotated into the ship frame where the
required forces live. Each axis runs an independent PID channel whose
derivative term uses the measured body velocities instead of the error
derivative, so setpoint switches along a path do not kick the output.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from math import cos, pi, sin

import numpy as np

__all__ = [
    "Pose",
    "Velocities",
    "PidGains",
    "PidState",
    "wrap_angle",
    "rotation",
    "pose_error",
    "pid_step",
]


def wrap_angle(angle: float) -> float:
    """Wrap an angle (rad) to the half-open interval (-pi, pi]."""
    if -pi < angle <= pi:
        return angle
    return pi - (pi - angle) % (2.0 * pi)


@dataclass(frozen=True)
class Pose:
    """Earth-frame position (m) and yaw (rad, wrapped to (-pi, pi])."""

    x0: float
    y0: float
    psi: float

    def __post_init__(self):
        object.__setattr__(self, "psi", wrap_angle(self.psi))

    def as_array(self) -> np.ndarray:
        return np.array([self.x0, self.y0, self.psi])


@dataclass(frozen=True)
class Velocities:
    """Body-frame surge/sway velocity (m/s) and yaw rate (rad/s)."""

    u: float
    v: float
    r: float

    def as_array(self) -> np.ndarray:
        return np.array([self.u, self.v, self.r])


@dataclass(frozen=True)
class PidGains:
    """Diagonal PID gains per axis (surge, sway, yaw).

    Defaults are the pond-tuned values for the positioning stages:
    proportional gains drive the docking approach, derivative gains
    dominate position keeping, and the integral gains stay tiny because
    gust disturbances are short-lived.
    """

    k_p: np.ndarray = field(default_factory=lambda: np.array([4.0, 4.0, 4.0]))
    k_i: np.ndarray = field(default_factory=lambda: np.array([0.01, 0.01, 0.001]))
    k_d: np.ndarray = field(default_factory=lambda: np.array([25.0, 25.0, 30.0]))

    def __post_init__(self):
        for name in ("k_p", "k_i", "k_d"):
            gains = np.asarray(getattr(self, name), dtype=float)
            if gains.shape != (3,) or (gains < 0).any():
                raise ValueError(f"{name} must be three non-negative entries")
            object.__setattr__(self, name, gains)


@dataclass(frozen=True)
class PidState:
    """Accumulated error integral; reset at mission stage switches."""

    integral: np.ndarray = field(default_factory=lambda: np.zeros(3))

    def reset(self) -> "PidState":
        return PidState()


def rotation(psi: float) -> np.ndarray:
    """Rotation matrix from the ship frame to the earth frame about yaw."""
    c, s = cos(psi), sin(psi)
    return np.array([
        [c, -s, 0.0],
        [s, c, 0.0],
        [0.0, 0.0, 1.0],
    ])


def pose_error(eta: Pose, eta_d: Pose) -> np.ndarray:
    """Ship-frame pose error between the current and desired pose.

    The earth-frame difference has its yaw component wrapped so a path
    crossing the +/-pi seam takes the short way around, then the planar
    part is rotated into the ship frame.
    """
    e0 = np.array([
        eta_d.x0 - eta.x0,
        eta_d.y0 - eta.y0,
        wrap_angle(eta_d.psi - eta.psi),
    ])
    return rotation(eta.psi).T @ e0


def pid_step(
    gains: PidGains,
    state: PidState,
    e: np.ndarray,
    vel: Velocities,
    dt: float,
    sat_flags=None,
) -> tuple[np.ndarray, PidState]:
    """One controller update at the ship-frame error ``e``.

    Advances the error integral by ``e * dt`` on every axis whose previous
    force demand was not saturated (conditional-integration anti-windup),
    then returns the raw force demand and the new state. Pure in
    ``(state, inputs)``; rectangular integration matches the fixed-rate
    control loop.
    """
    if dt <= 0:
        raise ValueError(f"dt must be positive, got {dt}")
    e = np.asarray(e, dtype=float)
    advance = e * dt
    if sat_flags is not None:
        advance = np.where(np.asarray(sat_flags, dtype=bool), 0.0, advance)
    integral = state.integral + advance
    f_raw = gains.k_p * e + gains.k_i * integral - gains.k_d * vel.as_array()
    return f_raw, PidState(integral=integral)
