"""Waypoint reference selection and transition-stage steering guidance.

The reference module picks the active setpoint from a time-ordered
waypoint database: find the waypoint nearest the ship under a weighted
quadratic form (yaw weight zero by default, so only position counts), then
look a fixed number of rows ahead. Once the lookahead clamps at the final
row, the output is a standing setpoint, which is exactly the
position-keeping condition at the dock.

For the transition stage, where the positioning controller is inactive and
the ship sails at speed, a lookahead line-of-sight law computes the
desired heading and a PD loop turns it into a mirrored rudder-pair
command.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from math import atan2

import numpy as np

from .controller import Pose, Velocities, wrap_angle

__all__ = [
    "TRANSITION_STEER_LIMIT",
    "WaypointDatabase",
    "LosParams",
    "load_waypoints",
    "nearest_index",
    "desired_pose",
    "los_heading",
    "heading_rudder_command",
]

# Mirrored steering deflection bound (deg): the overlap of the two rudder
# travel ranges in the transition stage.
TRANSITION_STEER_LIMIT = 35.0


@dataclass(frozen=True)
class WaypointDatabase:
    """Time-ordered desired poses with lookahead selection parameters.

    Attributes
    ----------
    rows : ndarray, shape (q, 3)
        Reference poses (x0 m, y0 m, psi rad), ordered in time.
    delta_k : int
        Lookahead steps ahead of the nearest waypoint. Rule of thumb:
        large on straight paths, small on curved ones.
    weight : ndarray, shape (3,)
        Diagonal weights of the nearest-waypoint quadratic form. The
        default (1, 1, 0) considers positions only.
    """

    rows: np.ndarray
    delta_k: int = 10
    weight: np.ndarray = field(default_factory=lambda: np.array([1.0, 1.0, 0.0]))

    def __post_init__(self):
        rows = np.atleast_2d(np.asarray(self.rows, dtype=float))
        if rows.shape[0] < 1 or rows.shape[1] != 3:
            raise ValueError(f"waypoint array must be (q, 3) with q >= 1, got {rows.shape}")
        weight = np.asarray(self.weight, dtype=float)
        if weight.shape != (3,) or (weight < 0).any():
            raise ValueError("weight must be three non-negative entries")
        if self.delta_k < 1:
            raise ValueError(f"delta_k must be a positive integer, got {self.delta_k}")
        object.__setattr__(self, "rows", rows)
        object.__setattr__(self, "weight", weight)

    def __len__(self) -> int:
        return self.rows.shape[0]

    @property
    def final_pose(self) -> Pose:
        return Pose(*self.rows[-1])


def load_waypoints(path, delta_k: int = 10, weight=(1.0, 1.0, 0.0)) -> WaypointDatabase:
    """Load a plain-text waypoint table with columns ``x0_m y0_m psi_rad``."""
    rows = np.loadtxt(path, ndmin=2)
    return WaypointDatabase(rows=rows, delta_k=delta_k, weight=np.asarray(weight, dtype=float))


def nearest_index(db: WaypointDatabase, eta: Pose) -> int:
    """Index of the waypoint nearest the ship under the weighted form.

    The yaw residual is wrapped before weighting (irrelevant at the
    default zero yaw weight). Ties break toward the larger index so the
    setpoint never oscillates backwards on dense paths.
    """
    diff = db.rows - eta.as_array()
    diff[:, 2] = np.array([wrap_angle(d) for d in diff[:, 2]])
    cost = (diff * diff) @ db.weight
    return int(len(cost) - 1 - np.argmin(cost[::-1]))


def desired_pose(db: WaypointDatabase, eta: Pose) -> Pose:
    """Active setpoint: ``delta_k`` rows past the nearest waypoint.

    Clamps at the final row, which then remains the standing setpoint for
    position keeping.
    """
    i = min(nearest_index(db, eta) + db.delta_k, len(db) - 1)
    return Pose(*db.rows[i])


@dataclass(frozen=True)
class LosParams:
    """Line-of-sight guidance parameters for the transition stage.

    ``lookahead_distance`` is the along-path distance to the aim point;
    ``heading_kp``/``heading_kd`` are the PD gains (deg per rad, deg per
    rad/s) of the steering loop; ``acceptance_radius`` is the arrival
    tolerance consumers may use for switching decisions.
    """

    lookahead_distance: float = 2.0
    heading_kp: float = 60.0
    heading_kd: float = 240.0
    acceptance_radius: float = 0.5

    def __post_init__(self):
        if self.lookahead_distance <= 0:
            raise ValueError("lookahead_distance must be positive")


def _project_on_path(points: np.ndarray, x: float, y: float) -> tuple[float, np.ndarray, float]:
    """Arc length, segment directions and total length for the closest path point."""
    seg = np.diff(points, axis=0)
    lengths = np.hypot(seg[:, 0], seg[:, 1])
    keep = lengths > 0
    seg, lengths = seg[keep], lengths[keep]
    starts = points[:-1][keep]
    rel = np.array([x, y]) - starts
    t = np.clip((rel * seg).sum(axis=1) / lengths**2, 0.0, 1.0)
    closest = starts + t[:, None] * seg
    d2 = ((np.array([x, y]) - closest) ** 2).sum(axis=1)
    k = int(np.argmin(d2))
    cum = np.concatenate([[0.0], np.cumsum(lengths)])
    return cum[k] + t[k] * lengths[k], np.column_stack([seg, lengths]), cum[-1]


def los_heading(eta: Pose, db: WaypointDatabase, p: LosParams) -> float:
    """Desired heading (rad): bearing to the path point a lookahead ahead.

    Projects the ship onto the waypoint polyline, advances the lookahead
    distance along it (extending past the final waypoint along the last
    segment), and returns the bearing from the ship to that point.
    """
    points = db.rows[:, :2]
    if len(db) == 1 or np.allclose(points, points[0]):
        target = points[-1]
    else:
        s0, segments, total = _project_on_path(points, eta.x0, eta.y0)
        s_target = s0 + p.lookahead_distance
        if s_target >= total:
            direction = segments[-1, :2] / segments[-1, 2]
            target = points[-1] + (s_target - total) * direction
        else:
            cum = np.concatenate([[0.0], np.cumsum(segments[:, 2])])
            k = int(np.searchsorted(cum, s_target, side="right") - 1)
            k = min(k, len(segments) - 1)
            frac = (s_target - cum[k]) / segments[k, 2]
            # segment starts are cumulative displacements from the first point
            target = points[0] + segments[:k, :2].sum(axis=0) + frac * segments[k, :2]
    return atan2(target[1] - eta.y0, target[0] - eta.x0)


def heading_rudder_command(
    psi_d: float,
    eta: Pose,
    vel: Velocities,
    p: LosParams,
    limit: float = TRANSITION_STEER_LIMIT,
) -> tuple[float, float]:
    """Mirrored rudder-pair command (deg) tracking a desired heading.

    PD on the wrapped heading error with yaw-rate damping; the pair is
    clamped to the overlap of the two rudder ranges so either rudder stays
    inside its transition-stage travel.
    """
    steer = p.heading_kp * wrap_angle(psi_d - eta.psi) - p.heading_kd * vel.r
    steer = min(max(steer, -limit), limit)
    return steer, -steer
