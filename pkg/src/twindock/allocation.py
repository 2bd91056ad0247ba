"""Control forces allocation: required forces to actuator commands.

The configuration matrix turns actuator forces into body surge/sway forces
and the yaw moment from their application points. Because the rudder force
coefficient matrix is nondiagonal, allocation goes through the inverse of
the combined 3x3 map rather than per-actuator division. The inverse is
computed once and cached; the downstream mapping to physical commands adds
the hover offset, range clamping and rudder rate limiting.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from math import sqrt

import numpy as np

from .errors import SingularAllocation
from .forces import FullForceModel

__all__ = [
    "FORCE_SATURATION",
    "ActuatorLayout",
    "ActuatorLimits",
    "ActuatorCommand",
    "RequiredForces",
    "TRANSITION_LIMITS",
    "POSITIONING_LIMITS",
    "limits_preset",
    "Allocator",
    "build_z",
    "to_physical",
    "saturate_forces",
]

# Saturation box for the required forces (surge N, sway N, yaw moment N m).
FORCE_SATURATION = np.array([
    [-1.5, 0.8],
    [-1.0, 1.0],
    [-1.7, 1.5],
])


@dataclass(frozen=True)
class ActuatorLayout:
    """Longitudinal actuator positions relative to the center of gravity (m).

    ``x_fr`` is where the combined rudder force acts (negative: aft),
    ``x_b`` the bow thruster position (positive: forward). Equal positions
    would make sway force and yaw moment indistinguishable.
    """

    x_fr: float = -1.657
    x_b: float = 1.263

    def __post_init__(self):
        if self.x_fr == self.x_b:
            raise SingularAllocation("rudder and bow thruster positions must differ")

    def config_matrix(self) -> np.ndarray:
        """3x3 map from actuator forces (X_ct, Y_ct, Y_bow) to body forces."""
        return np.array([
            [1.0, 0.0, 0.0],
            [0.0, 1.0, 1.0],
            [0.0, self.x_fr, self.x_b],
        ])


@dataclass(frozen=True)
class ActuatorLimits:
    """Admissible actuator ranges for one mission stage.

    Attributes
    ----------
    delta_p_range, delta_s_range : tuple of float
        Port/starboard rudder angle intervals (deg).
    rudder_rate : float
        Maximum rudder slew rate (deg/s).
    n_b_range : tuple of float
        Bow thruster revolution interval (rps); (0, 0) disables it.
    n_prop : float
        Constant propeller revolution (rps) in this stage.
    """

    delta_p_range: tuple[float, float]
    delta_s_range: tuple[float, float]
    rudder_rate: float
    n_b_range: tuple[float, float]
    n_prop: float


# Transition stage: full rudder travel, bow thruster off.
TRANSITION_LIMITS = ActuatorLimits(
    delta_p_range=(-105.0, 35.0),
    delta_s_range=(-35.0, 105.0),
    rudder_rate=23.0,
    n_b_range=(0.0, 0.0),
    n_prop=10.0,
)

# Docking and position-keeping: rudders restricted to the band around the
# hover angle where the linear force model holds, bow thruster live.
POSITIONING_LIMITS = ActuatorLimits(
    delta_p_range=(-105.0, -60.0),
    delta_s_range=(60.0, 105.0),
    rudder_rate=23.0,
    n_b_range=(-27.0, 27.0),
    n_prop=10.0,
)

_PRESETS = {"transition": TRANSITION_LIMITS, "positioning": POSITIONING_LIMITS}


def limits_preset(name: str, n_prop: float | None = None) -> ActuatorLimits:
    """Return a built-in limits preset, optionally overriding the propeller rps."""
    try:
        preset = _PRESETS[name]
    except KeyError:
        raise KeyError(f"unknown limits preset {name!r}; choose from {sorted(_PRESETS)}")
    if n_prop is not None:
        preset = replace(preset, n_prop=n_prop)
    return preset


@dataclass(frozen=True)
class ActuatorCommand:
    """Physical actuator commands: rudder pair (deg) and bow revolution (rps)."""

    delta_p: float
    delta_s: float
    n_b: float

    def as_array(self) -> np.ndarray:
        return np.array([self.delta_p, self.delta_s, self.n_b])


@dataclass(frozen=True)
class RequiredForces:
    """Saturated force demand: surge (N), sway (N), yaw moment (N m)."""

    x_req: float
    y_req: float
    n_req: float

    def as_array(self) -> np.ndarray:
        return np.array([self.x_req, self.y_req, self.n_req])


def saturate_forces(f_raw, box=None) -> tuple[RequiredForces, np.ndarray]:
    """Clamp a raw force demand into the saturation box.

    Returns the clamped forces and a per-axis flag array marking which
    components were clipped; the controller freezes integration on flagged
    axes to avoid windup. ``box`` is a (3, 2) array of per-axis intervals,
    defaulting to the stock saturation values.
    """
    if box is None:
        box = FORCE_SATURATION
    f_raw = np.asarray(f_raw, dtype=float)
    clamped = np.clip(f_raw, box[:, 0], box[:, 1])
    flags = clamped != f_raw
    return RequiredForces(*clamped), flags


class Allocator:
    """Caches ``Z = T V`` and its inverse for repeated force inversion.

    Parameters
    ----------
    layout : ActuatorLayout
        Actuator application points building the configuration matrix.
    model : FullForceModel
        Command-to-forces map supplying the force coefficient matrix.

    Raises
    ------
    SingularAllocation
        If ``|det Z| < 1e-12``, i.e. coincident actuator positions, a dead
        bow thruster, or a degenerate rudder force matrix.
    """

    def __init__(self, layout: ActuatorLayout, model: FullForceModel):
        self.layout = layout
        self.model = model
        self.z = layout.config_matrix() @ model.v_full
        if abs(np.linalg.det(self.z)) < 1e-12:
            raise SingularAllocation(
                "combined allocation matrix is singular; check actuator positions "
                "and force coefficients"
            )
        self.z_inv = np.linalg.inv(self.z)

    def allocate(self, f_req) -> np.ndarray:
        """Modified actuator command realizing a saturated force demand.

        Returns the hover-relative rudder pair (deg) and the signed-squared
        bow revolution. Exact inverse: pushing the result back through the
        configuration and force matrices reproduces ``f_req`` before any
        clamping.
        """
        if isinstance(f_req, RequiredForces):
            f_req = f_req.as_array()
        return self.z_inv @ np.asarray(f_req, dtype=float)


def build_z(layout: ActuatorLayout, model: FullForceModel) -> Allocator:
    """Build the cached allocator for a layout/model pair."""
    return Allocator(layout, model)


def _clip(value: float, interval: tuple[float, float]) -> float:
    return min(max(value, interval[0]), interval[1])


def to_physical(
    u,
    model: FullForceModel,
    limits: ActuatorLimits,
    previous: ActuatorCommand,
    dt: float,
) -> ActuatorCommand:
    """Map a modified command to a clamped, rate-limited physical command.

    The rudder pair gets the hover offset added, is clamped to the stage
    range, then slew-limited against ``previous``. The bow channel takes
    the signed square root of its modified value and is clamped; it has no
    rate limit.
    """
    if dt <= 0:
        raise ValueError(f"dt must be positive, got {dt}")
    u = np.asarray(u, dtype=float)
    hover = model.rudder.hover_angle
    max_step = limits.rudder_rate * dt

    delta_p = _clip(hover[0] + u[0], limits.delta_p_range)
    delta_s = _clip(hover[1] + u[1], limits.delta_s_range)
    delta_p = previous.delta_p + _clip(delta_p - previous.delta_p, (-max_step, max_step))
    delta_s = previous.delta_s + _clip(delta_s - previous.delta_s, (-max_step, max_step))

    n_b = _clip((1.0 if u[2] >= 0 else -1.0) * sqrt(abs(u[2])), limits.n_b_range)
    return ActuatorCommand(delta_p=delta_p, delta_s=delta_s, n_b=n_b)
