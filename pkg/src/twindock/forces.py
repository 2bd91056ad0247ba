"""Command-to-forces models for a twin-rudder ship with a bow thruster.

The twin rudders redirect constant forward propeller thrust, so the net
surge/sway force at zero ship speed is a strongly coupled function of the
rudder pair. Around the hover angle (the pair at which the net force
vanishes) the relationship is well approximated by a linear map, which is
fitted here by ordinary least squares on bollard-pull force measurements.
The bow thruster contributes a lateral force proportional to the signed
square of its revolution number, so the combined command-to-forces map
stays linear in the modified command vector.

Angles are degrees throughout this module; forces are Newtons.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field, replace
from importlib import resources
from math import pi, sqrt

import numpy as np

from .errors import (
    ConfigError,
    DegenerateScale,
    RangeViolation,
    RankDeficientDesign,
    SingularModel,
)

__all__ = [
    "PORT_RUDDER_SPAN",
    "STARBOARD_RUDDER_SPAN",
    "CfdSample",
    "RudderForceModel",
    "BowThrusterModel",
    "FullForceModel",
    "ScalingParams",
    "ResidualReport",
    "builtin_samples",
    "load_samples",
    "fit_rudder_model",
    "rudder_forces",
    "bow_thruster_force",
    "command_to_forces",
    "actuator_forces",
    "linearity_diagnostic",
    "inflow_velocity",
    "dynamic_pressure_scale",
    "nondimensionalize",
    "redimensionalize",
    "scale_model",
]

# Physical travel of each rudder (deg).
PORT_RUDDER_SPAN = (-105.0, 35.0)
STARBOARD_RUDDER_SPAN = (-105.0, 105.0)

# Condition-number guard for the normal-equations solve.
_MAX_DESIGN_CONDITION = 1.0e8

_DATA_RESOURCE = "cfd_bollard_forces.csv"


@dataclass(frozen=True)
class CfdSample:
    """One bollard-pull force measurement for a rudder-angle pair.

    Attributes
    ----------
    delta_p : float
        Port rudder angle (deg).
    delta_s : float
        Starboard rudder angle (deg).
    x_ct : float
        Total surge force from the propeller-rudder-hull interaction (N).
    y_ct : float
        Total sway force (N).
    """

    delta_p: float
    delta_s: float
    x_ct: float
    y_ct: float

    def __post_init__(self):
        lo, hi = PORT_RUDDER_SPAN
        if not lo <= self.delta_p <= hi:
            raise RangeViolation(f"port rudder angle {self.delta_p} outside {PORT_RUDDER_SPAN}")
        lo, hi = STARBOARD_RUDDER_SPAN
        if not lo <= self.delta_s <= hi:
            raise RangeViolation(
                f"starboard rudder angle {self.delta_s} outside {STARBOARD_RUDDER_SPAN}"
            )


def _samples_from_rows(rows) -> list[CfdSample]:
    return [CfdSample(float(r[0]), float(r[1]), float(r[2]), float(r[3])) for r in rows]


def builtin_samples() -> list[CfdSample]:
    """Return the embedded nine-point bollard-pull force dataset."""
    text = resources.files("twindock.data").joinpath(_DATA_RESOURCE).read_text()
    reader = csv.reader(text.strip().splitlines())
    next(reader)  # header
    return _samples_from_rows(reader)


def load_samples(path) -> list[CfdSample]:
    """Load force samples from a CSV with columns delta_p_deg, delta_s_deg, x_ct_n, y_ct_n."""
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        try:
            return _samples_from_rows(
                (row["delta_p_deg"], row["delta_s_deg"], row["x_ct_n"], row["y_ct_n"])
                for row in reader
            )
        except KeyError as exc:
            raise ConfigError(f"force CSV {path} is missing column {exc}") from exc


@dataclass(frozen=True)
class RudderForceModel:
    """Linear rudder-pair force model around the hover angle.

    ``forces = v_tilde @ (delta - hover_angle)`` where ``delta`` is the
    physical rudder pair in degrees. ``v_tilde`` is the fitted 2x2 slope
    matrix (N/deg), ``f_itcp`` the regression intercept (N, the predicted
    force at zero rudder angles), and ``hover_angle`` the zero of the
    fitted map (deg).
    """

    v_tilde: np.ndarray
    f_itcp: np.ndarray
    hover_angle: np.ndarray

    def __post_init__(self):
        residual = self.v_tilde @ self.hover_angle + self.f_itcp
        if np.abs(residual).max() > 1e-9:
            raise SingularModel(f"hover angle does not zero the model, residual {residual}")


@dataclass(frozen=True)
class BowThrusterModel:
    """Quadratic bow-thruster lateral force: ``Y = c_b * n * |n|``.

    Attributes
    ----------
    c_b : float
        Force coefficient (N s^2). The default puts full thrust at 1.0 N,
        equal to the sway saturation of the positioning controller.
    n_max : float
        Revolution limit (rps).
    """

    c_b: float = 1.0 / 729.0
    n_max: float = 27.0

    def __post_init__(self):
        if self.c_b <= 0 or self.n_max <= 0:
            raise RangeViolation("bow thruster coefficient and revolution limit must be positive")


@dataclass(frozen=True)
class FullForceModel:
    """Combined rudder-pair and bow-thruster command-to-forces map."""

    rudder: RudderForceModel
    bow: BowThrusterModel = field(default_factory=BowThrusterModel)

    @property
    def v_full(self) -> np.ndarray:
        """3x3 force coefficient matrix: rudder block plus the bow diagonal entry."""
        v = np.zeros((3, 3))
        v[:2, :2] = self.rudder.v_tilde
        v[2, 2] = self.bow.c_b
        return v

    @property
    def hover_angle(self) -> np.ndarray:
        return self.rudder.hover_angle


def fit_rudder_model(samples) -> RudderForceModel:
    """Fit the linear rudder-pair force model by ordinary least squares.

    Regresses surge and sway force each on (delta_p, delta_s) with an
    intercept, using the normal equations, then solves for the hover angle
    as the zero of the fitted affine map.

    Raises
    ------
    RankDeficientDesign
        Fewer than three samples, or collinear rudder-angle pairs.
    SingularModel
        The fitted slope matrix is not invertible.
    """
    samples = list(samples)
    if len(samples) < 3:
        raise RankDeficientDesign(f"need at least 3 samples, got {len(samples)}")
    angles = np.array([[s.delta_p, s.delta_s] for s in samples])
    targets = np.array([[s.x_ct, s.y_ct] for s in samples])
    design = np.column_stack([angles, np.ones(len(samples))])
    normal = design.T @ design
    if np.linalg.cond(normal) > _MAX_DESIGN_CONDITION:
        raise RankDeficientDesign("design matrix is singular or nearly collinear")
    coef = np.linalg.solve(normal, design.T @ targets)  # rows: d/d_p, d/d_s, intercept
    v_tilde = coef[:2].T
    f_itcp = coef[2]
    det = np.linalg.det(v_tilde)
    if abs(det) < 1e-12:
        raise SingularModel(f"fitted slope matrix is singular (det={det:g})")
    hover = -np.linalg.solve(v_tilde, f_itcp)
    return RudderForceModel(v_tilde=v_tilde, f_itcp=f_itcp, hover_angle=hover)


def rudder_forces(model: RudderForceModel, delta) -> np.ndarray:
    """Surge/sway force (N) for a physical rudder pair ``delta`` (deg).

    Exactly zero at the hover angle. No clamping is applied here; range
    enforcement is the allocation layer's job.
    """
    return model.v_tilde @ (np.asarray(delta, dtype=float) - model.hover_angle)


def bow_thruster_force(model: BowThrusterModel, n_b: float) -> float:
    """Lateral bow-thruster force (N) at revolution ``n_b`` (rps, signed)."""
    if abs(n_b) > model.n_max:
        raise RangeViolation(f"bow thruster revolution {n_b} exceeds +/-{model.n_max} rps")
    return model.c_b * n_b * abs(n_b)


def command_to_forces(model: FullForceModel, u) -> np.ndarray:
    """Actuator forces (X_ct, Y_ct, Y_bow) for a modified command vector.

    ``u`` holds the hover-relative rudder pair (deg) and the signed-squared
    bow revolution; the map is linear and preserves the origin.
    """
    return model.v_full @ np.asarray(u, dtype=float)


def actuator_forces(model: FullForceModel, delta_p: float, delta_s: float, n_b: float) -> np.ndarray:
    """Actuator forces (X_ct, Y_ct, Y_bow) for physical commands."""
    f_ct = rudder_forces(model.rudder, (delta_p, delta_s))
    return np.array([f_ct[0], f_ct[1], bow_thruster_force(model.bow, n_b)])


@dataclass(frozen=True)
class ResidualReport:
    """Per-sample and aggregate prediction residuals of a rudder force model."""

    per_sample: np.ndarray  # (n, 2) observed minus predicted, N
    max_abs: float
    mean_abs: float


def linearity_diagnostic(model: RudderForceModel, extended) -> ResidualReport:
    """Evaluate the fitted plane against user-supplied force samples.

    Intended for checking how far the linear model can be trusted outside
    the angle range it was fitted on. Pure function; the model is not
    refitted.
    """
    extended = list(extended)
    if not extended:
        raise ValueError("need at least one sample to diagnose")
    deltas = np.array([[s.delta_p, s.delta_s] for s in extended])
    observed = np.array([[s.x_ct, s.y_ct] for s in extended])
    predicted = (deltas - model.hover_angle) @ model.v_tilde.T
    residuals = observed - predicted
    abs_res = np.abs(residuals)
    return ResidualReport(
        per_sample=residuals,
        max_abs=float(abs_res.max()),
        mean_abs=float(abs_res.mean()),
    )


@dataclass(frozen=True)
class ScalingParams:
    """Rudder and propeller properties used to nondimensionalize forces.

    No defaults are shipped: transferring the fitted model to another hull
    is an estimate whose inputs the user must own.

    Attributes
    ----------
    rho : float
        Water density (kg/m^3).
    a_r : float
        Rudder sectional area (m^2).
    k_x : float
        Inflow acceleration coefficient at the rudder.
    c_1 : float
        Intercept of the propeller thrust-coefficient regression.
    mu : float
        Ratio of propeller diameter to rudder height.
    d_p : float
        Propeller diameter (m).
    n : float
        Propeller revolution number (rps).
    """

    rho: float
    a_r: float
    k_x: float
    c_1: float
    mu: float
    d_p: float
    n: float

    def __post_init__(self):
        for name in ("rho", "a_r", "k_x", "c_1", "mu", "d_p", "n"):
            if getattr(self, name) <= 0:
                raise DegenerateScale(f"scaling parameter {name} must be strictly positive")


def inflow_velocity(p: ScalingParams) -> float:
    """Longitudinal fluid inflow velocity at the rudder (m/s), linear in n."""
    return p.k_x * sqrt(8.0 * p.c_1 * p.mu / pi) * p.n * p.d_p


def dynamic_pressure_scale(p: ScalingParams) -> float:
    """Force denominator ``rho * a_r * u_inflow**2`` (N)."""
    return p.rho * p.a_r * inflow_velocity(p) ** 2


def nondimensionalize(forces, p: ScalingParams) -> np.ndarray:
    """Divide surge/sway forces by the rudder dynamic-pressure scale."""
    scale = dynamic_pressure_scale(p)
    if scale <= 0:
        raise DegenerateScale(f"dynamic pressure scale {scale:g} is not positive")
    return np.asarray(forces, dtype=float) / scale


def redimensionalize(forces, p: ScalingParams) -> np.ndarray:
    """Inverse of :func:`nondimensionalize`."""
    return np.asarray(forces, dtype=float) * dynamic_pressure_scale(p)


def scale_model(model: FullForceModel, factor: float) -> FullForceModel:
    """Scale every force coefficient by ``factor`` (> 0).

    The intercept is rescaled together with the slope matrix, so the hover
    angle (the zero of the map) is unchanged and the hover identity keeps
    holding exactly; forces at any command scale homogeneously.
    """
    if factor <= 0:
        raise DegenerateScale(f"scale factor must be positive, got {factor}")
    rudder = replace(
        model.rudder,
        v_tilde=model.rudder.v_tilde * factor,
        f_itcp=model.rudder.f_itcp * factor,
    )
    bow = replace(model.bow, c_b=model.bow.c_b * factor)
    return FullForceModel(rudder=rudder, bow=bow)
