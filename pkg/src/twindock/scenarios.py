"""Built-in docking scenarios and waypoint path builders.

Three scenario presets ship with the library, mirroring the structure of
the pond experiments: a straight approach, a straight approach with a
farther receiving point and reduced transition thrust under gust pulses,
and a U-turn docking. The waypoint tables are synthetic; paths are
ingested, never planned here.
"""

from __future__ import annotations

import numpy as np

from .controller import Pose, wrap_angle
from .errors import ConfigError
from .harness import ScenarioConfig
from .vessel import GustModel

__all__ = [
    "SCENARIO_NAMES",
    "straight_path",
    "uturn_path",
    "builtin_config",
]

SCENARIO_NAMES = ("a", "b", "c")


def straight_path(length: float = 22.0, spacing: float = 0.2, heading: float = 0.0,
                  start=(0.0, 0.0)) -> np.ndarray:
    """Straight waypoint table from ``start`` along ``heading`` (rad)."""
    s = np.arange(0.0, length + spacing / 2, spacing)
    x = start[0] + s * np.cos(heading)
    y = start[1] + s * np.sin(heading)
    psi = np.full_like(s, wrap_angle(heading))
    return np.column_stack([x, y, psi])


def uturn_path(radius: float = 4.0, spacing: float = 0.15, tail: float = 1.5,
               start=(0.0, 0.0)) -> np.ndarray:
    """Half-circle turn to port followed by a straight run-out to the dock.

    Starts at ``start`` heading +x; ends heading -x after a yaw change of
    pi. Waypoint yaw follows the path tangent.
    """
    arc = np.arange(0.0, np.pi * radius + spacing / 2, spacing)
    psi = arc / radius
    x = start[0] + radius * np.sin(psi)
    y = start[1] + radius * (1.0 - np.cos(psi))
    rows = [np.column_stack([x, y, [wrap_angle(p) for p in psi]])]
    if tail > 0:
        s = np.arange(spacing, tail + spacing / 2, spacing)
        tail_x = x[-1] - s
        tail_y = np.full_like(s, y[-1])
        rows.append(np.column_stack([tail_x, tail_y, np.full_like(s, wrap_angle(np.pi))]))
    return np.vstack(rows)


def builtin_config(name: str, seed: int = 0) -> ScenarioConfig:
    """Return one of the shipped scenario configurations ('a', 'b' or 'c')."""
    if name == "a":
        # Straight approach at full transition thrust, no disturbance.
        path = straight_path(length=22.0, spacing=0.2)
        receiving_index = int(round(14.0 / 0.2))
        return ScenarioConfig(
            name="a",
            waypoints=path,
            delta_k=10,
            receiving_index=receiving_index,
            keeping_duration=600.0,
            max_time=900.0,
            transition_n_prop=10.0,
            gust=None,
            start_pose=Pose(0.0, 0.0, 0.0),
            start_speed=0.1,
            seed=seed,
        )
    if name == "b":
        # Farther receiving point, reduced transition thrust, gust pulses.
        path = straight_path(length=22.0, spacing=0.2)
        receiving_index = int(round(10.0 / 0.2))
        return ScenarioConfig(
            name="b",
            waypoints=path,
            delta_k=10,
            receiving_index=receiving_index,
            keeping_duration=240.0,
            max_time=900.0,
            transition_n_prop=7.0,
            gust=GustModel(
                mean_force=np.zeros(2),
                burst_amplitude=0.9,
                burst_duration=10.0,
                burst_interval=60.0,
                seed=seed,
            ),
            start_pose=Pose(0.0, 0.0, 0.0),
            start_speed=0.1,
            seed=seed,
        )
    if name == "c":
        # U-turn docking: the run starts at the receiving point, so the
        # positioning controller is active from the first record.
        path = uturn_path(radius=3.5, spacing=0.3, tail=1.5)
        return ScenarioConfig(
            name="c",
            waypoints=path,
            delta_k=3,
            receiving_index=0,
            receiving_radius=1.5,
            keeping_duration=120.0,
            max_time=900.0,
            transition_n_prop=10.0,
            gust=None,
            start_pose=Pose(0.0, 0.0, 0.0),
            start_speed=0.1,
            seed=seed,
        )
    raise ConfigError(f"unknown scenario {name!r}; choose from {SCENARIO_NAMES}")
