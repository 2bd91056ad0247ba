"""Guidance: nearest-waypoint search, lookahead setpoint, LOS heading."""

from math import atan2, cos, pi, sin

import numpy as np
import pytest

import twindock as td
from twindock.controller import wrap_angle


def brute_force_nearest(db, eta):
    """Reference scan: weighted quadratic form over every row, ties forward."""
    best, best_cost = 0, None
    point = eta.as_array()
    for k, row in enumerate(db.rows):
        d = row - point
        d[2] = wrap_angle(d[2])
        cost = float(db.weight @ (d * d))
        if best_cost is None or cost <= best_cost:
            best, best_cost = k, cost
    return best


def straight_db(n=11, spacing=1.0, delta_k=2):
    rows = np.column_stack([
        np.arange(n) * spacing,
        np.zeros(n),
        np.zeros(n),
    ])
    return td.WaypointDatabase(rows=rows, delta_k=delta_k)


class TestNearestIndex:
    def test_exact_row_match(self):
        db = straight_db(5)
        assert td.nearest_index(db, td.Pose(3.0, 0.0, 0.0)) == 3

    def test_tie_breaks_forward(self):
        # Ship exactly between rows 1 and 2: pick the later one.
        db = straight_db(5)
        assert td.nearest_index(db, td.Pose(1.5, 0.0, 0.0)) == 2
        # Ship on row 1 of a coarser path, equidistant from rows 0 and 2.
        wide = straight_db(5, spacing=2.0)
        assert td.nearest_index(wide, td.Pose(3.0, 0.0, 0.0)) == 2

    def test_yaw_ignored_with_default_weight(self):
        db = straight_db(5)
        assert td.nearest_index(db, td.Pose(2.0, 0.1, 2.9)) == 2

    def test_yaw_counts_with_nonzero_weight(self):
        rows = np.array([[0.0, 0.0, 0.0], [0.0, 0.0, 3.0]])
        db = td.WaypointDatabase(rows=rows, delta_k=1, weight=np.array([1.0, 1.0, 1.0]))
        assert td.nearest_index(db, td.Pose(0.0, 0.0, 2.8)) == 1

    def test_matches_brute_force_on_random_instances(self):
        rng = np.random.default_rng(17)
        for _ in range(300):
            q = rng.integers(1, 40)
            rows = np.column_stack([
                rng.uniform(-10, 10, q),
                rng.uniform(-10, 10, q),
                rng.uniform(-pi, pi, q),
            ])
            weight = rng.choice([0.0, 0.5, 1.0, 2.0], 3)
            if not weight.any():
                weight = np.array([1.0, 1.0, 0.0])
            db = td.WaypointDatabase(rows=rows, delta_k=1, weight=weight)
            eta = td.Pose(*rng.uniform(-10, 10, 2), rng.uniform(-pi, pi))
            assert td.nearest_index(db, eta) == brute_force_nearest(db, eta)

    def test_weight_scaling_invariance(self):
        rng = np.random.default_rng(23)
        rows = np.column_stack([rng.uniform(-5, 5, 20), rng.uniform(-5, 5, 20), np.zeros(20)])
        for scale in (0.1, 3.0, 1e4):
            db1 = td.WaypointDatabase(rows=rows, delta_k=1)
            db2 = td.WaypointDatabase(rows=rows, delta_k=1, weight=np.array([1.0, 1.0, 0.0]) * scale)
            for _ in range(50):
                eta = td.Pose(*rng.uniform(-5, 5, 2), 0.0)
                assert td.nearest_index(db1, eta) == td.nearest_index(db2, eta)


class TestDesiredPose:
    def test_lookahead_selects_rows_ahead(self):
        db = straight_db(10, delta_k=2)
        pose = td.desired_pose(db, td.Pose(0.0, 0.0, 0.0))
        assert pose.x0 == db.rows[2, 0]

    def test_end_clamp(self):
        db = straight_db(10, delta_k=5)
        pose = td.desired_pose(db, td.Pose(8.0, 0.0, 0.0))
        assert pose.x0 == db.rows[-1, 0]

    def test_standing_setpoint_at_final_row(self):
        db = straight_db(10, delta_k=3)
        final = td.Pose(*db.rows[-1])
        for _ in range(5):
            assert td.desired_pose(db, final) == final

    def test_monotone_forward_progress(self):
        db = straight_db(30, spacing=0.5, delta_k=4)
        last = -1
        for x in np.linspace(0.0, 15.0, 200):
            i = min(td.nearest_index(db, td.Pose(x, 0.02, 0.0)) + db.delta_k, len(db) - 1)
            assert i >= last
            last = i

    def test_validation(self):
        with pytest.raises(ValueError):
            td.WaypointDatabase(rows=np.zeros((0, 3)))
        with pytest.raises(ValueError):
            td.WaypointDatabase(rows=np.zeros((3, 3)), delta_k=0)
        with pytest.raises(ValueError):
            td.WaypointDatabase(rows=np.zeros((3, 3)), weight=np.array([1.0, -1.0, 0.0]))


class TestLosHeading:
    def test_on_track_heads_along_path(self):
        db = straight_db(21)
        heading = td.los_heading(td.Pose(5.0, 0.0, 0.0), db, td.LosParams(lookahead_distance=3.0))
        assert heading == pytest.approx(0.0, abs=1e-12)

    def test_offset_steers_back_toward_path(self):
        db = straight_db(21)
        heading = td.los_heading(td.Pose(5.0, 0.8, 0.0), db, td.LosParams(lookahead_distance=3.0))
        assert heading < 0.0
        assert heading == pytest.approx(atan2(-0.8, 3.0), abs=1e-9)

    def test_large_lookahead_approaches_path_direction(self):
        rows = np.column_stack([np.arange(20.0), np.arange(20.0), np.zeros(20)])  # 45 deg line
        db = td.WaypointDatabase(rows=rows, delta_k=1)
        heading = td.los_heading(td.Pose(3.0, 3.0 + 0.5, 0.0), db, td.LosParams(lookahead_distance=1e6))
        assert heading == pytest.approx(pi / 4, abs=1e-4)

    def test_extends_past_final_waypoint(self):
        db = straight_db(5)
        heading = td.los_heading(td.Pose(4.0, 0.0, 0.0), db, td.LosParams(lookahead_distance=10.0))
        assert heading == pytest.approx(0.0, abs=1e-12)

    def test_single_waypoint_gives_bearing(self):
        db = td.WaypointDatabase(rows=np.array([[2.0, 2.0, 0.0]]), delta_k=1)
        heading = td.los_heading(td.Pose(0.0, 0.0, 0.0), db, td.LosParams())
        assert heading == pytest.approx(pi / 4, abs=1e-12)


class TestHeadingRudderCommand:
    def test_mirrored_pair(self):
        p = td.LosParams(heading_kp=60.0, heading_kd=0.0)
        dp, ds = td.heading_rudder_command(0.3, td.Pose(0, 0, 0.0), td.Velocities(0, 0, 0), p)
        assert dp == -ds
        assert dp > 0

    def test_clamped_to_overlap(self):
        p = td.LosParams(heading_kp=1000.0, heading_kd=0.0)
        dp, ds = td.heading_rudder_command(3.0, td.Pose(0, 0, 0.0), td.Velocities(0, 0, 0), p)
        assert (dp, ds) == (35.0, -35.0)

    def test_rate_damping_opposes_turn(self):
        p = td.LosParams(heading_kp=0.0, heading_kd=100.0)
        dp, _ = td.heading_rudder_command(0.0, td.Pose(0, 0, 0.0), td.Velocities(0, 0, 0.1), p)
        assert dp < 0


class TestWaypointFile:
    def test_load_round_trip(self, tmp_path):
        rows = np.array([[0.0, 0.0, 0.0], [1.0, 0.5, 0.1], [2.0, 1.0, 0.2]])
        path = tmp_path / "path.txt"
        np.savetxt(path, rows)
        db = td.load_waypoints(path, delta_k=2)
        assert np.allclose(db.rows, rows)
        assert db.delta_k == 2

    def test_single_row_file(self, tmp_path):
        path = tmp_path / "one.txt"
        path.write_text("1.0 2.0 0.5\n")
        db = td.load_waypoints(path)
        assert db.rows.shape == (1, 3)
