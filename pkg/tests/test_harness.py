"""Scenario harness: stage machine, trace contract, config and CLI."""

from dataclasses import replace
from math import hypot

import numpy as np
import pytest

import twindock as td
from twindock.allocation import FORCE_SATURATION
from twindock.cli import main as cli_main
from twindock.harness import TRACE_FIELDS, STAGES
from twindock.scenarios import builtin_config, straight_path


@pytest.fixture(scope="module")
def result_a():
    return td.run_scenario(builtin_config("a"))


@pytest.fixture(scope="module")
def result_c():
    return td.run_scenario(builtin_config("c"))


def active_limits(stage):
    return td.limits_preset("transition") if stage == "transition" else td.limits_preset("positioning")


def assert_limits_respected(records):
    for rec in records:
        limits = active_limits(rec.stage)
        assert limits.delta_p_range[0] <= rec.delta_p <= limits.delta_p_range[1]
        assert limits.delta_s_range[0] <= rec.delta_s <= limits.delta_s_range[1]
        assert limits.n_b_range[0] <= rec.n_b <= limits.n_b_range[1]
        assert FORCE_SATURATION[0, 0] <= rec.x_req <= FORCE_SATURATION[0, 1]
        assert FORCE_SATURATION[1, 0] <= rec.y_req <= FORCE_SATURATION[1, 1]
        assert FORCE_SATURATION[2, 0] <= rec.n_req <= FORCE_SATURATION[2, 1]


def assert_rate_bound(records, dt=0.1):
    bound = 23.0 * dt + 1e-12
    for prev, rec in zip(records, records[1:]):
        if prev.stage == rec.stage:
            assert abs(rec.delta_p - prev.delta_p) <= bound
            assert abs(rec.delta_s - prev.delta_s) <= bound


class TestRunScenario:
    def test_scenario_a_converges(self, result_a):
        m = result_a.metrics
        assert m.converged
        assert m.time_to_dock < builtin_config("a").max_time

    def test_stage_monotone_and_complete(self, result_a):
        order = {name: i for i, name in enumerate(STAGES)}
        indices = [order[r.stage] for r in result_a.records]
        assert indices == sorted(indices)
        assert set(r.stage for r in result_a.records) == set(STAGES)

    def test_timestamps_advance_by_dt(self, result_a):
        ts = np.array([r.t for r in result_a.records])
        assert np.abs(np.diff(ts) - 0.1).max() < 1e-9

    def test_limits_respected_everywhere(self, result_a, result_c):
        assert_limits_respected(result_a.records)
        assert_limits_respected(result_c.records)

    def test_rudder_rate_bound(self, result_a, result_c):
        assert_rate_bound(result_a.records)
        assert_rate_bound(result_c.records)

    def test_switch_happens_near_receiving_point(self, result_a):
        cfg = builtin_config("a")
        receiving = cfg.waypoints[cfg.receiving_index, :2]
        first_docking = next(r for r in result_a.records if r.stage == "docking")
        assert hypot(first_docking.x0 - receiving[0], first_docking.y0 - receiving[1]) <= cfg.receiving_radius + 0.05

    def test_deterministic_given_seed(self):
        cfg = builtin_config("b", seed=3)
        r1 = td.run_scenario(cfg)
        r2 = td.run_scenario(cfg)
        assert r1.metrics == r2.metrics
        assert r1.records == r2.records

    def test_seed_changes_the_gust_history(self):
        m1 = td.run_scenario(builtin_config("b", seed=1)).metrics
        m2 = td.run_scenario(builtin_config("b", seed=2)).metrics
        assert m1.max_keeping_dev != m2.max_keeping_dev

    def test_overshoot_reported_and_bounded(self):
        # Reduced transition thrust and a farther receiving point: the
        # overshoot past the dock stays below 2/5 of the ship length.
        m = td.run_scenario(builtin_config("b", seed=0)).metrics
        assert m.overshoot > 0.0
        assert m.overshoot <= 1.2

    def test_uturn_traverses_pi(self, result_c):
        psi = np.array([r.psi for r in result_c.records])
        increments = np.diff(psi)
        increments = (increments + np.pi) % (2 * np.pi) - np.pi
        assert increments.sum() == pytest.approx(np.pi, abs=0.1)

    def test_diverged_run_detected(self):
        cfg = replace(builtin_config("a"), bounding_box=5.0)
        with pytest.raises(td.DivergedRun):
            td.run_scenario(cfg)


class TestConfig:
    def test_round_trip_through_dict(self):
        cfg = builtin_config("b", seed=7)
        doc = td.config_to_dict(cfg)
        back = td.config_from_dict(doc)
        assert np.all(back.waypoints == cfg.waypoints)
        assert np.all(back.gains.k_p == cfg.gains.k_p)
        assert np.all(back.gains.k_i == cfg.gains.k_i)
        assert np.all(back.gains.k_d == cfg.gains.k_d)
        assert np.all(back.vessel.inertia == cfg.vessel.inertia)
        assert np.all(back.vessel.lin_damping == cfg.vessel.lin_damping)
        assert back.vessel.layout == cfg.vessel.layout
        assert back.vessel.steer_gain == cfg.vessel.steer_gain
        assert back.gust.burst_amplitude == cfg.gust.burst_amplitude
        assert back.gust.burst_interval == cfg.gust.burst_interval
        assert back.seed == 7
        assert back.transition_n_prop == cfg.transition_n_prop

    def test_waypoint_file_reference(self, tmp_path):
        rows = straight_path(length=2.0, spacing=0.5)
        path = tmp_path / "wp.txt"
        np.savetxt(path, rows)
        doc = td.config_to_dict(builtin_config("a"))
        doc.pop("waypoints")
        doc["waypoint_file"] = str(path)
        doc["receiving_index"] = 2
        cfg = td.config_from_dict(doc)
        assert np.allclose(cfg.waypoints, rows)

    def test_missing_waypoint_file(self):
        doc = td.config_to_dict(builtin_config("a"))
        doc.pop("waypoints")
        doc["waypoint_file"] = "/nonexistent/path.txt"
        with pytest.raises(td.ConfigError):
            td.config_from_dict(doc)

    def test_invalid_receiving_index(self):
        with pytest.raises(td.ConfigError):
            replace(builtin_config("a"), receiving_index=10_000)

    def test_negative_radius(self):
        with pytest.raises(td.ConfigError):
            replace(builtin_config("a"), final_radius=-0.1)

    def test_unknown_scenario_name(self):
        with pytest.raises(td.ConfigError):
            builtin_config("z")


class TestTrace:
    def make_records(self, n):
        rec = td.TraceRecord(
            t=0.1, x0=1.23456789012, y0=-2.0, psi=0.5, u=0.1, v=0.0, r=0.01,
            delta_p=-78.6, delta_s=73.38, n_b=3.0, x_req=0.1, y_req=0.0,
            n_req=-0.2, e_x=0.05, e_y=0.0, e_psi=0.001, stage="docking",
        )
        return [replace(rec, t=0.1 * k) for k in range(n)]

    def test_empty_trace_writes_header_only(self, tmp_path):
        path = tmp_path / "trace.csv"
        td.emit_trace([], path)
        lines = path.read_text().splitlines()
        assert lines == [",".join(TRACE_FIELDS)]

    def test_line_count(self, tmp_path):
        path = tmp_path / "trace.csv"
        td.emit_trace(self.make_records(7), path)
        assert len(path.read_text().splitlines()) == 8

    def test_round_trip_is_byte_identical(self, tmp_path):
        first = tmp_path / "a.csv"
        second = tmp_path / "b.csv"
        td.emit_trace(self.make_records(5), first)
        td.emit_trace(td.read_trace(first), second)
        assert first.read_bytes() == second.read_bytes()

    def test_scenario_trace_round_trip(self, tmp_path, result_c):
        first = tmp_path / "c1.csv"
        second = tmp_path / "c2.csv"
        td.emit_trace(result_c.records, first)
        td.emit_trace(td.read_trace(first), second)
        assert first.read_bytes() == second.read_bytes()

    def test_values_match_at_nine_significant_digits(self, tmp_path):
        path = tmp_path / "trace.csv"
        records = self.make_records(3)
        td.emit_trace(records, path)
        parsed = td.read_trace(path)
        for orig, back in zip(records, parsed):
            for name in TRACE_FIELDS[:-1]:
                assert getattr(back, name) == float(f"{getattr(orig, name):.9g}")


class TestCli:
    def test_fit_prints_published_coefficients(self, capsys):
        assert cli_main(["fit"]) == 0
        out = capsys.readouterr().out
        numbers = [float(tok) for tok in out.replace("[", " ").replace("]", " ").split()
                   if tok.lstrip("-").replace(".", "", 1).isdigit()]
        v = numbers[:4]
        assert abs(v[0] - 0.0236) <= 1e-4
        assert abs(v[1] - -0.0296) <= 1e-4
        assert abs(v[2] - 0.0192) <= 1e-4
        assert abs(v[3] - 0.0123) <= 1e-4
        hover = numbers[-2:]
        assert abs(hover[0] - -78.60) <= 0.05
        assert abs(hover[1] - 73.38) <= 0.05

    def test_allocate_zero_demand_reports_hover(self, capsys):
        assert cli_main(["allocate", "0", "0", "0"]) == 0
        out = capsys.readouterr().out
        assert "delta_p=-78.60" in out
        assert "n_b=0.0000" in out

    def test_run_is_deterministic(self, tmp_path, capsys):
        out1, out2 = tmp_path / "t1.csv", tmp_path / "t2.csv"
        assert cli_main(["run", "--scenario", "a", "--seed", "1", "--out", str(out1)]) == 0
        assert cli_main(["run", "--scenario", "a", "--seed", "1", "--out", str(out2)]) == 0
        assert out1.read_bytes() == out2.read_bytes()

    def test_dump_config_is_valid_json(self, capsys):
        import json

        assert cli_main(["dump-config", "--scenario", "b"]) == 0
        doc = json.loads(capsys.readouterr().out)
        cfg = td.config_from_dict(doc)
        assert cfg.name == "b"

    def test_custom_config_and_waypoints(self, tmp_path, capsys):
        import json

        rows = straight_path(length=4.0, spacing=0.5)
        wp = tmp_path / "wp.txt"
        np.savetxt(wp, rows)
        doc = td.config_to_dict(builtin_config("c"))
        doc["keeping_duration"] = 5.0
        cfg_path = tmp_path / "cfg.json"
        cfg_path.write_text(json.dumps(doc))
        trace = tmp_path / "trace.csv"
        code = cli_main(["run", "--config", str(cfg_path), "--out", str(trace)])
        assert code == 0
        assert trace.exists()

    def test_usage_error_exits_2(self):
        with pytest.raises(SystemExit) as err:
            cli_main(["bogus-command"])
        assert err.value.code == 2

    def test_runtime_error_exits_1(self, capsys):
        assert cli_main(["fit", "--force-data", "/nonexistent.csv"]) == 1
        assert "error:" in capsys.readouterr().err

    def test_scale_requires_factor_or_params(self, capsys):
        with pytest.raises(SystemExit) as err:
            cli_main(["scale"])
        assert err.value.code == 2

    def test_force_data_override(self, tmp_path, capsys):
        path = tmp_path / "alt.csv"
        lines = ["delta_p_deg,delta_s_deg,x_ct_n,y_ct_n"]
        for s in td.builtin_samples():
            lines.append(f"{s.delta_p},{s.delta_s},{2 * s.x_ct},{2 * s.y_ct}")
        path.write_text("\n".join(lines) + "\n")
        assert cli_main(["fit", "--force-data", str(path)]) == 0
        out = capsys.readouterr().out
        assert f"{2 * 0.0236:.6f}" in out
