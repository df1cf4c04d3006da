"""Tests for scenario loading, platoon runs, and A/B comparisons."""

import json

import numpy as np
import pytest

from conftest import sine_cycle
from pacc import (
    ControllerConfig,
    DriverModel,
    DrivingCycle,
    IdmParams,
    ScenarioConfig,
    ValidationError,
    VehicleState,
    compare,
    default_fuel_params,
    equilibrium_gap,
    fuel_rate,
    initialize,
    load_scenario,
    run,
    trace_from_states,
    write_comparison,
    write_report,
)
from pacc.traffic import FleetState

WEIGHTS = np.array([1.0, 0.06, 0.9, 0.12])


def constant_cycle(speed=15.0, duration=40.0):
    n = int(round(duration)) + 1
    return DrivingCycle(np.full(n, float(speed)), 1.0)


def stopping_cycle():
    return DrivingCycle(np.array([15.0, 15.0, 0.0, 0.0, 0.0, 0.0,
                                  0.0, 0.0, 0.0, 0.0, 0.0]), 1.0)


def make_config(cycle, tau=1.4, gaps=None, **kwargs):
    driver = DriverModel(weights=WEIGHTS, tau=tau)
    return ScenarioConfig(cycle=cycle, driver=driver,
                          idm=IdmParams(cruise_speed=30.0),
                          initial_gaps=gaps, **kwargs)


@pytest.fixture(scope="module")
def cruise_result():
    cfg = make_config(constant_cycle())
    return cfg, run(cfg)


@pytest.fixture(scope="module")
def tau_pair():
    cycle = sine_cycle(60.0)
    mild = make_config(cycle, tau=1.7)
    aggressive = make_config(cycle, tau=1.0)
    return compare(mild, aggressive), compare(aggressive, mild)


class TestScenarioConfig:
    def test_sim_dt_must_divide_sample_time(self):
        with pytest.raises(ValidationError):
            make_config(constant_cycle(), sim_dt=0.3)

    def test_nonpositive_sim_dt_rejected(self):
        with pytest.raises(ValidationError):
            make_config(constant_cycle(), sim_dt=0.0)

    def test_steps_per_control(self):
        assert make_config(constant_cycle()).steps_per_control == 10
        assert make_config(constant_cycle(), sim_dt=0.5).steps_per_control == 2
        assert make_config(constant_cycle(), sim_dt=1.0).steps_per_control == 1

    def test_initial_gaps_validated(self):
        with pytest.raises(ValidationError):
            make_config(constant_cycle(), gaps=(20.0, 10.0, 10.0))
        with pytest.raises(ValidationError):
            make_config(constant_cycle(), gaps=(20.0, 10.0, 10.0, 0.0))


class TestLoadScenario:
    def test_fixture_scenario(self, fixtures_dir):
        cfg = load_scenario(fixtures_dir / "scenarios" / "constant_mild.toml")
        assert cfg.driver.tau == pytest.approx(1.7)
        assert cfg.idm.cruise_speed == 30.0
        assert cfg.initial_gaps is None
        assert cfg.sim_dt == 0.1
        assert np.all(cfg.cycle.speeds == 15.0)
        assert cfg.source["idm"]["cruise_speed"] == 30.0

    def test_missing_file(self, tmp_path):
        with pytest.raises(ValidationError):
            load_scenario(tmp_path / "missing.toml")

    def test_invalid_toml(self, tmp_path):
        path = tmp_path / "bad.toml"
        path.write_text("cycle = [broken\n")
        with pytest.raises(ValidationError):
            load_scenario(path)

    def _write(self, tmp_path, fixtures_dir, extra=""):
        cycle = fixtures_dir / "cycles" / "constant_15mps.csv"
        model = fixtures_dir / "models" / "driver_mild.json"
        text = (f'[cycle]\npath = "{cycle}"\n\n'
                f'[driver_model]\npath = "{model}"\n\n{extra}')
        path = tmp_path / "scenario.toml"
        path.write_text(text)
        return path

    def test_missing_cycle_section(self, tmp_path, fixtures_dir):
        model = fixtures_dir / "models" / "driver_mild.json"
        path = tmp_path / "scenario.toml"
        path.write_text(f'[driver_model]\npath = "{model}"\n')
        with pytest.raises(ValidationError):
            load_scenario(path)

    def test_cruise_speed_defaults_to_cycle_max(self, tmp_path, fixtures_dir):
        cfg = load_scenario(self._write(tmp_path, fixtures_dir))
        assert cfg.idm.cruise_speed == pytest.approx(15.0)

    def test_unknown_idm_key_rejected(self, tmp_path, fixtures_dir):
        path = self._write(tmp_path, fixtures_dir, "[idm]\npoliteness = 0.5\n")
        with pytest.raises(ValidationError):
            load_scenario(path)

    def test_unknown_controller_key_rejected(self, tmp_path, fixtures_dir):
        path = self._write(tmp_path, fixtures_dir, "[controller]\nhorizon = 5\n")
        with pytest.raises(ValidationError):
            load_scenario(path)

    def test_explicit_init_section(self, tmp_path, fixtures_dir):
        path = self._write(tmp_path, fixtures_dir,
                           "[init]\ngaps = [20.0, 10.0, 10.0, 10.0]\ndt_s = 0.05\n")
        cfg = load_scenario(path)
        assert cfg.initial_gaps == (20.0, 10.0, 10.0, 10.0)
        assert cfg.sim_dt == 0.05

    def test_bad_gaps_keyword_rejected(self, tmp_path, fixtures_dir):
        path = self._write(tmp_path, fixtures_dir, '[init]\ngaps = "tight"\n')
        with pytest.raises(ValidationError):
            load_scenario(path)


class TestInitialize:
    def test_equilibrium_rule(self):
        cfg = make_config(constant_cycle())
        state = initialize(cfg)
        eq = equilibrium_gap(15.0, cfg.idm)
        np.testing.assert_allclose(state.gaps, [26.0, eq, eq, eq], rtol=1e-12)
        np.testing.assert_array_equal(state.speeds, 15.0)
        assert state.vehicles[0].position == 0.0
        assert state.time == 0.0

    def test_explicit_gaps_verbatim(self):
        cfg = make_config(constant_cycle(), gaps=(30.0, 18.0, 19.0, 20.0))
        state = initialize(cfg)
        np.testing.assert_allclose(state.gaps, [30.0, 18.0, 19.0, 20.0])


class TestTraceFromStates:
    def test_packs_states(self):
        v = tuple(VehicleState(-20.0 * i, 10.0, 0.5) for i in range(5))
        s0 = FleetState(v, 0.0)
        v1 = tuple(VehicleState(-20.0 * i + 1.0, 10.0, 0.5) for i in range(5))
        s1 = FleetState(v1, 0.1)
        trace = trace_from_states([s0, s1], default_fuel_params())
        np.testing.assert_allclose(trace.times, [0.0, 0.1])
        np.testing.assert_allclose(trace.gaps, 20.0)
        np.testing.assert_allclose(trace.speeds, 10.0)


class TestRun:
    def test_cruise_completes_cleanly(self, cruise_result):
        _, result = cruise_result
        assert result.completed
        assert result.collision is None
        assert result.report is not None
        assert result.safety_fallback_steps == 0

    def test_cruise_holds_equilibrium(self, cruise_result):
        cfg, result = cruise_result
        eq = equilibrium_gap(15.0, cfg.idm)
        initial_mean = (26.0 + 3.0 * eq) / 4.0
        assert abs(result.report.gap_mean - initial_mean) / initial_mean < 0.01
        assert np.max(np.abs(result.trace.speeds - 15.0)) < 1e-6

    def test_cruise_fuel_matches_steady_rate(self, cruise_result):
        cfg, result = cruise_result
        rate = fuel_rate(VehicleState(0.0, 15.0, 0.0), cfg.fuel)
        steady = 5.0 * rate * cfg.cycle.duration
        assert result.report.fuel_total == pytest.approx(steady, rel=1e-6)

    def test_trace_grid(self, cruise_result):
        cfg, result = cruise_result
        times = result.trace.times
        assert times.size == 401
        assert times[0] == 0.0
        assert times[-1] == pytest.approx(40.0)
        np.testing.assert_allclose(np.diff(times), cfg.sim_dt, rtol=1e-9)

    def test_collision_aborts_with_partial_trace(self):
        eq = equilibrium_gap(15.0, IdmParams(cruise_speed=30.0))
        cfg = make_config(stopping_cycle(), gaps=(5.2, eq, eq, eq))
        result = run(cfg)
        assert not result.completed
        assert result.report is None
        assert result.collision.pair == ("PV", "SAV")
        assert result.trace.times.size < 101

    def test_hard_stop_survivable_with_margin(self):
        eq = equilibrium_gap(15.0, IdmParams(cruise_speed=30.0))
        cfg = make_config(stopping_cycle(), gaps=(60.0, eq, eq, eq))
        result = run(cfg)
        assert result.completed
        assert np.all(result.trace.gaps > 0.0)


class TestCompare:
    def test_requires_shared_cycle(self):
        with pytest.raises(ValidationError):
            compare(make_config(constant_cycle(15.0)),
                    make_config(constant_cycle(12.0)))

    def test_requires_shared_idm(self):
        cycle = constant_cycle()
        a = make_config(cycle)
        driver = DriverModel(weights=WEIGHTS, tau=1.0)
        b = ScenarioConfig(cycle=cycle, driver=driver,
                           idm=IdmParams(cruise_speed=25.0))
        with pytest.raises(ValidationError):
            compare(a, b)

    def test_lower_tau_runs_tighter(self, tau_pair):
        forward, _ = tau_pair
        assert forward.complete
        assert forward.gap_pct > 0.0
        assert forward.headway_pct > 0.0

    def test_swap_identity(self, tau_pair):
        forward, reverse = tau_pair
        ra = forward.result_a.report
        rb = forward.result_b.report
        assert reverse.gap_pct == pytest.approx(
            -forward.gap_pct * ra.gap_mean / rb.gap_mean, abs=1e-9)
        assert reverse.headway_pct == pytest.approx(
            -forward.headway_pct * ra.headway_mean / rb.headway_mean, abs=1e-9)
        assert reverse.fuel_pct == pytest.approx(
            -forward.fuel_pct * ra.fuel_total / rb.fuel_total, abs=1e-9)

    def test_incomplete_when_one_run_collides(self):
        eq = equilibrium_gap(15.0, IdmParams(cruise_speed=30.0))
        safe = make_config(stopping_cycle(), gaps=(60.0, eq, eq, eq))
        crash = make_config(stopping_cycle(), gaps=(5.2, eq, eq, eq))
        comp = compare(safe, crash)
        assert not comp.complete
        assert comp.gap_pct is None
        assert comp.fuel_pct is None


class TestReportFiles:
    def test_write_report_schema(self, cruise_result, tmp_path):
        cfg, result = cruise_result
        path = tmp_path / "report.json"
        write_report(result, cfg, path)
        doc = json.loads(path.read_text())
        assert set(doc) == {"gap_mean_m", "headway_mean_s", "fuel_total_l",
                            "safety_fallback_steps", "config"}
        assert doc["gap_mean_m"] == pytest.approx(result.report.gap_mean, rel=1e-8)
        assert doc["headway_mean_s"] == pytest.approx(result.report.headway_mean, rel=1e-8)
        assert doc["fuel_total_l"] == pytest.approx(result.report.fuel_total, rel=1e-8)
        assert doc["safety_fallback_steps"] == 0

    def test_write_report_rejects_aborted_run(self, tmp_path):
        eq = equilibrium_gap(15.0, IdmParams(cruise_speed=30.0))
        cfg = make_config(stopping_cycle(), gaps=(5.2, eq, eq, eq))
        result = run(cfg)
        with pytest.raises(ValidationError):
            write_report(result, cfg, tmp_path / "report.json")

    def test_write_comparison_schema(self, tau_pair, tmp_path):
        forward, _ = tau_pair
        path = tmp_path / "comparison.json"
        write_comparison(forward, path)
        doc = json.loads(path.read_text())
        assert set(doc) == {"gap_pct", "headway_pct", "fuel_pct"}
        assert doc["gap_pct"] == pytest.approx(forward.gap_pct, rel=1e-8)

    def test_write_comparison_incomplete_marker(self, tmp_path):
        eq = equilibrium_gap(15.0, IdmParams(cruise_speed=30.0))
        safe = make_config(stopping_cycle(), gaps=(60.0, eq, eq, eq))
        crash = make_config(stopping_cycle(), gaps=(5.2, eq, eq, eq))
        comp = compare(safe, crash)
        path = tmp_path / "comparison.json"
        write_comparison(comp, path)
        doc = json.loads(path.read_text())
        assert doc == {"incomplete": True, "failed_runs": ["b"]}
