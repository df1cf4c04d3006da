"""Tests for the receding-horizon gap controller."""

import numpy as np
import pytest

from pacc import (
    AccController,
    ControllerConfig,
    ValidationError,
    make_preview,
    predict,
    solve_step,
)


class TestControllerConfig:
    def test_default_step_counts(self):
        config = ControllerConfig()
        assert config.n_predict == 3
        assert config.n_control == 3

    def test_shorter_control_horizon(self):
        config = ControllerConfig(control_horizon=1.0)
        assert config.n_predict == 3
        assert config.n_control == 1

    def test_control_horizon_exceeding_prediction_rejected(self):
        with pytest.raises(ValidationError):
            ControllerConfig(prediction_horizon=3.0, control_horizon=4.0)

    def test_non_multiple_prediction_horizon_rejected(self):
        with pytest.raises(ValidationError):
            ControllerConfig(prediction_horizon=2.5, control_horizon=2.5)

    def test_nonpositive_sample_time_rejected(self):
        with pytest.raises(ValidationError):
            ControllerConfig(sample_time=0.0)

    def test_nonpositive_min_gap_rejected(self):
        with pytest.raises(ValidationError):
            ControllerConfig(min_gap=0.0)

    def test_acceleration_box_must_contain_zero(self):
        with pytest.raises(ValidationError):
            ControllerConfig(accel_min=0.5)
        with pytest.raises(ValidationError):
            ControllerConfig(accel_max=-1.0)


class TestMakePreview:
    def test_accepts_list(self):
        preview = make_preview([10.0, 11.0, 12.0])
        assert isinstance(preview, np.ndarray)
        np.testing.assert_array_equal(preview, [10.0, 11.0, 12.0])

    def test_rejects_empty(self):
        with pytest.raises(ValidationError):
            make_preview([])

    def test_rejects_negative_speed(self):
        with pytest.raises(ValidationError):
            make_preview([10.0, -0.1, 12.0])

    def test_rejects_nan(self):
        with pytest.raises(ValidationError):
            make_preview([10.0, np.nan, 12.0])

    def test_rejects_matrix(self):
        with pytest.raises(ValidationError):
            make_preview([[10.0, 11.0]])


class TestPredict:
    def test_worked_rollout(self):
        # gap0=10, v0=8, PV holds 10, accel held at 1, one-second steps.
        gaps, speeds, effective = predict(10.0, 8.0, [1.0, 1.0, 1.0],
                                          [10.0, 10.0, 10.0], 1.0)
        np.testing.assert_allclose(gaps, [12.0, 13.0, 13.0], atol=1e-12)
        np.testing.assert_allclose(speeds, [9.0, 10.0, 11.0], atol=1e-12)
        np.testing.assert_allclose(effective, [1.0, 1.0, 1.0], atol=1e-12)

    def test_constant_gap_at_matched_speeds(self):
        gaps, speeds, _ = predict(21.8, 12.0, np.zeros(3), np.full(3, 12.0), 1.0)
        np.testing.assert_allclose(gaps, 21.8, atol=1e-12)
        np.testing.assert_allclose(speeds, 12.0, atol=1e-12)

    def test_speed_floor_reduces_effective_accel(self):
        gaps, speeds, effective = predict(8.0, 0.5, [-2.0], [3.0], 1.0)
        assert speeds[0] == 0.0
        np.testing.assert_allclose(effective[0], -0.5, atol=1e-12)
        np.testing.assert_allclose(gaps[0], 8.0 + (3.0 - 0.5) * 1.0, atol=1e-12)

    def test_length_mismatch_rejected(self):
        with pytest.raises(ValidationError):
            predict(10.0, 8.0, [1.0, 1.0], [10.0], 1.0)

    def test_outputs_self_consistent(self):
        # Gap increments use start-of-step speeds; speeds integrate the
        # effective accelerations and never go negative.
        rng = np.random.default_rng(7)
        for _ in range(25):
            n = int(rng.integers(1, 6))
            v0 = float(rng.uniform(0.0, 20.0))
            gap0 = float(rng.uniform(1.0, 60.0))
            accels = rng.uniform(-4.0, 3.0, n)
            preview = rng.uniform(0.0, 25.0, n)
            dt = float(rng.uniform(0.2, 2.0))
            gaps, speeds, effective = predict(gap0, v0, accels, preview, dt)
            assert np.all(speeds >= 0.0)
            start = np.concatenate(([v0], speeds[:-1]))
            np.testing.assert_allclose(speeds, start + effective * dt, atol=1e-9)
            np.testing.assert_allclose(
                np.diff(np.concatenate(([gap0], gaps))),
                (preview - start) * dt, atol=1e-9)


class TestSolveStep:
    def test_near_zero_command_at_equilibrium(self, driver_model):
        v = 12.0
        gap = driver_model.desired_gap(v)
        decision = solve_step(gap, v, np.full(3, v), driver_model)
        assert abs(decision.accel) < 0.05
        assert not decision.safety_fallback
        assert decision.converged

    def test_no_worse_than_zero_plan_at_equilibrium(self, driver_model):
        v = 12.0
        gap = driver_model.desired_gap(v)
        preview = np.full(3, v)
        decision = solve_step(gap, v, preview, driver_model)
        zero = solve_step(gap, v, preview, driver_model,
                          warm_start=np.zeros(3))
        assert decision.objective <= zero.objective + 1e-9

    def test_braking_for_decelerating_preview(self, driver_model):
        v = 15.0
        gap = driver_model.desired_gap(v)
        decision = solve_step(gap, v, [13.0, 11.0, 9.0], driver_model)
        assert decision.accel < 0.0

    def test_tight_gap_plan_stays_feasible(self, driver_model):
        config = ControllerConfig()
        gap0 = config.min_gap + 0.1
        decision = solve_step(gap0, 10.0, np.full(3, 9.95), driver_model, config)
        assert not decision.safety_fallback
        gaps, _, _ = predict(gap0, 10.0, decision.plan, np.full(3, 9.95),
                             config.sample_time)
        assert np.all(gaps >= config.min_gap - 1e-6)

    def test_hopeless_gap_triggers_fallback(self, driver_model):
        config = ControllerConfig()
        decision = solve_step(5.05, 15.0, np.full(3, 5.0), driver_model, config)
        assert decision.safety_fallback
        assert decision.accel == config.accel_min
        np.testing.assert_array_equal(decision.plan,
                                      np.full(3, config.accel_min))

    def test_recovers_from_braking_warm_start_at_standstill(self, driver_model):
        # At v=0 further braking changes nothing, which leaves the
        # objective flat around a deep-braking warm start; the solver
        # must still find the accelerating solution.
        decision = solve_step(30.0, 0.0, np.full(3, 10.0), driver_model,
                              warm_start=np.full(3, -3.0))
        assert decision.accel > 0.5

    def test_command_in_box_and_gap_safe(self, driver_model):
        config = ControllerConfig()
        rng = np.random.default_rng(11)
        for _ in range(10):
            gap0 = float(rng.uniform(5.5, 60.0))
            v0 = float(rng.uniform(0.0, 20.0))
            preview = rng.uniform(0.0, 25.0, 3)
            decision = solve_step(gap0, v0, preview, driver_model, config)
            assert config.accel_min <= decision.accel <= config.accel_max
            if not decision.safety_fallback:
                gaps, _, _ = predict(gap0, v0, decision.plan, preview,
                                     config.sample_time)
                assert np.all(gaps >= config.min_gap - 1e-6)

    def test_single_move_control_horizon(self, driver_model):
        config = ControllerConfig(control_horizon=1.0)
        decision = solve_step(26.0, 15.0, np.full(3, 15.0), driver_model, config)
        assert decision.plan.shape == (1,)

    def test_preview_length_must_match_horizon(self, driver_model):
        with pytest.raises(ValidationError):
            solve_step(20.0, 10.0, [10.0, 10.0], driver_model)

    def test_nonpositive_gap_rejected(self, driver_model):
        with pytest.raises(ValidationError):
            solve_step(0.0, 10.0, np.full(3, 10.0), driver_model)


class TestAccController:
    def test_reset_restores_cold_start(self, driver_model):
        controller = AccController(driver_model)
        first = controller.step(26.0, 15.0, np.full(3, 15.0))
        controller.step(25.0, 15.0, np.full(3, 14.0))
        controller.reset()
        again = controller.step(26.0, 15.0, np.full(3, 15.0))
        assert again.accel == first.accel

    def test_plan_matches_control_horizon(self, driver_model):
        controller = AccController(driver_model)
        decision = controller.step(21.8, 12.0, np.full(3, 12.0))
        assert decision.plan.shape == (controller.config.n_control,)

    def test_holds_near_equilibrium_in_closed_loop(self, driver_model):
        controller = AccController(driver_model)
        v_pv = 12.0
        gap, v = driver_model.desired_gap(v_pv), v_pv
        for _ in range(20):
            decision = controller.step(gap, v, np.full(3, v_pv))
            assert not decision.safety_fallback
            gap += (v_pv - v) * 1.0
            v = max(v + decision.accel * 1.0, 0.0)
            assert 5.0 <= gap <= 60.0
        assert abs(v - v_pv) < 1.0
