"""Personalized adaptive cruise control by receding-horizon optimization.

At each controller step the SAV minimizes the driver's learned feature
cost over a short predicted horizon, using the preceding vehicle's
speed preview, subject to a hard minimum-gap constraint and an
acceleration box.  Only the first acceleration of the optimal sequence
is applied.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import DriverModel, _require
from .features import horizon_features
from .optim import CONSTRAINT_TOL, BoxedProblem, minimize_constrained, InfeasibleError


@dataclass(frozen=True)
class ControllerConfig:
    """Horizons, sample time, gap floor, and acceleration box of the controller."""

    prediction_horizon: float = 3.0
    control_horizon: float = 3.0
    sample_time: float = 1.0
    min_gap: float = 5.0
    accel_min: float = -3.0
    accel_max: float = 2.0

    def __post_init__(self):
        _require(self.sample_time > 0.0, "sample_time must be > 0")
        _require(self.control_horizon <= self.prediction_horizon + 1e-12,
                 "control horizon must not exceed prediction horizon")
        ratio = self.prediction_horizon / self.sample_time
        _require(abs(ratio - round(ratio)) < 1e-9 and round(ratio) >= 1,
                 "prediction horizon must be an integer multiple of sample_time")
        _require(self.min_gap > 0.0, "min_gap must be > 0")
        _require(self.accel_min < 0.0 < self.accel_max,
                 "acceleration box must contain 0")

    @property
    def n_predict(self) -> int:
        return int(round(self.prediction_horizon / self.sample_time))

    @property
    def n_control(self) -> int:
        return max(1, int(round(self.control_horizon / self.sample_time)))


def make_preview(speeds) -> np.ndarray:
    """Validate a PV speed preview (one speed per controller step, all >= 0)."""
    preview = np.asarray(speeds, dtype=float)
    _require(preview.ndim == 1 and preview.size >= 1, "preview must be non-empty")
    _require(bool(np.all(np.isfinite(preview)) and np.all(preview >= 0.0)),
             "preview speeds must be finite and >= 0")
    return preview


def predict(gap0: float, v0: float, accels: np.ndarray, preview: np.ndarray,
            sample_time: float) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Forward rollout of the inter-vehicle dynamics.

    Per step: the gap advances by (PV speed - SAV speed) * sample_time
    using start-of-step speeds, then the SAV speed integrates the
    commanded acceleration.  Speeds are floored at zero with the applied
    acceleration reduced accordingly.

    Returns (gaps, speeds, effective accels), one entry per predicted
    step.
    """
    accels = np.asarray(accels, dtype=float)
    preview = np.asarray(preview, dtype=float)
    _require(accels.size == preview.size, "accels and preview must have equal length")
    n = accels.size
    gaps = np.empty(n)
    speeds = np.empty(n)
    effective = np.empty(n)
    gap, v = float(gap0), float(v0)
    for j in range(n):
        gap = gap + (preview[j] - v) * sample_time
        v_next = max(v + accels[j] * sample_time, 0.0)
        effective[j] = (v_next - v) / sample_time
        v = v_next
        gaps[j] = gap
        speeds[j] = v
    return gaps, speeds, effective


@dataclass(frozen=True)
class StepDecision:
    """One controller step: the command to apply plus diagnostics."""

    accel: float
    plan: np.ndarray
    objective: float
    safety_fallback: bool = False
    converged: bool = True


def solve_step(gap0: float, v0: float, preview, model: DriverModel,
               config: ControllerConfig = ControllerConfig(),
               warm_start: np.ndarray | None = None) -> StepDecision:
    """Solve one receding-horizon step and return the first acceleration.

    The decision variables are the control-horizon accelerations inside
    the configured box (held at their last value through the remainder
    of the prediction horizon); the objective is the learned weighted
    feature cost of the predicted rollout with the desired speed taken
    as the preview maximum; every predicted gap must stay above the
    minimum.  When even full braking cannot keep the predicted gap
    feasible, full braking is returned flagged as a safety fallback.
    """
    preview = make_preview(preview)
    _require(preview.size == config.n_predict,
             "preview length must equal the number of prediction steps")
    _require(gap0 > 0.0, "gap must be > 0")
    n_ctrl = config.n_control
    desired_speed = float(preview.max())

    def expand(decision: np.ndarray) -> np.ndarray:
        # Hold the last control move through the prediction tail.
        tail = np.full(config.n_predict - n_ctrl, decision[-1])
        return np.concatenate([decision, tail])

    def rollout(decision: np.ndarray):
        return predict(gap0, v0, expand(decision), preview, config.sample_time)

    def objective(decision: np.ndarray) -> float:
        gaps, speeds, accels = rollout(decision)
        feats = horizon_features(gaps, speeds, accels, preview, model,
                                 desired_speed, config.sample_time)
        return feats.cost(model.weights)

    def gap_margin(decision: np.ndarray) -> np.ndarray:
        gaps, _, _ = rollout(decision)
        return gaps - config.min_gap

    full_braking = np.full(n_ctrl, config.accel_min)
    if np.min(gap_margin(full_braking)) < -CONSTRAINT_TOL:
        return StepDecision(accel=config.accel_min, plan=full_braking,
                            objective=float(objective(full_braking)),
                            safety_fallback=True, converged=False)

    problem = BoxedProblem(
        dimension=n_ctrl,
        objective=objective,
        lower=np.full(n_ctrl, config.accel_min),
        upper=np.full(n_ctrl, config.accel_max),
        constraints=(gap_margin,),
    )
    start = np.asarray(warm_start, dtype=float) if warm_start is not None \
        else np.zeros(n_ctrl)
    start = np.clip(start, config.accel_min, config.accel_max)
    if not problem.is_feasible(start):
        start = full_braking

    # The zero-speed floor flattens the objective around deep-braking
    # plans (any nearby plan keeps the speed pinned at zero), which can
    # strand a gradient solver on a stale warm start; a second start at
    # the zero plan always sits on the informative side of the floor.
    starts = [start]
    if np.any(start != 0.0):
        starts.append(np.zeros(n_ctrl))
    best = None
    for s in starts:
        try:
            res = minimize_constrained(problem, s)
        except InfeasibleError:
            continue
        if best is None or res.value < best.value - 1e-12:
            best = res
    if best is None:
        return StepDecision(accel=config.accel_min, plan=full_braking,
                            objective=float(objective(full_braking)),
                            safety_fallback=True, converged=False)
    return StepDecision(accel=float(best.x[0]), plan=best.x,
                        objective=best.value, converged=best.converged)


class AccController:
    """Stateful receding-horizon controller for one SAV.

    Caches the previous solution and warm-starts each solve with it
    shifted by one step.  One instance serves one simulation thread.
    """

    def __init__(self, model: DriverModel, config: ControllerConfig = ControllerConfig()):
        self.model = model
        self.config = config
        self._last_plan: np.ndarray | None = None

    def reset(self) -> None:
        self._last_plan = None

    def step(self, gap0: float, v0: float, preview,
             a_prev: float = 0.0) -> StepDecision:
        if self._last_plan is not None:
            warm = np.append(self._last_plan[1:], self._last_plan[-1])
        else:
            warm = np.full(self.config.n_control, a_prev)
        decision = solve_step(gap0, v0, preview, self.model, self.config,
                              warm_start=warm)
        self._last_plan = decision.plan
        return decision
