"""Driver-style learning by maximum-entropy inverse reinforcement learning.

The learner recovers a four-component cost weight vector whose optimal
trajectory segments reproduce a driver's demonstrated car-following
behavior.  Each epoch solves one small spline optimization per
demonstration segment, averages the resulting feature values, and takes
a normalized gradient step on the weights until the model's features
match the observed ones.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np
from sklearn.base import BaseEstimator

from .core import (
    WEIGHT_FLOOR,
    DemonstrationSegment,
    DriverModel,
    DrivingCycle,
    FeatureVector,
    ValidationError,
    VehicleState,
    _require,
)
from .features import FeatureContext, segment_features
from .optim import minimize_unconstrained
from .trajectory import QuinticSegment, SampledTrajectory, anchored_segment

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class LearningConfig:
    """Hyperparameters of the weight-learning loop."""

    eta0: float = 0.2
    eta_halving_epochs: int = 5
    max_epochs: int = 50
    convergence_tol: float = 0.02
    weight_floor: float = WEIGHT_FLOOR

    def __post_init__(self):
        _require(self.eta0 > 0.0, "eta0 must be > 0")
        _require(self.eta_halving_epochs >= 1, "eta_halving_epochs must be >= 1")
        _require(self.max_epochs >= 1, "max_epochs must be >= 1")
        _require(self.convergence_tol > 0.0, "convergence_tol must be > 0")
        _require(self.weight_floor > 0.0, "weight_floor must be > 0")

    def learning_rate(self, epoch: int) -> float:
        """Step size for a 1-based epoch: eta0 halved every ``eta_halving_epochs``."""
        return self.eta0 * 0.5 ** ((epoch - 1) // self.eta_halving_epochs)


@dataclass(frozen=True)
class InnerSolution:
    """Result of one per-segment trajectory optimization."""

    segment: QuinticSegment
    cost: float
    converged: bool


@dataclass(frozen=True)
class LearnedResult:
    """Output of a learning run: the portable model plus diagnostics."""

    model: DriverModel
    most_likely_segments: tuple[QuinticSegment, ...]
    epochs_run: int
    final_gradient_norm: float
    residual: float
    residual_history: tuple[float, ...] = ()
    degenerate: bool = False
    inner_converged_fraction: float = 1.0


def min_observed_headway(demos: Sequence[DemonstrationSegment]) -> float:
    """Minimum time headway (gap / follower speed) over all demo samples.

    Samples slower than the 1 m/s low-speed guard are excluded, matching
    the headway definition used in evaluation.
    """
    from .evaluation import LOW_SPEED_GUARD

    best = np.inf
    for seg in demos:
        speeds = seg.follower_speed
        mask = speeds >= LOW_SPEED_GUARD
        if not np.any(mask):
            continue
        headways = seg.gaps[mask] / speeds[mask]
        best = min(best, float(headways.min()))
    if not np.isfinite(best) or best <= 0.0:
        raise ValidationError(
            "demonstrations contain no usable headway sample "
            "(all speeds below the low-speed guard or nonpositive gaps)")
    return best


def observed_features(demos: Sequence[DemonstrationSegment], tau: float,
                      min_clearance: float) -> FeatureVector:
    """Average feature values of the demonstrated segments.

    The demonstrated follower samples enter directly (linearly
    interpolated), not through a quintic fit.
    """
    _require(len(demos) >= 1, "need at least one demonstration segment")
    vectors = []
    for seg in demos:
        ctx = FeatureContext.from_demonstration(seg, tau, min_clearance)
        vectors.append(segment_features(SampledTrajectory.from_demonstration(seg), ctx))
    return FeatureVector.mean(vectors)


def most_likely_segment(initial, ctx: FeatureContext, weights: np.ndarray,
                        duration: float) -> InnerSolution:
    """Cost-minimizing quintic segment anchored at ``initial``.

    Under the exponential trajectory model, maximizing likelihood equals
    minimizing the weighted feature cost, so the most likely segment is
    the one whose free coefficients (c0, c1, c2) minimize it.  The
    search warm-starts at (0, 0, 0), the constant-acceleration
    continuation of the anchor state.
    """
    weights = np.asarray(weights, dtype=float)
    _require(bool(np.all(weights >= WEIGHT_FLOOR)),
             f"all weights must be >= {WEIGHT_FLOOR}")

    def cost(free: np.ndarray) -> float:
        seg = anchored_segment(free, initial, duration)
        return segment_features(seg, ctx).cost(weights)

    res = minimize_unconstrained(cost, np.zeros(3))
    return InnerSolution(segment=anchored_segment(res.x, initial, duration),
                         cost=res.value, converged=res.converged)


def feature_gradient(expected: FeatureVector, observed: FeatureVector) -> np.ndarray:
    """Componentwise difference between expected and observed features."""
    return expected.as_array() - observed.as_array()


def update_weights(weights: np.ndarray, grad: np.ndarray, eta: float,
                   floor: float = WEIGHT_FLOOR) -> np.ndarray:
    """One normalized-gradient step, then a componentwise floor.

    A zero gradient leaves the weights unchanged (already matched).
    """
    weights = np.asarray(weights, dtype=float)
    grad = np.asarray(grad, dtype=float)
    norm = float(np.linalg.norm(grad))
    if norm == 0.0:
        return weights.copy()
    return np.maximum(weights + eta * grad / norm, floor)


def learn(demos: Sequence[DemonstrationSegment],
          config: LearningConfig = LearningConfig(),
          min_clearance: float = 5.0,
          tau: float | None = None) -> LearnedResult:
    """Fit a driver model to demonstration segments.

    The weight vector starts at all ones.  Each epoch recomputes the
    most likely segment for every demonstration (anchored at that
    segment's observed initial state), averages their features, and
    steps the weights along the normalized feature mismatch.  The loop
    stops when the relative feature-matching residual drops to
    ``config.convergence_tol`` or the epoch budget runs out.

    ``tau`` defaults to the minimum observed headway in the
    demonstrations.
    """
    demos = list(demos)
    _require(len(demos) >= 1, "need at least one demonstration segment")
    durations = {seg.duration for seg in demos}
    _require(len(durations) == 1, "all demonstration segments must share one length")
    segment_length = demos[0].duration

    if tau is None:
        tau = min_observed_headway(demos)

    contexts = [FeatureContext.from_demonstration(seg, tau, min_clearance)
                for seg in demos]
    observed = observed_features(demos, tau, min_clearance)
    observed_norm = float(np.linalg.norm(observed.as_array()))

    weights = np.ones(4)
    if observed_norm == 0.0:
        model = DriverModel(weights, tau, min_clearance, segment_length)
        segs = tuple(
            most_likely_segment(seg.initial_follower_state, ctx, weights,
                                segment_length).segment
            for seg, ctx in zip(demos, contexts))
        return LearnedResult(model=model, most_likely_segments=segs,
                             epochs_run=0, final_gradient_norm=0.0,
                             residual=0.0, degenerate=True)

    history = []
    solutions: list[InnerSolution] = []
    grad = np.zeros(4)
    residual = np.inf
    epochs = 0
    for epoch in range(1, config.max_epochs + 1):
        epochs = epoch
        solutions = [
            most_likely_segment(seg.initial_follower_state, ctx, weights,
                                segment_length)
            for seg, ctx in zip(demos, contexts)
        ]
        expected = FeatureVector.mean(
            segment_features(sol.segment, ctx)
            for sol, ctx in zip(solutions, contexts))
        grad = feature_gradient(expected, observed)
        residual = float(np.linalg.norm(grad)) / observed_norm
        history.append(residual)
        log.debug("epoch %d: residual %.5f eta %.4f weights %s",
                  epoch, residual, config.learning_rate(epoch), weights)
        if residual <= config.convergence_tol or epoch == config.max_epochs:
            break
        weights = update_weights(weights, grad, config.learning_rate(epoch),
                                 config.weight_floor)

    converged_inner = sum(sol.converged for sol in solutions)
    return LearnedResult(
        model=DriverModel(weights, tau, min_clearance, segment_length),
        most_likely_segments=tuple(sol.segment for sol in solutions),
        epochs_run=epochs,
        final_gradient_norm=float(np.linalg.norm(grad)),
        residual=residual,
        residual_history=tuple(history),
        inner_converged_fraction=converged_inner / len(solutions),
    )


def synthesize_demonstration(cycle: DrivingCycle, weights: np.ndarray, tau: float,
                             min_clearance: float = 5.0,
                             segment_length: float = 3.0,
                             start_gap: float | None = None) -> dict[str, np.ndarray]:
    """Roll a synthetic follower along a leader driving cycle.

    The leader replays the cycle; the follower chains cost-minimizing
    segments, each anchored at the previous segment's end state, so the
    result is exactly the behavior a model with these ``weights`` and
    ``tau`` considers most likely.  Returns demonstration arrays in the
    ingestion layout (keys times, leader_pos, leader_speed,
    follower_pos, follower_speed); trailing samples short of a whole
    segment are dropped.

    The follower starts at the leader's speed, ``start_gap`` metres back
    (speed * tau + min_clearance when omitted).
    """
    _require(tau > 0.0, "tau must be > 0")
    dt = cycle.sample_period
    per = round(segment_length / dt)
    _require(per >= 1 and abs(per * dt - segment_length) < 1e-9,
             "segment_length must be a multiple of the cycle sample period")
    n_windows = (cycle.speeds.size - 1) // per
    _require(n_windows >= 1, "cycle shorter than one segment")
    n = n_windows * per + 1

    times = cycle.times[:n]
    leader_speed = cycle.speeds[:n]
    leader_pos = cycle.positions()[:n]
    if start_gap is None:
        start_gap = float(leader_speed[0]) * tau + min_clearance
    _require(start_gap > 0.0, "start_gap must be > 0")

    follower_pos = np.empty(n)
    follower_speed = np.empty(n)
    state = VehicleState(float(leader_pos[0]) - start_gap,
                         float(leader_speed[0]), 0.0)
    for w in range(n_windows):
        lo = w * per
        window = slice(lo, lo + per + 1)
        ctx = FeatureContext(
            desired_speed=float(leader_speed[window].max()),
            tau=tau,
            min_clearance=min_clearance,
            leader_times=times[window] - times[lo],
            leader_pos=leader_pos[window],
            leader_speed=leader_speed[window],
        )
        sol = most_likely_segment(state, ctx, weights, segment_length)
        pos, speed, _ = sol.segment.eval_arrays(times[window] - times[lo])
        follower_pos[window] = pos
        follower_speed[window] = speed
        state = sol.segment.end_state

    return {
        "times": times,
        "leader_pos": leader_pos,
        "leader_speed": leader_speed,
        "follower_pos": follower_pos,
        "follower_speed": follower_speed,
    }


def predict_segments(model: DriverModel,
                     demos: Sequence[DemonstrationSegment]) -> list[QuinticSegment]:
    """Most likely segment for each demo, anchored at its observed initial state."""
    out = []
    for seg in demos:
        ctx = FeatureContext.from_demonstration(seg, model.tau, model.min_clearance)
        out.append(most_likely_segment(seg.initial_follower_state, ctx,
                                       model.weights, seg.duration).segment)
    return out


def prediction_errors(model: DriverModel,
                      demos: Sequence[DemonstrationSegment]) -> tuple[float, float]:
    """(position RMSE [m], speed RMSE [m/s]) of the model's predictions
    against the demonstrated follower samples, segment by segment."""
    pos_sq, speed_sq, count = 0.0, 0.0, 0
    for seg, pred in zip(demos, predict_segments(model, demos)):
        pos, speed, _ = pred.eval_arrays(seg.times)
        pos_sq += float(np.sum((pos - seg.follower_pos) ** 2))
        speed_sq += float(np.sum((speed - seg.follower_speed) ** 2))
        count += seg.times.size
    return float(np.sqrt(pos_sq / count)), float(np.sqrt(speed_sq / count))


class DriverBehaviorEstimator(BaseEstimator):
    """Sklearn-style wrapper around :func:`learn`.

    ``fit`` takes a sequence of :class:`DemonstrationSegment` and learns
    the weight vector and headway constant; ``predict`` returns the
    model's most likely segment for each given demonstration segment;
    ``score`` is the negative held-out speed RMSE, so that greater is
    better under sklearn model-selection conventions.
    """

    def __init__(self, min_clearance: float = 5.0, eta0: float = 0.2,
                 eta_halving_epochs: int = 5, max_epochs: int = 50,
                 convergence_tol: float = 0.02, weight_floor: float = WEIGHT_FLOOR):
        self.min_clearance = min_clearance
        self.eta0 = eta0
        self.eta_halving_epochs = eta_halving_epochs
        self.max_epochs = max_epochs
        self.convergence_tol = convergence_tol
        self.weight_floor = weight_floor

    def fit(self, X: Sequence[DemonstrationSegment], y=None):
        config = LearningConfig(
            eta0=self.eta0,
            eta_halving_epochs=self.eta_halving_epochs,
            max_epochs=self.max_epochs,
            convergence_tol=self.convergence_tol,
            weight_floor=self.weight_floor,
        )
        self.result_ = learn(X, config, min_clearance=self.min_clearance)
        self.model_ = self.result_.model
        self.weights_ = self.model_.weights
        self.tau_ = self.model_.tau
        return self

    def predict(self, X: Sequence[DemonstrationSegment]) -> list[QuinticSegment]:
        self._check_fitted()
        return predict_segments(self.model_, X)

    def score(self, X: Sequence[DemonstrationSegment], y=None) -> float:
        self._check_fitted()
        _, speed_rmse = prediction_errors(self.model_, X)
        return -speed_rmse

    def _check_fitted(self):
        if not hasattr(self, "model_"):
            raise ValidationError("estimator is not fitted yet; call fit first")


def save_model(model: DriverModel, path, epochs: int | None = None,
               residual: float | None = None) -> None:
    """Write a driver model to its JSON interchange document."""
    def num(x):
        return float(format(float(x), ".9g"))

    doc = {
        "weights": {
            "a": num(model.weights[0]),
            "ds": num(model.weights[1]),
            "rs": num(model.weights[2]),
            "rd": num(model.weights[3]),
        },
        "tau_s": num(model.tau),
        "d_s_m": num(model.min_clearance),
        "t_h_s": num(model.segment_length),
        "provenance": {
            "epochs": int(epochs) if epochs is not None else 0,
            "residual": num(residual) if residual is not None else None,
        },
    }
    Path(path).write_text(json.dumps(doc, indent=2) + "\n")


def load_model(path) -> DriverModel:
    """Read a driver model from its JSON interchange document."""
    try:
        doc = json.loads(Path(path).read_text())
    except OSError as exc:
        raise ValidationError(f"cannot read model file {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ValidationError(f"{path}: invalid JSON: {exc}") from exc
    try:
        w = doc["weights"]
        weights = np.array([w["a"], w["ds"], w["rs"], w["rd"]], dtype=float)
        return DriverModel(weights=weights, tau=float(doc["tau_s"]),
                           min_clearance=float(doc["d_s_m"]),
                           segment_length=float(doc["t_h_s"]))
    except (KeyError, TypeError, ValueError) as exc:
        raise ValidationError(f"{path}: malformed driver model: {exc}") from exc
