"""The four driving-style features, continuous and discrete.

Continuous features integrate squared deviations over one trajectory
segment (composite trapezoid on a 0.01 s grid) and drive the learner.
Discrete horizon features are their sampled analogs over a controller
prediction and drive the receding-horizon cost.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import DemonstrationSegment, DriverModel, FeatureVector, _require

#: Quadrature step [s] for continuous features.
QUADRATURE_STEP = 0.01


@dataclass(frozen=True)
class FeatureContext:
    """Everything a segment's features depend on besides the follower itself.

    Leader position/speed are sampled on a local time grid covering the
    segment and linearly interpolated in between.  ``desired_speed`` is
    v_d for the segment, ``tau``/``min_clearance`` define the desired
    gap ``speed * tau + min_clearance``.
    """

    desired_speed: float
    tau: float
    min_clearance: float
    leader_times: np.ndarray
    leader_pos: np.ndarray
    leader_speed: np.ndarray

    def __post_init__(self):
        _require(np.isfinite(self.desired_speed) and self.desired_speed >= 0.0,
                 "desired_speed must be >= 0")
        _require(self.tau > 0.0, "tau must be > 0")
        _require(self.min_clearance > 0.0, "min_clearance must be > 0")
        for name in ("leader_times", "leader_pos", "leader_speed"):
            arr = np.asarray(getattr(self, name), dtype=float)
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)
        n = self.leader_times.size
        _require(n >= 2, "leader sampling needs at least 2 points")
        _require(self.leader_pos.size == n and self.leader_speed.size == n,
                 "leader arrays must share the time grid")

    @property
    def coverage(self) -> float:
        return float(self.leader_times[-1])

    def leader_pos_at(self, t: np.ndarray) -> np.ndarray:
        return np.interp(t, self.leader_times, self.leader_pos)

    def leader_speed_at(self, t: np.ndarray) -> np.ndarray:
        return np.interp(t, self.leader_times, self.leader_speed)

    @staticmethod
    def from_demonstration(seg: DemonstrationSegment, tau: float,
                           min_clearance: float) -> "FeatureContext":
        """Context for a demonstration segment: its own leader samples and v_d."""
        return FeatureContext(
            desired_speed=seg.desired_speed,
            tau=tau,
            min_clearance=min_clearance,
            leader_times=seg.times,
            leader_pos=seg.leader_pos,
            leader_speed=seg.leader_speed,
        )


def segment_features(traj, ctx: FeatureContext,
                     step: float = QUADRATURE_STEP) -> FeatureVector:
    """Continuous features of one trajectory segment.

    ``traj`` is anything with a ``duration`` and an
    ``eval_arrays(times) -> (pos, speed, accel)`` method, i.e. a
    :class:`~pacc.trajectory.QuinticSegment` or a
    :class:`~pacc.trajectory.SampledTrajectory`.  Integrals use the
    composite trapezoid rule on a uniform grid of spacing ``step``.
    """
    duration = traj.duration
    _require(ctx.coverage >= duration - 1e-9,
             "leader samples do not cover the segment")
    n = max(2, int(round(duration / step)) + 1)
    ts = np.linspace(0.0, duration, n)
    pos, speed, accel = traj.eval_arrays(ts)

    gap = ctx.leader_pos_at(ts) - pos
    desired_gap = speed * ctx.tau + ctx.min_clearance

    f_accel = np.trapezoid(accel * accel, ts)
    f_desired = np.trapezoid((ctx.desired_speed - speed) ** 2, ts)
    f_relative = np.trapezoid((ctx.leader_speed_at(ts) - speed) ** 2, ts)
    f_distance = np.trapezoid((gap - desired_gap) ** 2, ts)
    return FeatureVector(float(f_accel), float(f_desired),
                         float(f_relative), float(f_distance))


def horizon_features(gaps: np.ndarray, speeds: np.ndarray, accels: np.ndarray,
                     preview: np.ndarray, model: DriverModel,
                     desired_speed: float, sample_time: float) -> FeatureVector:
    """Discrete features over a predicted horizon.

    ``gaps``/``speeds`` are the predicted SAV gap and speed per step,
    ``accels`` the applied acceleration per step, ``preview`` the PV
    speed per step; all four must have equal length.  Each squared
    deviation is summed and scaled by the controller sample time.
    """
    gaps = np.asarray(gaps, dtype=float)
    speeds = np.asarray(speeds, dtype=float)
    accels = np.asarray(accels, dtype=float)
    preview = np.asarray(preview, dtype=float)
    n = gaps.size
    _require(n >= 1, "horizon must contain at least one step")
    _require(speeds.size == n and accels.size == n and preview.size == n,
             "horizon arrays must have equal length")

    desired_gap = speeds * model.tau + model.min_clearance
    f_accel = np.sum(accels ** 2) * sample_time
    f_desired = np.sum((desired_speed - speeds) ** 2) * sample_time
    f_relative = np.sum((preview - speeds) ** 2) * sample_time
    f_distance = np.sum((gaps - desired_gap) ** 2) * sample_time
    return FeatureVector(float(f_accel), float(f_desired),
                         float(f_relative), float(f_distance))
