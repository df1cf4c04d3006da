"""Shared domain types, units, and validation.

All quantities are SI throughout the package: metres, seconds, m/s,
m/s^2, litres.  Driving cycles, demonstration segments, and driver
models are immutable value types; everything downstream treats them as
read-only.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np


class ValidationError(ValueError):
    """Raised when an input value or file violates a documented invariant."""


def _require(condition: bool, message: str) -> None:
    if not condition:
        raise ValidationError(message)


@dataclass(frozen=True)
class VehicleState:
    """Longitudinal state of one vehicle: position [m], velocity [m/s], acceleration [m/s^2]."""

    position: float
    velocity: float
    acceleration: float = 0.0


def validate_state(state: VehicleState) -> None:
    """Check a :class:`VehicleState` against its invariants.

    Raises :class:`ValidationError` naming the offending field for
    non-finite values or negative velocity.
    """
    for name in ("position", "velocity", "acceleration"):
        if not np.isfinite(getattr(state, name)):
            raise ValidationError(f"{name} must be finite")
    if state.velocity < 0.0:
        raise ValidationError("velocity must be >= 0")


@dataclass(frozen=True)
class DrivingCycle:
    """A speed-vs-time profile sampled at a fixed period.

    Speeds are nonnegative [m/s]; ``sample_period`` is the fixed spacing
    [s] between consecutive samples.
    """

    speeds: np.ndarray
    sample_period: float = 0.1

    def __post_init__(self):
        speeds = np.asarray(self.speeds, dtype=float)
        object.__setattr__(self, "speeds", speeds)
        _require(self.sample_period > 0.0, "sample_period must be > 0")
        _require(speeds.ndim == 1 and speeds.size >= 2, "cycle needs at least 2 samples")
        _require(bool(np.all(np.isfinite(speeds))), "cycle speeds must be finite")
        _require(bool(np.all(speeds >= 0.0)), "cycle speeds must be >= 0")
        speeds.setflags(write=False)

    @property
    def duration(self) -> float:
        return (self.speeds.size - 1) * self.sample_period

    @property
    def times(self) -> np.ndarray:
        return np.arange(self.speeds.size) * self.sample_period

    @property
    def max_speed(self) -> float:
        return float(self.speeds.max())

    def speed_at(self, t) -> np.ndarray | float:
        """Linearly interpolated speed at time(s) ``t``, held constant beyond the ends."""
        return np.interp(t, self.times, self.speeds)

    def positions(self, start: float = 0.0) -> np.ndarray:
        """Cumulative distance [m] at each sample, by trapezoidal integration."""
        dt = self.sample_period
        mids = 0.5 * (self.speeds[1:] + self.speeds[:-1]) * dt
        return start + np.concatenate(([0.0], np.cumsum(mids)))


def resample_cycle(cycle: DrivingCycle, new_period: float) -> DrivingCycle:
    """Resample a cycle to ``new_period`` by linear interpolation.

    Endpoints are preserved; interpolated speeds are clipped at zero.
    The new grid spans the same duration, so a duration that is not an
    exact multiple of ``new_period`` keeps its final sample by rounding
    the sample count to the nearest grid.
    """
    _require(new_period > 0.0, "new_period must be > 0")
    if abs(new_period - cycle.sample_period) < 1e-12:
        return cycle
    n = int(round(cycle.duration / new_period)) + 1
    _require(n >= 2, "resample produced fewer than 2 samples")
    new_times = np.linspace(0.0, cycle.duration, n)
    speeds = np.interp(new_times, cycle.times, cycle.speeds)
    return DrivingCycle(np.clip(speeds, 0.0, None), new_period)


@dataclass(frozen=True)
class DemonstrationSegment:
    """One fixed-length piece of a paired leader/follower demonstration.

    Leader and follower are sampled on the same local time grid
    ``0, dt, ..., duration``.  ``desired_speed`` is the maximum follower
    speed observed within the segment.
    """

    duration: float
    sample_period: float
    follower_pos: np.ndarray
    follower_speed: np.ndarray
    follower_accel: np.ndarray
    leader_pos: np.ndarray
    leader_speed: np.ndarray
    desired_speed: float = field(default=None)  # type: ignore[assignment]

    def __post_init__(self):
        arrays = {}
        n = None
        for name in ("follower_pos", "follower_speed", "follower_accel",
                     "leader_pos", "leader_speed"):
            arr = np.asarray(getattr(self, name), dtype=float)
            _require(bool(np.all(np.isfinite(arr))), f"{name} must be finite")
            arr.setflags(write=False)
            arrays[name] = arr
            if n is None:
                n = arr.size
            else:
                _require(arr.size == n, "leader and follower sample counts must match")
        for name, arr in arrays.items():
            object.__setattr__(self, name, arr)
        _require(n >= 2, "segment needs at least 2 samples")
        _require(self.sample_period > 0.0, "sample_period must be > 0")
        _require(abs(self.duration - (n - 1) * self.sample_period) < 1e-9,
                 "duration must equal (sample count - 1) * sample_period")
        if self.desired_speed is None:
            object.__setattr__(self, "desired_speed", float(self.follower_speed.max()))

    @property
    def times(self) -> np.ndarray:
        return np.arange(self.follower_pos.size) * self.sample_period

    @property
    def initial_follower_state(self) -> VehicleState:
        return VehicleState(float(self.follower_pos[0]),
                            float(self.follower_speed[0]),
                            float(self.follower_accel[0]))

    @property
    def follower_samples(self) -> tuple[VehicleState, ...]:
        return tuple(VehicleState(p, v, a) for p, v, a in
                     zip(self.follower_pos, self.follower_speed, self.follower_accel))

    @property
    def gaps(self) -> np.ndarray:
        return self.leader_pos - self.follower_pos


#: Componentwise lower bound kept on learned weights; a nonpositive
#: acceleration weight would make the trajectory cost unbounded below.
WEIGHT_FLOOR = 1e-3

#: Order of the four driving-style features throughout the package.
FEATURE_NAMES = ("accel", "desired_speed", "relative_speed", "relative_distance")


@dataclass(frozen=True)
class DriverModel:
    """Learned per-driver cost weights plus the headway constants they refer to.

    ``weights`` is ordered as :data:`FEATURE_NAMES`.  ``tau`` is the
    driver's minimum observed time headway [s]; ``min_clearance`` the
    safety clearance [m] in the desired-distance term; ``segment_length``
    the trajectory-segment length [s] the model was trained with.
    """

    weights: np.ndarray
    tau: float
    min_clearance: float = 5.0
    segment_length: float = 3.0

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=float)
        _require(w.shape == (4,), "weights must have 4 components")
        _require(bool(np.all(np.isfinite(w))), "weights must be finite")
        _require(bool(np.all(w >= WEIGHT_FLOOR)), f"weights must be >= {WEIGHT_FLOOR}")
        w.setflags(write=False)
        object.__setattr__(self, "weights", w)
        _require(np.isfinite(self.tau) and self.tau > 0.0, "tau must be > 0")
        _require(self.min_clearance > 0.0, "min_clearance must be > 0")
        _require(self.segment_length > 0.0, "segment_length must be > 0")

    def desired_gap(self, speed) -> np.ndarray | float:
        """Desired gap distance speed*tau + min_clearance for the given speed(s)."""
        return np.asarray(speed) * self.tau + self.min_clearance


@dataclass(frozen=True)
class FeatureVector:
    """The four driving-style feature values (each an integral of a squared deviation)."""

    accel: float
    desired_speed: float
    relative_speed: float
    relative_distance: float

    def __post_init__(self):
        for name in FEATURE_NAMES:
            v = getattr(self, name)
            _require(np.isfinite(v), f"feature {name} must be finite")
            _require(v >= 0.0, f"feature {name} must be >= 0")

    def as_array(self) -> np.ndarray:
        return np.array([self.accel, self.desired_speed,
                         self.relative_speed, self.relative_distance])

    def cost(self, weights: np.ndarray) -> float:
        return float(np.dot(np.asarray(weights, dtype=float), self.as_array()))

    @staticmethod
    def from_array(values) -> "FeatureVector":
        a = np.asarray(values, dtype=float)
        return FeatureVector(float(a[0]), float(a[1]), float(a[2]), float(a[3]))

    @staticmethod
    def mean(vectors) -> "FeatureVector":
        vectors = list(vectors)
        _require(len(vectors) >= 1, "mean of an empty feature set")
        return FeatureVector.from_array(
            np.mean([v.as_array() for v in vectors], axis=0))


def load_cycle(path, sample_period: float | None = None) -> DrivingCycle:
    """Read a driving cycle from a two-column CSV ``time_s,speed_mps``.

    The header row is required and time must be strictly increasing.
    A uniform source grid is kept as-is (unless ``sample_period`` says
    otherwise); irregular grids are resampled, to ``sample_period`` when
    given and to 0.1 s otherwise.
    """
    path = Path(path)
    try:
        with path.open(newline="") as fh:
            reader = csv.reader(fh)
            header = next(reader, None)
            _require(header is not None and [h.strip() for h in header[:2]] == ["time_s", "speed_mps"],
                     f"{path}: expected header 'time_s,speed_mps'")
            rows = [(float(r[0]), float(r[1])) for r in reader if r]
    except OSError as exc:
        raise ValidationError(f"cannot read cycle file {path}: {exc}") from exc
    except (ValueError, IndexError) as exc:
        raise ValidationError(f"{path}: malformed cycle row: {exc}") from exc
    _require(len(rows) >= 2, f"{path}: cycle needs at least 2 samples")
    times = np.array([r[0] for r in rows])
    speeds = np.array([r[1] for r in rows])
    _require(bool(np.all(np.diff(times) > 0.0)), f"{path}: time must be strictly increasing")

    steps = np.diff(times)
    uniform = np.allclose(steps, steps[0], rtol=0.0, atol=1e-9)
    if uniform and sample_period is None:
        return DrivingCycle(np.clip(speeds, 0.0, None), float(steps[0]))
    period = sample_period if sample_period is not None else 0.1
    _require(period > 0.0, "sample_period must be > 0")
    duration = times[-1] - times[0]
    n = int(round(duration / period)) + 1
    grid = times[0] + np.linspace(0.0, duration, n)
    resampled = np.interp(grid, times, speeds)
    return DrivingCycle(np.clip(resampled, 0.0, None), period)


def save_cycle(cycle: DrivingCycle, path) -> None:
    """Write a cycle in the two-column CSV interchange format."""
    path = Path(path)
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["time_s", "speed_mps"])
        for t, v in zip(cycle.times, cycle.speeds):
            writer.writerow([format(t, ".9g"), format(v, ".9g")])
