"""Quintic trajectory segments and demonstration splitting.

A follower trajectory is represented piecewise by quintic polynomials in
a local time variable ``t in [0, duration]``.  The three lowest-order
coefficients pin the initial position/velocity/acceleration; the three
highest-order ones are the free parameters the learner optimizes.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import (
    DemonstrationSegment,
    ValidationError,
    VehicleState,
    _require,
)


@dataclass(frozen=True)
class QuinticSegment:
    """One quintic polynomial piece r(t) = c0 t^5 + c1 t^4 + c2 t^3 + c3 t^2 + c4 t + c5.

    ``coefficients`` is ordered highest power first, so it can be fed to
    ``numpy.polyval`` directly.  ``duration`` is the segment length [s].
    """

    coefficients: np.ndarray
    duration: float

    def __post_init__(self):
        c = np.asarray(self.coefficients, dtype=float)
        _require(c.shape == (6,), "quintic needs exactly 6 coefficients")
        _require(bool(np.all(np.isfinite(c))), "coefficients must be finite")
        _require(np.isfinite(self.duration) and self.duration > 0.0,
                 "duration must be > 0")
        c.setflags(write=False)
        object.__setattr__(self, "coefficients", c)

    def eval_arrays(self, t: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Position, velocity, and acceleration arrays at local times ``t``."""
        c = self.coefficients
        dc = np.polyder(c)
        ddc = np.polyder(c, 2)
        return np.polyval(c, t), np.polyval(dc, t), np.polyval(ddc, t)

    def state_at(self, t: float) -> VehicleState:
        """Evaluate the segment at one local time; ``t`` must lie inside [0, duration]."""
        if not (0.0 <= t <= self.duration + 1e-12):
            raise ValidationError(
                f"time {t} outside segment [0, {self.duration}]")
        r, v, a = self.eval_arrays(np.asarray(t, dtype=float))
        return VehicleState(float(r), float(v), float(a))

    @property
    def end_state(self) -> VehicleState:
        return self.state_at(self.duration)


def anchor(initial: VehicleState) -> tuple[float, float, float]:
    """Low-order coefficients (c3, c4, c5) matching an initial state exactly.

    c5 = position, c4 = velocity, c3 = acceleration / 2, so that the
    segment's value and first two derivatives at t = 0 reproduce the
    state bit-exactly regardless of the free high-order coefficients.
    """
    return initial.acceleration / 2.0, initial.velocity, initial.position


def anchored_segment(free: np.ndarray, initial: VehicleState,
                     duration: float) -> QuinticSegment:
    """Build a segment from free high-order coefficients (c0, c1, c2) and an anchor state."""
    c3, c4, c5 = anchor(initial)
    free = np.asarray(free, dtype=float)
    coeffs = np.array([free[0], free[1], free[2], c3, c4, c5])
    return QuinticSegment(coeffs, duration)


@dataclass(frozen=True)
class SampledTrajectory:
    """A trajectory given by samples on a uniform local grid, linearly interpolated.

    Provides the same ``duration``/``eval_arrays`` surface as
    :class:`QuinticSegment`, so features can be computed over observed
    data without fitting a polynomial to it.
    """

    times: np.ndarray
    positions: np.ndarray
    speeds: np.ndarray
    accels: np.ndarray

    def __post_init__(self):
        for name in ("times", "positions", "speeds", "accels"):
            arr = np.asarray(getattr(self, name), dtype=float)
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)
        n = self.times.size
        _require(n >= 2, "sampled trajectory needs at least 2 samples")
        for name in ("positions", "speeds", "accels"):
            _require(getattr(self, name).size == n, f"{name} size mismatch")

    @property
    def duration(self) -> float:
        return float(self.times[-1] - self.times[0])

    def eval_arrays(self, t: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        return (np.interp(t, self.times, self.positions),
                np.interp(t, self.times, self.speeds),
                np.interp(t, self.times, self.accels))

    @staticmethod
    def from_demonstration(seg: DemonstrationSegment) -> "SampledTrajectory":
        return SampledTrajectory(seg.times, seg.follower_pos,
                                 seg.follower_speed, seg.follower_accel)


def central_difference(values: np.ndarray, dt: float) -> np.ndarray:
    """Derivative of a sampled signal: central differences inside, one-sided at the ends."""
    values = np.asarray(values, dtype=float)
    out = np.empty_like(values)
    out[1:-1] = (values[2:] - values[:-2]) / (2.0 * dt)
    out[0] = (values[1] - values[0]) / dt
    out[-1] = (values[-1] - values[-2]) / dt
    return out


def split_demonstration(times: np.ndarray,
                        leader_pos: np.ndarray, leader_speed: np.ndarray,
                        follower_pos: np.ndarray, follower_speed: np.ndarray,
                        segment_length: float,
                        follower_accel: np.ndarray | None = None,
                        ) -> list[DemonstrationSegment]:
    """Cut a paired leader/follower recording into consecutive fixed-length segments.

    All five input arrays share one uniform time grid.  Segments are
    non-overlapping except for the shared boundary sample; a trailing
    remainder shorter than ``segment_length`` is dropped.  Follower
    accelerations are derived by central differences of the speed signal
    when not supplied.  Each segment's desired speed is the maximum
    follower speed observed within it.
    """
    times = np.asarray(times, dtype=float)
    arrays = [np.asarray(a, dtype=float)
              for a in (leader_pos, leader_speed, follower_pos, follower_speed)]
    n = times.size
    _require(n >= 2, "demonstration needs at least 2 samples")
    for arr in arrays:
        _require(arr.size == n, "leader/follower arrays must share the time grid")
    steps = np.diff(times)
    _require(bool(np.all(steps > 0.0)), "time must be strictly increasing")
    dt = float(steps[0])
    _require(bool(np.allclose(steps, dt, rtol=0.0, atol=1e-9)),
             "demonstration time grid must be uniform")
    leader_pos, leader_speed, follower_pos, follower_speed = arrays

    per = int(round(segment_length / dt))
    _require(per >= 1 and abs(per * dt - segment_length) < 1e-9,
             "segment_length must be a multiple of the sample period")
    _require(n - 1 >= per, "demonstration shorter than one segment")

    if follower_accel is None:
        follower_accel = central_difference(follower_speed, dt)
    else:
        follower_accel = np.asarray(follower_accel, dtype=float)
        _require(follower_accel.size == n, "follower_accel size mismatch")

    segments = []
    n_segments = (n - 1) // per
    for k in range(n_segments):
        sl = slice(k * per, k * per + per + 1)
        segments.append(DemonstrationSegment(
            duration=segment_length,
            sample_period=dt,
            follower_pos=follower_pos[sl],
            follower_speed=follower_speed[sl],
            follower_accel=follower_accel[sl],
            leader_pos=leader_pos[sl],
            leader_speed=leader_speed[sl],
        ))
    return segments


def load_demonstration(path) -> dict[str, np.ndarray]:
    """Read a demonstration CSV with columns
    ``time_s,leader_pos_m,leader_speed_mps,follower_pos_m,follower_speed_mps``.

    Returns the five columns as arrays keyed by short names
    (``times``, ``leader_pos``, ``leader_speed``, ``follower_pos``,
    ``follower_speed``).
    """
    import csv
    from pathlib import Path

    expected = ["time_s", "leader_pos_m", "leader_speed_mps",
                "follower_pos_m", "follower_speed_mps"]
    path = Path(path)
    try:
        with path.open(newline="") as fh:
            reader = csv.reader(fh)
            header = next(reader, None)
            _require(header is not None and [h.strip() for h in header[:5]] == expected,
                     f"{path}: expected header {','.join(expected)}")
            rows = [[float(x) for x in r[:5]] for r in reader if r]
    except OSError as exc:
        raise ValidationError(f"cannot read demonstration {path}: {exc}") from exc
    except (ValueError, IndexError) as exc:
        raise ValidationError(f"{path}: malformed demonstration row: {exc}") from exc
    _require(len(rows) >= 2, f"{path}: demonstration needs at least 2 samples")
    data = np.array(rows)
    return {
        "times": data[:, 0],
        "leader_pos": data[:, 1],
        "leader_speed": data[:, 2],
        "follower_pos": data[:, 3],
        "follower_speed": data[:, 4],
    }


def save_demonstration(path, times, leader_pos, leader_speed,
                       follower_pos, follower_speed) -> None:
    """Write a demonstration in the five-column CSV interchange format."""
    import csv
    from pathlib import Path

    with Path(path).open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["time_s", "leader_pos_m", "leader_speed_mps",
                         "follower_pos_m", "follower_speed_mps"])
        for row in zip(times, leader_pos, leader_speed, follower_pos, follower_speed):
            writer.writerow([format(float(x), ".9g") for x in row])
