"""Traffic-flow and fuel metrics over completed platoon runs.

A run produces a trace: per-step kinematics, per-vehicle fuel rate, and
per-pair gap/headway for the five-vehicle platoon.  This module defines
the trace container and its CSV interchange format, the gap/headway
averages, and a power-based polynomial fuel model (VT-CPFM form) whose
calibration ships as data, not code.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, fields
from importlib import resources
from pathlib import Path

import numpy as np

from .core import ValidationError, VehicleState, _require
from .traffic import FLEET_SIZE, VEHICLE_LABELS

#: Follower speeds below this [m/s] leave the headway undefined; such
#: samples are excluded from time-headway averages.
LOW_SPEED_GUARD = 1.0

GRAVITY = 9.80665

N_PAIRS = FLEET_SIZE - 1


class MetricUndefinedError(RuntimeError):
    """Every sample of some vehicle pair was excluded from a metric."""

    def __init__(self, metric: str, pair: tuple[str, str]):
        super().__init__(f"{metric} undefined for pair {pair[0]}-{pair[1]}: "
                         "all samples excluded")
        self.metric = metric
        self.pair = pair


def headway(gap: float, follower_speed: float) -> float:
    """Time headway gap/speed [s], or NaN under the low-speed guard."""
    _require(gap > 0.0, "gap must be > 0")
    if follower_speed < LOW_SPEED_GUARD:
        return float("nan")
    return gap / follower_speed


@dataclass(frozen=True)
class FuelParams:
    """Road-load and fuel-map calibration for one vehicle.

    The wheel power [kW] combines inertial, rolling, aerodynamic, and
    grade resistance over driveline efficiency; the fuel rate [L/s] is a
    quadratic polynomial in positive power with ``alpha0`` as the idle
    floor.  Defaults come from :func:`default_fuel_params`, never from
    code.
    """

    mass: float
    drag_coefficient: float
    frontal_area: float
    driveline_efficiency: float
    rotating_mass_factor: float
    rolling_coefficient: float
    rolling_c1: float
    rolling_c2: float
    air_density: float
    grade: float
    alpha0: float
    alpha1: float
    alpha2: float

    def __post_init__(self):
        for name in (f.name for f in fields(self)):
            _require(np.isfinite(getattr(self, name)), f"{name} must be finite")
        _require(self.alpha0 > 0.0, "alpha0 must be > 0")
        _require(self.alpha2 >= 0.0, "alpha2 must be >= 0")
        _require(self.mass > 0.0, "mass must be > 0")
        _require(0.0 < self.driveline_efficiency <= 1.0,
                 "driveline_efficiency must be in (0, 1]")
        _require(self.frontal_area > 0.0, "frontal_area must be > 0")
        _require(self.air_density > 0.0, "air_density must be > 0")


def default_fuel_params() -> FuelParams:
    """Packaged mid-size gasoline sedan calibration (see data/fuel_params.json)."""
    text = (resources.files("pacc") / "data" / "fuel_params.json").read_text()
    values = {k: float(v) for k, v in json.loads(text).items()
              if k not in ("version", "description")}
    try:
        return FuelParams(**values)
    except TypeError as exc:
        raise ValidationError(f"packaged fuel defaults are incomplete: {exc}") from exc


def fuel_params_from_mapping(mapping, base: FuelParams | None = None) -> FuelParams:
    """Overlay a key/value mapping onto a base calibration.

    Keys absent from the mapping keep their ``base`` value (the packaged
    defaults when ``base`` is omitted); unknown keys are rejected.
    ``version`` and ``description`` metadata keys are ignored.
    """
    known = {f.name for f in fields(FuelParams)}
    values = {k: float(v) for k, v in mapping.items()
              if k not in ("version", "description")}
    unknown = set(values) - known
    _require(not unknown, f"unknown fuel parameter(s): {sorted(unknown)}")
    if base is None:
        base = default_fuel_params()
    merged = {name: getattr(base, name) for name in known}
    merged.update(values)
    return FuelParams(**merged)


def _fuel_rate_arrays(speeds: np.ndarray, accels: np.ndarray,
                      p: FuelParams) -> np.ndarray:
    """Vectorized fuel rate [L/s] from speed [m/s] and acceleration [m/s^2]."""
    v = np.asarray(speeds, dtype=float)
    a = np.asarray(accels, dtype=float)
    rolling = p.mass * GRAVITY * p.rolling_coefficient / 1000.0 \
        * (p.rolling_c1 * 3.6 * v + p.rolling_c2)
    aero = 0.5 * p.air_density * p.drag_coefficient * p.frontal_area * v ** 2
    climb = p.mass * GRAVITY * p.grade
    force = p.mass * (1.0 + p.rotating_mass_factor) * a + rolling + aero + climb
    power = force * v / (1000.0 * p.driveline_efficiency)
    return np.where(power > 0.0,
                    p.alpha0 + p.alpha1 * power + p.alpha2 * power ** 2,
                    p.alpha0)


def wheel_power(state: VehicleState, p: FuelParams) -> float:
    """Wheel power demand [kW] of the road-load equation at one state."""
    v, a = state.velocity, state.acceleration
    rolling = p.mass * GRAVITY * p.rolling_coefficient / 1000.0 \
        * (p.rolling_c1 * 3.6 * v + p.rolling_c2)
    aero = 0.5 * p.air_density * p.drag_coefficient * p.frontal_area * v ** 2
    climb = p.mass * GRAVITY * p.grade
    force = p.mass * (1.0 + p.rotating_mass_factor) * a + rolling + aero + climb
    return force * v / (1000.0 * p.driveline_efficiency)


def fuel_rate(state: VehicleState, p: FuelParams) -> float:
    """Instantaneous fuel rate [L/s]; the idle floor alpha0 applies at P <= 0."""
    return float(_fuel_rate_arrays(np.array([state.velocity]),
                                   np.array([state.acceleration]), p)[0])


@dataclass(frozen=True)
class Trace:
    """Recorded platoon run on a fixed time grid.

    ``positions``/``speeds``/``accels``/``fuel_rates`` are (n, 5) front
    to back; ``gaps``/``headways`` are (n, 4) for the four consecutive
    pairs, headway NaN where the low-speed guard excluded the sample.
    """

    times: np.ndarray
    positions: np.ndarray
    speeds: np.ndarray
    accels: np.ndarray
    fuel_rates: np.ndarray
    gaps: np.ndarray
    headways: np.ndarray

    def __post_init__(self):
        times = np.asarray(self.times, dtype=float)
        object.__setattr__(self, "times", times)
        _require(times.ndim == 1 and times.size >= 1, "trace needs at least 1 step")
        _require(bool(np.all(np.diff(times) > 0.0)), "trace time must strictly increase")
        n = times.size
        for name, width in (("positions", FLEET_SIZE), ("speeds", FLEET_SIZE),
                            ("accels", FLEET_SIZE), ("fuel_rates", FLEET_SIZE),
                            ("gaps", N_PAIRS), ("headways", N_PAIRS)):
            arr = np.asarray(getattr(self, name), dtype=float)
            _require(arr.shape == (n, width), f"{name} must have shape ({n}, {width})")
            if name != "headways":
                _require(bool(np.all(np.isfinite(arr))), f"{name} must be finite")
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)
        times.setflags(write=False)
        _require(bool(np.all(self.gaps > 0.0)), "recorded gaps must be > 0")
        _require(bool(np.all(self.fuel_rates >= 0.0)), "fuel rates must be >= 0")

    @property
    def duration(self) -> float:
        return float(self.times[-1] - self.times[0])

    def shifted(self, offset: float) -> "Trace":
        """Same trace with every position moved by ``offset`` [m]."""
        return Trace(self.times, self.positions + offset, self.speeds,
                     self.accels, self.fuel_rates, self.gaps, self.headways)


def build_trace(times, positions, speeds, accels, fuel: FuelParams) -> Trace:
    """Assemble a :class:`Trace` from kinematic arrays, deriving the rest.

    Fuel rates come from the fuel model, gaps from position differences,
    and headways from the guard-filtered gap/speed quotient.
    """
    positions = np.asarray(positions, dtype=float)
    speeds = np.asarray(speeds, dtype=float)
    accels = np.asarray(accels, dtype=float)
    rates = _fuel_rate_arrays(speeds, accels, fuel)
    gaps = positions[:, :-1] - positions[:, 1:]
    follower_speeds = speeds[:, 1:]
    headways = np.full_like(gaps, np.nan)
    np.divide(gaps, follower_speeds, out=headways,
              where=follower_speeds >= LOW_SPEED_GUARD)
    return Trace(np.asarray(times, dtype=float), positions, speeds, accels,
                 rates, gaps, headways)


def average_metrics(trace: Trace) -> tuple[float, float]:
    """(mean gap [m], mean time headway [s]) over the platoon.

    Each of the four consecutive pairs is time-averaged first (headway
    over its guard-included samples only), then the four pair averages
    are averaged.  Raises :class:`MetricUndefinedError` when a pair has
    no included headway sample at all.
    """
    _require(trace.times.size >= 2, "metrics need a trace of at least 2 steps")
    pair_gap = trace.gaps.mean(axis=0)
    pair_headway = np.empty(N_PAIRS)
    for i in range(N_PAIRS):
        column = trace.headways[:, i]
        included = column[~np.isnan(column)]
        if included.size == 0:
            raise MetricUndefinedError(
                "headway", (VEHICLE_LABELS[i], VEHICLE_LABELS[i + 1]))
        pair_headway[i] = included.mean()
    return float(pair_gap.mean()), float(pair_headway.mean())


def total_fuel(trace: Trace, p: FuelParams) -> float:
    """Total fuel [L]: per-vehicle trapezoidal rate integral, summed over the fleet."""
    _require(trace.times.size >= 1, "total fuel needs a nonempty trace")
    if trace.times.size == 1:
        return 0.0
    rates = _fuel_rate_arrays(trace.speeds, trace.accels, p)
    return float(sum(np.trapezoid(rates[:, k], trace.times)
                     for k in range(FLEET_SIZE)))


@dataclass(frozen=True)
class TrafficReport:
    """Aggregate metrics of one completed run, with the trace that produced them."""

    gap_mean: float
    headway_mean: float
    fuel_total: float
    trace: Trace

    def __post_init__(self):
        _require(self.gap_mean > 0.0, "gap_mean must be > 0")
        _require(self.headway_mean > 0.0, "headway_mean must be > 0")
        _require(self.fuel_total >= 0.0, "fuel_total must be >= 0")

    @staticmethod
    def from_trace(trace: Trace, fuel: FuelParams) -> "TrafficReport":
        gap_mean, headway_mean = average_metrics(trace)
        return TrafficReport(gap_mean, headway_mean,
                             total_fuel(trace, fuel), trace)


def _trace_header() -> list[str]:
    cols = ["t"]
    cols += [f"veh{k}_pos" for k in range(FLEET_SIZE)]
    cols += [f"veh{k}_speed" for k in range(FLEET_SIZE)]
    cols += [f"veh{k}_accel" for k in range(FLEET_SIZE)]
    cols += [f"veh{k}_fuelrate" for k in range(FLEET_SIZE)]
    cols += [f"gap{k}" for k in range(1, FLEET_SIZE)]
    cols += [f"headway{k}" for k in range(1, FLEET_SIZE)]
    return cols


def save_trace(trace: Trace, path) -> None:
    """Write a trace as CSV, one row per step, 9 significant digits."""
    table = np.hstack([trace.times[:, None], trace.positions, trace.speeds,
                       trace.accels, trace.fuel_rates, trace.gaps,
                       trace.headways])
    lines = [",".join(_trace_header())]
    lines += [",".join(format(v, ".9g") for v in row) for row in table]
    Path(path).write_text("\n".join(lines) + "\n")


def load_trace(path) -> Trace:
    """Read a trace CSV written by :func:`save_trace`."""
    path = Path(path)
    try:
        lines = path.read_text().splitlines()
    except OSError as exc:
        raise ValidationError(f"cannot read trace file {path}: {exc}") from exc
    _require(len(lines) >= 2, f"{path}: trace file needs a header and data rows")
    _require(lines[0].split(",") == _trace_header(),
             f"{path}: unexpected trace header")
    try:
        table = np.array([[float(v) for v in line.split(",")]
                          for line in lines[1:] if line])
    except ValueError as exc:
        raise ValidationError(f"{path}: malformed trace row: {exc}") from exc
    _require(table.ndim == 2 and table.shape[1] == len(_trace_header()),
             f"{path}: wrong trace column count")
    k, p = 1, FLEET_SIZE
    return Trace(times=table[:, 0],
                 positions=table[:, k:k + p],
                 speeds=table[:, k + p:k + 2 * p],
                 accels=table[:, k + 2 * p:k + 3 * p],
                 fuel_rates=table[:, k + 3 * p:k + 4 * p],
                 gaps=table[:, k + 4 * p:k + 4 * p + N_PAIRS],
                 headways=table[:, k + 4 * p + N_PAIRS:])
