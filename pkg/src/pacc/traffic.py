"""Human-driven fleet behind the SAV, modeled by the Intelligent Driver Model.

The platoon is ordered front to back: preceding vehicle (speed imposed
from a driving cycle), the controlled SAV, then three IDM followers.
Integration is semi-implicit Euler: speeds update first, positions then
advance with the new speeds.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import ValidationError, VehicleState, _require

FLEET_SIZE = 5
VEHICLE_LABELS = ("PV", "SAV", "HV1", "HV2", "HV3")


class CollisionError(RuntimeError):
    """A follower reached (or passed) its leader; carries the offending pair."""

    def __init__(self, follower: str, leader: str, time: float):
        super().__init__(f"collision: {follower} into {leader} at t={time:.1f} s")
        self.pair = (leader, follower)
        self.time = time


@dataclass(frozen=True)
class IdmParams:
    """Intelligent Driver Model parameters (one homogeneous set for the fleet)."""

    max_accel: float = 2.0
    max_decel: float = 3.0
    delta: float = 4.0
    cruise_speed: float = 30.0
    jam_distance: float = 2.0
    headway_time: float = 1.0

    def __post_init__(self):
        for name in ("max_accel", "max_decel", "delta", "cruise_speed",
                     "jam_distance", "headway_time"):
            _require(getattr(self, name) > 0.0, f"{name} must be > 0")
        _require(self.delta >= 1.0, "delta must be >= 1")


def idm_accel(v: float, dv: float, s: float, p: IdmParams) -> float:
    """IDM acceleration of a follower.

    ``v`` is the follower speed, ``dv = v_follower - v_leader`` (positive
    when closing), ``s`` the gap to the leader.  The desired gap is
    floored at the jam distance and the result clipped to
    [-2 * max_decel, max_accel], both standard numerical guards.
    """
    if s <= 0.0:
        raise CollisionError("follower", "leader", float("nan"))
    s_star = (p.jam_distance + p.headway_time * v
              + v * dv / (2.0 * np.sqrt(p.max_accel * p.max_decel)))
    s_star = max(s_star, p.jam_distance)
    accel = p.max_accel * (1.0 - (v / p.cruise_speed) ** p.delta - (s_star / s) ** 2)
    return float(np.clip(accel, -2.0 * p.max_decel, p.max_accel))


def equilibrium_gap(v: float, p: IdmParams) -> float:
    """Gap at which a follower at speed ``v`` holds zero IDM acceleration.

    Falls back to jam_distance + headway_time * v at or above the cruise
    speed, where the closed form has no root.
    """
    _require(v >= 0.0, "speed must be >= 0")
    if v >= p.cruise_speed:
        return p.jam_distance + p.headway_time * v
    return (p.jam_distance + p.headway_time * v) / \
        np.sqrt(1.0 - (v / p.cruise_speed) ** p.delta)


@dataclass(frozen=True)
class FleetState:
    """Snapshot of the five-vehicle platoon at one instant."""

    vehicles: tuple[VehicleState, ...]
    time: float = 0.0

    def __post_init__(self):
        _require(len(self.vehicles) == FLEET_SIZE,
                 f"fleet must contain exactly {FLEET_SIZE} vehicles")
        positions = [v.position for v in self.vehicles]
        if not all(a > b for a, b in zip(positions, positions[1:])):
            raise ValidationError("vehicle positions must strictly decrease front to back")

    @property
    def positions(self) -> np.ndarray:
        return np.array([v.position for v in self.vehicles])

    @property
    def speeds(self) -> np.ndarray:
        return np.array([v.velocity for v in self.vehicles])

    @property
    def gaps(self) -> np.ndarray:
        pos = self.positions
        return pos[:-1] - pos[1:]


def step_fleet(state: FleetState, sav_accel: float, pv_speed: float,
               dt: float, p: IdmParams) -> FleetState:
    """Advance the platoon by one step of length ``dt``.

    The PV takes the imposed cycle speed ``pv_speed``; the SAV
    integrates the commanded acceleration; each human follower applies
    IDM against its predecessor's current state.  All speeds are floored
    at zero.  Raises :class:`CollisionError` when any gap closes.
    """
    _require(dt > 0.0, "dt must be > 0")
    old = state.vehicles
    speeds = state.speeds
    gaps = state.gaps

    new_speeds = np.empty(FLEET_SIZE)
    new_speeds[0] = max(float(pv_speed), 0.0)
    new_speeds[1] = max(speeds[1] + sav_accel * dt, 0.0)
    for i in range(2, FLEET_SIZE):
        accel = idm_accel(speeds[i], speeds[i] - speeds[i - 1], gaps[i - 1], p)
        new_speeds[i] = max(speeds[i] + accel * dt, 0.0)

    new_time = state.time + dt
    vehicles = []
    for i, veh in enumerate(old):
        position = veh.position + new_speeds[i] * dt
        effective_accel = (new_speeds[i] - speeds[i]) / dt
        vehicles.append(VehicleState(position, float(new_speeds[i]),
                                     float(effective_accel)))
    for i in range(1, FLEET_SIZE):
        if vehicles[i - 1].position - vehicles[i].position <= 0.0:
            raise CollisionError(VEHICLE_LABELS[i], VEHICLE_LABELS[i - 1], new_time)
    return FleetState(tuple(vehicles), new_time)
