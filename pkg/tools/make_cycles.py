"""Regenerate the driving-cycle fixtures under fixtures/cycles/.

The US06- and FTP-75-style profiles are deterministic synthetic
approximations built from smoothstep speed ramps: they match the real
cycles' duration, speed envelope, stop pattern, and acceleration
character, not their sample-by-sample values.  Keeping the generator in
the repository makes the fixtures reproducible and tunable.

Usage: python3 tools/make_cycles.py [out_dir]
"""

from __future__ import annotations

import sys
from pathlib import Path

import numpy as np

from pacc import DrivingCycle, save_cycle

DT = 0.1


def smoothstep(x: np.ndarray) -> np.ndarray:
    return 3.0 * x ** 2 - 2.0 * x ** 3


def compile_phases(phases, dt: float = DT) -> np.ndarray:
    """Turn ('ramp', v_target, T) / ('hold', T) / ('pad', total_T) phrases
    into a 0.1 s speed series starting from standstill."""
    speeds = [0.0]
    v = 0.0
    for phase in phases:
        kind = phase[0]
        if kind == "ramp":
            _, target, duration = phase
            n = round(duration / dt)
            x = np.arange(1, n + 1) / n
            speeds.extend(v + (target - v) * smoothstep(x))
            v = float(target)
        elif kind == "hold":
            _, duration = phase
            n = round(duration / dt)
            speeds.extend([v] * n)
        elif kind == "pad":
            _, total = phase
            n_total = round(total / dt) + 1
            if len(speeds) > n_total:
                raise ValueError(f"profile overruns pad target {total} s "
                                 f"({(len(speeds) - 1) * dt:.1f} s)")
            speeds.extend([v] * (n_total - len(speeds)))
        else:
            raise ValueError(f"unknown phase {phase!r}")
    return np.asarray(speeds)


# Aggressive profile: 600 s laid out city / highway / city like US06,
# peak 35.9 m/s, ramps up to about +/-3 m/s^2, idle near 7 %.
US06_PHASES = [
    ("hold", 4.0),
    # city start, short sharp humps
    ("ramp", 9.0, 5.0),
    ("hold", 4.0),
    ("ramp", 0.0, 5.0),
    ("hold", 5.0),
    ("ramp", 13.0, 7.0),
    ("hold", 6.0),
    ("ramp", 5.0, 5.0),
    ("ramp", 12.0, 5.0),
    ("ramp", 0.0, 7.0),
    ("hold", 6.0),
    ("ramp", 14.0, 7.0),
    ("hold", 8.0),
    ("ramp", 0.0, 8.0),
    ("hold", 5.0),
    # highway body
    ("ramp", 26.0, 13.0),
    ("hold", 20.0),
    ("ramp", 31.0, 8.0),
    ("hold", 50.0),
    ("ramp", 24.0, 6.0),
    ("hold", 12.0),
    ("ramp", 32.0, 8.0),
    ("hold", 40.0),
    ("ramp", 35.9, 10.0),
    ("hold", 18.0),
    ("ramp", 28.0, 7.0),
    ("hold", 49.0),
    ("ramp", 33.0, 7.0),
    ("hold", 40.0),
    ("ramp", 23.0, 8.0),
    ("hold", 10.0),
    ("ramp", 30.0, 8.0),
    ("hold", 50.0),
    ("ramp", 26.0, 5.0),
    ("hold", 30.0),
    ("ramp", 31.0, 6.0),
    ("hold", 35.0),
    # city end
    ("ramp", 0.0, 16.0),
    ("hold", 6.0),
    ("ramp", 11.0, 6.0),
    ("hold", 8.0),
    ("ramp", 0.0, 7.0),
    ("hold", 4.0),
    ("ramp", 13.0, 7.0),
    ("hold", 10.0),
    ("ramp", 0.0, 9.0),
    ("pad", 600.0),
]


def _hump(peak: float, t_up: float, t_hold: float, t_down: float,
          t_idle: float) -> list:
    return [
        ("ramp", peak, t_up),
        ("hold", t_hold),
        ("ramp", 0.0, t_down),
        ("hold", t_idle),
    ]


# Urban transient bag: 505 s reaching 25.3 m/s once, ramps near
# +/-1.5 m/s^2; used twice, mirroring the repeated first bag.
_FTP_BAG_A = (
    [("hold", 18.0)]
    + _hump(15.6, 16.0, 30.0, 14.0, 10.0)
    + _hump(22.0, 23.0, 42.0, 18.0, 12.0)
    + _hump(25.3, 26.0, 58.0, 22.0, 14.0)
    + _hump(14.0, 13.0, 28.0, 12.0, 9.0)
    + _hump(18.0, 17.0, 40.0, 16.0, 10.0)
    + _hump(12.0, 12.0, 24.0, 11.0, 10.0)
)

# Stabilized bag: 864 s of gentle low-speed humps.
_FTP_BAG_B = (
    _hump(8.0, 9.0, 16.0, 8.0, 11.0)
    + _hump(12.0, 13.0, 26.0, 12.0, 9.0)
    + _hump(10.0, 11.0, 20.0, 10.0, 12.0)
    + _hump(14.0, 15.0, 32.0, 13.0, 10.0)
    + _hump(7.0, 8.0, 12.0, 7.0, 12.0)
    + _hump(13.0, 14.0, 28.0, 12.0, 9.0)
    + _hump(9.0, 10.0, 18.0, 9.0, 13.0)
    + _hump(15.0, 16.0, 36.0, 14.0, 10.0)
    + _hump(11.0, 12.0, 22.0, 11.0, 10.0)
    + _hump(8.0, 9.0, 14.0, 8.0, 12.0)
    + _hump(13.0, 14.0, 30.0, 12.0, 10.0)
    + _hump(10.0, 11.0, 20.0, 10.0, 11.0)
    + _hump(14.0, 15.0, 34.0, 13.0, 9.0)
    + _hump(12.0, 13.0, 24.0, 11.0, 10.0)
    + _hump(11.0, 12.0, 22.0, 11.0, 9.0)
    + [("hold", 10.0)]
)

FTP75_PHASES = _FTP_BAG_A + _FTP_BAG_B + _FTP_BAG_A + [("pad", 1874.0)]


def stats(name: str, speeds: np.ndarray) -> None:
    accel = np.diff(speeds) / DT
    idle = np.mean(speeds < 0.1) * 100.0
    print(f"{name}: {len(speeds)} samples, {(len(speeds) - 1) * DT:.1f} s, "
          f"max {speeds.max():.2f} m/s, mean {speeds.mean():.2f} m/s, "
          f"accel [{accel.min():.2f}, {accel.max():.2f}] m/s^2, "
          f"idle {idle:.1f} %")


def main(out_dir: str = "fixtures/cycles") -> None:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)

    constant = np.full(3001, 15.0)
    us06 = compile_phases(US06_PHASES)
    ftp75 = compile_phases(FTP75_PHASES)

    for name, speeds in (("constant_15mps", constant), ("us06", us06),
                         ("ftp75", ftp75)):
        stats(name, speeds)
        save_cycle(DrivingCycle(speeds, DT), out / f"{name}.csv")
        print(f"  wrote {out / f'{name}.csv'}")


if __name__ == "__main__":
    main(*sys.argv[1:])
