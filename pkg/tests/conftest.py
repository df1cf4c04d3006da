"""Shared fixtures: repository paths and small reusable domain objects."""

from pathlib import Path

import numpy as np
import pytest

from pacc import DriverModel, DrivingCycle

FIXTURES = Path(__file__).resolve().parent.parent / "fixtures"


@pytest.fixture(scope="session")
def fixtures_dir() -> Path:
    return FIXTURES


@pytest.fixture(scope="session")
def us06_cycle() -> DrivingCycle:
    from pacc import load_cycle

    return load_cycle(FIXTURES / "cycles" / "us06.csv")


@pytest.fixture()
def driver_model() -> DriverModel:
    return DriverModel(weights=np.array([1.0, 0.06, 0.9, 0.12]), tau=1.4)


def sine_cycle(duration: float, dt: float = 0.1) -> DrivingCycle:
    """A smooth two-tone cycle without stops, used by learning tests."""
    t = np.arange(0.0, duration + dt / 2, dt)
    speeds = 18.0 + 7.0 * np.sin(2 * np.pi * t / 75) + 3.0 * np.sin(2 * np.pi * t / 19 + 0.7)
    return DrivingCycle(np.clip(speeds, 0.0, None), dt)
