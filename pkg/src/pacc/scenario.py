"""Orchestration of full platoon runs and A/B comparisons.

A scenario couples a driving cycle (replayed by the preceding vehicle),
a learned driver model steering the SAV controller, the IDM followers,
and a fuel calibration.  Runs are bit-deterministic given a config.
"""

from __future__ import annotations

import json
import logging
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

from .control import AccController, ControllerConfig
from .core import (
    DriverModel,
    DrivingCycle,
    ValidationError,
    VehicleState,
    _require,
    load_cycle,
    resample_cycle,
)
from .evaluation import (
    FuelParams,
    Trace,
    TrafficReport,
    build_trace,
    default_fuel_params,
    fuel_params_from_mapping,
)
from .irl import load_model
from .traffic import (
    FLEET_SIZE,
    CollisionError,
    FleetState,
    IdmParams,
    equilibrium_gap,
    step_fleet,
)

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class ScenarioConfig:
    """Everything a run needs, with all file references already loaded.

    ``initial_gaps`` is either an explicit front-to-back 4-tuple [m] or
    None for the equilibrium rule.  ``source`` echoes the resolved
    configuration for reports; it is carried, never interpreted.
    """

    cycle: DrivingCycle
    driver: DriverModel
    idm: IdmParams
    controller: ControllerConfig = ControllerConfig()
    fuel: FuelParams = field(default_factory=default_fuel_params)
    initial_gaps: tuple[float, ...] | None = None
    sim_dt: float = 0.1
    source: dict = field(default_factory=dict)

    def __post_init__(self):
        _require(self.sim_dt > 0.0, "sim_dt must be > 0")
        n = round(self.controller.sample_time / self.sim_dt)
        _require(n >= 1 and abs(n * self.sim_dt - self.controller.sample_time) < 1e-9,
                 "sim_dt must divide the controller sample time")
        if self.initial_gaps is not None:
            gaps = tuple(float(g) for g in self.initial_gaps)
            _require(len(gaps) == FLEET_SIZE - 1,
                     f"initial_gaps needs {FLEET_SIZE - 1} entries")
            _require(all(g > 0.0 for g in gaps), "initial gaps must be > 0")
            object.__setattr__(self, "initial_gaps", gaps)

    @property
    def steps_per_control(self) -> int:
        return round(self.controller.sample_time / self.sim_dt)


def load_scenario(path) -> ScenarioConfig:
    """Read a scenario TOML file, loading every referenced artifact.

    Relative cycle/model paths are resolved against the TOML file's own
    directory.  An omitted IDM cruise speed defaults to the cycle's
    maximum; an omitted [fuel] section keeps the packaged calibration.
    """
    path = Path(path)
    try:
        with path.open("rb") as fh:
            doc = tomllib.load(fh)
    except OSError as exc:
        raise ValidationError(f"cannot read scenario file {path}: {exc}") from exc
    except tomllib.TOMLDecodeError as exc:
        raise ValidationError(f"{path}: invalid TOML: {exc}") from exc

    def resolve(ref: str) -> Path:
        p = Path(ref)
        return p if p.is_absolute() else path.parent / p

    def section(name: str, required: bool = False) -> dict:
        table = doc.get(name, None)
        if table is None:
            _require(not required, f"{path}: missing [{name}] section")
            return {}
        _require(isinstance(table, dict), f"{path}: [{name}] must be a table")
        return dict(table)

    cycle_ref = section("cycle", required=True).get("path")
    _require(isinstance(cycle_ref, str), f"{path}: [cycle] needs a 'path' entry")
    cycle = load_cycle(resolve(cycle_ref))

    model_ref = section("driver_model", required=True).get("path")
    _require(isinstance(model_ref, str), f"{path}: [driver_model] needs a 'path' entry")
    driver = load_model(resolve(model_ref))

    idm_tbl = section("idm")
    if "cruise_speed" not in idm_tbl:
        idm_tbl["cruise_speed"] = cycle.max_speed
    try:
        idm = IdmParams(**idm_tbl)
    except TypeError as exc:
        raise ValidationError(f"{path}: bad [idm] key: {exc}") from exc

    try:
        controller = ControllerConfig(**section("controller"))
    except TypeError as exc:
        raise ValidationError(f"{path}: bad [controller] key: {exc}") from exc

    fuel = fuel_params_from_mapping(section("fuel"))

    init_tbl = section("init")
    gaps_val = init_tbl.get("gaps", "equilibrium")
    if isinstance(gaps_val, str):
        _require(gaps_val == "equilibrium",
                 f"{path}: [init] gaps must be 'equilibrium' or a list of 4 gaps")
        initial_gaps = None
    else:
        initial_gaps = tuple(float(g) for g in gaps_val)
    sim_dt = float(init_tbl.get("dt_s", 0.1))

    source = {
        "cycle": {"path": str(resolve(cycle_ref))},
        "driver_model": {"path": str(resolve(model_ref))},
        "idm": asdict(idm),
        "controller": asdict(controller),
        "fuel": asdict(fuel),
        "init": {"gaps": "equilibrium" if initial_gaps is None else list(initial_gaps),
                 "dt_s": sim_dt},
    }
    return ScenarioConfig(cycle=cycle, driver=driver, idm=idm,
                          controller=controller, fuel=fuel,
                          initial_gaps=initial_gaps, sim_dt=sim_dt,
                          source=source)


def initialize(cfg: ScenarioConfig) -> FleetState:
    """Starting platoon: every vehicle at the cycle's initial speed.

    The SAV sits at its driver's desired gap for that speed; each human
    follower at its IDM equilibrium gap.  Explicit configured gaps are
    used verbatim.
    """
    v0 = float(cfg.cycle.speeds[0])
    if cfg.initial_gaps is not None:
        gaps = cfg.initial_gaps
    else:
        hv_gap = float(equilibrium_gap(v0, cfg.idm))
        gaps = (float(cfg.driver.desired_gap(v0)), hv_gap, hv_gap, hv_gap)
    positions = [0.0]
    for g in gaps:
        positions.append(positions[-1] - g)
    vehicles = tuple(VehicleState(p, v0, 0.0) for p in positions)
    return FleetState(vehicles, 0.0)


@dataclass(frozen=True)
class RunResult:
    """Outcome of one scenario run; ``report`` is None when the run aborted."""

    trace: Trace
    report: TrafficReport | None
    safety_fallback_steps: int
    collision: CollisionError | None = None

    @property
    def completed(self) -> bool:
        return self.collision is None


def trace_from_states(states, fuel: FuelParams) -> Trace:
    """Pack a sequence of :class:`FleetState` into a :class:`Trace`."""
    times = np.array([s.time for s in states])
    positions = np.array([[v.position for v in s.vehicles] for s in states])
    speeds = np.array([[v.velocity for v in s.vehicles] for s in states])
    accels = np.array([[v.acceleration for v in s.vehicles] for s in states])
    return build_trace(times, positions, speeds, accels, fuel)


def run(cfg: ScenarioConfig) -> RunResult:
    """Simulate one scenario end to end.

    The loop advances at ``sim_dt``; the controller is invoked every
    controller sample time with the PV speed preview read straight from
    the cycle (held constant past its end) and its command held between
    invocations.  The controller's rollout uses start-of-step speeds,
    so the measured gap can fall slightly short of the planned one
    between invocations; a watchdog then overrides with full braking
    until the next invocation and reports the event as a safety
    fallback.  A collision stops the run and returns the partial trace
    with no report.
    """
    cycle = resample_cycle(cfg.cycle, cfg.sim_dt)
    controller = AccController(cfg.driver, cfg.controller)
    state = initialize(cfg)
    states = [state]
    horizon = np.arange(cfg.controller.n_predict) * cfg.controller.sample_time

    command = 0.0
    fallback_steps = 0
    overridden = False
    collision = None
    n_steps = cycle.speeds.size - 1
    for k in range(n_steps):
        if k % cfg.steps_per_control == 0:
            preview = cycle.speed_at(k * cfg.sim_dt + horizon)
            decision = controller.step(float(state.gaps[0]),
                                       float(state.speeds[1]),
                                       preview, a_prev=command)
            command = decision.accel
            overridden = False
            if decision.safety_fallback:
                fallback_steps += 1
                log.debug("t=%.1f s: braking fallback engaged", k * cfg.sim_dt)
        try:
            state = step_fleet(state, command, float(cycle.speeds[k + 1]),
                               cfg.sim_dt, cfg.idm)
        except CollisionError as exc:
            collision = exc
            log.warning("run aborted: %s", exc)
            break
        states.append(state)
        if not overridden and state.gaps[0] < cfg.controller.min_gap:
            overridden = True
            command = cfg.controller.accel_min
            fallback_steps += 1
            log.debug("t=%.1f s: gap %.3f m below floor, braking until next "
                      "controller step", state.time, state.gaps[0])

    trace = trace_from_states(states, cfg.fuel)
    report = None
    if collision is None:
        report = TrafficReport.from_trace(trace, cfg.fuel)
    return RunResult(trace=trace, report=report,
                     safety_fallback_steps=fallback_steps, collision=collision)


@dataclass(frozen=True)
class ComparisonResult:
    """Percent differences of run B against baseline A.

    Positive gap/headway percentages mean B ran tighter than A; a
    negative fuel percentage means B burned more.  Differences are None
    when either run failed.
    """

    gap_pct: float | None
    headway_pct: float | None
    fuel_pct: float | None
    result_a: RunResult
    result_b: RunResult

    @property
    def complete(self) -> bool:
        return self.result_a.completed and self.result_b.completed


def _percent_less(a: float, b: float) -> float:
    return (a - b) / a * 100.0


def compare(cfg_a: ScenarioConfig, cfg_b: ScenarioConfig) -> ComparisonResult:
    """Run two scenarios that differ only in driver model and compare them."""
    _require(np.array_equal(cfg_a.cycle.speeds, cfg_b.cycle.speeds)
             and cfg_a.cycle.sample_period == cfg_b.cycle.sample_period,
             "compared scenarios must share the driving cycle")
    _require(cfg_a.idm == cfg_b.idm, "compared scenarios must share IDM parameters")
    _require(cfg_a.fuel == cfg_b.fuel, "compared scenarios must share fuel parameters")

    result_a = run(cfg_a)
    result_b = run(cfg_b)
    if not (result_a.completed and result_b.completed):
        return ComparisonResult(None, None, None, result_a, result_b)
    ra, rb = result_a.report, result_b.report
    return ComparisonResult(
        gap_pct=_percent_less(ra.gap_mean, rb.gap_mean),
        headway_pct=_percent_less(ra.headway_mean, rb.headway_mean),
        fuel_pct=_percent_less(ra.fuel_total, rb.fuel_total),
        result_a=result_a,
        result_b=result_b,
    )


def _num(x: float) -> float:
    return float(format(float(x), ".9g"))


def write_report(result: RunResult, cfg: ScenarioConfig, path) -> None:
    """Write the metrics of a completed run as JSON with a config echo."""
    _require(result.report is not None, "cannot write a report for an aborted run")
    doc = {
        "gap_mean_m": _num(result.report.gap_mean),
        "headway_mean_s": _num(result.report.headway_mean),
        "fuel_total_l": _num(result.report.fuel_total),
        "safety_fallback_steps": int(result.safety_fallback_steps),
        "config": cfg.source,
    }
    Path(path).write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n")


def write_comparison(comp: ComparisonResult, path) -> None:
    """Write a comparison as JSON: three percentages, or an incomplete marker."""
    if comp.complete:
        doc = {
            "gap_pct": _num(comp.gap_pct),
            "headway_pct": _num(comp.headway_pct),
            "fuel_pct": _num(comp.fuel_pct),
        }
    else:
        failed = [label for label, r in (("a", comp.result_a), ("b", comp.result_b))
                  if not r.completed]
        doc = {"incomplete": True, "failed_runs": failed}
    Path(path).write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n")
