"""Command-line entry point.

One binary, five verbs:

  pacc learn           fit a driver model from demonstration CSVs
  pacc simulate        run a platoon scenario, write trace and report
  pacc compare         run two scenarios and report percent differences
  pacc generate-demos  synthesize demonstration CSVs from known weights
  pacc init-config     write a scenario TOML with all defaults spelled out

Exit codes: 0 ok, 2 input error, 3 degenerate learning input,
4 collision abort.  Set PACC_LOG=debug|info for diagnostics on stderr.
"""

from __future__ import annotations

import argparse
import logging
import os
import sys
from dataclasses import asdict
from pathlib import Path

import numpy as np

from .core import WEIGHT_FLOOR, DrivingCycle, ValidationError, load_cycle
from .evaluation import default_fuel_params, save_trace
from .irl import (
    LearningConfig,
    learn,
    min_observed_headway,
    save_model,
    synthesize_demonstration,
)
from .scenario import compare, load_scenario, run, write_comparison, write_report
from .trajectory import load_demonstration, save_demonstration, split_demonstration

log = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_DEGENERATE = 3
EXIT_COLLISION = 4


def _sig(x: float) -> str:
    return format(float(x), ".9g")


def _positive_int(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError(f"must be >= 1, got {text}")
    return value


def _positive_float(text: str) -> float:
    value = float(text)
    if value <= 0.0:
        raise argparse.ArgumentTypeError(f"must be > 0, got {text}")
    return value


def _weight_vector(text: str) -> np.ndarray:
    parts = text.split(",")
    if len(parts) != 4:
        raise argparse.ArgumentTypeError(
            "expected 4 comma-separated weights a,ds,rs,rd")
    try:
        weights = np.array([float(p) for p in parts])
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from exc
    if np.any(weights < WEIGHT_FLOOR):
        raise argparse.ArgumentTypeError(
            f"every weight must be >= {WEIGHT_FLOOR}")
    return weights


def _collect_demo_files(refs: list[str]) -> list[Path]:
    files: list[Path] = []
    for ref in refs:
        p = Path(ref)
        if p.is_dir():
            inside = sorted(p.glob("*.csv"))
            if not inside:
                raise ValidationError(f"no .csv demonstrations in directory {p}")
            files.extend(inside)
        elif p.is_file():
            files.append(p)
        else:
            raise ValidationError(f"demonstration path not found: {p}")
    return files


def cmd_learn(args) -> int:
    files = _collect_demo_files(args.demos)
    segments = []
    for path in files:
        arrays = load_demonstration(path)
        segments.extend(split_demonstration(**arrays, segment_length=args.t_h))
    if not segments:
        raise ValidationError(
            f"demonstrations too short: no whole {_sig(args.t_h)} s segment")
    log.info("learning from %d segments out of %d file(s)", len(segments), len(files))

    try:
        tau = min_observed_headway(segments)
    except ValidationError as exc:
        print(f"degenerate demonstrations: {exc}", file=sys.stderr)
        return EXIT_DEGENERATE

    config = LearningConfig(eta0=args.eta, max_epochs=args.max_epochs)
    result = learn(segments, config, tau=tau)
    if result.degenerate:
        print("degenerate demonstrations: observed features are all zero, "
              "weights carry no information", file=sys.stderr)
        return EXIT_DEGENERATE

    save_model(result.model, args.out, epochs=result.epochs_run,
               residual=result.residual)
    names = ("a", "ds", "rs", "rd")
    pairs = " ".join(f"{n}={_sig(w)}" for n, w in zip(names, result.model.weights))
    print(f"wrote {args.out}")
    print(f"tau_s: {_sig(result.model.tau)}")
    print(f"weights: {pairs}")
    print(f"epochs: {result.epochs_run}  residual: {_sig(result.residual)}")
    if result.residual > config.convergence_tol:
        print(f"warning: residual above tolerance {_sig(config.convergence_tol)} "
              f"after {result.epochs_run} epochs", file=sys.stderr)
    return EXIT_OK


def cmd_simulate(args) -> int:
    cfg = load_scenario(args.config)
    result = run(cfg)
    save_trace(result.trace, args.trace)
    if not result.completed:
        print(f"{result.collision}; partial trace written to {args.trace}",
              file=sys.stderr)
        return EXIT_COLLISION
    write_report(result, cfg, args.report)
    report = result.report
    print(f"wrote {args.trace} and {args.report}")
    print(f"gap_mean_m: {_sig(report.gap_mean)}")
    print(f"headway_mean_s: {_sig(report.headway_mean)}")
    print(f"fuel_total_l: {_sig(report.fuel_total)}")
    print(f"safety_fallback_steps: {result.safety_fallback_steps}")
    return EXIT_OK


def cmd_compare(args) -> int:
    cfg_a = load_scenario(args.config_a)
    cfg_b = load_scenario(args.config_b)
    comp = compare(cfg_a, cfg_b)
    write_comparison(comp, args.report)
    if not comp.complete:
        for label, res in (("A", comp.result_a), ("B", comp.result_b)):
            if not res.completed:
                print(f"scenario {label} aborted: {res.collision}", file=sys.stderr)
        print(f"comparison incomplete; marker written to {args.report}",
              file=sys.stderr)
        return EXIT_COLLISION
    print(f"wrote {args.report}")
    print(f"gap_pct: {_sig(comp.gap_pct)}")
    print(f"headway_pct: {_sig(comp.headway_pct)}")
    print(f"fuel_pct: {_sig(comp.fuel_pct)}")
    return EXIT_OK


def cmd_generate_demos(args) -> int:
    cycle = load_cycle(args.cycle)
    per = round(args.t_h / cycle.sample_period)
    piece = cycle.speeds.size // args.splits
    if piece < per + 1:
        raise ValidationError(
            f"cycle too short for {args.splits} demonstrations of at least "
            f"one {_sig(args.t_h)} s segment each")
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)

    written = []
    for i in range(args.splits):
        lo = i * piece
        hi = cycle.speeds.size if i == args.splits - 1 else lo + piece
        part = DrivingCycle(cycle.speeds[lo:hi], cycle.sample_period)
        arrays = synthesize_demonstration(part, args.weights, args.tau,
                                          segment_length=args.t_h)
        dest = out_dir / f"demo_{i + 1:02d}.csv"
        save_demonstration(dest, **arrays)
        written.append(dest)
    for dest in written:
        print(f"wrote {dest}")
    return EXIT_OK


_CONFIG_TEMPLATE = """\
# Platoon scenario. Relative paths resolve against this file's directory.

[cycle]
path = "{cycle}"

[driver_model]
path = "{model}"

[idm]
max_accel = 2.0
max_decel = 3.0
delta = 4.0
# cruise_speed defaults to the cycle's maximum speed when omitted
jam_distance = 2.0
headway_time = 1.0

[controller]
prediction_horizon = 3.0
control_horizon = 3.0
sample_time = 1.0
min_gap = 5.0
accel_min = -3.0
accel_max = 2.0

[fuel]
{fuel}

[init]
# gaps = "equilibrium" places the SAV at its driver's desired gap and
# each human follower at its IDM equilibrium gap; or give 4 gaps [m].
gaps = "equilibrium"
dt_s = 0.1
"""


def _toml_float(value: float) -> str:
    text = format(float(value), ".9g")
    if "." not in text and "e" not in text and "inf" not in text:
        text += ".0"
    return text


def cmd_init_config(args) -> int:
    fuel_lines = "\n".join(f"{name} = {_toml_float(value)}"
                           for name, value in asdict(default_fuel_params()).items())
    Path(args.out).write_text(_CONFIG_TEMPLATE.format(
        cycle=args.cycle, model=args.model, fuel=fuel_lines))
    print(f"wrote {args.out}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="pacc",
        description="Personalized adaptive cruise control: learn per-driver "
                    "cost weights from demonstrations and simulate a mixed "
                    "platoon under the resulting controller.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("learn", help="fit a driver model from demonstration CSVs")
    p.add_argument("--demos", nargs="+", required=True, metavar="PATH",
                   help="demonstration CSV files and/or directories of them")
    p.add_argument("--out", required=True, help="output driver model JSON")
    p.add_argument("--t-h", type=_positive_float, default=3.0,
                   help="trajectory segment length in seconds (default 3.0)")
    p.add_argument("--eta", type=_positive_float, default=0.2,
                   help="initial learning rate (default 0.2)")
    p.add_argument("--max-epochs", type=_positive_int, default=50,
                   help="epoch budget, must be >= 1 (default 50)")
    p.set_defaults(func=cmd_learn)

    p = sub.add_parser("simulate", help="run one platoon scenario")
    p.add_argument("--config", required=True, help="scenario TOML file")
    p.add_argument("--trace", required=True, help="output per-step trace CSV")
    p.add_argument("--report", required=True, help="output metrics JSON")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("compare", help="run two scenarios and diff their metrics")
    p.add_argument("--config-a", required=True, help="baseline scenario TOML")
    p.add_argument("--config-b", required=True, help="comparison scenario TOML")
    p.add_argument("--report", required=True, help="output comparison JSON")
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("generate-demos",
                       help="synthesize demonstrations from known weights")
    p.add_argument("--weights", type=_weight_vector, required=True,
                   help="four comma-separated cost weights a,ds,rs,rd")
    p.add_argument("--tau", type=_positive_float, required=True,
                   help="time headway constant in seconds")
    p.add_argument("--cycle", required=True, help="leader driving cycle CSV")
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--splits", type=_positive_int, default=3,
                   help="number of demonstration files (default 3)")
    p.add_argument("--t-h", type=_positive_float, default=3.0,
                   help="trajectory segment length in seconds (default 3.0)")
    p.set_defaults(func=cmd_generate_demos)

    p = sub.add_parser("init-config",
                       help="write a scenario TOML with explicit defaults")
    p.add_argument("--out", required=True, help="output scenario TOML")
    p.add_argument("--cycle", default="cycle.csv",
                   help="cycle path to reference (default cycle.csv)")
    p.add_argument("--model", default="driver_model.json",
                   help="driver model path to reference (default driver_model.json)")
    p.set_defaults(func=cmd_init_config)

    return parser


def _configure_logging() -> None:
    level_name = os.environ.get("PACC_LOG", "").strip().lower()
    level = {"debug": logging.DEBUG, "info": logging.INFO}.get(level_name,
                                                               logging.WARNING)
    logging.basicConfig(stream=sys.stderr, level=level,
                        format="%(levelname)s %(name)s: %(message)s")


def main(argv=None) -> int:
    _configure_logging()
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
