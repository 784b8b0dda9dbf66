"""
TDCM Toolkit - Command Line

Subcommands:
    identify TRACE      hysteresis parameters from a calibration sweep trace
    simulate CONFIG     one trial trace per scenario for a chosen controller
    detect CONFIG       shift detection per scenario axis
    run CONFIG          full experiment: controllers x catheters x trials, reports
    report RESULTS_DIR  summary table over every report under a results tree

Exit codes: 0 success, 2 invalid input or configuration, 3 detection
timeout, 4 file system error.
"""

import argparse
import logging
import math
import sys
from pathlib import Path

from dotenv import load_dotenv

# Load .env from project root BEFORE other imports
PROJECT_ROOT = Path(__file__).resolve().parent.parent
load_dotenv(PROJECT_ROOT / ".env", override=False)

# Add src to path for imports
sys.path.insert(0, str(Path(__file__).parent / "src"))

from general_utils import (  # noqa: E402
    default_output_dir,
    get_logger,
    read_trace_file,
    set_console_level,
    write_csv_atomic,
    write_json_atomic,
)
from hysteresis_utils import (  # noqa: E402
    Axis,
    CatheterPlant,
    DetectionTimeoutError,
    detect_shift,
    identify_params,
    write_detection_log,
)
from experiment_utils import (  # noqa: E402
    calibrate,
    load_config,
    run_cell,
    run_experiment,
    summarize_results,
    true_params,
    write_scenario_html,
)

logger = get_logger("cli")

EXIT_OK, EXIT_INVALID, EXIT_TIMEOUT, EXIT_IO = 0, 2, 3, 4


# =============================================================================
# Subcommands
# =============================================================================

def cmd_identify(args: argparse.Namespace) -> int:
    trace = read_trace_file(args.trace)
    axes = [Axis(a) for a in sorted(trace["axis"].unique())] if args.axis == "all" else [Axis(args.axis)]
    doc = {}
    for axis in axes:
        params = identify_params(trace, axis, filter_current=not args.no_filter)
        doc[axis.value] = params.to_document()
    out = Path(args.output) if args.output else args.output_dir / "params.json"
    write_json_atomic(out, doc)
    print(out)
    return EXIT_OK


def _selected(config, name: str | None):
    scenarios = [s for s in config.scenarios if name is None or s.name == name]
    if not scenarios:
        raise ValueError(f"No scenario named '{name}'. Available: {', '.join(s.name for s in config.scenarios)}")
    return scenarios


def cmd_simulate(args: argparse.Namespace) -> int:
    config = load_config(args.config, args.seed)
    for spec in _selected(config, args.scenario):
        cell = run_cell(spec, args.controller, args.trial, args.catheter)
        if cell.trace is None:
            raise DetectionTimeoutError(cell.message, log=[])
        out = args.output_dir / spec.name / "simulate" / f"{cell.stem(spec.trials)}.csv"
        write_csv_atomic(cell.trace, out)
        for axis in spec.axes:
            print(f"{spec.name}\t{axis.value}\trmse_deg={cell.metrics[(axis, 'rmse')]:.4f}\t{out}")
    return EXIT_OK


def cmd_detect(args: argparse.Namespace) -> int:
    config = load_config(args.config, args.seed)
    for spec in _selected(config, args.scenario):
        truth = true_params(spec, args.catheter)
        calib = calibrate(spec, args.catheter, truth)
        cfg = spec.plant.to_config(truth[Axis.AP], truth[Axis.LR], spec.shape.to_shape())
        plant = CatheterPlant(cfg, spec.seed)
        out_dir = args.output_dir / spec.name / "detect"
        estimates = {}
        for axis in spec.axes:
            try:
                estimate = detect_shift(spec.detector.to_config(), calib[axis], plant, axis)
            except DetectionTimeoutError as e:
                write_detection_log(e.log, out_dir / f"{axis.value}_log.csv")
                raise
            write_detection_log(estimate.log, out_dir / f"{axis.value}_log.csv")
            estimates[axis.value] = estimate.to_document()
            true_offset = math.degrees(plant.offset(axis))
            print(f"{spec.name}\t{axis.value}\toffset_deg={math.degrees(estimate.offset):.3f}"
                  f"\ttrue_offset_deg={true_offset:.3f}")
        write_json_atomic(out_dir / "shift.json", estimates)
    return EXIT_OK


def cmd_run(args: argparse.Namespace) -> int:
    config = load_config(args.config, args.seed)
    results = run_experiment(config, args.output_dir, jobs=args.jobs)
    for result in results:
        print(result.table)
    return EXIT_OK


def cmd_report(args: argparse.Namespace) -> int:
    results_dir = Path(args.results_dir)
    _, table = summarize_results(results_dir)
    print(table)
    if args.html:
        for scenario_dir in sorted(p.parent for p in results_dir.rglob("report.csv")):
            write_scenario_html(scenario_dir)
    return EXIT_OK


# =============================================================================
# Parser
# =============================================================================

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--output-dir", type=Path, default=None,
                        help="Output directory (default: $TDCM_OUTPUT_DIR or ./results)")
    common.add_argument("--seed", type=int, default=None, help="Override every scenario seed")
    verbosity = common.add_mutually_exclusive_group()
    verbosity.add_argument("-v", "--verbose", action="store_true", help="Debug output on stderr")
    verbosity.add_argument("-q", "--quiet", action="store_true", help="Warnings and errors only")

    parser = argparse.ArgumentParser(
        prog="tdcm",
        description="Shape-adaptive hysteresis compensation toolkit for tendon-driven catheters",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("identify", parents=[common], help="Identify hysteresis from a sweep trace")
    p.add_argument("trace", help="Trace CSV of a calibration sweep")
    p.add_argument("--axis", choices=["ap", "lr", "all"], default="all")
    p.add_argument("-o", "--output", default=None, help="Parameter file (default: <output-dir>/params.json)")
    p.add_argument("--no-filter", action="store_true", help="Use the raw current")
    p.set_defaults(func=cmd_identify)

    p = sub.add_parser("simulate", parents=[common], help="Simulate one trial per scenario")
    p.add_argument("config", help="Scenario JSON file")
    p.add_argument("--scenario", default=None)
    p.add_argument("--controller", default="NoCompensation")
    p.add_argument("--trial", type=int, default=0)
    p.add_argument("--catheter", type=int, default=0)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("detect", parents=[common], help="Detect the hysteresis shift")
    p.add_argument("config", help="Scenario JSON file")
    p.add_argument("--scenario", default=None)
    p.add_argument("--catheter", type=int, default=0)
    p.set_defaults(func=cmd_detect)

    p = sub.add_parser("run", parents=[common], help="Run all scenarios of a config")
    p.add_argument("config", help="Scenario JSON file")
    p.add_argument("--jobs", type=int, default=1, help="Worker processes for trial cells")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("report", parents=[common], help="Summarise a results directory")
    p.add_argument("results_dir")
    p.add_argument("--html", action="store_true", help="Also write plotly figures.html per scenario")
    p.set_defaults(func=cmd_report)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    if args.verbose:
        set_console_level(logging.DEBUG)
    elif args.quiet:
        set_console_level(logging.WARNING)
    args.output_dir = Path(args.output_dir) if args.output_dir else default_output_dir()

    try:
        return args.func(args)
    except DetectionTimeoutError as e:
        logger.error(f"Detection timeout: {e}")
        return EXIT_TIMEOUT
    except ValueError as e:
        # includes pydantic.ValidationError and the domain errors
        logger.error(f"Invalid input: {e}")
        return EXIT_INVALID
    except OSError as e:
        logger.error(f"File error: {e}")
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
