"""Command-line entry point: ``lhm-sim <subcommand> [flags]``.

Exit status: 0 success, 1 domain error (message names the error class),
2 usage error.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import replace

from . import output
from .calibration import calibrate_dipoles
from .config import BRANCHES, FORMATS, PRESETS, RunConfig, load_config
from .errors import LhmError
from .steady_state import steady_state_linear
from .sweep import extract_features, phase_scan, sweep
from .validation import run_all

SUBCOMMANDS = ("steady", "sweep", "features", "phase-scan", "calibrate", "validate")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="lhm-sim",
        description="Steady-state optical response of a four-level Y-type atomic vapor.",
    )
    sub = parser.add_subparsers(dest="command", required=True, metavar="{" + ",".join(SUBCOMMANDS) + "}")
    for name in SUBCOMMANDS:
        p = sub.add_parser(name)
        p.add_argument(
            "--config",
            required=name != "validate",
            help=f"config file, or a bundled preset name ({', '.join(PRESETS)})",
        )
        p.add_argument("--out", help="output path ('-' for stdout)")
        p.add_argument("--delta1", type=float, help="probe detuning in units of gamma")
        p.add_argument("--points", type=int, help="number of sweep points")
        p.add_argument("--tol-abs", type=float, help="zero-absorption tolerance on |Im n|")
        p.add_argument("--branch", choices=BRANCHES)
        p.add_argument("--format", choices=FORMATS)
    return parser


def _apply_flags(cfg: RunConfig, args) -> RunConfig:
    changes = {}
    if args.delta1 is not None:
        changes["system"] = cfg.system.with_delta1(args.delta1)
    if args.points is not None:
        changes["points"] = args.points
    if args.tol_abs is not None:
        changes["tol_abs"] = args.tol_abs
        changes["targets"] = replace(cfg.targets, tol_abs=args.tol_abs)
    if args.branch is not None:
        changes["branch"] = args.branch
    if args.format is not None:
        changes["format"] = args.format
    if args.out is not None:
        changes["output_path"] = args.out
    cfg = replace(cfg, **changes)
    cfg.sweep_spec()
    return cfg


def _emit(text: str, path: str) -> None:
    if path == "-":
        sys.stdout.write(text)
    else:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)


def _run(args) -> int:
    if args.command == "validate":
        results = run_all()
        passed = sum(r.passed for r in results)
        lines = [r.line() for r in results]
        lines.append(f"passed {passed} failed {len(results) - passed}")
        _emit("\n".join(lines) + "\n", args.out or "-")
        return 0 if passed == len(results) else 1

    cfg = _apply_flags(load_config(args.config), args)
    json_out = cfg.format == "json"
    if args.command == "steady":
        result = steady_state_linear(cfg.system)
        d1 = cfg.system.delta1
        text = output.steady_json(result, d1) if json_out else output.steady_text(result, d1)
    elif args.command == "sweep":
        curve = sweep(cfg.sweep_spec())
        text = output.curve_json(curve) if json_out else output.curve_csv(curve)
    elif args.command == "features":
        report = extract_features(sweep(cfg.sweep_spec()), cfg.tol_abs)
        text = output.report_json(report) if json_out else output.report_csv(report)
    elif args.command == "phase-scan":
        responses = phase_scan(cfg.system, cfg.medium, cfg.phi3_scan, cfg.system.delta1, cfg.branch)
        text = (
            output.phase_scan_json(cfg.phi3_scan, responses)
            if json_out
            else output.phase_scan_csv(cfg.phi3_scan, responses)
        )
    else:  # calibrate
        result = calibrate_dipoles(cfg.targets, cfg.sweep_spec(), cfg.search)
        text = output.calibration_json(result) if json_out else output.calibration_csv(result)
    _emit(text, cfg.output_path)
    return 0


def run_cli(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return _run(args)
    except FileNotFoundError as exc:
        print(f"lhm-sim: usage error: {exc}", file=sys.stderr)
        return 2
    except LhmError as exc:
        print(f"lhm-sim: error: {exc.kind}: {exc}", file=sys.stderr)
        return 1


def main() -> None:
    sys.exit(run_cli())


if __name__ == "__main__":
    main()
