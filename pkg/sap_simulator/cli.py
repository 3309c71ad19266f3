import argparse
import json
import logging
import sys
from typing import List, Optional

from .config import get_log_level
from .errors import ConfigError, ResourceError, SapError
from .scenario import RunMode, list_presets, load_scenario, validate_scenario

logger = logging.getLogger(__name__)

EXIT_OK = 0


def _add_scenario_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", "-c", help="Scenario YAML file", default=None)
    p.add_argument("--preset", "-p", help="Preset name (see 'presets')", default=None)
    p.add_argument("--set", dest="overrides", action="append", default=[], metavar="KEY=VALUE",
                   help="Override a scenario value, e.g. --set physics.E_g=1.25 (repeatable)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="sap-sim", description="Two-boson spatial adiabatic passage simulator")
    parser.add_argument("--log-level", default=None, help="DEBUG, INFO, WARNING (default: SAP_LOG_LEVEL)")
    subparsers = parser.add_subparsers(dest="command", help="Commands")

    for mode in RunMode:
        mode_parser = subparsers.add_parser(mode.value, help=f"Run a '{mode.value}' scenario")
        _add_scenario_args(mode_parser)
        mode_parser.add_argument("--workers", "-w", type=int, default=None, help="Worker processes (default: SAP_WORKERS)")
        mode_parser.add_argument("--out", "-o", default=None, help="Output directory")

    validate_parser = subparsers.add_parser("validate", help="Check a scenario without running it")
    _add_scenario_args(validate_parser)
    validate_parser.add_argument("--probe", action="store_true",
                                 help="Also evaluate one rate-table point and one eigen slice")

    subparsers.add_parser("presets", help="List bundled presets")
    return parser


def _configure_logging(level: Optional[str]) -> None:
    logging.basicConfig(
        level=getattr(logging, (level or get_log_level()).upper(), logging.INFO),
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
    )


def _report_error(e: SapError) -> int:
    print(f"Error [{e.error_code}]: {e}", file=sys.stderr)
    if e.details:
        print(json.dumps(e.details, indent=2, ensure_ascii=False, default=str), file=sys.stderr)
    return e.exit_code


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    _configure_logging(args.log_level)

    if args.command is None:
        parser.print_help()
        return ConfigError.exit_code

    if args.command == "presets":
        for name in list_presets():
            print(name)
        return EXIT_OK

    try:
        if args.command == "validate":
            scenario = load_scenario(args.config, args.preset, args.overrides)
            report = validate_scenario(scenario, probe=args.probe)
            print(json.dumps(report, indent=2, ensure_ascii=False, default=str))
            return EXIT_OK if report["ok"] else ConfigError.exit_code

        if not (args.config or args.preset):
            raise ConfigError("a scenario is required: pass --config FILE or --preset NAME")
        scenario = load_scenario(args.config, args.preset, args.overrides, mode=args.command)

        from .runner import run
        out_dir, manifest = run(scenario, out_dir=args.out, workers=args.workers)
        print(json.dumps({"output_dir": out_dir, "scenario_hash": manifest.scenario_hash,
                          "outputs": manifest.outputs, "diagnostics": manifest.diagnostics},
                         indent=2, ensure_ascii=False, default=str))
        return EXIT_OK

    except SapError as e:
        return _report_error(e)
    except MemoryError as e:
        return _report_error(ResourceError(f"out of memory: {e}"))
    except OSError as e:
        return _report_error(ResourceError(f"I/O failure: {e}", details={"errno": e.errno}))


if __name__ == "__main__":
    sys.exit(main())
