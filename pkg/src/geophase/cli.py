"""``phase`` command line entry point."""

from __future__ import annotations

import argparse
import logging
import math
import sys
from pathlib import Path

from . import __version__
from .config import parse_config, parse_sweep
from .errors import ConfigError, PhaseError
from .pipeline import run, sweep
from .scenarios import scenario_echo, scenario_gauge_demo, scenario_precession


def _read(path: str) -> str:
    try:
        return Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc.strerror}") from exc


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="phase",
        description="Geometric phases of mixed states under cyclic unitary evolution.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="run one JSON configuration")
    p.add_argument("config")
    p.add_argument("--out", metavar="DIR", help="directory for relative output paths")
    p.add_argument("--figure", action="store_true", help="also render the series as PNG")

    p = sub.add_parser("sweep", help="run a parameter sweep")
    p.add_argument("config")
    p.add_argument("--out", metavar="DIR")
    p.add_argument("--workers", type=int, default=1, help="parallel worker processes")
    p.add_argument("--figure", action="store_true")

    p = sub.add_parser("scenario", help="build (and optionally run) a shipped scenario")
    ssub = p.add_subparsers(dest="scenario", required=True)
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--emit-config", action="store_true", help="print the configuration and exit")
    common.add_argument("--out", metavar="DIR")
    common.add_argument("--figure", action="store_true")

    s = ssub.add_parser("precession", parents=[common])
    s.add_argument("--r", type=float, default=0.5)
    s.add_argument("--theta", type=float, default=0.0)
    s.add_argument("--omega", type=float, default=1.0)
    s.add_argument("--turns", type=int, default=1)

    s = ssub.add_parser("echo", parents=[common])
    s.add_argument("--omega", type=float, default=1.0)
    s.add_argument("--tau", type=float, default=2 * math.pi)
    s.add_argument("--r", type=float, default=0.5)
    s.add_argument("--theta", type=float, default=0.0)
    s.add_argument("--no-pulses", action="store_true", help="drop the refocusing pulses")

    s = ssub.add_parser("gauge-demo", parents=[common])
    s.add_argument("--windings", type=int, nargs=2, default=[1, 0])
    s.add_argument("--profile", choices=["linear", "smooth"], default="linear")
    s.add_argument("--r", type=float, default=0.5)
    s.add_argument("--theta", type=float, default=0.0)
    return parser


def _scenario(args):
    if args.scenario == "precession":
        return scenario_precession(args.r, args.theta, args.omega, args.turns)
    if args.scenario == "echo":
        return scenario_echo(args.omega, args.tau, args.r, args.theta, pulses=not args.no_pulses)
    return scenario_gauge_demo(tuple(args.windings), args.profile, args.r, args.theta)


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(name)s: %(message)s",
        stream=sys.stderr,
    )
    try:
        if args.command == "run":
            return run(parse_config(_read(args.config)), args.out, args.figure)
        if args.command == "sweep":
            if args.workers < 1:
                raise SystemExit("phase: --workers must be at least 1")
            return sweep(parse_sweep(_read(args.config)), args.out, args.workers, args.figure)
        config = _scenario(args)
    except PhaseError as exc:
        print(f"phase: {type(exc).__name__}: {exc}", file=sys.stderr)
        return exc.exit_code
    if args.emit_config:
        sys.stdout.write(config.to_json())
        return 0
    return run(config, args.out, args.figure)


if __name__ == "__main__":
    sys.exit(main())
