"""The `mvac` command line."""

from __future__ import annotations

import argparse
import logging
import sys
from typing import TYPE_CHECKING

from mvac.config import load_config
from mvac.exceptions import ConfigError, NumericalError
from mvac.harness import (
    cmd_orbit,
    cmd_selftest,
    cmd_simulate,
    cmd_sweep,
    cmd_verify_geometry,
)
from mvac.selftest import SUITES

if TYPE_CHECKING:
    from collections.abc import Callable, Sequence

    from mvac.config import RunConfig

__all__ = [
    "COMMANDS",
    "EXIT_CONFIG",
    "EXIT_NUMERICAL",
    "build_parser",
    "main",
]

logger = logging.getLogger(__name__)

EXIT_CONFIG = 1
EXIT_NUMERICAL = 2

_LEVELS = [logging.WARNING, logging.INFO, logging.DEBUG]


def _eps_list(value: str) -> list[float]:
    try:
        values = [float(v) for v in value.split(",") if v.strip()]
    except ValueError as exc:
        msg = f"expected a comma separated list of numbers, got {value!r}"
        raise argparse.ArgumentTypeError(msg) from exc
    if not values:
        msg = "expected at least one eps"
        raise argparse.ArgumentTypeError(msg)
    return values


def _configured(args: argparse.Namespace) -> RunConfig:
    cfg = load_config(args.config)
    return cfg if args.out is None else cfg.with_out_dir(args.out)


def _simulate(args: argparse.Namespace) -> int:
    return cmd_simulate(_configured(args))


def _sweep(args: argparse.Namespace) -> int:
    return cmd_sweep(_configured(args), args.eps)


def _orbit(args: argparse.Namespace) -> int:
    return cmd_orbit(_configured(args))


def _verify_geometry(args: argparse.Namespace) -> int:
    return cmd_verify_geometry(_configured(args))


def _selftest(args: argparse.Namespace) -> int:
    return cmd_selftest(names=args.suite or None)


COMMANDS: dict[str, Callable[[argparse.Namespace], int]] = {
    "simulate": _simulate,
    "sweep": _sweep,
    "orbit": _orbit,
    "verify-geometry": _verify_geometry,
    "selftest": _selftest,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="mvac",
        description="Matrix-valued Allen-Cahn experiments and their diagnostics.",
    )
    parser.add_argument(
        "-v",
        "--verbose",
        action="count",
        default=0,
        help="log more; repeat for debug output",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    helps = {
        "simulate": "run one trajectory and write its diagnostics",
        "sweep": "repeat a run over several interface widths",
        "orbit": "print the energetics of the one-dimensional connecting orbit",
        "verify-geometry": "print the residuals of the extended interface fields",
        "selftest": "run the invariant suites",
    }
    for name, text in helps.items():
        cmd = sub.add_parser(name, help=text, description=text)
        if name == "selftest":
            cmd.add_argument(
                "--suite",
                action="append",
                choices=list(SUITES),
                help="run only this suite (repeatable)",
            )
            continue
        cmd.add_argument("-c", "--config", required=True, help="INI configuration file")
        cmd.add_argument("--out", default=None, help="override output.out_dir")
        if name == "sweep":
            cmd.add_argument(
                "--eps",
                type=_eps_list,
                required=True,
                help="comma separated interface widths, e.g. 0.08,0.04,0.02",
            )
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    """Parse `argv`, run the subcommand and return its exit code."""
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=_LEVELS[min(args.verbose, len(_LEVELS) - 1)],
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        return COMMANDS[args.command](args)
    except ConfigError as exc:
        print(f"mvac: configuration error: {exc}", file=sys.stderr)  # noqa: T201
        return EXIT_CONFIG
    except NumericalError as exc:
        print(f"mvac: numerical failure: {exc}", file=sys.stderr)  # noqa: T201
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
