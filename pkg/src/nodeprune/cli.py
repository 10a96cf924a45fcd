"""Command-line entry point.

Usage: nodeprune COMMAND [--config FILE] [--full] [--seed N] [--out DIR]
[--threads K], where COMMAND is simulate, fit, experiment-sim,
experiment-real, or report.  Flags override config-file values, which
override the command's desk-scale (or, with --full, full-scale) defaults.
Exit codes: 0 success, 1 usage or config problem, 2 unreadable or invalid
data, 3 every replicate failed.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

from .datasets import CsvFormatError, UnknownTargetError
from .experiments import (
    AllReplicatesFailedError,
    ConfigError,
    cmd_experiment_real,
    cmd_experiment_sim,
    cmd_fit,
    cmd_report,
    cmd_simulate,
    config_from_dict,
)
from .selection import PipelineError

__all__ = ["main"]

_COMMANDS = {
    "simulate": (cmd_simulate, "write one synthetic dataset with its generating network"),
    "fit": (cmd_fit, "run the two-step selection on a single dataset"),
    "experiment-sim": (cmd_experiment_sim, "replicated synthetic node-recovery study"),
    "experiment-real": (cmd_experiment_real, "repeated train/test splits of a CSV dataset"),
    "report": (cmd_report, "rebuild summary and figures from an existing results.csv"),
}


class _Parser(argparse.ArgumentParser):
    # argparse exits with status 2 on bad arguments; the CLI contract
    # reserves 2 for data errors and uses 1 for usage problems
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(
        prog="nodeprune",
        description="Hidden-node selection for one-hidden-layer tanh networks "
        "by two-step group-lasso pruning.",
    )
    sub = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")
    for name, (_, help_text) in _COMMANDS.items():
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--config", metavar="FILE", help="JSON config file")
        p.add_argument(
            "--full",
            action="store_true",
            help="use the full-scale experiment defaults (long-running)",
        )
        p.add_argument("--seed", type=int, metavar="N", help="master seed override")
        p.add_argument("--out", metavar="DIR", help="output directory override")
        p.add_argument(
            "--threads",
            type=int,
            metavar="K",
            help="replicate worker count (falls back to NODEPRUNE_THREADS)",
        )
    return parser


def _resolve_threads(flag_value) -> int | None:
    if flag_value is not None:
        return flag_value
    raw = os.environ.get("NODEPRUNE_THREADS", "").strip()
    if not raw:
        return None
    try:
        return int(raw)
    except ValueError:
        raise ConfigError(f"NODEPRUNE_THREADS must be an integer, got {raw!r}") from None


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)

    try:
        threads = _resolve_threads(args.threads)
        file_obj = None
        if args.config is not None:
            try:
                with open(args.config) as fh:
                    file_obj = json.load(fh)
            except OSError as exc:
                raise ConfigError(f"cannot read config file: {exc}") from exc
            except json.JSONDecodeError as exc:
                raise ConfigError(f"config file is not valid JSON: {exc}") from exc
        cfg = config_from_dict(
            args.command.replace("-", "_"),
            file_obj,
            full=args.full,
            seed=args.seed,
            output_dir=args.out,
            threads=threads,
        )
    except ConfigError as exc:
        print(f"nodeprune: error: {exc}", file=sys.stderr)
        return 1

    command = _COMMANDS[args.command][0]
    try:
        written = command(cfg)
    except (CsvFormatError, UnknownTargetError, FileNotFoundError) as exc:
        print(f"nodeprune: data error: {exc}", file=sys.stderr)
        return 2
    except (AllReplicatesFailedError, PipelineError) as exc:
        print(f"nodeprune: {exc}", file=sys.stderr)
        return 3
    for path in written:
        print(f"wrote {path}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
