from __future__ import annotations

import argparse
import logging
import os
import sys
from typing import Optional, Sequence

from .commands import EXIT_IO, EXIT_OK, EXIT_USAGE, register_subcommands
from .config import AppConfig
from .errors import CdTradeoffError
from .logging_utils import (
    build_user_debug_message,
    configure_logging,
    log_error_with_context,
    log_with_context,
    set_logging_flags,
)
from .runtime import CliRuntime

MAX_TOLERANCE = 1e-3


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="cdtradeoff",
        description="Capacity-distortion regions of state-dependent broadcast channels with generalized feedback.",
    )
    subparsers = parser.add_subparsers(dest="command", required=True)
    register_subcommands(subparsers)
    return parser


def validate_config(config: AppConfig) -> bool:
    valid = True
    if not config.output_dir:
        log_with_context(logging.ERROR, "Resolved CDT_OUTPUT_DIR is empty")
        valid = False
    elif not os.access(config.output_dir, os.W_OK):
        log_with_context(logging.ERROR, "CDT_OUTPUT_DIR is not writable", output_dir=config.output_dir)
        valid = False

    for name in ("normalization_tol", "cmi_clamp_tol", "degraded_tol"):
        value = getattr(config, name)
        if value > MAX_TOLERANCE:
            log_with_context(
                logging.ERROR,
                "Tolerance is too loose to be meaningful",
                setting=name,
                value=value,
                max_value=MAX_TOLERANCE,
            )
            valid = False

    return valid


def run_cli(argv: Optional[Sequence[str]] = None, runtime: Optional[CliRuntime] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code in (0, None) else EXIT_USAGE

    if runtime is None:
        try:
            config = AppConfig.from_env()
        except ValueError as exc:
            print(f"Configuration error: {exc}", file=sys.stderr)
            return EXIT_USAGE
        runtime = CliRuntime(config=config)

    config = runtime.config
    configure_logging(config.log_level, config.log_file)
    set_logging_flags(
        user_debug_ids_enabled=config.user_debug_ids_enabled,
        include_traceback_for_warning=config.include_traceback_for_warning,
    )
    if not validate_config(config):
        return EXIT_USAGE

    log_with_context(logging.DEBUG, "Running command", command=args.command, output_dir=config.output_dir)
    try:
        return args.handler(runtime, args)
    except CdTradeoffError as exc:
        debug_id = log_error_with_context("Command rejected its input", command=args.command, error=str(exc))
        runtime.report(build_user_debug_message(f"error: {exc}", debug_id))
        return EXIT_USAGE
    except OSError as exc:
        debug_id = log_error_with_context("Failed writing output", command=args.command, error=repr(exc))
        runtime.report(build_user_debug_message(f"error: cannot write output: {exc}", debug_id))
        return EXIT_IO
    except Exception:
        log_error_with_context("Command failed unexpectedly", with_traceback=True, command=args.command)
        raise


def main() -> None:
    raise SystemExit(run_cli())
