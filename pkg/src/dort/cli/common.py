"""Helpers shared by the subcommands: exit codes, logging flags, config loading."""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from pathlib import Path

import numpy as np

from ..config import PRESETS, ExperimentConfig, get_preset
from ..utils.logger import get_logger, setup_logging

logger = get_logger(__name__)

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_TRAIN = 3
EXIT_RUNTIME = 4
EXIT_EVAL = 5


def logging_parent() -> argparse.ArgumentParser:
    """Parent parser carrying the logging flags every subcommand accepts."""
    parent = argparse.ArgumentParser(add_help=False)
    parent.add_argument(
        "-v",
        "--verbose",
        action="store_true",
        help="Verbose output with file/line in log records",
    )
    parent.add_argument(
        "--log-level",
        type=str,
        choices=["DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL"],
        help="Set logging level (overrides LOG_LEVEL env var)",
    )
    parent.add_argument("--log-file", type=str, help="Write logs to specified file")
    parent.add_argument(
        "--json-logs",
        action="store_true",
        help="Output logs in JSON format",
    )
    return parent


def config_parent() -> argparse.ArgumentParser:
    parent = argparse.ArgumentParser(add_help=False)
    parent.add_argument(
        "--preset",
        type=str,
        choices=list(PRESETS.keys()),
        help="Configuration preset (default: default)",
    )
    parent.add_argument(
        "--config",
        type=str,
        help="Path to JSON configuration file (overrides --preset)",
    )
    return parent


def configure_logging(args: argparse.Namespace) -> None:
    log_level = None
    if getattr(args, "log_level", None):
        log_level = getattr(logging, args.log_level)
    elif getattr(args, "verbose", False):
        log_level = logging.DEBUG
    log_file = Path(args.log_file) if getattr(args, "log_file", None) else None
    setup_logging(
        level=log_level,
        log_file=log_file,
        json_format=getattr(args, "json_logs", False),
        verbose=getattr(args, "verbose", False),
    )


def apply_thread_limit() -> None:
    """Cap torch intra-op threads when ``DORT_THREADS`` is set."""
    env = os.environ.get("DORT_THREADS")
    if not env:
        return
    try:
        threads = max(1, int(env))
    except ValueError:
        logger.warning(f"Ignoring non-integer DORT_THREADS={env!r}")
        return
    import torch

    torch.set_num_threads(threads)
    logger.debug(f"torch threads capped at {threads}")


def load_config(args: argparse.Namespace) -> ExperimentConfig:
    """Config from ``--config`` JSON, else ``--preset``, else the default preset.

    Raises:
        FileNotFoundError: ``--config`` names a missing file.
        ValueError: The JSON is malformed or holds invalid values.
        KeyError: Unknown preset.
    """
    if getattr(args, "config", None):
        config_path = Path(args.config)
        if not config_path.exists():
            raise FileNotFoundError(f"Config file not found: {config_path}")
        with open(config_path) as f:
            try:
                data = json.load(f)
            except json.JSONDecodeError as e:
                raise ValueError(f"invalid JSON in {config_path}: {e}") from e
        logger.info(f"Loaded configuration from: {config_path}")
        return ExperimentConfig.from_dict(data)
    name = getattr(args, "preset", None) or "default"
    logger.info(f"Using preset: {name}")
    return get_preset(name)


def fit_frame_size(cfg: ExperimentConfig, frame: np.ndarray) -> None:
    """Make the extractor's working size match the dataset's frames."""
    height, width = int(frame.shape[0]), int(frame.shape[1])
    if (cfg.features.frame_height, cfg.features.frame_width) != (height, width):
        logger.info(
            f"Working frame size {cfg.features.frame_height}x"
            f"{cfg.features.frame_width} -> {height}x{width} to match the dataset"
        )
        cfg.features.frame_height = height
        cfg.features.frame_width = width


def error(message: str, code: int) -> int:
    """Log and print an error, return its exit code."""
    logger.error(message)
    print(f"Error: {message}", file=sys.stderr)
    return code


def parse_int_list(text: str) -> list[int]:
    """``"1,2,5,10"`` -> ``[1, 2, 5, 10]``; an empty string gives ``[]``."""
    values = [part.strip() for part in text.split(",") if part.strip()]
    try:
        return [int(v) for v in values]
    except ValueError as e:
        raise argparse.ArgumentTypeError(
            f"expected comma-separated integers, got {text!r}"
        ) from e
