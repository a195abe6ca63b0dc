"""Logging setup for DorT tools and library code.

Library modules only ever call :func:`get_logger`; the CLI decides where the
records go by calling :func:`setup_logging` once. Two output styles exist:

- plain text for terminals (``DEFAULT_FORMAT`` or ``DETAILED_FORMAT``)
- one JSON object per line for experiment logs that get parsed afterwards

Structured fields travel on ``record.extra_fields`` (see :func:`log_event`)
and are merged into the JSON payload.
"""

from __future__ import annotations

import json
import logging
import os
import sys
from pathlib import Path
from typing import Any

DEFAULT_FORMAT = "%(asctime)s - %(name)s - %(levelname)s - %(message)s"
DETAILED_FORMAT = (
    "%(asctime)s - %(name)s - %(levelname)s - "
    "[%(filename)s:%(lineno)d] - %(message)s"
)

LOG_LEVEL_ENV = "LOG_LEVEL"


class JsonFormatter(logging.Formatter):
    """Render a record as a single JSON line."""

    def format(self, record: logging.LogRecord) -> str:
        payload: dict[str, Any] = {
            "timestamp": self.formatTime(record, self.datefmt),
            "level": record.levelname,
            "logger": record.name,
            "message": record.getMessage(),
            "module": record.module,
            "function": record.funcName,
            "line": record.lineno,
        }
        if record.exc_info:
            payload["exception"] = self.formatException(record.exc_info)

        extra = getattr(record, "extra_fields", None)
        if isinstance(extra, dict):
            payload.update(extra)

        return json.dumps(payload, default=str)


def get_log_level() -> int:
    """Read the log level from ``LOG_LEVEL``.

    Returns:
        Numeric level, INFO when the variable is unset or unknown.
    """
    level_name = os.environ.get(LOG_LEVEL_ENV, "INFO").upper()
    level = logging.getLevelName(level_name)
    return level if isinstance(level, int) else logging.INFO


def setup_logging(
    level: int | None = None,
    log_file: Path | None = None,
    json_format: bool = False,
    verbose: bool = False,
) -> None:
    """Configure the root logger for a DorT process.

    Args:
        level: Log level; falls back to ``LOG_LEVEL`` when None.
        log_file: Optional file that receives a copy of every record.
        json_format: Emit JSON lines instead of plain text.
        verbose: Include file and line in plain-text records.
    """
    if level is None:
        level = get_log_level()

    root_logger = logging.getLogger()
    root_logger.handlers.clear()
    root_logger.setLevel(level)

    formatter: logging.Formatter
    if json_format:
        formatter = JsonFormatter()
    else:
        formatter = logging.Formatter(DETAILED_FORMAT if verbose else DEFAULT_FORMAT)

    # stderr keeps stdout free for command output
    console_handler = logging.StreamHandler(sys.stderr)
    console_handler.setLevel(level)
    console_handler.setFormatter(formatter)
    root_logger.addHandler(console_handler)

    if log_file:
        log_file.parent.mkdir(parents=True, exist_ok=True)
        file_handler = logging.FileHandler(log_file)
        file_handler.setLevel(level)
        file_handler.setFormatter(
            JsonFormatter() if json_format else logging.Formatter(DETAILED_FORMAT)
        )
        root_logger.addHandler(file_handler)


def get_logger(name: str) -> logging.Logger:
    """Return the logger for a module (pass ``__name__``)."""
    return logging.getLogger(name)


def log_event(
    logger: logging.Logger, level: int, message: str, **fields: Any
) -> None:
    """Log ``message`` with structured ``fields`` attached.

    Plain-text handlers show only the message; :class:`JsonFormatter` merges
    the fields into the record's JSON object.
    """
    if logger.isEnabledFor(level):
        logger.log(level, message, extra={"extra_fields": fields})

