"""Logging de VertiSplit: un RichHandler sur stderr, stdout reste réservé au JSON."""

import logging
from typing import Union

from rich.console import Console
from rich.logging import RichHandler

LOGGER_NAME = "vertisplit"

_stderr_console = Console(stderr=True)


def setup_logging(level: Union[str, int] = "WARNING") -> logging.Logger:
    """Configure le logger `vertisplit` (idempotent)."""
    logger = logging.getLogger(LOGGER_NAME)
    if isinstance(level, str):
        level = level.upper()
    logger.setLevel(level)

    if not any(isinstance(h, RichHandler) for h in logger.handlers):
        handler = RichHandler(
            console=_stderr_console,
            show_path=False,
            log_time_format="%Y-%m-%d %H:%M:%S",
        )
        handler.setFormatter(logging.Formatter("%(message)s"))
        logger.addHandler(handler)

    return logger
