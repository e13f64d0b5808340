"""Logging utilities for the operator-dynamics engine."""

import logging
import sys
from typing import Optional, Union

from .config import get_settings


def get_logger(name: str, level: Optional[Union[int, str]] = None) -> logging.Logger:
    """
    Get a configured logger instance.

    Args:
        name: Logger name (typically __name__)
        level: Logging level (defaults to the configured OPDYN_LOG_LEVEL)

    Returns:
        Configured logger instance
    """
    logger = logging.getLogger(name)

    if not logger.handlers:
        handler = logging.StreamHandler(sys.stderr)
        formatter = logging.Formatter(
            '%(asctime)s - %(name)s - %(levelname)s - %(message)s',
            datefmt='%Y-%m-%d %H:%M:%S'
        )
        handler.setFormatter(formatter)
        logger.addHandler(handler)
        logger.setLevel(level or get_settings().log_level.upper())
        logger.propagate = False

    return logger


def set_level(level: Union[int, str]) -> None:
    """Apply a level to every logger already handed out by get_logger."""
    for name in list(logging.root.manager.loggerDict):
        if name.startswith("opdyn_cli"):
            logging.getLogger(name).setLevel(level)
