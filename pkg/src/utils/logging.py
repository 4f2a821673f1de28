# Logging Utilities
# This module contains logging configuration and utilities

import logging
import sys
from datetime import datetime, timezone
from pathlib import Path
from typing import Optional, Union

LOGGER_NAME = "dsr_consensus"


def setup_logger(
    name: str = LOGGER_NAME,
    log_file: Optional[str] = None,
    level: Union[int, str] = logging.INFO
) -> logging.Logger:
    """
    Setup and configure logger

    Logs go to stderr so stdout stays free for command results.

    Args:
        name: Logger name
        log_file: Optional log file path
        level: Logging level

    Returns:
        Configured logger instance
    """
    logger = logging.getLogger(name)
    logger.setLevel(level)

    formatter = logging.Formatter(
        '%(asctime)s - %(name)s - %(levelname)s - %(message)s'
    )

    if not logger.handlers:
        console_handler = logging.StreamHandler(sys.stderr)
        console_handler.setFormatter(formatter)
        logger.addHandler(console_handler)

    if log_file:
        log_path = Path(log_file)
        log_path.parent.mkdir(parents=True, exist_ok=True)
        already = any(
            isinstance(h, logging.FileHandler)
            and Path(h.baseFilename) == log_path.resolve()
            for h in logger.handlers
        )
        if not already:
            file_handler = logging.FileHandler(log_file)
            file_handler.setFormatter(formatter)
            logger.addHandler(file_handler)

    return logger


def log_run(
    logger: logging.Logger,
    kind: str,
    metrics: Optional[dict] = None
) -> None:
    """
    Log one analysis, sweep or simulation run

    Args:
        logger: Logger instance
        kind: Run kind (e.g. "dsr", "sweep-gamma")
        metrics: Gains, radii, settling times and the like
    """
    log_data = {
        "timestamp": datetime.now(timezone.utc).isoformat(),
        "kind": kind,
        **(metrics or {})
    }

    logger.info(f"Run completed: {log_data}")


# Create default logger
logger = setup_logger()


class LoggerMixin:
    """Mixin class to add logging capability"""

    @property
    def logger(self) -> logging.Logger:
        """Get logger for this class"""
        return logging.getLogger(f"{LOGGER_NAME}.{self.__class__.__name__}")
