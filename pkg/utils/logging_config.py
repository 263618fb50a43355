"""Shared logging configuration utilities."""

import logging
import sys
from logging.handlers import TimedRotatingFileHandler
from pathlib import Path

from config import Config

LOG_FORMAT = "%(asctime)s - %(name)s - %(levelname)s - %(message)s"


def setup_rotating_file_handler(
    log_file: str,
    format_string: str = LOG_FORMAT,
) -> TimedRotatingFileHandler:
    """
    Create a TimedRotatingFileHandler with standardized configuration.

    Args:
        log_file: Path to the log file; its parent directory is created if missing
        format_string: Log format string (default includes name, level, message)

    Returns:
        Configured TimedRotatingFileHandler rotating at midnight and keeping
        today's file plus two backups
    """
    Path(log_file).parent.mkdir(parents=True, exist_ok=True)

    handler = TimedRotatingFileHandler(
        filename=log_file,
        when="midnight",
        interval=1,
        backupCount=2,
    )
    handler.setFormatter(logging.Formatter(format_string))
    return handler


def configure_logging(cfg: Config, level: str | None = None) -> None:
    """
    Install the root handlers used by the command-line entry point.

    Log records go to stderr (stdout is reserved for result artifacts) and,
    unless cfg.log_file is empty, to a rotating file.

    Args:
        cfg: Application configuration
        level: Level name overriding cfg.log_level
    """
    level_name = (level or cfg.log_level).upper()
    handlers: list[logging.Handler] = [logging.StreamHandler(sys.stderr)]
    if cfg.log_file:
        handlers.append(setup_rotating_file_handler(cfg.log_file))

    logging.basicConfig(
        level=getattr(logging, level_name, logging.INFO),
        format=LOG_FORMAT,
        handlers=handlers,
        force=True,
    )
