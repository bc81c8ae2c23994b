"""
Structured logging helpers.
Messages render as "message | key=value key=value" on a stderr handler;
stdout is reserved for command output.
"""

import logging
import sys

from config import log_level

logger = logging.getLogger("gpu_dag_sched")

# Set up handler if not already configured
if not logger.handlers:
    handler = logging.StreamHandler(sys.stderr)
    handler.setLevel(logging.DEBUG)
    formatter = logging.Formatter(
        '%(asctime)s - %(name)s - %(levelname)s - %(message)s',
        datefmt='%Y-%m-%d %H:%M:%S'
    )
    handler.setFormatter(formatter)
    logger.addHandler(handler)
    logger.setLevel(getattr(logging, log_level, logging.INFO))


def format_fields(message: str, **fields) -> str:
    """Append key=value pairs to a log message."""
    if not fields:
        return message
    kv = " ".join(f"{k}={v}" for k, v in fields.items())
    return f"{message} | {kv}"


def log_info(message: str, **fields):
    logger.info(format_fields(message, **fields))


def log_warning(message: str, **fields):
    logger.warning(format_fields(message, **fields))


def log_error(message: str, exc_info: bool = False, **fields):
    logger.error(format_fields(message, **fields), exc_info=exc_info)
