"""
Structured logging configuration using Loguru.

Every record goes to stderr so stdout stays reserved for command output
(JSON reports, JSONL corpora, CSV). Modules obtain a logger bound to their
name with get_logger(__name__).
"""
import sys
from pathlib import Path
from typing import Any

from loguru import logger

from eicsr.core.config import settings


def _format(production: bool) -> str:
    if production:
        return (
            "{time:YYYY-MM-DD HH:mm:ss.SSS} | {level: <8} | "
            "{extra[logger_name]} | {message}"
        )
    return (
        "<green>{time:HH:mm:ss.SSS}</green> | <level>{level: <8}</level> | "
        "<cyan>{extra[logger_name]}</cyan> | <level>{message}</level>"
    )


def configure_logger(level: str | None = None) -> None:
    """
    (Re)install the loguru sinks.

    Args:
        level: Overrides EICSR_LOG_LEVEL for the stderr sink (the CLI passes
            DEBUG for --verbose and WARNING for --quiet)

    File sinks (error.log and app.log under EICSR_LOG_DIR, rotated and
    compressed) are added only when EICSR_LOG_TO_FILE is set.
    """
    logger.remove()
    logger.configure(extra={"logger_name": "eicsr"})
    production = settings.environment == "production"
    log_format = _format(production)
    stderr_level = (level or settings.log_level).upper()

    logger.add(
        sys.stderr,
        format=log_format,
        level=stderr_level,
        colorize=not production,
        backtrace=True,
        diagnose=not production,
    )

    if settings.log_to_file:
        log_dir = Path(settings.log_dir)
        log_dir.mkdir(parents=True, exist_ok=True)
        logger.add(
            log_dir / "error.log",
            format=log_format,
            level="ERROR",
            rotation="10 MB",
            retention="7 days",
            compression="zip",
        )
        logger.add(
            log_dir / "app.log",
            format=log_format,
            level=settings.log_level,
            rotation="100 MB",
            retention="7 days",
            compression="zip",
        )

    logger.debug(
        f"Logger configured: level={stderr_level}, environment={settings.environment}, "
        f"files={settings.log_to_file}"
    )


def get_logger(name: str | None = None) -> Any:
    """Logger bound to `name`; the unbound logger reports as "eicsr"."""
    if name:
        return logger.bind(logger_name=name)
    return logger


configure_logger()
