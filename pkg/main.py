"""
Main Entry Point.

Runs the eicsr command surface: `python main.py <command> ...` is the same
as the installed `eicsr` console script.
"""
import sys

from eicsr.cli.commands import main
from eicsr.core.config import settings
from eicsr.services.logger import get_logger

logger = get_logger(__name__)


if __name__ == "__main__":
    logger.debug(f"Starting {settings.app_name} v{settings.version} ({settings.environment})")
    sys.exit(main())
