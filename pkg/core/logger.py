"""Logging configuration for hybridloc."""
import logging
import sys

from rich.console import Console
from rich.logging import RichHandler

def setup_logger(name: str = "hybridloc", level: str = "INFO", use_rich: bool = True) -> logging.Logger:
    """Set up the package logger.

    Library modules log through ``logging.getLogger(__name__)``; the handler is
    attached to the root package names so their records are routed here.

    Args:
        name: Logger name
        level: Logging level (DEBUG, INFO, WARNING, ERROR, CRITICAL)
        use_rich: Whether to use rich formatting

    Returns:
        Configured logger instance
    """
    numeric_level = getattr(logging, level.upper(), logging.INFO)

    if use_rich:
        handler: logging.Handler = RichHandler(
            console=Console(stderr=True),
            show_time=True,
            show_path=numeric_level <= logging.DEBUG,
            rich_tracebacks=True,
        )
        handler.setFormatter(logging.Formatter("%(message)s", datefmt="[%X]"))
    else:
        handler = logging.StreamHandler(sys.stderr)
        handler.setFormatter(
            logging.Formatter(
                "%(asctime)s - %(name)s - %(levelname)s - %(message)s",
                datefmt="%Y-%m-%d %H:%M:%S",
            )
        )

    logger = logging.getLogger(name)
    for target in (logger, logging.getLogger("core"), logging.getLogger("engines")):
        target.setLevel(numeric_level)
        target.handlers.clear()
        target.addHandler(handler)
        target.propagate = False
    return logger


def verbosity_to_level(verbose: int, quiet: bool = False, default: str = "INFO") -> str:
    """Map ``-v`` counts and ``-q`` to a level name.

    Zero ``-v`` keeps ``default``; any ``-v`` selects DEBUG.
    """
    if quiet:
        return "WARNING"
    if verbose <= 0:
        return default
    return "DEBUG"
