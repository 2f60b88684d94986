"""Console logging for the command-line tools."""

import logging

from rich.console import Console
from rich.logging import RichHandler

PACKAGE_LOGGER = "transport_bounds"


def verbosity_level(verbose: int) -> int:
    """0 -> WARNING, 1 -> INFO, 2 or more -> DEBUG."""
    return {0: logging.WARNING, 1: logging.INFO}.get(verbose, logging.DEBUG)


def get_logger(name: str = PACKAGE_LOGGER, verbose: int = 0) -> logging.Logger:
    """Return a logger whose package root writes to stderr through rich.

    The handler is installed once on the package logger; later calls only
    adjust the level.
    """
    root = logging.getLogger(PACKAGE_LOGGER)
    if not any(isinstance(h, RichHandler) for h in root.handlers):
        handler = RichHandler(
            console=Console(stderr=True),
            show_path=False,
            markup=True,
            rich_tracebacks=False,
        )
        handler.setFormatter(logging.Formatter("%(message)s", datefmt="[%X]"))
        root.addHandler(handler)
        root.propagate = False
    root.setLevel(verbosity_level(verbose))
    return logging.getLogger(name)


# helper function to format log messages
def format_log_message(component: str, item: str, event: str, value: str) -> str:
    return f"[magenta]{component:20}[/magenta] | {item:30} | [cyan]{event:20}[/cyan] | {value:20}"
