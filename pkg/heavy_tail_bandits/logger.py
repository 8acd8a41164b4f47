"""Logging for heavy-tail-bandits: one process-wide logger rendered by rich on stderr."""

import logging
from enum import Enum
from typing import Iterable, Optional

from rich.console import Console
from rich.logging import RichHandler

SERIES_LIMIT = 50


class LogLevel(Enum):
    """Log levels for the application."""
    DEBUG = logging.DEBUG
    INFO = logging.INFO
    WARNING = logging.WARNING
    ERROR = logging.ERROR
    CRITICAL = logging.CRITICAL


# rich markup wrapped around each level's messages
_STYLES = {
    logging.DEBUG: "dim",
    logging.WARNING: "yellow",
    logging.ERROR: "red",
    logging.CRITICAL: "bold red",
}


def _make_handler(console: Console) -> RichHandler:
    handler = RichHandler(console=console, show_time=False, show_path=False, markup=True,
                          rich_tracebacks=True, tracebacks_show_locals=False)
    handler.setFormatter(logging.Formatter('%(message)s'))
    return handler


class HeavyTailBanditsLogger:
    """Singleton around logging.getLogger('heavy_tail_bandits').

    Library modules log through it and never print; the CLI swaps the console in tests.
    """

    _instance: Optional['HeavyTailBanditsLogger'] = None

    def __new__(cls):
        if cls._instance is None:
            instance = super().__new__(cls)
            instance.logger = logging.getLogger('heavy_tail_bandits')
            instance.logger.setLevel(logging.INFO)
            instance.logger.propagate = False
            instance.set_console(Console(stderr=True))
            cls._instance = instance
        return cls._instance

    def set_console(self, console: Console):
        """Route all output to `console`."""
        self.logger.handlers.clear()
        self.logger.addHandler(_make_handler(console))

    def set_level(self, level: LogLevel):
        self.logger.setLevel(level.value)

    def is_debug(self) -> bool:
        return self.logger.isEnabledFor(logging.DEBUG)

    def _log(self, level: int, message: str, *args, **kwargs):
        style = _STYLES.get(level)
        if style:
            message = f"[{style}]{message}[/{style}]"
        self.logger.log(level, message, *args, **kwargs)

    def debug(self, message: str, *args, **kwargs):
        self._log(logging.DEBUG, message, *args, **kwargs)

    def info(self, message: str, *args, **kwargs):
        self._log(logging.INFO, message, *args, **kwargs)

    def warning(self, message: str, *args, **kwargs):
        self._log(logging.WARNING, message, *args, **kwargs)

    def error(self, message: str, *args, **kwargs):
        self._log(logging.ERROR, message, *args, **kwargs)

    def critical(self, message: str, *args, **kwargs):
        self._log(logging.CRITICAL, message, *args, **kwargs)

    def trial_debug(self, message: str):
        """Per-trial progress, shown with --debug."""
        self.logger.debug(f"[cyan]TRIAL: {message}[/cyan]")

    def series_debug(self, name: str, values: Iterable[float]):
        """A numeric series at debug level, cut after SERIES_LIMIT values."""
        if not self.is_debug():
            return
        values = list(values)
        self.debug(f"===== {name} ({len(values)} values) =====")
        self.debug(", ".join(f"{v:.6g}" for v in values[:SERIES_LIMIT]))
        if len(values) > SERIES_LIMIT:
            self.debug(f"... ({len(values) - SERIES_LIMIT} more values)")


def get_logger() -> HeavyTailBanditsLogger:
    """Get the global logger instance."""
    return HeavyTailBanditsLogger()
