"""
logger

Defines a logger with a custom format to be used across all the modules.

Class:
    CustomFormatter: Defines a logger formatter, with different colors and format.
    OnceLogger: defines a logger which reports keyed events only once, counting repeats.

Functions:
    setup_logger: defines a logger, sets it up and returns it.
    set_log_level: changes the level of every logger created by setup_logger.
"""

import logging
from typing import Dict
from typing import List
from typing import Optional

LOG_FILE_PATH = "/tmp/conic_surfaces.log"
LOG_FORMAT = "%(asctime)s - %(name)s - %(levelname)s - %(message)s (%(filename)s:%(lineno)d)"

global log_level
global custom_loggers
custom_loggers: List[str] = []
log_level = None


class CustomFormatter(logging.Formatter):

    grey = "\x1b[38;20m"
    green = "\x1b[32m"
    yellow = "\x1b[33;20m"
    red = "\x1b[31;20m"
    bold_red = "\x1b[31;1m"
    reset = "\x1b[0m"

    FORMATS = {
        logging.DEBUG: green + LOG_FORMAT + reset,
        logging.INFO: grey + LOG_FORMAT + reset,
        logging.WARNING: yellow + LOG_FORMAT + reset,
        logging.ERROR: red + LOG_FORMAT + reset,
        logging.CRITICAL: bold_red + LOG_FORMAT + reset,
    }

    def format(self, record):
        """
        Apply color formatting based on the log level.
        """
        formatter = logging.Formatter(self.FORMATS.get(record.levelno))
        return formatter.format(record)


def set_log_level(level: str):
    """
    Sets the level for loggers created from now on, and for those already created during
    module import.
    """
    global log_level
    log_level = level.upper()
    for name in custom_loggers:
        logging.getLogger(name).setLevel(log_level)


def setup_logger(name: str, log_file_path: Optional[str] = LOG_FILE_PATH) -> logging.Logger:
    """
    Set up a logger with the custom formatter.

    Args:
        name (str): The name of the logger.
        log_file_path (str): File receiving an uncolored copy of the log. None disables it.

    Returns:
        logging.Logger: Configured logger with the custom formatter.
    """
    global log_level, custom_loggers
    if not log_level:
        log_level = "INFO"
    logger = logging.getLogger(name)
    logger.setLevel(log_level)
    if name not in custom_loggers:
        custom_loggers.append(name)

    if not logger.handlers:
        console_handler = logging.StreamHandler()
        console_handler.setFormatter(CustomFormatter())
        logger.addHandler(console_handler)
        if log_file_path:
            try:
                file_handler = logging.FileHandler(log_file_path)
            except OSError:
                # Read-only /tmp (sandboxes, some CI runners): console only
                file_handler = None
            if file_handler:
                file_handler.setFormatter(logging.Formatter(LOG_FORMAT))
                logger.addHandler(file_handler)
        logger.propagate = False

    return logger


class OnceLogger:
    """
    Wraps a logger so that keyed events are reported the first time only. Later occurrences
    are counted; Newton uses it for step damping and eigen-monitor failures, which can repeat
    at every iteration.
    """

    def __init__(self, log_handle: logging.Logger):
        self._log = log_handle
        self._reported_events: Dict[str, int] = {}

    def warning(self, key: str, msg: str):
        if self._should_report_event(key):
            self._log.warning(msg + " [reported once]")
        self._count(key)

    def info(self, key: str, msg: str):
        if self._should_report_event(key):
            self._log.info(msg + " [reported once]")
        self._count(key)

    def occurrences(self, key: str) -> int:
        return self._reported_events.get(key, 0)

    def reset_all(self) -> None:
        self._reported_events = {}

    def _count(self, key: str):
        self._reported_events[key] = self._reported_events.get(key, 0) + 1

    def _should_report_event(self, key: str) -> bool:
        return self._reported_events.get(key, 0) == 0
