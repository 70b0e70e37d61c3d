from contextlib import contextmanager
import sys

from loguru import logger

# Nothing is printed until the CLI asks for it; library use stays quiet
logger.remove()

_console_handler_id = None

CONSOLE_FORMAT = "<green>{time:HH:mm:ss}</green> | <level>{level: <7}</level> | {message}"
DEBUG_FORMAT = "{time:HH:mm:ss.SSS} | {level: <7} | {name}:{function}:{line} - {message}"


def enable_console_logging(level: str = "INFO"):
    """(Re)install the stderr handler; DEBUG also shows the call site."""
    global _console_handler_id
    if _console_handler_id is not None:
        logger.remove(_console_handler_id)
    fmt = DEBUG_FORMAT if level == "DEBUG" else CONSOLE_FORMAT
    _console_handler_id = logger.add(sys.stderr, format=fmt, level=level, colorize=None)


@contextmanager
def capture_logs(level: str = "DEBUG"):
    """Collect the messages logged inside the block."""
    messages: list[str] = []
    handler_id = logger.add(lambda m: messages.append(m.record["message"]), level=level, format="{message}")
    try:
        yield messages
    finally:
        logger.remove(handler_id)


__all__ = ["logger", "enable_console_logging", "capture_logs"]
