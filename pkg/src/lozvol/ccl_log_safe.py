"""Close the run log with a session_end block on exit, on SIGINT/SIGTERM and on uncaught exceptions."""

import atexit
import signal
import sys
import traceback
from typing import Optional

from lozvol.ccl_log import close_logger, get_logger, is_initialized

_installed = False


def ensure_log_cleanup(signal_name: Optional[str] = None, exception: Optional[str] = None):
    if not is_initialized():
        return
    ccl = get_logger()
    try:
        if exception is not None:
            ccl.log_exception(exception)
        ccl.log_session_end(signal=signal_name)
    except (OSError, ValueError):
        # stream already gone
        pass
    finally:
        close_logger()


def _excepthook(exc_type, exc_value, exc_traceback):
    if not issubclass(exc_type, KeyboardInterrupt):
        text = "".join(traceback.format_exception(exc_type, exc_value, exc_traceback))
        ensure_log_cleanup("EXCEPTION", exception=text)
    sys.__excepthook__(exc_type, exc_value, exc_traceback)


def _on_signal(signum, frame):
    ensure_log_cleanup(signal.Signals(signum).name)
    signal.signal(signum, signal.SIG_DFL)
    signal.raise_signal(signum)


def setup_safe_logging():
    """Install the cleanup hooks once per process."""
    global _installed
    if _installed:
        return
    _installed = True
    atexit.register(ensure_log_cleanup)
    sys.excepthook = _excepthook
    for sig in (signal.SIGTERM, signal.SIGINT):
        try:
            signal.signal(sig, _on_signal)
        except (OSError, ValueError):
            # only the main thread may install handlers
            pass
