"""
Run logs in CCL (Categorical Configuration Language) format.

A run log is a tree of `key = value` lines; nesting is written by indentation
and list items by `= i =` headers:

    command = run
    run =
      instance = l1-plane
      stage =
        name = lozanovskii
        start_at = 00:00:00.012
        verdict =
          name = lemma1
          result = Verdict.PASS

Format: https://chshersh.com/blog/2025-01-06-the-most-elegant-configuration-language.html
"""

import hashlib
import json
import threading
import time
from contextlib import contextmanager
from datetime import datetime
from enum import Enum
from pathlib import Path
from typing import Callable, Iterator, Optional, TextIO

from lozvol.errors import BoundCheckReport


def enum_str(enum: Enum) -> str:
    return f"{type(enum).__name__}.{enum.name}"


def format_value(value) -> Optional[str]:
    if value is None:
        return None
    if isinstance(value, Enum):
        return enum_str(value)
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return f"{value:.12g}"
    return str(value)


class CCLLogger:
    """Writes the run log; with no stream every call does nothing.

    Multi-line values are written once. A repeat is written as a reference
    `@path/to/first/key`.
    """

    def __init__(self, stream: Optional[TextIO] = None):
        self._stream = stream
        self._path: list[str | int] = []
        self._seen: dict[bytes, str] = {}
        self._t0 = time.monotonic()
        if stream is not None:
            self.write_kv("start_time", datetime.now().isoformat())

    @classmethod
    def open(cls, log_file: Path) -> "CCLLogger":
        return cls(open(log_file, "w", buffering=1, encoding="utf-8"))

    @property
    def enabled(self) -> bool:
        return self._stream is not None

    def _emit(self, key: str, text: str = ""):
        if self._stream is None:
            return
        line = "  " * len(self._path) + key + (" = " + text if text else " =")
        self._stream.write(line + "\n")
        self._stream.flush()

    def write_kv(self, key: str, value):
        text = format_value(value)
        if text is None:
            self._emit(key)
            return
        if "\n" not in text:
            self._emit(key, text.strip())
            return
        digest = hashlib.sha256(text.encode("utf-8")).digest()
        if digest in self._seen:
            self._emit(key, self._seen[digest])
            return
        self._seen[digest] = "@" + "/".join(str(p) for p in [*self._path, key])
        pad = "  " * (len(self._path) + 1)
        self._emit(key, "\n" + "\n".join(pad + line for line in text.splitlines()))

    def elapsed(self) -> str:
        """hh:mm:ss.mmm since the log was opened."""
        seconds = time.monotonic() - self._t0
        hours, rest = divmod(seconds, 3600)
        minutes, seconds = divmod(rest, 60)
        return f"{int(hours):02d}:{int(minutes):02d}:{seconds:06.3f}"

    @contextmanager
    def section(self, name: str, timed: bool = False) -> Iterator["CCLLogger"]:
        self._emit(name)
        self._path.append(name)
        if timed:
            self.write_kv("start_at", self.elapsed())
        try:
            yield self
        finally:
            if timed:
                self.write_kv("end_at", self.elapsed())
            self._path.pop()

    @contextmanager
    def items(self) -> Iterator[Callable[[], None]]:
        """List block; call the yielded function before every item after the first."""
        self._emit("= 0 =")
        self._path.append(0)

        def next_item():
            index = self._path.pop() + 1
            self._emit(f"= {index} =")
            self._path.append(index)

        try:
            yield next_item
        finally:
            self._path.pop()

    def close(self):
        if self._stream is not None:
            self._stream.close()
            self._stream = None

    # lozvol events

    def log_settings(self):
        """Settings that differ from the defaults, as compact JSON."""
        from lozvol.defaults import get_settings_manager
        diff = get_settings_manager().get_settings(diff_only=True)
        self.write_kv("settings", json.dumps(diff, separators=(",", ":")))

    def log_verdict(self, report: BoundCheckReport):
        with self.section("verdict"):
            self.write_kv("name", report.name)
            self.write_kv("lhs", report.lhs)
            self.write_kv("rhs", report.rhs)
            self.write_kv("margin", report.margin)
            self.write_kv("result", report.verdict)

    def log_exception(self, text: str):
        self._path = []
        self.write_kv("exception", text)

    def log_session_end(self, signal: Optional[str] = None, instances: Optional[int] = None,
                        failures: Optional[int] = None):
        """Closing block of a log.

        Args:
            signal: None for an orderly exit, else the signal name ("SIGTERM") or "EXCEPTION".
            instances: Instances run by a suite.
            failures: FAIL verdicts counted by a suite.
        """
        self._path = []
        with self.section("session_end"):
            self.write_kv("elapsed", self.elapsed())
            self.write_kv("signal", signal)
            if instances is not None:
                self.write_kv("instances", instances)
            if failures is not None:
                self.write_kv("failures", failures)


_DISABLED = CCLLogger()
_logger: Optional[CCLLogger] = None
_local = threading.local()


def init_logger(log_file: Path) -> CCLLogger:
    global _logger
    _logger = CCLLogger.open(log_file)
    return _logger


def get_logger() -> CCLLogger:
    """The process run log; a disabled logger if none is open or the thread is suppressed."""
    if _logger is None or getattr(_local, "suppressed", False):
        return _DISABLED
    return _logger


def is_initialized() -> bool:
    return _logger is not None


def close_logger():
    global _logger
    if _logger is not None:
        _logger.close()
        _logger = None


@contextmanager
def suppressed():
    """Silence the run log in this thread; suite workers run under it."""
    previous = getattr(_local, "suppressed", False)
    _local.suppressed = True
    try:
        yield
    finally:
        _local.suppressed = previous
