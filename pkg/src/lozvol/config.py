import os
from pathlib import Path
from typing import Optional

threads: int
cache_dir: Optional[Path]


def _threads_from_env() -> int:
    value = os.environ.get("LOZVOL_THREADS")
    if value is None:
        return max(1, os.cpu_count() or 1)
    try:
        return max(1, int(value))
    except ValueError:
        raise ValueError(f"LOZVOL_THREADS must be an integer, got {value!r}")


def init():
    global threads
    threads = _threads_from_env()

    global cache_dir
    env_cache = os.environ.get("LOZVOL_CACHE_DIR")
    cache_dir = Path(env_cache) if env_cache else None

    from lozvol.defaults import get_settings_manager
    get_settings_manager().reset()


def get_threads() -> int:
    """Parallelism cap; initialises from the environment on first use."""
    if "threads" not in globals():
        init()
    return threads
