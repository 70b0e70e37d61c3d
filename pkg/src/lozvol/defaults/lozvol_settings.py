"""Settings manager for tolerances, solver limits and search budgets."""

import copy
from contextlib import contextmanager
from functools import reduce
from typing import Any, Dict, Iterator, Optional


def deep_merge(original, update):
    """Recursively merge nested dictionaries.

    Keys in `update` must already exist in `original` with a compatible type;
    ints are accepted where a float is expected.
    """
    result = copy.deepcopy(original)
    for key, value in update.items():
        if key not in result:
            raise KeyError(f"Unknown setting '{key}'.")
        current = result[key]
        if isinstance(current, dict) and isinstance(value, dict):
            result[key] = deep_merge(current, value)
        elif isinstance(current, float) and isinstance(value, int) and not isinstance(value, bool):
            result[key] = float(value)
        elif type(current) != type(value):
            raise KeyError(f"Setting '{key}' expects {type(current).__name__}, got {type(value).__name__}.")
        else:
            result[key] = copy.deepcopy(value)
    return result


def deep_diff(base: Dict[str, Any], other: Dict[str, Any]) -> Dict[str, Any]:
    """The part of `other` that differs from `base`; both share one key structure."""
    out = {}
    for key, value in other.items():
        if isinstance(value, dict):
            nested = deep_diff(base[key], value)
            if nested:
                out[key] = nested
        elif base[key] != value:
            out[key] = value
    return out


class SettingsManager:
    """Holds the active settings: defaults with overrides merged on top."""

    def __init__(self, defaults: Dict[str, Any], overrides: Optional[Dict[str, Any]] = None):
        self._defaults = defaults
        self.settings = deep_merge(defaults, overrides or {})

    def get_settings(self, diff_only: bool = False) -> Dict[str, Any]:
        if diff_only:
            return deep_diff(self._defaults, self.settings)
        return copy.deepcopy(self.settings)

    def update_settings(self, overrides: Dict[str, Any]):
        self.settings = deep_merge(self.settings, overrides)

    def reset(self):
        self.settings = copy.deepcopy(self._defaults)

    @contextmanager
    def overridden(self, overrides: Optional[Dict[str, Any]]) -> Iterator["SettingsManager"]:
        """Apply `overrides` for the duration of the block, then restore."""
        saved = self.settings
        if overrides:
            self.update_settings(overrides)
        try:
            yield self
        finally:
            self.settings = saved

    def get_setting_value(self, value_path: str) -> Any:
        """Value at a dotted path such as "solver.max_iter"."""
        try:
            return reduce(lambda node, part: node[part], value_path.split("."), self.settings)
        except (KeyError, TypeError):
            raise ValueError(f"Setting path '{value_path}' not found.") from None


_settings_manager: Optional[SettingsManager] = None


def get_settings_manager() -> SettingsManager:
    global _settings_manager
    if _settings_manager is None:
        from lozvol.defaults import DEFAULT_SETTINGS
        _settings_manager = SettingsManager(DEFAULT_SETTINGS)
    return _settings_manager


def setting(value_path: str) -> Any:
    """Shortcut for the active value at `value_path`."""
    return get_settings_manager().get_setting_value(value_path)
