"""Make the default settings available as python objects."""

import json
import os


settings_path = os.path.join(os.path.dirname(__file__), "settings.json")
with open(settings_path, "r") as f:
    DEFAULT_SETTINGS = json.load(f)

from lozvol.defaults.lozvol_settings import (
    deep_merge,
    get_settings_manager,
    setting,
    SettingsManager,
)

__all__ = [
    "DEFAULT_SETTINGS",
    "deep_merge",
    "get_settings_manager",
    "setting",
    "SettingsManager",
]
