"""
Configuration manager for fpequiv
Handles the optional checker defaults file
"""
import json
import logging
from pathlib import Path
from typing import Any, Dict, Optional

from pydantic import ValidationError

from .checker import CheckerSettings
from .exceptions import CheckConfigError

logger = logging.getLogger(__name__)


class ConfigManager:
    """Reads and writes checker defaults kept in ``~/.fpequiv/settings.json``"""

    def __init__(self, settings_file: Optional[Path] = None):
        if settings_file is None:
            self.config_dir = Path.home() / ".fpequiv"
            self.config_file = self.config_dir / "settings.json"
        else:
            self.config_file = Path(settings_file)
            self.config_dir = self.config_file.parent

    def _ensure_config_dir(self):
        """Create config directory if it doesn't exist"""
        self.config_dir.mkdir(parents=True, exist_ok=True)

    def has_settings(self) -> bool:
        return self.config_file.exists()

    def _read(self) -> Dict[str, Any]:
        try:
            with open(self.config_file, "r") as f:
                data = json.load(f)
        except json.JSONDecodeError as e:
            raise CheckConfigError(f"settings file {self.config_file} is not valid JSON: {e}") from None
        except OSError as e:
            raise CheckConfigError(f"cannot read settings file {self.config_file}: {e}") from None
        if not isinstance(data, dict):
            raise CheckConfigError(f"settings file {self.config_file} must hold a JSON object")
        return data

    def load_settings(self, **overrides: Any) -> CheckerSettings:
        """Stored defaults with ``overrides`` applied; built-in defaults when no file exists."""
        data: Dict[str, Any] = self._read() if self.has_settings() else {}
        if data:
            logger.debug(f"Loaded checker settings from {self.config_file}: {data}")
        data.update({k: v for k, v in overrides.items() if v is not None})
        try:
            return CheckerSettings(**data)
        except ValidationError as e:
            raise CheckConfigError(f"invalid checker settings in {self.config_file}: {e}") from None

    def save_settings(self, settings: CheckerSettings):
        """Save checker defaults"""
        self._ensure_config_dir()
        with open(self.config_file, "w") as f:
            json.dump(settings.model_dump(), f, indent=2)
        logger.info(f"Saved checker settings to {self.config_file}")

    def clear_config(self):
        """Remove the settings file"""
        if self.config_file.exists():
            self.config_file.unlink()
