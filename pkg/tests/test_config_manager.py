"""
Tests for the checker settings file.
"""
import json
import tempfile
import unittest
from pathlib import Path

from fpequiv.checker import CheckerSettings
from fpequiv.config_manager import ConfigManager
from fpequiv.exceptions import CheckConfigError


class TestConfigManager(unittest.TestCase):
    """Test loading, saving and overriding checker settings."""

    def setUp(self):
        self._tmp = tempfile.TemporaryDirectory()
        self.path = Path(self._tmp.name) / "nested" / "settings.json"
        self.manager = ConfigManager(self.path)

    def tearDown(self):
        self._tmp.cleanup()

    def test_defaults_without_file(self):
        self.assertFalse(self.manager.has_settings())
        self.assertEqual(self.manager.load_settings(), CheckerSettings())

    def test_save_and_load(self):
        self.manager.save_settings(CheckerSettings(workers=4, cex_limit=2))
        self.assertTrue(self.manager.has_settings())
        loaded = self.manager.load_settings()
        self.assertEqual((loaded.workers, loaded.cex_limit), (4, 2))

    def test_overrides_win_and_none_is_ignored(self):
        self.manager.save_settings(CheckerSettings(workers=4))
        loaded = self.manager.load_settings(workers=2, shrink=None)
        self.assertEqual(loaded.workers, 2)
        self.assertTrue(loaded.shrink)

    def test_invalid_values(self):
        self.path.parent.mkdir(parents=True)
        self.path.write_text(json.dumps({"workers": 0}))
        with self.assertRaises(CheckConfigError):
            self.manager.load_settings()

    def test_not_an_object(self):
        self.path.parent.mkdir(parents=True)
        self.path.write_text("[1, 2]")
        with self.assertRaises(CheckConfigError):
            self.manager.load_settings()

    def test_clear(self):
        self.manager.save_settings(CheckerSettings())
        self.manager.clear_config()
        self.assertFalse(self.manager.has_settings())


if __name__ == "__main__":
    unittest.main()
