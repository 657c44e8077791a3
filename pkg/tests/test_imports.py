"""
Import and package-structure tests for fpequiv.
"""
import subprocess
import sys
import unittest
from pathlib import Path

ROOT = Path(__file__).resolve().parents[1]


class TestPackageStructure(unittest.TestCase):
    """Test the public package surface."""

    def test_metadata(self):
        import fpequiv

        self.assertEqual(fpequiv.__version__, "1.1.0")
        self.assertTrue(fpequiv.__author__)
        self.assertTrue(fpequiv.__email__)

    def test_all_exports_resolve(self):
        import fpequiv

        self.assertTrue(fpequiv.__all__)
        for name in fpequiv.__all__:
            self.assertTrue(hasattr(fpequiv, name), name)

    def test_submodules(self):
        """Test that each submodule imports on its own."""
        from fpequiv import checker, cli, config_manager, coverage, exceptions, faults, float_core, oracle
        from fpequiv import impl_adder, properties

        for module in (checker, cli, config_manager, coverage, exceptions, faults, float_core, oracle,
                       impl_adder, properties):
            self.assertIsNotNone(module)

    def _run(self, *args):
        return subprocess.run(
            [sys.executable, "-W", "error::RuntimeWarning", *args],
            capture_output=True, text=True, cwd=ROOT, timeout=120,
        )

    def test_module_entry_points(self):
        """Test that python -m runs the CLI from the package and from fpequiv.cli."""
        import fpequiv
        from fpequiv import __main__ as entry
        from fpequiv import cli

        self.assertIs(entry.main, cli.main)
        for target in ("fpequiv", "fpequiv.cli"):
            result = self._run("-m", target, "--version")
            self.assertEqual(result.returncode, 0, result.stderr)
            self.assertIn(fpequiv.__version__, result.stdout)

    def test_package_import_leaves_cli_unloaded(self):
        result = self._run("-c", "import sys, fpequiv; print('fpequiv.cli' in sys.modules)")
        self.assertEqual(result.returncode, 0, result.stderr)
        self.assertEqual(result.stdout.strip(), "False")

    def test_error_hierarchy(self):
        from fpequiv.exceptions import CheckConfigError, FormatError, FpEquivError, PropertyError

        self.assertTrue(issubclass(FormatError, ValueError))
        self.assertTrue(issubclass(CheckConfigError, FpEquivError))
        self.assertTrue(issubclass(PropertyError, FpEquivError))


if __name__ == "__main__":
    unittest.main()
