"""
fpequiv - Equivalence checking toolkit for floating-point adder datapaths
"""

__version__ = "1.1.0"
__author__ = "Jeet Dekivadia"
__email__ = "jeet.university@gmail.com"
__description__ = (
    "Bit-level reference and two-stage implementation adders, an assertion checker "
    "over both, fault injection with stage localization, and coverage metrics"
)

from .checker import CheckerSettings, CheckMode, DriveMode, VerificationReport, check, localize, shrink
from .coverage import CoverageReport, catalog, measure
from .faults import FaultConfig, FaultKind, Stage
from .float_core import FloatFormat, FloatTriple, ref_add
from .impl_adder import eval_spec
from .properties import corpus, parse

__all__ = [
    "CheckerSettings",
    "CheckMode",
    "CoverageReport",
    "DriveMode",
    "FaultConfig",
    "FaultKind",
    "FloatFormat",
    "FloatTriple",
    "Stage",
    "VerificationReport",
    "catalog",
    "check",
    "corpus",
    "eval_spec",
    "localize",
    "measure",
    "parse",
    "ref_add",
    "shrink",
]
