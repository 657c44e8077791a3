"""
Structural cover items over the implementation adder and the three coverage ratios.

An item is *covered* when its watch fires on at least one admitted stimulus and
*checked* when its watch signals fall inside the support of some assertion, after
one expansion step through ``DEPENDENCIES``.
"""
import json
import logging
from enum import Enum
from typing import Any, Dict, FrozenSet, Iterable, List, Optional, Sequence

from pydantic import BaseModel, ConfigDict, Field

from .checker import CheckerSettings, CheckMode, DriveMode, scan
from .faults import NO_FAULTS, FaultConfig, Stage
from .float_core import FloatFormat
from .impl_adder import NAMESPACES
from .properties import Expr, Program, Role, parse_expr, signal_support

logger = logging.getLogger(__name__)


class CoverItem(BaseModel):
    model_config = ConfigDict(frozen=True)

    id: str
    description: str
    stage: Stage
    watch: str = Field(..., description="Conjunction over impl.* signals in the property grammar")

    def expr(self) -> Expr:
        return parse_expr(self.watch)

    def signals(self) -> FrozenSet[str]:
        return frozenset(name.split(".", 1)[1] for name in signal_support(self.expr()))


def _item(id: str, stage: Stage, watch: str, description: str) -> CoverItem:
    return CoverItem(id=id, description=description, stage=stage, watch=watch)


_A, _R = Stage.ALIGNMENT, Stage.ADD_ROUND

# One item per outcome of each two-way decision, in datapath order.
_CATALOG: List[CoverItem] = [
    _item("big-operand-f1", _A, "impl.big_is_f1 == 1", "first operand selected as larger"),
    _item("big-operand-f2", _A, "impl.big_is_f1 == 0", "second operand selected as larger"),
    _item("equal-exp-f1-larger", _A, "impl.expdiff == 0 && impl.big_is_f1 == 1",
          "equal exponents, mantissa compare keeps the first operand"),
    _item("equal-exp-f2-larger", _A, "impl.expdiff == 0 && impl.big_is_f1 == 0",
          "equal exponents, mantissa compare picks the second operand"),
    _item("effective-add", _A, "impl.eff_sub == 0", "operand signs agree"),
    _item("effective-sub", _A, "impl.eff_sub == 1", "operand signs differ"),
    _item("sticky-clear", _A, "impl.sticky == 0", "no nonzero bits shifted past round"),
    _item("sticky-set", _A, "impl.sticky == 1", "nonzero bits shifted past round"),
    _item("collapse-taken", _A, "impl.collapse == 1", "smaller operand collapses into sticky"),
    _item("collapse-not-taken", _A, "impl.collapse == 0", "smaller operand shifted into range"),
    _item("carry-out-taken", _R, "impl.carry_out == 1", "sum carries out of the adder window"),
    _item("carry-out-not-taken", _R, "impl.carry_out == 0", "sum stays within the adder window"),
    _item("norm-shift-zero", _R, "impl.carry_out == 0 && impl.exact_zero == 0 && impl.norm_shift == 0",
          "sum already normalized"),
    _item("norm-shift-one", _R, "impl.norm_shift == 1", "one-position normalization shift"),
    _item("norm-shift-deep", _R, "impl.norm_deep == 1", "normalization shift of two or more"),
    _item("round-increment-taken", _R, "impl.round_inc == 1", "rounding increments the significand"),
    _item("round-increment-not-taken", _R, "impl.round_inc == 0", "rounding truncates"),
    _item("overflow-set", _R, "impl.overflow == 1", "result saturates"),
    _item("overflow-clear", _R, "impl.overflow == 0", "no overflow"),
    _item("underflow-set", _R, "impl.underflow == 1", "result flushed to zero"),
    _item("underflow-clear", _R, "impl.underflow == 0", "no underflow"),
    _item("exact-zero-set", _R, "impl.exact_zero == 1", "operands cancel exactly"),
    _item("exact-zero-clear", _R, "impl.exact_zero == 0", "nonzero sum"),
]

# Signals each signal is computed from directly.
DEPENDENCIES: Dict[str, FrozenSet[str]] = {
    name: frozenset(deps)
    for name, deps in {
        "expdiff": ("e1", "e2"),
        "big_is_f1": ("e1", "e2", "m1", "m2", "expdiff"),
        "bigman": ("big_is_f1", "e1", "e2", "m1", "m2"),
        "smallman": ("big_is_f1", "e1", "e2", "m1", "m2"),
        "sticky": ("smallman", "expdiff", "collapse"),
        "collapse": ("expdiff",),
        "algman": ("smallman", "expdiff", "sticky", "collapse"),
        "eff_sub": ("s1", "s2"),
        "addman": ("bigman", "algman", "eff_sub"),
        "carry_out": ("addman",),
        "norm_shift": ("addman", "carry_out"),
        "norm_deep": ("norm_shift",),
        "round_inc": ("addman", "norm_shift", "carry_out"),
        "exact_zero": ("addman",),
        "s": ("s1", "s2", "big_is_f1"),
        "e": ("e1", "e2", "big_is_f1", "norm_shift", "carry_out", "round_inc",
              "overflow", "underflow", "exact_zero"),
        "m": ("addman", "norm_shift", "carry_out", "round_inc", "overflow", "underflow", "exact_zero"),
        "overflow": ("e1", "e2", "norm_shift", "round_inc"),
        "underflow": ("e1", "e2", "norm_shift", "norm_deep"),
    }.items()
}


def catalog(fmt: Optional[FloatFormat] = None) -> List[CoverItem]:
    """The cover-item catalog; identical for every format."""
    return list(_CATALOG)


class ItemStatus(str, Enum):
    COVERED = "covered"
    UNREACHABLE = "unreachable"
    UNKNOWN = "unknown"


class ItemResult(BaseModel):
    id: str
    stage: Stage
    status: ItemStatus
    checked: bool


class CoverageReport(BaseModel):
    total: int
    covered: int
    unreachable: int
    unknown: int
    checked: int
    dead: int = 0
    formal_pct: float
    stimuli_pct: float
    checker_pct: float
    items: List[ItemResult] = Field(default_factory=list)


def coverage_ratios(
    total: int, covered: int, checked: int, covered_and_checked: int, dead: int = 0
) -> Dict[str, float]:
    """formal, stimuli and checker percentages rounded to two places."""
    def pct(part: int, whole: int) -> float:
        return round(100.0 * part / whole, 2) if whole else 0.0

    return {
        "formal_pct": pct(covered_and_checked, total),
        "stimuli_pct": pct(covered, total - dead),
        "checker_pct": pct(checked, total),
    }


def checked_signals(program_support: Iterable[str]) -> FrozenSet[str]:
    """Implementation signals named by assertions, plus their direct dependencies."""
    named = {name.split(".", 1)[1] for name in program_support if name.startswith("impl.")}
    expanded = set(named)
    for name in named:
        expanded |= DEPENDENCIES.get(name, frozenset())
    return frozenset(expanded)


def measure(
    fmt: FloatFormat,
    faults: FaultConfig = NO_FAULTS,
    program: Program = Program((), ()),
    check_mode: Optional[CheckMode] = None,
    drive_mode: DriveMode = DriveMode.LOCKSTEP,
    settings: Optional[CheckerSettings] = None,
    namespaces: Sequence[str] = NAMESPACES,
) -> CoverageReport:
    """Scan the admitted stimuli once, recording which cover items fire."""
    check_mode = check_mode or CheckMode.exhaustive()
    settings = settings or CheckerSettings()
    items = catalog(fmt)
    result, ev = scan(
        fmt, faults, program, check_mode, drive_mode, settings, namespaces,
        watches=[item.expr() for item in items],
    )

    support = set()
    for d in ev.directives:
        if d.role is Role.ASSERT:
            support |= d.support
    checked_names = checked_signals(support)

    results = []
    for item, hit in zip(items, result.hits):
        if hit:
            status = ItemStatus.COVERED
        else:
            status = ItemStatus.UNREACHABLE if check_mode.is_exhaustive else ItemStatus.UNKNOWN
        results.append(ItemResult(
            id=item.id, stage=item.stage, status=status, checked=bool(item.signals() & checked_names),
        ))

    covered = sum(r.status is ItemStatus.COVERED for r in results)
    checked = sum(r.checked for r in results)
    both = sum(r.checked and r.status is ItemStatus.COVERED for r in results)
    report = CoverageReport(
        total=len(results),
        covered=covered,
        unreachable=sum(r.status is ItemStatus.UNREACHABLE for r in results),
        unknown=sum(r.status is ItemStatus.UNKNOWN for r in results),
        checked=checked,
        items=results,
        **coverage_ratios(len(results), covered, checked, both),
    )
    logger.info(
        f"Coverage: {report.covered}/{report.total} covered, {report.checked} checked, "
        f"formal {report.formal_pct}%"
    )
    return report


def coverage_to_dict(report: CoverageReport) -> Dict[str, Any]:
    return {
        "total": report.total,
        "covered": report.covered,
        "unreachable": report.unreachable,
        "unknown": report.unknown,
        "checked": report.checked,
        "formal_pct": report.formal_pct,
        "stimuli_pct": report.stimuli_pct,
        "checker_pct": report.checker_pct,
        "items": [{"id": r.id, "stage": r.stage.value, "status": r.status.value} for r in report.items],
    }


def coverage_to_json(report: CoverageReport) -> str:
    return json.dumps(coverage_to_dict(report), indent=2) + "\n"
