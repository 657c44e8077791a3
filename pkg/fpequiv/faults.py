"""
Catalogued datapath faults for the implementation adder.

Each fault owns exactly one site in one stage of the implementation. A site is a
single value computed by the stage (a shift span, a select bit, a carry-in, ...);
when the fault is enabled the stage routes that value through ``mutate`` and uses
the result instead. With no fault enabled every hook is the identity.
"""
import logging
from enum import Enum
from typing import Any, Callable, Dict, FrozenSet, Iterable, List

from pydantic import BaseModel, ConfigDict, Field

from .exceptions import CheckConfigError, FaultSiteError

logger = logging.getLogger(__name__)


class Stage(str, Enum):
    ALIGNMENT = "alignment"
    ADD_ROUND = "add-round"
    UNATTRIBUTED = "unattributed"


class FaultKind(str, Enum):
    """Fault kinds; the value is the stable CLI identifier."""

    STICKY_DISTORT = "sticky-distort"
    EXT_MISALIGN = "ext-misalign"
    OP_SELECT = "op-select"
    INV_SWAP = "inv-swap"
    CARRY_MANIP = "carry-manip"
    NORM_SHIFT = "norm-shift"
    SHIFT_DISTORT = "shift-distort"
    ROUND_RULE = "round-rule"
    EQ_EXP_BUG = "eq-exp-bug"


class FaultSpec(BaseModel):
    """Catalog entry describing one fault kind."""

    model_config = ConfigDict(frozen=True)

    kind: FaultKind
    code: str = Field(..., description="Short catalog code (A1..A4, R1..R4, B1)")
    name: str
    stage: Stage
    description: str
    parameters: Dict[str, int] = Field(default_factory=dict)


CATALOG: Dict[FaultKind, FaultSpec] = {
    spec.kind: spec
    for spec in (
        FaultSpec(
            kind=FaultKind.STICKY_DISTORT, code="A1", name="StickyBitDistortion",
            stage=Stage.ALIGNMENT,
            description="Sticky OR spans the wrong number of shifted-out bits",
            parameters={"delta": 1},
        ),
        FaultSpec(
            kind=FaultKind.EXT_MISALIGN, code="A2", name="OperandExtensionMisalignment",
            stage=Stage.ALIGNMENT,
            description="Zero padding dropped while extending the smaller significand",
            parameters={"delta": 1},
        ),
        FaultSpec(
            kind=FaultKind.OP_SELECT, code="A3", name="FaultyOperandSelection",
            stage=Stage.ALIGNMENT,
            description="Reversed comparison selects the smaller operand as the larger",
        ),
        FaultSpec(
            kind=FaultKind.INV_SWAP, code="A4", name="InversionSwapInSubtraction",
            stage=Stage.ALIGNMENT,
            description="Two's-complement inversion routed to the larger operand on subtraction",
        ),
        FaultSpec(
            kind=FaultKind.CARRY_MANIP, code="R1", name="CarryInManipulation",
            stage=Stage.ADD_ROUND,
            description="Adder carry-in added when absent and removed when present",
        ),
        FaultSpec(
            kind=FaultKind.NORM_SHIFT, code="R2", name="NormalizationShiftError",
            stage=Stage.ADD_ROUND,
            description="Leading-one index off by delta with no exponent correction",
            parameters={"delta": 1},
        ),
        FaultSpec(
            kind=FaultKind.SHIFT_DISTORT, code="R3", name="ShiftDistortion",
            stage=Stage.ADD_ROUND,
            description="Carried extended sum shifted right by the wrong offset",
            parameters={"delta": 1},
        ),
        FaultSpec(
            kind=FaultKind.ROUND_RULE, code="R4", name="RoundingRuleViolation",
            stage=Stage.ADD_ROUND,
            description="Tie-break comparison flipped, ties round toward odd",
        ),
        FaultSpec(
            kind=FaultKind.EQ_EXP_BUG, code="B1", name="EqualExponentSelectionBug",
            stage=Stage.ALIGNMENT,
            description="Mantissa comparison skipped when exponents are equal",
        ),
    )
}


def list_faults() -> List[FaultSpec]:
    """All catalog entries in catalog order."""
    return list(CATALOG.values())


def fault_by_id(identifier: str) -> FaultKind:
    try:
        return FaultKind(identifier)
    except ValueError:
        known = ", ".join(kind.value for kind in FaultKind)
        raise CheckConfigError(f"unknown fault '{identifier}'; known faults: {known}") from None


def _shifted(value: int, delta: int, **_: Any) -> int:
    return max(0, value + delta)


def _trimmed(value: int, delta: int, **_: Any) -> int:
    return max(0, value - delta)


def _inverted(value: int, delta: int, **_: Any) -> int:
    return 1 - value


def _swapped_ports(value: Any, delta: int, eff_sub: int = 0, **_: Any) -> Any:
    return (value[1], value[0]) if eff_sub else value


def _carry_toggled(value: int, delta: int, **_: Any) -> int:
    return value ^ 1


def _tie_to_odd(
    value: int, delta: int, guard: int = 0, round_bit: int = 0, sticky: int = 0, lsb: int = 0, **_: Any
) -> int:
    return int(bool(guard and (round_bit or sticky or not lsb)))


def _compare_skipped(value: int, delta: int, exp_equal: int = 0, **_: Any) -> int:
    return 0 if exp_equal else value


_MUTATIONS: Dict[FaultKind, Callable[..., Any]] = {
    FaultKind.STICKY_DISTORT: _shifted,
    FaultKind.EXT_MISALIGN: _trimmed,
    FaultKind.OP_SELECT: _inverted,
    FaultKind.INV_SWAP: _swapped_ports,
    FaultKind.CARRY_MANIP: _carry_toggled,
    FaultKind.NORM_SHIFT: _shifted,
    FaultKind.SHIFT_DISTORT: _shifted,
    FaultKind.ROUND_RULE: _tie_to_odd,
    FaultKind.EQ_EXP_BUG: _compare_skipped,
}


def mutate(kind: FaultKind, stage: Stage, value: Any, delta: int = 1, **site: Any) -> Any:
    """Apply ``kind``'s mutation to the value computed at its site."""
    spec = CATALOG[kind]
    if spec.stage is not stage:
        raise FaultSiteError(
            f"fault {spec.code} ({kind.value}) belongs to the {spec.stage.value} stage, "
            f"not {stage.value}"
        )
    return _MUTATIONS[kind](value, delta, **site)


class FaultConfig(BaseModel):
    """Set of enabled faults with per-kind integer parameters."""

    model_config = ConfigDict(frozen=True)

    enabled: FrozenSet[FaultKind] = Field(default_factory=frozenset)
    parameters: Dict[FaultKind, Dict[str, int]] = Field(default_factory=dict)

    @classmethod
    def from_ids(cls, identifiers: Iterable[str]) -> "FaultConfig":
        return cls(enabled=frozenset(fault_by_id(i) for i in identifiers))

    def parameter(self, kind: FaultKind, name: str) -> int:
        override = self.parameters.get(kind, {})
        if name in override:
            return override[name]
        return CATALOG[kind].parameters.get(name, 1)

    def hook(self, kind: FaultKind, stage: Stage, value: Any, **site: Any) -> Any:
        """Site hook used by the implementation adder; identity unless ``kind`` is enabled."""
        if kind not in self.enabled:
            return value
        return mutate(kind, stage, value, self.parameter(kind, "delta"), **site)

    def ids(self) -> List[str]:
        """Enabled CLI identifiers in catalog order."""
        return [kind.value for kind in CATALOG if kind in self.enabled]


NO_FAULTS = FaultConfig()
