"""
Implementation adder under verification.

A hardware-style rendition of the two-stage datapath: a mantissa alignment stage
and an add-round stage. It computes the same function as the reference adder in
``float_core`` but with a different structure:

  * exponents are compared by an (E+1)-bit two's-complement subtraction,
  * the sticky bit comes from a mask over the extended small significand,
  * sticky collapse is an explicit branch,
  * subtraction is one's complement plus carry-in on an (M+5)-bit adder,
  * normalization uses a separate leading-zero counter,
  * the rounding increment is chosen from precomputed carry-select candidates.

Every catalogued fault site is routed through ``FaultConfig.hook``. Evaluations
publish every dictionary signal into a ``SignalTrace`` under the ``impl``
namespace; ``eval_spec`` publishes the reference model under ``spec``.
"""
import logging
from functools import lru_cache
from typing import Dict, Iterator, Mapping, NamedTuple, Optional, Tuple

from .exceptions import EvaluationError, FormatError
from .faults import NO_FAULTS, FaultConfig, FaultKind, Stage
from .float_core import (
    GRS_BITS,
    FloatFormat,
    FloatTriple,
    reference_datapath,
    require_normalized,
    significand,
)

logger = logging.getLogger(__name__)

DICTIONARY_VERSION = 2

INPUT_SIGNALS = ("s1", "e1", "m1", "s2", "e2", "m2")
ALIGNMENT_SIGNALS = (
    "expdiff", "bigman", "smallman", "algman", "sticky", "big_is_f1", "eff_sub", "collapse",
)
ADD_ROUND_SIGNALS = (
    "addman", "norm_shift", "s", "e", "m", "overflow", "underflow",
    "carry_out", "norm_deep", "round_inc", "exact_zero",
)

# Publication order: the original eighteen names, then the version 2 decision bits.
SIGNAL_DICTIONARY: Tuple[str, ...] = (
    "s1", "e1", "m1", "s2", "e2", "m2",
    "expdiff", "bigman", "smallman", "algman", "sticky",
    "addman", "norm_shift", "s", "e", "m", "overflow", "underflow",
    "big_is_f1", "eff_sub", "collapse", "carry_out", "norm_deep", "round_inc", "exact_zero",
)

NAMESPACES = ("impl", "spec")

STAGE_OF_SIGNAL: Dict[str, str] = {
    **{name: "inputs" for name in INPUT_SIGNALS},
    **{name: Stage.ALIGNMENT.value for name in ALIGNMENT_SIGNALS},
    **{name: Stage.ADD_ROUND.value for name in ADD_ROUND_SIGNALS},
}


class AlignmentSignals(NamedTuple):
    expdiff: int
    bigman: int
    smallman: int
    algman: int
    sticky: int
    big_is_f1: int
    eff_sub: int
    collapse: int


class AddRoundContext(NamedTuple):
    """Operand signs and the exponent of the operand selected as larger."""

    s1: int
    s2: int
    e_big: int


class AddRoundSignals(NamedTuple):
    addman: int
    norm_shift: int
    s: int
    e: int
    m: int
    overflow: int
    underflow: int
    carry_out: int
    norm_deep: int
    round_inc: int
    exact_zero: int


def norm_shift_bits(fmt: FloatFormat) -> int:
    return (fmt.man_bits + GRS_BITS).bit_length() + 1


@lru_cache(maxsize=None)
def signal_widths(fmt: FloatFormat) -> Dict[str, int]:
    """Declared width of every dictionary name (unqualified) for ``fmt``."""
    E, M = fmt.exp_bits, fmt.man_bits
    ext = M + 1 + GRS_BITS
    widths = {name: 1 for name in SIGNAL_DICTIONARY}
    widths.update(
        e1=E, e2=E, e=E, expdiff=E,
        m1=M, m2=M, m=M,
        bigman=ext, smallman=ext, algman=ext,
        addman=ext + 1,
        norm_shift=norm_shift_bits(fmt),
    )
    return widths


@lru_cache(maxsize=None)
def qualified_names(namespace: str) -> Tuple[str, ...]:
    return tuple(f"{namespace}.{name}" for name in SIGNAL_DICTIONARY)


@lru_cache(maxsize=None)
def qualified_widths(fmt: FloatFormat, namespaces: Tuple[str, ...] = NAMESPACES) -> Dict[str, int]:
    widths = signal_widths(fmt)
    return {
        f"{namespace}.{name}": widths[name]
        for namespace in namespaces
        for name in SIGNAL_DICTIONARY
    }


class SignalTrace(Mapping[str, int]):
    """
    Qualified signal name -> unsigned bit-vector value with a declared width.

    Signed signals (norm_shift) are stored in two's complement; use ``signed``
    to read them back as integers.
    """

    __slots__ = ("_values", "_widths")

    def __init__(self, values: Dict[str, int], widths: Mapping[str, int]):
        self._values = values
        self._widths = widths

    def __getitem__(self, name: str) -> int:
        try:
            return self._values[name]
        except KeyError:
            raise EvaluationError(f"signal '{name}' is not present in this trace") from None

    def __contains__(self, name: object) -> bool:
        return name in self._values

    def get(self, name: str, default: Optional[int] = None) -> Optional[int]:
        return self._values.get(name, default)

    def __iter__(self) -> Iterator[str]:
        return iter(self._values)

    def __len__(self) -> int:
        return len(self._values)

    def __repr__(self) -> str:
        return f"SignalTrace({self.to_hex()})"

    @property
    def raw(self) -> Dict[str, int]:
        """Raw name -> value dictionary (read-only by convention)."""
        return self._values

    def width(self, name: str) -> int:
        return self._widths[name]

    def hex(self, name: str) -> str:
        digits = max(1, -(-self._widths[name] // 4))
        return f"{self[name]:0{digits}x}"

    def signed(self, name: str) -> int:
        value, width = self[name], self._widths[name]
        return value - (1 << width) if value >> (width - 1) else value

    def merge(self, other: "SignalTrace") -> "SignalTrace":
        overlap = self._values.keys() & other._values.keys()
        if overlap:
            raise EvaluationError(f"traces overlap on {sorted(overlap)}")
        return SignalTrace({**self._values, **other._values}, {**self._widths, **other._widths})

    def to_hex(self) -> Dict[str, str]:
        return {name: self.hex(name) for name in self._values}


def signal_values(
    fmt: FloatFormat,
    f1: FloatTriple,
    f2: FloatTriple,
    alignment: NamedTuple,
    add_round: NamedTuple,
) -> Tuple[int, ...]:
    """Dictionary values in publication order, from stage outputs of either model."""
    a, r = alignment, add_round
    return (
        f1.s, f1.e, f1.m, f2.s, f2.e, f2.m,
        a.expdiff, a.bigman, a.smallman, a.algman, a.sticky,  # type: ignore[attr-defined]
        r.addman, r.norm_shift & ((1 << norm_shift_bits(fmt)) - 1),  # type: ignore[attr-defined]
        r.s, r.e, r.m, r.overflow, r.underflow,  # type: ignore[attr-defined]
        a.big_is_f1, a.eff_sub, a.collapse,  # type: ignore[attr-defined]
        r.carry_out, r.norm_deep, r.round_inc, r.exact_zero,  # type: ignore[attr-defined]
    )


def publish(namespace: str, fmt: FloatFormat, values: Tuple[int, ...]) -> SignalTrace:
    return SignalTrace(
        dict(zip(qualified_names(namespace), values)),
        qualified_widths(fmt, (namespace,)),
    )


def eval_alignment(
    f1: FloatTriple, f2: FloatTriple, fmt: FloatFormat, faults: FaultConfig = NO_FAULTS
) -> AlignmentSignals:
    """Exponent difference, larger-operand select, extension and alignment."""
    require_normalized(f1, fmt)
    require_normalized(f2, fmt)
    E, M = fmt.exp_bits, fmt.man_bits
    stage = Stage.ALIGNMENT

    # (E+1)-bit subtract; the top bit is the borrow.
    diff = (f1.e - f2.e) & ((1 << (E + 1)) - 1)
    e2_larger = diff >> E
    expdiff = ((~diff + 1) & fmt.exp_mask) if e2_larger else diff
    exp_equal = int(expdiff == 0)

    m2_larger = faults.hook(FaultKind.EQ_EXP_BUG, stage, int(f2.m > f1.m), exp_equal=exp_equal)
    big_is_f1 = int(not (e2_larger or (exp_equal and m2_larger)))
    big_is_f1 = faults.hook(FaultKind.OP_SELECT, stage, big_is_f1)
    big, small = (f1, f2) if big_is_f1 else (f2, f1)

    ext_mask = (1 << (M + 1 + GRS_BITS)) - 1
    pad = faults.hook(FaultKind.EXT_MISALIGN, stage, GRS_BITS)
    bigman = significand(big, fmt) << GRS_BITS
    smallman = (significand(small, fmt) << pad) & ext_mask

    if expdiff >= M + GRS_BITS:
        collapse = 1
        sticky = int(smallman != 0)
        aligned = sticky
    else:
        collapse = 0
        span = faults.hook(FaultKind.STICKY_DISTORT, stage, expdiff + 1)
        sticky = int(smallman & ((1 << span) - 1) != 0)
        aligned = ((smallman >> expdiff) & ~1) | sticky

    eff_sub = f1.s ^ f2.s
    port_a, port_b = faults.hook(FaultKind.INV_SWAP, stage, (bigman, aligned), eff_sub=eff_sub)
    return AlignmentSignals(
        expdiff=expdiff,
        bigman=port_a,
        smallman=smallman,
        algman=port_b,
        sticky=sticky,
        big_is_f1=big_is_f1,
        eff_sub=eff_sub,
        collapse=collapse,
    )


def _leading_zeros(value: int, width: int) -> int:
    for position in range(width - 1, -1, -1):
        if (value >> position) & 1:
            return width - 1 - position
    return width


def _check_stage_inputs(a: AlignmentSignals, ctx: AddRoundContext, fmt: FloatFormat) -> None:
    widths = signal_widths(fmt)
    for name, value in a._asdict().items():
        if not 0 <= value < (1 << widths[name]):
            raise FormatError(f"alignment signal {name}={value} exceeds {widths[name]} bits")
    if not (ctx.s1 in (0, 1) and ctx.s2 in (0, 1) and 0 <= ctx.e_big <= fmt.exp_mask):
        raise FormatError(f"add-round context {tuple(ctx)} does not fit format {fmt}")


def eval_addround(
    a: AlignmentSignals, ctx: AddRoundContext, fmt: FloatFormat, faults: FaultConfig = NO_FAULTS
) -> AddRoundSignals:
    """
    Add the aligned significands, normalize, round and apply the edge policy.

    ``a`` may be synthetic (free-mode checking); only its widths are validated.
    """
    _check_stage_inputs(a, ctx, fmt)
    M = fmt.man_bits
    top = M + GRS_BITS
    adder_mask = (1 << (top + 2)) - 1
    window = (1 << (top + 1)) - 1
    stage = Stage.ADD_ROUND

    carry_in = faults.hook(FaultKind.CARRY_MANIP, stage, a.eff_sub)
    operand = (~a.algman & adder_mask) if a.eff_sub else a.algman
    addman = (a.bigman + operand + carry_in) & adder_mask
    carry_out = (addman >> (top + 1)) & 1

    if addman == 0:
        return AddRoundSignals(
            addman=0, norm_shift=0, s=0, e=0, m=0, overflow=0, underflow=0,
            carry_out=0, norm_deep=0, round_inc=0, exact_zero=1,
        )

    if carry_out:
        norm_shift = -1
        rshift = faults.hook(FaultKind.SHIFT_DISTORT, stage, 1)
        lost = int(addman & ((1 << rshift) - 1) != 0)
        ext = (addman >> rshift) & window
    else:
        norm_shift = _leading_zeros(addman, top + 1)
        lshift = faults.hook(FaultKind.NORM_SHIFT, stage, norm_shift)
        lost = 0
        ext = (addman << lshift) & window

    sig = ext >> GRS_BITS
    guard = (ext >> 2) & 1
    round_bit = (ext >> 1) & 1
    sticky = (ext & 1) | lost
    lsb = sig & 1
    round_inc = faults.hook(
        FaultKind.ROUND_RULE, stage,
        int(bool(guard and (round_bit or sticky or lsb))),
        guard=guard, round_bit=round_bit, sticky=sticky, lsb=lsb,
    )

    # Carry-select: both candidates exist, the increment decision picks one.
    rounded = (sig, sig + 1)[round_inc]
    round_carry = rounded >> (M + 1)
    mantissa = (rounded >> round_carry) & fmt.man_mask
    exponent = ctx.e_big - norm_shift + round_carry

    overflow = int(exponent > fmt.max_exp)
    underflow = int(exponent < fmt.min_exp)
    if overflow:
        exponent, mantissa = fmt.max_exp, fmt.man_mask
    elif underflow:
        exponent, mantissa = 0, 0

    return AddRoundSignals(
        addman=addman,
        norm_shift=norm_shift,
        s=ctx.s1 if a.big_is_f1 else ctx.s2,
        e=exponent,
        m=mantissa,
        overflow=overflow,
        underflow=underflow,
        carry_out=carry_out,
        norm_deep=int(norm_shift >= 2),
        round_inc=round_inc,
        exact_zero=0,
    )


def eval_stages(
    f1: FloatTriple, f2: FloatTriple, fmt: FloatFormat, faults: FaultConfig = NO_FAULTS
) -> Tuple[AlignmentSignals, AddRoundSignals]:
    a = eval_alignment(f1, f2, fmt, faults)
    ctx = AddRoundContext(f1.s, f2.s, f1.e if a.big_is_f1 else f2.e)
    return a, eval_addround(a, ctx, fmt, faults)


def impl_values(
    f1: FloatTriple, f2: FloatTriple, fmt: FloatFormat, faults: FaultConfig = NO_FAULTS
) -> Tuple[int, ...]:
    a, r = eval_stages(f1, f2, fmt, faults)
    return signal_values(fmt, f1, f2, a, r)


def spec_values(f1: FloatTriple, f2: FloatTriple, fmt: FloatFormat) -> Tuple[int, ...]:
    a, r = reference_datapath(f1, f2, fmt)
    return signal_values(fmt, f1, f2, a, r)


def eval(  # noqa: A001
    f1: FloatTriple, f2: FloatTriple, fmt: FloatFormat, faults: FaultConfig = NO_FAULTS
) -> SignalTrace:
    """Run both implementation stages and publish the ``impl`` trace."""
    return publish("impl", fmt, impl_values(f1, f2, fmt, faults))


def eval_spec(f1: FloatTriple, f2: FloatTriple, fmt: FloatFormat) -> SignalTrace:
    """Reference model trace under the ``spec`` namespace; never fault-injected."""
    return publish("spec", fmt, spec_values(f1, f2, fmt))
