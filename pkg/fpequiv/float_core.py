"""
Bit-accurate floating-point formats and the golden reference adder.

A value is the triple (s, e, m) with numerical value (-1)^s * 2^(e - bias) * 1.m.
Only normalized operands are accepted (1 <= e <= 2^E - 2); the reference adder
implements the alignment and add-round computations in their direct form and
rounds to nearest, ties to even.

Edge policy shared by every model in the package:
  * exponent overflow after rounding saturates to the largest finite value and
    raises the overflow flag;
  * exponent underflow after rounding flushes to a zero carrying the sign of the
    larger-magnitude operand and raises the underflow flag;
  * exact cancellation produces +0 and raises the exact_zero flag.
"""
import logging
from fractions import Fraction
from typing import List, NamedTuple, Tuple

from pydantic import BaseModel, ConfigDict, Field

from .exceptions import DomainError, FormatError

logger = logging.getLogger(__name__)

# Guard, round and sticky positions appended below the significand.
GRS_BITS = 3


class FloatFormat(BaseModel):
    """Field widths of a binary floating-point format; the bias is always derived."""

    model_config = ConfigDict(frozen=True)

    exp_bits: int = Field(..., ge=2, description="Exponent field width in bits")
    man_bits: int = Field(..., ge=1, description="Stored mantissa width in bits")

    @property
    def bias(self) -> int:
        return (1 << (self.exp_bits - 1)) - 1

    @property
    def width(self) -> int:
        return 1 + self.exp_bits + self.man_bits

    @property
    def min_exp(self) -> int:
        return 1

    @property
    def max_exp(self) -> int:
        return (1 << self.exp_bits) - 2

    @property
    def exp_mask(self) -> int:
        return (1 << self.exp_bits) - 1

    @property
    def man_mask(self) -> int:
        return (1 << self.man_bits) - 1

    @property
    def normalized_count(self) -> int:
        """Number of normalized words of this format."""
        return 2 * (self.max_exp - self.min_exp + 1) << self.man_bits

    @classmethod
    def parse(cls, text: str) -> "FloatFormat":
        """Parse the CLI spelling ``"E,M"``."""
        try:
            exp_text, man_text = text.split(",")
            return cls(exp_bits=int(exp_text), man_bits=int(man_text))
        except ValueError as e:
            raise FormatError(
                f"invalid format '{text}': expected 'E,M' with E >= 2 and M >= 1"
            ) from e

    def __str__(self) -> str:
        return f"({self.exp_bits},{self.man_bits})"


DESK = FloatFormat(exp_bits=4, man_bits=3)
HALF_WIDE = FloatFormat(exp_bits=5, man_bits=10)
SINGLE = FloatFormat(exp_bits=8, man_bits=23)


class FloatTriple(NamedTuple):
    """Sign, biased exponent and stored mantissa of one operand."""

    s: int
    e: int
    m: int

    def negate(self) -> "FloatTriple":
        return FloatTriple(self.s ^ 1, self.e, self.m)


class ExactValue(NamedTuple):
    """Exact rational value; ``sign`` also records the sign of a zero."""

    value: Fraction
    sign: int


class AddFlags(NamedTuple):
    overflow: int = 0
    underflow: int = 0
    exact_zero: int = 0


class ReferenceAlignment(NamedTuple):
    expdiff: int
    bigman: int
    smallman: int
    algman: int
    sticky: int
    big_is_f1: int
    eff_sub: int
    collapse: int


class ReferenceAddRound(NamedTuple):
    addman: int
    norm_shift: int
    carry_out: int
    norm_deep: int
    round_inc: int
    s: int
    e: int
    m: int
    overflow: int
    underflow: int
    exact_zero: int


def _check_fields(f: FloatTriple, fmt: FloatFormat) -> None:
    if not (0 <= f.s <= 1 and 0 <= f.e <= fmt.exp_mask and 0 <= f.m <= fmt.man_mask):
        raise FormatError(f"triple {tuple(f)} does not fit format {fmt}")


def pack(f: FloatTriple, fmt: FloatFormat) -> int:
    """Concatenate [s | e | m], most significant first."""
    _check_fields(f, fmt)
    return (f.s << (fmt.exp_bits + fmt.man_bits)) | (f.e << fmt.man_bits) | f.m


def unpack(word: int, fmt: FloatFormat) -> FloatTriple:
    if not 0 <= word < (1 << fmt.width):
        raise FormatError(f"word {word:#x} is not a {fmt.width}-bit value for format {fmt}")
    return FloatTriple(
        word >> (fmt.exp_bits + fmt.man_bits),
        (word >> fmt.man_bits) & fmt.exp_mask,
        word & fmt.man_mask,
    )


def is_normalized(f: FloatTriple, fmt: FloatFormat) -> bool:
    return (
        0 <= f.s <= 1
        and fmt.min_exp <= f.e <= fmt.max_exp
        and 0 <= f.m <= fmt.man_mask
    )


def require_normalized(f: FloatTriple, fmt: FloatFormat) -> None:
    if not is_normalized(f, fmt):
        raise DomainError(
            f"operand {tuple(f)} is not a normalized finite value of format {fmt}"
        )


def significand(f: FloatTriple, fmt: FloatFormat) -> int:
    """1.m as an integer of man_bits+1 bits."""
    return (1 << fmt.man_bits) | f.m


def normalized_words(fmt: FloatFormat) -> List[int]:
    """All normalized words in ascending numeric order."""
    words = []
    for s in (0, 1):
        for e in range(fmt.min_exp, fmt.max_exp + 1):
            base = (s << (fmt.exp_bits + fmt.man_bits)) | (e << fmt.man_bits)
            words.extend(range(base, base + (1 << fmt.man_bits)))
    return words


def value_of(f: FloatTriple, fmt: FloatFormat) -> ExactValue:
    require_normalized(f, fmt)
    magnitude = Fraction(significand(f, fmt), 1 << fmt.man_bits) * Fraction(2) ** (
        f.e - fmt.bias
    )
    return ExactValue(-magnitude if f.s else magnitude, f.s)


def round_rne(sig: int, guard: int, round_bit: int, sticky: int) -> Tuple[int, int]:
    """
    Round a normalized significand to nearest, ties to even.

    Returns the rounded significand and the carry-out; on carry-out the result is
    renormalized so it keeps the width of ``sig``.
    """
    width = sig.bit_length()
    if guard and (round_bit or sticky or sig & 1):
        sig += 1
    if sig.bit_length() > width:
        return sig >> 1, 1
    return sig, 0


def apply_edge_policy(
    sign: int, exponent: int, mantissa: int, fmt: FloatFormat
) -> Tuple[int, int, int, int, int]:
    """Map a rounded (sign, unbounded exponent, mantissa) onto the format: (s, e, m, ovf, unf)."""
    if exponent > fmt.max_exp:
        return sign, fmt.max_exp, fmt.man_mask, 1, 0
    if exponent < fmt.min_exp:
        return sign, 0, 0, 0, 1
    return sign, exponent, mantissa, 0, 0


def reference_alignment(f1: FloatTriple, f2: FloatTriple, fmt: FloatFormat) -> ReferenceAlignment:
    """Exponent difference, operand selection and alignment of the smaller significand."""
    require_normalized(f1, fmt)
    require_normalized(f2, fmt)

    big_is_f1 = int((f1.e, f1.m) >= (f2.e, f2.m))
    big, small = (f1, f2) if big_is_f1 else (f2, f1)
    expdiff = abs(f1.e - f2.e)

    small_sig = significand(small, fmt)
    window = small_sig << 2
    collapse = int(expdiff >= fmt.man_bits + 3)
    if collapse:
        aligned, sticky = 0, int(small_sig != 0)
    else:
        aligned = window >> expdiff
        sticky = int(window & ((1 << expdiff) - 1) != 0)

    return ReferenceAlignment(
        expdiff=expdiff,
        bigman=significand(big, fmt) << GRS_BITS,
        smallman=small_sig << GRS_BITS,
        algman=(aligned << 1) | sticky,
        sticky=sticky,
        big_is_f1=big_is_f1,
        eff_sub=f1.s ^ f2.s,
        collapse=collapse,
    )


def reference_addround(
    al: ReferenceAlignment, sign_big: int, e_big: int, fmt: FloatFormat
) -> ReferenceAddRound:
    """Add the aligned significands, normalize, round and apply the edge policy."""
    top = fmt.man_bits + GRS_BITS
    addman = al.bigman - al.algman if al.eff_sub else al.bigman + al.algman
    if addman < 0:
        raise DomainError("aligned operand exceeds the larger operand")
    if addman == 0:
        return ReferenceAddRound(
            addman=0, norm_shift=0, carry_out=0, norm_deep=0, round_inc=0,
            s=0, e=0, m=0, overflow=0, underflow=0, exact_zero=1,
        )

    lead = addman.bit_length() - 1
    norm_shift = top - lead
    low = lead - fmt.man_bits
    if low > 0:
        sig = addman >> low
        rest = addman & ((1 << low) - 1)
        guard = (rest >> (low - 1)) & 1
        round_bit = (rest >> (low - 2)) & 1 if low >= 2 else 0
        sticky = int(rest & ((1 << (low - 2)) - 1) != 0) if low >= 3 else 0
    else:
        sig = addman << -low
        guard = round_bit = sticky = 0

    round_inc = int(bool(guard and (round_bit or sticky or sig & 1)))
    sig, carry = round_rne(sig, guard, round_bit, sticky)
    s, e, m, overflow, underflow = apply_edge_policy(
        sign_big, e_big - norm_shift + carry, sig & fmt.man_mask, fmt
    )
    return ReferenceAddRound(
        addman=addman,
        norm_shift=norm_shift,
        carry_out=(addman >> (top + 1)) & 1,
        norm_deep=int(norm_shift >= 2),
        round_inc=round_inc,
        s=s, e=e, m=m,
        overflow=overflow,
        underflow=underflow,
        exact_zero=0,
    )


def reference_datapath(
    f1: FloatTriple, f2: FloatTriple, fmt: FloatFormat
) -> Tuple[ReferenceAlignment, ReferenceAddRound]:
    al = reference_alignment(f1, f2, fmt)
    big = f1 if al.big_is_f1 else f2
    return al, reference_addround(al, big.s, big.e, fmt)


def ref_add(f1: FloatTriple, f2: FloatTriple, fmt: FloatFormat) -> Tuple[FloatTriple, AddFlags]:
    """Golden reference sum of two normalized operands."""
    _, ar = reference_datapath(f1, f2, fmt)
    return FloatTriple(ar.s, ar.e, ar.m), AddFlags(ar.overflow, ar.underflow, ar.exact_zero)
