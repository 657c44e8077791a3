"""
Exact oracle for the reference adder.

The oracle never looks at alignment or guard bits: it adds the exact values as
unbounded integers scaled to the smaller operand exponent, rounds the exact sum
to nearest-even at man_bits+1 significant bits and then applies the shared edge
policy. Sweeps compare any reference callable against it, either over every word
pair of a small format or over seeded random samples.
"""
import logging
import time
from typing import Callable, List, Optional, Tuple, Union

import numpy as np
from pydantic import BaseModel, Field

from .exceptions import DomainError
from .float_core import (
    AddFlags,
    FloatFormat,
    FloatTriple,
    apply_edge_policy,
    is_normalized,
    ref_add,
    require_normalized,
    significand,
    unpack,
)

logger = logging.getLogger(__name__)

ReferenceAdder = Callable[[FloatTriple, FloatTriple, FloatFormat], Tuple[FloatTriple, AddFlags]]


class OracleMismatch(BaseModel):
    f1: Tuple[int, int, int]
    f2: Tuple[int, int, int]
    expected: Optional[Tuple[int, int, int]] = Field(None, description="Oracle result; None if rejected")
    actual: Optional[Tuple[int, int, int]] = Field(None, description="Reference result; None if it raised")


class OracleReport(BaseModel):
    """Outcome of comparing a reference adder with the exact oracle."""

    format: Tuple[int, int]
    exhaustive: bool
    seed: Optional[int] = None
    pairs_checked: int = Field(0, description="Normalized pairs compared")
    rejected: int = Field(0, description="Pairs with a non-normalized operand, correctly rejected")
    mismatches: int = 0
    first_mismatch: Optional[OracleMismatch] = None
    elapsed_seconds: float = 0.0

    @property
    def passed(self) -> bool:
        return self.mismatches == 0


def _signed_significands(f1: FloatTriple, f2: FloatTriple, fmt: FloatFormat) -> Tuple[int, int]:
    """Exact signed sum in units of 2^(low - bias - man_bits), and the smaller biased exponent ``low``."""
    require_normalized(f1, fmt)
    require_normalized(f2, fmt)
    low = min(f1.e, f2.e)
    n1 = significand(f1, fmt) << (f1.e - low)
    n2 = significand(f2, fmt) << (f2.e - low)
    return (-n1 if f1.s else n1) + (-n2 if f2.s else n2), low


def oracle_add(f1: FloatTriple, f2: FloatTriple, fmt: FloatFormat) -> Tuple[FloatTriple, AddFlags]:
    """Round-to-nearest-even of the exact sum, followed by the edge policy."""
    total, low = _signed_significands(f1, f2, fmt)
    if total == 0:
        return FloatTriple(0, 0, 0), AddFlags(exact_zero=1)

    sign = int(total < 0)
    magnitude = abs(total)
    # magnitude * 2^(low - bias - man_bits) is the exact sum
    top = magnitude.bit_length() - 1
    shift = top - fmt.man_bits
    if shift > 0:
        q = magnitude >> shift
        rest = magnitude & ((1 << shift) - 1)
        half = 1 << (shift - 1)
        if rest > half or (rest == half and q & 1):
            q += 1
    else:
        q = magnitude << -shift
    if q == 1 << (fmt.man_bits + 1):
        q >>= 1
        top += 1

    exponent = top + low - fmt.man_bits
    s, e, m, overflow, underflow = apply_edge_policy(sign, exponent, q & fmt.man_mask, fmt)
    return FloatTriple(s, e, m), AddFlags(overflow, underflow, 0)


def _compare(
    report: OracleReport,
    f1: FloatTriple,
    f2: FloatTriple,
    fmt: FloatFormat,
    reference: ReferenceAdder,
) -> None:
    if not (is_normalized(f1, fmt) and is_normalized(f2, fmt)):
        try:
            actual, _ = reference(f1, f2, fmt)
        except DomainError:
            report.rejected += 1
            return
        _record(report, f1, f2, None, actual)
        return

    expected = oracle_add(f1, f2, fmt)
    report.pairs_checked += 1
    try:
        actual_result = reference(f1, f2, fmt)
    except DomainError:
        _record(report, f1, f2, expected[0], None)
        return
    if actual_result != expected:
        _record(report, f1, f2, expected[0], actual_result[0])


def _record(
    report: OracleReport,
    f1: FloatTriple,
    f2: FloatTriple,
    expected: Optional[FloatTriple],
    actual: Optional[FloatTriple],
) -> None:
    report.mismatches += 1
    if report.first_mismatch is None:
        report.first_mismatch = OracleMismatch(
            f1=tuple(f1),
            f2=tuple(f2),
            expected=tuple(expected) if expected is not None else None,
            actual=tuple(actual) if actual is not None else None,
        )
        logger.debug(f"First oracle mismatch: {report.first_mismatch}")


def sample_operands(
    fmt: FloatFormat, count: int, seed: Union[int, np.random.SeedSequence]
) -> List[Tuple[FloatTriple, FloatTriple]]:
    """Seeded normalized operand pairs, reproducible for equal (fmt, count, seed)."""
    rng = np.random.default_rng(seed)
    fields = [
        rng.integers(0, 2, size=count),
        rng.integers(fmt.min_exp, fmt.max_exp + 1, size=count),
        rng.integers(0, 1 << fmt.man_bits, size=count),
        rng.integers(0, 2, size=count),
        rng.integers(fmt.min_exp, fmt.max_exp + 1, size=count),
        rng.integers(0, 1 << fmt.man_bits, size=count),
    ]
    s1, e1, m1, s2, e2, m2 = (column.tolist() for column in fields)
    return [
        (FloatTriple(s1[i], e1[i], m1[i]), FloatTriple(s2[i], e2[i], m2[i]))
        for i in range(count)
    ]


def sweep(
    fmt: FloatFormat,
    exhaustive: bool = True,
    samples: int = 1_000_000,
    seed: int = 0,
    reference: ReferenceAdder = ref_add,
) -> OracleReport:
    """Compare ``reference`` against the exact oracle."""
    start = time.time()
    report = OracleReport(
        format=(fmt.exp_bits, fmt.man_bits),
        exhaustive=exhaustive,
        seed=None if exhaustive else seed,
    )
    if exhaustive:
        words = range(1 << fmt.width)
        logger.info(f"Oracle sweep over all {len(words) ** 2} word pairs of format {fmt}")
        operands = [unpack(w, fmt) for w in words]
        for f1 in operands:
            for f2 in operands:
                _compare(report, f1, f2, fmt, reference)
    else:
        logger.info(f"Oracle sweep over {samples} sampled pairs of format {fmt} (seed {seed})")
        for f1, f2 in sample_operands(fmt, samples, seed):
            _compare(report, f1, f2, fmt, reference)

    report.elapsed_seconds = round(time.time() - start, 3)
    logger.info(
        f"Oracle sweep finished: {report.pairs_checked} compared, "
        f"{report.rejected} rejected, {report.mismatches} mismatches"
    )
    return report
