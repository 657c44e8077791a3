"""
Tests for float formats, packing and the reference adder.
"""
import unittest
from fractions import Fraction

from pydantic import ValidationError

from fpequiv.exceptions import DomainError, FormatError
from fpequiv.float_core import (
    DESK,
    SINGLE,
    AddFlags,
    FloatFormat,
    FloatTriple,
    normalized_words,
    pack,
    ref_add,
    round_rne,
    unpack,
    value_of,
)


def _t(s, e, m):
    return FloatTriple(s, e, m)


ONE = _t(0, 0b0111, 0)
TWO = _t(0, 0b1000, 0)


class TestFloatFormat(unittest.TestCase):
    """Test derived format properties."""

    def test_desk_format(self):
        self.assertEqual(DESK.bias, 7)
        self.assertEqual(DESK.width, 8)
        self.assertEqual(DESK.max_exp, 14)
        self.assertEqual(DESK.normalized_count, 224)

    def test_single_bias(self):
        self.assertEqual(SINGLE.bias, 127)
        self.assertEqual(SINGLE.width, 32)

    def test_parse(self):
        self.assertEqual(FloatFormat.parse("5,10"), FloatFormat(exp_bits=5, man_bits=10))
        self.assertEqual(str(FloatFormat.parse("4,3")), "(4,3)")

    def test_parse_rejects_bad_text(self):
        for text in ("4", "4,3,2", "a,b", "1,3", "4,0"):
            with self.assertRaises(FormatError):
                FloatFormat.parse(text)

    def test_minimum_widths(self):
        with self.assertRaises(ValidationError):
            FloatFormat(exp_bits=1, man_bits=3)


class TestPacking(unittest.TestCase):
    """Test pack/unpack layout."""

    def test_pack_examples(self):
        self.assertEqual(pack(_t(0, 0b0111, 0), DESK), 0x38)
        self.assertEqual(pack(_t(1, 0b0001, 0b111), DESK), 0x8F)
        self.assertEqual(pack(_t(0, 0b01111111, 0), SINGLE), 0x3F800000)

    def test_unpack_examples(self):
        self.assertEqual(unpack(0x38, DESK), (0, 0b0111, 0))
        self.assertEqual(unpack(0x00, DESK), (0, 0, 0))
        self.assertEqual(unpack(0xFF, DESK), (1, 0b1111, 0b111))

    def test_round_trip_all_words(self):
        for word in range(1 << DESK.width):
            self.assertEqual(pack(unpack(word, DESK), DESK), word)

    def test_width_errors(self):
        with self.assertRaises(FormatError):
            pack(_t(0, 16, 0), DESK)
        with self.assertRaises(FormatError):
            unpack(0x100, DESK)

    def test_normalized_words_are_sorted(self):
        words = normalized_words(DESK)
        self.assertEqual(len(words), DESK.normalized_count)
        self.assertEqual(words, sorted(words))


class TestValueOf(unittest.TestCase):
    """Test exact values of normalized triples."""

    def test_examples(self):
        self.assertEqual(value_of(ONE, DESK).value, 1)
        self.assertEqual(value_of(_t(0, 0b1000, 0b100), DESK).value, 3)
        self.assertEqual(value_of(_t(1, 0b0110, 0b010), DESK).value, Fraction(-5, 8))

    def test_rejects_reserved_exponents(self):
        for e in (0, 15):
            with self.assertRaises(DomainError):
                value_of(_t(0, e, 0), DESK)


class TestRoundRne(unittest.TestCase):
    """Test round-to-nearest-even on explicit GRS bits."""

    def test_tie_even_stays(self):
        self.assertEqual(round_rne(0b1000, 1, 0, 0), (0b1000, 0))

    def test_tie_odd_rounds_up(self):
        self.assertEqual(round_rne(0b1001, 1, 0, 0), (0b1010, 0))

    def test_carry_out(self):
        self.assertEqual(round_rne(0b1111, 1, 1, 0), (0b1000, 1))

    def test_below_half_truncates(self):
        self.assertEqual(round_rne(0b1011, 0, 1, 1), (0b1011, 0))

    def test_result_keeps_width(self):
        for sig in range(0b1000, 0b10000):
            for grs in range(8):
                rounded, _ = round_rne(sig, grs >> 2, (grs >> 1) & 1, grs & 1)
                self.assertEqual(rounded.bit_length(), 4)


class TestRefAdd(unittest.TestCase):
    """Test the golden reference adder."""

    def test_one_plus_one(self):
        self.assertEqual(ref_add(ONE, ONE, DESK), (TWO, AddFlags()))

    def test_tie_rounds_to_even(self):
        sixteenth = _t(0, 0b0011, 0)
        self.assertEqual(ref_add(ONE, sixteenth, DESK)[0], ONE)

    def test_exact_cancellation_is_positive_zero(self):
        a = _t(0, 0b0111, 0b100)
        result, flags = ref_add(a, a.negate(), DESK)
        self.assertEqual(result, (0, 0, 0))
        self.assertEqual(flags, AddFlags(exact_zero=1))
        result, _ = ref_add(a.negate(), a, DESK)
        self.assertEqual(result, (0, 0, 0))

    def test_overflow_saturates(self):
        big = _t(0, DESK.max_exp, DESK.man_mask)
        result, flags = ref_add(big, big, DESK)
        self.assertEqual(result, (0, DESK.max_exp, DESK.man_mask))
        self.assertEqual(flags.overflow, 1)
        self.assertEqual(flags.underflow, 0)

    def test_underflow_flushes_with_larger_sign(self):
        a = _t(1, 1, 0b001)
        b = _t(0, 1, 0b000)
        result, flags = ref_add(a, b, DESK)
        self.assertEqual(result, (1, 0, 0))
        self.assertEqual(flags.underflow, 1)

    def test_rejects_denormal_operand(self):
        with self.assertRaises(DomainError):
            ref_add(_t(0, 0, 1), ONE, DESK)

    def test_commutative_and_sign_symmetric(self):
        words = normalized_words(DESK)
        for w1 in words[::7]:
            f1 = unpack(w1, DESK)
            for w2 in words[::5]:
                f2 = unpack(w2, DESK)
                result, flags = ref_add(f1, f2, DESK)
                self.assertEqual(ref_add(f2, f1, DESK), (result, flags))
                negated, _ = ref_add(f1.negate(), f2.negate(), DESK)
                if flags.exact_zero:
                    self.assertEqual(negated, (0, 0, 0))
                else:
                    self.assertEqual(negated, result.negate())

    def test_flags_exclusive(self):
        words = normalized_words(DESK)
        for w1 in words[::3]:
            for w2 in words[::3]:
                _, flags = ref_add(unpack(w1, DESK), unpack(w2, DESK), DESK)
                self.assertFalse(flags.overflow and flags.underflow)


if __name__ == "__main__":
    unittest.main()
