"""
Tests for the fault catalog and site mutations.
"""
import unittest

from hypothesis import given, settings
from hypothesis import strategies as st

from fpequiv.exceptions import CheckConfigError, FaultSiteError
from fpequiv.faults import CATALOG, NO_FAULTS, FaultConfig, FaultKind, Stage, fault_by_id, list_faults, mutate
from fpequiv.float_core import DESK, FloatTriple, normalized_words, unpack
from fpequiv.impl_adder import (
    AddRoundContext,
    AlignmentSignals,
    eval_addround,
    eval_alignment,
    eval_stages,
    signal_widths,
)

_WIDTHS = signal_widths(DESK)
_ALIGNMENT_FAULTS = [FaultConfig(enabled=frozenset([k])) for k, s in CATALOG.items() if s.stage is Stage.ALIGNMENT]

# Synthetic stage-one outputs, not necessarily reachable from real operands.
_alignment_signals = st.builds(
    AlignmentSignals, **{name: st.integers(0, (1 << _WIDTHS[name]) - 1) for name in AlignmentSignals._fields}
)
_contexts = st.builds(AddRoundContext, st.integers(0, 1), st.integers(0, 1), st.integers(0, DESK.exp_mask))


class TestCatalog(unittest.TestCase):
    """Test catalog contents and lookup."""

    def test_nine_entries_in_order(self):
        specs = list_faults()
        self.assertEqual(len(specs), 9)
        self.assertEqual([s.code for s in specs], ["A1", "A2", "A3", "A4", "R1", "R2", "R3", "R4", "B1"])

    def test_stage_attribution(self):
        for spec in list_faults():
            expected = Stage.ADD_ROUND if spec.code.startswith("R") else Stage.ALIGNMENT
            self.assertEqual(spec.stage, expected, spec.code)

    def test_cli_identifiers(self):
        self.assertIs(fault_by_id("sticky-distort"), FaultKind.STICKY_DISTORT)
        self.assertIs(fault_by_id("eq-exp-bug"), FaultKind.EQ_EXP_BUG)
        with self.assertRaises(CheckConfigError):
            fault_by_id("stuck-at-0")

    def test_config_ids_follow_catalog_order(self):
        config = FaultConfig.from_ids(["round-rule", "sticky-distort"])
        self.assertEqual(config.ids(), ["sticky-distort", "round-rule"])

    def test_parameter_override(self):
        config = FaultConfig(
            enabled=frozenset([FaultKind.SHIFT_DISTORT]),
            parameters={FaultKind.SHIFT_DISTORT: {"delta": 2}},
        )
        self.assertEqual(config.parameter(FaultKind.SHIFT_DISTORT, "delta"), 2)
        self.assertEqual(config.parameter(FaultKind.NORM_SHIFT, "delta"), 1)


class TestMutations(unittest.TestCase):
    """Test individual site mutations."""

    def test_operand_select_reversed(self):
        f1, f2 = FloatTriple(0, 9, 0), FloatTriple(0, 7, 0)
        self.assertEqual(eval_alignment(f1, f2, DESK).big_is_f1, 1)
        faults = FaultConfig(enabled=frozenset([FaultKind.OP_SELECT]))
        self.assertEqual(eval_alignment(f1, f2, DESK, faults).big_is_f1, 0)

    def test_round_rule_tie_goes_odd(self):
        # sig=1001, g=1, r=0, st=0: correct rounding increments, the fault keeps 1001.
        correct = mutate(FaultKind.ROUND_RULE, Stage.ADD_ROUND, 1, guard=1, round_bit=0, sticky=0, lsb=1)
        self.assertEqual(correct, 0)
        even_tie = mutate(FaultKind.ROUND_RULE, Stage.ADD_ROUND, 0, guard=1, round_bit=0, sticky=0, lsb=0)
        self.assertEqual(even_tie, 1)
        above_half = mutate(FaultKind.ROUND_RULE, Stage.ADD_ROUND, 1, guard=1, round_bit=1, sticky=0, lsb=1)
        self.assertEqual(above_half, 1)

    def test_equal_exponent_compare_skipped(self):
        self.assertEqual(mutate(FaultKind.EQ_EXP_BUG, Stage.ALIGNMENT, 1, exp_equal=1), 0)
        self.assertEqual(mutate(FaultKind.EQ_EXP_BUG, Stage.ALIGNMENT, 1, exp_equal=0), 1)

    def test_inversion_swap_only_on_subtraction(self):
        ports = (10, 3)
        self.assertEqual(mutate(FaultKind.INV_SWAP, Stage.ALIGNMENT, ports, eff_sub=1), (3, 10))
        self.assertEqual(mutate(FaultKind.INV_SWAP, Stage.ALIGNMENT, ports, eff_sub=0), ports)

    def test_shift_offsets(self):
        self.assertEqual(mutate(FaultKind.SHIFT_DISTORT, Stage.ADD_ROUND, 1), 2)
        self.assertEqual(mutate(FaultKind.NORM_SHIFT, Stage.ADD_ROUND, 0, delta=-1), 0)
        self.assertEqual(mutate(FaultKind.EXT_MISALIGN, Stage.ALIGNMENT, 3), 2)
        self.assertEqual(mutate(FaultKind.CARRY_MANIP, Stage.ADD_ROUND, 1), 0)

    def test_wrong_stage(self):
        with self.assertRaises(FaultSiteError):
            mutate(FaultKind.STICKY_DISTORT, Stage.ADD_ROUND, 3)
        with self.assertRaises(FaultSiteError):
            mutate(FaultKind.ROUND_RULE, Stage.ALIGNMENT, 1)

    def test_disabled_hook_is_identity(self):
        self.assertEqual(NO_FAULTS.hook(FaultKind.OP_SELECT, Stage.ALIGNMENT, 1), 1)
        self.assertEqual(NO_FAULTS.hook(FaultKind.INV_SWAP, Stage.ALIGNMENT, (1, 2), eff_sub=1), (1, 2))


class TestFaultLocality(unittest.TestCase):
    """Test that each fault only touches its own stage."""

    def test_empty_config_is_unmutated(self):
        words = normalized_words(DESK)
        for w1 in words[::5]:
            for w2 in words[::5]:
                f1, f2 = unpack(w1, DESK), unpack(w2, DESK)
                self.assertEqual(eval_stages(f1, f2, DESK), eval_stages(f1, f2, DESK, FaultConfig()))

    def test_add_round_faults_leave_alignment_alone(self):
        words = normalized_words(DESK)
        for kind, spec in CATALOG.items():
            if spec.stage is not Stage.ADD_ROUND:
                continue
            faults = FaultConfig(enabled=frozenset([kind]))
            for w1 in words[::9]:
                for w2 in words[::7]:
                    f1, f2 = unpack(w1, DESK), unpack(w2, DESK)
                    self.assertEqual(eval_alignment(f1, f2, DESK, faults), eval_alignment(f1, f2, DESK))

    @settings(max_examples=500, deadline=None)
    @given(_alignment_signals, _contexts)
    def test_alignment_faults_leave_add_round_alone(self, a, ctx):
        expected = eval_addround(a, ctx, DESK)
        for faults in _ALIGNMENT_FAULTS:
            self.assertEqual(eval_addround(a, ctx, DESK, faults), expected, faults.ids())

    def test_alignment_fault_set_is_complete(self):
        ids = sorted(i for faults in _ALIGNMENT_FAULTS for i in faults.ids())
        self.assertEqual(ids, ["eq-exp-bug", "ext-misalign", "inv-swap", "op-select", "sticky-distort"])


if __name__ == "__main__":
    unittest.main()
