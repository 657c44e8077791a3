"""
Tests for cover items and coverage ratios.
"""
import json
import unittest

from fpequiv.checker import CheckMode
from fpequiv.coverage import (
    DEPENDENCIES,
    ItemStatus,
    catalog,
    checked_signals,
    coverage_ratios,
    coverage_to_json,
    measure,
)
from fpequiv.exceptions import NamespaceError
from fpequiv.faults import NO_FAULTS, Stage
from fpequiv.float_core import DESK, FloatTriple
from fpequiv.impl_adder import SIGNAL_DICTIONARY, eval
from fpequiv.properties import Program, eval_expr, load_corpora


class TestCatalog(unittest.TestCase):
    """Test the cover item catalog."""

    def test_size_and_unique_ids(self):
        items = catalog(DESK)
        self.assertEqual(len(items), 23)
        self.assertEqual(len({item.id for item in items}), 23)

    def test_watches_name_impl_signals(self):
        for item in catalog():
            self.assertTrue(item.signals() <= set(SIGNAL_DICTIONARY), item.id)
            self.assertIn(item.stage, (Stage.ALIGNMENT, Stage.ADD_ROUND))

    def test_round_increment_watch_fires(self):
        # 1.0 + 1.111 * 2^-3 sets guard, round and sticky: the sum rounds up.
        trace = eval(FloatTriple(0, 7, 0), FloatTriple(0, 4, 0b111), DESK)
        item = next(i for i in catalog() if i.id == "round-increment-taken")
        self.assertTrue(eval_expr(item.expr(), trace))

    def test_dependencies_are_known_signals(self):
        for name, deps in DEPENDENCIES.items():
            self.assertIn(name, SIGNAL_DICTIONARY)
            self.assertTrue(deps <= set(SIGNAL_DICTIONARY), name)


class TestRatios(unittest.TestCase):
    """Test the three coverage percentages."""

    def test_stimuli_ratio(self):
        ratios = coverage_ratios(total=98, covered=92, checked=90, covered_and_checked=88)
        self.assertEqual(ratios["stimuli_pct"], 93.88)
        self.assertEqual(ratios["checker_pct"], 91.84)
        self.assertEqual(ratios["formal_pct"], 89.8)

    def test_dead_items_leave_stimuli_denominator(self):
        ratios = coverage_ratios(total=10, covered=8, checked=0, covered_and_checked=0, dead=2)
        self.assertEqual(ratios["stimuli_pct"], 100.0)

    def test_empty(self):
        self.assertEqual(coverage_ratios(0, 0, 0, 0), {"formal_pct": 0.0, "stimuli_pct": 0.0, "checker_pct": 0.0})

    def test_checked_signals_expand_one_step(self):
        names = checked_signals(["impl.m", "spec.m"])
        self.assertIn("m", names)
        self.assertIn("addman", names)
        self.assertNotIn("bigman", names)
        self.assertNotIn("spec.m", names)


class TestMeasure(unittest.TestCase):
    """Test exhaustive coverage measurement."""

    @classmethod
    def setUpClass(cls):
        cls.theorem = measure(DESK, NO_FAULTS, load_corpora(["theorem-split3"]))

    def test_every_item_resolved(self):
        report = self.theorem
        self.assertEqual(report.covered + report.unreachable, report.total)
        self.assertEqual(report.unknown, 0)
        statuses = {r.id: r.status for r in report.items}
        for item_id in ("overflow-set", "exact-zero-set", "collapse-taken", "norm-shift-deep"):
            self.assertIs(statuses[item_id], ItemStatus.COVERED, item_id)

    def test_checked_items_follow_assertions(self):
        checked = {r.id for r in self.theorem.items if r.checked}
        self.assertIn("overflow-set", checked)
        self.assertIn("big-operand-f1", checked)
        self.assertNotIn("sticky-set", checked)
        self.assertNotIn("collapse-taken", checked)
        self.assertEqual(self.theorem.checked, 16)

    def test_assumes_never_add_coverage(self):
        lemma1 = measure(DESK, NO_FAULTS, load_corpora(["handwritten-lemma1"]))
        constrained = measure(DESK, NO_FAULTS, load_corpora(["handwritten-lemma1", "handwritten-lemma2"]))
        self.assertLessEqual(constrained.covered, lemma1.covered)

    def test_without_assertions(self):
        report = measure(DESK, NO_FAULTS, Program((), ()), namespaces=("impl",))
        self.assertEqual(report.checked, 0)
        self.assertEqual(report.formal_pct, 0.0)
        self.assertEqual(report.checker_pct, 0.0)
        self.assertGreater(report.stimuli_pct, 0.0)

    def test_sampled_items_are_unknown(self):
        report = measure(DESK, NO_FAULTS, Program((), ()), CheckMode.random(5, seed=3), namespaces=("impl",))
        self.assertEqual(report.unreachable, 0)
        self.assertEqual(report.covered + report.unknown, report.total)

    def test_standalone_rejects_spec_reference(self):
        with self.assertRaises(NamespaceError):
            measure(DESK, NO_FAULTS, load_corpora(["theorem-split3"]), namespaces=("impl",))

    def test_json(self):
        doc = json.loads(coverage_to_json(self.theorem))
        self.assertEqual(doc["total"], 23)
        self.assertEqual(len(doc["items"]), 23)
        self.assertEqual(doc["items"][0]["id"], "big-operand-f1")


if __name__ == "__main__":
    unittest.main()
