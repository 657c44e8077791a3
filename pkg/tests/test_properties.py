"""
Tests for the property language: parsing, printing, elaboration and evaluation.
"""
import unittest

from hypothesis import given, settings
from hypothesis import strategies as st

from fpequiv.exceptions import (
    CheckConfigError,
    DanglingDirectiveError,
    DuplicateDirectiveError,
    DuplicatePropertyError,
    EvaluationError,
    LiteralWidthError,
    NamespaceError,
    PropertyLexError,
    PropertySyntaxError,
    UnknownSignalError,
)
from fpequiv.faults import FaultConfig, FaultKind
from fpequiv.float_core import DESK, FloatTriple
from fpequiv.impl_adder import NAMESPACES, SIGNAL_DICTIONARY, eval, eval_spec
from fpequiv.properties import (
    Conjunction,
    Directive,
    Equality,
    IntLiteral,
    Outcome,
    Paren,
    Program,
    Property,
    Role,
    SignalRef,
    TrueConst,
    corpus,
    corpus_names,
    elaborate,
    eval_property,
    format_program,
    input_ties,
    load_corpora,
    parse,
    parse_expr,
)

TRIVIAL = "property p; 1 |-> 1; endproperty assert property(p);"

_KEYWORDS = {"property", "endproperty", "assert", "assume", "cover", "impl", "spec"}

# ---------------------------------------------------------------------------
# Strategies for randomized well-formed programs
# ---------------------------------------------------------------------------

_names = st.from_regex(r"[a-z_][a-z0-9_]{0,8}", fullmatch=True).filter(lambda n: n not in _KEYWORDS)
_signals = st.builds(SignalRef, st.sampled_from(NAMESPACES), st.sampled_from(SIGNAL_DICTIONARY))
_literals = st.integers(0, 0xFFFF).flatmap(
    lambda v: st.sampled_from([IntLiteral(v, str(v)), IntLiteral(v, hex(v))])
)
_atoms = st.one_of(_signals, _literals)
_leaves = st.one_of(st.builds(Equality, _atoms, _atoms), st.just(TrueConst()))


def _extend(inner):
    parens = inner.map(Paren)
    terms = st.one_of(_leaves, parens)
    return st.one_of(parens, st.lists(terms, min_size=2, max_size=4).map(lambda ts: Conjunction(tuple(ts))))


_exprs = st.recursive(_leaves, _extend, max_leaves=12)


@st.composite
def _programs(draw):
    names = draw(st.lists(_names, min_size=1, max_size=5, unique=True))
    properties = tuple(Property(name, draw(_exprs), draw(_exprs)) for name in names)
    directives = []
    for name in names:
        role = draw(st.one_of(st.none(), st.sampled_from(list(Role))))
        if role is None:
            continue
        label = f"L_{name}" if draw(st.booleans()) else None
        directives.append(Directive(role, name, label))
    return Program(properties, tuple(directives))


class TestParse(unittest.TestCase):
    """Test parsing of well-formed texts."""

    def test_trivial_property(self):
        program = parse(TRIVIAL)
        self.assertEqual(len(program.properties), 1)
        self.assertEqual(program.properties[0].antecedent, TrueConst())
        self.assertEqual(program.directives, (Directive(Role.ASSERT, "p"),))

    def test_fields_are_plain_values(self):
        program = parse("property p; impl.s == spec.s |-> 1; endproperty lbl: cover property(p);")
        prop, directive = program.properties[0], program.directives[0]
        self.assertIs(type(prop.name), str)
        self.assertIsInstance(prop.antecedent, Equality)
        self.assertIsInstance(prop.consequent, TrueConst)
        self.assertEqual((directive.role, directive.target, directive.label), (Role.COVER, "p", "lbl"))
        self.assertIs(type(directive.target), str)
        self.assertEqual(program.property_map()["p"], prop)

    def test_keyword_is_not_an_identifier(self):
        with self.assertRaises(PropertySyntaxError):
            parse("property cover; 1 |-> 1; endproperty")

    def test_corpora_shapes(self):
        lemma1 = parse(corpus("handwritten-lemma1"))
        self.assertEqual([d.role for d in lemma1.directives], [Role.ASSERT])
        self.assertEqual(lemma1.directives[0].name, "ap_mantissa_align_equivalence")

        lemma2 = parse(corpus("handwritten-lemma2"))
        self.assertEqual(sorted(d.role.value for d in lemma2.directives), ["assert", "assume"])

        theorem = parse(corpus("theorem-split3"))
        self.assertEqual([d.role for d in theorem.directives], [Role.ASSERT] * 3)

    def test_literals(self):
        expr = parse_expr("impl.e == 0xE && impl.m == 7")
        self.assertIsInstance(expr, Conjunction)
        self.assertEqual(expr.terms[0].right.value, 14)
        self.assertEqual(expr.terms[1].right.value, 7)

    def test_comments_and_tabs(self):
        text = "// header\nproperty\tq; // trailing\n  impl.s1 == spec.s1\n |-> 1;\nendproperty\ncover property(q);\n"
        program = parse(text)
        self.assertEqual(program.properties[0].name, "q")
        self.assertEqual(program.directives[0].role, Role.COVER)

    def test_positions(self):
        program = parse("\n\nproperty abc; 1 |-> 1; endproperty")
        self.assertEqual((program.properties[0].line, program.properties[0].col), (3, 1))

    def test_corpus_names(self):
        self.assertEqual(corpus_names(), ["handwritten-lemma1", "handwritten-lemma2", "theorem-split3"])
        with self.assertRaises(CheckConfigError):
            corpus("lemma-9")


class TestParseErrors(unittest.TestCase):
    """Test diagnostics carry positions."""

    def test_lexical_error(self):
        with self.assertRaises(PropertyLexError) as ctx:
            parse("property p;\n 1 |-> impl.s == $;\nendproperty")
        self.assertEqual((ctx.exception.line, ctx.exception.col), (2, 18))

    def test_malformed_literal(self):
        with self.assertRaises(PropertyLexError):
            parse_expr("impl.e == 0x")

    def test_syntax_error(self):
        with self.assertRaises(PropertySyntaxError) as ctx:
            parse("property p; impl.s1 == |-> 1; endproperty")
        self.assertEqual(ctx.exception.line, 1)
        self.assertIsNotNone(ctx.exception.col)

    def test_unknown_signal(self):
        with self.assertRaises(UnknownSignalError) as ctx:
            parse_expr("impl.bogus == spec.m")
        self.assertIn("bogus", str(ctx.exception))
        self.assertEqual((ctx.exception.line, ctx.exception.col), (1, 1))

    def test_duplicate_property(self):
        with self.assertRaises(DuplicatePropertyError):
            parse("property p; 1 |-> 1; endproperty\nproperty p; 1 |-> 1; endproperty")

    def test_dangling_directive(self):
        with self.assertRaises(DanglingDirectiveError) as ctx:
            parse("assert property(nowhere);")
        self.assertEqual(ctx.exception.line, 1)

    def test_property_targeted_twice(self):
        with self.assertRaises(DuplicateDirectiveError):
            parse("property p; 1 |-> 1; endproperty assert property(p); cover property(p);")

    def test_message_format(self):
        try:
            parse("assert property(nowhere);")
        except DanglingDirectiveError as e:
            self.assertTrue(str(e).startswith("1:1: "))


class TestRoundTrip(unittest.TestCase):
    """Test parse -> print -> parse structural equality."""

    def test_corpora(self):
        for name in corpus_names():
            program = parse(corpus(name))
            self.assertEqual(parse(format_program(program)), program, name)

    @settings(max_examples=1000, deadline=None)
    @given(_programs())
    def test_randomized_programs(self, program):
        text = format_program(program)
        self.assertEqual(parse(text), program)


class TestElaboration(unittest.TestCase):
    """Test width and namespace checks against a format."""

    def test_literal_too_wide(self):
        program = parse("property p; impl.e == 16 |-> 1; endproperty assert property(p);")
        with self.assertRaises(LiteralWidthError):
            elaborate(program, DESK)
        program = parse("property p; impl.e == 15 |-> 1; endproperty assert property(p);")
        self.assertEqual(len(elaborate(program, DESK)), 1)

    def test_spec_in_standalone(self):
        program = load_corpora(["theorem-split3"])
        with self.assertRaises(NamespaceError):
            elaborate(program, DESK, ("impl",))

    def test_input_ties(self):
        lemma2 = parse(corpus("handwritten-lemma2"))
        props = lemma2.property_map()
        self.assertEqual(input_ties(props["exp_inputs_are_equal"]), frozenset({"e1", "e2", "m1", "m2"}))
        self.assertIsNone(input_ties(props["add_round_equivalence"]))


class TestEvaluation(unittest.TestCase):
    """Test implication semantics on traces."""

    @classmethod
    def setUpClass(cls):
        cls.lemma1 = parse(corpus("handwritten-lemma1")).properties[0]
        cls.mant_match = parse(corpus("theorem-split3")).property_map()["equal_inputs_outputs_mant_match"]

    def test_unequal_inputs_are_vacuous(self):
        impl = eval(FloatTriple(0, 7, 0), FloatTriple(0, 6, 0), DESK)
        spec = eval_spec(FloatTriple(0, 7, 1), FloatTriple(0, 6, 0), DESK)
        self.assertIs(eval_property(self.lemma1, impl.merge(spec)), Outcome.VACUOUS)

    def test_equal_inputs_pass(self):
        f1, f2 = FloatTriple(0, 9, 3), FloatTriple(1, 6, 5)
        trace = eval(f1, f2, DESK).merge(eval_spec(f1, f2, DESK))
        self.assertIs(eval_property(self.lemma1, trace), Outcome.PASS)

    def test_round_rule_fails_mantissa_match(self):
        # 1.000 + 2^-4 is an even tie; the fault rounds it up.
        f1, f2 = FloatTriple(0, 7, 0), FloatTriple(0, 3, 0)
        faults = FaultConfig(enabled=frozenset([FaultKind.ROUND_RULE]))
        trace = eval(f1, f2, DESK, faults).merge(eval_spec(f1, f2, DESK))
        self.assertIs(eval_property(self.mant_match, trace), Outcome.FAIL)

    def test_missing_signal(self):
        trace = eval(FloatTriple(0, 7, 0), FloatTriple(0, 7, 0), DESK)
        with self.assertRaises(EvaluationError):
            eval_property(self.lemma1, trace)


if __name__ == "__main__":
    unittest.main()
