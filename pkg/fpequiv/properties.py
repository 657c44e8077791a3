"""
Property language: parser, pretty-printer, elaboration and evaluation.

The language is the combinational subset of the assertion syntax used for the
built-in corpora:

    property NAME;  EXPR |-> EXPR;  endproperty
    [LABEL :] (assert | assume | cover) property(NAME);

where EXPR is a conjunction (``&&``) of parenthesized expressions, equalities
between signal references / integer literals, and the constant ``1``. Signal
references are ``impl.NAME`` or ``spec.NAME`` over the published dictionary.
"""
import logging
import re
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Callable, Dict, FrozenSet, Iterable, List, Mapping, NamedTuple, Optional, Sequence, Tuple, Union

import pyparsing as pp

from .exceptions import (
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
from .float_core import FloatFormat
from .impl_adder import INPUT_SIGNALS, NAMESPACES, SIGNAL_DICTIONARY, signal_widths

logger = logging.getLogger(__name__)


# ---------------------------------------------------------------------------
# Syntax tree
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SignalRef:
    namespace: str
    name: str
    line: int = field(default=0, compare=False)
    col: int = field(default=0, compare=False)

    @property
    def qualified(self) -> str:
        return f"{self.namespace}.{self.name}"


@dataclass(frozen=True)
class IntLiteral:
    value: int
    text: str = field(default="", compare=False)
    line: int = field(default=0, compare=False)
    col: int = field(default=0, compare=False)


Atom = Union[SignalRef, IntLiteral]


@dataclass(frozen=True)
class Equality:
    left: Atom
    right: Atom
    line: int = field(default=0, compare=False)
    col: int = field(default=0, compare=False)


@dataclass(frozen=True)
class TrueConst:
    line: int = field(default=0, compare=False)
    col: int = field(default=0, compare=False)


@dataclass(frozen=True)
class Paren:
    inner: "Expr"
    line: int = field(default=0, compare=False)
    col: int = field(default=0, compare=False)


@dataclass(frozen=True)
class Conjunction:
    terms: Tuple["Expr", ...]
    line: int = field(default=0, compare=False)
    col: int = field(default=0, compare=False)


Expr = Union[Equality, TrueConst, Paren, Conjunction]


@dataclass(frozen=True)
class Property:
    name: str
    antecedent: Expr
    consequent: Expr
    line: int = field(default=0, compare=False)
    col: int = field(default=0, compare=False)


class Role(str, Enum):
    ASSERT = "assert"
    ASSUME = "assume"
    COVER = "cover"


@dataclass(frozen=True)
class Directive:
    role: Role
    target: str
    label: Optional[str] = None
    line: int = field(default=0, compare=False)
    col: int = field(default=0, compare=False)

    @property
    def name(self) -> str:
        return self.label or self.target


class Program(NamedTuple):
    properties: Tuple[Property, ...]
    directives: Tuple[Directive, ...]

    def property_map(self) -> Dict[str, Property]:
        return {p.name: p for p in self.properties}

    def merged(self, other: "Program") -> "Program":
        return Program(self.properties + other.properties, self.directives + other.directives)


class Outcome(str, Enum):
    PASS = "pass"
    FAIL = "fail"
    VACUOUS = "vacuous"


# ---------------------------------------------------------------------------
# Grammar
# ---------------------------------------------------------------------------

_KEYWORD_NAMES = ("property", "endproperty", "assert", "assume", "cover", "impl", "spec")
_KW = {name: pp.Keyword(name) for name in _KEYWORD_NAMES}

_LPAR, _RPAR, _SEMI, _COLON, _DOT = map(pp.Suppress, "();:.")
_IMPLIES = pp.Suppress(pp.Literal("|->"))
_AND = pp.Suppress(pp.Literal("&&"))
_EQ = pp.Suppress(pp.Literal("=="))

_NAME = pp.Word(pp.alphas + "_", pp.alphanums + "_")
_IDENT = _NAME.copy().add_condition(
    lambda toks: toks[0] not in _KEYWORD_NAMES, message="keyword used as identifier"
).set_name("identifier")
_INT = pp.Regex(r"0[xX][0-9a-fA-F]+|[0-9]+").set_name("integer literal")
_TRUE = pp.Regex(r"1(?![0-9A-Za-z_])").set_name("1")


def _position(s: str, loc: int) -> Tuple[int, int]:
    return pp.lineno(loc, s), pp.col(loc, s)


def _make_signal(s: str, loc: int, toks: pp.ParseResults) -> SignalRef:
    return SignalRef(toks[0], toks[1], *_position(s, loc))


def _make_literal(s: str, loc: int, toks: pp.ParseResults) -> IntLiteral:
    text = toks[0]
    value = int(text, 16) if text[:2].lower() == "0x" else int(text, 10)
    return IntLiteral(value, text, *_position(s, loc))


def _make_equality(s: str, loc: int, toks: pp.ParseResults) -> Equality:
    return Equality(toks[0], toks[1], *_position(s, loc))


def _make_paren(s: str, loc: int, toks: pp.ParseResults) -> Paren:
    return Paren(toks[0], *_position(s, loc))


def _make_true(s: str, loc: int, toks: pp.ParseResults) -> TrueConst:
    return TrueConst(*_position(s, loc))


def _make_conjunction(s: str, loc: int, toks: pp.ParseResults) -> Expr:
    if len(toks) == 1:
        return toks[0]
    return Conjunction(tuple(toks), *_position(s, loc))


def _named(toks: pp.ParseResults, name: str) -> Any:
    # A results name on a compound element yields a one-token ParseResults.
    value = toks.get(name)
    if isinstance(value, pp.ParseResults):
        return value[0] if len(value) else None
    return value


def _make_property(s: str, loc: int, toks: pp.ParseResults) -> Property:
    return Property(
        _named(toks, "name"), _named(toks, "antecedent"), _named(toks, "consequent"), *_position(s, loc)
    )


def _make_directive(s: str, loc: int, toks: pp.ParseResults) -> Directive:
    return Directive(
        Role(_named(toks, "role")), _named(toks, "target"), _named(toks, "label"), *_position(s, loc)
    )


_expr = pp.Forward().set_name("expression")
_signal = ((_KW["impl"] | _KW["spec"]) + _DOT + _NAME).set_parse_action(_make_signal)
_atom = _signal | _INT.copy().set_parse_action(_make_literal)
_term = (
    (_LPAR - _expr - _RPAR).set_parse_action(_make_paren)
    | (_atom + _EQ - _atom).set_parse_action(_make_equality)
    | _TRUE.copy().set_parse_action(_make_true)
).set_name("term")
_expr <<= (_term + pp.ZeroOrMore(_AND - _term)).set_parse_action(_make_conjunction)

_prop_decl = (
    pp.Suppress(_KW["property"])
    - _IDENT("name")
    - _SEMI
    - _expr("antecedent")
    - _IMPLIES
    - _expr("consequent")
    - _SEMI
    - pp.Suppress(_KW["endproperty"])
).set_parse_action(_make_property)

_role = _KW["assert"] | _KW["assume"] | _KW["cover"]
_directive = (
    pp.Optional(_IDENT("label") + _COLON)
    + _role("role")
    - pp.Suppress(_KW["property"])
    - _LPAR
    - _IDENT("target")
    - _RPAR
    - _SEMI
).set_parse_action(_make_directive)

_FILE = pp.ZeroOrMore(_prop_decl | _directive) + pp.StringEnd()
_FILE.ignore(pp.dbl_slash_comment)
_FILE.parse_with_tabs()

_EXPR_ONLY = _expr + pp.StringEnd()
_EXPR_ONLY.ignore(pp.dbl_slash_comment)
_EXPR_ONLY.parse_with_tabs()

# Lexical scan: any character not covered by one of these lexemes is a lexical error.
_NUMERIC_LEXEME = pp.Regex(r"[0-9][0-9A-Za-z_]*")
_LEXEMES = pp.MatchFirst([
    pp.dbl_slash_comment,
    pp.Literal("|->"),
    pp.Literal("&&"),
    pp.Literal("=="),
    pp.Char("();:."),
    pp.Word(pp.alphas + "_", pp.alphanums + "_"),
    _NUMERIC_LEXEME,
])
_LEXEMES.parse_with_tabs()
_LITERAL_SHAPE = re.compile(r"0[xX][0-9a-fA-F]+|[0-9]+")


def _lex_check(text: str) -> None:
    cursor = 0
    for tokens, start, end in _LEXEMES.scan_string(text):
        _lex_gap(text, cursor, start)
        lexeme = text[start:end]
        if lexeme[0].isdigit() and not _LITERAL_SHAPE.fullmatch(lexeme):
            raise PropertyLexError(f"malformed integer literal '{lexeme}'", *_position(text, start))
        cursor = end
    _lex_gap(text, cursor, len(text))


def _lex_gap(text: str, start: int, end: int) -> None:
    for offset, ch in enumerate(text[start:end]):
        if not ch.isspace():
            raise PropertyLexError(f"unexpected character {ch!r}", *_position(text, start + offset))


def _syntax_error(e: pp.ParseBaseException) -> PropertySyntaxError:
    found = f", found {e.line[e.col - 1:].split()[0]!r}" if e.line[e.col - 1:].strip() else ""
    return PropertySyntaxError(f"{e.msg}{found}", e.lineno, e.col)


# ---------------------------------------------------------------------------
# Parsing
# ---------------------------------------------------------------------------

def _signal_refs(expr: Expr) -> Iterable[SignalRef]:
    for atom in _atoms(expr):
        if isinstance(atom, SignalRef):
            yield atom


def _atoms(expr: Expr) -> Iterable[Atom]:
    for equality in flatten(expr):
        if isinstance(equality, Equality):
            yield equality.left
            yield equality.right


def _check_signals(expr: Expr) -> None:
    for ref in _signal_refs(expr):
        if ref.name not in SIGNAL_DICTIONARY:
            raise UnknownSignalError(f"unknown signal '{ref.name}' in '{ref.qualified}'", ref.line, ref.col)


def parse(text: str) -> Program:
    """Parse property text into declared properties and directives."""
    _lex_check(text)
    try:
        items = _FILE.parse_string(text, parse_all=True)
    except pp.ParseBaseException as e:
        raise _syntax_error(e) from None

    properties: Dict[str, Property] = {}
    directives: List[Directive] = []
    for item in items:
        if isinstance(item, Property):
            if item.name in properties:
                first = properties[item.name]
                raise DuplicatePropertyError(
                    f"property '{item.name}' already declared at {first.line}:{first.col}",
                    item.line, item.col,
                )
            _check_signals(item.antecedent)
            _check_signals(item.consequent)
            properties[item.name] = item
        else:
            directives.append(item)

    targeted: Dict[str, Directive] = {}
    names: Dict[str, Directive] = {}
    for d in directives:
        if d.target not in properties:
            raise DanglingDirectiveError(f"directive targets undeclared property '{d.target}'", d.line, d.col)
        if d.target in targeted:
            raise DuplicateDirectiveError(
                f"property '{d.target}' is already targeted by '{targeted[d.target].name}'", d.line, d.col
            )
        if d.name in names:
            raise DuplicateDirectiveError(f"directive name '{d.name}' is used twice", d.line, d.col)
        targeted[d.target] = d
        names[d.name] = d

    logger.debug(f"Parsed {len(properties)} properties and {len(directives)} directives")
    return Program(tuple(properties.values()), tuple(directives))


def parse_expr(text: str) -> Expr:
    """Parse a bare expression (cover-item watches)."""
    _lex_check(text)
    try:
        expr = _EXPR_ONLY.parse_string(text, parse_all=True)[0]
    except pp.ParseBaseException as e:
        raise _syntax_error(e) from None
    _check_signals(expr)
    return expr


# ---------------------------------------------------------------------------
# Pretty-printing
# ---------------------------------------------------------------------------

def format_expr(expr: Union[Expr, Atom]) -> str:
    if isinstance(expr, SignalRef):
        return expr.qualified
    if isinstance(expr, IntLiteral):
        return expr.text or str(expr.value)
    if isinstance(expr, Equality):
        return f"{format_expr(expr.left)} == {format_expr(expr.right)}"
    if isinstance(expr, TrueConst):
        return "1"
    if isinstance(expr, Paren):
        return f"({format_expr(expr.inner)})"
    return " && ".join(format_expr(term) for term in expr.terms)


def format_program(program: Program) -> str:
    lines = []
    for p in program.properties:
        lines.append(f"property {p.name};")
        lines.append(f"  {format_expr(p.antecedent)}")
        lines.append(f"  |-> {format_expr(p.consequent)};")
        lines.append("endproperty")
        lines.append("")
    for d in program.directives:
        prefix = f"{d.label}: " if d.label else ""
        lines.append(f"{prefix}{d.role.value} property({d.target});")
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# Analysis and evaluation
# ---------------------------------------------------------------------------

def flatten(expr: Expr) -> List[Union[Equality, TrueConst]]:
    """Conjunction terms with parentheses removed, in source order."""
    if isinstance(expr, Paren):
        return flatten(expr.inner)
    if isinstance(expr, Conjunction):
        return [t for term in expr.terms for t in flatten(term)]
    return [expr]


def signal_support(expr: Expr) -> FrozenSet[str]:
    """Qualified names referenced by ``expr``."""
    return frozenset(ref.qualified for ref in _signal_refs(expr))


def _atom_value(atom: Atom, trace: Mapping[str, int]) -> int:
    if isinstance(atom, IntLiteral):
        return atom.value
    try:
        return trace[atom.qualified]
    except KeyError:
        raise EvaluationError(f"signal '{atom.qualified}' is not present in this trace") from None


def eval_expr(expr: Expr, trace: Mapping[str, int]) -> bool:
    for term in flatten(expr):
        if isinstance(term, Equality) and _atom_value(term.left, trace) != _atom_value(term.right, trace):
            return False
    return True


def eval_property(p: Property, trace: Mapping[str, int]) -> Outcome:
    # Both sides are evaluated so a missing signal is reported even when vacuous.
    antecedent = eval_expr(p.antecedent, trace)
    consequent = eval_expr(p.consequent, trace)
    if not antecedent:
        return Outcome.VACUOUS
    return Outcome.PASS if consequent else Outcome.FAIL


Row = Sequence[int]
Predicate = Callable[[Row], bool]


def compile_terms(terms: Sequence[Union[Equality, TrueConst]], index: Mapping[str, int]) -> Predicate:
    """
    Compile conjunction terms into a predicate over a value row, where ``index``
    maps each qualified name to its row position.
    """
    checks: List[Tuple[int, int, int, int]] = []
    for term in terms:
        if isinstance(term, TrueConst):
            continue
        left, right = term.left, term.right
        if isinstance(left, IntLiteral) and isinstance(right, IntLiteral):
            if left.value != right.value:
                return lambda row: False
            continue
        if isinstance(left, IntLiteral):
            left, right = right, left
        li = index[left.qualified]  # type: ignore[union-attr]
        if isinstance(right, IntLiteral):
            checks.append((li, -1, right.value, 0))
        else:
            checks.append((li, index[right.qualified], 0, 1))

    if not checks:
        return lambda row: True

    def predicate(row: Row) -> bool:
        for li, ri, value, is_signal in checks:
            if row[li] != (row[ri] if is_signal else value):
                return False
        return True

    return predicate


def compile_expr(expr: Expr, index: Mapping[str, int]) -> Predicate:
    return compile_terms(flatten(expr), index)


class ElaboratedDirective(NamedTuple):
    name: str
    role: Role
    prop: Property
    support: FrozenSet[str]

    @property
    def consequent_support(self) -> FrozenSet[str]:
        return signal_support(self.prop.consequent)


def check_widths(expr: Expr, fmt: FloatFormat) -> None:
    widths = signal_widths(fmt)
    for term in flatten(expr):
        if not isinstance(term, Equality):
            continue
        for literal, other in ((term.left, term.right), (term.right, term.left)):
            if isinstance(literal, IntLiteral) and isinstance(other, SignalRef):
                width = widths[other.name]
                if literal.value >= 1 << width:
                    raise LiteralWidthError(
                        f"literal {literal.text or literal.value} does not fit the "
                        f"{width}-bit signal '{other.qualified}'",
                        literal.line, literal.col,
                    )


def check_namespaces(expr: Expr, namespaces: Sequence[str]) -> None:
    for ref in _signal_refs(expr):
        if ref.namespace not in namespaces:
            raise NamespaceError(
                f"'{ref.qualified}' is not available; elaborated namespaces: {', '.join(namespaces)}",
                ref.line, ref.col,
            )


def elaborate(
    program: Program, fmt: FloatFormat, namespaces: Sequence[str] = NAMESPACES
) -> List[ElaboratedDirective]:
    """Resolve directives against their properties and check literal widths and namespaces."""
    props = program.property_map()
    elaborated = []
    for p in program.properties:
        for expr in (p.antecedent, p.consequent):
            check_namespaces(expr, namespaces)
            check_widths(expr, fmt)
    for d in program.directives:
        p = props[d.target]
        elaborated.append(
            ElaboratedDirective(d.name, d.role, p, signal_support(p.antecedent) | signal_support(p.consequent))
        )
    return elaborated


def input_ties(prop: Property) -> Optional[FrozenSet[str]]:
    """
    Input fields tied between the two models by an assume of the form
    ``1 |-> impl.X == spec.X && ...``; None if the property has another shape.
    """
    if any(not isinstance(t, TrueConst) for t in flatten(prop.antecedent)):
        return None
    tied = set()
    for term in flatten(prop.consequent):
        if isinstance(term, TrueConst):
            continue
        left, right = term.left, term.right
        if not (isinstance(left, SignalRef) and isinstance(right, SignalRef)):
            return None
        if left.name != right.name or left.name not in INPUT_SIGNALS:
            return None
        if {left.namespace, right.namespace} != {"impl", "spec"}:
            return None
        tied.add(left.name)
    return frozenset(tied)


# ---------------------------------------------------------------------------
# Built-in corpora
# ---------------------------------------------------------------------------

_LEMMA1 = """\
// Alignment stage: equal primary inputs give equal aligned and larger mantissas.
property mantissa_align_equivalence;
  (impl.s1 == spec.s1) && (impl.s2 == spec.s2) &&
  // signs of input operands are the same
  (impl.e1 == spec.e1) && (impl.e2 == spec.e2) &&
  // exponents of input operands are equal
  (impl.m1 == spec.m1) && (impl.m2 == spec.m2)
  // mantissas of input operands are equal
  |->
  (impl.algman == spec.algman) &&
  (impl.bigman == spec.bigman);
endproperty

ap_mantissa_align_equivalence:
  assert property(mantissa_align_equivalence);
"""

_LEMMA2 = """\
// Add-round stage: equal aligned operands give equal results.
property add_round_equivalence;
  (impl.s1 == spec.s1) && (impl.s2 == spec.s2) &&
  (impl.algman == spec.algman) &&
  (impl.bigman == spec.bigman)
  |->
  (impl.s == spec.s) &&
  (impl.e == spec.e) &&
  (impl.m == spec.m);
endproperty

// Environment constraint for free-input checking. Mantissas are tied along with
// exponents so both instances order the operands the same way.
property exp_inputs_are_equal;
  1 |-> ((impl.e1 == spec.e1) && (impl.e2 == spec.e2) &&
         (impl.m1 == spec.m1) && (impl.m2 == spec.m2));
endproperty

ap_add_round_equivalence:
  assert property(add_round_equivalence);

cp_exp_inputs_are_equal:
  assume property(exp_inputs_are_equal);
"""

_INPUTS_EQUAL = """\
  ((impl.s1 == spec.s1) && (impl.s2 == spec.s2) &&
   (impl.e1 == spec.e1) && (impl.e2 == spec.e2) &&
   (impl.m1 == spec.m1) && (impl.m2 == spec.m2))"""

_THEOREM_SPLIT3 = f"""\
// Top-level result equivalence, one assertion per result field.
property equal_inputs_outputs_sign_match;
{_INPUTS_EQUAL}
  |-> (impl.s == spec.s);
endproperty

property equal_inputs_outputs_exp_match;
{_INPUTS_EQUAL}
  |-> (impl.e == spec.e);
endproperty

property equal_inputs_outputs_mant_match;
{_INPUTS_EQUAL}
  |-> (impl.m == spec.m);
endproperty

ap_equal_inputs_outputs_sign_match:
  assert property(equal_inputs_outputs_sign_match);

ap_equal_inputs_outputs_exp_match:
  assert property(equal_inputs_outputs_exp_match);

ap_equal_inputs_outputs_mant_match:
  assert property(equal_inputs_outputs_mant_match);
"""

_CORPORA: Dict[str, str] = {
    "handwritten-lemma1": _LEMMA1,
    "handwritten-lemma2": _LEMMA2,
    "theorem-split3": _THEOREM_SPLIT3,
}

# Lemma 1, Lemma 2 and the split theorem together; used for stage localization.
LOCALIZATION_CORPUS = ("handwritten-lemma1", "handwritten-lemma2", "theorem-split3")


def corpus_names() -> List[str]:
    return list(_CORPORA)


def corpus(name: str) -> str:
    """Built-in property text by corpus name."""
    try:
        return _CORPORA[name]
    except KeyError:
        raise CheckConfigError(
            f"unknown corpus '{name}'; available: {', '.join(_CORPORA)}"
        ) from None


def load_corpora(names: Sequence[str]) -> Program:
    program = Program((), ())
    for name in names:
        program = program.merged(parse(corpus(name)))
    return program
