"""
Equivalence checker over the reference and implementation adders.

Stimuli are enumerated exhaustively (reduced formats) or sampled with a seed, in a
fixed order: lexicographic over the packed operand words, spec inputs first in free
mode. Every directive is evaluated on every admitted stimulus; a stimulus is
admitted when no assume directive fails on it.

The stimulus space is split into contiguous partitions that may run on worker
processes. Partition results are merged in partition order, so verdicts and
counterexamples never depend on the worker count.
"""
import itertools
import json
import logging
import time
from concurrent.futures import ProcessPoolExecutor
from enum import Enum
from functools import lru_cache
from typing import Any, Dict, FrozenSet, Iterable, Iterator, List, Literal, NamedTuple, Optional, Sequence, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from .exceptions import CheckConfigError
from .faults import CATALOG, NO_FAULTS, FaultConfig, FaultKind, Stage
from .float_core import DESK, HALF_WIDE, FloatFormat, FloatTriple
from .impl_adder import (
    NAMESPACES,
    SIGNAL_DICTIONARY,
    STAGE_OF_SIGNAL,
    SignalTrace,
    impl_values,
    publish,
    spec_values,
)
from .oracle import sample_operands
from .properties import (
    LOCALIZATION_CORPUS,
    ElaboratedDirective,
    Expr,
    Outcome,
    Program,
    Role,
    SignalRef,
    TrueConst,
    compile_expr,
    compile_terms,
    elaborate,
    flatten,
    input_ties,
    load_corpora,
    signal_support,
)

logger = logging.getLogger(__name__)

# Primary input fields of one model, in packed-word order.
FIELDS = ("s1", "e1", "m1", "s2", "e2", "m2")

Stimulus = Tuple[int, ...]

_PASS, _FAIL, _VACUOUS = 0, 1, 2


class DriveMode(str, Enum):
    LOCKSTEP = "lockstep"
    FREE = "free"


class CheckMode(BaseModel):
    """Exhaustive enumeration, or ``sample_count`` seeded random stimuli."""

    model_config = ConfigDict(frozen=True)

    kind: Literal["exhaustive", "random"] = "exhaustive"
    sample_count: int = Field(1_000_000, ge=1)
    seed: int = Field(0, ge=0, lt=1 << 64)

    @classmethod
    def exhaustive(cls) -> "CheckMode":
        return cls(kind="exhaustive")

    @classmethod
    def random(cls, sample_count: int, seed: int = 0) -> "CheckMode":
        return cls(kind="random", sample_count=sample_count, seed=seed)

    @property
    def is_exhaustive(self) -> bool:
        return self.kind == "exhaustive"


class CheckerSettings(BaseModel):
    exhaustive_ceiling: int = Field(1 << 26, ge=1, description="Largest stimulus count enumerated exhaustively")
    cex_limit: int = Field(4, ge=0, description="Counterexamples kept per failing assertion")
    workers: int = Field(1, ge=1)
    escalation_samples: int = Field(100_000, ge=1, description="Samples used when a fault escalates width")
    allow_unconstrained_free: bool = False
    shrink: bool = True


class Status(str, Enum):
    PROVEN = "proven"
    FAILED = "failed"
    VACUOUS = "vacuous"
    COVERED = "covered"
    UNREACHABLE = "unreachable"
    UNKNOWN = "unknown"
    ASSUMED = "assumed"


class Counterexample(BaseModel):
    model_config = ConfigDict(arbitrary_types_allowed=True)

    failed_property: str
    stage: Stage = Stage.UNATTRIBUTED
    stimulus: Tuple[int, ...]
    trace: SignalTrace
    shrunk: bool = False

    def signals(self) -> Dict[str, str]:
        return self.trace.to_hex()


class PropertyVerdict(BaseModel):
    name: str
    role: Role
    status: Status
    pass_count: int = 0
    fail_count: int = 0
    vacuous_count: int = 0
    stage: str = Field("inputs", description="Stage of the signals the consequent checks")
    first_cex: Optional[Counterexample] = None


class VerificationReport(BaseModel):
    config: Dict[str, Any]
    exhaustive: bool
    drive: DriveMode
    stimuli_total: int
    stimuli_admitted: int
    verdicts: List[PropertyVerdict]
    counterexamples: List[Counterexample] = Field(default_factory=list)
    attribution: Dict[str, Stage] = Field(default_factory=dict)
    elapsed_seconds: float = 0.0

    def verdict(self, name: str) -> PropertyVerdict:
        for v in self.verdicts:
            if v.name == name:
                return v
        raise KeyError(name)

    def asserts(self) -> List[PropertyVerdict]:
        return [v for v in self.verdicts if v.role is Role.ASSERT]

    def failed(self) -> List[PropertyVerdict]:
        return [v for v in self.asserts() if v.status is Status.FAILED]

    def exit_code(self) -> int:
        """0 when every assertion is proven, 1 when any failed, 2 when some are only vacuous."""
        asserts = self.asserts()
        if any(v.status is Status.FAILED for v in asserts):
            return 1
        if any(v.status is Status.VACUOUS for v in asserts):
            return 2
        return 0


# ---------------------------------------------------------------------------
# Evaluation over value rows
# ---------------------------------------------------------------------------

def ordered_namespaces(namespaces: Iterable[str]) -> Tuple[str, ...]:
    wanted = set(namespaces)
    return tuple(ns for ns in NAMESPACES if ns in wanted)


@lru_cache(maxsize=None)
def row_index(namespaces: Tuple[str, ...]) -> Dict[str, int]:
    """Qualified name -> position in a row (namespace blocks in ``namespaces`` order)."""
    width = len(SIGNAL_DICTIONARY)
    return {
        f"{ns}.{name}": block * width + i
        for block, ns in enumerate(namespaces)
        for i, name in enumerate(SIGNAL_DICTIONARY)
    }


def field_domains(fmt: FloatFormat) -> List[range]:
    sign = range(2)
    exponent = range(fmt.min_exp, fmt.max_exp + 1)
    mantissa = range(1 << fmt.man_bits)
    return [sign, exponent, mantissa, sign, exponent, mantissa]


def _operands(fields: Sequence[int]) -> Tuple[FloatTriple, FloatTriple]:
    return FloatTriple(fields[0], fields[1], fields[2]), FloatTriple(fields[3], fields[4], fields[5])


def property_stage(directive: ElaboratedDirective) -> str:
    stages = {STAGE_OF_SIGNAL[name.split(".", 1)[1]] for name in directive.consequent_support}
    for stage in (Stage.ADD_ROUND.value, Stage.ALIGNMENT.value):
        if stage in stages:
            return stage
    return "inputs"


class Evaluator:
    """Elaborated directives compiled against value rows of both models."""

    def __init__(
        self,
        fmt: FloatFormat,
        faults: FaultConfig,
        program: Program,
        drive: DriveMode = DriveMode.LOCKSTEP,
        namespaces: Sequence[str] = NAMESPACES,
        cache_impl_rows: bool = False,
    ):
        self.fmt = fmt
        self.faults = faults
        self.drive = drive
        self.namespaces = ordered_namespaces(namespaces)
        self.directives = elaborate(program, fmt, self.namespaces)
        index = row_index(self.namespaces)
        self.antecedents = [compile_expr(d.prop.antecedent, index) for d in self.directives]
        self.consequents = [compile_expr(d.prop.consequent, index) for d in self.directives]
        self.assume_ids = [j for j, d in enumerate(self.directives) if d.role is Role.ASSUME]
        self.check_ids = [j for j, d in enumerate(self.directives) if d.role is not Role.ASSUME]
        self.assert_ids = frozenset(j for j, d in enumerate(self.directives) if d.role is Role.ASSERT)
        self.with_spec = "spec" in self.namespaces
        # Rows keyed by implementation inputs; bounded by the exhaustive domain.
        self.cache_impl_rows = cache_impl_rows
        self._impl_rows: Dict[Stimulus, Tuple[int, ...]] = {}

    def position(self, name: str) -> int:
        for j, d in enumerate(self.directives):
            if d.name == name:
                return j
        raise KeyError(name)

    def impl_row(self, fields: Sequence[int]) -> Tuple[int, ...]:
        if self.cache_impl_rows:
            key = tuple(fields)
            row = self._impl_rows.get(key)
            if row is None:
                row = self._impl_rows[key] = impl_values(*_operands(fields), self.fmt, self.faults)
            return row
        return impl_values(*_operands(fields), self.fmt, self.faults)

    @property
    def cached_impl_rows(self) -> int:
        return len(self._impl_rows)

    def spec_row(self, fields: Sequence[int]) -> Tuple[int, ...]:
        return spec_values(*_operands(fields), self.fmt)

    def row(self, stimulus: Stimulus) -> Tuple[int, ...]:
        if self.drive is DriveMode.FREE:
            return self.impl_row(stimulus[6:]) + self.spec_row(stimulus[:6])
        impl = self.impl_row(stimulus)
        return impl + self.spec_row(stimulus) if self.with_spec else impl

    def admitted(self, row: Sequence[int]) -> bool:
        return all(not self.antecedents[j](row) or self.consequents[j](row) for j in self.assume_ids)

    def outcome(self, j: int, row: Sequence[int]) -> Outcome:
        if not self.antecedents[j](row):
            return Outcome.VACUOUS
        return Outcome.PASS if self.consequents[j](row) else Outcome.FAIL

    def trace(self, stimulus: Stimulus) -> SignalTrace:
        if self.drive is DriveMode.FREE:
            spec_fields, impl_fields = stimulus[:6], stimulus[6:]
        else:
            spec_fields = impl_fields = stimulus
        trace = publish("impl", self.fmt, self.impl_row(impl_fields))
        if self.with_spec:
            trace = trace.merge(publish("spec", self.fmt, self.spec_row(spec_fields)))
        return trace


# ---------------------------------------------------------------------------
# Partitioned scan
# ---------------------------------------------------------------------------

class ScanPlan(NamedTuple):
    fmt: FloatFormat
    faults: FaultConfig
    program: Program
    drive: DriveMode
    namespaces: Tuple[str, ...]
    mode: CheckMode
    ties: FrozenSet[str]
    join: bool
    watches: Tuple[Expr, ...]
    cex_limit: int

    @property
    def caches_impl_rows(self) -> bool:
        """Only the nested exhaustive free scan revisits implementation inputs."""
        return self.drive is DriveMode.FREE and self.mode.is_exhaustive and not self.join


class ScanResult(NamedTuple):
    total: int
    admitted: int
    counts: List[List[int]]
    failures: List[List[Stimulus]]
    hits: List[bool]


class _Accumulator:
    def __init__(self, directives: int, watches: int, cex_limit: int):
        self.total = 0
        self.admitted = 0
        self.counts = [[0, 0, 0] for _ in range(directives)]
        self.failures: List[List[Stimulus]] = [[] for _ in range(directives)]
        self.hits = [False] * watches
        self.cex_limit = cex_limit

    def record_failure(self, j: int, stimulus: Stimulus) -> None:
        if len(self.failures[j]) < self.cex_limit:
            self.failures[j].append(tuple(stimulus))

    def watch(self, watches: Sequence[Any], row: Sequence[int]) -> None:
        for w, predicate in enumerate(watches):
            if not self.hits[w] and predicate(row):
                self.hits[w] = True

    def visit(self, ev: Evaluator, row: Sequence[int], stimulus: Stimulus, watches: Sequence[Any]) -> None:
        self.total += 1
        admitted = True
        for j in ev.assume_ids:
            if not ev.antecedents[j](row):
                self.counts[j][_VACUOUS] += 1
            elif ev.consequents[j](row):
                self.counts[j][_PASS] += 1
            else:
                self.counts[j][_FAIL] += 1
                admitted = False
        if not admitted:
            return
        self.admitted += 1
        for j in ev.check_ids:
            if not ev.antecedents[j](row):
                self.counts[j][_VACUOUS] += 1
            elif ev.consequents[j](row):
                self.counts[j][_PASS] += 1
            else:
                self.counts[j][_FAIL] += 1
                if j in ev.assert_ids:
                    self.record_failure(j, stimulus)
        self.watch(watches, row)

    def result(self) -> ScanResult:
        return ScanResult(self.total, self.admitted, self.counts, self.failures, self.hits)


class _JoinPlan:
    """Antecedent split into spec-local, impl-local and cross-model equality terms."""

    def __init__(self, antecedent: Expr, index: Dict[str, int]):
        width = len(SIGNAL_DICTIONARY)
        spec_terms, impl_terms = [], []
        self.impl_keys: List[int] = []
        self.spec_keys: List[int] = []
        for term in flatten(antecedent):
            if isinstance(term, TrueConst):
                continue
            refs = [a for a in (term.left, term.right) if isinstance(a, SignalRef)]
            spaces = {ref.namespace for ref in refs}
            if spaces == {"impl", "spec"}:
                impl_ref, spec_ref = refs if refs[0].namespace == "impl" else refs[::-1]
                self.impl_keys.append(index[impl_ref.qualified])
                self.spec_keys.append(index[spec_ref.qualified] - width)
            elif spaces == {"impl"}:
                impl_terms.append(term)
            else:
                spec_terms.append(term)
        spec_index = {name: i - width for name, i in index.items() if name.startswith("spec.")}
        self.impl_local = compile_terms(impl_terms, index)
        self.spec_local = compile_terms(spec_terms, spec_index)

    def table(self, rows: Sequence[Tuple[int, ...]]) -> Dict[Tuple[int, ...], List[int]]:
        table: Dict[Tuple[int, ...], List[int]] = {}
        for pos, row in enumerate(rows):
            if self.impl_local(row):
                table.setdefault(tuple(row[i] for i in self.impl_keys), []).append(pos)
        return table

    def spec_key(self, spec_row: Sequence[int]) -> Tuple[int, ...]:
        return tuple(spec_row[i] for i in self.spec_keys)


def _group_members(fmt: FloatFormat, ties: FrozenSet[str], spec_fields: Stimulus) -> List[Stimulus]:
    """Implementation inputs paired with ``spec_fields``, in packed-word order."""
    domains: List[Iterable[int]] = []
    for i, (name, domain) in enumerate(zip(FIELDS, field_domains(fmt))):
        domains.append((spec_fields[i],) if name in ties else domain)
    return list(itertools.product(*domains))


def _group_size(fmt: FloatFormat, ties: FrozenSet[str]) -> int:
    size = 1
    for name, domain in zip(FIELDS, field_domains(fmt)):
        if name not in ties:
            size *= len(domain)
    return size


@lru_cache(maxsize=2)
def _random_stimuli(
    fmt: FloatFormat, drive: DriveMode, ties: FrozenSet[str], count: int, seed: int
) -> List[Stimulus]:
    if drive is DriveMode.LOCKSTEP:
        return [f1 + f2 for f1, f2 in sample_operands(fmt, count, seed)]
    spec_seq, impl_seq = np.random.SeedSequence(seed).spawn(2)
    tied = [i for i, name in enumerate(FIELDS) if name in ties]
    stimuli = []
    for (a1, a2), (b1, b2) in zip(sample_operands(fmt, count, spec_seq), sample_operands(fmt, count, impl_seq)):
        spec, impl = a1 + a2, list(b1 + b2)
        for i in tied:
            impl[i] = spec[i]
        stimuli.append(spec + tuple(impl))
    return stimuli


def _primary_stimuli(plan: ScanPlan, start: int, stop: int) -> Iterator[Stimulus]:
    if plan.mode.is_exhaustive:
        return itertools.islice(itertools.product(*field_domains(plan.fmt)), start, stop)
    stimuli = _random_stimuli(plan.fmt, plan.drive, plan.ties, plan.mode.sample_count, plan.mode.seed)
    return iter(stimuli[start:stop])


def _joined_scan(
    plan: ScanPlan, ev: Evaluator, acc: _Accumulator, watches: Sequence[Any], start: int, stop: int
) -> None:
    index = row_index(ev.namespaces)
    joins = {j: _JoinPlan(ev.directives[j].prop.antecedent, index) for j in ev.check_ids}
    tie_positions = [i for i, name in enumerate(FIELDS) if name in plan.ties]
    groups: Dict[Tuple[int, ...], Tuple[List[Stimulus], List[Tuple[int, ...]], Dict[int, Dict]]] = {}

    for spec_fields in _primary_stimuli(plan, start, stop):
        key = tuple(spec_fields[i] for i in tie_positions)
        group = groups.get(key)
        if group is None:
            members = _group_members(plan.fmt, plan.ties, spec_fields)
            rows = [ev.impl_row(m) for m in members]
            group = groups[key] = (members, rows, {j: join.table(rows) for j, join in joins.items()})
            for row in rows:
                acc.watch(watches, row)
        members, rows, tables = group
        spec_row = ev.spec_row(spec_fields)
        n = len(members)
        acc.total += n
        acc.admitted += n
        for j in ev.assume_ids:
            acc.counts[j][_PASS] += n
        for j in ev.check_ids:
            join = joins[j]
            if not join.spec_local(spec_row):
                acc.counts[j][_VACUOUS] += n
                continue
            matched = tables[j].get(join.spec_key(spec_row), ())
            acc.counts[j][_VACUOUS] += n - len(matched)
            for pos in matched:
                if ev.consequents[j](rows[pos] + spec_row):
                    acc.counts[j][_PASS] += 1
                else:
                    acc.counts[j][_FAIL] += 1
                    if j in ev.assert_ids:
                        acc.record_failure(j, spec_fields + members[pos])


def scan_partition(plan: ScanPlan, start: int, stop: int) -> ScanResult:
    """Scan primary stimuli ``start``..``stop`` (module level so worker processes can run it)."""
    ev = Evaluator(
        plan.fmt, plan.faults, plan.program, plan.drive, plan.namespaces, cache_impl_rows=plan.caches_impl_rows
    )
    index = row_index(ev.namespaces)
    watches = [compile_expr(w, index) for w in plan.watches]
    acc = _Accumulator(len(ev.directives), len(watches), plan.cex_limit)

    if plan.drive is DriveMode.LOCKSTEP or not plan.mode.is_exhaustive:
        for stimulus in _primary_stimuli(plan, start, stop):
            acc.visit(ev, ev.row(stimulus), stimulus, watches)
    elif plan.join:
        _joined_scan(plan, ev, acc, watches, start, stop)
    else:
        for spec_fields in _primary_stimuli(plan, start, stop):
            for impl_fields in _group_members(plan.fmt, plan.ties, spec_fields):
                stimulus = spec_fields + impl_fields
                acc.visit(ev, ev.row(stimulus), stimulus, watches)

    logger.debug(f"Partition {start}..{stop}: {acc.total} stimuli, {acc.admitted} admitted")
    return acc.result()


def _merge(results: Sequence[ScanResult], cex_limit: int) -> ScanResult:
    first = results[0]
    counts = [list(c) for c in first.counts]
    failures = [list(f) for f in first.failures]
    hits = list(first.hits)
    for result in results[1:]:
        for j, c in enumerate(result.counts):
            counts[j] = [a + b for a, b in zip(counts[j], c)]
            failures[j].extend(result.failures[j][: cex_limit - len(failures[j])])
        hits = [a or b for a, b in zip(hits, result.hits)]
    return ScanResult(
        sum(r.total for r in results), sum(r.admitted for r in results), counts, failures, hits
    )


def _partitions(count: int, workers: int) -> List[Tuple[int, int]]:
    parts = 1 if workers == 1 else max(1, min(count, workers * 4))
    bounds = [count * k // parts for k in range(parts + 1)]
    return [(bounds[k], bounds[k + 1]) for k in range(parts)]


def scan(
    fmt: FloatFormat,
    faults: FaultConfig,
    program: Program,
    check_mode: CheckMode,
    drive_mode: DriveMode,
    settings: CheckerSettings,
    namespaces: Sequence[str] = NAMESPACES,
    watches: Sequence[Expr] = (),
) -> Tuple[ScanResult, Evaluator]:
    """Validate the configuration and run the partitioned scan."""
    namespaces = ordered_namespaces(namespaces)
    ev = Evaluator(fmt, faults, program, drive_mode, namespaces)

    ties: FrozenSet[str] = frozenset()
    join = False
    if drive_mode is DriveMode.FREE:
        if not ev.with_spec:
            raise CheckConfigError("free drive mode needs both the impl and spec namespaces")
        if not ev.assume_ids and not settings.allow_unconstrained_free:
            raise CheckConfigError(
                "free drive mode requires at least one assume directive; "
                "add an assume or pass the unconstrained-free override"
            )
        tie_sets = [input_ties(ev.directives[j].prop) for j in ev.assume_ids]
        ties = frozenset().union(*(t for t in tie_sets if t is not None))
        join = all(t is not None for t in tie_sets)
        for w in watches:
            if any(name.startswith("spec.") for name in signal_support(w)):
                raise CheckConfigError("cover watches in free drive mode may reference impl.* only")

    if check_mode.is_exhaustive:
        primary = fmt.normalized_count ** 2
        total = primary * _group_size(fmt, ties) if drive_mode is DriveMode.FREE else primary
        if total > settings.exhaustive_ceiling:
            raise CheckConfigError(
                f"exhaustive check of format {fmt} needs {total} stimuli, above the ceiling of "
                f"{settings.exhaustive_ceiling}; use random mode, a smaller format or tighter assumes"
            )
    else:
        primary = total = check_mode.sample_count

    plan = ScanPlan(
        fmt, faults, program, drive_mode, namespaces, check_mode, ties, join, tuple(watches), settings.cex_limit
    )
    bounds = _partitions(primary, settings.workers)
    logger.info(
        f"Scanning {total} stimuli of format {fmt} ({check_mode.kind}, {drive_mode.value}) "
        f"in {len(bounds)} partition(s)"
    )
    if len(bounds) == 1:
        results = [scan_partition(plan, *bounds[0])]
    else:
        with ProcessPoolExecutor(max_workers=settings.workers) as pool:
            results = list(
                pool.map(scan_partition, [plan] * len(bounds), [b[0] for b in bounds], [b[1] for b in bounds])
            )
    return _merge(results, settings.cex_limit), ev


# ---------------------------------------------------------------------------
# Verdicts, localization and shrinking
# ---------------------------------------------------------------------------

def _status(role: Role, passed: int, failed: int, check_mode: CheckMode) -> Status:
    if role is Role.ASSUME:
        return Status.ASSUMED
    if role is Role.COVER:
        if passed:
            return Status.COVERED
        return Status.UNREACHABLE if check_mode.is_exhaustive else Status.UNKNOWN
    if failed:
        return Status.FAILED
    return Status.PROVEN if passed else Status.VACUOUS


def localize(report: VerificationReport) -> Dict[str, Stage]:
    """
    Attribute every failing assertion to a stage from the lemma-level verdicts:
    alignment when an alignment assertion fails, add-round when one holds.
    """
    failing = report.failed()
    if not failing:
        return {}
    alignment = [v for v in report.asserts() if v.stage == Stage.ALIGNMENT.value]
    if any(v.status is Status.FAILED for v in alignment):
        stage = Stage.ALIGNMENT
    elif any(v.status is Status.PROVEN for v in alignment):
        stage = Stage.ADD_ROUND
    else:
        stage = Stage.UNATTRIBUTED
    return {v.name: stage for v in failing}


def _candidates(current: int, target: int) -> List[int]:
    """Values between ``target`` and ``current``, nearest to the target first."""
    distance = abs(current - target)
    step = 1 if current > target else -1
    values = []
    for k in range(distance.bit_length() + 1):
        value = target + step * (distance - (distance >> k))
        if value != current and value not in values:
            values.append(value)
    return values


def _shrink_groups(ev: Evaluator) -> List[Tuple[Tuple[int, ...], int]]:
    targets = {"s": 0, "e": ev.fmt.bias, "m": 0}
    order = ("s1", "s2", "e1", "e2", "m1", "m2")
    groups = []
    if ev.drive is DriveMode.FREE:
        ties = frozenset().union(
            *(t for t in (input_ties(ev.directives[j].prop) for j in ev.assume_ids) if t is not None)
        )
        for name in order:
            i = FIELDS.index(name)
            positions = (i, i + 6) if name in ties else (i,)
            groups.append((positions, targets[name[0]]))
        for name in order:
            if name not in ties:
                groups.append(((FIELDS.index(name) + 6,), targets[name[0]]))
    else:
        groups = [((FIELDS.index(name),), targets[name[0]]) for name in order]
    return groups


def shrink(cex: Counterexample, ev: Evaluator) -> Counterexample:
    """
    Greedily move primary inputs toward small values (signs cleared, exponents to
    the bias, mantissas to zero) one field at a time while the stimulus stays
    admitted and the property keeps failing.
    """
    j = ev.position(cex.failed_property)

    def still_fails(fields: List[int]) -> bool:
        row = ev.row(tuple(fields))
        return ev.admitted(row) and ev.outcome(j, row) is Outcome.FAIL

    fields = list(cex.stimulus)
    changed = True
    while changed:
        changed = False
        for positions, target in _shrink_groups(ev):
            for value in _candidates(fields[positions[0]], target):
                trial = list(fields)
                for p in positions:
                    trial[p] = value
                if still_fails(trial):
                    logger.debug(f"Shrink {cex.failed_property}: field {positions[0]} -> {value}")
                    fields = trial
                    changed = True
                    break

    stimulus = tuple(fields)
    return Counterexample(
        failed_property=cex.failed_property,
        stage=cex.stage,
        stimulus=stimulus,
        trace=ev.trace(stimulus),
        shrunk=cex.shrunk or stimulus != cex.stimulus,
    )


def _config_echo(
    fmt: FloatFormat, faults: FaultConfig, check_mode: CheckMode, drive_mode: DriveMode, namespaces: Sequence[str]
) -> Dict[str, Any]:
    config: Dict[str, Any] = {
        "format": f"{fmt.exp_bits},{fmt.man_bits}",
        "faults": faults.ids(),
        "mode": check_mode.kind,
        "drive": drive_mode.value,
        "namespaces": list(namespaces),
    }
    if not check_mode.is_exhaustive:
        config["samples"] = check_mode.sample_count
        config["seed"] = check_mode.seed
    return config


def check(
    fmt: FloatFormat,
    faults: FaultConfig,
    program: Program,
    check_mode: Optional[CheckMode] = None,
    drive_mode: DriveMode = DriveMode.LOCKSTEP,
    settings: Optional[CheckerSettings] = None,
    namespaces: Sequence[str] = NAMESPACES,
) -> VerificationReport:
    """Evaluate every directive of ``program`` over the admitted stimulus space."""
    check_mode = check_mode or CheckMode.exhaustive()
    settings = settings or CheckerSettings()
    start = time.time()
    result, ev = scan(fmt, faults, program, check_mode, drive_mode, settings, namespaces)

    verdicts = []
    for j, d in enumerate(ev.directives):
        passed, failed, vacuous = result.counts[j]
        verdicts.append(PropertyVerdict(
            name=d.name,
            role=d.role,
            status=_status(d.role, passed, failed, check_mode),
            pass_count=passed,
            fail_count=failed,
            vacuous_count=vacuous,
            stage=property_stage(d),
        ))

    report = VerificationReport(
        config=_config_echo(fmt, faults, check_mode, drive_mode, ev.namespaces),
        exhaustive=check_mode.is_exhaustive,
        drive=drive_mode,
        stimuli_total=result.total,
        stimuli_admitted=result.admitted,
        verdicts=verdicts,
    )
    report.attribution = localize(report)

    for j, verdict in enumerate(report.verdicts):
        seen = set()
        for stimulus in result.failures[j]:
            cex = Counterexample(
                failed_property=verdict.name,
                stage=report.attribution.get(verdict.name, Stage.UNATTRIBUTED),
                stimulus=stimulus,
                trace=ev.trace(stimulus),
            )
            if settings.shrink:
                cex = shrink(cex, ev)
            if cex.stimulus in seen:
                continue
            seen.add(cex.stimulus)
            report.counterexamples.append(cex)
            if verdict.first_cex is None:
                verdict.first_cex = cex

    report.elapsed_seconds = round(time.time() - start, 3)
    summary = ", ".join(f"{v.name}={v.status.value}" for v in report.verdicts)
    logger.info(f"Check finished in {report.elapsed_seconds}s: {summary}")
    return report


# ---------------------------------------------------------------------------
# Serialization
# ---------------------------------------------------------------------------

def report_to_dict(report: VerificationReport) -> Dict[str, Any]:
    return {
        "config": report.config,
        "exhaustive": report.exhaustive,
        "stimuli": {"total": report.stimuli_total, "admitted": report.stimuli_admitted},
        "directives": [
            {
                "name": v.name,
                "role": v.role.value,
                "status": v.status.value,
                "pass": v.pass_count,
                "fail": v.fail_count,
                "vacuous": v.vacuous_count,
                "stage": v.stage,
            }
            for v in report.verdicts
        ],
        "cex": [
            {"property": c.failed_property, "stage": c.stage.value, "signals": c.signals()}
            for c in report.counterexamples
        ],
        "attribution": {name: stage.value for name, stage in report.attribution.items()},
        "elapsed_seconds": report.elapsed_seconds,
    }


def report_to_json(report: VerificationReport) -> str:
    return json.dumps(report_to_dict(report), indent=2) + "\n"


def render_text(report: VerificationReport) -> str:
    completeness = "exhaustive" if report.exhaustive else "sampled"
    lines = [
        f"format {report.config['format']}  {completeness}  {report.drive.value}  "
        f"faults: {', '.join(report.config['faults']) or 'none'}",
        f"stimuli: {report.stimuli_total} total, {report.stimuli_admitted} admitted",
    ]
    for v in report.verdicts:
        status = v.status.value
        if v.status is Status.PROVEN and not report.exhaustive:
            status = "proven (sampled)"
        lines.append(
            f"  {v.role.value:<6} {v.name:<40} {status:<16} "
            f"pass={v.pass_count} fail={v.fail_count} vacuous={v.vacuous_count}"
        )
    for c in report.counterexamples:
        signals = " ".join(f"{k}={v}" for k, v in c.signals().items())
        lines.append(f"  cex {c.failed_property} [{c.stage.value}]: {signals}")
    lines.append(f"elapsed {report.elapsed_seconds}s")
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# Fault campaign
# ---------------------------------------------------------------------------

class FaultRow(BaseModel):
    fault: str = Field(..., description="CLI identifier, or 'none' for the control row")
    code: str
    expected_stage: Stage
    detected: bool
    stage: Stage
    cex_count: int
    failed: List[str] = Field(default_factory=list)
    first_cex: Optional[Dict[str, str]] = None
    format: str
    exhaustive: bool
    escalated: bool = False


def _fault_row(kind: Optional[FaultKind], report: VerificationReport, escalated: bool) -> FaultRow:
    failed = [v.name for v in report.failed()]
    stages = set(report.attribution.values())
    return FaultRow(
        fault=kind.value if kind else "none",
        code=CATALOG[kind].code if kind else "-",
        expected_stage=CATALOG[kind].stage if kind else Stage.UNATTRIBUTED,
        detected=bool(failed),
        stage=stages.pop() if len(stages) == 1 else Stage.UNATTRIBUTED,
        cex_count=len(report.counterexamples),
        failed=failed,
        first_cex=report.counterexamples[0].signals() if report.counterexamples else None,
        format=report.config["format"],
        exhaustive=report.exhaustive,
        escalated=escalated,
    )


def fault_matrix(
    fmt: FloatFormat = DESK,
    settings: Optional[CheckerSettings] = None,
    kinds: Optional[Sequence[FaultKind]] = None,
    check_mode: Optional[CheckMode] = None,
    include_control: bool = True,
) -> List[FaultRow]:
    """
    Run the lemma and theorem corpora once per catalogued fault (plus a fault-free
    control row). A fault that is undetected at ``fmt`` is re-checked with sampled
    stimuli at the (5,10) format.
    """
    settings = settings or CheckerSettings()
    check_mode = check_mode or CheckMode.exhaustive()
    program = load_corpora(LOCALIZATION_CORPUS)
    targets: List[Optional[FaultKind]] = [None] if include_control else []
    targets.extend(kinds if kinds is not None else list(CATALOG))

    rows = []
    for kind in targets:
        faults = FaultConfig(enabled=frozenset([kind])) if kind else NO_FAULTS
        report = check(fmt, faults, program, check_mode, DriveMode.LOCKSTEP, settings)
        escalated = False
        if kind is not None and not report.failed() and fmt != HALF_WIDE:
            logger.info(f"Fault {kind.value} is undetected at {fmt}; escalating to {HALF_WIDE}")
            report = check(
                HALF_WIDE, faults, program,
                CheckMode.random(settings.escalation_samples, check_mode.seed),
                DriveMode.LOCKSTEP, settings,
            )
            escalated = True
        rows.append(_fault_row(kind, report, escalated))
    return rows
