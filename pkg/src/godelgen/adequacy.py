"""Bounded verification that a codec plan really is a bijection.

Four properties per (type, index class), checked against an
independent structural enumerator rather than the codec itself:
total (every term encodes), unique (alpha-variants and reprints
encode alike), onto (every code decodes and round-trips), and
one-to-one (no two terms share a code).
"""

from __future__ import annotations

import threading
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

from ._stack import STACK_BYTES, call_with_deep_stack

from .codec import DEFAULT_FUEL, CodecPlan, decode, encode
from .errors import FuelExhausted, TermError
from .sigmodel import Ctor, IndexClass, ValidatedSignature
from .termrep import (
    EMPTY_COUNTS,
    Con,
    CountVector,
    Term,
    TermArg,
    Var,
    check_term,
    parse_term,
    print_term,
)

DEFAULT_MAX_SIZE = 6
DEFAULT_MAX_CODE = 10_000


@dataclass(frozen=True)
class EnumBudget:
    """Bounds for the verification sweeps.

    per_class maps (type name, class label) pairs such as ("nat", "-")
    or ("term", "z") to (max_size, max_code) overrides for classes
    that need tighter or wider sweeps than the defaults.
    """

    max_size: int = DEFAULT_MAX_SIZE
    max_code: int = DEFAULT_MAX_CODE
    per_class: tuple[tuple[tuple[str, str], tuple[int, int]], ...] = ()

    def __post_init__(self) -> None:
        if self.max_size < 1:
            raise ValueError("max_size must be at least 1")
        if self.max_code < 2:
            raise ValueError("max_code must be at least 2 (codes 0 and 1)")
        for (_key, (size, code)) in self.per_class:
            if size < 1 or code < 2:
                raise ValueError("per_class overrides must keep max_size >= 1"
                                 " and max_code >= 2")

    @staticmethod
    def with_overrides(
        max_size: int = DEFAULT_MAX_SIZE,
        max_code: int = DEFAULT_MAX_CODE,
        per_class: dict[tuple[str, str], tuple[int, int]] | None = None,
    ) -> "EnumBudget":
        items = tuple(sorted((per_class or {}).items()))
        return EnumBudget(max_size, max_code, items)

    def size_for(self, type_name: str, label: str) -> int:
        for key, (size, _code) in self.per_class:
            if key == (type_name, label):
                return size
        return self.max_size

    def code_for(self, type_name: str, label: str) -> int:
        for key, (_size, code) in self.per_class:
            if key == (type_name, label):
                return code
        return self.max_code


@dataclass(frozen=True)
class Verdict:
    passed: bool
    checked: int
    counterexample: str | None = None


@dataclass(frozen=True)
class ClassReport:
    type_name: str
    index_class: str
    total: Verdict
    unique: Verdict
    onto: Verdict
    one_to_one: Verdict

    @property
    def passed(self) -> bool:
        return (self.total.passed and self.unique.passed
                and self.onto.passed and self.one_to_one.passed)

    @property
    def terms_checked(self) -> int:
        return self.total.checked

    @property
    def codes_checked(self) -> int:
        return self.onto.checked

    @property
    def counterexample(self) -> str | None:
        for verdict in (self.total, self.unique, self.onto, self.one_to_one):
            if not verdict.passed:
                return verdict.counterexample
        return None


@dataclass(frozen=True)
class AdequacyReport:
    classes: tuple[ClassReport, ...]
    elapsed: float = field(compare=False, default=0.0)

    @property
    def passed(self) -> bool:
        return all(row.passed for row in self.classes)

    def json_dict(self, signature: str) -> dict:
        rows = []
        for row in self.classes:
            entry = {
                "type": row.type_name,
                "index_class": row.index_class,
                "total": row.total.passed,
                "unique": row.unique.passed,
                "onto": row.onto.passed,
                "one_to_one": row.one_to_one.passed,
                "terms_checked": row.terms_checked,
                "codes_checked": row.codes_checked,
            }
            if row.counterexample is not None:
                entry["counterexample"] = row.counterexample
            rows.append(entry)
        return {"signature": signature, "classes": rows}


# ------------------------------------------------------------- enumerator


def enumerate_terms(
    vsig: ValidatedSignature,
    type_name: str,
    index: int | None,
    max_size: int,
    counts: CountVector = EMPTY_COUNTS,
) -> list[Term]:
    """All well-typed terms of at most max_size nodes, smallest first.

    Purely structural: picks a constructor and distributes the
    remaining size over its slots, so it never consults the codec.
    """
    memo: dict = {}
    out: list[Term] = []
    for size in range(1, max_size + 1):
        out.extend(_terms_at(vsig, type_name, index, size, counts, memo))
    return out


def _terms_at(vsig, type_name, index, size, counts, memo):
    key = (type_name, index, size, counts)
    found = memo.get(key)
    if found is not None:
        return found
    results: list[Term] = []
    if size == 1:
        for level in range(counts.get(type_name, index)):
            results.append(Var(type_name, index, level))
    decl = vsig.decl(type_name)
    for ctor in decl.ctors:
        if not _applicable(vsig, ctor, index):
            continue
        binding = vsig.match_index(ctor, index)
        for pi_values, args in _fill_pis(
            vsig, ctor, 0, size - 1, binding, counts, memo
        ):
            results.append(Con(ctor.name, pi_values, args))
    memo[key] = results
    return results


def _applicable(vsig: ValidatedSignature, ctor: Ctor, index: int | None) -> bool:
    pat = vsig.pattern(ctor.name)
    if pat[0] == "unit":
        return index is None
    if pat[0] == "zero":
        return index == 0
    if pat[0] == "succ":
        return index is not None and index > 0
    if pat[0] == "const":
        return index == pat[1]
    return True  # var pattern


def _fill_pis(vsig, ctor, i, budget, binding, counts, memo):
    if i == len(ctor.pi_args):
        for args in _fill_args(vsig, ctor, 0, budget, binding, counts, memo):
            yield (), args
        return
    var = ctor.pi_args[i][0]
    min_rest = (len(ctor.pi_args) - i - 1) + len(ctor.args)
    for value in range(budget - min_rest):  # a value v occupies v + 1
        binding[var] = value
        for pis, args in _fill_pis(
            vsig, ctor, i + 1, budget - value - 1, binding, counts, memo
        ):
            yield (value,) + pis, args
    binding.pop(var, None)


def _fill_args(vsig, ctor, j, budget, binding, counts, memo):
    if j == len(ctor.args):
        if budget == 0:
            yield ()
        return
    arg = ctor.args[j]
    sub_counts = counts
    for btype, bix in arg.binders:
        sub_counts = sub_counts.extend(btype, vsig.eval_index(btype, bix, binding))
    sub_ix = vsig.eval_index(arg.type_name, arg.index, binding)
    min_rest = len(ctor.args) - j - 1
    for size in range(1, budget - min_rest + 1):
        subs = _terms_at(vsig, arg.type_name, sub_ix, size, sub_counts, memo)
        if not subs:
            continue
        for rest in _fill_args(vsig, ctor, j + 1, budget - size, binding, counts, memo):
            for sub in subs:
                yield (TermArg(len(arg.binders), sub),) + rest


# -------------------------------------------------------------- verifiers


def _variant_namer(vsig: ValidatedSignature, stem: str):
    taken = set(vsig.sig.ctors) | set(vsig.sig.abbrevs) | set(vsig.sig.by_name)

    def name(_type: str, _index: int | None, _level: int, ordinal: int) -> str:
        candidate = f"{stem}{ordinal}"
        while candidate in taken:
            candidate += "'"
        return candidate

    return name


def verify_total_unique(
    plan: CodecPlan,
    type_name: str,
    index: int | None,
    budget: EnumBudget,
) -> tuple[Verdict, Verdict]:
    """Every enumerated term encodes, and every rendering of it agrees."""
    vsig = plan.vsig
    label = vsig.class_of(type_name, index).label
    terms = enumerate_terms(vsig, type_name, index, budget.size_for(type_name, label))
    namers = [None, _variant_namer(vsig, "u"), _variant_namer(vsig, "w")]
    checked = 0
    for term in terms:
        try:
            code = encode(plan, type_name, index, EMPTY_COUNTS, term)
        except TermError as exc:
            shown = print_term(vsig, term, index=index)
            return (
                Verdict(False, checked, f"term {shown!r} failed to encode: {exc}"),
                Verdict(True, checked),
            )
        for namer in namers:
            shown = print_term(vsig, term, index=index, namer=namer)
            reparsed = parse_term(vsig, type_name, index, shown)
            recoded = encode(plan, type_name, index, EMPTY_COUNTS, reparsed)
            if recoded != code:
                return (
                    Verdict(True, checked),
                    Verdict(
                        False,
                        checked,
                        f"variant {shown!r} encoded to {recoded}, not {code}",
                    ),
                )
        checked += 1
    return Verdict(True, checked), Verdict(True, checked)


def _onto_range(plan: CodecPlan, type_name: str, index: int | None, top: int) -> int:
    card = plan.class_plan(type_name, index).cardinality
    if card.is_infinite:
        return top
    return min(card.count, top)


def _check_code(plan, type_name, index, code):
    try:
        term = decode(plan, type_name, index, EMPTY_COUNTS, code, DEFAULT_FUEL)
    except (FuelExhausted, RecursionError) as exc:
        return f"code {code} did not decode: {type(exc).__name__}: {exc}"
    try:
        check_term(plan.vsig, type_name, index, EMPTY_COUNTS, term)
    except TermError as exc:
        return f"code {code} decoded to an ill-typed term: {exc}"
    back = encode(plan, type_name, index, EMPTY_COUNTS, term)
    if back != code:
        return f"code {code} decoded to a term that re-encodes to {back}"
    return None


def verify_onto(
    plan: CodecPlan,
    type_name: str,
    index: int | None,
    budget: EnumBudget,
    workers: int = 1,
) -> Verdict:
    """Every code up to the budget decodes, checks, and round-trips.

    The code range may be partitioned across worker threads; the
    reported verdict is the same either way (first failing code wins).
    Runs with deep recursion headroom so a non-terminating decode is
    reported as fuel exhaustion rather than a stack overflow.
    """
    return call_with_deep_stack(_verify_onto, plan, type_name, index, budget, workers)


def _verify_onto(plan, type_name, index, budget, workers):
    vsig = plan.vsig
    label = vsig.class_of(type_name, index).label
    top = _onto_range(plan, type_name, index, budget.code_for(type_name, label))
    if workers <= 1:
        for code in range(top):
            problem = _check_code(plan, type_name, index, code)
            if problem is not None:
                return Verdict(False, code, problem)
        return Verdict(True, top)
    chunks = [range(start, min(start + 256, top)) for start in range(0, top, 256)]

    def sweep(chunk):
        for code in chunk:
            problem = _check_code(plan, type_name, index, code)
            if problem is not None:
                return code, problem
        return None

    # pool threads also need big stacks: they decode at the raised limit
    old_size = threading.stack_size(STACK_BYTES)
    try:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            for outcome in pool.map(sweep, chunks):
                if outcome is not None:
                    return Verdict(False, outcome[0], outcome[1])
    finally:
        threading.stack_size(old_size)
    return Verdict(True, top)


def verify_one_to_one(
    plan: CodecPlan,
    type_name: str,
    index: int | None,
    budget: EnumBudget,
) -> Verdict:
    """Distinct terms take distinct codes, and decode inverts encode."""
    return call_with_deep_stack(_verify_one_to_one, plan, type_name, index, budget)


def _verify_one_to_one(plan, type_name, index, budget):
    vsig = plan.vsig
    label = vsig.class_of(type_name, index).label
    terms = enumerate_terms(vsig, type_name, index, budget.size_for(type_name, label))
    seen: dict[int, Term] = {}
    checked = 0
    for term in terms:
        code = encode(plan, type_name, index, EMPTY_COUNTS, term)
        clash = seen.get(code)
        if clash is not None:
            a = print_term(vsig, clash, index=index)
            b = print_term(vsig, term, index=index)
            return Verdict(False, checked, f"terms {a!r} and {b!r} share code {code}")
        seen[code] = term
        try:
            back = decode(plan, type_name, index, EMPTY_COUNTS, code, DEFAULT_FUEL)
        except (FuelExhausted, RecursionError) as exc:
            shown = print_term(vsig, term, index=index)
            return Verdict(
                False, checked,
                f"code {code} of term {shown!r} did not decode back:"
                f" {type(exc).__name__}",
            )
        if back != term:
            shown = print_term(vsig, term, index=index)
            return Verdict(False, checked, f"term {shown!r} did not round-trip")
        checked += 1
    return Verdict(True, checked)


def _merge(a: Verdict, b: Verdict) -> Verdict:
    if not a.passed:
        return a
    if not b.passed:
        return Verdict(False, a.checked + b.checked, b.counterexample)
    return Verdict(True, a.checked + b.checked)


def verify_class(
    plan: CodecPlan,
    type_name: str,
    cls: IndexClass,
    budget: EnumBudget,
    workers: int = 1,
) -> ClassReport:
    """Run all four verifiers at every representative index of a class."""
    vsig = plan.vsig
    reps = [r for c, rs in vsig.class_reps(type_name) if c == cls for r in rs]
    total = unique = onto = one = Verdict(True, 0)
    for index in reps:
        t, u = verify_total_unique(plan, type_name, index, budget)
        total, unique = _merge(total, t), _merge(unique, u)
        onto = _merge(onto, verify_onto(plan, type_name, index, budget, workers))
        one = _merge(one, verify_one_to_one(plan, type_name, index, budget))
    return ClassReport(type_name, cls.label, total, unique, onto, one)


def verify_all(
    plan: CodecPlan, budget: EnumBudget | None = None, workers: int = 1
) -> AdequacyReport:
    """Verify every class of every type; deterministic given the budget."""
    if budget is None:
        budget = EnumBudget()
    vsig = plan.vsig
    started = time.perf_counter()
    rows = []
    for decl in vsig.decls:
        for cls in vsig.classes(decl.name):
            rows.append(verify_class(plan, decl.name, cls, budget, workers))
    return AdequacyReport(tuple(rows), time.perf_counter() - started)
