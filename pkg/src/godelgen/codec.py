"""Bijective codes between well-typed terms and naturals.

Every (type, index class) carries its own code space.  Codes are laid
out with bound variables first (0..V-1), then the finite-instance
block, then the infinite constructors interleaved round-robin by tag:

    code = V + F + I*payload + tag

The payload mingles the explicit index arguments and the codes of the
infinite subterms, then folds finite subterms in by their radix.
"""

from __future__ import annotations

from dataclasses import dataclass

from .bignat import mingle_fold, unmingle_fold
from .errors import CodeOutOfRange, FuelExhausted, NoWellFoundedPlan, TermError
from .sigmodel import (
    Cardinality,
    Ctor,
    FiniteBlock,
    IndexClass,
    UNIT_CLASS,
    ValidatedSignature,
)
from .termrep import (
    EMPTY_COUNTS,
    Con,
    CountVector,
    Term,
    TermArg,
    Var,
    check_term,
)

DEFAULT_FUEL = 100_000

# enough for any base-case decode; a looping plan burns through it fast
_TRIAL_FUEL = 600


def class_label(type_name: str, cls: IndexClass) -> str:
    return type_name if cls is UNIT_CLASS else f"{type_name}[{cls.label}]"


@dataclass(frozen=True)
class ClassPlan:
    """Code-space layout for one (type, index class)."""

    type_name: str
    index_class: IndexClass
    cardinality: Cardinality
    finite: FiniteBlock
    tags: tuple[str, ...]  # infinite constructor names; position = tag

    @property
    def label(self) -> str:
        return class_label(self.type_name, self.index_class)


@dataclass(frozen=True, eq=False)
class CodecPlan:
    """Tag assignment for every class of a validated signature."""

    vsig: ValidatedSignature
    classes: dict[tuple[str, IndexClass], ClassPlan]

    def class_plan(self, type_name: str, index: int | None) -> ClassPlan:
        return self.classes[(type_name, self.vsig.class_of(type_name, index))]


def build_plan(
    vsig: ValidatedSignature,
    tag_orders: dict[tuple[str, IndexClass], tuple[str, ...]] | None = None,
) -> CodecPlan:
    """Assemble a plan with explicitly chosen tag orders.

    Testing hook: no termination trials are run, so the result may not
    decode every code.  Classes absent from tag_orders use declaration
    order.  Use assign_tags for a checked plan.
    """
    classes: dict[tuple[str, IndexClass], ClassPlan] = {}
    for decl in vsig.decls:
        for cls in vsig.classes(decl.name):
            block, infinite = vsig.ctors_for_class(decl.name, cls)
            names = tuple(c.name for c in infinite)
            key = (decl.name, cls)
            if tag_orders and key in tag_orders:
                order = tuple(tag_orders[key])
                if sorted(order) != sorted(names):
                    raise ValueError(
                        f"tag order for {class_label(decl.name, cls)}"
                        f" must be a permutation of {names}"
                    )
                names = order
            classes[key] = ClassPlan(
                decl.name, cls, vsig.cardinality(decl.name, cls), block, names
            )
    return CodecPlan(vsig, classes)


def _rep_indices(vsig: ValidatedSignature, type_name: str, cls: IndexClass):
    for c, reps in vsig.class_reps(type_name):
        if c == cls:
            return reps
    return []


def _trial_codes(card: Cardinality) -> list[int]:
    if card.is_infinite:
        return [0, 1]
    if card.is_empty:
        return []
    return [c for c in (0, 1) if c < card.count]


def _first_failing_class(
    plan: CodecPlan, trial_fuel: int, skip: set[tuple[str, IndexClass]]
) -> tuple[str, IndexClass] | None:
    vsig = plan.vsig
    for decl in vsig.decls:
        for cls in vsig.classes(decl.name):
            key = (decl.name, cls)
            if key in skip:
                continue
            card = vsig.cardinality(decl.name, cls)
            for index in _rep_indices(vsig, decl.name, cls):
                for code in _trial_codes(card):
                    try:
                        decode(plan, decl.name, index, EMPTY_COUNTS, code, trial_fuel)
                    except (FuelExhausted, RecursionError):
                        return key
    return None


def _next_permutation(seq: list[str], pos: dict[str, int]) -> bool:
    # step to the next permutation in declaration order; False on wrap
    i = len(seq) - 2
    while i >= 0 and pos[seq[i]] >= pos[seq[i + 1]]:
        i -= 1
    if i < 0:
        seq.reverse()
        return False
    j = len(seq) - 1
    while pos[seq[j]] <= pos[seq[i]]:
        j -= 1
    seq[i], seq[j] = seq[j], seq[i]
    seq[i + 1 :] = reversed(seq[i + 1 :])
    return True


def assign_tags(vsig: ValidatedSignature, trial_fuel: int = _TRIAL_FUEL) -> CodecPlan:
    """Choose a tag order whose decode terminates on codes 0 and 1.

    Starts from declaration order; whenever the trial decode of a class
    runs out of fuel, that class's tags advance to the next permutation
    and the trials restart.  A class that fails under every permutation
    makes the whole signature unencodable under this schema.
    """
    base: dict[tuple[str, IndexClass], tuple[str, ...]] = {}
    order: dict[tuple[str, IndexClass], tuple[str, ...]] = {}
    pos: dict[tuple[str, IndexClass], dict[str, int]] = {}
    for decl in vsig.decls:
        for cls in vsig.classes(decl.name):
            _, infinite = vsig.ctors_for_class(decl.name, cls)
            names = tuple(c.name for c in infinite)
            key = (decl.name, cls)
            base[key] = names
            order[key] = names
            pos[key] = {name: k for k, name in enumerate(names)}
    failed: list[tuple[str, IndexClass]] = []
    while True:
        plan = build_plan(vsig, order)
        offender = _first_failing_class(plan, trial_fuel, set(failed))
        if offender is None:
            if failed:
                raise NoWellFoundedPlan([class_label(t, c) for t, c in failed])
            return plan
        current = list(order[offender])
        if _next_permutation(current, pos[offender]):
            order[offender] = tuple(current)
        else:
            failed.append(offender)
            order[offender] = base[offender]


# ------------------------------------------------------------------ encode


def _slot_cardinality(vsig: ValidatedSignature, type_name: str) -> Cardinality:
    # uniformity: every class of a family shares one cardinality
    return vsig.cardinality(type_name, vsig.classes(type_name)[0])


def encode(
    plan: CodecPlan,
    type_name: str,
    index: int | None,
    counts: CountVector,
    term: Term,
) -> int:
    """Code of a well-typed term under the given free-variable counts."""
    vsig = plan.vsig
    if isinstance(term, Var):
        if (term.type_name, term.index) != (type_name, index):
            raise TermError(
                f"variable of type {term.type_name} does not fit {type_name}"
            )
        v = counts.get(type_name, index)
        if not 0 <= term.level < v:
            raise TermError(
                f"variable level {term.level} out of scope ({v} in context)"
            )
        return term.level
    ctor = vsig.sig.ctors.get(term.ctor)
    if ctor is None or ctor.family != type_name:
        raise TermError(f"constructor {term.ctor!r} does not construct {type_name}")
    cp = plan.class_plan(type_name, index)
    v = counts.get(type_name, index)
    entry = cp.finite.entry_for(term.ctor)
    if entry is not None:
        binding = vsig.match_index(ctor, index)
        offset = 0
        for (arg, ta), radix in zip(zip(ctor.args, term.args), entry.radices):
            sub_ix = vsig.eval_index(arg.type_name, arg.index, binding)
            offset = offset * radix + encode(
                plan, arg.type_name, sub_ix, counts, ta.body
            )
        return v + entry.base + offset
    if term.ctor not in cp.tags:
        raise TermError(f"constructor {term.ctor} cannot construct {cp.label}")
    tag = cp.tags.index(term.ctor)
    binding = vsig.match_index(ctor, index)
    if len(term.index_args) != len(ctor.pi_args):
        raise TermError(f"constructor {term.ctor} index argument count mismatch")
    if len(term.args) != len(ctor.args):
        raise TermError(f"constructor {term.ctor} argument count mismatch")
    slots: list[int] = []
    for (var, _ty, _ix), value in zip(ctor.pi_args, term.index_args):
        binding[var] = value
        slots.append(value)
    fin_digits: list[tuple[int, int]] = []
    for arg, ta in zip(ctor.args, term.args):
        sub_counts = counts
        for btype, bix in arg.binders:
            sub_counts = sub_counts.extend(
                btype, vsig.eval_index(btype, bix, binding)
            )
        sub_ix = vsig.eval_index(arg.type_name, arg.index, binding)
        code = encode(plan, arg.type_name, sub_ix, sub_counts, ta.body)
        card = _slot_cardinality(vsig, arg.type_name)
        if card.is_infinite:
            slots.append(code)
        else:
            fin_digits.append((card.count, code))
    payload = mingle_fold(slots)
    for c_j, e_j in fin_digits:
        payload = payload * c_j + e_j
    return v + cp.finite.total + len(cp.tags) * payload + tag


def encode_closed(
    plan: CodecPlan, type_name: str, index: int | None, term: Term
) -> int:
    return encode(plan, type_name, index, EMPTY_COUNTS, term)


# ------------------------------------------------------------------ decode


def decode(
    plan: CodecPlan,
    type_name: str,
    index: int | None,
    counts: CountVector,
    code: int,
    fuel: int = DEFAULT_FUEL,
) -> Term:
    """Term whose code this is, or CodeOutOfRange for finite classes.

    Fuel is debited once per decode step; running out signals a plan
    whose decode is not well founded at this code.
    """
    cell = [fuel]
    return _decode(plan, type_name, index, counts, code, cell)


def _decode(
    plan: CodecPlan,
    type_name: str,
    index: int | None,
    counts: CountVector,
    code: int,
    cell: list[int],
) -> Term:
    if cell[0] <= 0:
        raise FuelExhausted(
            f"decode ran out of fuel at {type_name} code {code};"
            " raise the fuel, or the plan is not well founded here"
        )
    cell[0] -= 1
    if code < 0:
        raise CodeOutOfRange(f"negative code {code}")
    vsig = plan.vsig
    cp = plan.class_plan(type_name, index)
    v = counts.get(type_name, index)
    if code < v:
        return Var(type_name, index, code)
    c = code - v
    if c < cp.finite.total:
        entry, offset = cp.finite.entry_at(c)
        ctor = vsig.sig.ctors[entry.ctor_name]
        digits: list[int] = []
        for radix in reversed(entry.radices):
            offset, d = divmod(offset, radix)
            digits.append(d)
        digits.reverse()
        binding = vsig.match_index(ctor, index)
        args = []
        for arg, d in zip(ctor.args, digits):
            sub_ix = vsig.eval_index(arg.type_name, arg.index, binding)
            args.append(
                TermArg(0, _decode(plan, arg.type_name, sub_ix, counts, d, cell))
            )
        return Con(entry.ctor_name, (), tuple(args))
    if not cp.tags:
        limit = v + cp.finite.total
        raise CodeOutOfRange(
            f"code {code} out of range for {cp.label} (codes 0..{limit - 1})"
            if limit
            else f"code {code} out of range for empty class {cp.label}"
        )
    q, tag = divmod(c - cp.finite.total, len(cp.tags))
    ctor = vsig.sig.ctors[cp.tags[tag]]
    slot_kinds: list[int] = []  # finite radix, or 0 for an infinite slot
    for arg in ctor.args:
        card = _slot_cardinality(vsig, arg.type_name)
        slot_kinds.append(0 if card.is_infinite else card.count)
    fin_rev: list[int] = []
    for radix in reversed(slot_kinds):
        if radix:
            q, e = divmod(q, radix)
            fin_rev.append(e)
    n_pi = len(ctor.pi_args)
    n_slots = n_pi + slot_kinds.count(0)
    values = unmingle_fold(q, n_slots)
    binding = vsig.match_index(ctor, index)
    for (var, _ty, _ix), value in zip(ctor.pi_args, values):
        binding[var] = value
    inf_vals = iter(values[n_pi:])
    fin_vals = iter(reversed(fin_rev))
    args = []
    for arg, radix in zip(ctor.args, slot_kinds):
        sub_code = next(fin_vals) if radix else next(inf_vals)
        sub_counts = counts
        for btype, bix in arg.binders:
            sub_counts = sub_counts.extend(
                btype, vsig.eval_index(btype, bix, binding)
            )
        sub_ix = vsig.eval_index(arg.type_name, arg.index, binding)
        args.append(
            TermArg(
                len(arg.binders),
                _decode(plan, arg.type_name, sub_ix, sub_counts, sub_code, cell),
            )
        )
    return Con(ctor.name, tuple(values[:n_pi]), tuple(args))


def decode_closed(
    plan: CodecPlan,
    type_name: str,
    index: int | None,
    code: int,
    fuel: int = DEFAULT_FUEL,
) -> Term:
    return decode(plan, type_name, index, EMPTY_COUNTS, code, fuel)


# ----------------------------------------------------------------- compare


def compare(
    plan: CodecPlan, type_name: str, index: int | None, t1: Term, t2: Term
) -> int:
    """Three-way order of two closed terms: -1, 0, or 1.

    Zero exactly when the terms are alpha-equivalent.
    """
    check_term(plan.vsig, type_name, index, EMPTY_COUNTS, t1)
    check_term(plan.vsig, type_name, index, EMPTY_COUNTS, t2)
    a = encode_closed(plan, type_name, index, t1)
    b = encode_closed(plan, type_name, index, t2)
    return (a > b) - (a < b)
