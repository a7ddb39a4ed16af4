"""Terms over a validated signature.

Bound variables are de Bruijn levels: a variable records the type and
concrete index it was introduced at, plus how many variables of that
(type, index) were already in scope at its binding site.  Levels are
fixed at binding time and never shifted, so alpha-equivalent terms are
structurally identical.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import SigSyntaxError, TermError
from .sigmodel import (
    Ctor,
    SApp,
    SBind,
    SExpr,
    SName,
    SNum,
    ValidatedSignature,
    IxCon,
    IxNum,
    IxVar,
    parse_term_text,
)


@dataclass(frozen=True)
class Var:
    type_name: str
    index: int | None
    level: int


@dataclass(frozen=True)
class TermArg:
    """One constructor argument: the body with its bound-variable count."""

    binder_count: int
    body: "Term"


@dataclass(frozen=True)
class Con:
    ctor: str
    index_args: tuple[int, ...] = ()
    args: tuple[TermArg, ...] = ()


Term = Var | Con


class CountVector:
    """Immutable map from (type, concrete index) to a variable count."""

    __slots__ = ("_counts", "_hash")

    def __init__(self, counts: dict | None = None):
        self._counts = dict(counts) if counts else {}
        self._hash = hash(frozenset(self._counts.items()))

    def get(self, type_name: str, index: int | None) -> int:
        return self._counts.get((type_name, index), 0)

    def extend(self, type_name: str, index: int | None) -> "CountVector":
        new = dict(self._counts)
        key = (type_name, index)
        new[key] = new.get(key, 0) + 1
        return CountVector(new)

    def items(self):
        return self._counts.items()

    def __eq__(self, other) -> bool:
        return isinstance(other, CountVector) and self._counts == other._counts

    def __hash__(self) -> int:
        return self._hash

    def __bool__(self) -> bool:
        return bool(self._counts)

    def __repr__(self) -> str:
        inner = ", ".join(
            f"{t}[{i if i is not None else '-'}]: {c}"
            for (t, i), c in sorted(self._counts.items(), key=repr)
        )
        return f"CountVector({{{inner}}})"


EMPTY_COUNTS = CountVector()


def _applicable_at(vsig: ValidatedSignature, ctor: Ctor, index: int | None) -> bool:
    pat = vsig.pattern(ctor.name)
    if pat[0] == "unit":
        return index is None
    if pat[0] == "zero":
        return index == 0
    if pat[0] == "succ":
        return index is not None and index >= 1
    if pat[0] == "var":
        return index is not None
    if pat[0] == "const":
        return index == pat[1]
    return False


def _surface_to_index(vsig: ValidatedSignature, e: SExpr):
    if isinstance(e, SNum):
        return IxNum(e.value)
    if isinstance(e, SName):
        return IxCon(e.name)
    if isinstance(e, SApp) and isinstance(e.fn, SName):
        return IxCon(e.fn.name, tuple(_surface_to_index(vsig, a) for a in e.args))
    raise TermError("invalid index value")


def _index_value(vsig: ValidatedSignature, e: SExpr, ixtype: str) -> int:
    try:
        return vsig._eval(ixtype, _surface_to_index(vsig, e), {})
    except (KeyError, ValueError) as exc:
        raise TermError(f"invalid {ixtype} index value: {exc}") from None


def parse_term(
    vsig: ValidatedSignature, type_name: str, index: int | None, text: str
) -> Term:
    """Parse closed term text against an expected type and index."""
    _check_target(vsig, type_name, index)
    try:
        surface = parse_term_text(text)
    except SigSyntaxError as exc:
        raise TermError(f"term syntax error: {exc}") from None
    return _elab(vsig, surface, type_name, index, {}, EMPTY_COUNTS)


def _check_target(vsig: ValidatedSignature, type_name: str, index: int | None) -> None:
    if not vsig.has_type(type_name):
        raise TermError(f"unknown type {type_name!r}")
    try:
        vsig.class_of(type_name, index)
    except ValueError as exc:
        raise TermError(str(exc)) from None


def _describe(type_name: str, index: int | None) -> str:
    return type_name if index is None else f"{type_name} {index}"


def _elab(
    vsig: ValidatedSignature,
    e: SExpr,
    want_type: str,
    want_index: int | None,
    scope: dict[str, tuple[str, int | None, int]],
    counts: CountVector,
) -> Term:
    if isinstance(e, SName):
        if e.name in scope:
            t, ix, level = scope[e.name]
            if (t, ix) != (want_type, want_index):
                raise TermError(
                    f"variable {e.name} has type {_describe(t, ix)},"
                    f" expected {_describe(want_type, want_index)}"
                )
            return Var(t, ix, level)
        if e.name in vsig.sig.abbrevs:
            ab = vsig.sig.abbrevs[e.name]
            ab_index = vsig.eval_index(ab.type_name, ab.index, {})
            if (ab.type_name, ab_index) != (want_type, want_index):
                raise TermError(
                    f"abbreviation {e.name} has type {_describe(ab.type_name, ab_index)},"
                    f" expected {_describe(want_type, want_index)}"
                )
            # abbreviations expand where they occur; their bodies are
            # closed, so the current scope never leaks in
            return _elab(vsig, ab.body, want_type, want_index, {}, counts)
        if e.name in vsig.sig.ctors:
            return _elab_con(vsig, vsig.sig.ctors[e.name], (), want_type, want_index, scope, counts)
        raise TermError(f"unbound name {e.name!r}")
    if isinstance(e, SNum):
        if str(e.value) in vsig.sig.ctors:
            return _elab_con(
                vsig, vsig.sig.ctors[str(e.value)], (), want_type, want_index, scope, counts
            )
        lit = vsig.analysis.nat_literal
        if lit is not None and want_type == lit.type_name:
            term: Term = Con("z")
            for _ in range(e.value):
                term = Con("s", (), (TermArg(0, term),))
            return term
        raise TermError(
            f"numeral {e.value} is only a term when the signature declares"
            " nat with z and s"
        )
    if isinstance(e, SApp):
        if not isinstance(e.fn, (SName, SNum)):
            raise TermError("only constructors can be applied")
        fname = e.fn.name if isinstance(e.fn, SName) else str(e.fn.value)
        if fname in scope:
            raise TermError(f"variable {fname} cannot be applied")
        if fname in vsig.sig.abbrevs:
            raise TermError(f"abbreviation {fname} cannot be applied")
        if fname not in vsig.sig.ctors:
            raise TermError(f"unbound name {fname!r}")
        return _elab_con(
            vsig, vsig.sig.ctors[fname], e.args, want_type, want_index, scope, counts
        )
    if isinstance(e, SBind):
        raise TermError(f"binder [{e.var}] is only allowed in constructor arguments")
    raise TermError("invalid term")


def _elab_con(
    vsig: ValidatedSignature,
    ctor: Ctor,
    surface_args: tuple[SExpr, ...],
    want_type: str,
    want_index: int | None,
    scope: dict,
    counts: CountVector,
) -> Term:
    if ctor.family != want_type:
        raise TermError(
            f"constructor {ctor.name} constructs {ctor.family},"
            f" expected {_describe(want_type, want_index)}"
        )
    if not _applicable_at(vsig, ctor, want_index):
        raise TermError(
            f"constructor {ctor.name} cannot construct"
            f" {_describe(want_type, want_index)}"
        )
    n_pi = len(ctor.pi_args)
    if len(surface_args) != n_pi + len(ctor.args):
        raise TermError(
            f"constructor {ctor.name} expects {n_pi + len(ctor.args)}"
            f" argument(s), got {len(surface_args)}"
        )
    binding = vsig.match_index(ctor, want_index)
    index_values = []
    for (var, ptype, _), se in zip(ctor.pi_args, surface_args[:n_pi]):
        value = _index_value(vsig, se, ptype)
        binding[var] = value
        index_values.append(value)

    args = []
    for arg, se in zip(ctor.args, surface_args[n_pi:]):
        inner_scope = dict(scope)
        inner_counts = counts
        for bt, bix in arg.binders:
            if not isinstance(se, SBind):
                raise TermError(
                    f"argument of {ctor.name} must bind {len(arg.binders)}"
                    f" variable(s) with [name]"
                )
            b_index = vsig.eval_index(bt, bix, binding)
            level = inner_counts.get(bt, b_index)
            inner_scope[se.var] = (bt, b_index, level)
            inner_counts = inner_counts.extend(bt, b_index)
            se = se.body
        if isinstance(se, SBind):
            raise TermError(
                f"argument of {ctor.name} binds only {len(arg.binders)} variable(s)"
            )
        body = _elab(
            vsig,
            se,
            arg.type_name,
            vsig.eval_index(arg.type_name, arg.index, binding),
            inner_scope,
            inner_counts,
        )
        args.append(TermArg(len(arg.binders), body))
    return Con(ctor.name, tuple(index_values), tuple(args))


# ----------------------------------------------------------------------
# Printing.

_LETTERS = "xyzuvwpqrabcdefghijklmnost"


class _Namer:
    """Default binder naming: one letter per distinct (type, index),
    in order of first appearance, suffixed with the variable's level."""

    def __init__(self, vsig: ValidatedSignature):
        self.vsig = vsig
        self.letters: dict[tuple[str, int | None], str] = {}

    def __call__(self, type_name: str, index: int | None, level: int, ordinal: int) -> str:
        key = (type_name, index)
        if key not in self.letters:
            i = len(self.letters)
            letter = _LETTERS[i] if i < len(_LETTERS) else f"x{i}_"
            self.letters[key] = letter
        name = f"{self.letters[key]}{level}"
        while name in self.vsig.sig.ctors or name in self.vsig.sig.by_name or name in self.vsig.sig.abbrevs:
            name += "'"
        return name


_INFER = object()


def print_term(vsig: ValidatedSignature, term: Term, index=_INFER, namer=None) -> str:
    """Render a term as parseable text.

    The concrete index steers binder bookkeeping; when omitted it is
    recovered from the head constructor's pattern, which fails for heads
    whose pattern is a bare variable (pass it explicitly then).

    ``namer(type, index, level, ordinal)`` supplies binder names; the
    default picks a letter per (type, index) and appends the level, so
    printing is deterministic and injective on alpha-classes.
    """
    if namer is None:
        namer = _Namer(vsig)
    if index is _INFER:
        index = _infer_index(vsig, term)
    state = {"ordinal": 0}

    def fresh(t, ix, level):
        name = namer(t, ix, level, state["ordinal"])
        state["ordinal"] += 1
        return name

    def index_value_text(ixtype: str, value: int) -> str:
        lit = vsig.analysis.nat_literal
        if lit is not None and ixtype == lit.type_name:
            return str(value)
        from .sigmodel import _nat_shape

        shape = _nat_shape(vsig.sig.by_name[ixtype])
        text = shape.zero
        for _ in range(value):
            text = f"{shape.succ} ({text})" if " " in text else f"{shape.succ} {text}"
        return f"({text})" if " " in text else text

    def render(t: Term, index, env: dict, counts: CountVector) -> str:
        if isinstance(t, Var):
            name = env.get((t.type_name, t.index, t.level))
            if name is None:
                # free variable of an open term; name it like its binder would
                name = fresh(t.type_name, t.index, t.level)
                env[(t.type_name, t.index, t.level)] = name
            return name
        ctor = vsig.sig.ctors[t.ctor]
        # (text, parenthesize unless a trailing binder)
        parts: list[tuple[str, bool]] = []
        binding = vsig.match_index(ctor, index)
        for (var, ptype, _), value in zip(ctor.pi_args, t.index_args):
            binding[var] = value
            parts.append((index_value_text(ptype, value), False))
        for arg, ta in zip(ctor.args, t.args):
            inner_env = dict(env)
            inner_counts = counts
            names = []
            for bt, bix in arg.binders:
                b_index = vsig.eval_index(bt, bix, binding)
                level = inner_counts.get(bt, b_index)
                name = fresh(bt, b_index, level)
                inner_env[(bt, b_index, level)] = name
                inner_counts = inner_counts.extend(bt, b_index)
                names.append(name)
            body_index = vsig.eval_index(arg.type_name, arg.index, binding)
            body = render(ta.body, body_index, inner_env, inner_counts)
            if names:
                parts.append(("".join(f"[{n}] " for n in names) + body, True))
            else:
                atomic = isinstance(ta.body, Var) or (
                    isinstance(ta.body, Con)
                    and not ta.body.args
                    and not ta.body.index_args
                )
                parts.append((body, not atomic))
        if not parts:
            return t.ctor
        rendered = [t.ctor]
        for i, (text, needs) in enumerate(parts):
            trailing_binder = i == len(parts) - 1 and text.startswith("[")
            if needs and not trailing_binder:
                rendered.append(f"({text})")
            else:
                rendered.append(text)
        return " ".join(rendered)

    return render(term, index, {}, EMPTY_COUNTS)


def _infer_index(vsig: ValidatedSignature, term: Term) -> int | None:
    if isinstance(term, Var):
        return term.index
    pat = vsig.pattern(term.ctor)
    if pat[0] == "unit":
        return None
    if pat[0] == "zero":
        return 0
    if pat[0] == "const":
        return pat[1]
    raise TermError(
        f"the index of a term headed by {term.ctor} is not determined by"
        " its pattern; pass index= explicitly"
    )


def check_term(
    vsig: ValidatedSignature,
    type_name: str,
    index: int | None,
    counts: CountVector,
    term: Term,
) -> None:
    """Raise TermError unless term is well-typed at (type, index) under counts."""
    _check_target(vsig, type_name, index)
    if isinstance(term, Var):
        if (term.type_name, term.index) != (type_name, index):
            raise TermError(
                f"variable of type {_describe(term.type_name, term.index)},"
                f" expected {_describe(type_name, index)}"
            )
        if not 0 <= term.level < counts.get(type_name, index):
            raise TermError(
                f"variable level {term.level} out of scope"
                f" ({counts.get(type_name, index)} in context)"
            )
        return
    ctor = vsig.sig.ctors.get(term.ctor)
    if ctor is None:
        raise TermError(f"unknown constructor {term.ctor!r}")
    if ctor.family != type_name:
        raise TermError(
            f"constructor {term.ctor} constructs {ctor.family},"
            f" expected {_describe(type_name, index)}"
        )
    if not _applicable_at(vsig, ctor, index):
        raise TermError(
            f"constructor {term.ctor} cannot construct {_describe(type_name, index)}"
        )
    if len(term.index_args) != len(ctor.pi_args):
        raise TermError(
            f"constructor {term.ctor} takes {len(ctor.pi_args)} index"
            f" argument(s), got {len(term.index_args)}"
        )
    if len(term.args) != len(ctor.args):
        raise TermError(
            f"constructor {term.ctor} takes {len(ctor.args)} argument(s),"
            f" got {len(term.args)}"
        )
    binding = vsig.match_index(ctor, index)
    for (var, ptype, _), value in zip(ctor.pi_args, term.index_args):
        if value < 0:
            raise TermError(f"negative index argument on {term.ctor}")
        binding[var] = value
    for pos, (arg, ta) in enumerate(zip(ctor.args, term.args)):
        if ta.binder_count != len(arg.binders):
            raise TermError(
                f"argument {pos} of {term.ctor} binds {len(arg.binders)}"
                f" variable(s), term has {ta.binder_count}"
            )
        inner = counts
        for bt, bix in arg.binders:
            inner = inner.extend(bt, vsig.eval_index(bt, bix, binding))
        check_term(
            vsig,
            arg.type_name,
            vsig.eval_index(arg.type_name, arg.index, binding),
            inner,
            ta.body,
        )


def term_size(term: Term) -> int:
    """Number of nodes; explicit index values of magnitude v count v + 1."""
    if isinstance(term, Var):
        return 1
    total = 1
    for v in term.index_args:
        total += v + 1
    for ta in term.args:
        total += term_size(ta.body)
    return total
