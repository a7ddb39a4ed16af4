"""Signature syntax, index-class analysis, and well-formedness checking.

A signature is a sequence of declarations in a small LF-style syntax:

    nat : type.
    z : nat.
    s : nat -> nat.
    term : nat -> type.
    lam : (term z -> term N) -> term (s N).
    %% comments run to end of line

Types may be indexed by one other type.  Analysis groups the concrete
indices of each family into classes (unindexed types have a single
class; nat-shaped indices split into zero/successor; finite indices get
one class per value) and computes a cardinality per class.  Validation
then enforces the rules that make a per-class bijection with N
derivable, reporting one diagnostic per violated rule.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .errors import Diagnostic, SigSyntaxError, SigValidationError

# Counts above this are treated as infinite.  Classes whose true count
# overflows the cutoff get rejected later (no infinite constructor to
# anchor a decode), rather than silently miscoded.
COUNT_CUTOFF = 1 << 16

# ----------------------------------------------------------------------
# Lexer, shared with term parsing.

_PUNCT = set(":.()[]{}")
_OPERATORS = {"->", "<-", "="}
_IDENT_EXTRA = set("_'/+*<>=&^?!#@~|-")


@dataclass(frozen=True)
class Token:
    kind: str  # 'ident' | 'num' | 'punct' | 'op' | 'abbrev' | 'eof'
    text: str
    line: int = field(compare=False, default=0)
    col: int = field(compare=False, default=0)


def _is_ident_char(ch: str) -> bool:
    return ch.isalnum() or ch in _IDENT_EXTRA


def tokenize(text: str) -> list[Token]:
    toks: list[Token] = []
    i, line, col = 0, 1, 1
    n = len(text)
    while i < n:
        ch = text[i]
        if ch == "\n":
            i += 1
            line += 1
            col = 1
            continue
        if ch.isspace():
            i += 1
            col += 1
            continue
        if ch == "%":
            if text.startswith("%%", i):
                while i < n and text[i] != "\n":
                    i += 1
                continue
            j = i + 1
            while j < n and _is_ident_char(text[j]):
                j += 1
            word = text[i + 1 : j]
            if word == "abbrev":
                toks.append(Token("abbrev", "%abbrev", line, col))
                col += j - i
                i = j
                continue
            raise SigSyntaxError(f"unsupported declaration %{word}", line, col)
        if ch in _PUNCT:
            toks.append(Token("punct", ch, line, col))
            i += 1
            col += 1
            continue
        if _is_ident_char(ch):
            j = i
            while j < n and _is_ident_char(text[j]):
                j += 1
            word = text[i:j]
            if word in _OPERATORS:
                kind = "op"
            elif word.isdigit():
                kind = "num"
            else:
                kind = "ident"
            toks.append(Token(kind, word, line, col))
            col += j - i
            i = j
            continue
        raise SigSyntaxError(f"unexpected character {ch!r}", line, col)
    toks.append(Token("eof", "", line, col))
    return toks


# ----------------------------------------------------------------------
# Surface expressions.  One grammar serves signature declarations, index
# expressions, and term text; each consumer restricts what it accepts.


@dataclass(frozen=True)
class SName:
    name: str
    line: int = field(compare=False, default=0)
    col: int = field(compare=False, default=0)


@dataclass(frozen=True)
class SNum:
    value: int
    line: int = field(compare=False, default=0)
    col: int = field(compare=False, default=0)


@dataclass(frozen=True)
class SApp:
    fn: "SExpr"
    args: tuple["SExpr", ...]


@dataclass(frozen=True)
class SArrow:
    arg: "SExpr"
    result: "SExpr"


@dataclass(frozen=True)
class SBind:
    var: str
    body: "SExpr"


@dataclass(frozen=True)
class SPi:
    var: str
    var_type: "SExpr"
    body: "SExpr"


@dataclass(frozen=True)
class SType:
    line: int = field(compare=False, default=0)
    col: int = field(compare=False, default=0)


SExpr = SName | SNum | SApp | SArrow | SBind | SPi | SType


def _pos(e: SExpr) -> tuple[int, int]:
    if isinstance(e, (SName, SNum, SType)):
        return e.line, e.col
    if isinstance(e, SApp):
        return _pos(e.fn)
    if isinstance(e, SArrow):
        return _pos(e.arg)
    if isinstance(e, (SBind, SPi)):
        return _pos(e.body)
    return 0, 0


class _Parser:
    def __init__(self, toks: list[Token]):
        self.toks = toks
        self.i = 0

    def peek(self) -> Token:
        return self.toks[self.i]

    def advance(self) -> Token:
        tok = self.toks[self.i]
        if tok.kind != "eof":
            self.i += 1
        return tok

    def fail(self, message: str, tok: Token | None = None):
        tok = tok or self.peek()
        raise SigSyntaxError(message, tok.line, tok.col)

    def expect(self, text: str) -> Token:
        tok = self.peek()
        if tok.text != text or tok.kind == "eof":
            self.fail(f"expected {text!r}, found {tok.text or 'end of input'!r}")
        return self.advance()

    def _starts_atom(self) -> bool:
        tok = self.peek()
        return tok.kind in ("ident", "num") or tok.text in ("(", "[")

    def expr(self) -> SExpr:
        if self.peek().text == "{":
            return self._pi()
        parts: list[tuple[str | None, SExpr]] = [(None, self.app())]
        while self.peek().kind == "op" and self.peek().text in ("->", "<-"):
            op = self.advance().text
            if self.peek().text == "{":
                parts.append((op, self._pi()))
            else:
                parts.append((op, self.app()))
        return _build_arrows(parts)

    def _pi(self) -> SPi:
        self.expect("{")
        var_tok = self.peek()
        if var_tok.kind not in ("ident", "num"):
            self.fail("expected a variable name after '{'")
        self.advance()
        self.expect(":")
        var_type = self.expr()
        self.expect("}")
        body = self.expr()
        return SPi(var_tok.text, var_type, body)

    def app(self) -> SExpr:
        atoms = [self.atom()]
        while self._starts_atom():
            atoms.append(self.atom())
        if len(atoms) == 1:
            return atoms[0]
        return SApp(atoms[0], tuple(atoms[1:]))

    def atom(self) -> SExpr:
        tok = self.peek()
        if tok.kind == "ident":
            self.advance()
            if tok.text == "type":
                return SType(tok.line, tok.col)
            return SName(tok.text, tok.line, tok.col)
        if tok.kind == "num":
            self.advance()
            return SNum(int(tok.text), tok.line, tok.col)
        if tok.text == "(":
            self.advance()
            inner = self.expr()
            self.expect(")")
            return inner
        if tok.text == "[":
            self.advance()
            var_tok = self.peek()
            if var_tok.kind not in ("ident", "num"):
                self.fail("expected a variable name after '['")
            self.advance()
            self.expect("]")
            # a binder extends as far right as possible; parenthesize it
            # when it is not the last argument
            body = self.expr()
            return SBind(var_tok.text, body)
        self.fail(f"unexpected {tok.text or 'end of input'!r}")


def _build_arrows(parts: list[tuple[str | None, SExpr]]) -> SExpr:
    # '->' is right-associative; 'a <- b' is 'b -> a' with '<-' binding
    # looser and associating left, so 'h <- p1 <- p2' is 'p2 -> p1 -> h'
    groups: list[list[SExpr]] = [[parts[0][1]]]
    for op, e in parts[1:]:
        if op == "<-":
            groups.append([e])
        else:
            groups[-1].append(e)

    def rfold(chain: list[SExpr]) -> SExpr:
        out = chain[-1]
        for item in reversed(chain[:-1]):
            out = SArrow(item, out)
        return out

    result = rfold(groups[0])
    for premise in groups[1:]:
        result = SArrow(rfold(premise), result)
    return result


def parse_term_text(text: str) -> SExpr:
    """Parse standalone term text into a surface expression."""
    p = _Parser(tokenize(text))
    e = p.expr()
    if p.peek().kind != "eof":
        p.fail(f"trailing input {p.peek().text!r}")
    return e


# ----------------------------------------------------------------------
# Signature structure.


@dataclass(frozen=True)
class IxVar:
    name: str


@dataclass(frozen=True)
class IxCon:
    name: str
    args: tuple["IndexExpr", ...] = ()


@dataclass(frozen=True)
class IxNum:
    value: int


IndexExpr = IxVar | IxCon | IxNum


@dataclass
class Arg:
    """One constructor argument: zero or more bound variables, then a target."""

    binders: tuple[tuple[str, tuple[IndexExpr, ...]], ...]
    type_name: str
    index: tuple[IndexExpr, ...]


@dataclass
class Ctor:
    name: str
    family: str
    result_index: tuple[IndexExpr, ...]
    pi_args: tuple[tuple[str, str, tuple[IndexExpr, ...]], ...]  # (var, type, its index)
    args: tuple[Arg, ...]
    line: int = 0
    col: int = 0


@dataclass
class TypeDecl:
    name: str
    index_types: tuple[str, ...]
    ctors: list[Ctor] = field(default_factory=list)
    line: int = 0
    col: int = 0


@dataclass
class Abbrev:
    name: str
    type_name: str
    index: tuple[IndexExpr, ...]
    body: SExpr
    line: int = 0
    col: int = 0


@dataclass
class Signature:
    decls: list[TypeDecl] = field(default_factory=list)
    by_name: dict[str, TypeDecl] = field(default_factory=dict)
    ctors: dict[str, Ctor] = field(default_factory=dict)
    abbrevs: dict[str, Abbrev] = field(default_factory=dict)
    analysis: "Analysis | None" = None


def parse_signature(text: str) -> Signature:
    """Parse signature text.  Raises SigSyntaxError on malformed input."""
    p = _Parser(tokenize(text))
    sig = Signature()
    while p.peek().kind != "eof":
        if p.peek().kind == "abbrev":
            _parse_abbrev(p, sig)
        else:
            _parse_decl(p, sig)
    return sig


def _taken(sig: Signature, name: str) -> bool:
    return name in sig.by_name or name in sig.ctors or name in sig.abbrevs


def _parse_abbrev(p: _Parser, sig: Signature) -> None:
    p.advance()
    name_tok = p.peek()
    if name_tok.kind not in ("ident", "num"):
        p.fail("expected a name after %abbrev")
    p.advance()
    if _taken(sig, name_tok.text):
        p.fail(f"duplicate name {name_tok.text!r}", name_tok)
    p.expect(":")
    type_expr = p.expr()
    p.expect("=")
    body = p.expr()
    p.expect(".")
    type_name, index = _to_typeapp(p, sig, type_expr, name_tok)
    for e in index:
        for v in _expr_vars(e):
            p.fail(f"abbreviation type must be ground, found variable {v!r}", name_tok)
    sig.abbrevs[name_tok.text] = Abbrev(
        name_tok.text, type_name, index, body, name_tok.line, name_tok.col
    )


def _parse_decl(p: _Parser, sig: Signature) -> None:
    name_tok = p.peek()
    if name_tok.kind not in ("ident", "num"):
        p.fail(f"expected a declaration, found {name_tok.text or 'end of input'!r}")
    p.advance()
    name = name_tok.text
    if _taken(sig, name):
        p.fail(f"duplicate name {name!r}", name_tok)
    p.expect(":")
    e = p.expr()
    p.expect(".")

    premises, result = _split_arrows(e)
    if isinstance(result, SType):
        index_types = []
        for prem in premises:
            if isinstance(prem, SName):
                head = prem
            elif isinstance(prem, SApp) and isinstance(prem.fn, SName):
                head = prem.fn
            else:
                p.fail("index kinds must be type names", name_tok)
            if head.name not in sig.by_name:
                p.fail(f"unknown type {head.name!r}", name_tok)
            index_types.append(head.name)
        decl = TypeDecl(name, tuple(index_types), [], name_tok.line, name_tok.col)
        sig.decls.append(decl)
        sig.by_name[name] = decl
        return

    pi_args = []
    while isinstance(e, SPi):
        pt_name, pt_index = _to_typeapp(p, sig, e.var_type, name_tok)
        pi_args.append((e.var, pt_name, pt_index))
        e = e.body
    premises, result = _split_arrows(e)
    if any(isinstance(x, SPi) for x in premises) or isinstance(result, SPi):
        p.fail("explicit abstraction must precede all arguments", name_tok)
    family, result_index = _to_typeapp(p, sig, result, name_tok)
    args = tuple(_to_arg(p, sig, prem, name_tok) for prem in premises)

    pivars = {v for v, _, _ in pi_args}
    if pivars:
        result_index = tuple(_promote_vars(e, pivars) for e in result_index)
        pi_args = [
            (v, t, tuple(_promote_vars(x, pivars) for x in ix)) for v, t, ix in pi_args
        ]
        for a in args:
            a.index = tuple(_promote_vars(x, pivars) for x in a.index)
            a.binders = tuple(
                (bt, tuple(_promote_vars(x, pivars) for x in bix))
                for bt, bix in a.binders
            )

    ctor = Ctor(
        name, family, result_index, tuple(pi_args), args, name_tok.line, name_tok.col
    )
    sig.by_name[family].ctors.append(ctor)
    sig.ctors[name] = ctor


def _split_arrows(e: SExpr) -> tuple[list[SExpr], SExpr]:
    premises = []
    while isinstance(e, SArrow):
        premises.append(e.arg)
        e = e.result
    return premises, e


def _to_arg(p: _Parser, sig: Signature, e: SExpr, tok: Token) -> Arg:
    if isinstance(e, SArrow):
        parts, target = _split_arrows(e)
        binders = []
        for part in parts:
            if isinstance(part, SArrow):
                p.fail("binder arguments must be first-order", tok)
            bt, bix = _to_typeapp(p, sig, part, tok)
            binders.append((bt, bix))
        t, ix = _to_typeapp(p, sig, target, tok)
        return Arg(tuple(binders), t, ix)
    t, ix = _to_typeapp(p, sig, e, tok)
    return Arg((), t, ix)


def _to_typeapp(
    p: _Parser, sig: Signature, e: SExpr, tok: Token
) -> tuple[str, tuple[IndexExpr, ...]]:
    if isinstance(e, SName):
        head, atoms = e, ()
    elif isinstance(e, SApp) and isinstance(e.fn, SName):
        head, atoms = e.fn, e.args
    else:
        p.fail("expected a type, possibly applied to index arguments", tok)
    if head.name not in sig.by_name:
        p.fail(f"unknown type {head.name!r}", head if head.line else tok)
    decl = sig.by_name[head.name]
    if len(atoms) != len(decl.index_types):
        p.fail(
            f"type {head.name!r} expects {len(decl.index_types)} index"
            f" argument(s), got {len(atoms)}",
            head if head.line else tok,
        )
    return head.name, tuple(_to_index_expr(p, sig, a, tok) for a in atoms)


def _to_index_expr(p: _Parser, sig: Signature, e: SExpr, tok: Token) -> IndexExpr:
    if isinstance(e, SNum):
        return IxNum(e.value)
    if isinstance(e, SName):
        if e.name[0].isupper():
            return IxVar(e.name)
        if e.name in sig.abbrevs:
            return _abbrev_index(p, sig, e.name, tok)
        return IxCon(e.name)
    if isinstance(e, SApp) and isinstance(e.fn, SName):
        if e.fn.name[0].isupper():
            p.fail(f"index variable {e.fn.name!r} cannot be applied", tok)
        return IxCon(e.fn.name, tuple(_to_index_expr(p, sig, a, tok) for a in e.args))
    p.fail("invalid index expression", tok)


def _abbrev_index(p: _Parser, sig: Signature, name: str, tok: Token) -> IndexExpr:
    # abbreviations are expanded where they occur; in index position the
    # body must itself be an index expression
    body = sig.abbrevs[name].body
    if isinstance(body, (SBind, SPi, SArrow, SType)):
        p.fail(f"abbreviation {name!r} cannot be used in an index expression", tok)
    return _to_index_expr(p, sig, body, tok)


def _promote_vars(e: IndexExpr, names: set[str]) -> IndexExpr:
    # lowercase abstraction variables parse as constructor references;
    # rewrite them to variables once the binding is known
    if isinstance(e, IxCon):
        if not e.args and e.name in names:
            return IxVar(e.name)
        return IxCon(e.name, tuple(_promote_vars(a, names) for a in e.args))
    return e


def _expr_vars(e: IndexExpr) -> list[str]:
    if isinstance(e, IxVar):
        return [e.name]
    if isinstance(e, IxCon):
        out = []
        for a in e.args:
            out.extend(_expr_vars(a))
        return out
    return []


# ----------------------------------------------------------------------
# Index classes and cardinalities.


@dataclass(frozen=True)
class IndexClass:
    kind: str  # 'unit' | 'z' | 's' | 'fin'
    value: int | None = None

    @property
    def label(self) -> str:
        if self.kind == "unit":
            return "-"
        if self.kind == "fin":
            return str(self.value)
        return self.kind

    def __repr__(self) -> str:
        return f"IndexClass({self.label})"


UNIT_CLASS = IndexClass("unit")
Z_CLASS = IndexClass("z")
S_CLASS = IndexClass("s")


def fin_class(value: int) -> IndexClass:
    return IndexClass("fin", value)


@dataclass(frozen=True)
class Cardinality:
    kind: str  # 'empty' | 'finite' | 'infinite'
    count: int | None = None

    @property
    def is_empty(self) -> bool:
        return self.kind == "empty"

    @property
    def is_finite(self) -> bool:
        return self.kind == "finite"

    @property
    def is_infinite(self) -> bool:
        return self.kind == "infinite"

    def __str__(self) -> str:
        if self.kind == "finite":
            return f"Finite({self.count})"
        return self.kind.capitalize()


EMPTY = Cardinality("empty")
INFINITE = Cardinality("infinite")


def finite(count: int) -> Cardinality:
    return Cardinality("finite", count)


@dataclass(frozen=True)
class NatIndex:
    type_name: str
    zero: str
    succ: str


@dataclass(frozen=True)
class FiniteIndex:
    type_name: str
    count: int


@dataclass(frozen=True)
class FiniteCtorEntry:
    ctor_name: str
    base: int
    radices: tuple[int, ...]
    count: int


@dataclass(frozen=True)
class FiniteBlock:
    entries: tuple[FiniteCtorEntry, ...]
    total: int

    def entry_for(self, ctor_name: str) -> FiniteCtorEntry | None:
        for e in self.entries:
            if e.ctor_name == ctor_name:
                return e
        return None

    def entry_at(self, offset: int) -> tuple[FiniteCtorEntry, int]:
        for e in self.entries:
            if offset < e.base + e.count:
                return e, offset - e.base
        raise IndexError(offset)


@dataclass
class Analysis:
    kinds: dict[str, object]  # None | NatIndex | FiniteIndex | 'multi' | 'invalid'
    classes: dict[str, tuple[IndexClass, ...]]
    card: dict[tuple[str, IndexClass], Cardinality]
    patterns: dict[str, tuple]
    finite_blocks: dict[tuple[str, IndexClass], FiniteBlock]
    deferred: list[Diagnostic]
    nat_literal: NatIndex | None


def _nat_shape(decl: TypeDecl) -> NatIndex | None:
    """Detect a type with exactly a zero and a self-successor constructor."""
    if decl.index_types or len(decl.ctors) != 2:
        return None
    zero = succ = None
    for c in decl.ctors:
        if c.pi_args:
            return None
        if not c.args:
            if zero is not None:
                return None
            zero = c.name
        elif (
            len(c.args) == 1
            and not c.args[0].binders
            and c.args[0].type_name == decl.name
        ):
            if succ is not None:
                return None
            succ = c.name
        else:
            return None
    if zero is None or succ is None:
        return None
    return NatIndex(decl.name, zero, succ)


class _Analyzer:
    def __init__(self, sig: Signature):
        self.sig = sig
        self.diags: list[Diagnostic] = []
        self._seen: set[Diagnostic] = set()
        self.collecting = False
        self.raw_kinds: dict[str, object] = {}
        for d in sig.decls:
            if len(d.index_types) == 0:
                self.raw_kinds[d.name] = None
            elif len(d.index_types) == 1:
                xname = d.index_types[0]
                xdecl = sig.by_name.get(xname)
                if xdecl is None or xdecl.index_types:
                    self.raw_kinds[d.name] = "invalid"
                else:
                    shape = _nat_shape(xdecl)
                    self.raw_kinds[d.name] = shape if shape else ("fin?", xname)
            else:
                self.raw_kinds[d.name] = "multi"

    def defer(self, rule: str, subject: str, message: str) -> None:
        if not self.collecting:
            return
        d = Diagnostic(rule, subject, message)
        if d not in self._seen:
            self._seen.add(d)
            self.diags.append(d)

    # ---- per-round state

    def _setup_round(self, prev_card) -> None:
        self.kinds = {}
        self.classes = {}
        for d in self.sig.decls:
            raw = self.raw_kinds[d.name]
            if raw is None:
                self.kinds[d.name] = None
                self.classes[d.name] = (UNIT_CLASS,)
            elif isinstance(raw, NatIndex):
                self.kinds[d.name] = raw
                self.classes[d.name] = (Z_CLASS, S_CLASS)
            elif isinstance(raw, tuple) and raw[0] == "fin?":
                xcard = prev_card.get((raw[1], UNIT_CLASS))
                if xcard is not None and xcard.is_finite:
                    self.kinds[d.name] = FiniteIndex(raw[1], xcard.count)
                    self.classes[d.name] = tuple(
                        fin_class(v) for v in range(xcard.count)
                    )
                else:
                    self.kinds[d.name] = "invalid"
                    self.classes[d.name] = ()
            else:
                self.kinds[d.name] = raw
                self.classes[d.name] = ()
        self.prev_card = prev_card
        self._pattern_cache: dict[str, tuple] = {}

    def pattern_of(self, ctor: Ctor) -> tuple:
        if ctor.name in self._pattern_cache:
            return self._pattern_cache[ctor.name]
        pat = self._compute_pattern(ctor)
        self._pattern_cache[ctor.name] = pat
        return pat

    def _compute_pattern(self, ctor: Ctor) -> tuple:
        kind = self.kinds.get(ctor.family)
        if kind is None:
            return ("unit",)
        if kind in ("multi", "invalid"):
            return ("invalid",)
        expr = ctor.result_index[0]
        if isinstance(kind, NatIndex):
            if isinstance(expr, IxVar):
                return ("var", expr.name)
            if isinstance(expr, IxNum):
                if expr.value == 0:
                    return ("zero",)
                self.defer(
                    "pattern",
                    ctor.name,
                    "result index must use at most one level of matching"
                    " (zero, successor of a variable, or a variable)",
                )
                return ("invalid",)
            if isinstance(expr, IxCon):
                if expr.name == kind.zero and not expr.args:
                    return ("zero",)
                if (
                    expr.name == kind.succ
                    and len(expr.args) == 1
                    and isinstance(expr.args[0], IxVar)
                ):
                    return ("succ", expr.args[0].name)
            self.defer(
                "pattern",
                ctor.name,
                "result index must use at most one level of matching"
                " (zero, successor of a variable, or a variable)",
            )
            return ("invalid",)
        # finite index: a concrete value or a bare variable
        if isinstance(expr, IxVar):
            return ("var", expr.name)
        value = self._ground_value(kind.type_name, expr)
        if value is None:
            return ("pending",)
        return ("const", value)

    def _ground_value(self, type_name: str, expr: IndexExpr) -> int | None:
        """Value of a ground index expression, or None if not yet computable."""
        kind_src = self.raw_kinds.get(type_name)
        if isinstance(expr, IxNum):
            return expr.value
        shape = _nat_shape(self.sig.by_name[type_name]) if type_name in self.sig.by_name else None
        if shape is not None:
            if isinstance(expr, IxCon):
                if expr.name == shape.zero and not expr.args:
                    return 0
                if expr.name == shape.succ and len(expr.args) == 1:
                    sub = self._ground_value(type_name, expr.args[0])
                    return None if sub is None else 1 + sub
            return None
        if not isinstance(expr, IxCon):
            return None
        block = self._finite_block_prev(type_name, UNIT_CLASS)
        if block is None:
            return None
        entry = block.entry_for(expr.name)
        if entry is None or len(expr.args) != len(entry.radices):
            return None
        ctor = self.sig.ctors.get(expr.name)
        offset = 0
        for sub_expr, radix, arg in zip(expr.args, entry.radices, ctor.args):
            sub = self._ground_value(arg.type_name, sub_expr)
            if sub is None or sub >= radix:
                return None
            offset = offset * radix + sub
        return entry.base + offset

    def _finite_block_prev(self, t: str, k: IndexClass) -> FiniteBlock | None:
        card = self.prev_card.get((t, k))
        if card is None or not card.is_finite:
            return None
        return self._build_block(t, k, self.prev_card)

    def _build_block(self, t: str, k: IndexClass, card_map) -> FiniteBlock:
        entries = []
        base = 0
        decl = self.sig.by_name[t]
        for ctor in decl.ctors:
            if not self._applicable(ctor, k):
                continue
            if ctor.pi_args or any(a.binders for a in ctor.args):
                continue
            radices = []
            ok = True
            for a in ctor.args:
                classes, _ = self.eval_classes(ctor, k, a.type_name, a.index)
                counts = []
                for c in classes:
                    cc = card_map.get((a.type_name, c))
                    if cc is None or cc.is_infinite:
                        ok = False
                        break
                    counts.append(cc.count if cc.is_finite else 0)
                if not ok:
                    break
                radices.append(max(counts) if counts else 0)
            if not ok:
                continue
            count = 1
            for r in radices:
                count *= r
            entries.append(FiniteCtorEntry(ctor.name, base, tuple(radices), count))
            base += count
        return FiniteBlock(tuple(entries), base)

    def _applicable(self, ctor: Ctor, k: IndexClass) -> bool:
        pat = self.pattern_of(ctor)
        if pat[0] == "unit":
            return k.kind == "unit"
        if pat[0] == "zero":
            return k.kind == "z"
        if pat[0] == "succ":
            return k.kind == "s"
        if pat[0] == "var":
            return k.kind in ("z", "s", "fin")
        if pat[0] == "const":
            return k.kind == "fin" and k.value == pat[1]
        return False

    def _var_ctx(self, ctor: Ctor, k: IndexClass) -> dict[str, tuple]:
        """Map index variables to abstract bindings at class k."""
        ctx: dict[str, tuple] = {}
        kind = self.kinds.get(ctor.family)
        pat = self.pattern_of(ctor)
        ixt = kind.type_name if isinstance(kind, (NatIndex, FiniteIndex)) else None
        if pat[0] == "var":
            ctx[pat[1]] = ("cur", ixt, k)
        elif pat[0] == "succ":
            ctx[pat[1]] = ("pred", ixt)
        for var, ptype, _ in ctor.pi_args:
            ctx[var] = ("any", ptype)
        return ctx

    def eval_classes(
        self,
        ctor: Ctor,
        k: IndexClass,
        target_type: str,
        index: tuple[IndexExpr, ...],
    ) -> tuple[frozenset[IndexClass], bool]:
        """Classes an argument occurrence can land in, plus whether the
        concrete index is pinned (a constant, or identical to the source's)."""
        tkind = self.kinds.get(target_type)
        if tkind in ("multi", "invalid") or tkind is None and index:
            return frozenset(), False
        if tkind is None:
            return frozenset((UNIT_CLASS,)), True
        if not index:
            return frozenset(), False
        ctx = self._var_ctx(ctor, k)
        return self._eval_expr(ctor, target_type, tkind, index[0], ctx)

    def _eval_expr(
        self, ctor: Ctor, target_type: str, tkind, expr: IndexExpr, ctx
    ) -> tuple[frozenset[IndexClass], bool]:
        if isinstance(expr, IxVar):
            binding = ctx.get(expr.name)
            if binding is None:
                self.defer(
                    "unbound-index-var",
                    ctor.name,
                    f"index variable {expr.name!r} is not bound by the result"
                    " pattern or an explicit abstraction",
                )
                return frozenset(), False
            if binding[1] != tkind.type_name:
                self.defer(
                    "wrong-index-type",
                    ctor.name,
                    f"index variable {expr.name!r} has type {binding[1]},"
                    f" used where {tkind.type_name} is required",
                )
                return frozenset(), False
            if binding[0] == "cur":
                return frozenset((binding[2],)), True
            if binding[0] == "pred":
                return frozenset((Z_CLASS, S_CLASS)), False
            # 'any': abstraction-bound, ranges over its whole type
            if isinstance(tkind, NatIndex):
                return frozenset((Z_CLASS, S_CLASS)), False
            return frozenset(fin_class(v) for v in range(tkind.count)), False
        if isinstance(tkind, NatIndex):
            if isinstance(expr, IxNum):
                return frozenset((Z_CLASS if expr.value == 0 else S_CLASS,)), True
            if isinstance(expr, IxCon):
                if expr.name == tkind.zero and not expr.args:
                    return frozenset((Z_CLASS,)), True
                if expr.name == tkind.succ and len(expr.args) == 1:
                    _, concrete = self._eval_expr(
                        ctor, target_type, tkind, expr.args[0], ctx
                    )
                    # s e is pinned only when e is a constant; 'identity'
                    # under s shifts the value, which unpins it
                    pinned = concrete and not self._mentions_current(expr.args[0], ctx)
                    return frozenset((S_CLASS,)), pinned
            self.defer(
                "index-expr",
                ctor.name,
                f"invalid index expression for type {target_type}",
            )
            return frozenset(), False
        # finite target
        if isinstance(expr, IxNum):
            if expr.value < tkind.count:
                return frozenset((fin_class(expr.value),)), True
            self.defer(
                "index-out-of-range",
                ctor.name,
                f"index {expr.value} out of range for type {target_type}",
            )
            return frozenset(), False
        value = self._ground_value(tkind.type_name, expr)
        if value is None:
            if self.collecting:
                self.defer(
                    "index-expr",
                    ctor.name,
                    f"invalid index expression for type {target_type}",
                )
            return frozenset(), False
        if value >= tkind.count:
            self.defer(
                "index-out-of-range",
                ctor.name,
                f"index value {value} out of range for type {target_type}",
            )
            return frozenset(), False
        return frozenset((fin_class(value),)), True

    def _mentions_current(self, expr: IndexExpr, ctx) -> bool:
        for v in _expr_vars(expr):
            b = ctx.get(v)
            if b is not None and b[0] in ("cur", "pred", "any"):
                return True
        return False

    # ---- fixed point

    def _fixpoint(self) -> dict[tuple[str, IndexClass], Cardinality]:
        all_classes = [
            (d.name, k) for d in self.sig.decls for k in self.classes[d.name]
        ]
        inhab: dict[tuple[str, IndexClass], bool] = {ck: False for ck in all_classes}
        changed = True
        while changed:
            changed = False
            for t, k in all_classes:
                if inhab[(t, k)]:
                    continue
                for ctor in self.sig.by_name[t].ctors:
                    if self._applicable(ctor, k) and self._ctor_inhabited(
                        ctor, k, inhab
                    ):
                        inhab[(t, k)] = True
                        changed = True
                        break

        infinite: set[tuple[str, IndexClass]] = set()
        while True:
            before = len(infinite)
            self._cycle_pass(all_classes, inhab, infinite)
            self._propagate_pass(all_classes, inhab, infinite)
            counts = self._count_pass(all_classes, inhab, infinite)
            if len(infinite) == before:
                break

        card: dict[tuple[str, IndexClass], Cardinality] = {}
        for ck in all_classes:
            if not inhab[ck]:
                card[ck] = EMPTY
            elif ck in infinite:
                card[ck] = INFINITE
            else:
                card[ck] = finite(counts[ck])
        return card

    def _ctor_inhabited(self, ctor: Ctor, k: IndexClass, inhab) -> bool:
        for _, ptype, _ in ctor.pi_args:
            if not any(
                inhab.get((ptype, pk), False) for pk in self.classes.get(ptype, ())
            ):
                return False
        for a in ctor.args:
            targets, _ = self.eval_classes(ctor, k, a.type_name, a.index)
            ok = any(inhab.get((a.type_name, c), False) for c in targets)
            if not ok:
                # a bound variable of the right type also provides a body
                for bt, bix in a.binders:
                    bclasses, _ = self.eval_classes(ctor, k, bt, bix)
                    if bt == a.type_name and bclasses & targets:
                        ok = True
                        break
            if not ok:
                return False
        return True

    def _edges(self, t: str, k: IndexClass, inhab):
        """Concrete-index containment edges used for cycle detection."""
        out = []
        for ctor in self.sig.by_name[t].ctors:
            if not self._applicable(ctor, k):
                continue
            if not self._ctor_inhabited(ctor, k, inhab):
                continue
            for a in ctor.args:
                targets, pinned = self.eval_classes(ctor, k, a.type_name, a.index)
                if pinned and len(targets) == 1:
                    (tc,) = targets
                    if inhab.get((a.type_name, tc), False):
                        out.append((a.type_name, tc))
        return out

    def _cycle_pass(self, all_classes, inhab, infinite) -> None:
        graph = {
            ck: self._edges(ck[0], ck[1], inhab) for ck in all_classes if inhab[ck]
        }
        for start in graph:
            if start in infinite:
                continue
            # can we get back to start following at least one edge?
            stack = list(graph.get(start, ()))
            seen = set()
            while stack:
                node = stack.pop()
                if node == start:
                    infinite.add(start)
                    break
                if node in seen:
                    continue
                seen.add(node)
                stack.extend(graph.get(node, ()))

    def _propagate_pass(self, all_classes, inhab, infinite) -> None:
        changed = True
        while changed:
            changed = False
            for t, k in all_classes:
                if (t, k) in infinite or not inhab[(t, k)]:
                    continue
                if self._class_forced_infinite(t, k, inhab, infinite):
                    infinite.add((t, k))
                    changed = True

    def _class_forced_infinite(self, t, k, inhab, infinite) -> bool:
        for ctor in self.sig.by_name[t].ctors:
            if not self._applicable(ctor, k):
                continue
            if not self._ctor_inhabited(ctor, k, inhab):
                continue
            for _, ptype, _ in ctor.pi_args:
                if any(
                    (ptype, pk) in infinite for pk in self.classes.get(ptype, ())
                ):
                    return True
            for a in ctor.args:
                targets, _ = self.eval_classes(ctor, k, a.type_name, a.index)
                if any((a.type_name, c) in infinite for c in targets):
                    return True
                for bt, bix in a.binders:
                    bclasses, _ = self.eval_classes(ctor, k, bt, bix)
                    if any((bt, c) in infinite for c in bclasses):
                        return True
        return False

    def _count_pass(self, all_classes, inhab, infinite):
        live = [ck for ck in all_classes if inhab[ck] and ck not in infinite]
        counts = {ck: 0 for ck in live}

        def class_count(t, classes) -> int:
            vals = []
            for c in classes:
                if (t, c) in infinite:
                    return COUNT_CUTOFF + 1
                if not inhab.get((t, c), False):
                    vals.append(0)
                else:
                    vals.append(counts.get((t, c), 0))
            return max(vals) if vals else 0

        changed = True
        while changed:
            changed = False
            for t, k in live:
                total = 0
                for ctor in self.sig.by_name[t].ctors:
                    if not self._applicable(ctor, k):
                        continue
                    contrib = 1
                    for _, ptype, _ in ctor.pi_args:
                        factor = sum(
                            counts.get((ptype, pk), 0)
                            for pk in self.classes.get(ptype, ())
                            if inhab.get((ptype, pk), False)
                        )
                        contrib *= factor
                    for a in ctor.args:
                        targets, _ = self.eval_classes(ctor, k, a.type_name, a.index)
                        contrib *= class_count(a.type_name, targets)
                    total += contrib
                    if total > COUNT_CUTOFF:
                        break
                if total > COUNT_CUTOFF:
                    infinite.add((t, k))
                    for ck in list(counts):
                        if ck == (t, k):
                            del counts[ck]
                    return counts  # caller reruns the closure passes
                if total != counts[(t, k)]:
                    counts[(t, k)] = total
                    changed = True
        return counts

    # ---- driver

    def run(self) -> Analysis:
        prev: dict[tuple[str, IndexClass], Cardinality] = {}
        stable = None
        for _ in range(10):
            self._setup_round(prev)
            card = self._fixpoint()
            if card == prev:
                stable = card
                break
            prev = card
        if stable is None:
            raise SigSyntaxError("index analysis did not stabilize")

        # one more pass with diagnostics on, against the stable state
        self.collecting = True
        self._setup_round(stable)
        card = self._fixpoint()
        self.collecting = False

        patterns = {c: self.pattern_of(self.sig.ctors[c]) for c in self.sig.ctors}
        blocks = {}
        for (t, k), c in card.items():
            if c.is_finite:
                blocks[(t, k)] = self._build_block(t, k, card)

        nat_literal = None
        nat_decl = self.sig.by_name.get("nat")
        if nat_decl is not None:
            shape = _nat_shape(nat_decl)
            if shape is not None and shape.zero == "z" and shape.succ == "s":
                nat_literal = shape

        return Analysis(
            kinds=dict(self.kinds),
            classes=dict(self.classes),
            card=card,
            patterns=patterns,
            finite_blocks=blocks,
            deferred=list(self.diags),
            nat_literal=nat_literal,
        )


def compute_cardinality(sig: Signature) -> Signature:
    """Fill in per-class cardinalities.  Returns the same signature."""
    sig.analysis = _Analyzer(sig).run()
    return sig


# ----------------------------------------------------------------------
# Validation.


@dataclass
class ValidatedSignature:
    sig: Signature
    analysis: Analysis
    partitions: dict[tuple[str, IndexClass], tuple[FiniteBlock, tuple[Ctor, ...]]]

    @property
    def decls(self) -> list[TypeDecl]:
        return self.sig.decls

    def decl(self, type_name: str) -> TypeDecl:
        return self.sig.by_name[type_name]

    def has_type(self, type_name: str) -> bool:
        return type_name in self.sig.by_name

    def index_kind(self, type_name: str):
        return self.analysis.kinds[type_name]

    def classes(self, type_name: str) -> tuple[IndexClass, ...]:
        return self.analysis.classes[type_name]

    def cardinality(self, type_name: str, cls: IndexClass) -> Cardinality:
        return self.analysis.card[(type_name, cls)]

    def pattern(self, ctor_name: str) -> tuple:
        return self.analysis.patterns[ctor_name]

    def class_of(self, type_name: str, index: int | None) -> IndexClass:
        kind = self.analysis.kinds[type_name]
        if kind is None:
            if index is not None:
                raise ValueError(f"type {type_name} takes no index")
            return UNIT_CLASS
        if index is None or index < 0:
            raise ValueError(f"type {type_name} requires a nonnegative index")
        if isinstance(kind, NatIndex):
            return Z_CLASS if index == 0 else S_CLASS
        if index >= kind.count:
            raise ValueError(
                f"index {index} out of range for type {type_name}"
                f" (0..{kind.count - 1})"
            )
        return fin_class(index)

    def class_reps(self, type_name: str) -> list[tuple[IndexClass, list[int | None]]]:
        """Representative concrete indices per class, for verification."""
        kind = self.analysis.kinds[type_name]
        if kind is None:
            return [(UNIT_CLASS, [None])]
        if isinstance(kind, NatIndex):
            return [(Z_CLASS, [0]), (S_CLASS, [1, 2])]
        return [(fin_class(v), [v]) for v in range(kind.count)]

    def match_index(self, ctor: Ctor, index: int | None) -> dict[str, int]:
        """Bind the result pattern's variable against a concrete index."""
        pat = self.analysis.patterns[ctor.name]
        if pat[0] in ("unit", "zero", "const"):
            return {}
        if pat[0] == "succ":
            return {pat[1]: index - 1}
        if pat[0] == "var":
            return {pat[1]: index}
        raise AssertionError(f"unmatchable pattern for {ctor.name}")

    def eval_index(
        self, type_name: str, index: tuple[IndexExpr, ...], binding: dict[str, int]
    ) -> int | None:
        """Concrete index value of an argument occurrence, None if unindexed."""
        kind = self.analysis.kinds[type_name]
        if kind is None:
            return None
        return self._eval(kind.type_name, index[0], binding)

    def _eval(self, ixtype: str, expr: IndexExpr, binding: dict[str, int]) -> int:
        if isinstance(expr, IxNum):
            return expr.value
        if isinstance(expr, IxVar):
            return binding[expr.name]
        shape = _nat_shape(self.sig.by_name[ixtype])
        if shape is not None:
            if expr.name == shape.zero:
                return 0
            if expr.name == shape.succ:
                return 1 + self._eval(ixtype, expr.args[0], binding)
            raise ValueError(f"{expr.name} is not a constructor of {ixtype}")
        block = self.analysis.finite_blocks[(ixtype, UNIT_CLASS)]
        entry = block.entry_for(expr.name)
        if entry is None:
            raise ValueError(f"{expr.name} is not a constructor of {ixtype}")
        ctor = self.sig.ctors[expr.name]
        offset = 0
        for sub_expr, radix, arg in zip(expr.args, entry.radices, ctor.args):
            offset = offset * radix + self._eval(arg.type_name, sub_expr, binding)
        return entry.base + offset

    def ctors_for_class(
        self, type_name: str, cls: IndexClass
    ) -> tuple[FiniteBlock, tuple[Ctor, ...]]:
        return self.partitions[(type_name, cls)]


def ctors_for_class(
    vsig: ValidatedSignature, type_name: str, cls: IndexClass
) -> tuple[FiniteBlock, tuple[Ctor, ...]]:
    """Finite-instance block and ordered infinite constructors of a class."""
    return vsig.ctors_for_class(type_name, cls)


def validate(sig: Signature) -> ValidatedSignature:
    """Check every well-formedness rule; raise SigValidationError listing
    all violations, or return the signature paired with its analysis."""
    if sig.analysis is None:
        compute_cardinality(sig)
    ana = sig.analysis
    diags: list[Diagnostic] = list(ana.deferred)

    def add(rule: str, subject: str, message: str) -> None:
        d = Diagnostic(rule, subject, message)
        if d not in diags:
            diags.append(d)

    for decl in sig.decls:
        kind = ana.kinds[decl.name]
        if kind == "multi":
            add(
                "single-index",
                decl.name,
                f"indexed types must take exactly one index,"
                f" {decl.name} takes {len(decl.index_types)}",
            )
            continue
        if kind == "invalid":
            xname = decl.index_types[0]
            xdecl = sig.by_name.get(xname)
            if xdecl is not None and xdecl.index_types:
                add(
                    "index-type",
                    decl.name,
                    f"index type {xname} is itself indexed; indices must be"
                    " nat-shaped or finite unindexed types",
                )
            else:
                xcard = ana.card.get((xname, UNIT_CLASS))
                detail = f" ({xcard})" if xcard is not None else ""
                add(
                    "index-type",
                    decl.name,
                    f"index type {xname} must be nat-shaped or finite{detail}",
                )
            continue
        if isinstance(kind, FiniteIndex):
            xdecl = sig.by_name[kind.type_name]
            if any(a.binders for c in xdecl.ctors for a in c.args) or any(
                c.pi_args for c in xdecl.ctors
            ):
                add(
                    "index-type",
                    decl.name,
                    f"index type {kind.type_name} may not use binders",
                )
            if kind.count == 0:
                add(
                    "index-type",
                    decl.name,
                    f"index type {kind.type_name} is uninhabited",
                )

    analyzed = {d.name for d in sig.decls if ana.kinds[d.name] not in ("multi", "invalid")}

    for decl in sig.decls:
        if decl.name not in analyzed:
            continue
        for ctor in decl.ctors:
            _validate_ctor(sig, ana, ctor, add)

    # uniformity: every class of an indexed family has the same cardinality
    for decl in sig.decls:
        if decl.name not in analyzed:
            continue
        cards = [ana.card[(decl.name, k)] for k in ana.classes[decl.name]]
        if cards and any(c != cards[0] for c in cards[1:]):
            parts = ", ".join(
                f"{k.label}: {ana.card[(decl.name, k)]}"
                for k in ana.classes[decl.name]
            )
            add(
                "uniform",
                decl.name,
                f"indexed types must be uniform across index classes ({parts})",
            )

    partitions: dict[tuple[str, IndexClass], tuple[FiniteBlock, tuple[Ctor, ...]]] = {}
    if not diags:
        for decl in sig.decls:
            for k in ana.classes[decl.name]:
                block, inf = _partition(sig, ana, decl, k)
                partitions[(decl.name, k)] = (block, inf)
                card = ana.card[(decl.name, k)]
                if card.is_infinite and not inf:
                    add(
                        "no-infinite-ctor",
                        decl.name,
                        f"class {decl.name}[{k.label}] is infinite (or its count"
                        f" exceeds {COUNT_CUTOFF}) but has no infinite"
                        " constructor to anchor decoding",
                    )
                if len(inf) > 12:
                    add(
                        "tag-bound",
                        decl.name,
                        f"class {decl.name}[{k.label}] has {len(inf)} infinite"
                        " constructors; at most 12 are supported",
                    )
                if card.is_finite and block.total != card.count:
                    raise AssertionError(
                        f"partition/count mismatch for {decl.name}[{k.label}]"
                    )

    if diags:
        raise SigValidationError(diags)
    return ValidatedSignature(sig, ana, partitions)


def _validate_ctor(sig, ana, ctor: Ctor, add) -> None:
    helper = _Analyzer(sig)
    helper._setup_round(ana.card)
    helper.collecting = True

    seen_vars = set()
    pat = ana.patterns[ctor.name]
    if pat[0] in ("var", "succ"):
        seen_vars.add(pat[1])
    for var, ptype, pix in ctor.pi_args:
        if var in seen_vars:
            add(
                "abstraction-var",
                ctor.name,
                f"abstracted variable {var!r} shadows another index variable",
            )
        seen_vars.add(var)
        pdecl = sig.by_name.get(ptype)
        if pix or pdecl is None or _nat_shape(pdecl) is None:
            add(
                "abstraction-type",
                ctor.name,
                "explicit abstraction must range over a nat-shaped index type",
            )
        for e in ctor.result_index:
            if var in _expr_vars(e):
                add(
                    "abstraction-var",
                    ctor.name,
                    f"abstracted variable {var!r} cannot appear in the result index",
                )

    classes = [k for k in ana.classes[ctor.family] if helper._applicable(ctor, k)]
    for k in classes:
        for a in ctor.args:
            targets, _ = helper.eval_classes(ctor, k, a.type_name, a.index)
            tcards = [ana.card.get((a.type_name, c)) for c in targets]
            for bt, bix in a.binders:
                bclasses, _ = helper.eval_classes(ctor, k, bt, bix)
                bcards = [ana.card.get((bt, c)) for c in bclasses]
                if not bcards or any(c is None or not c.is_infinite for c in bcards):
                    add(
                        "finite-binder",
                        ctor.name,
                        f"variables can only be of infinite type; {bt} is not"
                        " infinite in every reachable class",
                    )
            if a.binders:
                if not tcards or any(c is None or not c.is_infinite for c in tcards):
                    add(
                        "binder-target",
                        ctor.name,
                        f"an argument that binds variables must target an"
                        f" infinite type; {a.type_name} is not",
                    )
        # an infinite-partition constructor none of whose instances exist
        # would still occupy a tag and break surjectivity
        if _is_infinite_partition(sig, ana, ctor):
            inhab_map = {
                ck: not c.is_empty for ck, c in ana.card.items()
            }
            if not helper._ctor_inhabited(ctor, k, inhab_map):
                add(
                    "dead-ctor",
                    ctor.name,
                    f"constructor can never be applied at {ctor.family}"
                    f"[{k.label}]: some argument type is uninhabited",
                )
    diags_from_helper = helper.diags
    for d in diags_from_helper:
        add(d.rule, d.subject, d.message)


def _is_infinite_partition(sig, ana, ctor: Ctor) -> bool:
    if ctor.pi_args or any(a.binders for a in ctor.args):
        return True
    for a in ctor.args:
        cards = [ana.card.get((a.type_name, k)) for k in ana.classes.get(a.type_name, ())]
        if any(c is not None and c.is_infinite for c in cards):
            return True
    return False


def _partition(
    sig, ana, decl: TypeDecl, k: IndexClass
) -> tuple[FiniteBlock, tuple[Ctor, ...]]:
    helper = _Analyzer(sig)
    helper._setup_round(ana.card)
    entries = []
    infinite: list[Ctor] = []
    base = 0
    for ctor in decl.ctors:
        if not helper._applicable(ctor, k):
            continue
        if _is_infinite_partition(sig, ana, ctor):
            infinite.append(ctor)
            continue
        radices = []
        for a in ctor.args:
            targets, _ = helper.eval_classes(ctor, k, a.type_name, a.index)
            counts = [
                (ana.card[(a.type_name, c)].count or 0)
                if ana.card[(a.type_name, c)].is_finite
                else 0
                for c in targets
            ]
            radices.append(max(counts) if counts else 0)
        count = 1
        for r in radices:
            count *= r
        entries.append(FiniteCtorEntry(ctor.name, base, tuple(radices), count))
        base += count
    return FiniteBlock(tuple(entries), base), tuple(infinite)
