"""The text format: signatures, clauses, queries, oracle grids.

A source file is a sequence of statements, one per line (comments start
with ``#``):

    sort money = real[0, 50]
    sort item = {potatoes, apples, salad}
    const list_price : money = 24
    fuzzy about_25 : money = trap(20, 24, 26, 30)
    fuzzy few : item = set{potatoes: 1, apples: 1/2}
    pred price(item, money~)
    (price(apples, about_25) | ~offer(apples), min(3/4, cheap(x)))
    query (price(apples, x), min(1/2, about_25(x)))
    oracle { grid money = [0, 20, 25, 30, 50] }

A trailing ``~`` in a predicate declaration marks an argument position
that admits fuzzy constants, cuts ``[A @ w]``, and supports ``supp(A)``.
Numbers are exact rationals: integers, ``a/b``, or finite decimals.
Identifiers that resolve to nothing declared are variables, typed by the
position they stand in.

Parsing is sort-directed and eager about errors: every diagnostic carries
a source span.  Formatting inverts parsing token for token, so a parsed
base formats back to text that parses to an equal base.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional

from plfc.fuzzy import (
    ConstantShape,
    CrispFinite,
    CrispInterval,
    Discrete,
    Domain,
    FiniteDomain,
    FuzzySet,
    RealInterval,
    Trapezoid,
    format_rational,
    frac,
)
from plfc.language import (
    AlphaCut,
    Clause,
    FuzzyConst,
    KnowledgeBase,
    LanguageError,
    Literal,
    PreciseConst,
    Signature,
    SupportConst,
    Term,
    Var,
    WeightExpr,
    WMax,
    WMem,
    WMin,
    format_clause,
    wconst,
)
from plfc.refutation import Query, QueryShapeError, check_query


@dataclass(frozen=True)
class SourceSpan:
    file: str
    line: int
    column: int
    end_line: int
    end_column: int

    def __str__(self) -> str:
        return f"{self.file}:{self.line}:{self.column}"


class ParseError(ValueError):
    def __init__(self, message: str, span: SourceSpan):
        super().__init__(f"{span}: {message}")
        self.message = message
        self.span = span


# --------------------------------------------------------------------------
# lexing

_PUNCT = "()[]{}|~,=:@&"

_NUMBER = re.compile(r"-?\d+(?:\.\d+)?(?:/\d+)?")
_NAME = re.compile(r"[A-Za-z_][A-Za-z0-9_]*")
_NAME_SUFFIXED = re.compile(r"[A-Za-z_][A-Za-z0-9_]*(?:#\d+)?")


@dataclass(frozen=True)
class _Token:
    kind: str  # "name" | "number" | one of _PUNCT | "end"
    text: str
    span: SourceSpan


def _lex(text: str, file: str, internal_names: bool) -> list[_Token]:
    name_re = _NAME_SUFFIXED if internal_names else _NAME
    tokens: list[_Token] = []
    line, col = 1, 1
    i, n = 0, len(text)
    while i < n:
        ch = text[i]
        if ch == "\n":
            line += 1
            col = 1
            i += 1
            continue
        if ch in " \t\r":
            i += 1
            col += 1
            continue
        if ch == "#":
            while i < n and text[i] != "\n":
                i += 1
            continue
        span_start = (line, col)
        if ch.isdigit() or (ch == "-" and i + 1 < n and text[i + 1].isdigit()):
            m = _NUMBER.match(text, i)
            tok_text = m.group()
            kind = "number"
        elif ch.isalpha() or ch == "_":
            m = name_re.match(text, i)
            tok_text = m.group()
            kind = "name"
        elif ch in _PUNCT:
            tok_text = ch
            kind = ch
        else:
            span = SourceSpan(file, line, col, line, col)
            raise ParseError(f"unexpected character {ch!r}", span)
        i += len(tok_text)
        span = SourceSpan(file, *span_start, line, col + len(tok_text) - 1)
        col += len(tok_text)
        tokens.append(_Token(kind, tok_text, span))
    end = SourceSpan(file, line, col, line, col)
    tokens.append(_Token("end", "", end))
    return tokens


# --------------------------------------------------------------------------
# parsing


@dataclass(frozen=True)
class OracleSpec:
    """The ``oracle { ... }`` block: explicit grids and an optional world cap."""

    grids: dict[str, tuple[Fraction, ...]] = field(default_factory=dict)
    max_worlds: Optional[int] = None


@dataclass(frozen=True)
class Source:
    """Everything one file can declare."""

    kb: KnowledgeBase
    queries: tuple[Query, ...] = ()
    oracle: Optional[OracleSpec] = None
    text: str = ""


class _Parser:
    def __init__(self, tokens: list[_Token]):
        self.tokens = tokens
        self.pos = 0

    # -- token plumbing

    def peek(self) -> _Token:
        return self.tokens[self.pos]

    def next(self) -> _Token:
        tok = self.tokens[self.pos]
        if tok.kind != "end":
            self.pos += 1
        return tok

    def at(self, kind: str, text: Optional[str] = None) -> bool:
        tok = self.peek()
        return tok.kind == kind and (text is None or tok.text == text)

    def expect(self, kind: str, what: Optional[str] = None) -> _Token:
        tok = self.peek()
        if tok.kind != kind:
            shown = what or f"'{kind}'"
            got = repr(tok.text) if tok.text else "end of input"
            raise ParseError(f"expected {shown}, got {got}", tok.span)
        return self.next()

    def fail(self, message: str, tok: Optional[_Token] = None):
        raise ParseError(message, (tok or self.peek()).span)

    # -- numbers and names

    def number(self, what: str = "a number") -> Fraction:
        tok = self.expect("number", what)
        return frac(tok.text)

    def name(self, what: str = "a name") -> _Token:
        return self.expect("name", what)

    # -- whole files

    def source(self, fname: str, text: str) -> Source:
        sig = Signature()
        clauses: list[Clause] = []
        queries: list[Query] = []
        oracle: Optional[OracleSpec] = None
        while not self.at("end"):
            tok = self.peek()
            if tok.kind == "(":
                clauses.append(self.clause(sig))
            elif tok.kind != "name":
                self.fail("expected a declaration, a clause, or a query")
            elif tok.text == "sort":
                self.sort_decl(sig)
            elif tok.text == "const":
                self.const_decl(sig)
            elif tok.text == "fuzzy":
                self.fuzzy_decl(sig)
            elif tok.text == "pred":
                self.pred_decl(sig)
            elif tok.text == "query":
                self.next()
                queries.append(self.query(sig))
            elif tok.text == "oracle":
                if oracle is not None:
                    self.fail("a file declares at most one oracle block", tok)
                self.next()
                oracle = self.oracle_block()
            else:
                self.fail(f"unknown statement {tok.text!r}", tok)
        return Source(KnowledgeBase(sig, tuple(clauses)), tuple(queries), oracle, text)

    def _declare(self, add, *args, tok: _Token) -> None:
        try:
            add(*args)
        except (LanguageError, ValueError) as e:
            raise ParseError(str(e), tok.span) from None

    def sort_decl(self, sig: Signature) -> None:
        self.next()
        name = self.name("a sort name")
        self.expect("=")
        if self.at("name", "real"):
            self.next()
            self.expect("[")
            lo = self.number()
            self.expect(",")
            hi_tok = self.peek()
            hi = self.number()
            self.expect("]")
            if hi <= lo:
                raise ParseError(
                    f"empty real interval: [{format_rational(lo)}, {format_rational(hi)}]",
                    hi_tok.span,
                )
            dom: Domain = RealInterval(lo, hi)
        elif self.at("{"):
            self.next()
            syms = [self.name("a symbol").text]
            while self.at(","):
                self.next()
                syms.append(self.name("a symbol").text)
            self.expect("}")
            dom = FiniteDomain(tuple(syms))
        else:
            self.fail("expected real[lo, hi] or {symbols}")
        self._declare(sig.add_sort, name.text, dom, tok=name)

    def const_decl(self, sig: Signature) -> None:
        self.next()
        name = self.name("a constant name")
        self.expect(":")
        sort = self.name("a sort name")
        self.expect("=")
        if self.at("number"):
            element = self.number()
        else:
            element = self.name("a value").text
        self._declare(sig.add_const, name.text, sort.text, element, tok=name)

    def fuzzy_decl(self, sig: Signature) -> None:
        self.next()
        name = self.name("a fuzzy set name")
        self.expect(":")
        sort_tok = self.name("a sort name")
        self.expect("=")
        try:
            dom = sig.domain(sort_tok.text)
        except LanguageError as e:
            raise ParseError(str(e), sort_tok.span) from None
        shape_tok = self.peek()
        shape = self.shape(dom)
        try:
            fs = FuzzySet(dom, shape)
        except ValueError as e:
            raise ParseError(str(e), shape_tok.span) from None
        self._declare(sig.add_fuzzy, name.text, sort_tok.text, fs, tok=name)

    def shape(self, dom: Domain):
        tok = self.peek()
        if tok.kind == "name" and tok.text == "trap":
            if not isinstance(dom, RealInterval):
                self.fail("trap(...) needs a real sort", tok)
            self.next()
            self.expect("(")
            pts = [self.number()]
            for _ in range(3):
                self.expect(",")
                pts.append(self.number())
            self.expect(")")
            try:
                return Trapezoid(*pts)
            except ValueError as e:
                raise ParseError(str(e), tok.span) from None
        if tok.kind == "name" and tok.text == "set":
            if not isinstance(dom, FiniteDomain):
                self.fail("set{...} needs a finite sort", tok)
            self.next()
            self.expect("{")
            entries: list[tuple[str, Fraction]] = []
            crisp = True
            while True:
                sym = self.name("a symbol").text
                if self.at(":"):
                    self.next()
                    entries.append((sym, self.number()))
                    crisp = False
                else:
                    entries.append((sym, Fraction(1)))
                if not self.at(","):
                    break
                self.next()
            self.expect("}")
            if crisp:
                return CrispFinite(tuple(s for s, _ in entries))
            return Discrete(tuple(entries))
        if tok.kind == "name" and tok.text == "interval":
            if not isinstance(dom, RealInterval):
                self.fail("interval needs a real sort", tok)
            self.next()
            lo_open = self.at("(")
            if not lo_open and not self.at("["):
                self.fail("expected '[' or '(' after interval")
            self.next()
            lo = self.number()
            self.expect(",")
            hi = self.number()
            hi_open = self.at(")")
            if not hi_open and not self.at("]"):
                self.fail("expected ']' or ')'")
            self.next()
            try:
                return CrispInterval(lo, hi, lo_open, hi_open)
            except ValueError as e:
                raise ParseError(str(e), tok.span) from None
        if tok.kind == "name" and tok.text == "const":
            self.next()
            self.expect("(")
            level = self.number()
            self.expect(")")
            return ConstantShape(level)
        self.fail("expected a shape: trap(...), set{...}, interval[...], const(...)")

    def pred_decl(self, sig: Signature) -> None:
        self.next()
        name = self.name("a predicate name")
        # the position list is mandatory, or the '(' of a following clause
        # statement would read as its start; a 0-ary predicate is "pred p()"
        spec: list[tuple[str, bool]] = []
        self.expect("(")
        if not self.at(")"):
            spec.append(self.pred_position())
            while self.at(","):
                self.next()
                spec.append(self.pred_position())
        self.expect(")")
        self._declare(sig.add_pred, name.text, tuple(spec), tok=name)

    def pred_position(self) -> tuple[str, bool]:
        sort = self.name("a sort name").text
        extended = False
        if self.at("~"):
            self.next()
            extended = True
        return sort, extended

    # -- clauses

    def clause(self, sig: Signature, in_query: bool = False) -> Clause:
        open_tok = self.expect("(")
        var_sorts: dict[str, tuple[str, SourceSpan]] = {}
        lits: list[Literal] = []
        if self.at("name", "false"):
            self.next()
        else:
            lits.append(self.literal(sig, var_sorts))
            while True:
                if self.at("|"):
                    self.next()
                    lits.append(self.literal(sig, var_sorts))
                    continue
                if self.at("&"):
                    msg = "conjunction is not in the clause grammar"
                    if in_query:
                        msg = "unsupported query form: " + msg
                    self.fail(msg)
                break
        self.expect(",", "',' before the weight")
        weight = self.weight(sig, var_sorts)
        self.expect(")")
        c = Clause(tuple(lits), weight)
        try:
            sig.check_clause(c)
        except LanguageError as e:
            raise ParseError(str(e), open_tok.span) from None
        return c

    def literal(self, sig: Signature, var_sorts) -> Literal:
        positive = True
        if self.at("~"):
            self.next()
            positive = False
        name = self.name("a predicate name")
        if name.text not in sig.preds:
            self.fail(f"unknown predicate {name.text!r}", name)
        spec = sig.preds[name.text]
        args: list[Term] = []
        if self.at("("):
            self.next()
            if not self.at(")"):
                for k, (sort, extended) in enumerate(spec):
                    if k:
                        self.expect(",")
                    args.append(self.term(sig, sort, extended, var_sorts))
            self.expect(")")
        if len(args) != len(spec):
            self.fail(
                f"predicate {name.text!r} takes {len(spec)} argument(s), got {len(args)}",
                name,
            )
        return Literal(positive, name.text, tuple(args))

    def term(self, sig: Signature, sort: str, extended: bool, var_sorts) -> Term:
        tok = self.peek()
        if tok.kind == "number":
            self.next()
            return PreciseConst(format_rational(frac(tok.text)), sort)
        if tok.kind == "[":
            self.next()
            base = self.fuzzy_ref(sig, sort, extended)
            self.expect("@")
            level = self.weight(sig, var_sorts)
            self.expect("]")
            return AlphaCut(base, level)
        if self.at("name", "supp"):
            nxt = self.tokens[self.pos + 1]
            if nxt.kind == "(":
                self.next()
                self.next()
                base = self.fuzzy_ref(sig, sort, extended)
                self.expect(")")
                return SupportConst(base)
        name = self.name("a term")
        if name.text in sig.consts:
            declared_sort = sig.consts[name.text][0]
            if declared_sort != sort:
                self.fail(
                    f"constant {name.text!r} has sort {declared_sort!r}, expected {sort!r}",
                    name,
                )
            return PreciseConst(name.text, sort)
        dom = sig.sorts.get(sort)
        if isinstance(dom, FiniteDomain) and name.text in dom.symbols:
            return PreciseConst(name.text, sort)
        if name.text in sig.fuzzy:
            return self.fuzzy_checked(name, sig, sort, extended)
        if name.text in sig.sorts or name.text in sig.preds:
            self.fail(f"{name.text!r} cannot be used as a term", name)
        prior = var_sorts.get(name.text)
        if prior is not None and prior[0] != sort:
            self.fail(
                f"variable {name.text!r} already stood at sort {prior[0]!r}, now {sort!r}",
                name,
            )
        var_sorts[name.text] = (sort, name.span)
        return Var(name.text, sort)

    def fuzzy_ref(self, sig: Signature, sort: str, extended: bool) -> FuzzyConst:
        name = self.name("a fuzzy set name")
        if name.text not in sig.fuzzy:
            self.fail(f"unknown fuzzy set {name.text!r}", name)
        return self.fuzzy_checked(name, sig, sort, extended)

    def fuzzy_checked(self, name: _Token, sig: Signature, sort: str, extended: bool) -> FuzzyConst:
        fsort = sig.fuzzy_sort(name.text)
        if fsort != sort:
            self.fail(f"fuzzy set {name.text!r} is over {fsort!r}, expected {sort!r}", name)
        if not extended:
            self.fail(
                f"fuzzy set {name.text!r} cannot stand at a basic argument position", name
            )
        return FuzzyConst(name.text, sort)

    def weight(self, sig: Signature, var_sorts) -> WeightExpr:
        tok = self.peek()
        if tok.kind == "number":
            self.next()
            try:
                return wconst(frac(tok.text))
            except LanguageError as e:
                raise ParseError(str(e), tok.span) from None
        name = self.name("a weight")
        if name.text in ("min", "max"):
            self.expect("(")
            args = [self.weight(sig, var_sorts)]
            while self.at(","):
                self.next()
                args.append(self.weight(sig, var_sorts))
            self.expect(")")
            return WMin(tuple(args)) if name.text == "min" else WMax(tuple(args))
        if name.text not in sig.fuzzy:
            self.fail(f"unknown fuzzy set {name.text!r} in a weight", name)
        if not self.at("("):
            self.fail(f"fuzzy set {name.text!r} needs an argument in weight position", name)
        self.next()
        arg = self.term(sig, sig.fuzzy_sort(name.text), True, var_sorts)
        self.expect(")")
        return WMem(name.text, arg)

    # -- queries and oracle blocks

    def query(self, sig: Signature) -> Query:
        open_tok = self.peek()
        q = Query(self.clause(sig, in_query=True))
        try:
            check_query(q, sig)
        except QueryShapeError as e:
            raise ParseError(f"unsupported query form: {e}", open_tok.span) from None
        except LanguageError as e:
            raise ParseError(str(e), open_tok.span) from None
        return q

    def oracle_block(self) -> OracleSpec:
        self.expect("{")
        grids: dict[str, tuple[Fraction, ...]] = {}
        max_worlds: Optional[int] = None
        while not self.at("}"):
            tok = self.name("'grid', 'max_worlds', or 'auto'")
            if tok.text == "auto":
                continue
            if tok.text == "grid":
                sort = self.name("a sort name").text
                self.expect("=")
                self.expect("[")
                pts = [self.number()]
                while self.at(","):
                    self.next()
                    pts.append(self.number())
                self.expect("]")
                grids[sort] = tuple(pts)
                continue
            if tok.text == "max_worlds":
                self.expect("=")
                v = self.number()
                if v.denominator != 1 or v <= 0:
                    self.fail("max_worlds must be a positive integer", tok)
                max_worlds = int(v)
                continue
            self.fail(f"unknown oracle entry {tok.text!r}", tok)
        self.expect("}")
        return OracleSpec(grids, max_worlds)


def _finish(parser: _Parser, value):
    tok = parser.peek()
    if tok.kind != "end":
        raise ParseError(f"unexpected trailing input {tok.text!r}", tok.span)
    return value


def parse_source(text: str, file: str = "<kb>") -> Source:
    return _Parser(_lex(text, file, False)).source(file, text)


def parse_kb(text: str, file: str = "<kb>") -> KnowledgeBase:
    return parse_source(text, file).kb


def parse_query(text: str, sig: Signature, file: str = "<query>") -> Query:
    """One query, with or without the leading ``query`` keyword."""
    p = _Parser(_lex(text, file, False))
    if p.at("name", "query"):
        p.next()
    return _finish(p, p.query(sig))


def parse_clause(text: str, sig: Signature, *, internal_names: bool = False) -> Clause:
    """One clause; ``internal_names`` admits the renamed-apart variables

    (``x#7``) that recorded proof traces contain."""
    p = _Parser(_lex(text, "<clause>", internal_names))
    return _finish(p, p.clause(sig))


# --------------------------------------------------------------------------
# formatting


def _format_domain(dom: Domain) -> str:
    if isinstance(dom, RealInterval):
        return f"real[{format_rational(dom.lo)}, {format_rational(dom.hi)}]"
    return "{" + ", ".join(dom.symbols) + "}"


def _format_shape(fs: FuzzySet) -> str:
    sh = fs.shape
    if isinstance(sh, (Trapezoid, Discrete, ConstantShape, CrispInterval, CrispFinite)):
        return str(sh)
    raise LanguageError(f"membership shape {type(sh).__name__} has no source form")


def format_kb(kb: KnowledgeBase) -> str:
    """Canonical text for the base; parsing it back gives an equal base."""
    sig = kb.sig
    groups: list[list[str]] = [
        [f"sort {name} = {_format_domain(dom)}" for name, dom in sig.sorts.items()],
        [
            f"const {name} : {sort} = {format_element_text(sort, element, sig)}"
            for name, (sort, element) in sig.consts.items()
        ],
        [
            f"fuzzy {name} : {sort} = {_format_shape(fs)}"
            for name, (sort, fs) in sig.fuzzy.items()
        ],
        [
            f"pred {name}" + _format_positions(spec)
            for name, spec in sig.preds.items()
        ],
        [format_clause(c) for c in kb.clauses],
    ]
    return "\n\n".join("\n".join(g) for g in groups if g) + "\n"


def format_element_text(sort: str, element, sig: Signature) -> str:
    if isinstance(sig.sorts[sort], RealInterval):
        return format_rational(Fraction(element))
    return str(element)


def _format_positions(spec: tuple[tuple[str, bool], ...]) -> str:
    if not spec:
        return "()"
    inner = ", ".join(sort + ("~" if extended else "") for sort, extended in spec)
    return f"({inner})"


def format_query(q: Query) -> str:
    return f"query {format_clause(q.clause)}"


def format_source(src: Source) -> str:
    """The whole file back as text: base, queries, oracle block."""
    parts = [format_kb(src.kb).rstrip("\n")]
    for q in src.queries:
        parts.append(format_query(q))
    if src.oracle is not None:
        lines = ["oracle {"]
        for sort, pts in src.oracle.grids.items():
            inner = ", ".join(format_rational(p) for p in pts)
            lines.append(f"  grid {sort} = [{inner}]")
        if src.oracle.max_worlds is not None:
            lines.append(f"  max_worlds = {src.oracle.max_worlds}")
        if len(lines) == 1:
            lines.append("  auto")
        lines.append("}")
        parts.append("\n".join(lines))
    return "\n\n".join(parts) + "\n"
