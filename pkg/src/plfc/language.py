"""Sorted first-order terms, weighted clauses, and the signature behind them.

A clause is a disjunction of literals paired with a weight expression.  The
weight is not a bare number: it is a min/max tree whose leaves are rational
constants and memberships of terms in named fuzzy sets, which is how a rule's
certainty gets to depend on which objects instantiate its variables.

Fuzzy constants appear only in argument positions the signature marks as
extended.  A raw fuzzy constant reads existentially ("the price, which is
around 25"); the two derived forms that behave like crisp objects are the
level cut ``[A @ w]`` and the support ``supp(A)``.  Cut levels are weight
expressions themselves and may mention variables, because resolution steps
introduce cuts whose level is only fixed once the remaining variables are.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterator, Optional, Union

from plfc.fuzzy import (
    Domain,
    Element,
    FiniteDomain,
    FuzzySet,
    RealInterval,
    format_element,
    format_rational,
    frac,
)


class LanguageError(ValueError):
    """A term, weight or clause does not fit the signature."""


# --------------------------------------------------------------------------
# terms


@dataclass(frozen=True)
class Var:
    name: str
    sort: str


@dataclass(frozen=True)
class PreciseConst:
    """A name denoting one domain element.

    Either a declared alias (resolved through the signature) or self-denoting:
    a rational literal on a real sort, a domain symbol on a finite sort.
    """

    name: str
    sort: str


@dataclass(frozen=True)
class FuzzyConst:
    """A declared fuzzy constant, read existentially inside a clause."""

    name: str
    sort: str


@dataclass(frozen=True)
class AlphaCut:
    """The level cut ``[base @ level]``; the level is a weight expression."""

    base: FuzzyConst
    level: "WeightExpr"


@dataclass(frozen=True)
class SupportConst:
    """``supp(base)``: the crisp set where the base is positive."""

    base: FuzzyConst


Term = Union[Var, PreciseConst, FuzzyConst, AlphaCut, SupportConst]


def term_sort(t: Term) -> str:
    if isinstance(t, (Var, PreciseConst, FuzzyConst)):
        return t.sort
    return t.base.sort


def term_vars(t: Term) -> Iterator[Var]:
    if isinstance(t, Var):
        yield t
    elif isinstance(t, AlphaCut):
        yield from weight_vars(t.level)


def is_ground(t: Term) -> bool:
    return not any(True for _ in term_vars(t))


def format_term(t: Term) -> str:
    if isinstance(t, (Var, PreciseConst, FuzzyConst)):
        return t.name
    if isinstance(t, AlphaCut):
        return f"[{t.base.name} @ {format_weight(t.level)}]"
    return f"supp({t.base.name})"


# --------------------------------------------------------------------------
# weight expressions


@dataclass(frozen=True)
class WConst:
    value: Fraction


@dataclass(frozen=True)
class WMem:
    """Membership of a term in the named fuzzy set."""

    set_name: str
    arg: Term


@dataclass(frozen=True)
class WMin:
    args: tuple["WeightExpr", ...]


@dataclass(frozen=True)
class WMax:
    args: tuple["WeightExpr", ...]


WeightExpr = Union[WConst, WMem, WMin, WMax]

W_ZERO = WConst(Fraction(0))
W_ONE = WConst(Fraction(1))


def wconst(value) -> WConst:
    v = frac(value)
    if v < 0 or v > 1:
        raise LanguageError(f"weight constant out of [0, 1]: {v}")
    return WConst(v)


def wmin(*args: WeightExpr) -> WeightExpr:
    return normalize_weight(WMin(tuple(args)))


def wmax(*args: WeightExpr) -> WeightExpr:
    return normalize_weight(WMax(tuple(args)))


def weight_vars(w: WeightExpr) -> Iterator[Var]:
    if isinstance(w, WMem):
        yield from term_vars(w.arg)
    elif isinstance(w, (WMin, WMax)):
        for a in w.args:
            yield from weight_vars(a)


def weight_key(w: WeightExpr):
    """Total order on weight expressions, for canonical child ordering.

    Keys are cached on the node (safe, the dataclasses are frozen and
    compare by field), because normalization and deduplication ask for
    the same subtree's key over and over.
    """
    k = w.__dict__.get("_key")
    if k is None:
        if isinstance(w, WConst):
            k = (0, str(w.value), ())
        elif isinstance(w, WMem):
            k = (1, w.set_name, (_term_key(w.arg),))
        else:
            tag = 2 if isinstance(w, WMin) else 3
            k = (tag, "", tuple(weight_key(a) for a in w.args))
        object.__setattr__(w, "_key", k)
    return k


def _term_key(t: Term):
    k = t.__dict__.get("_key")
    if k is None:
        if isinstance(t, Var):
            k = (0, t.name, ())
        elif isinstance(t, PreciseConst):
            k = (1, t.name, ())
        elif isinstance(t, FuzzyConst):
            k = (2, t.name, ())
        elif isinstance(t, SupportConst):
            k = (3, t.base.name, ())
        else:
            k = (4, t.base.name, (weight_key(t.level),))
        object.__setattr__(t, "_key", k)
    return k


def _weight_le(x: WeightExpr, y: WeightExpr, _memo: Optional[dict] = None) -> bool:
    """Is x <= y at every grounding, by structure alone?

    A sufficient test: False only means the order could not be shown.
    Memberships relate to constants just at the lattice ends (they never
    exceed one, never undercut zero), and to each other only when equal.
    The memo keeps alternating min/max towers from being re-walked once
    per path; subterm pairs are compared at most once per top call.
    """
    if x is y:
        return True
    if _memo is None:
        _memo = {}
    mk = (id(x), id(y))
    if mk in _memo:
        return _memo[mk]
    if isinstance(x, WConst):
        if x.value == 0:
            return True
        if isinstance(y, WConst):
            return x.value <= y.value
    out = False
    if isinstance(y, WConst) and y.value == 1:
        out = True
    elif weight_key(x) == weight_key(y):
        out = True
    elif isinstance(x, WMin) and any(_weight_le(a, y, _memo) for a in x.args):
        out = True
    elif isinstance(y, WMax) and any(_weight_le(x, b, _memo) for b in y.args):
        out = True
    elif isinstance(x, WMax):
        out = all(_weight_le(a, y, _memo) for a in x.args)
    elif isinstance(y, WMin):
        out = all(_weight_le(x, b, _memo) for b in y.args)
    _memo[mk] = out
    return out


def normalize_weight(w: WeightExpr) -> WeightExpr:
    """Flatten, fold constants, absorb dominated children, order canonically.

    min([]) is 1 and max([]) is 0, so an empty conjunction of restrictions
    means "fully certain" and an empty disjunction means "no support".
    A child another child provably dominates is dropped (min keeps the
    lower one, max the higher), so the families the rules grow by
    re-combining one clause's weight with itself collapse on the spot.
    """
    if isinstance(w, (WConst, WMem)):
        return w
    is_min = isinstance(w, WMin)
    flat: list[WeightExpr] = []
    const = Fraction(1) if is_min else Fraction(0)
    for a in w.args:
        a = normalize_weight(a)
        inner = a.args if isinstance(a, WMin) and is_min or isinstance(a, WMax) and not is_min else (a,)
        for g in inner:
            if isinstance(g, WConst):
                const = min(const, g.value) if is_min else max(const, g.value)
            else:
                flat.append(g)
    if is_min and const == 0:
        return W_ZERO
    if not is_min and const == 1:
        return W_ONE
    seen = set()
    cands = []
    for a in flat:
        k = weight_key(a)
        if k not in seen:
            seen.add(k)
            cands.append(a)
    if not (is_min and const == 1) and not (not is_min and const == 0):
        cands.append(WConst(const))
    cands.sort(key=weight_key)
    # absorption pays off on the small weights the rules actually build;
    # runaway self-feeding towers are left alone (the search discards
    # them by size) rather than compared pairwise at quadratic cost
    if len(cands) <= 16 and sum(weight_size(a) for a in cands) <= 600:
        kept: list[WeightExpr] = []
        for a in cands:
            redundant = (_weight_le(b, a) for b in kept) if is_min else (_weight_le(a, b) for b in kept)
            if any(redundant):
                continue
            if is_min:
                kept = [b for b in kept if not _weight_le(a, b)]
            else:
                kept = [b for b in kept if not _weight_le(b, a)]
            kept.append(a)
    else:
        kept = cands
    kept.sort(key=weight_key)
    if not kept:
        return W_ONE if is_min else W_ZERO
    if len(kept) == 1:
        return kept[0]
    return WMin(tuple(kept)) if is_min else WMax(tuple(kept))


def format_weight(w: WeightExpr) -> str:
    if isinstance(w, WConst):
        return format_rational(w.value)
    if isinstance(w, WMem):
        return f"{w.set_name}({format_term(w.arg)})"
    op = "min" if isinstance(w, WMin) else "max"
    return f"{op}(" + ", ".join(format_weight(a) for a in w.args) + ")"


# --------------------------------------------------------------------------
# literals and clauses


@dataclass(frozen=True)
class Literal:
    positive: bool
    pred: str
    args: tuple[Term, ...]

    def negated(self) -> "Literal":
        return Literal(not self.positive, self.pred, self.args)


@dataclass(frozen=True)
class Clause:
    """Disjunction of literals with a lower bound on its necessity.

    An empty literal tuple is the contradiction; its weight is then the
    inconsistency degree the derivation has established.
    """

    literals: tuple[Literal, ...]
    weight: WeightExpr

    @property
    def is_empty(self) -> bool:
        return not self.literals


def literal_vars(lit: Literal) -> Iterator[Var]:
    for a in lit.args:
        yield from term_vars(a)


def clause_vars(c: Clause) -> list[Var]:
    """Variables of the base first, then weight-only variables, no repeats."""
    out: list[Var] = []
    seen: set[Var] = set()
    for lit in c.literals:
        for v in literal_vars(lit):
            if v not in seen:
                seen.add(v)
                out.append(v)
    for v in weight_vars(c.weight):
        if v not in seen:
            seen.add(v)
            out.append(v)
    return out


def base_vars(c: Clause) -> set[Var]:
    return {v for lit in c.literals for v in literal_vars(lit)}


def term_size(t: Term) -> int:
    if isinstance(t, AlphaCut):
        return 1 + term_size(t.base) + weight_size(t.level)
    if isinstance(t, SupportConst):
        return 1 + term_size(t.base)
    return 1


def weight_size(w: WeightExpr) -> int:
    if isinstance(w, WConst):
        return 1
    if isinstance(w, WMem):
        return 1 + term_size(w.arg)
    return 1 + sum(weight_size(a) for a in w.args)


def clause_size(c: Clause) -> int:
    """Node count over the literal arguments and the weight, cut levels included."""
    lits = sum(1 + sum(term_size(a) for a in l.args) for l in c.literals)
    return lits + weight_size(c.weight)


def format_literal(lit: Literal) -> str:
    sign = "" if lit.positive else "~"
    if not lit.args:
        return f"{sign}{lit.pred}"
    return f"{sign}{lit.pred}(" + ", ".join(format_term(a) for a in lit.args) + ")"


def format_clause(c: Clause) -> str:
    base = " | ".join(format_literal(l) for l in c.literals) if c.literals else "false"
    return f"({base}, {format_weight(c.weight)})"


def literal_key(lit: Literal):
    return (lit.pred, lit.positive, tuple(_term_key(a) for a in lit.args))


def clause_key(c: Clause):
    """Structural identity used for deduplication after preprocessing."""
    return (tuple(sorted(literal_key(l) for l in c.literals)), weight_key(c.weight))


# --------------------------------------------------------------------------
# signature


@dataclass
class Signature:
    """Declared sorts, constants, fuzzy sets and predicates.

    One flat namespace: a name is a sort, a constant, a fuzzy set or a
    predicate, never two of those at once, and never shadowing a finite
    domain's symbols.  Fuzzy set declarations double as fuzzy constants and
    as the restriction sets usable in weights.
    """

    sorts: dict[str, Domain] = field(default_factory=dict)
    consts: dict[str, tuple[str, Element]] = field(default_factory=dict)
    fuzzy: dict[str, tuple[str, FuzzySet]] = field(default_factory=dict)
    preds: dict[str, tuple[tuple[str, bool], ...]] = field(default_factory=dict)

    # declaration ------------------------------------------------------------

    def _claim(self, name: str) -> None:
        for space, kind in (
            (self.sorts, "sort"),
            (self.consts, "constant"),
            (self.fuzzy, "fuzzy set"),
            (self.preds, "predicate"),
        ):
            if name in space:
                raise LanguageError(f"name {name!r} already declared as a {kind}")
        for sname, dom in self.sorts.items():
            if isinstance(dom, FiniteDomain) and name in dom.symbols:
                raise LanguageError(f"name {name!r} collides with a symbol of sort {sname!r}")

    def add_sort(self, name: str, dom: Domain) -> None:
        self._claim(name)
        if isinstance(dom, FiniteDomain):
            for s in dom.symbols:
                self._claim(s)
        self.sorts[name] = dom

    def add_const(self, name: str, sort: str, element: Element) -> None:
        self._claim(name)
        dom = self.domain(sort)
        from plfc.fuzzy import element_in_domain

        if not element_in_domain(dom, element):
            raise LanguageError(f"constant {name!r}: {format_element(element)} not in {sort}")
        self.consts[name] = (sort, element)

    def add_fuzzy(self, name: str, sort: str, fs: FuzzySet) -> None:
        self._claim(name)
        if fs.domain != self.domain(sort):
            raise LanguageError(f"fuzzy set {name!r} declared over the wrong domain")
        self.fuzzy[name] = (sort, fs)

    def add_pred(self, name: str, arg_sorts: tuple[tuple[str, bool], ...]) -> None:
        self._claim(name)
        for s, _ in arg_sorts:
            self.domain(s)
        self.preds[name] = arg_sorts

    # lookup -----------------------------------------------------------------

    def domain(self, sort: str) -> Domain:
        try:
            return self.sorts[sort]
        except KeyError:
            raise LanguageError(f"unknown sort {sort!r}") from None

    def fuzzy_set(self, name: str) -> FuzzySet:
        try:
            return self.fuzzy[name][1]
        except KeyError:
            raise LanguageError(f"unknown fuzzy set {name!r}") from None

    def fuzzy_sort(self, name: str) -> str:
        return self.fuzzy[name][0]

    def element(self, t: PreciseConst) -> Element:
        """The domain element a precise constant denotes."""
        if t.name in self.consts:
            return self.consts[t.name][1]
        dom = self.domain(t.sort)
        if isinstance(dom, RealInterval):
            try:
                x = frac(t.name)
            except (ValueError, ZeroDivisionError):
                raise LanguageError(f"constant {t.name!r} is not declared or numeric") from None
            if dom.lo <= x <= dom.hi:
                return x
            raise LanguageError(f"{t.name} lies outside sort {t.sort}")
        if t.name in dom.symbols:
            return t.name
        raise LanguageError(f"constant {t.name!r} is not declared and not a symbol of {t.sort}")

    # checking ---------------------------------------------------------------

    def check_term(self, t: Term, sort: str, extended: bool) -> None:
        if term_sort(t) != sort:
            raise LanguageError(
                f"term {format_term(t)} has sort {term_sort(t)}, position wants {sort}"
            )
        if isinstance(t, PreciseConst):
            self.element(t)
        if isinstance(t, (FuzzyConst, AlphaCut, SupportConst)):
            base = t if isinstance(t, FuzzyConst) else t.base
            if base.name not in self.fuzzy:
                raise LanguageError(f"unknown fuzzy constant {base.name!r}")
            if self.fuzzy_sort(base.name) != sort:
                raise LanguageError(f"fuzzy constant {base.name!r} used at the wrong sort")
            if not extended:
                raise LanguageError(
                    f"fuzzy constant {format_term(t)} in a position not marked extended"
                )
        if isinstance(t, AlphaCut):
            self.check_weight(t.level)

    def check_literal(self, lit: Literal) -> None:
        if lit.pred not in self.preds:
            raise LanguageError(f"unknown predicate {lit.pred!r}")
        spec = self.preds[lit.pred]
        if len(spec) != len(lit.args):
            raise LanguageError(
                f"{lit.pred} takes {len(spec)} arguments, got {len(lit.args)}"
            )
        for t, (sort, ext) in zip(lit.args, spec):
            self.check_term(t, sort, ext)

    def check_weight(self, w: WeightExpr) -> None:
        if isinstance(w, WConst):
            if w.value < 0 or w.value > 1:
                raise LanguageError(f"weight constant out of range: {w.value}")
        elif isinstance(w, WMem):
            if w.set_name not in self.fuzzy:
                raise LanguageError(f"unknown fuzzy set {w.set_name!r} in weight")
            self.check_term(w.arg, self.fuzzy_sort(w.set_name), extended=True)
        else:
            for a in w.args:
                self.check_weight(a)

    def check_clause(self, c: Clause) -> None:
        for lit in c.literals:
            self.check_literal(lit)
        self.check_weight(c.weight)


# --------------------------------------------------------------------------
# knowledge bases


@dataclass(frozen=True)
class KnowledgeBase:
    """A signature together with an ordered tuple of clauses.

    Clause order is part of the value: the proof search scans clauses in
    this order, so two bases with the same clauses in different orders can
    produce different (equally valid) traces.
    """

    sig: Signature
    clauses: tuple[Clause, ...] = ()


@dataclass(frozen=True)
class Diagnostic:
    """One well-formedness finding; ``clause`` is None for signature-level ones."""

    clause: Optional[int]
    reason: str

    def __str__(self) -> str:
        where = "signature" if self.clause is None else f"clause {self.clause}"
        return f"{where}: {self.reason}"


def well_formed(kb: KnowledgeBase) -> list[Diagnostic]:
    """Check the base against its signature; an empty list means all is well.

    Beyond the per-clause checks the signature already knows how to do,
    this flags subnormal fuzzy sets (a fuzzy constant must reach degree 1
    somewhere, or weights computed against it silently cap below 1) and
    precise constants that collide on the same element.
    """
    out: list[Diagnostic] = []
    named: dict[tuple[str, Element], str] = {}
    for cname in sorted(kb.sig.consts):
        sort, element = kb.sig.consts[cname]
        prev = named.get((sort, element))
        if prev is None:
            named[sort, element] = cname
        else:
            out.append(
                Diagnostic(
                    None,
                    f"constants {prev!r} and {cname!r} both denote "
                    f"{format_element(element)} in sort {sort!r}",
                )
            )
    for fname in sorted(kb.sig.fuzzy):
        fs = kb.sig.fuzzy[fname][1]
        if not fs.is_normalized():
            out.append(
                Diagnostic(
                    None,
                    f"fuzzy set {fname!r} is subnormal (height "
                    f"{format_rational(fs.height())}); normalize it before use",
                )
            )
    for i, c in enumerate(kb.clauses):
        try:
            kb.sig.check_clause(c)
        except LanguageError as e:
            out.append(Diagnostic(i, str(e)))
    return out


def constant_pool(sig: Signature, sort: str) -> list[PreciseConst]:
    """Every named way to ground a variable of the given sort.

    A finite sort contributes each of its elements; an interval sort only
    the precise constants someone bothered to declare, since the reals
    cannot be enumerated.
    """
    dom = sig.domain(sort)
    if isinstance(dom, FiniteDomain):
        return [PreciseConst(s, sort) for s in dom.symbols]
    return [PreciseConst(n, sort) for n in sorted(sig.consts) if sig.consts[n][0] == sort]


def _replace_in_weight(w: WeightExpr, env: dict[Var, PreciseConst]) -> WeightExpr:
    if isinstance(w, WConst):
        return w
    if isinstance(w, WMem):
        arg = _replace_in_term(w.arg, env)
        return WMem(w.set_name, arg)
    args = tuple(_replace_in_weight(a, env) for a in w.args)
    return WMin(args) if isinstance(w, WMin) else WMax(args)


def _replace_in_term(t: Term, env: dict[Var, PreciseConst]) -> Term:
    if isinstance(t, Var):
        return env.get(t, t)
    if isinstance(t, AlphaCut):
        return AlphaCut(t.base, _replace_in_weight(t.level, env))
    return t


def _fold_memberships(w: WeightExpr, sig: Signature) -> WeightExpr:
    """Turn memberships of precise terms into constants, keeping the rest."""
    if isinstance(w, WMem) and isinstance(w.arg, PreciseConst):
        fs = sig.fuzzy_set(w.set_name)
        return WConst(fs.membership(sig.element(w.arg)))
    if isinstance(w, (WMin, WMax)):
        args = tuple(_fold_memberships(a, sig) for a in w.args)
        return WMin(args) if isinstance(w, WMin) else WMax(args)
    return w


def ground_instances(c: Clause, sig: Signature) -> Iterator[Clause]:
    """All groundings of a clause over the signature's named constants.

    Memberships whose argument became a precise constant fold to their
    degree on the spot, so the weights of the instances are as evaluated
    as the grounding allows.  A ground clause yields itself unchanged.
    Raises LanguageError when some variable's sort has nothing to offer.
    """
    vs = clause_vars(c)
    if not vs:
        yield c
        return
    pools = []
    for v in vs:
        pool = constant_pool(sig, v.sort)
        if not pool:
            raise LanguageError(
                f"cannot ground {v.name}: sort {v.sort!r} has no named constants"
            )
        pools.append(pool)
    def gterm(t: Term, env: dict[Var, PreciseConst]) -> Term:
        t = _replace_in_term(t, env)
        if isinstance(t, AlphaCut):
            return AlphaCut(t.base, normalize_weight(_fold_memberships(t.level, sig)))
        return t

    for combo in itertools.product(*pools):
        env = dict(zip(vs, combo))
        lits = tuple(
            Literal(l.positive, l.pred, tuple(gterm(a, env) for a in l.args))
            for l in c.literals
        )
        w = normalize_weight(_fold_memberships(_replace_in_weight(c.weight, env), sig))
        yield Clause(lits, w)
