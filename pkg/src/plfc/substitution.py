"""Substitutions, most general specialization, and variant detection.

Unification here is asymmetric in a way classical resolution is not: two
occurrences of the same imprecise constant never collapse into one object,
because each occurrence reads existentially.  So a pair of constants only
cancels when both are precise and denote the same element, and an imprecise
constant can be bound to a variable but never matched against another
constant.  The result is a most general *specialization* rather than a
unifier.

Raw fuzzy constants (not wrapped in a cut or a support) must not reach the
unifier at all; the clause transformation that rewrites them into cuts has
to run first, and we guard that precondition loudly.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Iterable, Optional

from plfc.language import (
    AlphaCut,
    Clause,
    FuzzyConst,
    Literal,
    PreciseConst,
    Signature,
    SupportConst,
    Term,
    Var,
    WConst,
    WeightExpr,
    WMax,
    WMem,
    WMin,
    base_vars,
    clause_vars,
    format_term,
    literal_key,
    normalize_weight,
    term_sort,
    term_vars,
    weight_vars,
)


class RawFuzzyConstant(ValueError):
    """A bare fuzzy constant reached unification; cuts must come first."""


@dataclass(frozen=True)
class Subst:
    """A simultaneous substitution of terms for variables."""

    map: tuple[tuple[Var, Term], ...] = ()

    @staticmethod
    def of(pairs: dict[Var, Term] | Iterable[tuple[Var, Term]]) -> "Subst":
        items = pairs.items() if isinstance(pairs, dict) else pairs
        kept = tuple((v, t) for v, t in sorted(items, key=lambda p: p[0].name) if v != t)
        return Subst(kept)

    def lookup(self, v: Var) -> Term:
        for u, t in self.map:
            if u == v:
                return t
        return v

    @property
    def domain(self) -> set[Var]:
        return {v for v, _ in self.map}

    def range_vars(self) -> set[Var]:
        out: set[Var] = set()
        for _, t in self.map:
            out.update(term_vars(t))
        return out

    def is_empty(self) -> bool:
        return not self.map

    def __str__(self) -> str:
        inner = ", ".join(f"{v.name}/{format_term(t)}" for v, t in self.map)
        return "{" + inner + "}"


def apply_term(s: Subst, t: Term) -> Term:
    if isinstance(t, Var):
        return s.lookup(t)
    if isinstance(t, AlphaCut):
        return AlphaCut(t.base, apply_weight(s, t.level))
    return t


def apply_weight(s: Subst, w: WeightExpr) -> WeightExpr:
    if isinstance(w, WConst):
        return w
    if isinstance(w, WMem):
        return WMem(w.set_name, apply_term(s, w.arg))
    args = tuple(apply_weight(s, a) for a in w.args)
    return normalize_weight(WMin(args) if isinstance(w, WMin) else WMax(args))


def apply_literal(s: Subst, lit: Literal) -> Literal:
    return Literal(lit.positive, lit.pred, tuple(apply_term(s, a) for a in lit.args))


def apply_clause(s: Subst, c: Clause) -> Clause:
    return Clause(tuple(apply_literal(s, l) for l in c.literals), apply_weight(s, c.weight))


def compose(first: Subst, then: Subst) -> Subst:
    """first, then the other: apply_term(compose(a, b), t) == b(a(t)).

    Bindings of the second substitution survive unless the first already
    binds the same variable; bindings of the first that become identities
    after the second is applied are dropped.
    """
    out: dict[Var, Term] = {}
    for v, t in first.map:
        img = apply_term(then, t)
        if img != v:
            out[v] = img
    dom = {v for v, _ in first.map}
    for v, t in then.map:
        if v not in dom:
            out[v] = t
    return Subst.of(out)


# --------------------------------------------------------------------------
# most general specialization


def _is_imprecise(t: Term) -> bool:
    return isinstance(t, (AlphaCut, SupportConst))


def _is_constant(t: Term) -> bool:
    return not isinstance(t, Var)


def mgs(pairs: list[tuple[Term, Term]], sig: Signature) -> Optional[Subst]:
    """Most general specialization of a set of term pairs, or None.

    Precise constants cancel when they denote the same element.  Any other
    constant-against-constant pair fails, including two occurrences of the
    same cut or support: each stands for its own existential choice.
    """
    for t in itertools.chain.from_iterable(pairs):
        _reject_raw_fuzzy(t)
    work = list(pairs)
    acc = Subst.of({})
    while work:
        a, b = work.pop()
        if isinstance(a, Var) and isinstance(b, Var) and a == b:
            continue
        if _is_constant(a) and _is_constant(b):
            if isinstance(a, PreciseConst) and isinstance(b, PreciseConst):
                if sig.element(a) == sig.element(b):
                    continue
            return None
        if _is_constant(a):
            a, b = b, a
        assert isinstance(a, Var)
        if term_sort(b) != a.sort:
            return None
        if a in term_vars(b):
            return None
        bind = Subst.of({a: b})
        work = [(apply_term(bind, u), apply_term(bind, v)) for u, v in work]
        acc = compose(acc, bind)
    return acc


def _reject_raw_fuzzy(t: Term) -> None:
    if isinstance(t, FuzzyConst):
        raise RawFuzzyConstant(
            f"bare fuzzy constant {t.name!r} in unification; rewrite it to a cut first"
        )


def mgs_literals(l1: Literal, l2: Literal, sig: Signature) -> Optional[Subst]:
    """Specialize two literals of the same predicate onto each other."""
    if l1.pred != l2.pred or len(l1.args) != len(l2.args):
        return None
    return mgs(list(zip(l1.args, l2.args)), sig)


# --------------------------------------------------------------------------
# fresh renaming and variants


@dataclass
class FreshNamer:
    """Deterministic source of variable names no source text can contain."""

    counter: int = 0

    def rename_clause(self, c: Clause) -> Clause:
        self.counter += 1
        return rename_with_suffix(c, self.counter)


def rename_with_suffix(c: Clause, n: int) -> Clause:
    """Standardize the clause apart by stamping suffix ``n`` on every variable.

    Renaming the same clause with the same suffix gives the same result, so
    a recorded derivation can be replayed exactly by reusing the suffixes
    it recorded.
    """
    ren = Subst.of({v: Var(f"{_stem(v.name)}#{n}", v.sort) for v in clause_vars(c)})
    return apply_clause(ren, c)


def _stem(name: str) -> str:
    return name.split("#", 1)[0]


def find_variant_renaming(c1: Clause, c2: Clause) -> Optional[Subst]:
    """An injective renaming of c1's base variables making the bases equal.

    Weights are left out of the comparison on purpose: merging exists to
    combine differently-weighted copies of one base.  Cut levels inside the
    base do take part, since they are part of what the literal says.
    """
    lits1, lits2 = c1.literals, c2.literals
    if len(lits1) != len(lits2):
        return None
    vs1 = sorted(base_vars(c1), key=lambda v: v.name)
    vs2 = sorted(base_vars(c2), key=lambda v: v.name)
    if len(vs1) != len(vs2):
        return None
    by_sort1: dict[str, list[Var]] = {}
    by_sort2: dict[str, list[Var]] = {}
    for v in vs1:
        by_sort1.setdefault(v.sort, []).append(v)
    for v in vs2:
        by_sort2.setdefault(v.sort, []).append(v)
    if {s: len(vs) for s, vs in by_sort1.items()} != {s: len(vs) for s, vs in by_sort2.items()}:
        return None
    target = sorted(literal_key(l) for l in lits2)
    sorts = sorted(by_sort1)
    pools = [itertools.permutations(by_sort2[s]) for s in sorts]
    for choice in itertools.product(*pools):
        mapping: dict[Var, Term] = {}
        for s, perm in zip(sorts, choice):
            mapping.update(zip(by_sort1[s], perm))
        theta = Subst.of(mapping)
        renamed = [apply_literal(theta, l) for l in lits1]
        if sorted(literal_key(l) for l in renamed) != target:
            continue
        # weight-only variables of c1 must not be captured by c2's variables
        w_only = set(weight_vars(c1.weight)) - set(mapping)
        if w_only & (set(clause_vars(c2)) | set(mapping.values())):
            continue
        return theta
    return None
