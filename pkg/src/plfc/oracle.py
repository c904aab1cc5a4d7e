"""Brute-force model checking over finite contexts.

This is the ground truth the inference rules are validated against, so it
deliberately shares no machinery with the calculus module: truth values,
necessities and entailment are all computed by explicit enumeration over a
finite universe.  Real-valued sorts enter through a grid, and the grid has
to be closed under the breakpoints and pairwise crossings of the declared
membership functions; that closure is what makes enumeration over the grid
agree with the analytic computations of the exact layer.

Entailment is decided through the least specific model: each weighted
ground clause is an upper-bound constraint on possibility distributions,
so the admissible set is downward closed and has a pointwise maximum.
Necessity shrinks when possibility grows, which means checking the query
against that single distribution settles the question for all of them.

Two engines answer that check.  The enumerating one walks every
interpretation and is the reference; the deciding one searches for a
counter-interpretation with a small satisfiability routine and scales to
contexts whose interpretation count is out of reach.  They are kept as
separate code paths on purpose and cross-validated in the tests.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Iterator, Mapping, Optional, Sequence

from plfc.fuzzy import (
    Element,
    FiniteDomain,
    FuzzySet,
    ONE,
    RealInterval,
    ZERO,
    format_rational,
)
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
    WMem,
    WMin,
    clause_vars,
    format_term,
    format_weight,
    term_sort,
    term_vars,
)
from plfc.substitution import Subst, apply_literal, apply_weight


class OracleError(ValueError):
    pass


class WorldBudgetExceeded(OracleError):
    """The context would enumerate more interpretations than allowed."""


# --------------------------------------------------------------------------
# finite contexts


@dataclass
class FiniteContext:
    """A finite universe per sort, standing in for the declared domains.

    Finite sorts keep their symbols as they are.  Every real sort that any
    clause can touch needs an explicit grid of rationals, and the grid must
    contain each membership function's breakpoints and every crossing
    between two of them, so that infima and suprema computed over the grid
    are the analytic ones.
    """

    sig: Signature
    carriers: dict[str, tuple[Element, ...]] = field(default_factory=dict)
    max_worlds: int = 1 << 25

    def __post_init__(self) -> None:
        filled: dict[str, tuple[Element, ...]] = {}
        for sort, dom in self.sig.sorts.items():
            if isinstance(dom, FiniteDomain):
                if sort in self.carriers and set(self.carriers[sort]) != set(dom.symbols):
                    raise OracleError(f"carrier for {sort!r} must list exactly its symbols")
                filled[sort] = dom.symbols
                continue
            pts = self.carriers.get(sort)
            if pts is None:
                raise OracleError(f"real sort {sort!r} needs a grid")
            uniq = sorted(set(Fraction(p) for p in pts))
            if not uniq:
                raise OracleError(f"grid for {sort!r} is empty")
            for p in uniq:
                if not (dom.lo <= p <= dom.hi):
                    raise OracleError(f"grid point {format_rational(p)} outside sort {sort!r}")
            filled[sort] = tuple(uniq)
        self.carriers = filled
        self._meanings: dict[tuple[Term, str], dict[Element, Fraction]] = {}
        self._tuples: dict[str, list[tuple]] = {}
        self._fits: dict[tuple[str, tuple], list[tuple[tuple, Fraction]]] = {}
        self._check_constants()
        self._check_closure()

    def _check_constants(self) -> None:
        by_sort: dict[str, dict[Element, str]] = {}
        for name, (sort, elem) in self.sig.consts.items():
            if elem not in self.carriers[sort]:
                raise OracleError(f"constant {name!r} denotes {elem!r}, not on the grid")
            prev = by_sort.setdefault(sort, {}).get(elem)
            if prev is not None:
                raise OracleError(f"constants {prev!r} and {name!r} share one element")
            by_sort[sort][elem] = name

    def _check_closure(self) -> None:
        for sort, dom in self.sig.sorts.items():
            if not isinstance(dom, RealInterval):
                continue
            fns = [
                fs.as_function()
                for name, (s, fs) in sorted(self.sig.fuzzy.items())
                if s == sort
            ]
            have = set(self.carriers[sort])
            missing: set[Fraction] = set()
            for f in fns:
                missing |= set(f.xs) - have
            for f, g in itertools.combinations(fns, 2):
                missing |= set(f.combine(g, minimum=True).xs) - have
            if missing:
                pts = ", ".join(format_rational(p) for p in sorted(missing)[:6])
                raise OracleError(f"grid for {sort!r} misses required points: {pts}")

    @classmethod
    def auto(
        cls, sig: Signature, kb: Iterable[Clause] = (), max_worlds: int = 1 << 25
    ) -> "FiniteContext":
        """Build closed grids from the signature and the clauses at hand.

        Beyond the mandatory breakpoints and crossings this also adds the
        crossings against complemented memberships (where expressions like
        max(1 - B, A) bend), the declared constants, and the endpoints of
        any constant-level cut or support written in the clauses.
        """
        kb = tuple(kb)
        grids: dict[str, tuple[Element, ...]] = {}
        for sort, dom in sig.sorts.items():
            if not isinstance(dom, RealInterval):
                continue
            pts: set[Fraction] = {dom.lo, dom.hi}
            fns = [fs.as_function() for name, (s, fs) in sorted(sig.fuzzy.items()) if s == sort]
            for f in fns:
                pts |= set(f.xs)
            for f, g in itertools.combinations(fns, 2):
                pts |= set(f.combine(g, minimum=True).xs)
            for f in fns:
                neg = f.map_affine(ONE, Fraction(-1))
                for g in fns:
                    pts |= set(neg.combine(g, minimum=True).xs)
            for _, (s, elem) in sig.consts.items():
                if s == sort:
                    pts.add(Fraction(elem))
            pts |= _clause_grid_points(sig, sort, kb)
            grids[sort] = tuple(sorted(pts))
        return cls(sig, grids, max_worlds=max_worlds)

    def carrier(self, sort: str) -> tuple[Element, ...]:
        return self.carriers[sort]


def _clause_grid_points(sig: Signature, sort: str, kb: Iterable[Clause]) -> set[Fraction]:
    pts: set[Fraction] = set()

    def from_term(t: Term) -> None:
        if isinstance(t, PreciseConst) and t.sort == sort and t.name not in sig.consts:
            try:
                pts.add(Fraction(t.name))
            except ValueError:
                pass
        if isinstance(t, (AlphaCut, SupportConst)) and not any(term_vars(t)):
            base = t.base.name
            if sig.fuzzy_sort(base) != sort:
                return
            if isinstance(t, SupportConst):
                cut = sig.fuzzy_set(base).support()
            else:
                lvl = _const_level(t.level)
                if lvl is None:
                    return
                cut = sig.fuzzy_set(base).alpha_cut(lvl)
            sh = cut.shape
            if hasattr(sh, "lo"):
                pts.add(sh.lo)
                pts.add(sh.hi)

    for c in kb:
        for lit in c.literals:
            for a in lit.args:
                from_term(a)
        for leaf in _weight_leaves(c.weight):
            if isinstance(leaf, WMem):
                from_term(leaf.arg)
    return pts


def _const_level(w: WeightExpr) -> Optional[Fraction]:
    return w.value if isinstance(w, WConst) else None


def _weight_leaves(w: WeightExpr) -> Iterator[WeightExpr]:
    if isinstance(w, (WConst, WMem)):
        yield w
    else:
        for a in w.args:
            yield from _weight_leaves(a)


# --------------------------------------------------------------------------
# interpretations


@dataclass(frozen=True)
class Interpretation:
    """One crisp extension per predicate, over the carrier products."""

    ext: tuple[tuple[str, frozenset], ...]

    @staticmethod
    def make(mapping: Mapping[str, Iterable[tuple]]) -> "Interpretation":
        items = tuple(
            (pred, frozenset(tuple(t) for t in tuples)) for pred, tuples in sorted(mapping.items())
        )
        return Interpretation(items)

    def of(self, pred: str) -> frozenset:
        for name, tuples in self.ext:
            if name == pred:
                return tuples
        return frozenset()

    def __str__(self) -> str:
        parts = []
        for name, tuples in self.ext:
            shown = ", ".join("(" + ", ".join(map(str, t)) + ")" for t in sorted(tuples, key=str))
            parts.append(f"{name}={{{shown}}}")
        return "; ".join(parts) if parts else "(empty)"


def _pred_tuples(ctx: FiniteContext, pred: str) -> list[tuple]:
    got = ctx._tuples.get(pred)
    if got is None:
        argsorts = ctx.sig.preds[pred]
        got = list(itertools.product(*(ctx.carrier(s) for s, _ in argsorts)))
        ctx._tuples[pred] = got
    return got


def enumerate_interpretations(ctx: FiniteContext) -> Iterator[Interpretation]:
    """All interpretations of the context, in a stable order."""
    preds = sorted(ctx.sig.preds)
    spaces = [_pred_tuples(ctx, p) for p in preds]
    bits = sum(len(s) for s in spaces)
    if 2**bits > ctx.max_worlds:
        raise WorldBudgetExceeded(f"2^{bits} interpretations exceed the bound {ctx.max_worlds}")
    ranges = [range(1 << len(s)) for s in spaces]
    for masks in itertools.product(*ranges):
        ext = []
        for pred, space, mask in zip(preds, spaces, masks):
            chosen = frozenset(t for k, t in enumerate(space) if mask >> k & 1)
            ext.append((pred, chosen))
        yield Interpretation(tuple(ext))


# --------------------------------------------------------------------------
# truth evaluation


def _meaning_on_carrier(ctx: FiniteContext, t: Term, sort: str) -> dict[Element, Fraction]:
    """Membership of the term's denotation at every carrier element."""
    got = ctx._meanings.get((t, sort))
    if got is None:
        got = _compute_meaning(ctx, t, sort)
        ctx._meanings[(t, sort)] = got
    return got


def _compute_meaning(ctx: FiniteContext, t: Term, sort: str) -> dict[Element, Fraction]:
    carrier = ctx.carrier(sort)
    if isinstance(t, PreciseConst):
        e = ctx.sig.element(t)
        if e not in carrier:
            raise OracleError(f"element {format_term(t)} is not on the grid of {sort!r}")
        return {u: (ONE if u == e else ZERO) for u in carrier}
    if isinstance(t, FuzzyConst):
        fs = ctx.sig.fuzzy_set(t.name)
        return {u: fs.membership(u) for u in carrier}
    if isinstance(t, SupportConst):
        fs = ctx.sig.fuzzy_set(t.base.name).support()
        return {u: fs.membership(u) for u in carrier}
    if isinstance(t, AlphaCut):
        lvl = eval_ground_weight(ctx, t.level)
        fs = ctx.sig.fuzzy_set(t.base.name).alpha_cut(lvl)
        return {u: fs.membership(u) for u in carrier}
    raise OracleError(f"term {format_term(t)} is not ground")


def _tuple_fits(ctx: FiniteContext, lit: Literal) -> list[tuple[tuple, Fraction]]:
    """How well each carrier tuple matches the literal's ground arguments."""
    key = (lit.pred, lit.args)
    got = ctx._fits.get(key)
    if got is None:
        argsorts = ctx.sig.preds[lit.pred]
        vectors = [_meaning_on_carrier(ctx, t, s) for t, (s, _) in zip(lit.args, argsorts)]
        got = [
            (tup, min((vec[u] for vec, u in zip(vectors, tup)), default=ONE))
            for tup in _pred_tuples(ctx, lit.pred)
        ]
        ctx._fits[key] = got
    return got


def literal_truth(ctx: FiniteContext, w: Interpretation, lit: Literal) -> Fraction:
    """sup over tuples inside (or outside) the extension of the fit."""
    inside = w.of(lit.pred)
    best = ZERO
    for tup, fit in _tuple_fits(ctx, lit):
        if (tup in inside) != lit.positive:
            continue
        if fit > best:
            best = fit
            if best == ONE:
                break
    return best


def truth_eval(ctx: FiniteContext, w: Interpretation, literals: Sequence[Literal]) -> Fraction:
    """Truth of a ground clause: max over its literals, 0 when empty."""
    return max((literal_truth(ctx, w, l) for l in literals), default=ZERO)


def clause_truth(ctx: FiniteContext, w: Interpretation, literals: Sequence[Literal]) -> Fraction:
    """Truth of a possibly open clause: inf over variable assignments."""
    vs = sorted({v for l in literals for v in _literal_base_vars(l)}, key=lambda v: v.name)
    if not vs:
        return truth_eval(ctx, w, literals)
    best = ONE
    for combo in itertools.product(*(ctx.carrier(v.sort) for v in vs)):
        theta = Subst.of({v: embed_element(ctx, e, v.sort) for v, e in zip(vs, combo)})
        ground = [apply_literal(theta, l) for l in literals]
        best = min(best, truth_eval(ctx, w, ground))
        if best == ZERO:
            break
    return best


def _literal_base_vars(l: Literal) -> Iterator[Var]:
    for a in l.args:
        yield from term_vars(a)


def embed_element(ctx: FiniteContext, e: Element, sort: str) -> PreciseConst:
    """A precise constant denoting the given carrier element."""
    name = e if isinstance(e, str) else format_rational(e)
    return PreciseConst(name, sort)


# --------------------------------------------------------------------------
# ground weights and ground instances


def eval_ground_weight(ctx: FiniteContext, w: WeightExpr) -> Fraction:
    """Value of a variable-free weight, by enumeration over the carriers.

    Distinct set-denoting terms inside the expression each get one element
    chosen for them, the penalty for choosing outside the set is max'ed in,
    and the whole thing is minimized over the choices.
    """
    terms = sorted(
        {
            leaf.arg
            for leaf in _weight_leaves(w)
            if isinstance(leaf, WMem) and not isinstance(leaf.arg, PreciseConst)
        },
        key=str,
    )
    for t in terms:
        if any(term_vars(t)):
            raise OracleError(f"weight {format_weight(w)} is not ground")

    def value(e: WeightExpr, env: dict[Term, Element]) -> Fraction:
        if isinstance(e, WConst):
            return e.value
        if isinstance(e, WMem):
            fs = ctx.sig.fuzzy_set(e.set_name)
            if isinstance(e.arg, PreciseConst):
                return fs.membership(ctx.sig.element(e.arg))
            return fs.membership(env[e.arg])
        vals = [value(a, env) for a in e.args]
        return min(vals) if isinstance(e, WMin) else max(vals)

    if not terms:
        return value(w, {})
    meanings = [_meaning_on_carrier(ctx, t, term_sort(t)) for t in terms]
    best = ONE
    for combo in itertools.product(*(ctx.carrier(term_sort(t)) for t in terms)):
        env = dict(zip(terms, combo))
        penalty = max((ONE - m[e] for m, e in zip(meanings, combo)), default=ZERO)
        best = min(best, max(penalty, value(w, env)))
    return best


def ground_instances(
    ctx: FiniteContext, c: Clause
) -> list[tuple[tuple[Literal, ...], Fraction]]:
    """Every instantiation of the clause's variables over the carriers.

    A clause with a variable weight reads as the collection of its weighted
    ground instances; a constant-weight clause yields one instance per
    grounding of its base variables.
    """
    vs = clause_vars(c)
    if not vs:
        return [(c.literals, eval_ground_weight(ctx, c.weight))]
    out = []
    for combo in itertools.product(*(ctx.carrier(v.sort) for v in vs)):
        theta = Subst.of({v: embed_element(ctx, e, v.sort) for v, e in zip(vs, combo)})
        lits = tuple(apply_literal(theta, l) for l in c.literals)
        alpha = eval_ground_weight(ctx, apply_weight(theta, c.weight))
        out.append((lits, alpha))
    return out


# --------------------------------------------------------------------------
# necessity, satisfaction, least specific model

PossDist = dict[Interpretation, Fraction]

MODES = ("match", "reciprocal")


def _necessity_factor(mode: str, pi_w: Fraction, truth: Fraction) -> Fraction:
    if mode == "match":
        return max(ONE - pi_w, truth)
    # reciprocal of Goedel's implication: 1 when pi fits under the truth
    return ONE if pi_w <= truth else ONE - pi_w


def clause_necessity(
    ctx: FiniteContext, pi: PossDist, literals: Sequence[Literal], mode: str = "match"
) -> Fraction:
    """inf over interpretations of the chosen necessity combination.

    Interpretations outside the support of pi contribute 1, so the infimum
    only runs over the support.
    """
    if mode not in MODES:
        raise OracleError(f"unknown necessity mode {mode!r}")
    best = ONE
    for w, p in pi.items():
        if p == ZERO:
            continue
        best = min(best, _necessity_factor(mode, p, truth_eval(ctx, w, literals)))
        if best == ZERO:
            break
    return best


def satisfies(ctx: FiniteContext, pi: PossDist, c: Clause, mode: str = "match") -> bool:
    """Def-style satisfaction: every ground instance is certain enough."""
    return all(
        clause_necessity(ctx, pi, lits, mode) >= alpha for lits, alpha in ground_instances(ctx, c)
    )


def _constraint_factor(mode: str, truth: Fraction, alpha: Fraction) -> Fraction:
    if mode == "match":
        return max(ONE - alpha, ONE if truth >= alpha else ZERO)
    return max(ONE - alpha, truth)


def least_specific_model(
    ctx: FiniteContext,
    instances: Iterable[tuple[Sequence[Literal], Fraction]],
    mode: str = "match",
) -> PossDist:
    """The pointwise largest distribution satisfying the ground clauses.

    Each weighted clause caps the possibility of the interpretations that
    fail it; a distribution satisfies the set iff it sits under this one
    everywhere, so entailment checks reduce to this single model.
    """
    if mode not in MODES:
        raise OracleError(f"unknown necessity mode {mode!r}")
    instances = [(tuple(lits), alpha) for lits, alpha in instances]
    pi: PossDist = {}
    for w in enumerate_interpretations(ctx):
        cap = ONE
        for lits, alpha in instances:
            if alpha == ZERO:
                continue
            cap = min(cap, _constraint_factor(mode, truth_eval(ctx, w, lits), alpha))
            if cap == ZERO:
                break
        pi[w] = cap
    return pi


def model_height(pi: PossDist) -> Fraction:
    return max(pi.values(), default=ZERO)


# --------------------------------------------------------------------------
# the decision route
#
# Enumeration is exponential in the number of ground atoms, which AC-sized
# signatures already push past a quarter million interpretations.  Under the
# matching measure the question "is the query certain to level v" only asks
# whether a counter-interpretation exists: one that keeps every instance
# weighted at or above v true to its weight while the query's truth stays
# below v.  That is a satisfiability problem with one boolean per ground
# atom, and degrees and heights fall out of it because both range over a
# small set of candidate levels.

GroundInstance = tuple[tuple[Literal, ...], Fraction]

_SatVar = tuple[str, tuple]
_SatLit = tuple[_SatVar, bool]


def _dpll(clauses: list[list[_SatLit]], assign: dict[_SatVar, bool]) -> Optional[dict]:
    """Unit-propagating backtracker, sized for a few dozen clauses."""
    clauses = list(clauses)
    assign = dict(assign)
    while True:
        unit: Optional[_SatLit] = None
        pending: list[list[_SatLit]] = []
        for cl in clauses:
            live: list[_SatLit] = []
            satisfied = False
            for var, want in cl:
                got = assign.get(var)
                if got is None:
                    live.append((var, want))
                elif got == want:
                    satisfied = True
                    break
            if satisfied:
                continue
            if not live:
                return None
            if len(live) == 1:
                unit = live[0]
            pending.append(live)
        clauses = pending
        if unit is None:
            break
        assign[unit[0]] = unit[1]
    if not clauses:
        return assign
    var, want = clauses[0][0]
    for choice in (want, not want):
        got = _dpll(clauses, {**assign, var: choice})
        if got is not None:
            return got
    return None


def _instance_options(
    ctx: FiniteContext, lits: Sequence[Literal], alpha: Fraction
) -> list[_SatLit]:
    """The atom settings that make the ground clause true to degree alpha."""
    return [
        ((l.pred, tup), l.positive)
        for l in lits
        for tup, fit in _tuple_fits(ctx, l)
        if fit >= alpha
    ]


def _counter_world(
    ctx: FiniteContext,
    instances: Sequence[GroundInstance],
    query: Sequence[Literal],
    level: Fraction,
) -> Optional[Interpretation]:
    """An interpretation witnessing necessity below the level, if any.

    Instances weighted under the level cannot drag possibility low enough
    to matter, so only the others constrain the search; the query's truth
    is pinned below the level by fixing every atom that fits it there.
    """
    if level == ZERO:
        return None
    clauses: list[list[_SatLit]] = []
    for lits, alpha in instances:
        if alpha < level:
            continue
        options = _instance_options(ctx, lits, alpha)
        if not options:
            return None
        clauses.append(options)
    forced: dict[_SatVar, bool] = {}
    for l in query:
        for tup, fit in _tuple_fits(ctx, l):
            if fit < level:
                continue
            var = (l.pred, tup)
            want = not l.positive
            if forced.setdefault(var, want) != want:
                return None
    model = _dpll(clauses, forced)
    if model is None:
        return None
    ext: dict[str, set] = {p: set() for p in ctx.sig.preds}
    for (pred, tup), present in model.items():
        if present:
            ext[pred].add(tup)
    return Interpretation.make(ext)


def _decision_degree(
    ctx: FiniteContext,
    instances: Sequence[GroundInstance],
    query: Sequence[Literal],
) -> tuple[Fraction, Optional[Interpretation]]:
    """Exact necessity of a ground query clause, without enumeration.

    The necessity is max(1 - possibility, truth) at its worst world, and
    both arms only take values among the instance weights, the query's fit
    values, and the bounds; binary search over those candidates with the
    counter-world check lands on it exactly.
    """
    levels = {ZERO, ONE}
    levels.update(alpha for _, alpha in instances)
    for l in query:
        levels.update(fit for _, fit in _tuple_fits(ctx, l))
    ordered = sorted(levels)
    lo, hi = 0, len(ordered) - 1
    while lo < hi:
        mid = (lo + hi + 1) // 2
        if _counter_world(ctx, instances, query, ordered[mid]) is None:
            lo = mid
        else:
            hi = mid - 1
    witness = None
    if lo + 1 < len(ordered):
        witness = _counter_world(ctx, instances, query, ordered[lo + 1])
    return ordered[lo], witness


def _decision_height(ctx: FiniteContext, instances: Sequence[GroundInstance]) -> Fraction:
    """Largest possibility the least specific model reaches anywhere."""
    levels = sorted({ONE, *(ONE - alpha for _, alpha in instances)}, reverse=True)
    for h in levels:
        if h == ZERO:
            break
        hard = [
            _instance_options(ctx, lits, alpha)
            for lits, alpha in instances
            if alpha > ONE - h
        ]
        if all(hard) and _dpll(hard, {}) is not None:
            return h
    return ZERO


def _world_bits(ctx: FiniteContext) -> int:
    return sum(len(_pred_tuples(ctx, p)) for p in ctx.sig.preds)


# --------------------------------------------------------------------------
# entailment


@dataclass(frozen=True)
class OracleReport:
    entailed: bool
    degree: Optional[Fraction]
    threshold: Fraction
    height: Fraction
    witness: Optional[Interpretation]
    instances: int
    mode: str

    def as_dict(self) -> dict:
        return {
            "entailed": self.entailed,
            "degree": None if self.degree is None else format_rational(self.degree),
            "threshold": format_rational(self.threshold),
            "model_height": format_rational(self.height),
            "witness": None if self.witness is None else str(self.witness),
            "query_instances": self.instances,
            "mode": self.mode,
        }


def oracle_entails(
    ctx: FiniteContext,
    kb: Iterable[Clause],
    query: Clause,
    beta: Fraction = ONE,
    mode: str = "match",
    normalized: bool = False,
    method: str = "auto",
) -> OracleReport:
    """Does every model of kb make the query clause certain to its weight?

    The query's weight is capped at beta; a query with variables is read as
    the set of its ground instances.  With normalized=True a subnormalized
    least specific model means the kb admits no model at all and the check
    holds vacuously; by default subnormalization is only reported through
    the height field.

    method picks the engine.  "enumerate" walks every interpretation and is
    the reference; "decide" goes through the counter-world search, which is
    exact for the matching measure and stays fast when the atom count makes
    enumeration hopeless; "auto" enumerates while that is affordable.
    """
    if method not in ("auto", "enumerate", "decide"):
        raise OracleError(f"unknown oracle method {method!r}")
    if method == "auto":
        method = "enumerate" if mode != "match" or _world_bits(ctx) <= 14 else "decide"
    if method == "decide" and mode != "match":
        raise OracleError("the decision route only covers the matching measure")

    all_instances: list[GroundInstance] = []
    for c in kb:
        all_instances.extend(ground_instances(ctx, c))

    if method == "decide":
        height = _decision_height(ctx, all_instances)
        if normalized and height < ONE:
            return OracleReport(True, None, beta, height, None, 0, mode)
        worst: Optional[Fraction] = None
        witness: Optional[Interpretation] = None
        entailed = True
        checked = 0
        for lits, alpha in ground_instances(ctx, query):
            need = min(beta, alpha)
            got, wit = _decision_degree(ctx, all_instances, lits)
            checked += 1
            if got < need:
                entailed = False
            if worst is None or got < worst:
                worst = got
                witness = wit
        return OracleReport(entailed, worst, beta, height, witness, checked, mode)

    pi = least_specific_model(ctx, all_instances, mode)
    height = model_height(pi)

    if normalized and height < ONE:
        return OracleReport(True, None, beta, height, None, 0, mode)

    worst = None
    witness = None
    entailed = True
    checked = 0
    for lits, alpha in ground_instances(ctx, query):
        need = min(beta, alpha)
        got = clause_necessity(ctx, pi, lits, mode)
        checked += 1
        if got < need:
            entailed = False
        if worst is None or got < worst:
            worst = got
            witness = _necessity_witness(ctx, pi, lits, mode)
    return OracleReport(entailed, worst, beta, height, witness, checked, mode)


def entailment_degree(
    ctx: FiniteContext, kb: Iterable[Clause], literals: Sequence[Literal], mode: str = "match"
) -> Fraction:
    """The exact necessity the kb forces on one ground base clause."""
    all_instances: list[tuple[tuple[Literal, ...], Fraction]] = []
    for c in kb:
        all_instances.extend(ground_instances(ctx, c))
    pi = least_specific_model(ctx, all_instances, mode)
    return clause_necessity(ctx, pi, literals, mode)


def _necessity_witness(
    ctx: FiniteContext, pi: PossDist, literals: Sequence[Literal], mode: str
) -> Optional[Interpretation]:
    best: Optional[Fraction] = None
    arg: Optional[Interpretation] = None
    for w, p in pi.items():
        if p == ZERO:
            continue
        v = _necessity_factor(mode, p, truth_eval(ctx, w, literals))
        if best is None or v < best:
            best, arg = v, w
    return arg


# --------------------------------------------------------------------------
# the axioms behind the measure


def check_necessity_axioms(
    omega: Sequence,
    pi: Mapping,
    subsets: Sequence[Mapping],
    levels: Sequence[Fraction] = (ZERO, Fraction(1, 2), ONE),
) -> bool:
    """Verify the four characteristic properties on an abstract finite set.

    The measure under test is N(A) = inf_w max(1 - pi(w), A(w)).  Boundary
    values need the distribution to be normalized (otherwise the empty set
    genuinely fails to get measure 0, and the check reports that).
    """
    if not omega:
        return False

    def n(mu) -> Fraction:
        return min(max(ONE - Fraction(pi.get(w, 0)), Fraction(mu.get(w, 0))) for w in omega)

    whole = {w: ONE for w in omega}
    empty: dict = {}
    if n(whole) != ONE or n(empty) != ZERO:
        return False
    for a, b in itertools.combinations_with_replacement(subsets, 2):
        meet = {w: min(Fraction(a.get(w, 0)), Fraction(b.get(w, 0))) for w in omega}
        if n(meet) != min(n(a), n(b)):
            return False
    for a in subsets:
        if not all(Fraction(a.get(w, 0)) in (ZERO, ONE) for w in omega):
            continue
        for lvl in levels:
            lifted = {w: max(lvl, Fraction(a.get(w, 0))) for w in omega}
            if n(lifted) != max(lvl, n(a)):
                return False
    return True
