"""The inference rules and exact evaluation of clause weights.

Resolution here does three things classical resolution does not:

* the unifier may bind a variable to a level-cut term, in which case the
  weight is not substituted textually but *grounded*: the bound variable
  becomes a fresh integration variable and the weight picks up the factor
  max(1 - B(v), ...) under an infimum, one per bound variable;
* a weight can keep symbolic leaves (memberships of still-free variables,
  cuts whose level mentions a variable) and only collapses to a rational
  once everything is instantiated or eliminated;
* clauses whose bases are equal up to renaming are merged by taking the
  pointwise max of their weights, which is what lets several partial
  certainties about one statement add up.

All eliminations (inf over restricted product variables, sup for fusion,
thresholds and guards) go through lattice normal forms: min-of-max for
infima, max-of-min for suprema.  Within one normal-form clause, leaves
grouped by variable are combined pointwise and reduced exactly by the
piecewise-linear layer, so every number that comes out is a rational that
an enumeration over a sufficiently fine grid would confirm.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence, Union

from plfc.fuzzy import (
    FuzzySet,
    MembershipFn,
    PiecewiseLinear,
    RealInterval,
    ValueTable,
    necessity,
    necessity_of_cut_function,
    ONE,
    ZERO,
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
    WMax,
    WMem,
    WMin,
    base_vars,
    format_term,
    format_weight,
    normalize_weight,
    term_sort,
    term_vars,
    weight_key,
    weight_vars,
    wmax,
    wmin,
)
from plfc.substitution import (
    Subst,
    apply_literal,
    apply_weight,
    find_variant_renaming,
    mgs_literals,
)


class CalculusError(ValueError):
    pass


class UngroundCutLevel(CalculusError):
    """A cut level had to be a number but still contains variables."""


class NotEliminable(CalculusError):
    """A weight leaf depends on several variables at once; the normal-form
    eliminations only handle leaves of at most one variable."""


# --------------------------------------------------------------------------
# meanings of ground terms


def ground_meaning(t: Term, sig: Signature) -> FuzzySet:
    """The (possibly fuzzy) set a ground, set-denoting term stands for."""
    if isinstance(t, FuzzyConst):
        return sig.fuzzy_set(t.name)
    if isinstance(t, SupportConst):
        return sig.fuzzy_set(t.base.name).support()
    if isinstance(t, AlphaCut):
        return sig.fuzzy_set(t.base.name).alpha_cut(eval_level(t.level, sig))
    raise CalculusError(f"{format_term(t)} does not denote a set")


def eval_level(lvl: WeightExpr, sig: Signature) -> Fraction:
    v = eval_weight(lvl, sig)
    if v.degree is None:
        raise UngroundCutLevel(f"cut level {format_weight(lvl)} is not ground")
    return v.degree


def eval_ground_leaf(leaf: WMem, sig: Signature) -> Fraction:
    """mem(S, t) for ground t: membership for points, necessity for sets."""
    fs = sig.fuzzy_set(leaf.set_name)
    t = leaf.arg
    if isinstance(t, PreciseConst):
        return fs.membership(sig.element(t))
    return necessity(fs, ground_meaning(t, sig))


# --------------------------------------------------------------------------
# single-variable weight functions


def _constant_fn(dom, value: Fraction) -> MembershipFn:
    if isinstance(dom, RealInterval):
        return PiecewiseLinear.constant(dom.lo, dom.hi, value)
    return ValueTable(dom.symbols, tuple(value for _ in dom.symbols))


def cut_necessity_function(a: FuzzySet, c: FuzzySet) -> PiecewiseLinear:
    """t -> N(a | cut of c at t) on [0, 1], for either kind of domain."""
    if isinstance(a.domain, RealInterval):
        return necessity_of_cut_function(a, c)
    # finite domain: the cut only changes at c's attained membership values,
    # and between two consecutive values the necessity is constant
    levels = sorted({ZERO, ONE} | {c.membership(s) for s in c.domain.symbols})
    xs: list[Fraction] = []
    at: list[Fraction] = []
    segs: list[tuple[Fraction, Fraction]] = []

    def n_at(t: Fraction) -> Fraction:
        return necessity(a, c.alpha_cut(t))

    for i, t in enumerate(levels):
        xs.append(t)
        at.append(n_at(t))
        if i + 1 < len(levels):
            # on the open interval the cut equals the cut at the right end
            segs.append((n_at(levels[i + 1]), ZERO))
    return PiecewiseLinear(tuple(xs), tuple(at), tuple(segs)).simplify()


def weight_fn(w: WeightExpr, var: Var, sig: Signature) -> MembershipFn:
    """The weight as an exact function of one variable over its sort."""
    dom = sig.domain(var.sort)
    if isinstance(w, WConst):
        return _constant_fn(dom, w.value)
    if isinstance(w, WMem):
        vs = set(term_vars(w.arg))
        if not vs:
            return _constant_fn(dom, eval_ground_leaf(w, sig))
        if vs != {var}:
            raise NotEliminable(
                f"leaf {format_weight(w)} depends on {[v.name for v in vs]}, expected {var.name}"
            )
        return _leaf_fn(w, var, sig)
    parts = [weight_fn(a, var, sig) for a in w.args]
    out = parts[0]
    for p in parts[1:]:
        out = out.combine(p, minimum=isinstance(w, WMin))  # type: ignore[arg-type]
    return out


def _leaf_fn(leaf: WMem, var: Var, sig: Signature) -> MembershipFn:
    fs = sig.fuzzy_set(leaf.set_name)
    t = leaf.arg
    if isinstance(t, Var):
        return fs.as_function()
    if isinstance(t, AlphaCut):
        base = sig.fuzzy_set(t.base.name)
        outer = cut_necessity_function(fs, base)
        inner = weight_fn(t.level, var, sig)
        if isinstance(inner, ValueTable):
            return ValueTable(inner.symbols, tuple(outer.value(v) for v in inner.values))
        return outer.compose_into(inner)
    raise NotEliminable(f"cannot treat {format_weight(leaf)} as a function of {var.name}")


# --------------------------------------------------------------------------
# normal forms and eliminations


@dataclass(frozen=True)
class NegRestrict:
    """Internal leaf 1 - B(v): the penalty for leaving the restriction B."""

    fs: FuzzySet
    var: Var


El = Union[WeightExpr, NegRestrict]


def _leaf_vars(leaf: El) -> set[Var]:
    if isinstance(leaf, NegRestrict):
        return {leaf.var}
    if isinstance(leaf, WMem):
        return set(term_vars(leaf.arg))
    return set()


def _min_of_max(w: WeightExpr) -> list[list[WeightExpr]]:
    if isinstance(w, (WConst, WMem)):
        return [[w]]
    if isinstance(w, WMin):
        out: list[list[WeightExpr]] = []
        for a in w.args:
            out.extend(_min_of_max(a))
        return out
    # max: cross product of the children's clause lists
    clauses: list[list[WeightExpr]] = [[]]
    for a in w.args:
        sub = _min_of_max(a)
        clauses = [c + s for c in clauses for s in sub]
    return clauses


def _max_of_min(w: WeightExpr) -> list[list[WeightExpr]]:
    if isinstance(w, (WConst, WMem)):
        return [[w]]
    if isinstance(w, WMax):
        out: list[list[WeightExpr]] = []
        for a in w.args:
            out.extend(_max_of_min(a))
        return out
    clauses = [[]]
    for a in w.args:
        sub = _max_of_min(a)
        clauses = [c + s for c in clauses for s in sub]
    return clauses


def _leaf_fn_any(leaf: El, var: Var, sig: Signature) -> MembershipFn:
    if isinstance(leaf, NegRestrict):
        return leaf.fs.as_function().map_affine(ONE, Fraction(-1))
    return weight_fn(leaf, var, sig)


def _reduce_group(
    leaves: Sequence[El], var: Var, sig: Signature, minimum_inside: bool, take_inf: bool
) -> Fraction:
    fn = _leaf_fn_any(leaves[0], var, sig)
    for leaf in leaves[1:]:
        fn = fn.combine(_leaf_fn_any(leaf, var, sig), minimum=minimum_inside)  # type: ignore[arg-type]
    return fn.inf() if take_inf else fn.sup()


def eliminate_inf(
    w: WeightExpr, restricted: dict[Var, FuzzySet], sig: Signature
) -> WeightExpr:
    """inf over the restricted variables of max(1 - B_v(v), ..., w).

    Exact because the infimum distributes over the outer min of the normal
    form, and within one max-clause the variables are independent, so each
    variable group reduces to the infimum of a pointwise max.
    """
    if not restricted:
        return _fold_ground(w, sig)
    neg = [NegRestrict(fs, v) for v, fs in restricted.items()]
    clauses = _min_of_max(normalize_weight(w))
    results: list[WeightExpr] = []
    for clause in clauses:
        parts = _split_clause(list(clause) + list(neg), set(restricted), sig, inside_max=True)
        results.append(wmax(*parts))
    return wmin(*results)


def eliminate_sup(w: WeightExpr, over: set[Var], sig: Signature) -> WeightExpr:
    """sup over the given (unrestricted) variables of w, exactly."""
    w = normalize_weight(w)
    if not over:
        return _fold_ground(w, sig)
    clauses = _max_of_min(w)
    results: list[WeightExpr] = []
    for clause in clauses:
        parts = _split_clause(list(clause), over, sig, inside_max=False)
        results.append(wmin(*parts))
    return wmax(*results)


def _split_clause(
    leaves: list[El], lift: set[Var], sig: Signature, inside_max: bool
) -> list[WeightExpr]:
    """Reduce one normal-form clause, eliminating the lifted variables.

    Leaves of one lifted variable are combined pointwise and replaced by the
    appropriate extremum; ground leaves are evaluated; everything else
    survives symbolically (after partial evaluation of its cut levels).
    """
    by_var: dict[Var, list[El]] = {}
    out: list[WeightExpr] = []
    for leaf in leaves:
        vs = _leaf_vars(leaf)
        hit = vs & lift
        if not hit:
            if isinstance(leaf, WMem) and not vs:
                out.append(WConst(eval_ground_leaf(leaf, sig)))
            elif isinstance(leaf, WMem):
                out.append(_partial_leaf(leaf, sig))
            else:
                out.append(leaf)  # WConst
            continue
        if len(vs) > 1:
            raise NotEliminable(
                f"leaf {format_weight(leaf) if not isinstance(leaf, NegRestrict) else '1-B'} "
                f"mixes variables {sorted(v.name for v in vs)}"
            )
        by_var.setdefault(next(iter(vs)), []).append(leaf)
    for var, group in sorted(by_var.items(), key=lambda kv: kv[0].name):
        val = _reduce_group(group, var, sig, minimum_inside=not inside_max, take_inf=inside_max)
        out.append(WConst(val))
    return out


def _partial_leaf(leaf: WMem, sig: Signature) -> WMem:
    """Evaluate the ground parts inside a symbolic leaf's cut level."""
    if isinstance(leaf.arg, AlphaCut):
        lvl = eval_weight(leaf.arg.level, sig).expr
        return WMem(leaf.set_name, AlphaCut(leaf.arg.base, lvl))
    return leaf


def _fold_ground(w: WeightExpr, sig: Signature) -> WeightExpr:
    if isinstance(w, WConst):
        return w
    if isinstance(w, WMem):
        if not _leaf_vars(w):
            return WConst(eval_ground_leaf(w, sig))
        return _partial_leaf(w, sig)
    args = tuple(_fold_ground(a, sig) for a in w.args)
    return normalize_weight(WMin(args) if isinstance(w, WMin) else WMax(args))


# --------------------------------------------------------------------------
# weight evaluation


@dataclass(frozen=True)
class WeightValue:
    """Result of evaluating a weight: ground degree or residual expression."""

    expr: WeightExpr

    @property
    def degree(self) -> Optional[Fraction]:
        return self.expr.value if isinstance(self.expr, WConst) else None

    @property
    def is_ground(self) -> bool:
        return isinstance(self.expr, WConst)

    def __str__(self) -> str:
        return format_weight(self.expr)


def eval_weight(w: WeightExpr, sig: Signature) -> WeightValue:
    """Maximal partial evaluation of a weight expression.

    Ground membership leaves become numbers.  Distinct occurrences of one
    ground set-denoting term are read as one existential choice: they share
    a single product variable, so max(A(B), C(B)) evaluates to the joint
    N(max(A,C) | B) rather than to the strictly smaller pair-wise
    max(N(A|B), N(C|B)).

    Results are memoized per signature.  That is sound because declarations
    are add-only (a name can never be redeclared), so nothing a weight was
    once evaluated against can change under it.  Nested cut levels make the
    same subexpressions come back constantly during a refutation search.
    """
    memo = sig.__dict__.setdefault("_eval_memo", {})
    k = weight_key(w)
    out = memo.get(k)
    if out is None:
        out = WeightValue(eval_weight_with(w, {}, sig))
        memo[k] = out
    return out


# --------------------------------------------------------------------------
# the rules


@dataclass(frozen=True)
class Resolvent:
    clause: Clause
    theta: Subst


def resolve_gr(c1: Clause, i1: int, c2: Clause, i2: int, sig: Signature) -> Optional[Resolvent]:
    """General resolution of c1's i1-th literal against c2's i2-th.

    The caller standardizes the clauses apart.  The resolvent's weight is
    min of the premise weights with the unifier applied; variables that the
    unifier binds to set-denoting terms with a ground level are grounded
    jointly (one integration variable per bound variable, true to the rule's
    closed form), while bindings whose cut level still has variables stay
    textual and keep the weight symbolic.
    """
    l1, l2 = c1.literals[i1], c2.literals[i2]
    if l1.positive == l2.positive or l1.pred != l2.pred:
        return None
    theta = mgs_literals(l1, l2, sig)
    if theta is None:
        return None
    rest = [l for k, l in enumerate(c1.literals) if k != i1]
    rest += [l for k, l in enumerate(c2.literals) if k != i2]
    seen = set()
    base: list[Literal] = []
    for lit in rest:
        lit = apply_literal(theta, lit)
        if lit not in seen:
            seen.add(lit)
            base.append(lit)
    textual: dict[Var, Term] = {}
    restricted: dict[Var, FuzzySet] = {}
    for v, t in theta.map:
        if isinstance(t, (SupportConst, AlphaCut, FuzzyConst)) and not any(term_vars(t)):
            restricted[v] = ground_meaning(t, sig)
        else:
            textual[v] = t
    w = apply_weight(Subst.of(textual), wmin(c1.weight, c2.weight))
    w = eval_weight_with(w, restricted, sig)
    return Resolvent(Clause(tuple(base), w), theta)


def _always_one(set_name: str, sig: Signature) -> bool:
    """Does the set hold with degree one across its whole domain?"""
    return sig.fuzzy_set(set_name).as_function().inf() == ONE


def _drop_unit_leaves(w: WeightExpr, sig: Signature) -> WeightExpr:
    """Fold membership leaves over everywhere-one sets to the constant one.

    Such a restriction is vacuous whatever its argument denotes: every
    element satisfies it fully, and conditioning on an empty meaning is
    vacuous as well. Folding them early keeps resolvent weights (and the
    cut levels stamped from them) from accreting trivial leaves.
    """
    if isinstance(w, WMem) and _always_one(w.set_name, sig):
        return WConst(ONE)
    if isinstance(w, (WMin, WMax)):
        args = tuple(_drop_unit_leaves(a, sig) for a in w.args)
        return WMin(args) if isinstance(w, WMin) else WMax(args)
    return w


def eval_weight_with(
    w: WeightExpr, restricted: dict[Var, FuzzySet], sig: Signature
) -> WeightExpr:
    """Like eval_weight but with extra already-restricted product variables."""
    shared: dict[Term, Var] = {}
    joint = dict(restricted)

    def rewrite(e: WeightExpr) -> WeightExpr:
        if isinstance(e, WConst):
            return e
        if isinstance(e, WMem):
            if _always_one(e.set_name, sig):
                return WConst(ONE)
            t = e.arg
            if isinstance(t, (FuzzyConst, SupportConst, AlphaCut)) and not any(term_vars(t)):
                if t not in shared:
                    v = Var(f"%e{len(shared)}", term_sort(t))
                    shared[t] = v
                    joint[v] = ground_meaning(t, sig)
                return WMem(e.set_name, shared[t])
            return e
        args = tuple(rewrite(a) for a in e.args)
        return WMin(args) if isinstance(e, WMin) else WMax(args)

    rewritten = normalize_weight(rewrite(normalize_weight(w)))
    return eliminate_inf(rewritten, joint, sig)


def fuse_fr(c: Clause, sig: Signature) -> Clause:
    """Eliminate weight-only variables by an exact supremum over their sorts.

    Ground set leaves are folded through the shared-product evaluation first,
    so the supremum acts on the weight's actual value as a function of the
    surviving variables.
    """
    keep = base_vars(c)
    extra = {v for v in weight_vars(c.weight) if v not in keep}
    if not extra:
        return c
    w = eval_weight_with(c.weight, {}, sig)
    return Clause(c.literals, eliminate_sup(w, extra, sig))


def merge_gm(c1: Clause, c2: Clause) -> Optional[Clause]:
    """Merge two clauses whose bases are variants: max of the weights."""
    theta = find_variant_renaming(c1, c2)
    if theta is None:
        return None
    return Clause(c2.literals, wmax(apply_weight(theta, c1.weight), c2.weight))


def equivalent_transform(c: Clause, sig: Optional[Signature] = None) -> Clause:
    """Rewrite every raw fuzzy constant in the base to its weight-level cut.

    The cut level is the clause's entire weight expression: for each way of
    grounding the variables, the clause with weight w constrains models
    exactly like the one whose constant is cut at w.  When the signature is
    at hand, vacuous membership leaves fold away first, so the stamped
    level stays as small as the weight's actual value function.
    """
    w = normalize_weight(c.weight)
    if sig is not None:
        w = normalize_weight(_drop_unit_leaves(w, sig))

    def fix(t: Term) -> Term:
        if isinstance(t, FuzzyConst):
            return AlphaCut(t, w)
        return t

    lits = tuple(Literal(l.positive, l.pred, tuple(fix(a) for a in l.args)) for l in c.literals)
    return Clause(lits, w)


def sup_over_groundings(w: WeightExpr, sig: Signature) -> Fraction:
    """The exact supremum of the weight's value over all variable groundings."""
    r = eval_weight_with(w, {}, sig)
    val = eliminate_sup(r, set(weight_vars(r)), sig)
    if not isinstance(val, WConst):
        raise NotEliminable(f"supremum of {format_weight(w)} not reducible")
    return val.value


def threshold_value(c: Clause, sig: Signature) -> Fraction:
    """The best weight any grounding of the clause could reach."""
    return sup_over_groundings(c.weight, sig)


def guard_supremum(w: WeightExpr, sig: Signature) -> Fraction:
    """Exact sup of a resolvent weight over its remaining variables."""
    return sup_over_groundings(w, sig)
