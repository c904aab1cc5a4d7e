"""Query negation, clause-set preparation, and the refutation search.

Answering "does the knowledge base force this formula to degree alpha"
goes through three stages.  The query is turned into clauses asserting
its failure: every literal flips polarity, fuzzy constants become fresh
variables restricted through the weight, and restricted variables become
the supports of their restricting sets.  The knowledge base plus those
clauses is then normalized: weight-only variables are summed out, clauses
whose weight cannot reach alpha are dropped, clauses with variant bases
are merged, remaining fuzzy constants are rewritten to weight-level cuts,
and structural duplicates are removed.  Finally the set is grown toward
its resolution closure until an empty clause of weight at least alpha
appears.

The search is deliberately plain: clause pairs are tried oldest first,
literals left to right, and resolvents that merely rename something
already present are not kept.  Budgets on the step count, the derivation
depth and the clause size bound the search; running into any of them
means the answer is "not proved here", which is also all a failed search
ever means, since the calculus is sound but has no completeness
guarantee.

Every derivation is recorded in a trace.  Renaming-apart suffixes are the
trace ids themselves, so replaying a trace re-executes each step bit for
bit and flags the first step whose result differs from the record.
"""

from __future__ import annotations

import itertools
import json
from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Iterable, Optional, Sequence

from plfc.calculus import (
    CalculusError,
    equivalent_transform,
    eval_weight,
    fuse_fr,
    guard_supremum,
    merge_gm,
    resolve_gr,
    threshold_value,
)
from plfc.fuzzy import ONE, ZERO, format_rational, frac
from plfc.language import (
    AlphaCut,
    Clause,
    FuzzyConst,
    KnowledgeBase,
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
    clause_key,
    clause_size,
    clause_vars,
    format_clause,
    format_weight,
    literal_vars,
    wmin,
)
from plfc.substitution import Subst, apply_clause, rename_with_suffix


class RefutationError(ValueError):
    """The refutation machinery was asked something it cannot do."""


class QueryShapeError(RefutationError):
    """The query clause falls outside the supported shapes."""


class ReplayMismatch(RefutationError):
    """A recorded derivation step does not reproduce its recorded result."""


# --------------------------------------------------------------------------
# queries


@dataclass(frozen=True)
class Query:
    """A weighted clause to prove from the base.

    The weight may combine one rational constant with memberships of the
    clause's own variables, one per variable: ``(p(x), min(1/2, B(x)))``
    asks that p hold at least to 1/2 wherever B reaches.
    """

    clause: Clause

    @property
    def beta(self) -> Fraction:
        """The constant part of the weight; 1 when there is none."""
        consts = [l.value for l in _weight_leaves(self.clause.weight) if isinstance(l, WConst)]
        return min(consts) if consts else ONE


def _weight_leaves(w: WeightExpr) -> list[WeightExpr]:
    if isinstance(w, (WConst, WMem)):
        return [w]
    if isinstance(w, WMax):
        raise QueryShapeError("query weights combine restrictions with min, not max")
    return [leaf for a in w.args for leaf in _weight_leaves(a)]


def _checked_query(query: Query, sig: Signature) -> tuple[tuple[Literal, ...], dict[Var, str]]:
    """Validate the query shape; return its literals and var restrictions."""
    c = query.clause
    if not c.literals:
        raise QueryShapeError("a query needs at least one literal")
    sig.check_clause(c)
    for lit in c.literals:
        for arg in lit.args:
            if isinstance(arg, (AlphaCut, SupportConst)):
                raise QueryShapeError(
                    "query arguments are variables, precise constants or fuzzy constants"
                )
    counts = Counter(v for lit in c.literals for v in literal_vars(lit))
    for v, n in counts.items():
        if n > 1:
            raise QueryShapeError(f"variable {v.name} occurs more than once in the query")
    leaves = _weight_leaves(c.weight)
    if sum(isinstance(l, WConst) for l in leaves) > 1:
        raise QueryShapeError("query weights carry at most one constant")
    restriction: dict[Var, str] = {}
    for leaf in leaves:
        if isinstance(leaf, WConst):
            continue
        if not isinstance(leaf.arg, Var):
            raise QueryShapeError("query weight restrictions must apply to variables")
        v = leaf.arg
        if v in restriction:
            raise QueryShapeError(f"variable {v.name} is restricted twice in the weight")
        if v not in counts:
            raise QueryShapeError(f"restricted variable {v.name} does not occur in the query")
        restriction[v] = leaf.set_name
    loose = sorted(v.name for v in counts if v not in restriction)
    if loose:
        raise QueryShapeError(
            "every query variable needs a restricting set in the weight: " + ", ".join(loose)
        )
    return c.literals, restriction


def check_query(query: Query, sig: Signature) -> None:
    """Raise QueryShapeError (or LanguageError) unless the query is supported."""
    _checked_query(query, sig)


def negate_query(query: Query, sig: Signature) -> tuple[Clause, ...]:
    """Clauses asserting the query fails, ready to join the clause set.

    One clause per query literal, polarity flipped.  A fuzzy constant
    becomes a fresh variable restricted by that set in the weight: denying
    "p holds somewhere on A" means denying p across A, to the degree each
    point belongs.  A restricted variable becomes the support of its
    restriction, with weight 1: denying "p holds to beta all over B" at
    any useful degree requires a failure point somewhere B is positive.
    Precise constants ride along unchanged.
    """
    lits, restriction = _checked_query(query, sig)
    fresh = itertools.count(1)
    out = []
    for lit in lits:
        args: list[Term] = []
        leaves: list[WeightExpr] = []
        for arg in lit.args:
            if isinstance(arg, Var):
                args.append(SupportConst(FuzzyConst(restriction[arg], arg.sort)))
            elif isinstance(arg, FuzzyConst):
                v = Var(f"q{next(fresh)}", arg.sort)
                args.append(v)
                leaves.append(WMem(arg.name, v))
            else:
                args.append(arg)
        weight = wmin(*leaves) if leaves else WConst(ONE)
        flipped = Literal(not lit.positive, lit.pred, tuple(args))
        out.append(Clause((flipped,), weight))
    return tuple(out)


# --------------------------------------------------------------------------
# traces


@dataclass(frozen=True)
class TraceEvent:
    """One derivation step.  ``rule`` says which transformation ran:

    input     a knowledge base clause entering the set
    negation  a clause from the negated query
    FR        weight-only variables summed out
    drop      a clause removed (weight cannot reach alpha, or duplicate)
    GM        two variant clauses merged, max of weights
    EQ        fuzzy constants rewritten to weight-level cuts
    GR        a resolution step; positions index the parents' literals

    For GR steps the second parent was renamed apart with suffix ``sid``
    before resolving, which is what makes replay exact.
    """

    sid: int
    rule: str
    parents: tuple[int, ...] = ()
    positions: tuple[int, ...] = ()
    subst: str = ""
    clause: Optional[Clause] = None
    depth: int = 0
    note: str = ""


@dataclass
class ProofTrace:
    events: list[TraceEvent] = field(default_factory=list)

    def add(self, ev: TraceEvent) -> None:
        self.events.append(ev)

    def clause_of(self, sid: int) -> Optional[Clause]:
        for ev in self.events:
            if ev.sid == sid and ev.clause is not None:
                return ev.clause
        return None


@dataclass
class RefutationResult:
    proved: bool
    achieved: Optional[Fraction]
    alpha: Fraction
    steps: int
    budget_exhausted: bool
    trace: ProofTrace
    query_text: str = ""
    options: dict = field(default_factory=dict)


# --------------------------------------------------------------------------
# preparation and search


class _OutOfSteps(Exception):
    pass


# Resolvents can nest cut terms inside cut terms without bound when a
# clause feeds on its own renamed copies; past this many nodes a clause
# is abandoned (and the search marked exhausted) rather than kept.  The
# bound also limits what the threshold guard has to evaluate: bounding a
# weight walks every nested cut level, so its cost grows with nesting
# depth much faster than the node count does.
MAX_CLAUSE_NODES = 120


class _Search:
    def __init__(
        self,
        sig: Signature,
        alpha: Fraction,
        max_steps: int,
        max_depth: int,
        merging: bool,
        threshold: bool,
    ):
        self.sig = sig
        self.alpha = alpha
        self.max_steps = max_steps
        self.max_depth = max_depth
        self.use_merging = merging
        self.use_threshold = threshold
        self.trace = ProofTrace()
        self.next_sid = 1
        self.steps = 0
        self.exhausted = False
        self.best_bottom: Optional[Fraction] = None

    # -- bookkeeping

    def _sid(self) -> int:
        s = self.next_sid
        self.next_sid += 1
        return s

    @staticmethod
    def _key(c: Clause):
        """Structural identity up to variable renaming.

        Standardizing apart stamps fresh suffixes on every resolvent, so
        re-derivations of one clause never match textually; renaming the
        variables by first occurrence makes them compare equal.
        """
        vs = clause_vars(c)
        ren = Subst.of({v: Var(f"?{i}", v.sort) for i, v in enumerate(vs)})
        return clause_key(apply_clause(ren, c))

    def _note_bottom(self, value: Fraction) -> None:
        if self.best_bottom is None or value > self.best_bottom:
            self.best_bottom = value

    def _bottom_weight(self, c: Clause) -> Optional[Fraction]:
        return eval_weight(c.weight, self.sig).degree

    # -- preparation passes, in their fixed order

    def prepare(
        self, clauses: Sequence[Clause], negation: Sequence[Clause]
    ) -> list[tuple[int, Clause]]:
        working: list[tuple[int, Clause]] = []
        for rule, batch in (("input", clauses), ("negation", negation)):
            for c in batch:
                sid = self._sid()
                self.trace.add(TraceEvent(sid, rule, clause=c))
                working.append((sid, c))
        working = [self._fused(sid, c) for sid, c in working]
        if self.use_threshold:
            kept = []
            for sid, c in working:
                sup = self._reachable(c)
                if sup is not None and sup < self.alpha:
                    self.trace.add(
                        TraceEvent(
                            self._sid(),
                            "drop",
                            parents=(sid,),
                            note=f"best reachable weight {format_rational(sup)}"
                            f" is below {format_rational(self.alpha)}",
                        )
                    )
                    continue
                kept.append((sid, c))
            working = kept
        if self.use_merging:
            working = self._merged(working, depth=0)
        out = []
        for sid, c in working:
            eq = equivalent_transform(c, self.sig)
            if eq != c:
                nid = self._sid()
                self.trace.add(TraceEvent(nid, "EQ", parents=(sid,), clause=eq))
                sid, c = nid, eq
            out.append((sid, c))
        working = out
        seen: dict = {}
        out = []
        for sid, c in working:
            k = clause_key(c)
            if k in seen:
                self.trace.add(
                    TraceEvent(
                        self._sid(),
                        "drop",
                        parents=(sid,),
                        note=f"structurally identical to clause {seen[k]}",
                    )
                )
                continue
            seen[k] = sid
            out.append((sid, c))
        return out

    def _fused(self, sid: int, c: Clause) -> tuple[int, Clause]:
        fused = fuse_fr(c, self.sig)
        if fused == c:
            return sid, c
        nid = self._sid()
        self.trace.add(TraceEvent(nid, "FR", parents=(sid,), clause=fused))
        return nid, fused

    def _reachable(self, c: Clause) -> Optional[Fraction]:
        try:
            return threshold_value(c, self.sig)
        except CalculusError:
            return None

    def _merged(
        self, working: list[tuple[int, Clause]], depth: int
    ) -> list[tuple[int, Clause]]:
        clauses = list(working)
        changed = True
        while changed:
            changed = False
            for i in range(len(clauses)):
                for j in range(i + 1, len(clauses)):
                    si, ci = clauses[i]
                    sj, cj = clauses[j]
                    merged = merge_gm(ci, cj)
                    if merged is None:
                        continue
                    nid = self._sid()
                    self.trace.add(
                        TraceEvent(nid, "GM", parents=(si, sj), clause=merged, depth=depth)
                    )
                    clauses[i] = (nid, merged)
                    del clauses[j]
                    changed = True
                    break
                if changed:
                    break
        return clauses

    # -- the search proper

    def run(self, working: list[tuple[int, Clause]]) -> bool:
        try:
            return self._saturate(working)
        except _OutOfSteps:
            self.exhausted = True
            return False

    def _saturate(self, working: list[tuple[int, Clause]]) -> bool:
        """Grow the set to its resolution closure, oldest pairs first.

        Resolution never invalidates anything already derived, so there
        is no branching to backtrack over: every unordered pair of
        clauses is tried exactly once, when the younger of the two comes
        up. Resolvents that merely rename a clause already in the set
        are traced but not kept, which is what keeps the closure finite
        on ground problems. Merging retires both parents in favour of
        the combined clause, whose weight dominates theirs.
        """
        work = list(working)
        alive = [True] * len(work)
        depths = [0] * len(work)
        keys = {self._key(c) for _, c in work}
        for _, c in work:
            if c.is_empty:
                value = self._bottom_weight(c)
                if value is not None:
                    self._note_bottom(value)
                    if value >= self.alpha:
                        return True
        gi = 0
        while gi < len(work):
            if alive[gi]:
                for oi in range(gi + 1):
                    if not (alive[oi] and alive[gi]):
                        continue
                    sides = ((oi, gi),) if oi == gi else ((oi, gi), (gi, oi))
                    for i1, i2 in sides:
                        if self._resolve_pair(work, alive, depths, keys, i1, i2):
                            return True
            gi += 1
        return False

    def _resolve_pair(
        self,
        work: list[tuple[int, Clause]],
        alive: list[bool],
        depths: list[int],
        keys: set,
        i1: int,
        i2: int,
    ) -> bool:
        """Resolve every literal pair of one ordered clause pair.

        Returns True as soon as an empty clause at or above the
        threshold appears. New clauses land at the end of the work list
        with a derivation depth one past their deeper parent.
        """
        sid1, c1 = work[i1]
        sid2, c2 = work[i2]
        d = max(depths[i1], depths[i2]) + 1
        for li1, l1 in enumerate(c1.literals):
            for li2, l2 in enumerate(c2.literals):
                if l1.positive == l2.positive or l1.pred != l2.pred:
                    continue
                if d > self.max_depth:
                    self.exhausted = True
                    continue
                suffix = self.next_sid
                res = resolve_gr(c1, li1, rename_with_suffix(c2, suffix), li2, self.sig)
                if res is None:
                    continue
                self.steps += 1
                if self.steps > self.max_steps:
                    raise _OutOfSteps
                sid = self._sid()
                c = res.clause
                oversized = clause_size(c) > MAX_CLAUSE_NODES
                guarded = not oversized and self._guard_fails(c.weight)
                if guarded:
                    note = "weight cannot reach the threshold, branch abandoned"
                elif oversized:
                    note = "clause grew past the size bound, branch abandoned"
                else:
                    note = ""
                self.trace.add(
                    TraceEvent(
                        sid,
                        "GR",
                        parents=(sid1, sid2),
                        positions=(li1, li2),
                        subst=str(res.theta),
                        clause=c,
                        depth=d - 1,
                        note=note,
                    )
                )
                if c.is_empty and not oversized:
                    value = self._bottom_weight(c)
                    if value is not None:
                        self._note_bottom(value)
                        if value >= self.alpha:
                            return True
                if guarded:
                    continue
                if oversized:
                    self.exhausted = True
                    continue
                csid, c = self._fused(sid, c)
                k = self._key(c)
                if k in keys:
                    continue
                keys.add(k)
                work.append((csid, c))
                alive.append(True)
                depths.append(d)
                if self.use_merging:
                    self._merge_tail(work, alive, depths, keys)
        return False

    def _merge_tail(
        self,
        work: list[tuple[int, Clause]],
        alive: list[bool],
        depths: list[int],
        keys: set,
    ) -> None:
        # try the youngest clause against everything older; a success
        # retires both parents and appends the combination, which may
        # merge again in turn
        changed = True
        while changed:
            changed = False
            j = len(work) - 1
            sj, cj = work[j]
            for i in range(j):
                if not alive[i]:
                    continue
                si, ci = work[i]
                merged = merge_gm(ci, cj)
                if merged is None:
                    continue
                nid = self._sid()
                d = max(depths[i], depths[j])
                self.trace.add(
                    TraceEvent(nid, "GM", parents=(si, sj), clause=merged, depth=d)
                )
                alive[i] = False
                alive[j] = False
                work.append((nid, merged))
                alive.append(True)
                depths.append(d)
                keys.add(self._key(merged))
                changed = True
                break

    def _guard_fails(self, w: WeightExpr) -> bool:
        if not self.use_threshold:
            return False
        try:
            return guard_supremum(w, self.sig) < self.alpha
        except CalculusError:
            return False


def preprocess(
    kb: KnowledgeBase,
    negation: Sequence[Clause],
    alpha,
    *,
    merging: bool = True,
    threshold: bool = True,
) -> list[Clause]:
    """Normalize the clause set the way the search would, and return it."""
    s = _Search(kb.sig, _checked_alpha(alpha), 0, 0, merging, threshold)
    return [c for _, c in s.prepare(kb.clauses, tuple(negation))]


def _checked_alpha(alpha) -> Fraction:
    a = frac(alpha)
    if not ZERO < a <= ONE:
        raise RefutationError(f"the threshold must lie in (0, 1], got {format_rational(a)}")
    return a


def refute(
    kb: KnowledgeBase,
    query: Query,
    alpha=None,
    *,
    max_steps: int = 10_000,
    max_depth: int = 64,
    merging: bool = True,
    threshold: bool = True,
) -> RefutationResult:
    """Try to prove the query from the base by refutation.

    alpha defaults to the query's own constant degree.  ``proved`` means
    some branch derived the empty clause with weight at least alpha;
    anything else means only that this search did not find a proof.
    ``achieved`` reports the best empty-clause weight any branch reached,
    including branches the threshold guard then abandoned.

    ``merging=False`` turns off combining variant clauses (weights then
    stay as single clauses gave them); ``threshold=False`` turns off both
    the preparation-time pruning and the in-search weight guard.
    """
    a = _checked_alpha(query.beta if alpha is None else alpha)
    search = _Search(kb.sig, a, max_steps, max_depth, merging, threshold)
    working = search.prepare(kb.clauses, negate_query(query, kb.sig))
    proved = search.run(working)
    return RefutationResult(
        proved=proved,
        achieved=search.best_bottom,
        alpha=a,
        steps=search.steps,
        budget_exhausted=search.exhausted,
        trace=search.trace,
        query_text=format_clause(query.clause),
        options={
            "max_steps": max_steps,
            "max_depth": max_depth,
            "merging": merging,
            "threshold": threshold,
        },
    )


# --------------------------------------------------------------------------
# rendering and replay


def render_trace_text(result: RefutationResult) -> str:
    """A human-oriented listing: one line per event, indented by depth."""
    lines = [
        f"query     {result.query_text}",
        f"threshold {format_rational(result.alpha)}",
    ]
    for ev in result.trace.events:
        pad = "  " * ev.depth
        if ev.rule in ("input", "negation"):
            body = f"{ev.rule:<9} {format_clause(ev.clause)}"
        elif ev.rule == "drop":
            body = f"drop {ev.parents[0]}: {ev.note}"
        elif ev.rule == "GR":
            p1, p2 = ev.parents
            i1, i2 = ev.positions
            body = f"GR {p1}.{i1} x {p2}.{i2} {ev.subst} -> {format_clause(ev.clause)}"
            if ev.note:
                body += f"  [{ev.note}]"
        else:
            parents = "+".join(str(p) for p in ev.parents)
            body = f"{ev.rule} {parents} -> {format_clause(ev.clause)}"
        lines.append(f"[{ev.sid:>3}] {pad}{body}")
    lines.append(_verdict_line(result))
    return "\n".join(lines) + "\n"


def _verdict_line(result: RefutationResult) -> str:
    verdict = "proved" if result.proved else "not proved"
    achieved = (
        format_rational(result.achieved) if result.achieved is not None else "none"
    )
    tail = ", step budget exhausted" if result.budget_exhausted else ""
    return (
        f"{verdict} at {format_rational(result.alpha)}"
        f" (best empty-clause weight {achieved}, {result.steps} steps{tail})"
    )


def trace_records(result: RefutationResult, source: Optional[str] = None) -> list[dict]:
    """The trace as plain dicts: one header, one record per event, one verdict.

    The header carries everything needed to re-run or replay the proof
    without the original invocation: the query text, the threshold, the
    search options, and optionally the knowledge base source text.
    """
    header: dict = {
        "kind": "header",
        "query": result.query_text,
        "alpha": format_rational(result.alpha),
        "options": result.options,
    }
    if source is not None:
        header["source"] = source
    records = [header]
    for ev in result.trace.events:
        rec: dict = {"kind": "step", "id": ev.sid, "rule": ev.rule}
        if ev.parents:
            rec["parents"] = list(ev.parents)
        if ev.positions:
            rec["positions"] = list(ev.positions)
        if ev.subst:
            rec["subst"] = ev.subst
        if ev.clause is not None:
            rec["clause"] = format_clause(ev.clause)
            rec["weight"] = format_weight(ev.clause.weight)
        if ev.depth:
            rec["depth"] = ev.depth
        if ev.note:
            rec["note"] = ev.note
        records.append(rec)
    records.append(
        {
            "kind": "verdict",
            "proved": result.proved,
            "achieved": format_rational(result.achieved) if result.achieved is not None else None,
            "steps": result.steps,
            "budget_exhausted": result.budget_exhausted,
        }
    )
    return records


def render_trace_jsonl(result: RefutationResult, source: Optional[str] = None) -> str:
    return "\n".join(json.dumps(r) for r in trace_records(result, source)) + "\n"


def replay(trace: ProofTrace, sig: Signature) -> int:
    """Re-derive every clause-producing step; the count of steps verified.

    Raises ReplayMismatch on the first step whose recomputed clause (or,
    for resolution steps, substitution) differs from the record.
    """
    clauses: dict[int, Clause] = {}
    verified = 0

    def parent(ev: TraceEvent, k: int) -> Clause:
        try:
            return clauses[ev.parents[k]]
        except (IndexError, KeyError):
            raise ReplayMismatch(
                f"step {ev.sid}: {ev.rule} references a clause the trace never produced"
            ) from None

    for ev in trace.events:
        if ev.clause is None:
            continue
        if ev.rule in ("input", "negation"):
            clauses[ev.sid] = ev.clause
            continue
        if ev.rule == "FR":
            got = fuse_fr(parent(ev, 0), sig)
        elif ev.rule == "EQ":
            got = equivalent_transform(parent(ev, 0), sig)
        elif ev.rule == "GM":
            got = merge_gm(parent(ev, 0), parent(ev, 1))
        elif ev.rule == "GR":
            renamed = rename_with_suffix(parent(ev, 1), ev.sid)
            res = resolve_gr(parent(ev, 0), ev.positions[0], renamed, ev.positions[1], sig)
            if res is not None and ev.subst and str(res.theta) != ev.subst:
                raise ReplayMismatch(
                    f"step {ev.sid}: resolution gives substitution {res.theta},"
                    f" the trace recorded {ev.subst}"
                )
            got = None if res is None else res.clause
        else:
            raise ReplayMismatch(f"step {ev.sid}: unknown rule {ev.rule!r}")
        if got != ev.clause:
            raise ReplayMismatch(
                f"step {ev.sid}: {ev.rule} does not reproduce the recorded clause"
            )
        clauses[ev.sid] = ev.clause
        verified += 1
    return verified


def replay_records(
    records: Iterable[dict], sig: Signature, parse_clause: Callable[[str], Clause]
) -> int:
    """Replay a trace read back from records, parsing clause texts as needed."""
    trace = ProofTrace()
    for rec in records:
        if rec.get("kind") != "step":
            continue
        clause = parse_clause(rec["clause"]) if "clause" in rec else None
        trace.add(
            TraceEvent(
                sid=rec["id"],
                rule=rec["rule"],
                parents=tuple(rec.get("parents", ())),
                positions=tuple(rec.get("positions", ())),
                subst=rec.get("subst", ""),
                clause=clause,
                depth=rec.get("depth", 0),
                note=rec.get("note", ""),
            )
        )
    return replay(trace, sig)
