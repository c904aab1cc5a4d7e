"""End-to-end acceptance suite.

Ten numbered criteria: exact reproduction of the worked examples, the axiom
and soundness property suites, and the demonstrations that motivated the
design (the graded-resolution measure discrepancy, the merging fixture, the
degenerate propositional case).  conftest prints one verdict line per
criterion at the end of the run.

Two sub-claims of criterion 3 are strict xfails: the search and the exact
oracle both reach 4/5 on that fixture, and 4/9 is only the one-rule bound.
The tests document the gap rather than weaken the engine to match it.
"""

import random
import time
from fractions import Fraction as Q

import pytest

from plfc.calculus import equivalent_transform, resolve_gr
from plfc.fuzzy import (
    Discrete,
    FiniteDomain,
    FuzzySet,
    RealInterval,
    Trapezoid,
    goedel_reciprocal_necessity,
    necessity,
)
from plfc.language import (
    AlphaCut,
    Clause,
    FuzzyConst,
    KnowledgeBase,
    Literal,
    PreciseConst,
    Signature,
    Var,
    WConst,
    WMem,
    wmin,
)
from plfc.oracle import (
    FiniteContext,
    Interpretation,
    check_necessity_axioms,
    clause_necessity,
    ground_instances,
    least_specific_model,
    oracle_entails,
    satisfies,
    truth_eval,
)
from plfc.refutation import Query, refute


def pos(pred, *args):
    return Literal(True, pred, tuple(args))


def neg(pred, *args):
    return Literal(False, pred, tuple(args))


# --------------------------------------------------------------------------
# shared fixtures


def market_context() -> FiniteContext:
    s = Signature()
    s.add_sort("prod", FiniteDomain(("potatoes", "apples", "salad")))
    s.add_sort("ptas", RealInterval(Q(0), Q(100)))
    s.add_fuzzy(
        "about_35", "ptas", FuzzySet(s.sorts["ptas"], Trapezoid(Q(25), Q(35), Q(35), Q(45)))
    )
    s.add_const("prod1", "prod", "potatoes")
    s.add_pred("price", (("prod", False), ("ptas", True)))
    grid = tuple(Q(p) for p in (0, 20, 25, 30, 35, 40, 45, 50, 100))
    return FiniteContext(s, {"ptas": grid})


def priced(pairs) -> Interpretation:
    return Interpretation.make({"price": {(p, Q(v)) for p, v in pairs}})


PRICE_ATOM = pos("price", PreciseConst("prod1", "prod"), FuzzyConst("about_35", "ptas"))


def temperature_base() -> tuple[KnowledgeBase, Query]:
    s = Signature()
    s.add_sort("temp", RealInterval(Q(0), Q(50)))
    dom = s.sorts["temp"]
    s.add_fuzzy("mu1", "temp", FuzzySet(dom, Trapezoid(Q(20), Q(24), Q(26), Q(30))))
    s.add_fuzzy("mu2", "temp", FuzzySet(dom, Trapezoid(Q(20), Q(25), Q(25), Q(30))))
    s.add_pred("mt", (("temp", True),))
    kb = KnowledgeBase(s, (Clause((pos("mt", FuzzyConst("mu1", "temp")),), WConst(Q(1))),))
    query = Query(Clause((pos("mt", FuzzyConst("mu2", "temp")),), WConst(Q(4, 9))))
    return kb, query


# --------------------------------------------------------------------------
# AC-1 / AC-2: pointwise truth and necessity on the priced-goods example


def test_ac1_truth_values_are_exact_and_fast():
    t0 = time.perf_counter()
    ctx = market_context()
    w0 = priced([("potatoes", 40), ("apples", 50), ("salad", 25)])
    assert truth_eval(ctx, w0, [PRICE_ATOM]) == Q(1, 2)
    assert truth_eval(ctx, w0, [PRICE_ATOM.negated()]) == Q(1)
    assert time.perf_counter() - t0 < 1.0


def test_ac2_three_world_necessity():
    ctx = market_context()
    pi = {
        priced([("potatoes", 40), ("apples", 50), ("salad", 25)]): Q(3, 5),
        priced([("potatoes", 35), ("apples", 45), ("salad", 20)]): Q(1),
        priced([("potatoes", 45), ("apples", 50), ("salad", 30)]): Q(1, 5),
    }
    assert clause_necessity(ctx, pi, [PRICE_ATOM]) == Q(1, 2)
    assert satisfies(ctx, pi, Clause((PRICE_ATOM,), WConst(Q(1, 2))))
    assert not satisfies(ctx, pi, Clause((PRICE_ATOM,), WConst(Q(3, 5))))


# --------------------------------------------------------------------------
# AC-3: the measure pair on the temperature fixture


def test_ac3_measures_search_and_oracle_agree():
    kb, query = temperature_base()
    mu1 = kb.sig.fuzzy_set("mu1")
    mu2 = kb.sig.fuzzy_set("mu2")
    assert necessity(mu2, mu1) == Q(4, 9)
    assert goedel_reciprocal_necessity(mu2, mu1) == Q(0)

    result = refute(kb, query)
    assert result.proved and result.achieved == Q(4, 5)

    ctx = FiniteContext.auto(kb.sig, kb.clauses + (query.clause,))
    report = oracle_entails(ctx, kb.clauses, query.clause, Q(4, 9))
    assert report.entailed and report.degree == Q(4, 5)
    assert report.degree == result.achieved


@pytest.mark.xfail(
    strict=True,
    reason="the refutation optimum on this fixture is 4/5, not the one-rule 4/9",
)
def test_ac3_claim_search_tops_out_at_the_one_rule_bound():
    kb, query = temperature_base()
    assert refute(kb, query).achieved == Q(4, 9)


@pytest.mark.xfail(
    strict=True,
    reason="the exact degree is 4/5, so thresholds in (4/9, 4/5] are still entailed",
)
def test_ac3_claim_oracle_refuses_anything_above_the_bound():
    kb, query = temperature_base()
    ctx = FiniteContext.auto(kb.sig, kb.clauses + (query.clause,))
    assert not oracle_entails(ctx, kb.clauses, query.clause, Q(1, 2)).entailed


# --------------------------------------------------------------------------
# AC-4: the graded unifier on a cut term with a symbolic level


def test_ac4_mgs_and_resolvent_weight_leaf_for_leaf():
    s = Signature()
    s.add_sort("money", RealInterval(Q(0), Q(50)))
    s.add_sort("item", FiniteDomain(("apples", "pears")))
    m = s.sorts["money"]
    s.add_fuzzy("wanted", "money", FuzzySet(m, Trapezoid(Q(20), Q(24), Q(26), Q(30))))
    s.add_fuzzy("exact", "money", FuzzySet(m, Trapezoid(Q(20), Q(25), Q(25), Q(30))))
    s.add_fuzzy(
        "stocked",
        "item",
        FuzzySet(s.sorts["item"], Discrete((("apples", Q(3, 4)), ("pears", Q(1))))),
    )
    s.add_pred("p", (("money", True), ("item", True)))
    s.add_pred("psi", (("money", True),))
    x = Var("x", "money")
    y = Var("y", "item")
    b = PreciseConst("apples", "item")
    c_const = FuzzyConst("wanted", "money")

    s1 = Clause((neg("p", x, b), pos("psi", x)), wmin(WMem("exact", x), WConst(Q(2, 3))))
    s2 = Clause((pos("p", c_const, y),), wmin(WMem("stocked", y), WConst(Q(9, 10))))

    s2p = equivalent_transform(s2)
    level = wmin(WMem("stocked", y), WConst(Q(9, 10)))
    assert s2p.literals[0].args[0] == AlphaCut(c_const, level)

    res = resolve_gr(s1, 0, s2p, 0, s)
    assert res is not None
    ground_level = wmin(WMem("stocked", b), WConst(Q(9, 10)))
    assert res.theta.lookup(x) == AlphaCut(c_const, ground_level)
    assert res.theta.lookup(y) == b
    assert res.clause.literals == (pos("psi", AlphaCut(c_const, ground_level)),)

    # the weight, leaf for leaf: the conditional part and the three carried
    # constants, each computed independently of the resolution pipeline
    cut = s.fuzzy_set("wanted").alpha_cut(min(Q(3, 4), Q(9, 10)))
    n_leaf = necessity(s.fuzzy_set("exact"), cut)
    assert n_leaf == Q(3, 5)
    mu_leaf = s.fuzzy_set("stocked").membership("apples")
    assert mu_leaf == Q(3, 4)
    assert res.clause.weight == WConst(min(n_leaf, Q(2, 3), mu_leaf, Q(9, 10)))


# --------------------------------------------------------------------------
# AC-5: merging makes the union provable


def test_ac5_merging_fixture():
    s = Signature()
    s.add_sort("num", FiniteDomain(("n1", "n2", "n3")))
    dom = s.sorts["num"]

    def crisp(*names):
        return FuzzySet(dom, Discrete(tuple((n, Q(1)) for n in names)))

    s.add_fuzzy("low", "num", crisp("n1", "n2"))
    s.add_fuzzy("high", "num", crisp("n2", "n3"))
    s.add_fuzzy("anyn", "num", crisp("n1", "n2", "n3"))
    s.add_pred("holds", (("num", True),))
    x, y, z = Var("x", "num"), Var("y", "num"), Var("z", "num")
    kb = KnowledgeBase(
        s,
        (
            Clause((pos("holds", x),), WMem("low", x)),
            Clause((pos("holds", y),), WMem("high", y)),
        ),
    )
    query = Query(Clause((pos("holds", z),), wmin(WConst(Q(1)), WMem("anyn", z))))

    merged = refute(kb, query, Q(1))
    assert merged.proved and merged.achieved == Q(1)

    lone = refute(kb, query, Q(1), merging=False)
    assert not lone.proved and lone.achieved == Q(0)


# --------------------------------------------------------------------------
# AC-6: the four characteristic properties of the measure


def test_ac6_axioms_on_random_distributions():
    rng = random.Random(61)
    fourths = [Q(k, 4) for k in range(5)]
    t0 = time.perf_counter()
    for _ in range(500):
        omega = [f"w{i}" for i in range(rng.randint(1, 4))]
        pi = {w: rng.choice(fourths) for w in omega}
        pi[rng.choice(omega)] = Q(1)
        subsets = []
        for _ in range(3):
            if rng.random() < 0.5:
                subsets.append({w: rng.choice(fourths) for w in omega})
            else:
                subsets.append({w: Q(rng.randint(0, 1)) for w in omega})
        assert check_necessity_axioms(omega, pi, subsets)
    assert time.perf_counter() - t0 < 5.0


# --------------------------------------------------------------------------
# AC-7: randomized soundness harness


def _random_signature(rng: random.Random, n_elems: int = 0) -> Signature:
    s = Signature()
    syms = tuple(f"e{i}" for i in range(n_elems or rng.randint(2, 3)))
    s.add_sort("e", FiniteDomain(syms))
    dom = s.sorts["e"]
    fourths = [Q(k, 4) for k in range(5)]
    for name in ("F", "G"):
        table = {sym: rng.choice(fourths) for sym in syms}
        table[rng.choice(syms)] = Q(1)
        s.add_fuzzy(name, "e", FuzzySet(dom, Discrete(tuple(sorted(table.items())))))
    s.add_fuzzy("ALL", "e", FuzzySet(dom, Discrete(tuple((sym, Q(1)) for sym in syms))))
    s.add_pred("pa", (("e", True),))
    s.add_pred("pb", (("e", True), ("e", True)))
    return s


def _random_clause(rng: random.Random, s: Signature) -> Clause:
    syms = s.sorts["e"].symbols
    weights = [Q(1, 4), Q(1, 2), Q(3, 4), Q(1)]
    lits = []
    vars_used: list[Var] = []
    for _ in range(rng.randint(1, 2)):
        pred = rng.choice(("pa", "pb"))
        args = []
        for _ in s.preds[pred]:
            roll = rng.random()
            if roll < 0.45:
                v = Var(rng.choice(("x", "y")), "e")
                args.append(v)
                vars_used.append(v)
            elif roll < 0.8:
                args.append(PreciseConst(rng.choice(syms), "e"))
            else:
                args.append(FuzzyConst(rng.choice(("F", "G")), "e"))
        lits.append(Literal(rng.random() < 0.7, pred, tuple(args)))
    leaves = [WConst(rng.choice(weights))]
    for v in {v.name: v for v in vars_used}.values():
        if rng.random() < 0.5:
            leaves.append(WMem(rng.choice(("F", "G", "ALL")), v))
    return Clause(tuple(lits), wmin(*leaves))


def _random_query(rng: random.Random, s: Signature) -> Query:
    syms = s.sorts["e"].symbols
    beta = rng.choice([Q(1, 4), Q(1, 2), Q(3, 4), Q(1)])
    form = rng.randint(1, 4)
    restricted: list[tuple[Var, str]] = []
    fresh = iter(("u", "v", "t"))

    def term(allow_var: bool):
        if allow_var and rng.random() < 0.5:
            v = Var(next(fresh), "e")
            restricted.append((v, rng.choice(("F", "G", "ALL"))))
            return v
        if rng.random() < 0.5:
            return FuzzyConst(rng.choice(("F", "G")), "e")
        return PreciseConst(rng.choice(syms), "e")

    if form == 1:
        lits = [pos("pa", FuzzyConst(rng.choice(("F", "G")), "e"))]
    elif form == 2:
        v = Var("u", "e")
        restricted.append((v, rng.choice(("F", "G", "ALL"))))
        lits = [pos("pa", v)]
    elif form == 3:
        v = Var("u", "e")
        restricted.append((v, rng.choice(("F", "G", "ALL"))))
        lits = [pos("pb", v, FuzzyConst(rng.choice(("F", "G")), "e"))]
    else:
        lits = [
            Literal(rng.random() < 0.8, "pa", (term(True),)),
            Literal(rng.random() < 0.8, "pb", (term(True), term(True))),
        ]
    leaves = [WConst(beta)] + [WMem(fz, v) for v, fz in restricted]
    return Query(Clause(tuple(lits), wmin(*leaves)))


def test_ac7_every_proof_is_semantically_confirmed():
    rng = random.Random(70)
    t0 = time.perf_counter()
    proved_count = 0
    for _ in range(1000):
        s = _random_signature(rng)
        clauses = tuple(_random_clause(rng, s) for _ in range(rng.randint(1, 4)))
        query = _random_query(rng, s)
        kb = KnowledgeBase(s, clauses)
        result = refute(kb, query, max_steps=2000, max_depth=32)
        if not result.proved:
            continue
        proved_count += 1
        ctx = FiniteContext.auto(s, clauses + (query.clause,))
        report = oracle_entails(ctx, clauses, query.clause, result.alpha, method="decide")
        assert report.entailed, (
            f"unsound proof: {query.clause} at {result.alpha} from {clauses}"
        )
    assert proved_count >= 100
    assert time.perf_counter() - t0 < 60.0


# --------------------------------------------------------------------------
# AC-8: cut rewriting and the one-way level-cut entailment


def test_ac8_rewriting_preserves_entailment_degrees():
    rng = random.Random(80)
    checked = 0
    while checked < 200:
        # two domain elements keep the model sweep small (2^6 worlds per
        # round); the membership degrees still vary freely across rounds
        s = _random_signature(rng, n_elems=2)
        c = _random_clause(rng, s)
        if not any(isinstance(a, FuzzyConst) for l in c.literals for a in l.args):
            continue
        checked += 1
        ctx = FiniteContext.auto(s, (c,))
        pi_orig = least_specific_model(ctx, list(ground_instances(ctx, c)))
        pi_tran = least_specific_model(
            ctx, list(ground_instances(ctx, equivalent_transform(c)))
        )
        syms = s.sorts["e"].symbols
        probes = [[pos("pa", PreciseConst(sym, "e"))] for sym in syms]
        probes.append([pos("pb", PreciseConst(syms[0], "e"), PreciseConst(syms[-1], "e"))])
        for lits in probes:
            assert clause_necessity(ctx, pi_orig, lits) == clause_necessity(
                ctx, pi_tran, lits
            )


def test_ac8_level_cut_entailment_is_one_directional():
    s = Signature()
    s.add_sort("e", FiniteDomain(("a", "b")))
    dom = s.sorts["e"]
    s.add_fuzzy("A", "e", FuzzySet(dom, Discrete((("a", Q(1)), ("b", Q(1, 2))))))
    s.add_fuzzy("B", "e", FuzzySet(dom, Discrete((("a", Q(1, 2)), ("b", Q(1, 2))))))
    s.add_pred("p", (("e", True), ("e", True)))
    x = Var("x", "e")
    alpha = Q(3, 4)
    weight = wmin(WConst(alpha), WMem("B", x))
    raw = Clause((pos("p", FuzzyConst("A", "e"), x),), weight)
    cut = Clause((pos("p", AlphaCut(FuzzyConst("A", "e"), WConst(alpha)), x),), weight)
    ctx = FiniteContext.auto(s, (raw, cut))

    # satisfying the level-cut version implies satisfying the raw one
    rng = random.Random(81)
    fourths = [Q(k, 4) for k in range(5)]
    worlds = list(ctx.carriers["e"])
    implications = 0
    for _ in range(150):
        pi = {}
        for _ in range(3):
            tuples = {(u, v) for u in worlds for v in worlds if rng.random() < 0.5}
            pi[Interpretation.make({"p": tuples})] = rng.choice(fourths)
        if satisfies(ctx, pi, cut):
            implications += 1
            assert satisfies(ctx, pi, raw)
    assert implications >= 10

    # and not conversely: a world where only the half-member carries p
    w_half = Interpretation.make({"p": {("b", "a"), ("b", "b")}})
    pi_sep = {w_half: Q(1)}
    assert satisfies(ctx, pi_sep, raw)
    assert not satisfies(ctx, pi_sep, cut)


# --------------------------------------------------------------------------
# AC-9: the degenerate propositional case


def _sat(clauses: list[frozenset[tuple[str, bool]]]) -> bool:
    """Plain DPLL over (atom, polarity) literal sets."""
    assign: dict[str, bool] = {}
    work = list(clauses)
    changed = True
    while changed:
        changed = False
        kept = []
        for c in work:
            if any(assign.get(a) == p for a, p in c):
                continue
            rest = frozenset((a, p) for a, p in c if a not in assign)
            if not rest:
                return False
            if len(rest) == 1:
                ((a, p),) = rest
                assign[a] = p
                changed = True
            else:
                kept.append(rest)
        work = kept
    if not work:
        return True
    atom = next(iter(work[0]))[0]
    return _sat(work + [frozenset({(atom, True)})]) or _sat(
        work + [frozenset({(atom, False)})]
    )


def _classical_inconsistency(weighted: list[tuple[frozenset, Q]]) -> Q:
    levels = sorted({w for _, w in weighted}, reverse=True)
    for lvl in levels:
        if not _sat([lits for lits, w in weighted if w >= lvl]):
            return lvl
    return Q(0)


def test_ac9_matches_a_classical_propositional_oracle():
    s = Signature()
    s.add_sort("unit", FiniteDomain(("o",)))
    for atom in ("pa", "pb", "pc"):
        s.add_pred(atom, ())
    rng = random.Random(90)
    weights = [Q(1, 4), Q(1, 2), Q(3, 4), Q(1)]
    atoms = ("pa", "pb", "pc")

    # the two-clause weight law first
    a = Clause((neg("pa"), pos("pb")), WConst(Q(3, 4)))
    b = Clause((pos("pa"), pos("pc")), WConst(Q(1, 2)))
    res = resolve_gr(a, 0, b, 0, s)
    assert res is not None
    assert res.clause == Clause((pos("pb"), pos("pc")), WConst(Q(1, 2)))

    for _ in range(100):
        n = rng.randint(2, 5)
        clauses = []
        for _ in range(n):
            k = rng.randint(1, 3)
            chosen = rng.sample(atoms, k)
            lits = tuple(Literal(rng.random() < 0.5, atm, ()) for atm in chosen)
            clauses.append(Clause(lits, WConst(rng.choice(weights))))
        goal = rng.choice(atoms)
        kb = KnowledgeBase(s, tuple(clauses))
        query = Query(Clause((pos(goal),), WConst(Q(1))))

        weighted = [
            (frozenset((l.pred, l.positive) for l in c.literals), c.weight.value)
            for c in clauses
        ]
        weighted.append((frozenset({(goal, False)}), Q(1)))
        inc = _classical_inconsistency(weighted)

        for alpha in weights:
            r = refute(kb, query, alpha)
            assert not r.budget_exhausted
            assert r.proved == (inc >= alpha), (
                f"classical oracle says {inc}, search says {r.proved} at {alpha}"
            )


# --------------------------------------------------------------------------
# AC-10: the one-rule shortcut and why it was rejected as a measure


def rr_shortcut(rule: Clause, fact: Clause, sig: Signature) -> Q:
    """The direct fuzzy-match bound: min of the fact weight and N(restriction | constant).

    Kept out of the engine on purpose; this is the historical rule whose
    weight ignores how deep the premise really pins the constant down.
    """
    restriction = rule.weight
    assert isinstance(restriction, WMem)
    a = sig.fuzzy_set(restriction.set_name)
    arg = fact.literals[0].args[0]
    assert isinstance(arg, FuzzyConst)
    assert isinstance(fact.weight, WConst)
    return min(fact.weight.value, necessity(a, sig.fuzzy_set(arg.name)))


def test_ac10_shortcut_bound_versus_graded_resolution():
    kb, query = temperature_base()
    s = kb.sig
    mu1, mu2 = s.fuzzy_set("mu1"), s.fuzzy_set("mu2")

    x = Var("x", "temp")
    negated = Clause((neg("mt", x),), WMem("mu2", x))
    fact = kb.clauses[0]
    shortcut_weight = rr_shortcut(negated, fact, s)
    assert shortcut_weight == Q(4, 9)
    assert necessity(mu2, mu1) == Q(4, 9)

    # under the reciprocal measure the same entailment has degree 0, so a
    # rule deriving 4/9 would overshoot it; that measure was rejected
    assert goedel_reciprocal_necessity(mu2, mu1) == Q(0)

    # the adopted measure and the guarded search agree on the exact 4/5
    result = refute(kb, query)
    ctx = FiniteContext.auto(s, kb.clauses + (query.clause,))
    report = oracle_entails(ctx, kb.clauses, query.clause, Q(4, 9))
    assert result.achieved == report.degree == Q(4, 5)
    assert shortcut_weight != result.achieved
    assert shortcut_weight > Q(0)
