import re
from fractions import Fraction as Q

import pytest

from plfc.fuzzy import FiniteDomain, FuzzySet, RealInterval, Trapezoid
from plfc.language import Signature

# one line per acceptance criterion is printed at the end of a run that
# touched tests/test_acceptance.py; the text says what the criterion checks
CRITERIA = {
    1: "worked example: truth values of a fuzzy-priced literal",
    2: "worked example: necessity under a three-world distribution",
    3: "counterexample pair: 4/9 vs 0, search and oracle agree at 4/5",
    4: "worked example: graded unifier and resolvent weight, leaf for leaf",
    5: "merging fixture: provable with merging, weight 0 without",
    6: "necessity axioms on 500 random finite distributions",
    7: "soundness: 1000 random bases, every proof confirmed by the oracle",
    8: "cut rewriting preserves degrees; level-cut entailment is one-way",
    9: "degenerate propositional case against a classical oracle",
    10: "one-rule bound 4/9 is real but not the refutation optimum",
}


@pytest.fixture
def sig() -> Signature:
    """A small market-prices signature most tests share.

    price(i, x): item i sells at price x (price position extended);
    offer(i): item i is on offer.
    """
    s = Signature()
    s.add_sort("money", RealInterval(Q(0), Q(50)))
    s.add_sort("item", FiniteDomain(("potatoes", "apples", "salad")))

    def trap(a, b, c, d):
        return FuzzySet(s.sorts["money"], Trapezoid(Q(a), Q(b), Q(c), Q(d)))

    s.add_fuzzy("about_25", "money", trap(20, 24, 26, 30))
    s.add_fuzzy("exactly_25", "money", trap(20, 25, 25, 30))
    s.add_fuzzy("around_32", "money", trap(28, 32, 32, 36))
    s.add_fuzzy("cheap", "money", trap(0, 0, 15, 25))
    s.add_const("list_price", "money", Q(24))
    s.add_pred("price", (("item", False), ("money", True)))
    s.add_pred("offer", (("item", False),))
    s.add_pred("rel", (("money", True), ("item", False), ("money", True)))
    return s


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    outcomes: dict[int, set[str]] = {}
    for category in ("passed", "failed", "error", "xfailed", "xpassed"):
        for rep in terminalreporter.stats.get(category, ()):
            nodeid = getattr(rep, "nodeid", "")
            if "test_acceptance" not in nodeid:
                continue
            m = re.search(r"::test_ac(\d+)", nodeid)
            if m:
                outcomes.setdefault(int(m.group(1)), set()).add(category)
    if not outcomes:
        return
    terminalreporter.write_sep("-", "acceptance criteria")
    for n in sorted(outcomes):
        cats = outcomes[n]
        if cats & {"failed", "error", "xpassed"}:
            verdict = "FAIL"
        elif "xfailed" in cats:
            verdict = "FAIL (expected; the deviation is documented in the test file)"
        else:
            verdict = "pass"
        terminalreporter.write_line(f"AC-{n:<2} {verdict}  {CRITERIA.get(n, '')}")
