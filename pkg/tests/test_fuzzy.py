"""Exact fuzzy-set layer: measures, cuts, and the piecewise-linear engine."""

import random
from fractions import Fraction

import pytest

from plfc.fuzzy import (
    ConstantShape,
    CrispFinite,
    CrispInterval,
    Discrete,
    DomainMismatch,
    FiniteDomain,
    FuzzySet,
    PiecewiseLinear,
    Q,
    RealInterval,
    Trapezoid,
    ValueTable,
    degree,
    frac,
    goedel_reciprocal_necessity,
    max_fs,
    min_fs,
    necessity,
    necessity_of_cut_function,
    possibility,
    whole_domain,
)

PRICE = RealInterval(Q(0), Q(50))


def trap(a, b, c, d, dom=PRICE):
    return FuzzySet(dom, Trapezoid(Q(a), Q(b), Q(c), Q(d)))


def grid(dom, step=Fraction(1, 36)):
    xs = []
    x = dom.lo
    while x <= dom.hi:
        xs.append(x)
        x += step
    return xs


def grid_necessity(a, b, step=Fraction(1, 36)):
    return min(max(1 - b.membership(x), a.membership(x)) for x in grid(a.domain, step))


def grid_possibility(a, b, step=Fraction(1, 36)):
    return max(min(a.membership(x), b.membership(x)) for x in grid(a.domain, step))


class TestMeasures:
    """The two graded measures and the rejected implication-based variant."""

    def test_necessity_between_overlapping_trapezoids(self):
        # reference degree confirmed by an independent dense-grid evaluation
        about_25 = trap(20, 24, 26, 30)
        exactly_25ish = trap(20, 25, 25, 30)
        assert necessity(exactly_25ish, about_25) == Q(4, 9)
        assert grid_necessity(exactly_25ish, about_25, Fraction(1, 90)) == Q(4, 9)

    def test_reciprocal_implication_collapses_on_same_pair(self):
        """The implication-reading of necessity drops to zero here, which is
        exactly why the graded max-based reading is the one in use."""
        about_25 = trap(20, 24, 26, 30)
        exactly_25ish = trap(20, 25, 25, 30)
        assert goedel_reciprocal_necessity(exactly_25ish, about_25) == 0
        assert necessity(exactly_25ish, about_25) > 0

    def test_necessity_after_core_cut_is_sharper(self):
        about_25 = trap(20, 24, 26, 30)
        exactly_25ish = trap(20, 25, 25, 30)
        core = about_25.alpha_cut(Q(1))
        assert core.shape == CrispInterval(Q(24), Q(26))
        assert necessity(exactly_25ish, core) == Q(4, 5)

    def test_possibility_of_disjoint_flanks(self):
        exactly_25ish = trap(20, 25, 25, 30)
        around_32 = trap(28, 32, 32, 36)
        got = possibility(exactly_25ish, around_32)
        assert got == Q(2, 9)
        # the flanks (30 - x)/5 and (x - 28)/4 meet at x = 260/9
        x = Q(260, 9)
        assert exactly_25ish.membership(x) == around_32.membership(x) == Q(2, 9)

    def test_possibility_symmetry(self):
        a, b = trap(0, 5, 10, 20), trap(8, 15, 15, 30)
        assert possibility(a, b) == possibility(b, a)

    def test_necessity_against_grid_on_random_pairs(self):
        rng = random.Random(20260819)
        for _ in range(25):
            pts = sorted(Fraction(rng.randint(0, 150), 3) for _ in range(4))
            qts = sorted(Fraction(rng.randint(0, 150), 3) for _ in range(4))
            a, b = trap(*pts), trap(*qts)
            step = Fraction(1, 18)
            # the grid can only overestimate an infimum / underestimate a sup
            assert necessity(a, b) <= grid_necessity(a, b, step)
            assert possibility(a, b) >= grid_possibility(a, b, step)

    def test_necessity_of_whole_domain_is_one(self):
        a = trap(10, 20, 30, 40)
        assert necessity(whole_domain(PRICE), a) == 1

    def test_domain_mismatch_rejected(self):
        other = FuzzySet(RealInterval(Q(0), Q(10)), Trapezoid(Q(1), Q(2), Q(3), Q(4)))
        with pytest.raises(DomainMismatch):
            necessity(trap(1, 2, 3, 4), other)


class TestFiniteDomains:
    def test_measures_on_tables(self):
        dom = FiniteDomain(("a", "b", "c"))
        f = FuzzySet(dom, Discrete((("a", Q(1)), ("b", Q(1, 2)))))
        g = FuzzySet(dom, Discrete((("b", Q(1)), ("c", Q(3, 4)))))
        assert possibility(f, g) == Q(1, 2)
        # worlds: a -> max(0, 1) = 1, b -> max(0, 1/2) = 1/2, c -> max(1/4, 0)
        assert necessity(f, g) == Q(1, 4)
        assert necessity(g, FuzzySet(dom, CrispFinite(("b", "c")))) == Q(3, 4)

    def test_cut_and_support(self):
        dom = FiniteDomain(("a", "b", "c"))
        f = FuzzySet(dom, Discrete((("a", Q(1)), ("b", Q(1, 2)))))
        assert f.alpha_cut(Q(3, 4)).shape == CrispFinite(("a",))
        assert f.support().shape == CrispFinite(("a", "b"))
        assert f.alpha_cut(Q(0)).shape == CrispFinite(("a", "b", "c"))

    def test_min_max_tables(self):
        dom = FiniteDomain(("x", "y"))
        f = FuzzySet(dom, Discrete((("x", Q(1, 3)), ("y", Q(1)))))
        g = FuzzySet(dom, Discrete((("x", Q(2, 3)), ("y", Q(1, 4)))))
        lo = min_fs(f, g)
        hi = max_fs(f, g)
        assert lo.membership("x") == Q(1, 3) and lo.membership("y") == Q(1, 4)
        assert hi.membership("x") == Q(2, 3) and hi.membership("y") == Q(1)


class TestCutsAndSupports:
    def test_trapezoid_cut_interpolates(self):
        f = trap(20, 24, 26, 30)
        cut = f.alpha_cut(Q(1, 2))
        assert cut.shape == CrispInterval(Q(22), Q(28))

    def test_cut_at_zero_is_whole_domain(self):
        f = trap(20, 24, 26, 30)
        cut = f.alpha_cut(Q(0))
        assert cut.shape == CrispInterval(Q(0), Q(50))

    def test_support_is_open_where_flanks_slope(self):
        f = trap(20, 24, 26, 30)
        supp = f.support()
        assert supp.shape == CrispInterval(Q(20), Q(30), lo_open=True, hi_open=True)
        assert supp.membership(Q(20)) == 0
        assert supp.membership(Q(21)) == 1

    def test_rectangle_support_is_closed(self):
        f = trap(20, 20, 30, 30)
        assert f.support().shape == CrispInterval(Q(20), Q(30))

    def test_height_and_normalization(self):
        assert trap(0, 10, 10, 20).is_normalized()
        flat = FuzzySet(PRICE, ConstantShape(Q(1, 3)))
        assert flat.height() == Q(1, 3)
        assert not flat.is_normalized()

    def test_crisp_detection(self):
        assert trap(5, 5, 9, 9).is_crisp()
        assert not trap(5, 6, 9, 9).is_crisp()
        assert whole_domain(PRICE).is_crisp()


class TestPiecewiseEngine:
    def test_value_at_jump_points(self):
        f = FuzzySet(PRICE, CrispInterval(Q(10), Q(20), lo_open=True)).as_function()
        assert f.value(Q(10)) == 0
        assert f.value(Q(15)) == 1
        assert f.value(Q(20)) == 1
        assert f.value(Q(21)) == 0

    def test_combine_finds_crossings(self):
        a = trap(0, 10, 10, 20).as_function()
        b = trap(5, 15, 15, 25).as_function()
        both = a.combine(b, minimum=True)
        # rising flank of b meets the falling flank of a at 12.5
        assert Q(25, 2) in both.xs
        assert both.value(Q(25, 2)) == Q(3, 4)

    def test_inf_ignores_unattained_endpoint_values(self):
        # indicator of (10, 20]: value at 10 is 0, but the open segment's
        # limit into 10 is 1; the infimum over (10, 12) must be 1, not 0
        f = FuzzySet(PRICE, CrispInterval(Q(10), Q(20), lo_open=True)).as_function()
        assert f.inf_over(Q(10), Q(12), lo_open=True) == 1
        assert f.inf_over(Q(10), Q(12)) == 0

    def test_compose_tracks_preimages(self):
        outer = PiecewiseLinear.from_points([(Q(0), Q(0)), (Q(1, 2), Q(1)), (Q(1), Q(0))])
        inner = PiecewiseLinear.from_points([(Q(0), Q(0)), (Q(10), Q(1))])
        got = outer.compose_into(inner)
        assert got.value(Q(5)) == 1
        assert got.value(Q(0)) == 0
        assert got.value(Q(10)) == 0
        assert got.value(Q(5, 2)) == Q(1, 2)

    def test_simplify_preserves_pointwise_values(self):
        f = trap(0, 10, 20, 30).as_function()
        g = f.combine(f, minimum=False).simplify()
        assert f.equals(g)

    def test_map_affine_complement(self):
        f = trap(20, 24, 26, 30)
        comp = f.complement()
        for x in (Q(20), Q(22), Q(25), Q(31)):
            assert comp.membership(x) == 1 - f.membership(x)


class TestCutLevelFunction:
    """t -> N(a | [c]_t) as an exact object, checked pointwise."""

    def test_matches_pointwise_evaluation(self):
        a = trap(20, 25, 25, 30)
        c = trap(20, 24, 26, 30)
        fn = necessity_of_cut_function(a, c)
        for t in [Q(0), Q(1, 7), Q(1, 3), Q(1, 2), Q(2, 3), Q(9, 10), Q(1)]:
            cut = c.alpha_cut(t)
            assert fn.value(t) == necessity(a, cut), f"at t={t}"

    def test_endpoints(self):
        a = trap(20, 25, 25, 30)
        c = trap(20, 24, 26, 30)
        fn = necessity_of_cut_function(a, c)
        assert fn.value(Q(1)) == Q(4, 5)
        assert fn.value(Q(0)) == Q(0)

    def test_random_pairs_pointwise(self):
        rng = random.Random(77)
        levels = [Q(i, 12) for i in range(13)]
        for _ in range(20):
            pa = sorted(Fraction(rng.randint(0, 100), 2) for _ in range(4))
            pc = sorted(Fraction(rng.randint(0, 100), 2) for _ in range(4))
            a, c = trap(*pa), trap(*pc)
            fn = necessity_of_cut_function(a, c)
            for t in levels:
                assert fn.value(t) == necessity(a, c.alpha_cut(t)), (pa, pc, t)

    def test_constant_conditioner(self):
        a = trap(10, 20, 30, 40)
        c = FuzzySet(PRICE, ConstantShape(Q(1, 2)))
        fn = necessity_of_cut_function(a, c)
        assert fn.value(Q(1, 4)) == a.as_function().inf()
        assert fn.value(Q(3, 4)) == 1  # cut above the plateau is empty


class TestExactness:
    def test_no_floats_anywhere(self):
        f = trap(20, 24, 26, 30)
        g = trap(20, 25, 25, 30)
        n = necessity(g, f)
        assert isinstance(n, Fraction)
        fn = min_fs(f, g).as_function()
        assert all(isinstance(v, Fraction) for v in fn.at)

    def test_degree_guard(self):
        with pytest.raises(ValueError):
            degree(Q(3, 2))
        assert degree("2/3") == Q(2, 3)
        assert frac("0.25") == Q(1, 4)

    def test_table_roundtrip(self):
        t = ValueTable(("a", "b"), (Q(1), Q(0)))
        assert t.value("a") == 1
        assert t.combine(ValueTable(("a", "b"), (Q(1, 2), Q(1))), minimum=True).values == (
            Q(1, 2),
            Q(0),
        )
