"""Fuzzy sets over declared domains, with exact rational arithmetic.

Membership degrees, trapezoid breakpoints and measure values are all
``fractions.Fraction``; nothing in this module touches floats.  Sets over a
real interval are evaluated through an exact piecewise-linear representation
(:class:`PiecewiseLinear`) that keeps an explicit value at every breakpoint,
so step discontinuities (open interval ends, supports of trapezoids) are
handled by endpoint-limit analysis instead of sampling.  Sets over a finite
domain use a plain value table.

The two measures at the heart of everything:

    necessity(A | B)   = inf_x max(1 - B(x), A(x))
    possibility(A | B) = sup_x min(A(x), B(x))

plus the reciprocal-implication variant of necessity, kept only so its
behaviour can be compared against the adopted definition.
"""

from __future__ import annotations

import bisect
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Union

Q = Fraction
ZERO = Q(0)
ONE = Q(1)

RationalLike = Union[Fraction, int, str]


class DomainMismatch(ValueError):
    """Two sets were combined across different domains."""


class ShapeUnsupported(ValueError):
    """The requested operation is not defined for this membership shape."""


def frac(value: RationalLike) -> Fraction:
    """Coerce ints, Fractions and exact numeric strings ('2/3', '0.25')."""
    if isinstance(value, Fraction):
        return value
    if isinstance(value, int):
        return Q(value)
    if isinstance(value, str):
        return Q(value)
    raise TypeError(f"not an exact rational: {value!r}")


def degree(value: RationalLike) -> Fraction:
    """A rational constrained to [0, 1]."""
    q = frac(value)
    if q < 0 or q > 1:
        raise ValueError(f"degree out of [0, 1]: {q}")
    return q


def format_rational(q: Fraction) -> str:
    return str(q.numerator) if q.denominator == 1 else f"{q.numerator}/{q.denominator}"


# --------------------------------------------------------------------------
# domains


@dataclass(frozen=True)
class RealInterval:
    """Closed real interval [lo, hi] with lo < hi."""

    lo: Fraction
    hi: Fraction

    def __post_init__(self) -> None:
        if not self.lo < self.hi:
            raise ValueError(f"empty real domain [{self.lo}, {self.hi}]")

    def __str__(self) -> str:
        return f"real[{format_rational(self.lo)}, {format_rational(self.hi)}]"


@dataclass(frozen=True)
class FiniteDomain:
    """Finite domain given by an ordered tuple of distinct symbols."""

    symbols: tuple[str, ...]

    def __post_init__(self) -> None:
        if not self.symbols:
            raise ValueError("finite domain needs at least one symbol")
        if len(set(self.symbols)) != len(self.symbols):
            raise ValueError("finite domain symbols must be distinct")

    def __str__(self) -> str:
        return "{" + ", ".join(self.symbols) + "}"


Domain = Union[RealInterval, FiniteDomain]

# An element of a domain: a rational for real intervals, a symbol otherwise.
Element = Union[Fraction, str]


def element_in_domain(dom: Domain, x: Element) -> bool:
    if isinstance(dom, RealInterval):
        return isinstance(x, Fraction) and dom.lo <= x <= dom.hi
    return isinstance(x, str) and x in dom.symbols


def format_element(x: Element) -> str:
    return format_rational(x) if isinstance(x, Fraction) else x


# --------------------------------------------------------------------------
# exact piecewise-linear functions on a closed interval


@dataclass(frozen=True)
class PiecewiseLinear:
    """A function [xs[0], xs[-1]] -> Q given by breakpoints and open segments.

    ``at[i]`` is the value exactly at ``xs[i]``; ``segs[i] = (a, b)`` means the
    value is ``a + b*x`` on the open interval (xs[i], xs[i+1]).  Point values
    are independent of the neighbouring segments, which is what lets crisp
    sets with open endpoints live in the same representation as trapezoids.
    """

    xs: tuple[Fraction, ...]
    at: tuple[Fraction, ...]
    segs: tuple[tuple[Fraction, Fraction], ...]

    def __post_init__(self) -> None:
        if len(self.xs) < 2 or len(self.at) != len(self.xs) or len(self.segs) != len(self.xs) - 1:
            raise ValueError("inconsistent piecewise-linear data")
        if any(self.xs[i] >= self.xs[i + 1] for i in range(len(self.xs) - 1)):
            raise ValueError("breakpoints must be strictly increasing")

    # construction helpers

    @staticmethod
    def constant(lo: Fraction, hi: Fraction, v: Fraction) -> "PiecewiseLinear":
        return PiecewiseLinear((lo, hi), (v, v), ((v, ZERO),))

    @staticmethod
    def from_points(points: list[tuple[Fraction, Fraction]]) -> "PiecewiseLinear":
        """Continuous polyline through (x, y) pairs with increasing x."""
        xs = tuple(x for x, _ in points)
        at = tuple(y for _, y in points)
        segs = []
        for (x0, y0), (x1, y1) in zip(points, points[1:]):
            b = (y1 - y0) / (x1 - x0)
            segs.append((y0 - b * x0, b))
        return PiecewiseLinear(xs, at, tuple(segs))

    # evaluation

    def value(self, x: Fraction) -> Fraction:
        if x < self.xs[0] or x > self.xs[-1]:
            raise ValueError(f"{x} outside [{self.xs[0]}, {self.xs[-1]}]")
        i = bisect.bisect_left(self.xs, x)
        if i < len(self.xs) and self.xs[i] == x:
            return self.at[i]
        a, b = self.segs[i - 1]
        return a + b * x

    def seg_value(self, i: int, x: Fraction) -> Fraction:
        a, b = self.segs[i]
        return a + b * x

    # pointwise algebra

    def map_affine(self, p: Fraction, q: Fraction) -> "PiecewiseLinear":
        """Pointwise p + q * f."""
        return PiecewiseLinear(
            self.xs,
            tuple(p + q * v for v in self.at),
            tuple((p + q * a, q * b) for a, b in self.segs),
        )

    def _merged_axis(self, other: "PiecewiseLinear") -> tuple[Fraction, ...]:
        if self.xs[0] != other.xs[0] or self.xs[-1] != other.xs[-1]:
            raise DomainMismatch("piecewise functions on different intervals")
        return tuple(sorted(set(self.xs) | set(other.xs)))

    def _refine_against(self, other: "PiecewiseLinear") -> tuple[Fraction, ...]:
        """Merged breakpoints plus interior crossings of the active segments."""
        axis = list(self._merged_axis(other))
        refined: list[Fraction] = []
        for u, v in zip(axis, axis[1:]):
            refined.append(u)
            m = (u + v) / 2
            a1, b1 = self.segs[bisect.bisect_right(self.xs, m) - 1]
            a2, b2 = other.segs[bisect.bisect_right(other.xs, m) - 1]
            if b1 != b2:
                x_cross = (a2 - a1) / (b1 - b2)
                if u < x_cross < v:
                    refined.append(x_cross)
        refined.append(axis[-1])
        return tuple(refined)

    def combine(self, other: "PiecewiseLinear", minimum: bool) -> "PiecewiseLinear":
        """Pointwise min (or max), splitting segments at crossings."""
        refined = self._refine_against(other)
        pick = min if minimum else max
        at = tuple(pick(self.value(x), other.value(x)) for x in refined)
        segs = []
        for u, v in zip(refined, refined[1:]):
            m = (u + v) / 2
            s1 = self.segs[bisect.bisect_right(self.xs, m) - 1]
            s2 = other.segs[bisect.bisect_right(other.xs, m) - 1]
            v1 = s1[0] + s1[1] * m
            v2 = s2[0] + s2[1] * m
            segs.append(s1 if pick(v1, v2) == v1 else s2)
        return PiecewiseLinear(refined, at, tuple(segs)).simplify()

    def goedel_implication(self, other: "PiecewiseLinear") -> "PiecewiseLinear":
        """Pointwise self => other, with x => y = 1 if x <= y else 1 - x."""
        refined = self._refine_against(other)
        at = []
        for x in refined:
            fx, gx = self.value(x), other.value(x)
            at.append(ONE if fx <= gx else ONE - fx)
        segs = []
        for u, v in zip(refined, refined[1:]):
            m = (u + v) / 2
            a1, b1 = self.segs[bisect.bisect_right(self.xs, m) - 1]
            a2, b2 = other.segs[bisect.bisect_right(other.xs, m) - 1]
            if a1 + b1 * m <= a2 + b2 * m:
                segs.append((ONE, ZERO))
            else:
                segs.append((ONE - a1, -b1))
        return PiecewiseLinear(refined, tuple(at), tuple(segs)).simplify()

    # extrema (infima and suprema need not be attained; segment limits count)

    def _candidates(self) -> Iterable[Fraction]:
        yield from self.at
        for i, (a, b) in enumerate(self.segs):
            yield a + b * self.xs[i]
            yield a + b * self.xs[i + 1]

    def inf(self) -> Fraction:
        return min(self._candidates())

    def sup(self) -> Fraction:
        return max(self._candidates())

    def inf_over(self, lo: Fraction, hi: Fraction, lo_open: bool = False, hi_open: bool = False) -> Fraction:
        """Infimum over the window [lo, hi] (ends open per the flags)."""
        if lo < self.xs[0] or hi > self.xs[-1] or lo > hi or (lo == hi and (lo_open or hi_open)):
            raise ValueError("bad window")
        if lo == hi:
            return self.value(lo)
        cands: list[Fraction] = []
        for i, x in enumerate(self.xs):
            if lo < x < hi:
                cands.append(self.at[i])
        for i, (a, b) in enumerate(self.segs):
            u, v = self.xs[i], self.xs[i + 1]
            if v <= lo or u >= hi:
                continue
            cands.append(a + b * max(u, lo))
            cands.append(a + b * min(v, hi))
        for x, is_open in ((lo, lo_open), (hi, hi_open)):
            if not is_open:
                cands.append(self.value(x))
        return min(cands)

    def compose_into(self, inner: "PiecewiseLinear") -> "PiecewiseLinear":
        """self(inner(x)): inner must take values inside self's interval."""
        cuts = set(inner.xs)
        for i, (a, b) in enumerate(inner.segs):
            if b == 0:
                continue
            for t in self.xs:
                x = (t - a) / b
                if inner.xs[i] < x < inner.xs[i + 1]:
                    cuts.add(x)
        axis = tuple(sorted(cuts))
        at = tuple(self.value(inner.value(x)) for x in axis)
        segs = []
        for u, v in zip(axis, axis[1:]):
            m = (u + v) / 2
            ia, ib = inner.segs[bisect.bisect_right(inner.xs, m) - 1]
            if ib == 0:
                w = self.value(ia)  # inner is constant, value attained
                segs.append((w, ZERO))
            else:
                t_mid = ia + ib * m
                j = bisect.bisect_right(self.xs, t_mid) - 1
                oa, ob = self.segs[j]
                segs.append((oa + ob * ia, ob * ib))
        return PiecewiseLinear(axis, at, tuple(segs)).simplify()

    def simplify(self) -> "PiecewiseLinear":
        """Drop breakpoints where the function continues along one segment."""
        xs, at, segs = list(self.xs), list(self.at), list(self.segs)
        i = 1
        while i < len(xs) - 1:
            a, b = segs[i - 1]
            if segs[i] == (a, b) and at[i] == a + b * xs[i]:
                del xs[i], at[i], segs[i]
            else:
                i += 1
        return PiecewiseLinear(tuple(xs), tuple(at), tuple(segs))

    def equals(self, other: "PiecewiseLinear") -> bool:
        axis = self._merged_axis(other)
        if any(self.value(x) != other.value(x) for x in axis):
            return False
        for u, v in zip(axis, axis[1:]):
            m = (u + v) / 2
            i1 = bisect.bisect_right(self.xs, m) - 1
            i2 = bisect.bisect_right(other.xs, m) - 1
            if self.segs[i1] != other.segs[i2]:
                if self.seg_value(i1, m) != other.seg_value(i2, m) or self.seg_value(
                    i1, u
                ) != other.seg_value(i2, u):
                    return False
        return True


@dataclass(frozen=True)
class ValueTable:
    """Membership values over a finite domain, aligned with its symbols."""

    symbols: tuple[str, ...]
    values: tuple[Fraction, ...]

    def __post_init__(self) -> None:
        if len(self.symbols) != len(self.values):
            raise ValueError("table length mismatch")

    def value(self, x: str) -> Fraction:
        try:
            return self.values[self.symbols.index(x)]
        except ValueError:
            raise ValueError(f"{x!r} not in domain") from None

    def map_affine(self, p: Fraction, q: Fraction) -> "ValueTable":
        return ValueTable(self.symbols, tuple(p + q * v for v in self.values))

    def combine(self, other: "ValueTable", minimum: bool) -> "ValueTable":
        if self.symbols != other.symbols:
            raise DomainMismatch("tables over different domains")
        pick = min if minimum else max
        return ValueTable(self.symbols, tuple(pick(a, b) for a, b in zip(self.values, other.values)))

    def goedel_implication(self, other: "ValueTable") -> "ValueTable":
        if self.symbols != other.symbols:
            raise DomainMismatch("tables over different domains")
        vals = tuple(ONE if a <= b else ONE - a for a, b in zip(self.values, other.values))
        return ValueTable(self.symbols, vals)

    def inf(self) -> Fraction:
        return min(self.values)

    def sup(self) -> Fraction:
        return max(self.values)

    def equals(self, other: "ValueTable") -> bool:
        return self.symbols == other.symbols and self.values == other.values


MembershipFn = Union[PiecewiseLinear, ValueTable]


# --------------------------------------------------------------------------
# membership shapes


@dataclass(frozen=True)
class Trapezoid:
    """[t1; t2; t3; t4]: support [t1, t4], core [t2, t3], linear flanks."""

    t1: Fraction
    t2: Fraction
    t3: Fraction
    t4: Fraction

    def __post_init__(self) -> None:
        if not self.t1 <= self.t2 <= self.t3 <= self.t4:
            raise ValueError("trapezoid breakpoints out of order")

    def __str__(self) -> str:
        parts = ", ".join(format_rational(t) for t in (self.t1, self.t2, self.t3, self.t4))
        return f"trap({parts})"


@dataclass(frozen=True)
class Discrete:
    """Explicit symbol -> degree table; unlisted symbols sit at zero."""

    table: tuple[tuple[str, Fraction], ...]

    def __str__(self) -> str:
        inner = ", ".join(f"{s}: {format_rational(v)}" for s, v in self.table)
        return "set{" + inner + "}"


@dataclass(frozen=True)
class ConstantShape:
    level: Fraction

    def __str__(self) -> str:
        return f"const({format_rational(self.level)})"


@dataclass(frozen=True)
class CrispInterval:
    """Indicator of an interval; open flags make room for supports.

    lo == hi with an open flag encodes the empty set.
    """

    lo: Fraction
    hi: Fraction
    lo_open: bool = False
    hi_open: bool = False

    def __post_init__(self) -> None:
        if self.lo > self.hi:
            raise ValueError("interval endpoints out of order")

    @property
    def is_empty(self) -> bool:
        return self.lo == self.hi and (self.lo_open or self.hi_open)

    def __str__(self) -> str:
        lb = "(" if self.lo_open else "["
        rb = ")" if self.hi_open else "]"
        return f"interval{lb}{format_rational(self.lo)}, {format_rational(self.hi)}{rb}"


@dataclass(frozen=True)
class CrispFinite:
    members: tuple[str, ...]

    def __str__(self) -> str:
        return "set{" + ", ".join(self.members) + "}"


@dataclass(frozen=True)
class Piecewise:
    """General exact piecewise-linear membership; internal result shape."""

    plf: PiecewiseLinear

    def __str__(self) -> str:
        return "piecewise(...)"


Shape = Union[Trapezoid, Discrete, ConstantShape, CrispInterval, CrispFinite, Piecewise]


@dataclass(frozen=True)
class FuzzySet:
    """A membership shape attached to the domain it lives on."""

    domain: Domain
    shape: Shape

    def __post_init__(self) -> None:
        dom, sh = self.domain, self.shape
        real = isinstance(dom, RealInterval)
        if isinstance(sh, (Trapezoid, CrispInterval, Piecewise)) and not real:
            raise ValueError(f"{type(sh).__name__} needs a real domain")
        if isinstance(sh, (Discrete, CrispFinite)) and real:
            raise ValueError(f"{type(sh).__name__} needs a finite domain")
        if isinstance(sh, Trapezoid) and (sh.t1 < dom.lo or sh.t4 > dom.hi):
            raise ValueError("trapezoid leaves the domain")
        if isinstance(sh, CrispInterval) and (sh.lo < dom.lo or sh.hi > dom.hi):
            raise ValueError("interval leaves the domain")
        if isinstance(sh, Discrete):
            for s, v in sh.table:
                if s not in dom.symbols:
                    raise ValueError(f"unknown symbol {s!r}")
                degree(v)
        if isinstance(sh, CrispFinite):
            for s in sh.members:
                if s not in dom.symbols:
                    raise ValueError(f"unknown symbol {s!r}")
        if isinstance(sh, ConstantShape):
            degree(sh.level)
        if isinstance(sh, Piecewise) and (sh.plf.xs[0] != dom.lo or sh.plf.xs[-1] != dom.hi):
            raise ValueError("piecewise data does not span the domain")

    # evaluation ------------------------------------------------------------

    def membership(self, x: Element) -> Fraction:
        if not element_in_domain(self.domain, x):
            raise ValueError(f"{x!r} outside domain {self.domain}")
        sh = self.shape
        if isinstance(sh, Trapezoid):
            assert isinstance(x, Fraction)
            if x < sh.t1 or x > sh.t4:
                return ZERO
            if sh.t2 <= x <= sh.t3:
                return ONE
            if x < sh.t2:
                return (x - sh.t1) / (sh.t2 - sh.t1)
            return (sh.t4 - x) / (sh.t4 - sh.t3)
        if isinstance(sh, Discrete):
            for s, v in sh.table:
                if s == x:
                    return v
            return ZERO
        if isinstance(sh, ConstantShape):
            return sh.level
        if isinstance(sh, CrispInterval):
            assert isinstance(x, Fraction)
            above = sh.lo < x or (not sh.lo_open and x == sh.lo)
            below = x < sh.hi or (not sh.hi_open and x == sh.hi)
            return ONE if above and below and not sh.is_empty else ZERO
        if isinstance(sh, CrispFinite):
            return ONE if x in sh.members else ZERO
        return sh.plf.value(x)  # Piecewise

    def as_function(self) -> MembershipFn:
        dom = self.domain
        if isinstance(dom, FiniteDomain):
            return ValueTable(dom.symbols, tuple(self.membership(s) for s in dom.symbols))
        sh = self.shape
        lo, hi = dom.lo, dom.hi
        if isinstance(sh, ConstantShape):
            return PiecewiseLinear.constant(lo, hi, sh.level)
        if isinstance(sh, Trapezoid):
            xs = sorted({lo, hi} | {t for t in (sh.t1, sh.t2, sh.t3, sh.t4) if lo < t < hi})
            at = tuple(self.membership(x) for x in xs)
            segs = []
            for u, v in zip(xs, xs[1:]):
                m = (u + v) / 2
                if m < sh.t1 or m > sh.t4:
                    segs.append((ZERO, ZERO))
                elif sh.t2 <= m <= sh.t3:
                    segs.append((ONE, ZERO))
                elif m < sh.t2:
                    d = sh.t2 - sh.t1
                    segs.append((-sh.t1 / d, ONE / d))
                else:
                    d = sh.t4 - sh.t3
                    segs.append((sh.t4 / d, -ONE / d))
            return PiecewiseLinear(tuple(xs), at, tuple(segs))
        if isinstance(sh, CrispInterval):
            xs = sorted({lo, hi, sh.lo, sh.hi})
            at = tuple(self.membership(x) for x in xs)
            segs = []
            for u, v in zip(xs, xs[1:]):
                m = (u + v) / 2
                inside = sh.lo < m < sh.hi and not sh.is_empty
                segs.append((ONE if inside else ZERO, ZERO))
            return PiecewiseLinear(tuple(xs), at, tuple(segs))
        return sh.plf  # Piecewise

    # structure -------------------------------------------------------------

    def height(self) -> Fraction:
        return self.as_function().sup()

    def is_normalized(self) -> bool:
        return self.height() == ONE

    def is_crisp(self) -> bool:
        fn = self.as_function()
        if isinstance(fn, ValueTable):
            return all(v in (ZERO, ONE) for v in fn.values)
        return all(v in (ZERO, ONE) for v in fn.at) and all(
            b == 0 and a in (ZERO, ONE) for a, b in fn.segs
        )

    def support(self) -> "FuzzySet":
        """The crisp set where membership is positive (strict, so open ends)."""
        dom, sh = self.domain, self.shape
        if isinstance(dom, FiniteDomain):
            members = tuple(s for s in dom.symbols if self.membership(s) > 0)
            return FuzzySet(dom, CrispFinite(members))
        if isinstance(sh, Trapezoid):
            return FuzzySet(dom, CrispInterval(sh.t1, sh.t4, sh.t1 < sh.t2, sh.t3 < sh.t4))
        if isinstance(sh, ConstantShape):
            if sh.level > 0:
                return FuzzySet(dom, CrispInterval(dom.lo, dom.hi))
            return empty_crisp(dom)
        if isinstance(sh, CrispInterval):
            return self
        raise ShapeUnsupported("support of a general piecewise membership")

    def alpha_cut(self, alpha: Fraction) -> "FuzzySet":
        """The crisp set where membership reaches alpha; level 0 cuts nothing."""
        alpha = degree(alpha)
        dom, sh = self.domain, self.shape
        if alpha == 0:
            return whole_domain(dom)
        if isinstance(dom, FiniteDomain):
            members = tuple(s for s in dom.symbols if self.membership(s) >= alpha)
            return FuzzySet(dom, CrispFinite(members))
        if isinstance(sh, Trapezoid):
            lo = sh.t1 + alpha * (sh.t2 - sh.t1)
            hi = sh.t4 - alpha * (sh.t4 - sh.t3)
            return FuzzySet(dom, CrispInterval(lo, hi))
        if isinstance(sh, ConstantShape):
            return whole_domain(dom) if sh.level >= alpha else empty_crisp(dom)
        if isinstance(sh, CrispInterval):
            return self
        raise ShapeUnsupported("alpha-cut of a general piecewise membership")

    def complement(self) -> "FuzzySet":
        dom = self.domain
        if isinstance(dom, FiniteDomain):
            table = tuple((s, ONE - self.membership(s)) for s in dom.symbols)
            return FuzzySet(dom, Discrete(table))
        fn = self.as_function()
        assert isinstance(fn, PiecewiseLinear)
        return FuzzySet(dom, Piecewise(fn.map_affine(ONE, Q(-1)).simplify()))

    def pointwise_equal(self, other: "FuzzySet") -> bool:
        if self.domain != other.domain:
            return False
        a, b = self.as_function(), other.as_function()
        if isinstance(a, ValueTable):
            return a.equals(b)  # type: ignore[arg-type]
        return a.equals(b)  # type: ignore[arg-type]

    def describe(self) -> str:
        return str(self.shape)


def whole_domain(dom: Domain) -> FuzzySet:
    if isinstance(dom, RealInterval):
        return FuzzySet(dom, CrispInterval(dom.lo, dom.hi))
    return FuzzySet(dom, CrispFinite(dom.symbols))


def empty_crisp(dom: Domain) -> FuzzySet:
    if isinstance(dom, RealInterval):
        return FuzzySet(dom, CrispInterval(dom.lo, dom.lo, lo_open=True, hi_open=True))
    return FuzzySet(dom, CrispFinite(()))


def _pair(a: FuzzySet, b: FuzzySet) -> tuple[MembershipFn, MembershipFn]:
    if a.domain != b.domain:
        raise DomainMismatch(f"{a.domain} vs {b.domain}")
    return a.as_function(), b.as_function()


def necessity(a: FuzzySet, b: FuzzySet) -> Fraction:
    """N(a | b) = inf_x max(1 - b(x), a(x)); certainty of a given b."""
    fa, fb = _pair(a, b)
    return fb.map_affine(ONE, Q(-1)).combine(fa, minimum=False).inf()  # type: ignore[arg-type]


def possibility(a: FuzzySet, b: FuzzySet) -> Fraction:
    """Pos(a | b) = sup_x min(a(x), b(x)); degree of overlap."""
    fa, fb = _pair(a, b)
    return fa.combine(fb, minimum=True).sup()  # type: ignore[arg-type]


def goedel_reciprocal_necessity(a: FuzzySet, b: FuzzySet) -> Fraction:
    """inf_x (b(x) => a(x)) with the reciprocal of Goedel implication.

    Rejected as the basis for the calculus (it degrades to 0 as soon as b
    strictly exceeds a near b's core); kept for the documented comparison.
    """
    fa, fb = _pair(a, b)
    return fb.goedel_implication(fa).inf()  # type: ignore[arg-type]


def min_fs(a: FuzzySet, b: FuzzySet) -> FuzzySet:
    fa, fb = _pair(a, b)
    out = fa.combine(fb, minimum=True)  # type: ignore[arg-type]
    if isinstance(out, ValueTable):
        return FuzzySet(a.domain, Discrete(tuple(zip(out.symbols, out.values))))
    return FuzzySet(a.domain, Piecewise(out))


def max_fs(a: FuzzySet, b: FuzzySet) -> FuzzySet:
    fa, fb = _pair(a, b)
    out = fa.combine(fb, minimum=False)  # type: ignore[arg-type]
    if isinstance(out, ValueTable):
        return FuzzySet(a.domain, Discrete(tuple(zip(out.symbols, out.values))))
    return FuzzySet(a.domain, Piecewise(out))


def necessity_of_cut_function(a: FuzzySet, c: FuzzySet) -> PiecewiseLinear:
    """The map t -> N(a | cut of c at t) as an exact function on [0, 1].

    Needed when a resolution step leaves a cut level symbolic: the level later
    gets eliminated by a supremum over a real sort, and that supremum has to
    see the exact shape of t -> N(a | [c]_t).  Only shapes whose cuts are
    intervals are supported, which covers every declarable real-domain shape.
    """
    dom = a.domain
    if not isinstance(dom, RealInterval) or a.domain != c.domain:
        raise DomainMismatch("cut-level analysis needs one shared real domain")
    fa = a.as_function()
    assert isinstance(fa, PiecewiseLinear)
    csh = c.shape

    def window_ends(t: Fraction) -> tuple[tuple[Fraction, Fraction], tuple[Fraction, Fraction]] | None:
        """Cut ends as (intercept, slope) pairs in t, or None if the cut is empty."""
        if isinstance(csh, Trapezoid):
            return (csh.t1, csh.t2 - csh.t1), (csh.t4, csh.t3 - csh.t4)
        cut = c.alpha_cut(t).shape
        assert isinstance(cut, CrispInterval)
        if cut.is_empty:
            return None
        return (cut.lo, ZERO), (cut.hi, ZERO)

    def n_at(t: Fraction) -> Fraction:
        if t == 0:
            return fa.inf()
        ends = window_ends(t)
        if ends is None:
            return ONE
        (l0, l1), (h0, h1) = ends
        return fa.inf_over(l0 + l1 * t, h0 + h1 * t)

    # breakpoints in t: shape changes of the cut, plus crossings of the
    # moving cut ends with a's breakpoints
    cuts: set[Fraction] = {ZERO, ONE}
    if isinstance(csh, ConstantShape) and 0 < csh.level < 1:
        cuts.add(csh.level)
    if isinstance(csh, Trapezoid):
        for x0, dx in ((csh.t1, csh.t2 - csh.t1), (csh.t4, csh.t3 - csh.t4)):
            if dx == 0:
                continue
            for xb in fa.xs:
                t = (xb - x0) / dx
                if 0 < t < 1:
                    cuts.add(t)
    axis = sorted(cuts)
    at = [n_at(t) for t in axis]
    xs_out: list[Fraction] = []
    at_out: list[Fraction] = []
    segs_out: list[tuple[Fraction, Fraction]] = []
    for i, (u, v) in enumerate(zip(axis, axis[1:])):
        m = (u + v) / 2
        ends = window_ends(m)
        if ends is None:
            piece = PiecewiseLinear((u, v), (ONE, ONE), ((ONE, ZERO),))
        else:
            # On (u, v) the window ends move linearly without crossing any
            # breakpoint of a, so the set of breakpoints strictly inside the
            # window is fixed and N(t) is a min of finitely many lines in t:
            # the values of a at the two moving ends, plus constants for the
            # values and one-sided limits of a at each interior breakpoint.
            (l0, l1), (h0, h1) = ends
            lo_m, hi_m = l0 + l1 * m, h0 + h1 * m
            terms: list[tuple[Fraction, Fraction]] = []
            for x0, dx in ((l0, l1), (h0, h1)):
                pos = x0 + dx * m
                if dx == 0 and pos in fa.xs:
                    terms.append((fa.value(pos), ZERO))
                else:
                    j = bisect.bisect_right(fa.xs, pos) - 1
                    j = min(max(j, 0), len(fa.segs) - 1)
                    sa, sb = fa.segs[j]
                    terms.append((sa + sb * x0, sb * dx))
            floor: Fraction | None = None
            for j in range(len(fa.xs)):
                if not lo_m < fa.xs[j] < hi_m:
                    continue
                for cand in (
                    fa.at[j],
                    fa.seg_value(j - 1, fa.xs[j]) if j > 0 else None,
                    fa.seg_value(j, fa.xs[j]) if j < len(fa.segs) else None,
                ):
                    if cand is not None:
                        floor = cand if floor is None else min(floor, cand)
            # a fixed window end sitting between breakpoints still exposes the
            # one-sided limit of the adjacent open segment
            for pos, fixed in ((lo_m, l1 == 0), (hi_m, h1 == 0)):
                if fixed and pos in fa.xs:
                    j = fa.xs.index(pos)
                    inward = fa.seg_value(j, pos) if pos == lo_m and j < len(fa.segs) else (
                        fa.seg_value(j - 1, pos) if j > 0 else None
                    )
                    if inward is not None:
                        floor = inward if floor is None else min(floor, inward)
            if floor is not None:
                terms.append((floor, ZERO))
            piece = _line_piece(u, v, terms[0])
            for extra in terms[1:]:
                piece = piece.combine(_line_piece(u, v, extra), minimum=True)
        for k in range(len(piece.xs) - 1):
            x = piece.xs[k]
            xs_out.append(x)
            at_out.append(at[i] if x == u else piece.at[k])
            segs_out.append(piece.segs[k])
    xs_out.append(axis[-1])
    at_out.append(at[-1])
    return PiecewiseLinear(tuple(xs_out), tuple(at_out), tuple(segs_out)).simplify()


def _line_piece(u: Fraction, v: Fraction, line: tuple[Fraction, Fraction]) -> PiecewiseLinear:
    a, b = line
    return PiecewiseLinear((u, v), (a + b * u, a + b * v), (line,))
