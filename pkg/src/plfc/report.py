"""Render a knowledge base into figures and delimited tables.

The report is a directory of plain artifacts: one TSV per table (exact
rational notation throughout, so the numbers survive a spreadsheet round
trip) and one PNG per drawable aspect.  Membership functions are drawn per
sort, clause weight ceilings as a bar chart, and any queries are run with
default budgets and tabulated.

matplotlib is imported lazily with the Agg backend so that the rest of the
package never pays for it and the output does not depend on a display.
"""

from __future__ import annotations

import csv
from fractions import Fraction
from pathlib import Path
from typing import Optional, Sequence

from .calculus import CalculusError, threshold_value
from .fuzzy import FiniteDomain, RealInterval, format_rational
from .language import Clause, KnowledgeBase, format_clause, format_weight
from .refutation import Query, refute

__all__ = ["write_report"]


def _pyplot():
    import matplotlib

    matplotlib.use("Agg", force=True)
    import matplotlib.pyplot as plt

    return plt


def _tsv(path: Path, header: Sequence[str], rows: Sequence[Sequence[str]]) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, delimiter="\t", lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)


def _ceiling(c: Clause, kb: KnowledgeBase) -> Optional[Fraction]:
    try:
        return threshold_value(c, kb.sig)
    except CalculusError:
        return None


def _fuzzy_rows(kb: KnowledgeBase) -> list[list[str]]:
    rows = []
    for name in sorted(kb.sig.fuzzy):
        sort, fs = kb.sig.fuzzy[name]
        rows.append([name, sort, str(fs.shape), format_rational(fs.height())])
    return rows


def _clause_rows(kb: KnowledgeBase) -> list[list[str]]:
    rows = []
    for i, c in enumerate(kb.clauses):
        top = _ceiling(c, kb)
        rows.append(
            [
                str(i),
                format_clause(c),
                format_weight(c.weight),
                "" if top is None else format_rational(top),
            ]
        )
    return rows


def _sample_real(fs, dom: RealInterval) -> tuple[list[float], list[float]]:
    """Plot points for one membership function, jumps included.

    Sampling just inside each breakpoint renders crisp sets with open
    endpoints as near-vertical edges instead of silently connecting
    across the discontinuity.
    """
    fn = fs.as_function()
    xs: list[float] = []
    ys: list[float] = []

    def put(x: Fraction) -> None:
        xs.append(float(x))
        ys.append(float(fs.membership(x)))

    knots = list(fn.xs)
    if knots[0] > dom.lo:
        knots.insert(0, dom.lo)
    if knots[-1] < dom.hi:
        knots.append(dom.hi)
    for u, v in zip(knots, knots[1:]):
        eps = (v - u) / 1000
        put(u)
        put(u + eps)
        put(v - eps)
    put(knots[-1])
    return xs, ys


def _draw_real_sort(plt, path: Path, sort: str, dom: RealInterval, named) -> None:
    fig, ax = plt.subplots(figsize=(7, 3.2), dpi=120)
    for name, fs in named:
        xs, ys = _sample_real(fs, dom)
        ax.plot(xs, ys, label=name, linewidth=1.6)
    ax.set_xlim(float(dom.lo), float(dom.hi))
    ax.set_ylim(-0.05, 1.05)
    ax.set_xlabel(sort)
    ax.set_ylabel("membership")
    ax.legend(loc="upper right", fontsize=8)
    fig.tight_layout()
    fig.savefig(path)
    plt.close(fig)


def _draw_finite_sort(plt, path: Path, sort: str, dom: FiniteDomain, named) -> None:
    fig, ax = plt.subplots(figsize=(7, 3.2), dpi=120)
    syms = list(dom.symbols)
    width = 0.8 / max(len(named), 1)
    for k, (name, fs) in enumerate(named):
        offs = [i + k * width for i in range(len(syms))]
        vals = [float(fs.membership(s)) for s in syms]
        ax.bar(offs, vals, width=width, label=name)
    ax.set_xticks([i + 0.4 - width / 2 for i in range(len(syms))])
    ax.set_xticklabels(syms)
    ax.set_ylim(0, 1.05)
    ax.set_xlabel(sort)
    ax.set_ylabel("membership")
    ax.legend(loc="upper right", fontsize=8)
    fig.tight_layout()
    fig.savefig(path)
    plt.close(fig)


def _draw_clause_weights(plt, path: Path, kb: KnowledgeBase) -> None:
    fig, ax = plt.subplots(figsize=(7, 0.5 + 0.4 * len(kb.clauses)), dpi=120)
    idx = list(range(len(kb.clauses)))
    tops = [_ceiling(c, kb) for c in kb.clauses]
    vals = [1.0 if t is None else float(t) for t in tops]
    colors = ["#b0b0b0" if t is None else "#4878a8" for t in tops]
    ax.barh(idx, vals, color=colors)
    ax.set_yticks(idx)
    ax.set_yticklabels([str(i) for i in idx], fontsize=8)
    ax.invert_yaxis()
    ax.set_xlim(0, 1.0)
    ax.set_xlabel("weight ceiling")
    ax.set_ylabel("clause")
    fig.tight_layout()
    fig.savefig(path)
    plt.close(fig)


def write_report(
    kb: KnowledgeBase,
    queries: Sequence[Query] = (),
    outdir: "str | Path" = ".",
) -> list[str]:
    """Write the report files into outdir; returns their names in write order."""
    out = Path(outdir)
    out.mkdir(parents=True, exist_ok=True)
    written: list[str] = []

    def emit(name: str) -> Path:
        written.append(name)
        return out / name

    _tsv(emit("fuzzy_sets.tsv"), ["name", "sort", "shape", "height"], _fuzzy_rows(kb))
    _tsv(
        emit("clauses.tsv"),
        ["index", "clause", "weight", "weight_ceiling"],
        _clause_rows(kb),
    )

    plt = _pyplot()
    for sort in kb.sig.sorts:
        named = [(n, fs) for n, (s, fs) in sorted(kb.sig.fuzzy.items()) if s == sort]
        if not named:
            continue
        dom = kb.sig.sorts[sort]
        path = emit(f"memberships_{sort}.png")
        if isinstance(dom, RealInterval):
            _draw_real_sort(plt, path, sort, dom, named)
        else:
            _draw_finite_sort(plt, path, sort, dom, named)
    if kb.clauses:
        _draw_clause_weights(plt, emit("clause_weights.png"), kb)

    if queries:
        rows = []
        for i, q in enumerate(queries):
            r = refute(kb, q)
            rows.append(
                [
                    str(i),
                    format_clause(q.clause),
                    format_rational(r.alpha),
                    "yes" if r.proved else "no",
                    format_rational(r.achieved),
                    str(r.steps),
                ]
            )
        _tsv(
            emit("verdict.tsv"),
            ["index", "query", "alpha", "proved", "achieved", "steps"],
            rows,
        )
    return written
