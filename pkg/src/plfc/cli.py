"""Command-line front end.

Five commands over knowledge base files:

    plfc check KB --query Q     resolution refutation, trace on stdout
    plfc oracle KB --query Q    exact finite-context entailment, JSON verdict
    plfc fmt KB                 canonical formatting
    plfc trace FILE             replay and pretty-print a stored jsonl trace
    plfc report KB              figures and TSV tables into a directory

Exit status is 0 for proved/entailed, 1 for not proved/not entailed (and for
a trace that fails replay), 2 for anything wrong with the invocation: parse
errors, missing files, bad thresholds, oversize oracle contexts.

Default step and depth budgets can be set through the environment variables
PLFC_MAX_STEPS and PLFC_MAX_DEPTH; explicit flags win over both.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Optional, Sequence

from .fuzzy import format_rational, frac
from .language import LanguageError, format_clause
from .oracle import FiniteContext, OracleError, oracle_entails
from .parser import (
    ParseError,
    Source,
    format_source,
    parse_clause,
    parse_query,
    parse_source,
)
from .refutation import (
    Query,
    RefutationError,
    ReplayMismatch,
    refute,
    render_trace_jsonl,
    render_trace_text,
    replay_records,
)

__all__ = ["main"]

DEFAULT_MAX_STEPS = 10_000
DEFAULT_MAX_DEPTH = 64


class CliError(Exception):
    """Anything that should end the run with exit status 2."""


@dataclass
class RunConfig:
    kb_path: str
    query: Optional[str] = None
    alpha: Optional[Fraction] = None
    max_steps: int = DEFAULT_MAX_STEPS
    max_depth: int = DEFAULT_MAX_DEPTH
    trace_format: str = "text"
    merging: bool = True
    threshold: bool = True
    method: str = "auto"
    outdir: str = "plfc_report"
    extra_queries: tuple[str, ...] = field(default_factory=tuple)


def _env_int(name: str, fallback: int) -> int:
    raw = os.environ.get(name)
    if raw is None:
        return fallback
    try:
        v = int(raw)
    except ValueError:
        raise CliError(f"{name} must be a positive integer, got {raw!r}") from None
    if v <= 0:
        raise CliError(f"{name} must be a positive integer, got {raw!r}")
    return v


def _read(path: str) -> str:
    try:
        return Path(path).read_text()
    except OSError as e:
        raise CliError(f"cannot read {path}: {e.strerror or e}") from None


def _load_source(path: str) -> Source:
    return parse_source(_read(path), file=path)


def _pick_query(cfg: RunConfig, src: Source) -> Query:
    """The query under test: the --query value, or the file's only one.

    A --query value naming an existing file is read from that file, so both
    inline queries and query files work without a separate flag.
    """
    if cfg.query is not None:
        text = cfg.query
        if Path(text).is_file():
            text = _read(text).strip()
        return parse_query(text, src.kb.sig)
    if len(src.queries) == 1:
        return src.queries[0]
    if not src.queries:
        raise CliError("no query: pass --query or put one query statement in the file")
    raise CliError(
        f"the file has {len(src.queries)} queries; pick one with --query"
    )


def _checked_fraction(text: str) -> Fraction:
    try:
        return frac(text)
    except (ValueError, ZeroDivisionError):
        raise CliError(f"not a rational number: {text!r}") from None


def _preprocessing_line(result) -> str:
    fused = pruned = merged = rewritten = 0
    for ev in result.trace.events:
        if ev.rule == "GR":
            break
        if ev.rule == "FR":
            fused += 1
        elif ev.rule == "drop":
            pruned += 1
        elif ev.rule == "GM":
            merged += 1
        elif ev.rule == "EQ":
            rewritten += 1
    return (
        f"preprocessing: {fused} fused, {pruned} pruned,"
        f" {merged} merged, {rewritten} rewritten"
    )


def cmd_check(cfg: RunConfig) -> int:
    src = _load_source(cfg.kb_path)
    query = _pick_query(cfg, src)
    result = refute(
        src.kb,
        query,
        cfg.alpha,
        max_steps=cfg.max_steps,
        max_depth=cfg.max_depth,
        merging=cfg.merging,
        threshold=cfg.threshold,
    )
    if cfg.trace_format == "jsonl":
        sys.stdout.write(render_trace_jsonl(result, source=src.text))
    else:
        sys.stdout.write(_preprocessing_line(result) + "\n")
        sys.stdout.write(render_trace_text(result))
    return 0 if result.proved else 1


def cmd_oracle(cfg: RunConfig) -> int:
    src = _load_source(cfg.kb_path)
    query = _pick_query(cfg, src)
    spec = src.oracle
    if spec is None:
        raise CliError(
            "the oracle needs an oracle block in the KB file (add 'oracle { auto }')"
        )
    cap = spec.max_worlds if spec.max_worlds is not None else 1 << 25
    if spec.grids:
        ctx = FiniteContext(src.kb.sig, dict(spec.grids), max_worlds=cap)
    else:
        clauses = src.kb.clauses + (query.clause,)
        ctx = FiniteContext.auto(src.kb.sig, clauses, max_worlds=cap)
    beta = cfg.alpha if cfg.alpha is not None else query.beta
    if not 0 < beta <= 1:
        raise CliError(f"the threshold must lie in (0, 1], got {format_rational(beta)}")
    report = oracle_entails(ctx, src.kb.clauses, query.clause, beta, method=cfg.method)
    verdict = {"query": format_clause(query.clause), **report.as_dict()}
    sys.stdout.write(json.dumps(verdict, indent=2) + "\n")
    return 0 if report.entailed else 1


def cmd_fmt(cfg: RunConfig) -> int:
    sys.stdout.write(format_source(_load_source(cfg.kb_path)))
    return 0


def _render_records(records: Sequence[dict], verified: int) -> str:
    """The stored trace in the same layout the live renderer uses."""
    header = records[0]
    lines = [
        f"query     {header['query']}",
        f"threshold {header['alpha']}",
    ]
    verdict: dict = {}
    for rec in records[1:]:
        if rec.get("kind") == "verdict":
            verdict = rec
            continue
        pad = "  " * rec.get("depth", 0)
        rule = rec["rule"]
        if rule in ("input", "negation"):
            body = f"{rule:<9} {rec['clause']}"
        elif rule == "drop":
            body = f"drop {rec['parents'][0]}: {rec.get('note', '')}"
        elif rule == "GR":
            p1, p2 = rec["parents"]
            i1, i2 = rec["positions"]
            body = f"GR {p1}.{i1} x {p2}.{i2} {rec.get('subst', '')} -> {rec['clause']}"
            if rec.get("note"):
                body += f"  [{rec['note']}]"
        else:
            parents = "+".join(str(p) for p in rec.get("parents", ()))
            body = f"{rule} {parents} -> {rec['clause']}"
        lines.append(f"[{rec['id']:>3}] {pad}{body}")
    state = "proved" if verdict.get("proved") else "not proved"
    achieved = verdict.get("achieved") or "none"
    tail = ", step budget exhausted" if verdict.get("budget_exhausted") else ""
    lines.append(
        f"{state} at {header['alpha']}"
        f" (best empty-clause weight {achieved}, {verdict.get('steps', 0)} steps{tail})"
    )
    lines.append(f"replay: {verified} derivation steps verified")
    return "\n".join(lines) + "\n"


def cmd_trace(cfg: RunConfig) -> int:
    raw = _read(cfg.kb_path)
    try:
        records = [json.loads(line) for line in raw.splitlines() if line.strip()]
    except json.JSONDecodeError as e:
        raise CliError(f"{cfg.kb_path} is not a jsonl trace: {e}") from None
    if not records or records[0].get("kind") != "header":
        raise CliError("the trace has no header record")
    source = records[0].get("source")
    if source is None:
        raise CliError(
            "the trace does not embed its knowledge base;"
            " produce it with 'plfc check --trace jsonl'"
        )
    sig = parse_source(source, file=f"{cfg.kb_path}#source").kb.sig
    try:
        verified = replay_records(
            records, sig, lambda s: parse_clause(s, sig, internal_names=True)
        )
    except ReplayMismatch as e:
        sys.stderr.write(f"plfc: replay failed: {e}\n")
        return 1
    sys.stdout.write(_render_records(records, verified))
    return 0


def cmd_report(cfg: RunConfig) -> int:
    from .report import write_report

    src = _load_source(cfg.kb_path)
    queries = list(src.queries)
    for text in cfg.extra_queries:
        queries.append(parse_query(text, src.kb.sig))
    for name in write_report(src.kb, queries, cfg.outdir):
        sys.stdout.write(f"{Path(cfg.outdir, name)}\n")
    return 0


def _parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="plfc", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, with_query=True):
        sp.add_argument("kb", help="knowledge base file")
        if with_query:
            sp.add_argument("--query", help="query text, or a file containing one")
            sp.add_argument("--alpha", help="proof threshold, a rational in (0, 1]")

    check = sub.add_parser("check", help="prove a query by refutation")
    common(check)
    check.add_argument("--trace", choices=("text", "jsonl"), default="text")
    check.add_argument("--max-steps", type=int, help="resolution step budget")
    check.add_argument("--max-depth", type=int, help="search depth budget")
    check.add_argument("--disable-merging", action="store_true")
    check.add_argument("--disable-threshold", action="store_true")

    oracle = sub.add_parser("oracle", help="decide entailment over the oracle context")
    common(oracle)
    oracle.add_argument(
        "--method", choices=("auto", "enumerate", "decide"), default="auto"
    )

    fmt = sub.add_parser("fmt", help="print the file in canonical form")
    common(fmt, with_query=False)

    trace = sub.add_parser("trace", help="replay a stored jsonl trace")
    trace.add_argument("kb", metavar="file", help="trace file from check --trace jsonl")

    report = sub.add_parser("report", help="write figures and TSV tables")
    common(report, with_query=False)
    report.add_argument(
        "--query", action="append", default=[], help="extra query to tabulate"
    )
    report.add_argument("--out", default="plfc_report", help="output directory")
    return p


def _config(args: argparse.Namespace) -> RunConfig:
    cfg = RunConfig(kb_path=args.kb)
    if getattr(args, "alpha", None) is not None:
        cfg.alpha = _checked_fraction(args.alpha)
    if args.command == "report":
        cfg.extra_queries = tuple(args.query)
        cfg.outdir = args.out
    elif getattr(args, "query", None) is not None:
        cfg.query = args.query
    if args.command == "check":
        cfg.trace_format = args.trace
        cfg.merging = not args.disable_merging
        cfg.threshold = not args.disable_threshold
        steps = args.max_steps
        depth = args.max_depth
        cfg.max_steps = steps if steps is not None else _env_int(
            "PLFC_MAX_STEPS", DEFAULT_MAX_STEPS
        )
        cfg.max_depth = depth if depth is not None else _env_int(
            "PLFC_MAX_DEPTH", DEFAULT_MAX_DEPTH
        )
        if cfg.max_steps <= 0 or cfg.max_depth <= 0:
            raise CliError("budgets must be positive")
    if args.command == "oracle":
        cfg.method = args.method
    return cfg


_COMMANDS = {
    "check": cmd_check,
    "oracle": cmd_oracle,
    "fmt": cmd_fmt,
    "trace": cmd_trace,
    "report": cmd_report,
}


def main(argv: Optional[Sequence[str]] = None) -> int:
    try:
        args = _parser().parse_args(argv)
        cfg = _config(args)
        return _COMMANDS[args.command](cfg)
    except ParseError as e:
        sys.stderr.write(f"plfc: {e.span}: {e.message}\n")
        return 2
    except (CliError, LanguageError, RefutationError, OracleError) as e:
        sys.stderr.write(f"plfc: {e}\n")
        return 2


if __name__ == "__main__":
    sys.exit(main())
