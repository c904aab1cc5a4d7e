"""Possibilistic first-order deduction with fuzzy constants and variable weights."""

from plfc.fuzzy import (
    FiniteDomain,
    FuzzySet,
    RealInterval,
    necessity,
    possibility,
)
from plfc.language import (
    Clause,
    KnowledgeBase,
    Signature,
    format_clause,
    well_formed,
)
from plfc.oracle import FiniteContext, oracle_entails
from plfc.parser import (
    ParseError,
    format_kb,
    format_source,
    parse_clause,
    parse_kb,
    parse_query,
    parse_source,
)
from plfc.refutation import Query, refute, render_trace_jsonl, render_trace_text

__all__ = [
    "Clause",
    "FiniteContext",
    "FiniteDomain",
    "FuzzySet",
    "KnowledgeBase",
    "ParseError",
    "Query",
    "RealInterval",
    "Signature",
    "format_clause",
    "format_kb",
    "format_source",
    "necessity",
    "oracle_entails",
    "parse_clause",
    "parse_kb",
    "parse_query",
    "parse_source",
    "possibility",
    "refute",
    "render_trace_jsonl",
    "render_trace_text",
    "well_formed",
]

__version__ = "0.1.0"
