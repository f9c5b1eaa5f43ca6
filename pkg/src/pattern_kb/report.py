"""Report documents and their text / JSON emission.

Commands build a plain dict document; ``emit_report`` turns it into
text or JSON. Both views read the same document, so they always agree
on every number. Numbers are fixed-point strings with six fractional
digits, rounded half to even.
"""

import json
import logging
from dataclasses import asdict
from decimal import ROUND_HALF_EVEN, Decimal
from typing import Any, Optional, Sequence

from .alignment import MultiAlignment
from .inference import extract_inferences, group_by_coverage, probability_report, recognize
from .oracle import OracleResult
from .render import render_alignment
from .search import RankedAlignment, SearchParams
from .store import KnowledgeStore, Pattern

log = logging.getLogger(__name__)

NO_ALIGNMENT = "no alignment (cd>0) found"
FORMATS = ("text", "json")
_QUANTUM = Decimal("0.000001")


def format_number(value: float) -> str:
    text = str(Decimal(value).quantize(_QUANTUM, rounding=ROUND_HALF_EVEN))
    return "0.000000" if text == "-0.000000" else text


def _query_block(new: Pattern) -> dict:
    return {
        "text": new.text(),
        "tokens": [s.name for s in new.symbols],
        "novel": [s.name for s in new.symbols if s.is_novel],
    }


def _coverage_block(a: MultiAlignment) -> dict:
    new = a.new
    return {
        "matched": sorted(a.covered),
        "unmatched": [s.name for p, s in enumerate(new.symbols) if p not in a.covered],
        "fraction": format_number(len(a.covered) / len(new)),
    }


def alignment_block(rank: int, item: RankedAlignment) -> dict:
    a, score = item
    return {
        "rank": rank,
        "b_n": format_number(score.b_n),
        "b_e": format_number(score.b_e),
        "cd": format_number(score.cd),
        "rows": [
            {
                "label": row.label,
                "pattern_id": row.pattern_id,
                "symbols": [s.name for s in row.pattern.symbols],
            }
            for row in a.rows
        ],
        "columns": [
            {"symbol": c.symbol.name, "entries": [list(e) for e in c.entries]}
            for c in (a.columns[k] for k in a.column_order)
        ],
        "coverage": _coverage_block(a),
        "inferences": [
            {
                "row": inf.label,
                "symbols": list(inf.symbols),
                "context": list(inf.context) if inf.context else None,
            }
            for inf in extract_inferences(a)
        ],
        "rendered": render_alignment(a),
    }


def _groups_block(ranked: Sequence[RankedAlignment]) -> list[dict]:
    rank_of = {id(item): i for i, item in enumerate(ranked, start=1)}
    groups = []
    for group in group_by_coverage(ranked):
        report = probability_report(group)
        groups.append(
            {
                "covered": sorted(group.covered),
                "members": [
                    {"rank": rank_of[id(item)], "cd": format_number(item.score.cd), "p_rel": format_number(p)}
                    for item, p in zip(group.members, report.p_rel)
                ],
                "inferences": [
                    {"symbol": name, "p_inf": format_number(p)} for name, p in report.ranked_inferences()
                ],
            }
        )
    return groups


def build_report(
    command: str,
    new: Pattern,
    ranked: Sequence[RankedAlignment],
    params: SearchParams,
    probabilities: bool = False,
    recognition: bool = False,
) -> dict:
    """Assemble the document for an align, infer or recognize run."""
    document: dict[str, Any] = {
        "command": command,
        "query": _query_block(new),
        "parameters": asdict(params),
        "found": bool(ranked),
        "alignments": [alignment_block(i, item) for i, item in enumerate(ranked, start=1)],
    }
    if not ranked:
        document["marker"] = NO_ALIGNMENT
    if probabilities:
        document["groups"] = _groups_block(ranked)
    if recognition:
        document["recognition"] = [
            asdict(entry) for entry in (recognize(ranked[0].alignment) if ranked else [])
        ]
    return document


def build_oracle_report(new: Pattern, result: OracleResult, max_rows: int) -> dict:
    document: dict[str, Any] = {
        "command": "oracle",
        "query": _query_block(new),
        "parameters": {"max_rows": max_rows},
        "found": result.found and result.best.cd > 0,
        "best": None,
        "alignments": [],
    }
    if result.found:
        document["best"] = {
            "b_n": format_number(result.best.b_n),
            "b_e": format_number(result.best.b_e),
            "cd": format_number(result.best.cd),
        }
        document["alignments"] = [
            alignment_block(i, RankedAlignment(a, result.best))
            for i, a in enumerate(result.alignments, start=1)
        ]
    if not document["found"]:
        document["marker"] = NO_ALIGNMENT
    return document


def build_stats_report(store: KnowledgeStore) -> dict:
    """Cost table: one entry per symbol, cheapest first."""
    costs = store.costs
    symbols = sorted(store.table, key=lambda s: (costs.costs[s.id], s.name))
    return {
        "command": "stats",
        "total_frequency_mass": costs.total_mass,
        "novel_cost": format_number(costs.novel_cost),
        "symbols": [
            {"symbol": s.name, "frequency": costs.counts[s.id], "cost": format_number(costs.costs[s.id])}
            for s in symbols
        ],
    }


def build_validate_report(store: KnowledgeStore, source: Optional[str] = None) -> dict:
    return {
        "command": "validate",
        "source": source,
        "patterns": len(store),
        "symbols": len(store.table),
        "total_frequency_mass": store.total_frequency_mass,
        "longest_pattern": max(len(p) for p in store),
        "id_symbols": len({p.symbols[i].id for p in store for i in p.id_positions}),
    }


def _text_alignments(document: dict, lines: list[str]) -> None:
    for block in document["alignments"]:
        coverage = block["coverage"]
        lines.append(
            f"alignment {block['rank']}: cd={block['cd']} b_n={block['b_n']} b_e={block['b_e']}"
            f" coverage={len(coverage['matched'])}/{len(document['query']['tokens'])}"
        )
        lines.extend(block["rendered"].rstrip("\n").split("\n"))
        if coverage["unmatched"]:
            lines.append("unmatched: " + " ".join(coverage["unmatched"]))
        for inf in block["inferences"]:
            context = f" [{' '.join(inf['context'])}]" if inf["context"] else ""
            lines.append(f"  infer {inf['row']}: {' '.join(inf['symbols'])}{context}")
        lines.append("")


def _text(document: dict) -> str:
    lines: list[str] = []
    command = document["command"]
    if command == "stats":
        lines.append(f"F = {document['total_frequency_mass']}  novel cost = {document['novel_cost']}")
        width = max((len(e["symbol"]) for e in document["symbols"]), default=0)
        for entry in document["symbols"]:
            lines.append(f"{entry['symbol'].ljust(width)}  f={entry['frequency']}  cost={entry['cost']}")
        return "\n".join(lines) + "\n"
    if command == "validate":
        for key in ("source", "patterns", "symbols", "total_frequency_mass", "longest_pattern", "id_symbols"):
            lines.append(f"{key}: {document[key]}")
        return "\n".join(lines) + "\n"

    lines.append(f"query: {document['query']['text']}")
    if document["query"]["novel"]:
        lines.append("novel: " + " ".join(document["query"]["novel"]))
    if "marker" in document:
        lines.append(document["marker"])
        return "\n".join(lines) + "\n"
    if command == "oracle" and document["best"]:
        lines.append(f"oracle best cd={document['best']['cd']}")
    lines.append("")

    if command == "recognize":
        lines.append("recognized as:")
        for entry in document["recognition"]:
            lines.append(f"  {entry['label']}: {entry['matched']}/{entry['length']} matched")
        lines.append("")
    _text_alignments(document, lines)
    for i, group in enumerate(document.get("groups", []), start=1):
        positions = " ".join(document["query"]["tokens"][p] for p in group["covered"])
        lines.append(f"group {i}: {positions}")
        for member in group["members"]:
            lines.append(f"  alignment {member['rank']}: cd={member['cd']} p_rel={member['p_rel']}")
        for entry in group["inferences"]:
            lines.append(f"  {entry['symbol']}: {entry['p_inf']}")
        lines.append("")
    return "\n".join(lines).rstrip("\n") + "\n"


def emit_report(document: dict, fmt: str = "text") -> str:
    """Serialize a report document; identical documents give identical bytes."""
    if fmt not in FORMATS:
        raise ValueError(f"unknown report format: {fmt}")
    if fmt == "json":
        return json.dumps(document, sort_keys=True, indent=2, ensure_ascii=False) + "\n"
    return _text(document)
