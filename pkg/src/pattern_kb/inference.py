"""Inferences, coverage groups and probabilities drawn from alignments.

An inference is what an Old row asserts beyond the query: the maximal
runs of its occurrences that no column touches. Probabilities compare
alignments that explain the same part of New:

    p_rel(A) = 2^-b_e(A) / sum over the group of 2^-b_e
    p_inf(s) = sum of p_rel(A) over members A that infer s
"""

import logging
from dataclasses import dataclass
from typing import Iterable, Optional, Sequence

import numpy as np

from .alignment import MultiAlignment
from .errors import InferenceError
from .search import RankedAlignment
from .symbols import CLOSING_PREFIX

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class Inference:
    symbols: tuple[str, ...]
    source: int
    row: int
    label: str
    context: Optional[tuple[str, str]] = None


@dataclass(frozen=True)
class CoverageGroup:
    covered: frozenset[int]
    members: tuple[RankedAlignment, ...]

    @property
    def best(self) -> RankedAlignment:
        return self.members[0]


@dataclass(frozen=True)
class ProbabilityReport:
    group: CoverageGroup
    p_rel: tuple[float, ...]
    p_inf: dict[str, float]

    def ranked_inferences(self) -> list[tuple[str, float]]:
        return sorted(self.p_inf.items(), key=lambda item: (-item[1], item[0]))


@dataclass(frozen=True)
class RecognitionEntry:
    label: str
    pattern_id: int
    matched: int
    length: int


def _boundary_context(names: Sequence[str]) -> list[Optional[tuple[str, str]]]:
    """Innermost enclosing boundary pair for each position of a row.

    A pair counts only when both twins occur in the row; a lone ``x`` or
    ``#x`` is a reference to another pattern and encloses nothing.
    """
    present = set(names)
    context: list[Optional[tuple[str, str]]] = []
    stack: list[str] = []
    for name in names:
        if name.startswith(CLOSING_PREFIX) and stack and stack[-1] == name[1:]:
            stack.pop()
            context.append((stack[-1], CLOSING_PREFIX + stack[-1]) if stack else None)
            continue
        context.append((stack[-1], CLOSING_PREFIX + stack[-1]) if stack else None)
        if CLOSING_PREFIX + name in present:
            stack.append(name)
    return context


def extract_inferences(a: MultiAlignment) -> list[Inference]:
    """Maximal unmatched runs of every Old row, row by row.

    Identification occurrences and closing boundaries are never listed.
    An unmatched opening boundary is listed on its own, since it names a
    slot the alignment left unexplained.
    """
    found: list[Inference] = []
    for r in range(1, len(a.rows)):
        row = a.rows[r]
        names = [s.name for s in row.pattern.symbols]
        present = set(names)
        context = _boundary_context(names)
        run: list[int] = []

        def flush():
            if run:
                found.append(
                    Inference(
                        tuple(names[p] for p in run), row.pattern_id, r, row.label, context[run[0]]
                    )
                )
                run.clear()

        for p, name in enumerate(names):
            if a.is_matched(r, p) or row.pattern.is_id(p):
                flush()
                continue
            if len(name) > 1 and name.startswith(CLOSING_PREFIX) and name[1:] in present:
                flush()
                continue
            if CLOSING_PREFIX + name in present:
                flush()
                found.append(Inference((name,), row.pattern_id, r, row.label, context[p]))
                continue
            run.append(p)
        flush()
    return found


def inferred_symbols(a: MultiAlignment) -> frozenset[str]:
    return frozenset(name for inference in extract_inferences(a) for name in inference.symbols)


def group_by_coverage(ranked: Iterable[RankedAlignment]) -> list[CoverageGroup]:
    """Partition ranked alignments by the set of New positions they match.

    Groups appear in the order of their best member, which is the first
    member of each group since the input is ranked.
    """
    groups: dict[frozenset[int], list[RankedAlignment]] = {}
    for item in ranked:
        groups.setdefault(item.alignment.covered, []).append(item)
    return [CoverageGroup(covered, tuple(members)) for covered, members in groups.items()]


def relative_probabilities(group: CoverageGroup) -> tuple[float, ...]:
    if not group.members:
        raise InferenceError("coverage group has no members")
    b_e = np.array([item.score.b_e for item in group.members], dtype=np.float64)
    weights = np.exp2(-(b_e - b_e.min()))
    p_rel = weights / weights.sum()
    return tuple(float(p) for p in p_rel)


def inference_probability(group: CoverageGroup, p_rel: Sequence[float]) -> dict[str, float]:
    p_inf: dict[str, float] = {}
    for item, p in zip(group.members, p_rel):
        for name in sorted(inferred_symbols(item.alignment)):
            p_inf[name] = p_inf.get(name, 0.0) + p
    return {name: min(p, 1.0) for name, p in p_inf.items()}


def probability_report(group: CoverageGroup) -> ProbabilityReport:
    p_rel = relative_probabilities(group)
    return ProbabilityReport(group, p_rel, inference_probability(group, p_rel))


def recognize(a: MultiAlignment) -> list[RecognitionEntry]:
    """Which stored patterns the query was recognized as, row by row."""
    entries = []
    for r in range(1, len(a.rows)):
        row = a.rows[r]
        matched = sum(1 for p in range(len(row)) if a.is_matched(r, p))
        entries.append(RecognitionEntry(row.label, row.pattern_id, matched, len(row)))
    return entries
