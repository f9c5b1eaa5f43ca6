"""Beam search that assembles multiple alignments row by row."""

import logging
from collections import Counter
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass
from typing import NamedTuple

from .alignment import (
    NEW_ROW,
    MultiAlignment,
    Score,
    extend_alignment,
    rank_key,
    score_alignment,
    validate_alignment,
)
from .errors import AlignmentError, ParameterError, StoreError, ValidationError
from .pairwise import DEFAULT_EXPANSION_BUDGET, pairwise_align
from .store import CostModel, KnowledgeStore, Pattern

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class SearchParams:
    beam_width: int = 200
    max_rows: int = 20
    max_pattern_reuse: int = 3
    top_k_reported: int = 10
    max_iterations: int = 12
    workers: int = 1
    expansion_budget: int = DEFAULT_EXPANSION_BUDGET

    def __post_init__(self):
        for name, value in asdict(self).items():
            if isinstance(value, bool) or not isinstance(value, int) or value < 1:
                raise ParameterError(f"{name} must be a positive integer, got {value!r}")
        if self.max_rows < 2:
            raise ParameterError("max_rows must leave room for at least one Old row")


class RankedAlignment(NamedTuple):
    alignment: MultiAlignment
    score: Score


def _candidate_patterns(store: KnowledgeStore, a: MultiAlignment) -> list[int]:
    """Ids of Old patterns that share a matchable symbol with ``a``."""
    symbols = {column.symbol for column in a.columns if column.has_new}
    for r, row in enumerate(a.rows):
        for p, symbol in enumerate(row.pattern.symbols):
            if symbol.id is not None and (r, p) not in a.column_of:
                symbols.add(symbol)
    found: set[int] = set()
    for symbol in symbols:
        found.update(store.patterns_with_symbol(symbol))
    return sorted(found)


def _expand(
    store: KnowledgeStore,
    costs: CostModel,
    params: SearchParams,
    member: RankedAlignment,
) -> list[RankedAlignment]:
    a, score = member
    if len(a.rows) >= params.max_rows:
        return []
    grown: list[RankedAlignment] = []
    for pattern_id in _candidate_patterns(store, a):
        if a.pattern_counts[pattern_id] >= params.max_pattern_reuse:
            continue
        candidate = store.pattern(pattern_id)
        sequences = pairwise_align(
            a, candidate, costs, score, params.beam_width, params.expansion_budget
        )
        for sequence in sequences:
            try:
                extended = extend_alignment(a, sequence.hits, candidate)
            except AlignmentError as e:
                log.debug("Discarded extension with %s: %s", candidate.name, e)
                continue
            grown.append(RankedAlignment(extended, score_alignment(extended, costs)))
    return grown


def _frontier_key(item: RankedAlignment) -> tuple:
    # distinct patterns before reuse within one cd level
    return (-round(item.score.cd, 9), -len(item.alignment.pattern_counts), rank_key(*item))


class _Layout(NamedTuple):
    new_columns: dict[int, Counter]
    pairs: Counter


def _layout(a: MultiAlignment) -> _Layout:
    """Columns keyed by pattern id and position, so row numbering drops out."""
    new_columns: dict[int, Counter] = {}
    pairs: Counter = Counter()
    for column in a.columns:
        old = [(a.rows[r].pattern_id, p) for r, p in column.entries if r != NEW_ROW]
        if column.has_new:
            new_pos = next(p for r, p in column.entries if r == NEW_ROW)
            new_columns[new_pos] = Counter(old)
        else:
            pairs[tuple(sorted(old))] += 1
    return _Layout(new_columns, pairs)


def _extends(big: _Layout, small: _Layout) -> bool:
    """True if every column of ``small`` is still present, possibly grown, in ``big``."""
    for pos, entries in small.new_columns.items():
        grown = big.new_columns.get(pos)
        if grown is None or not entries <= grown:
            return False
    return small.pairs <= big.pairs


def _prune_related(ranked: list[RankedAlignment]) -> list[RankedAlignment]:
    """Settle alignments that differ from another by one Old row.

    With ``small`` the alignment lacking the row and ``big`` the one
    holding it:

    - ``small`` goes when ``big`` keeps all of its columns, adds a
      pattern it lacked, and scores at least as well. Zero-cost rows such
      as ``male`` in the Figure 1 alignment survive this way.
    - ``big`` goes when it covers no more of New, scores no better, and
      either rearranges columns of ``small`` or only repeats a pattern
      ``small`` already has. A default class cannot slip in under a more
      specific pattern that already explains the same symbols.
    """
    by_patterns: dict[tuple, list[RankedAlignment]] = {}
    for item in ranked:
        by_patterns.setdefault(item.alignment.pattern_ids, []).append(item)
    layouts = {item.alignment.key: _layout(item.alignment) for item in ranked}

    dropped: set[tuple] = set()
    for big_ids, bigs in by_patterns.items():
        for i in range(len(big_ids)):
            small_ids = big_ids[:i] + big_ids[i + 1 :]
            if (i > 0 and big_ids[i - 1] == big_ids[i]) or small_ids not in by_patterns:
                continue
            adds_pattern = big_ids[i] not in small_ids
            for big in bigs:
                big_cd, big_layout = round(big.score.cd, 9), layouts[big.alignment.key]
                for small in by_patterns[small_ids]:
                    small_cd = round(small.score.cd, 9)
                    extends = _extends(big_layout, layouts[small.alignment.key])
                    if adds_pattern and extends and big_cd >= small_cd:
                        dropped.add(small.alignment.key)
                    elif (
                        big.alignment.covered <= small.alignment.covered
                        and small_cd >= big_cd
                        and not (adds_pattern and extends)
                    ):
                        dropped.add(big.alignment.key)

    kept = [item for item in ranked if item.alignment.key not in dropped]
    if ranked and (not kept or round(kept[0].score.cd, 9) < round(ranked[0].score.cd, 9)):
        kept.insert(0, ranked[0])
    return kept


def build_alignments(
    store: KnowledgeStore,
    costs: CostModel,
    new: Pattern,
    params: SearchParams,
) -> list[RankedAlignment]:
    """Ranked alignments of ``new`` against ``store`` with cd > 0, best first.

    Each iteration extends every frontier member by one Old row. The
    frontier keeps the ``beam_width`` best unseen alignments; search stops
    when it empties or after ``max_iterations`` rounds. Alignments one row
    apart are then settled by ``_prune_related``.
    """
    if not store.sealed:
        raise StoreError("store must be sealed before alignment")
    if len(new) == 0:
        raise ValidationError("New pattern must contain at least one symbol")

    start = MultiAlignment.from_new(new)
    frontier = [RankedAlignment(start, Score(0.0, 0.0))]
    seen: dict[tuple, RankedAlignment] = {}

    executor = ThreadPoolExecutor(max_workers=params.workers) if params.workers > 1 else None
    try:
        for iteration in range(params.max_iterations):
            if executor is not None:
                batches = list(executor.map(lambda m: _expand(store, costs, params, m), frontier))
            else:
                batches = [_expand(store, costs, params, m) for m in frontier]

            fresh: dict[tuple, RankedAlignment] = {}
            for batch in batches:
                for item in batch:
                    key = item.alignment.key
                    if key not in seen and key not in fresh:
                        fresh[key] = item
            ordered = sorted(fresh.values(), key=_frontier_key)
            frontier = ordered[: params.beam_width]
            for item in frontier:
                seen[item.alignment.key] = item
            log.debug(
                "Iteration %d: %d new alignments, %d kept", iteration, len(fresh), len(frontier)
            )
            if not frontier:
                break
    finally:
        if executor is not None:
            executor.shutdown(wait=True)

    ranked = sorted(
        (item for item in seen.values() if item.score.cd > 0),
        key=lambda item: rank_key(*item),
    )
    valid: list[RankedAlignment] = []
    for item in ranked:
        problems = validate_alignment(item.alignment)
        if problems:
            log.warning("Dropping invalid alignment: %s", "; ".join(problems))
            continue
        valid.append(item)
    return _prune_related(valid)[: params.top_k_reported]
