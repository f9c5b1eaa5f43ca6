"""Exhaustive search for small instances, used to check the beam search."""

import logging
from dataclasses import dataclass, field
from itertools import combinations_with_replacement
from typing import Optional

from .alignment import (
    NEW_ROW,
    Column,
    MultiAlignment,
    Row,
    RowKind,
    Score,
    canonicalize,
    is_own_copy,
    score_alignment,
    validate_alignment,
)
from .errors import OracleLimitError
from .store import CostModel, KnowledgeStore, Pattern

log = logging.getLogger(__name__)

MAX_TOTAL_ROWS = 4
MAX_PATTERN_LENGTH = 8
TOLERANCE = 1e-9


@dataclass
class OracleResult:
    best: Optional[Score] = None
    alignments: list[MultiAlignment] = field(default_factory=list)

    @property
    def found(self) -> bool:
        return self.best is not None


def _check_limits(store: KnowledgeStore, new: Pattern, max_rows: int) -> None:
    if max_rows > MAX_TOTAL_ROWS:
        raise OracleLimitError(f"oracle handles at most {MAX_TOTAL_ROWS} rows, asked for {max_rows}")
    if len(new) > MAX_PATTERN_LENGTH:
        raise OracleLimitError(f"New pattern longer than {MAX_PATTERN_LENGTH} symbols")
    for pattern in store:
        if len(pattern) > MAX_PATTERN_LENGTH:
            raise OracleLimitError(
                f"pattern {pattern.name} longer than {MAX_PATTERN_LENGTH} symbols"
            )


def _column_sets(rows: tuple[Row, ...]):
    """Yield every admissible column set over ``rows`` (possibly crossing)."""
    occurrences = [(r, p) for r, row in enumerate(rows) for p in range(len(row))]
    symbols = [rows[r].pattern.symbols[p] for r, p in occurrences]

    # later[i]: True if a later occurrence in another row carries the same symbol
    later = []
    for i, (r, _) in enumerate(occurrences):
        later.append(
            symbols[i].id is not None
            and any(
                symbols[k] == symbols[i] and occurrences[k][0] != r
                for k in range(i + 1, len(occurrences))
            )
        )

    open_columns: list[list[tuple[int, int]]] = []

    def walk(i: int):
        if i == len(occurrences):
            yield [
                Column(rows[c[0][0]].pattern.symbols[c[0][1]], tuple(c))
                for c in open_columns
                if len(c) >= 2
            ]
            return
        r, p = occurrences[i]
        yield from walk(i + 1)
        if symbols[i].id is None:
            return
        for column in open_columns:
            first_r, first_p = column[0]
            if rows[first_r].pattern.symbols[first_p] != symbols[i]:
                continue
            if any(cr == r for cr, _ in column):
                continue
            if is_own_copy(rows, column, rows[r].pattern_id, p):
                continue
            if column[0][0] != NEW_ROW and len(column) >= 2:
                continue
            column.append((r, p))
            yield from walk(i + 1)
            column.pop()
        if later[i]:
            open_columns.append([(r, p)])
            yield from walk(i + 1)
            open_columns.pop()

    yield from walk(0)


def brute_force_best(
    store: KnowledgeStore,
    costs: CostModel,
    new: Pattern,
    max_rows: int = MAX_TOTAL_ROWS,
    max_pattern_reuse: int = 3,
) -> OracleResult:
    """Enumerate every valid alignment with at most ``max_rows`` rows.

    Returns the best score and all alignments attaining it. An instance
    with no valid alignment gives an empty result.

    Raises:
        OracleLimitError: if the instance is beyond the exhaustive limits
    """
    _check_limits(store, new, max_rows)
    result = OracleResult()
    seen: set[tuple] = set()
    new_row = Row(RowKind.NEW, new, 0)
    pattern_ids = [p.pattern_id for p in store]

    for size in range(1, max_rows):
        for chosen in combinations_with_replacement(pattern_ids, size):
            if any(chosen.count(pid) > max_pattern_reuse for pid in set(chosen)):
                continue
            rows = (new_row,) + tuple(Row(RowKind.OLD, store.pattern(pid), 0) for pid in chosen)
            for columns in _column_sets(rows):
                candidate = canonicalize(rows, columns)
                if candidate.key in seen:
                    continue
                seen.add(candidate.key)
                if validate_alignment(candidate):
                    continue
                score = score_alignment(candidate, costs)
                if result.best is None or score.cd > result.best.cd + TOLERANCE:
                    result.best = score
                    result.alignments = [candidate]
                elif abs(score.cd - result.best.cd) <= TOLERANCE:
                    result.alignments.append(candidate)

    log.debug(
        "Oracle examined %d alignments; best cd %s",
        len(seen),
        None if result.best is None else f"{result.best.cd:.6f}",
    )
    return result
