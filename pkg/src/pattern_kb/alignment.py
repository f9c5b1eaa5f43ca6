"""Multiple alignments of one New pattern against Old patterns.

An alignment is a set of rows (row 0 is always New) and a set of
columns. A column unifies identical symbol occurrences from distinct
rows. Columns that contain the New occurrence may grow to any number of
rows; a column made only of Old occurrences is a single pair. No column
holds the same position of two copies of one pattern.

Column order is not stored as such: an alignment is valid when some
left-to-right ordering of its columns keeps every row's positions
strictly increasing, i.e. when the precedence graph is acyclic.
"""

import logging
from collections import Counter
from dataclasses import dataclass
from enum import Enum
from functools import cached_property
from typing import Iterable, Optional, Sequence

import networkx as nx

from .errors import AlignmentError
from .store import CostModel, Pattern
from .symbols import Symbol

log = logging.getLogger(__name__)

NEW_ROW = 0

# (row index, position in row)
Entry = tuple[int, int]


class RowKind(Enum):
    NEW = "new"
    OLD = "old"


@dataclass(frozen=True)
class Row:
    kind: RowKind
    pattern: Pattern
    occurrence_index: int = 0

    @property
    def pattern_id(self) -> Optional[int]:
        return self.pattern.pattern_id

    @property
    def label(self) -> str:
        if self.kind is RowKind.NEW:
            return "New"
        name = self.pattern.name
        return name if self.occurrence_index <= 1 else f"{name}({self.occurrence_index})"

    def __len__(self) -> int:
        return len(self.pattern)


@dataclass(frozen=True)
class Column:
    symbol: Symbol
    entries: tuple[Entry, ...]

    @property
    def rows(self) -> frozenset[int]:
        return frozenset(r for r, _ in self.entries)

    @property
    def has_new(self) -> bool:
        return any(r == NEW_ROW for r, _ in self.entries)


@dataclass(frozen=True)
class Score:
    b_n: float
    b_e: float

    @property
    def cd(self) -> float:
        return self.b_n - self.b_e


@dataclass(frozen=True)
class MultiAlignment:
    rows: tuple[Row, ...]
    columns: tuple[Column, ...] = ()

    @classmethod
    def from_new(cls, new: Pattern) -> "MultiAlignment":
        return cls((Row(RowKind.NEW, new, 0),), ())

    @property
    def new(self) -> Pattern:
        return self.rows[NEW_ROW].pattern

    @cached_property
    def column_of(self) -> dict[Entry, int]:
        index: dict[Entry, int] = {}
        for k, column in enumerate(self.columns):
            for entry in column.entries:
                index[entry] = k
        return index

    @cached_property
    def covered(self) -> frozenset[int]:
        """New positions that sit in some column."""
        return frozenset(p for (r, p) in self.column_of if r == NEW_ROW)

    @cached_property
    def pattern_ids(self) -> tuple[int, ...]:
        return tuple(sorted(row.pattern_id for row in self.rows[1:]))

    @cached_property
    def pattern_counts(self) -> Counter:
        return Counter(self.pattern_ids)

    @cached_property
    def key(self) -> tuple:
        """Structural identity, stable across the order rows were added."""
        return (
            tuple(row.pattern_id for row in self.rows[1:]),
            tuple(column.entries for column in self.columns),
        )

    @cached_property
    def column_order(self) -> tuple[int, ...]:
        """A deterministic left-to-right order of column indices."""
        graph = nx.DiGraph()
        graph.add_nodes_from(range(len(self.columns)))
        for r, row in enumerate(self.rows):
            previous = None
            for p in range(len(row)):
                k = self.column_of.get((r, p))
                if k is None:
                    continue
                if previous is not None:
                    graph.add_edge(previous, k)
                previous = k
        return tuple(nx.lexicographical_topological_sort(graph, key=lambda k: self.columns[k].entries))

    def symbol_at(self, entry: Entry) -> Symbol:
        r, p = entry
        return self.rows[r].pattern.symbols[p]

    def is_matched(self, row: int, pos: int) -> bool:
        return (row, pos) in self.column_of


def is_own_copy(rows: Sequence[Row], entries: Iterable[Entry], pattern_id: Optional[int], pos: int) -> bool:
    """True if ``entries`` already hold position ``pos`` of another copy of ``pattern_id``."""
    return pattern_id is not None and any(
        p == pos and rows[r].pattern_id == pattern_id for r, p in entries
    )


def canonicalize(rows: Sequence[Row], columns: Iterable[Column]) -> MultiAlignment:
    """Reorder Old rows by pattern id and structure, renumber, sort columns."""
    columns = list(columns)
    pattern_of = [row.pattern_id if r else -1 for r, row in enumerate(rows)]

    signature: dict[int, list] = {r: [] for r in range(len(rows))}
    for column in columns:
        for r, p in column.entries:
            partners = sorted((pattern_of[o], q) for o, q in column.entries if o != r)
            signature[r].append((p, tuple(partners)))

    old = sorted(
        range(1, len(rows)),
        key=lambda r: (rows[r].pattern_id, tuple(sorted(signature[r])), r),
    )
    remap = {NEW_ROW: NEW_ROW}
    new_rows = [Row(RowKind.NEW, rows[NEW_ROW].pattern, 0)]
    seen: Counter = Counter()
    for r in old:
        pattern = rows[r].pattern
        seen[pattern.pattern_id] += 1
        remap[r] = len(new_rows)
        new_rows.append(Row(RowKind.OLD, pattern, seen[pattern.pattern_id]))

    new_columns = [
        Column(column.symbol, tuple(sorted((remap[r], p) for r, p in column.entries)))
        for column in columns
    ]
    new_columns.sort(key=lambda c: c.entries)
    return MultiAlignment(tuple(new_rows), tuple(new_columns))


def _precedence_is_acyclic(rows: Sequence[Row], columns: Sequence[Column]) -> bool:
    """Kahn's algorithm over columns."""
    column_of: dict[Entry, int] = {}
    for k, column in enumerate(columns):
        for entry in column.entries:
            column_of[entry] = k
    successors: list[set[int]] = [set() for _ in columns]
    for r, row in enumerate(rows):
        previous = None
        for p in range(len(row)):
            k = column_of.get((r, p))
            if k is None:
                continue
            if previous is not None and k not in successors[previous]:
                successors[previous].add(k)
            previous = k
    indegree = [0] * len(columns)
    for succ in successors:
        for k in succ:
            indegree[k] += 1
    ready = [k for k, d in enumerate(indegree) if d == 0]
    visited = 0
    while ready:
        k = ready.pop()
        visited += 1
        for nxt in successors[k]:
            indegree[nxt] -= 1
            if indegree[nxt] == 0:
                ready.append(nxt)
    return visited == len(columns)


def validate_alignment(a: MultiAlignment) -> list[str]:
    """Independent invariant check. Returns a list of violations."""
    problems: list[str] = []
    if not a.rows or a.rows[NEW_ROW].kind is not RowKind.NEW:
        problems.append("row 0 must be the New row")
    if sum(1 for row in a.rows if row.kind is RowKind.NEW) != 1:
        problems.append("exactly one New row required")

    used: set[Entry] = set()
    for k, column in enumerate(a.columns):
        rows_in = [r for r, _ in column.entries]
        if len(column.entries) < 2:
            problems.append(f"column {k} has fewer than 2 entries")
        if len(set(rows_in)) != len(rows_in):
            problems.append(f"column {k} has two entries from one row")
        if not column.has_new and len(column.entries) != 2:
            problems.append(f"column {k} without New must be a pair")
        if len({(a.rows[r].pattern_id, p) for r, p in column.entries if r < len(a.rows)}) != len(column.entries):
            problems.append(f"column {k} matches a symbol with its own copy")
        for entry in column.entries:
            r, p = entry
            if not (0 <= r < len(a.rows)) or not (0 <= p < len(a.rows[r])):
                problems.append(f"column {k} entry {entry} out of range")
                continue
            if a.symbol_at(entry).id is None or a.symbol_at(entry) != column.symbol:
                problems.append(f"column {k} entry {entry} does not carry {column.symbol.name}")
            if entry in used:
                problems.append(f"entry {entry} appears in more than one column")
            used.add(entry)
    if problems:
        return problems

    order = nx.DiGraph()
    order.add_nodes_from(range(len(a.columns)))
    for r, row in enumerate(a.rows):
        in_row = sorted((p, k) for k, c in enumerate(a.columns) for (rr, p) in c.entries if rr == r)
        for (_, k1), (_, k2) in zip(in_row, in_row[1:]):
            order.add_edge(k1, k2)
    if not nx.is_directed_acyclic_graph(order):
        problems.append("columns cross: no order preserves every row")

    for r in range(1, len(a.rows)):
        if not any(rr == r for c in a.columns for rr, _ in c.entries):
            problems.append(f"row {r} ({a.rows[r].label}) takes part in no column")

    links = nx.Graph()
    links.add_nodes_from(range(len(a.rows)))
    for column in a.columns:
        members = sorted(column.rows)
        for other in members[1:]:
            links.add_edge(members[0], other)
    if not nx.is_connected(links):
        problems.append("rows are not connected to the New row")
    return problems


def score_alignment(a: MultiAlignment, costs: CostModel) -> Score:
    """b_n: matched New symbols; b_e: unmatched Identification symbols of Old rows."""
    new = a.rows[NEW_ROW].pattern
    b_n = sum(costs.cost(new.symbols[p]) for p in sorted(a.covered))
    b_e = 0.0
    for r in range(1, len(a.rows)):
        pattern = a.rows[r].pattern
        for p in pattern.id_positions:
            if (r, p) not in a.column_of:
                b_e += costs.cost(pattern.symbols[p])
    return Score(b_n=b_n, b_e=b_e)


def rank_key(a: MultiAlignment, score: Score) -> tuple:
    """Best first: higher cd, fewer rows, smaller sorted pattern ids,
    fewer columns, then the canonical structure."""
    return (
        -round(score.cd, 9),
        len(a.rows),
        a.pattern_ids,
        len(a.columns),
        a.key,
    )


@dataclass(frozen=True)
class Hit:
    """Match of candidate position ``candidate_pos`` to a base node.

    ``target`` is either ``("c", k)`` for column k or ``("o", r, p)`` for
    the unmatched occurrence at row r, position p.
    """

    target: tuple
    candidate_pos: int


def extend_alignment(
    current: MultiAlignment,
    hits: Sequence[Hit],
    candidate: Pattern,
) -> MultiAlignment:
    """Add ``candidate`` as a new row joined to ``current`` by ``hits``.

    A hit on a free occurrence creates a new pair column; a hit on a
    column that contains New adds the candidate occurrence to it.

    Raises:
        AlignmentError: if the result would violate an invariant
    """
    if not hits:
        raise AlignmentError(f"row {candidate.name} would take part in no column")
    new_r = len(current.rows)
    columns = list(current.columns)
    used_targets: set[tuple] = set()
    used_positions: set[int] = set()
    for hit in hits:
        j = hit.candidate_pos
        if not (0 <= j < len(candidate)) or j in used_positions:
            raise AlignmentError(f"bad candidate position {j}")
        if hit.target in used_targets:
            raise AlignmentError(f"target {hit.target} hit twice")
        used_positions.add(j)
        used_targets.add(hit.target)
        symbol = candidate.symbols[j]
        if hit.target[0] == "c":
            k = hit.target[1]
            column = columns[k]
            if not column.has_new:
                raise AlignmentError("cannot extend a column that lacks New")
            if column.symbol != symbol:
                raise AlignmentError(f"symbol mismatch {symbol.name} vs {column.symbol.name}")
            if is_own_copy(current.rows, column.entries, candidate.pattern_id, j):
                raise AlignmentError(f"{candidate.name} would match its own copy")
            columns[k] = Column(column.symbol, column.entries + ((new_r, j),))
        else:
            _, r, p = hit.target
            if (r, p) in current.column_of:
                raise AlignmentError(f"occurrence {(r, p)} already in a column")
            base_symbol = current.symbol_at((r, p))
            if base_symbol.id is None or base_symbol != symbol:
                raise AlignmentError(f"symbol mismatch {symbol.name} vs {base_symbol.name}")
            if is_own_copy(current.rows, [(r, p)], candidate.pattern_id, j):
                raise AlignmentError(f"{candidate.name} would match its own copy")
            columns.append(Column(symbol, ((r, p), (new_r, j))))

    rows = current.rows + (Row(RowKind.OLD, candidate, 0),)
    if not _precedence_is_acyclic(rows, columns):
        raise AlignmentError("extension would cross existing columns")
    return canonicalize(rows, columns)
