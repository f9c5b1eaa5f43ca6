"""Fixed-width text rendering of alignments.

Each row is one line. Every column and every unmatched occurrence gets a
slot; matched occurrences share the slot of their column, so they start
at the same character offset on every line. Slots are laid out in a
deterministic topological order of the row orders.
"""

import logging

import networkx as nx

from .alignment import NEW_ROW, MultiAlignment

log = logging.getLogger(__name__)

SEPARATOR = " | "


def _slots(a: MultiAlignment) -> tuple[list[tuple], dict[tuple, int]]:
    """Ordered slots; each slot is ("c", k) or ("o", r, p)."""

    def node(r: int, p: int) -> tuple:
        k = a.column_of.get((r, p))
        return ("c", k) if k is not None else ("o", r, p)

    def first_entry(n: tuple) -> tuple[int, int]:
        return a.columns[n[1]].entries[0] if n[0] == "c" else (n[1], n[2])

    graph = nx.DiGraph()
    for r, row in enumerate(a.rows):
        previous = None
        for p in range(len(row)):
            current = node(r, p)
            graph.add_node(current)
            if previous is not None:
                graph.add_edge(previous, current)
            previous = current

    order = list(nx.lexicographical_topological_sort(graph, key=first_entry))
    return order, {n: i for i, n in enumerate(order)}


def render_row_order(a: MultiAlignment) -> list[int]:
    """New first, then Old rows by their first column slot and pattern id."""
    _, slot_of = _slots(a)
    first_slot: dict[int, int] = {}
    for k, column in enumerate(a.columns):
        for r, _ in column.entries:
            slot = slot_of[("c", k)]
            first_slot[r] = min(first_slot.get(r, slot), slot)
    old = sorted(
        range(1, len(a.rows)),
        key=lambda r: (first_slot.get(r, len(slot_of)), a.rows[r].pattern_id, r),
    )
    return [NEW_ROW] + old


def render_alignment(a: MultiAlignment) -> str:
    order, slot_of = _slots(a)

    def name_in(slot: tuple) -> str:
        if slot[0] == "c":
            return a.columns[slot[1]].symbol.name
        return a.rows[slot[1]].pattern.symbols[slot[2]].name

    widths = [len(name_in(slot)) + 1 for slot in order]
    offsets = [0]
    for width in widths:
        offsets.append(offsets[-1] + width)

    labels = {r: a.rows[r].label for r in range(len(a.rows))}
    label_width = max(len(label) for label in labels.values())

    lines = []
    for r in render_row_order(a):
        cells = [" " * w for w in widths]
        for p, symbol in enumerate(a.rows[r].pattern.symbols):
            k = a.column_of.get((r, p))
            slot = ("c", k) if k is not None else ("o", r, p)
            i = slot_of[slot]
            cells[i] = symbol.name.ljust(widths[i])
        lines.append((labels[r].ljust(label_width) + SEPARATOR + "".join(cells)).rstrip())
    return "\n".join(lines) + "\n"


def parse_rendered_columns(text: str) -> list[tuple[str, tuple[str, ...]]]:
    """Recover (symbol, row labels) for every column from rendered text.

    A column is any character offset where two or more rows start a token.
    """
    at_offset: dict[int, list[tuple[str, str]]] = {}
    for line in text.splitlines():
        if SEPARATOR not in line:
            continue
        label, grid = line.split(SEPARATOR, 1)
        label = label.rstrip()
        offset = 0
        for token in grid.split(" "):
            if token:
                at_offset.setdefault(offset, []).append((label, token))
            offset += len(token) + 1

    columns = []
    for offset in sorted(at_offset):
        entries = at_offset[offset]
        if len(entries) < 2:
            continue
        names = {token for _, token in entries}
        if len(names) != 1:
            log.warning("Offset %d carries differing tokens: %s", offset, sorted(names))
            continue
        columns.append((names.pop(), tuple(sorted(label for label, _ in entries))))
    return columns
