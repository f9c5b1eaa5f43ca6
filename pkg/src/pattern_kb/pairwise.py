"""Pairwise matching of a candidate pattern against a partial alignment.

The base is the current alignment viewed as a partial order of nodes:
each column is one node, each occurrence outside a column is its own
node, and every row orders the nodes it passes through. A hit sequence
links candidate positions, left to right, to base nodes so that no
hit's node can be reached from a later hit's node. That is exactly the
condition for the extended alignment to keep an acyclic column order.

Hits may target a free occurrence (creating a new column) or a column
that already holds the New occurrence (adding the candidate to it).
"""

import logging
from dataclasses import dataclass
from typing import Sequence

from .alignment import NEW_ROW, Hit, MultiAlignment, Score, is_own_copy
from .store import CostModel, Pattern

log = logging.getLogger(__name__)

DEFAULT_EXPANSION_BUDGET = 20000


@dataclass(frozen=True)
class HitSequence:
    """One way of attaching a candidate row, with the score it yields."""

    hits: tuple[Hit, ...]
    gain: float
    score: Score

    @property
    def pairs(self) -> tuple[tuple[tuple, int], ...]:
        return tuple((h.target, h.candidate_pos) for h in self.hits)


class _BaseGraph:
    """Node reachability over a partial alignment, held as int bitsets."""

    def __init__(self, a: MultiAlignment):
        self.index: dict[tuple, int] = {}
        for k in range(len(a.columns)):
            self.index[("c", k)] = k
        for r, row in enumerate(a.rows):
            for p in range(len(row)):
                if (r, p) not in a.column_of:
                    self.index[("o", r, p)] = len(self.index)

        n = len(self.index)
        successors: list[set[int]] = [set() for _ in range(n)]
        for r, row in enumerate(a.rows):
            previous = None
            for p in range(len(row)):
                node = self.node_of(a, r, p)
                if previous is not None:
                    successors[previous].add(node)
                previous = node

        indegree = [0] * n
        for succ in successors:
            for s in succ:
                indegree[s] += 1
        ready = [v for v in range(n) if indegree[v] == 0]
        order: list[int] = []
        while ready:
            v = ready.pop()
            order.append(v)
            for s in successors[v]:
                indegree[s] -= 1
                if indegree[s] == 0:
                    ready.append(s)

        self.reach = [0] * n
        for v in reversed(order):
            bits = 0
            for s in successors[v]:
                bits |= (1 << s) | self.reach[s]
            self.reach[v] = bits

    def node_of(self, a: MultiAlignment, r: int, p: int) -> int:
        k = a.column_of.get((r, p))
        if k is not None:
            return self.index[("c", k)]
        return self.index[("o", r, p)]


def _candidate_hits(
    a: MultiAlignment, candidate: Pattern, costs: CostModel
) -> tuple[list[tuple[Hit, float]], list[tuple[Hit, float]]]:
    """Split possible hits into (eligible, zero-gain fallbacks)."""
    by_symbol: dict[int, list[tuple]] = {}
    for k, column in enumerate(a.columns):
        if column.has_new:
            by_symbol.setdefault(column.symbol.id, []).append(("c", k))
    for r, row in enumerate(a.rows):
        for p, symbol in enumerate(row.pattern.symbols):
            if symbol.id is not None and (r, p) not in a.column_of:
                by_symbol.setdefault(symbol.id, []).append(("o", r, p))

    eligible: list[tuple[Hit, float]] = []
    fallback: list[tuple[Hit, float]] = []
    for j, symbol in enumerate(candidate.symbols):
        for target in by_symbol.get(symbol.id, ()):
            if target[0] == "c":
                entries = a.columns[target[1]].entries
            else:
                entries = [target[1:]]
            if is_own_copy(a.rows, entries, candidate.pattern_id, j):
                continue
            cost = costs.cost(symbol)
            gain = cost if candidate.is_id(j) else 0.0
            involves_new = target[0] == "c"
            if target[0] == "o":
                _, r, p = target
                if r == NEW_ROW:
                    gain += cost
                    involves_new = True
                elif a.rows[r].pattern.is_id(p):
                    gain += cost
            hit = Hit(target, j)
            if gain > 0 or involves_new:
                eligible.append((hit, gain))
            else:
                fallback.append((hit, gain))
    return eligible, fallback


def pairwise_align(
    a: MultiAlignment,
    candidate: Pattern,
    costs: CostModel,
    base_score: Score,
    beam_width: int,
    budget: int = DEFAULT_EXPANSION_BUDGET,
) -> list[HitSequence]:
    """Enumerate ways to attach ``candidate`` to ``a``, best first.

    Every returned sequence is maximal: no further eligible hit could be
    added without crossing. Scores are those of the extended alignment.

    Args:
        a: the partial alignment acting as the base
        candidate: Old pattern to add as a new row
        costs: cost model of the sealed store
        base_score: score of ``a``
        beam_width: maximum number of sequences returned
        budget: cap on search-tree expansions per call

    Returns:
        Up to ``beam_width`` hit sequences, highest score first. Empty when
        the candidate shares no matchable symbol with the base.
    """
    eligible, fallback = _candidate_hits(a, candidate, costs)
    own_ids = sum(costs.cost(candidate.symbols[p]) for p in candidate.id_positions)

    def finish(chosen: Sequence[tuple[Hit, float]]) -> HitSequence:
        b_n = base_score.b_n
        b_e = base_score.b_e + own_ids
        for hit, _ in chosen:
            cost = costs.cost(candidate.symbols[hit.candidate_pos])
            if candidate.is_id(hit.candidate_pos):
                b_e -= cost
            if hit.target[0] == "o":
                _, r, p = hit.target
                if r == NEW_ROW:
                    b_n += cost
                elif a.rows[r].pattern.is_id(p):
                    b_e -= cost
        gain = sum(g for _, g in chosen)
        return HitSequence(tuple(h for h, _ in chosen), gain, Score(b_n=b_n, b_e=b_e))

    if not eligible:
        singles = [finish([item]) for item in fallback]
        singles.sort(key=lambda s: (-s.score.cd, s.pairs))
        return singles[:beam_width]

    graph = _BaseGraph(a)
    eligible.sort(key=lambda item: (item[0].candidate_pos, item[0].target))
    nodes = [graph.index[hit.target] for hit, _ in eligible]
    count = len(eligible)

    # conflicts[i]: bitset of hits that cannot coexist with hit i
    conflicts = [0] * count
    for i in range(count):
        ji = eligible[i][0].candidate_pos
        for k in range(i + 1, count):
            jk = eligible[k][0].candidate_pos
            clash = (
                ji == jk
                or nodes[i] == nodes[k]
                or (graph.reach[nodes[k]] >> nodes[i]) & 1
            )
            if clash:
                conflicts[i] |= 1 << k
                conflicts[k] |= 1 << i
    later = [0] * count
    for i in range(count):
        later[i] = conflicts[i] >> (i + 1)

    results: dict[tuple, HitSequence] = {}
    expansions = 0

    def search(i: int, mask: int) -> None:
        nonlocal expansions
        expansions += 1
        if expansions > budget:
            return
        if i == count:
            if not mask:
                return
            for k in range(count):
                if not (mask >> k) & 1 and not conflicts[k] & mask:
                    return
            chosen = [eligible[k] for k in range(count) if (mask >> k) & 1]
            sequence = finish(chosen)
            results.setdefault(sequence.pairs, sequence)
            return
        if conflicts[i] & mask:
            search(i + 1, mask)
            return
        search(i + 1, mask | (1 << i))
        if later[i]:
            search(i + 1, mask)

    search(0, 0)
    if expansions > budget:
        log.debug("Pairwise budget exhausted for %s after %d expansions", candidate.name, budget)

    ranked = sorted(results.values(), key=lambda s: (-s.score.cd, s.pairs))
    return ranked[:beam_width]
