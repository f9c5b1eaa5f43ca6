"""Patterns, the Old knowledge store and the symbol cost model.

The cost of a stored symbol is its Shannon cost over frequency-weighted
occurrence counts::

    cost(s) = -log2(f(s) / F)
    f(s)    = sum over patterns p of frequency(p) * count(s in p)
    F       = sum over patterns p of frequency(p) * len(p)

The ratio f/F is reduced to lowest terms before taking logarithms, so
multiplying every frequency by the same integer yields bit-identical
costs.
"""

import logging
import math
from collections import Counter
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Optional, Sequence, Union

import numpy as np

from .errors import StoreError, ValidationError
from .symbols import CLOSING_PREFIX, Symbol, SymbolRole, SymbolTable, check_token

log = logging.getLogger(__name__)

# One occurrence as handed to add_pattern: a bare name (role resolved by
# the fallback rule) or a (name, role) pair.
OccurrenceSpec = Union[str, tuple[str, Optional[SymbolRole]]]


@dataclass(frozen=True)
class Pattern:
    """An ordered sequence of symbol occurrences.

    ``pattern_id`` is None for a New (query) pattern.
    """

    pattern_id: Optional[int]
    symbols: tuple[Symbol, ...]
    roles: tuple[SymbolRole, ...]
    frequency: int = 1
    label: Optional[str] = None

    def __len__(self) -> int:
        return len(self.symbols)

    def is_id(self, pos: int) -> bool:
        return self.roles[pos] is SymbolRole.IDENTIFICATION

    @property
    def id_positions(self) -> tuple[int, ...]:
        return tuple(i for i, role in enumerate(self.roles) if role is SymbolRole.IDENTIFICATION)

    @property
    def name(self) -> str:
        if self.pattern_id is None:
            return "New"
        return self.label or f"p{self.pattern_id}"

    def text(self) -> str:
        return " ".join(s.name for s in self.symbols)


def fallback_roles(names: Sequence[str]) -> tuple[SymbolRole, ...]:
    """First occurrence is Identification; so is the last when it closes the first."""
    roles = [SymbolRole.CONTENTS] * len(names)
    if names:
        roles[0] = SymbolRole.IDENTIFICATION
        if len(names) > 1 and names[-1] == CLOSING_PREFIX + names[0]:
            roles[-1] = SymbolRole.IDENTIFICATION
    return tuple(roles)


def check_boundaries(names: Sequence[str]) -> None:
    """Check that paired boundary symbols ``x`` / ``#x`` nest properly.

    Only names whose closing twin occurs in the same pattern take part;
    unpaired boundary symbols are references matched elsewhere.

    Raises:
        ValidationError: naming the offending occurrence index
    """
    present = set(names)
    paired = {n for n in present if CLOSING_PREFIX + n in present}
    stack: list[tuple[str, int]] = []
    for index, name in enumerate(names):
        if name in paired:
            stack.append((name, index))
            continue
        if len(name) > 1 and name.startswith(CLOSING_PREFIX) and name[1:] in paired:
            if not stack or stack[-1][0] != name[1:]:
                raise ValidationError(f"boundary {name!r} closes out of order", index)
            stack.pop()
    if stack:
        name, index = stack[-1]
        raise ValidationError(f"boundary {name!r} is never closed", index)


@dataclass(frozen=True)
class CostModel:
    """Per-symbol bit costs derived from a sealed store."""

    costs: Mapping[int, float]
    counts: Mapping[int, int]
    total_mass: int
    novel_cost: float

    def cost(self, symbol: Symbol) -> float:
        if symbol.id is None:
            return self.novel_cost
        return self.costs[symbol.id]


@dataclass
class KnowledgeStore:
    """The Old store: patterns plus an interned symbol table."""

    table: SymbolTable = field(default_factory=SymbolTable)
    patterns: list[Pattern] = field(default_factory=list)
    total_frequency_mass: int = 0
    costs: Optional[CostModel] = None
    _labels: dict[str, int] = field(default_factory=dict)
    _by_symbol: dict[int, list[int]] = field(default_factory=dict)

    @property
    def sealed(self) -> bool:
        return self.costs is not None

    def __len__(self) -> int:
        return len(self.patterns)

    def __iter__(self):
        return iter(self.patterns)

    def pattern(self, pattern_id: int) -> Pattern:
        return self.patterns[pattern_id]

    def by_label(self, label: str) -> Pattern:
        return self.patterns[self._labels[label]]

    def patterns_with_symbol(self, symbol: Symbol) -> tuple[int, ...]:
        if symbol.id is None:
            return ()
        return tuple(self._by_symbol.get(symbol.id, ()))

    def add_pattern(
        self,
        occurrences: Sequence[OccurrenceSpec],
        frequency: int = 1,
        label: Optional[str] = None,
    ) -> int:
        """Validate and store a pattern, returning its id.

        Roles left unspecified on every occurrence are resolved by the
        fallback rule; if any occurrence carries a role, unmarked ones
        are Contents.
        """
        if self.sealed:
            raise StoreError("store is sealed")
        if not occurrences:
            raise ValidationError("pattern must contain at least one symbol")
        if isinstance(frequency, bool) or not isinstance(frequency, int) or frequency < 1:
            raise ValidationError(f"frequency must be a positive integer, got {frequency!r}")
        if label is not None and label in self._labels:
            raise StoreError(f"duplicate pattern label: {label}")

        names: list[str] = []
        marked: list[Optional[SymbolRole]] = []
        for occ in occurrences:
            if isinstance(occ, str):
                names.append(occ)
                marked.append(None)
            else:
                names.append(occ[0])
                marked.append(occ[1])

        for name in names:
            check_token(name)
        check_boundaries(names)
        if all(role is None for role in marked):
            roles = fallback_roles(names)
        else:
            roles = tuple(role or SymbolRole.CONTENTS for role in marked)

        symbols = tuple(self.table.intern(name) for name in names)
        pattern_id = len(self.patterns)
        pattern = Pattern(pattern_id, symbols, roles, frequency, label)
        self.patterns.append(pattern)
        if label is not None:
            self._labels[label] = pattern_id
        for symbol_id in sorted({s.id for s in symbols}):
            self._by_symbol.setdefault(symbol_id, []).append(pattern_id)
        self.total_frequency_mass += frequency * len(symbols)
        log.debug("Added pattern %s (%d symbols, freq %d)", pattern.name, len(symbols), frequency)
        return pattern_id

    def seal_and_build_costs(self) -> CostModel:
        """Freeze the store and derive the cost model."""
        if self.sealed:
            return self.costs
        if not self.patterns:
            raise StoreError("cannot seal an empty store")

        counts: Counter[int] = Counter()
        for pattern in self.patterns:
            for symbol in pattern.symbols:
                counts[symbol.id] += pattern.frequency

        total = self.total_frequency_mass
        ids = sorted(counts)
        numerators = []
        denominators = []
        for symbol_id in ids:
            divisor = math.gcd(counts[symbol_id], total)
            numerators.append(counts[symbol_id] // divisor)
            denominators.append(total // divisor)
        bits = np.log2(np.array(denominators, dtype=np.float64)) - np.log2(
            np.array(numerators, dtype=np.float64)
        )
        costs = {symbol_id: float(b) for symbol_id, b in zip(ids, bits)}

        self.costs = CostModel(
            costs=costs,
            counts=dict(counts),
            total_mass=total,
            novel_cost=math.log2(total + 1),
        )
        self.table.freeze()
        log.debug("Sealed store: %d patterns, %d symbols, F=%d", len(self.patterns), len(ids), total)
        return self.costs


def build_store(records: Iterable[tuple[Sequence[OccurrenceSpec], int, Optional[str]]]) -> KnowledgeStore:
    """Build and seal a store from (occurrences, frequency, label) records."""
    store = KnowledgeStore()
    for occurrences, frequency, label in records:
        store.add_pattern(occurrences, frequency, label)
    store.seal_and_build_costs()
    return store


def make_new_pattern(store: KnowledgeStore, names: Sequence[str]) -> Pattern:
    """Build a New pattern; names unknown to the store become novel symbols."""
    if not names:
        raise ValidationError("New pattern must contain at least one symbol")
    symbols = tuple(store.table.lookup(name) for name in names)
    return Pattern(None, symbols, (SymbolRole.CONTENTS,) * len(symbols))
