"""Symbols and the interning table.

A symbol is an opaque token matched only by exact, case-sensitive name
equality. Interning gives every distinct name a dense integer id in
first-seen order; symbols that were never interned (tokens of a query
that the store does not know) carry ``id=None`` and never match.
"""

import logging
from dataclasses import dataclass
from enum import Enum
from typing import Optional

from .errors import FormatError

log = logging.getLogger(__name__)

CLOSING_PREFIX = "#"


class SymbolRole(Enum):
    """Role of one symbol occurrence inside a pattern."""

    IDENTIFICATION = "id"
    CONTENTS = "contents"


@dataclass(frozen=True, order=True)
class Symbol:
    """An interned symbol. ``id`` is None for novel symbols."""

    name: str
    id: Optional[int] = None

    @property
    def is_novel(self) -> bool:
        return self.id is None

    def __str__(self) -> str:
        return self.name


def check_token(name: str) -> None:
    """Raise FormatError unless ``name`` is a usable symbol token."""
    if not name:
        raise FormatError("empty symbol token")
    if any(ch.isspace() for ch in name):
        raise FormatError("symbol token contains whitespace", token=name)


class SymbolTable:
    """Injective name -> id mapping, ids assigned in interning order."""

    def __init__(self):
        self._ids: dict[str, int] = {}
        self._symbols: list[Symbol] = []
        self._frozen = False

    def __len__(self) -> int:
        return len(self._symbols)

    def __iter__(self):
        return iter(self._symbols)

    def __contains__(self, name: str) -> bool:
        return name in self._ids

    def freeze(self) -> None:
        self._frozen = True

    def intern(self, name: str) -> Symbol:
        check_token(name)
        existing = self._ids.get(name)
        if existing is not None:
            return self._symbols[existing]
        if self._frozen:
            raise FormatError("symbol table is frozen", token=name)
        symbol = Symbol(name, len(self._symbols))
        self._ids[name] = symbol.id
        self._symbols.append(symbol)
        return symbol

    def lookup(self, name: str) -> Symbol:
        """Return the interned symbol, or a novel one if unknown."""
        check_token(name)
        existing = self._ids.get(name)
        if existing is None:
            log.debug("Novel symbol: %s", name)
            return Symbol(name, None)
        return self._symbols[existing]


def intern(name: str, table: SymbolTable) -> Symbol:
    """Intern ``name`` in ``table`` and return its symbol."""
    return table.intern(name)
