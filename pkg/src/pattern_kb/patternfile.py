"""The .sp pattern file format.

One record per line::

    [label:] [freq x] sym1 sym2 ... symN ;

A leading ``%`` marks an Identification occurrence. Without any ``%`` in
a record the fallback rule applies (first token, and the last one when it
is the closing twin of the first). Lines starting with ``//`` are
comments, as is anything after ``//`` following a record.
"""

import logging
import re
from pathlib import Path
from typing import Optional, Sequence, Union

from .errors import FormatError, KBLoadError, PatternKBError, ValidationError
from .store import KnowledgeStore, OccurrenceSpec, Pattern, make_new_pattern
from .symbols import SymbolRole

log = logging.getLogger(__name__)

COMMENT = "//"
TERMINATOR = ";"
ID_MARKER = "%"
FREQUENCY_MARKER = "x"
LABEL_SUFFIX = ":"
KB_SUFFIX = ".sp"

_FREQUENCY_TOKEN = re.compile(r"^(\d+)x$")
_INTEGER = re.compile(r"^\d+$")
_LABEL = re.compile(r"^[^\s:;%]+$")

# Bundled knowledge bases, shipped as package data
BUNDLED_KB_DIR = Path(__file__).parent / "kbs"


def _strip_comment(line: str) -> str:
    index = line.find(COMMENT)
    return line if index < 0 else line[:index]


def parse_record(
    text: str, path: Optional[Path] = None, line: Optional[int] = None
) -> Optional[tuple[list[OccurrenceSpec], int, Optional[str]]]:
    """Parse one record line into (occurrences, frequency, label).

    Returns None for blank and comment-only lines.

    Raises:
        FormatError: on a malformed record
    """
    tokens = _strip_comment(text).split()
    if not tokens:
        return None

    def fail(message: str, token: Optional[str] = None) -> FormatError:
        return FormatError(message, path=path, line=line, token=token)

    if tokens[-1] == TERMINATOR:
        tokens.pop()
    elif tokens[-1].endswith(TERMINATOR):
        tokens[-1] = tokens[-1][: -len(TERMINATOR)]
    else:
        raise fail("record must end with ';'", tokens[-1])
    if any(TERMINATOR in token for token in tokens):
        bad = next(token for token in tokens if TERMINATOR in token)
        raise fail("';' inside a record", bad)

    label: Optional[str] = None
    if tokens and tokens[0].endswith(LABEL_SUFFIX) and len(tokens[0]) > 1:
        label = tokens.pop(0)[: -len(LABEL_SUFFIX)]
    elif len(tokens) > 1 and tokens[1] == LABEL_SUFFIX:
        label = tokens.pop(0)
        tokens.pop(0)
    if label is not None and not _LABEL.match(label):
        raise fail("bad label", label)

    frequency = 1
    if len(tokens) >= 2 and _INTEGER.match(tokens[0]) and tokens[1] == FREQUENCY_MARKER:
        frequency = int(tokens[0])
        del tokens[:2]
    elif tokens and _FREQUENCY_TOKEN.match(tokens[0]):
        frequency = int(_FREQUENCY_TOKEN.match(tokens[0]).group(1))
        del tokens[:1]

    if not tokens:
        raise fail("record has no symbols")

    occurrences: list[OccurrenceSpec] = []
    for token in tokens:
        if _FREQUENCY_TOKEN.match(token):
            raise fail("frequency must come before the symbols", token)
        if LABEL_SUFFIX == token:
            raise fail("misplaced label separator", token)
        if token.startswith(ID_MARKER):
            name = token[len(ID_MARKER):]
            if not name:
                raise fail("'%' must prefix a symbol", token)
            occurrences.append((name, SymbolRole.IDENTIFICATION))
        else:
            occurrences.append((token, None))
    return occurrences, frequency, label


def parse_kb_text(text: str, path: Optional[Path] = None) -> KnowledgeStore:
    """Parse a whole pattern file into a sealed store.

    Every malformed line yields one diagnostic; if there are any, nothing
    is sealed and a single KBLoadError carries them all.
    """
    store = KnowledgeStore()
    diagnostics: list[PatternKBError] = []
    for number, raw in enumerate(text.splitlines(), start=1):
        try:
            record = parse_record(raw, path, number)
            if record is None:
                continue
            occurrences, frequency, label = record
            store.add_pattern(occurrences, frequency, label)
        except FormatError as e:
            if e.line is None:
                e = FormatError(e.message, path=path, line=number, token=e.token)
            diagnostics.append(e)
        except PatternKBError as e:
            diagnostics.append(FormatError(str(e), path=path, line=number))

    if not diagnostics and not len(store):
        diagnostics.append(FormatError("no patterns found", path=path))
    if diagnostics:
        for diagnostic in diagnostics:
            log.debug("Load diagnostic: %s", diagnostic)
        raise KBLoadError(diagnostics)
    store.seal_and_build_costs()
    return store


def load_kb(path: Union[str, Path]) -> KnowledgeStore:
    """Load and seal a pattern file.

    Raises:
        KBLoadError: if any record is malformed or the file has none
        OSError: if the file cannot be read
    """
    path = Path(path)
    text = path.read_text(encoding="utf-8")
    store = parse_kb_text(text, path)
    log.info("Loaded %s: %d patterns, %d symbols", path, len(store), len(store.table))
    return store


def resolve_kb_path(name: Union[str, Path], kb_dir: Optional[Path] = None) -> Path:
    """Find a pattern file: as given, then in ``kb_dir``, then bundled.

    A bare name without suffix also matches ``name.sp``.
    """
    given = Path(name).expanduser()
    candidates = [given]
    if not given.is_absolute():
        for base in (kb_dir, BUNDLED_KB_DIR):
            if base is not None:
                candidates.append(Path(base).expanduser() / given)
    for candidate in list(candidates):
        if candidate.suffix != KB_SUFFIX:
            candidates.append(candidate.with_name(candidate.name + KB_SUFFIX))
    for candidate in candidates:
        if candidate.is_file():
            return candidate
    return given


def serialize_pattern(pattern: Pattern) -> str:
    parts = []
    if pattern.label is not None:
        parts.append(pattern.label + LABEL_SUFFIX)
    parts.append(f"{pattern.frequency} {FREQUENCY_MARKER}")
    for p, symbol in enumerate(pattern.symbols):
        parts.append((ID_MARKER if pattern.is_id(p) else "") + symbol.name)
    parts.append(TERMINATOR)
    return " ".join(parts)


def serialize_store(store: KnowledgeStore) -> str:
    """Render a store in the pattern file format with explicit roles.

    Raises:
        FormatError: for a pattern without Identification symbols, which
            the fallback rule would read back differently
    """
    lines = []
    for pattern in store:
        if not pattern.id_positions:
            raise FormatError(f"pattern {pattern.name} has no Identification symbol to write")
        lines.append(serialize_pattern(pattern))
    return "\n".join(lines) + "\n"


def parse_new(text: Union[str, Sequence[str]], store: KnowledgeStore) -> Pattern:
    """Parse a New pattern; tokens unknown to ``store`` become novel symbols."""
    tokens = text.split() if isinstance(text, str) else list(text)
    if not tokens:
        raise ValidationError("New pattern must contain at least one symbol")
    return make_new_pattern(store, tokens)
