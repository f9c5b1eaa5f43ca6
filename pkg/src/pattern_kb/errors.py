"""Exception hierarchy for pattern-kb."""

from pathlib import Path
from typing import Optional, Sequence


class PatternKBError(Exception):
    """Base class for all pattern-kb errors."""


class FormatError(PatternKBError):
    """Raised for malformed tokens or pattern file records."""

    def __init__(
        self,
        message: str,
        path: Optional[Path] = None,
        line: Optional[int] = None,
        token: Optional[str] = None,
    ):
        self.message = message
        self.path = path
        self.line = line
        self.token = token
        super().__init__(str(self))

    def __str__(self) -> str:
        where = ""
        if self.path is not None:
            where = f"{self.path}:"
        if self.line is not None:
            where += f"{self.line}:"
        text = f"{where} {self.message}" if where else self.message
        if self.token is not None:
            text += f" (token {self.token!r})"
        return text


class ValidationError(PatternKBError):
    """Raised when a pattern violates a structural precondition."""

    def __init__(self, message: str, index: Optional[int] = None):
        self.message = message
        self.index = index
        if index is not None:
            message = f"{message} at occurrence {index}"
        super().__init__(message)


class StoreError(PatternKBError):
    """Raised for misuse of a knowledge store (sealed, empty, duplicates)."""


class KBLoadError(PatternKBError):
    """Raised when a pattern file has one or more malformed records."""

    def __init__(self, diagnostics: Sequence[PatternKBError]):
        self.diagnostics = list(diagnostics)
        super().__init__("\n".join(str(d) for d in self.diagnostics))


class ParameterError(PatternKBError):
    """Raised for invalid search parameters."""


class AlignmentError(PatternKBError):
    """Raised when an alignment would violate its invariants."""


class OracleLimitError(PatternKBError):
    """Raised when an instance is too large for exhaustive enumeration."""


class InferenceError(PatternKBError):
    """Raised when probabilities are asked of an empty coverage group."""
