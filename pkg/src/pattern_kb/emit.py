"""
Structured events for pattern-kb runs.

Events go out as JSON lines on stderr, keeping stdout for the report
document. Tests and embedding code subscribe with add_handler().

Event shape:
    {"event_type": "kb.loaded", "timestamp": "...", "source": {"tool": "pattern-kb"}, "data": {...}}
"""

import json
import logging
import sys
from datetime import datetime, timezone
from typing import Any, Callable, Mapping, Optional

log = logging.getLogger(__name__)

EventHandler = Callable[[dict], None]

# event_type -> (description, data fields)
EVENT_CATALOG: dict[str, tuple[str, tuple[str, ...]]] = {
    "config.resolved": (
        "Configuration sources resolved at startup",
        ("config_path", "source"),
    ),
    "kb.loaded": (
        "A pattern file was parsed and sealed",
        ("path", "patterns", "symbols", "total_frequency_mass"),
    ),
    "operation.started": (
        "A command started",
        ("operation_id", "operation_type", "command", "kb", "query"),
    ),
    "operation.completed": (
        "A command finished",
        ("operation_id", "operation_type", "success", "duration_ms", "alignments", "best_cd", "error"),
    ),
    "error.handled": (
        "An input or format error was reported to the user",
        ("error_type", "message", "command"),
    ),
    "shutdown": ("Process exit", ()),
}

_subscribers: list[EventHandler] = []
_tool = "pattern-kb"
_to_stderr = True


def configure(source: str, stderr: bool = True) -> None:
    """Name the emitting tool and switch the stderr stream on or off."""
    global _tool, _to_stderr
    _tool = source
    _to_stderr = stderr


def add_handler(handler: EventHandler) -> None:
    _subscribers.append(handler)


def remove_handler(handler: EventHandler) -> None:
    if handler in _subscribers:
        _subscribers.remove(handler)


def event_catalog() -> dict:
    return {
        "events": [
            {"event_type": name, "description": description, "fields": list(data_fields)}
            for name, (description, data_fields) in EVENT_CATALOG.items()
        ]
    }


def _undeclared_fields(event_type: str, data: Mapping[str, Any]) -> list[str]:
    entry = EVENT_CATALOG.get(event_type)
    if entry is None:
        return list(data)
    return sorted(set(data) - set(entry[1]))


def _write_stderr(event: dict) -> None:
    try:
        sys.stderr.write(json.dumps(event, default=str) + "\n")
        sys.stderr.flush()
    except (OSError, ValueError):
        pass


def emit(event_type: str, data: Mapping[str, Any], source: Optional[str] = None) -> None:
    """Publish one event to stderr and to every subscriber.

    A failing subscriber is logged at debug level and skipped.
    """
    extra = _undeclared_fields(event_type, data)
    if extra:
        log.debug("Event %s carries fields outside the catalog: %s", event_type, extra)

    event = {
        "event_type": event_type,
        "timestamp": datetime.now(timezone.utc).isoformat(),
        "source": {"tool": source or _tool},
        "data": dict(data),
    }
    if _to_stderr:
        _write_stderr(event)
    for handler in tuple(_subscribers):
        try:
            handler(event)
        except Exception as exc:
            log.debug("Event handler %r failed: %s", handler, exc)
