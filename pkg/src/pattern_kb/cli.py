"""Command-line interface for pattern-kb.

Entry point flow:
1. Parse arguments (usage errors exit 3)
2. Answer introspection flags and exit
3. Load configuration and the pattern file
4. Route to the command handler and print its report on stdout

Exit codes: 0 results, 1 no alignment, 2 input or format error, 3 usage.
"""

import argparse
import atexit
import json
import logging
import sys
import time
import uuid
from pathlib import Path
from typing import Optional

from . import __version__
from .config import (
    Config,
    config_defaults,
    config_schema,
    config_to_dict,
    load_config,
    resolve_config_path,
    validate_config_file,
)
from .emit import configure, emit, event_catalog
from .errors import KBLoadError, OracleLimitError, ParameterError, PatternKBError
from .oracle import MAX_TOTAL_ROWS, brute_force_best
from .patternfile import load_kb, parse_new, resolve_kb_path
from .report import (
    build_oracle_report,
    build_report,
    build_stats_report,
    build_validate_report,
    emit_report,
)
from .search import build_alignments
from .store import KnowledgeStore, Pattern

log = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_NO_ALIGNMENT = 1
EXIT_INPUT_ERROR = 2
EXIT_USAGE = 3

COMMANDS = ("align", "infer", "recognize", "validate", "oracle", "stats")
QUERY_COMMANDS = {"align", "infer", "recognize", "oracle"}


class _Parser(argparse.ArgumentParser):
    """ArgumentParser whose usage errors exit with EXIT_USAGE."""

    def error(self, message: str):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _operation_type(command: str) -> str:
    return f"pattern-kb.{command}"


def _start_operation(command: str, kb: Optional[str], query: Optional[str]) -> str:
    operation_id = str(uuid.uuid4())
    emit("operation.started", {
        "operation_type": _operation_type(command),
        "operation_id": operation_id,
        "command": command,
        "kb": kb,
        "query": query,
    })
    return operation_id


def _complete_operation(
    operation_id: str,
    command: str,
    started: float,
    alignments: Optional[int] = None,
    best_cd: Optional[str] = None,
    error_message: Optional[str] = None,
) -> None:
    payload = {
        "operation_type": _operation_type(command),
        "operation_id": operation_id,
        "success": error_message is None,
        "duration_ms": round((time.perf_counter() - started) * 1000, 3),
    }
    if error_message is None:
        payload["alignments"] = alignments
        payload["best_cd"] = best_cd
    else:
        payload["error"] = error_message
    emit("operation.completed", payload)


def _add_common_arguments(parser: argparse.ArgumentParser, query: bool) -> None:
    parser.add_argument("--kb", required=True, metavar="PATH", help="Pattern file (.sp)")
    if query:
        group = parser.add_mutually_exclusive_group(required=True)
        group.add_argument("--new", metavar="TEXT", help="New pattern as whitespace-separated symbols")
        group.add_argument("--new-file", metavar="PATH", help="Read the New pattern from a file")
        parser.add_argument("--beam", type=int, metavar="N", help="Beam width (default: 200)")
        parser.add_argument("--max-rows", type=int, metavar="N", help="Rows per alignment, New included")
        parser.add_argument("--reuse", type=int, metavar="N", help="Rows per Old pattern (default: 3)")
        parser.add_argument("--top", type=int, metavar="K", help="Alignments reported (default: 10)")
        parser.add_argument("--iterations", type=int, metavar="N", help="Search iterations (default: 12)")
        parser.add_argument("--workers", type=int, metavar="N", help="Threads for beam extension")
    parser.add_argument("--json", action="store_true", help="Emit the report as JSON")


def create_argument_parser() -> argparse.ArgumentParser:
    """Create comprehensive argument parser for CLI usage."""
    parser = _Parser(
        prog="pattern-kb",
        description="Pattern-based knowledge engine: alignment, recognition and inference",
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog="""
Examples:
  %(prog)s align --kb figure1 --new "Jack stethoscope black-bag fair-hair blue-eyes Dorking"
  %(prog)s infer --kb tweety --new "Tweety bird"
  %(prog)s recognize --kb figure1 --new-file query.txt --json
  %(prog)s oracle --kb toy --new "a b"
  %(prog)s validate --kb my-knowledge.sp
  %(prog)s stats --kb car
""",
    )

    parser.add_argument(
        "--version",
        action="version",
        version=f"pattern-kb {__version__}",
    )
    parser.add_argument(
        "--config",
        metavar="PATH",
        help="Path to config file (default: platform config dir)",
    )
    parser.add_argument("--debug", action="store_true", help="Enable debug logging")
    parser.add_argument("--quiet", action="store_true", help="Do not write events to stderr")

    # Introspection
    parser.add_argument(
        "--print-defaults",
        action="store_true",
        help="Print default configuration as JSON and exit",
    )
    parser.add_argument(
        "--print-config-schema",
        action="store_true",
        help="Print the configuration JSON schema and exit",
    )
    parser.add_argument(
        "--validate-config",
        action="store_true",
        help="Validate the config file and exit",
    )
    parser.add_argument(
        "--print-resolved",
        action="store_true",
        help="Print the resolved configuration as JSON and exit",
    )
    parser.add_argument(
        "--print-event-catalog",
        action="store_true",
        help="Print the structured event catalog and exit",
    )

    commands = parser.add_subparsers(dest="command", metavar="COMMAND")
    helps = {
        "align": "Rank alignments of New against the knowledge base",
        "infer": "Align, then report coverage groups and inference probabilities",
        "recognize": "Report which stored patterns New was recognized as",
        "validate": "Check a pattern file and print its statistics",
        "oracle": "Exhaustive best alignment for small instances",
        "stats": "Print the symbol cost table",
    }
    for name in COMMANDS:
        sub = commands.add_parser(name, help=helps[name], description=helps[name])
        _add_common_arguments(sub, query=name in QUERY_COMMANDS)
    return parser


def _emit_json(payload: dict) -> None:
    print(json.dumps(payload, indent=2, sort_keys=True))


def _handle_introspection(args: argparse.Namespace) -> Optional[int]:
    config_path = Path(args.config).expanduser() if args.config else None

    if args.print_defaults:
        _emit_json(config_defaults())
        return EXIT_OK

    if args.print_config_schema:
        _emit_json(config_schema())
        return EXIT_OK

    if args.validate_config:
        try:
            errors = validate_config_file(config_path)
        except ValueError as e:
            errors = [str(e)]
        if errors:
            for error in errors:
                print(error, file=sys.stderr)
            return EXIT_INPUT_ERROR
        return EXIT_OK

    if args.print_resolved:
        try:
            config = load_config(config_path=config_path)
        except ValueError as e:
            print(f"error: {e}", file=sys.stderr)
            return EXIT_INPUT_ERROR
        _emit_json(config_to_dict(config))
        return EXIT_OK

    if args.print_event_catalog:
        _emit_json(event_catalog())
        return EXIT_OK

    return None


def _config_overrides(args: argparse.Namespace) -> dict:
    return {
        "beam_width": getattr(args, "beam", None),
        "max_rows": getattr(args, "max_rows", None),
        "max_pattern_reuse": getattr(args, "reuse", None),
        "top_k_reported": getattr(args, "top", None),
        "max_iterations": getattr(args, "iterations", None),
        "workers": getattr(args, "workers", None),
    }


def _input_error(command: str, error: Exception) -> int:
    emit("error.handled", {
        "error_type": type(error).__name__,
        "message": str(error),
        "command": command,
    })
    if isinstance(error, KBLoadError):
        for diagnostic in error.diagnostics:
            print(f"error: {diagnostic}", file=sys.stderr)
    else:
        print(f"error: {error}", file=sys.stderr)
    return EXIT_INPUT_ERROR


def _load_store(args: argparse.Namespace, config: Config) -> KnowledgeStore:
    path = resolve_kb_path(args.kb, config.kb_dir)
    store = load_kb(path)
    emit("kb.loaded", {
        "path": str(path),
        "patterns": len(store),
        "symbols": len(store.table),
        "total_frequency_mass": store.total_frequency_mass,
    })
    return store


def _read_new_text(args: argparse.Namespace) -> str:
    if args.new_file:
        return Path(args.new_file).expanduser().read_text(encoding="utf-8")
    return args.new


def _report_format(args: argparse.Namespace, config: Config) -> str:
    return "json" if args.json else config.default_format


def handle_query(args: argparse.Namespace, config: Config, store: KnowledgeStore, new: Pattern) -> int:
    """align, infer and recognize."""
    params = config.search_params()
    started = time.perf_counter()
    operation_id = _start_operation(args.command, args.kb, new.text())
    ranked = build_alignments(store, store.costs, new, params)
    document = build_report(
        args.command,
        new,
        ranked,
        params,
        probabilities=args.command == "infer",
        recognition=args.command == "recognize",
    )
    sys.stdout.write(emit_report(document, _report_format(args, config)))
    _complete_operation(
        operation_id,
        args.command,
        started,
        alignments=len(ranked),
        best_cd=document["alignments"][0]["cd"] if ranked else None,
    )
    return EXIT_OK if ranked else EXIT_NO_ALIGNMENT


def handle_oracle(args: argparse.Namespace, config: Config, store: KnowledgeStore, new: Pattern) -> int:
    max_rows = args.max_rows or MAX_TOTAL_ROWS
    max_reuse = args.reuse or config.max_pattern_reuse
    started = time.perf_counter()
    operation_id = _start_operation("oracle", args.kb, new.text())
    try:
        result = brute_force_best(store, store.costs, new, max_rows=max_rows, max_pattern_reuse=max_reuse)
    except OracleLimitError as e:
        _complete_operation(operation_id, "oracle", started, error_message=str(e))
        return _input_error("oracle", e)
    document = build_oracle_report(new, result, max_rows)
    sys.stdout.write(emit_report(document, _report_format(args, config)))
    _complete_operation(
        operation_id,
        "oracle",
        started,
        alignments=len(result.alignments),
        best_cd=document["best"]["cd"] if document["best"] else None,
    )
    return EXIT_OK if document["found"] else EXIT_NO_ALIGNMENT


def handle_store_report(args: argparse.Namespace, config: Config, store: KnowledgeStore, path: str) -> int:
    """validate and stats."""
    if args.command == "stats":
        document = build_stats_report(store)
    else:
        document = build_validate_report(store, path)
    sys.stdout.write(emit_report(document, _report_format(args, config)))
    return EXIT_OK


_shutdown_registered = False


def _register_shutdown() -> None:
    global _shutdown_registered
    if not _shutdown_registered:
        atexit.register(lambda: emit("shutdown", {}))
        _shutdown_registered = True


def main(args: Optional[list[str]] = None) -> int:
    """Main entry point.

    Args:
        args: Command-line arguments (defaults to sys.argv[1:])

    Returns:
        Exit code
    """
    parser = create_argument_parser()
    try:
        parsed_args = parser.parse_args(args)
    except SystemExit as e:
        return e.code if isinstance(e.code, int) else EXIT_USAGE

    result = _handle_introspection(parsed_args)
    if result is not None:
        return result

    if parsed_args.command is None:
        parser.print_usage(sys.stderr)
        print("pattern-kb: error: a command is required", file=sys.stderr)
        return EXIT_USAGE

    logging.basicConfig(
        level=logging.DEBUG if parsed_args.debug else logging.WARNING,
        format="%(levelname)s: %(message)s",
    )

    configure("pattern-kb", stderr=not parsed_args.quiet)
    _register_shutdown()

    config_path = Path(parsed_args.config).expanduser() if parsed_args.config else None
    try:
        config = load_config(config_path=config_path, overrides=_config_overrides(parsed_args))
        config.search_params()
    except ParameterError as e:
        print(f"pattern-kb: error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except (TypeError, ValueError) as e:
        return _input_error(parsed_args.command, e)
    emit("config.resolved", {
        "config_path": str(resolve_config_path(config_path)),
        "source": "cli" if config_path else "default",
    })

    command = parsed_args.command
    try:
        store = _load_store(parsed_args, config)
    except (PatternKBError, OSError) as e:
        return _input_error(command, e)

    if command not in QUERY_COMMANDS:
        return handle_store_report(parsed_args, config, store, parsed_args.kb)

    try:
        text = _read_new_text(parsed_args)
    except OSError as e:
        return _input_error(command, e)
    if not text.split():
        print("pattern-kb: error: the New pattern is empty", file=sys.stderr)
        return EXIT_USAGE
    try:
        new = parse_new(text, store)
    except PatternKBError as e:
        return _input_error(command, e)

    if command == "oracle":
        return handle_oracle(parsed_args, config, store, new)
    return handle_query(parsed_args, config, store, new)


if __name__ == "__main__":
    sys.exit(main())
