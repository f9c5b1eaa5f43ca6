"""Configuration management for pattern-kb.

Configuration priority (highest to lowest):
1. CLI overrides (passed to load_config)
2. Environment variables (PATTERN_KB_*)
3. Config file (platformdirs config dir / config.yaml)
4. Built-in defaults
"""

import os
from dataclasses import dataclass, field, fields
from pathlib import Path
from typing import Any, Optional

import yaml
from platformdirs import user_config_dir, user_data_dir

from .search import SearchParams

ENV_PREFIX = "PATTERN_KB"
CONFIG_DIR = Path(user_config_dir("pattern-kb"))
DEFAULT_CONFIG_PATH = CONFIG_DIR / "config.yaml"
DEFAULT_KB_DIR = Path(user_data_dir("pattern-kb")) / "kbs"

REPORT_FORMATS = {"text", "json"}
INT_KEYS = (
    "beam_width",
    "max_rows",
    "max_pattern_reuse",
    "top_k_reported",
    "max_iterations",
    "workers",
)
PATH_KEYS = {"kb_dir"}


@dataclass
class Config:
    """pattern-kb configuration."""

    # Search
    beam_width: int = 200
    max_rows: int = 20
    max_pattern_reuse: int = 3
    top_k_reported: int = 10
    max_iterations: int = 12
    workers: int = 1

    # Output
    default_format: str = "text"

    # Relative --kb paths are also looked up here
    kb_dir: Path = field(default_factory=lambda: DEFAULT_KB_DIR)

    def __post_init__(self):
        if isinstance(self.kb_dir, str):
            self.kb_dir = Path(self.kb_dir)
        if self.default_format not in REPORT_FORMATS:
            raise ValueError(
                f"default_format must be one of: {', '.join(sorted(REPORT_FORMATS))}, got {self.default_format!r}"
            )

    def search_params(self) -> SearchParams:
        return SearchParams(
            beam_width=self.beam_width,
            max_rows=self.max_rows,
            max_pattern_reuse=self.max_pattern_reuse,
            top_k_reported=self.top_k_reported,
            max_iterations=self.max_iterations,
            workers=self.workers,
        )


def _env(name: str) -> Optional[str]:
    return os.environ.get(f"{ENV_PREFIX}_{name}")


def _config_path_from_env() -> Optional[Path]:
    value = _env("CONFIG")
    if value:
        return Path(value).expanduser()
    return None


def _load_config_file(path: Path, strict: bool = False) -> dict:
    if not path.exists():
        return {}
    try:
        data = yaml.safe_load(path.read_text()) or {}
    except Exception as exc:
        if strict:
            raise ValueError(f"Failed to parse config file {path}: {exc}")
        return {}

    if not isinstance(data, dict):
        if strict:
            raise ValueError(f"Config file {path} must be a mapping")
        return {}

    return data


def config_defaults() -> dict:
    return {
        "beam_width": 200,
        "max_rows": 20,
        "max_pattern_reuse": 3,
        "top_k_reported": 10,
        "max_iterations": 12,
        "workers": 1,
        "default_format": "text",
        "kb_dir": str(DEFAULT_KB_DIR),
    }


def _load_env_overrides() -> dict:
    config: dict[str, Any] = {}
    for key in INT_KEYS:
        value = _env(key.upper())
        if value is None:
            continue
        try:
            config[key] = int(value)
        except ValueError:
            continue

    value = _env("DEFAULT_FORMAT")
    if value is not None:
        config["default_format"] = value
    value = _env("KB_DIR")
    if value is not None:
        config["kb_dir"] = str(Path(value).expanduser())
    return config


def resolve_config_path(config_path: Optional[Path] = None) -> Path:
    return config_path or _config_path_from_env() or DEFAULT_CONFIG_PATH


def load_config(
    config_path: Optional[Path] = None,
    overrides: Optional[dict] = None,
    strict: bool = False,
) -> Config:
    """Load configuration from all sources.

    Raises:
        ValueError: with ``strict``, if the file or merged values are invalid
    """
    resolved_path = resolve_config_path(config_path)

    config_dict = config_defaults()
    config_dict.update(_load_config_file(resolved_path, strict=strict))
    config_dict.update(_load_env_overrides())

    if overrides:
        for key, value in overrides.items():
            if value is not None:
                config_dict[key] = value

    for key in PATH_KEYS:
        if config_dict.get(key) is not None:
            config_dict[key] = str(Path(config_dict[key]).expanduser())

    valid_keys = {f.name for f in fields(Config)}
    config_dict = {k: v for k, v in config_dict.items() if k in valid_keys}

    if strict:
        errors = validate_config_dict(config_dict)
        if errors:
            raise ValueError("; ".join(errors))

    return Config(**config_dict)


def config_schema() -> dict:
    positive = {"type": "integer", "minimum": 1}
    return {
        "$schema": "https://json-schema.org/draft/2020-12/schema",
        "type": "object",
        "properties": {
            "beam_width": positive,
            "max_rows": {"type": "integer", "minimum": 2},
            "max_pattern_reuse": positive,
            "top_k_reported": positive,
            "max_iterations": positive,
            "workers": positive,
            "default_format": {"type": "string", "enum": sorted(REPORT_FORMATS)},
            "kb_dir": {"type": "string"},
        },
        "additionalProperties": False,
    }


def _is_int(value: Any) -> bool:
    return isinstance(value, int) and not isinstance(value, bool)


def validate_config_dict(data: Any) -> list[str]:
    errors: list[str] = []
    if not isinstance(data, dict):
        return ["Config must be a mapping/object"]

    props = config_schema()["properties"]
    for key in data.keys():
        if key not in props:
            errors.append(f"Unknown config key: {key}")

    for key, value in data.items():
        spec = props.get(key)
        if spec is None:
            continue
        if spec["type"] == "integer":
            if not _is_int(value):
                errors.append(f"{key} must be an integer")
            elif value < spec["minimum"]:
                errors.append(f"{key} must be >= {spec['minimum']}")
        elif spec["type"] == "string":
            if not isinstance(value, str):
                errors.append(f"{key} must be a string")
            elif "enum" in spec and value not in spec["enum"]:
                errors.append(f"{key} must be one of: {', '.join(spec['enum'])}")

    return errors


def validate_config_file(config_path: Optional[Path] = None) -> list[str]:
    path = resolve_config_path(config_path)
    if not path.exists():
        return []
    data = _load_config_file(path, strict=True)
    return validate_config_dict(data)


def config_to_dict(config: Config) -> dict:
    data = {f.name: getattr(config, f.name) for f in fields(Config)}
    data["kb_dir"] = str(config.kb_dir)
    return data
