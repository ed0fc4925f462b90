# src/config.py

"""
Configuration for a run: scan, pairing, classification and report settings.
Defaults live here; a JSON config file overrides them and command-line
flags override the file.
"""

import json
import logging
import os
from dataclasses import dataclass, field, fields, replace
from typing import Any, Dict, List, Optional, Tuple

from .errors import ConfigError, OutputError

logger = logging.getLogger(__name__)

CONFIG_ENV_VAR = "IDSIM_CONFIG"

# --- Defaults ---
DEFAULT_UBIQUITOUS_TYPES = (
    "boolean", "byte", "char", "short", "int", "long", "float", "double",
    "Boolean", "Byte", "Character", "Short", "Integer", "Long", "Float", "Double",
    "String", "Object",
)
REPORT_FORMATS = ("json", "csv", "markdown")
GROUP_BY_CHOICES = ("category", "parent")


def _check_ratio(name: str, value: float):
    if not 0 < value <= 1:
        raise ConfigError(f"{name} must be in (0, 1], got {value}")


def _check_cap(name: str, value: int):
    if value < 1:
        raise ConfigError(f"{name} must be at least 1, got {value}")


@dataclass(frozen=True)
class ScanConfig:
    exclude: Tuple[str, ...] = ()
    include_tests: bool = False
    failure_threshold: float = 0.10
    workers: int = 1

    def validate(self):
        _check_ratio("scan.failure_threshold", self.failure_threshold)
        _check_cap("scan.workers", self.workers)


@dataclass(frozen=True)
class PairConfig:
    max_method_identifiers: int = 200
    max_block_size: int = 1500
    ubiquitous_types: Tuple[str, ...] = DEFAULT_UBIQUITOUS_TYPES
    workers: int = 1

    def validate(self):
        _check_cap("pairing.max_method_identifiers", self.max_method_identifiers)
        _check_cap("pairing.max_block_size", self.max_block_size)
        _check_cap("pairing.workers", self.workers)


@dataclass(frozen=True)
class ClassifyConfig:
    colliding_threshold: float = 0.85
    polymorphic_threshold: float = 0.85
    inconsistent_threshold: float = 0.5
    abbreviation_prefix_ratio: float = 0.75
    abbreviation_subsequence_ratio: float = 0.6
    loop_index_names: Tuple[str, ...] = ("i", "j", "k")
    all_labels: bool = False

    def validate(self):
        for name in ("colliding_threshold", "polymorphic_threshold", "inconsistent_threshold",
                     "abbreviation_prefix_ratio", "abbreviation_subsequence_ratio"):
            _check_ratio(f"classify.{name}", getattr(self, name))


@dataclass(frozen=True)
class ReportConfig:
    format: str = "json"
    sample: bool = False
    seed: int = 0
    confidence: float = 0.95
    margin: float = 0.05
    places: int = 2
    group_by: str = "category"

    def validate(self):
        if self.format not in REPORT_FORMATS:
            raise ConfigError(f"report.format must be one of {', '.join(REPORT_FORMATS)}, got '{self.format}'")
        if self.group_by not in GROUP_BY_CHOICES:
            raise ConfigError(f"report.group_by must be one of {', '.join(GROUP_BY_CHOICES)}")
        if not 0 < self.margin < 1:
            raise ConfigError(f"report.margin must be in (0, 1), got {self.margin}")
        if self.places < 0:
            raise ConfigError("report.places must not be negative")


@dataclass(frozen=True)
class ToolConfig:
    """Every setting for one run, grouped by the module that consumes it."""
    scan: ScanConfig = field(default_factory=ScanConfig)
    pairing: PairConfig = field(default_factory=PairConfig)
    classify: ClassifyConfig = field(default_factory=ClassifyConfig)
    report: ReportConfig = field(default_factory=ReportConfig)
    dictionary_path: Optional[str] = None
    registry_path: Optional[str] = None

    def validate(self) -> "ToolConfig":
        self.scan.validate()
        self.pairing.validate()
        self.classify.validate()
        self.report.validate()
        return self

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "ToolConfig":
        """Builds a config from the parsed JSON config file, rejecting unknown keys."""
        if not isinstance(data, dict):
            raise ConfigError("Config file must contain a JSON object")
        sections = {"scan": ScanConfig, "pairing": PairConfig,
                    "classify": ClassifyConfig, "report": ReportConfig}
        kwargs: Dict[str, Any] = {}
        for key, value in data.items():
            if key in sections:
                kwargs[key] = _section_from_dict(key, sections[key], value)
            elif key in ("dictionary_path", "registry_path"):
                if value is not None and not isinstance(value, str):
                    raise ConfigError(f"{key} must be a string path")
                kwargs[key] = value
            else:
                raise ConfigError(f"Unknown config key '{key}'")
        return cls(**kwargs).validate()

    def with_overrides(self, section: str, **values: Any) -> "ToolConfig":
        """Returns a copy with the given section fields replaced. None values are ignored."""
        values = {k: v for k, v in values.items() if v is not None}
        if not values:
            return self
        if section == "tool":
            return replace(self, **values)
        return replace(self, **{section: replace(getattr(self, section), **values)})


def _section_from_dict(section: str, section_cls, data: Any):
    if not isinstance(data, dict):
        raise ConfigError(f"Config section '{section}' must be a JSON object")
    known = {f.name: f for f in fields(section_cls)}
    kwargs = {}
    for key, value in data.items():
        if key not in known:
            raise ConfigError(f"Unknown config key '{section}.{key}'")
        default = known[key].default
        if isinstance(default, tuple):
            if not isinstance(value, list) or not all(isinstance(item, str) for item in value):
                raise ConfigError(f"{section}.{key} must be a list of strings")
            value = tuple(value)
        elif isinstance(default, bool):
            if not isinstance(value, bool):
                raise ConfigError(f"{section}.{key} must be true or false")
        elif isinstance(default, (int, float)):
            if isinstance(value, bool) or not isinstance(value, (int, float)):
                raise ConfigError(f"{section}.{key} must be a number")
            if isinstance(default, int) and not isinstance(value, int):
                raise ConfigError(f"{section}.{key} must be an integer")
        elif isinstance(default, str) and not isinstance(value, str):
            raise ConfigError(f"{section}.{key} must be a string")
        kwargs[key] = value
    return section_cls(**kwargs)


def load_config(path: Optional[str] = None) -> ToolConfig:
    """
    Loads the run configuration.

    Args:
        path: Explicit config file path. When None, the IDSIM_CONFIG
              environment variable is consulted; when that is unset too,
              the built-in defaults are returned.
    """
    path = path or os.environ.get(CONFIG_ENV_VAR)
    if not path:
        return ToolConfig()
    logger.debug("Loading config from %s", path)
    try:
        with open(path, "r", encoding="utf-8") as handle:
            data = json.load(handle)
    except json.JSONDecodeError as e:
        raise ConfigError(f"Config file '{path}' is not valid JSON: {e}") from e
    except FileNotFoundError as e:
        raise ConfigError(f"Config file '{path}' not found") from e
    except OSError as e:
        raise OutputError(path, e) from e
    return ToolConfig.from_dict(data)


def exclusion_list(values: Optional[List[str]]) -> Optional[Tuple[str, ...]]:
    """Normalizes repeated --exclude flags into the tuple stored on ScanConfig."""
    if not values:
        return None
    return tuple(values)
