# src/identifier.py

"""
Identifier records and inventories, plus their JSON Lines representation.
"""

import hashlib
import json
import logging
import sys
from dataclasses import dataclass
from enum import Enum
from typing import Any, Dict, Iterable, List, Optional, Tuple

from .errors import MalformedInventoryError, OutputError

logger = logging.getLogger(__name__)


class IdentifierKind(str, Enum):
    CLASS = "class"
    ENUM = "enum"
    ENUM_CONSTANT = "enum_constant"
    METHOD = "method"
    PARAMETER = "parameter"
    FIELD = "field"
    LOCAL_VARIABLE = "local_variable"


VARIABLE_KINDS = frozenset({IdentifierKind.FIELD, IdentifierKind.PARAMETER, IdentifierKind.LOCAL_VARIABLE})
TYPE_KINDS = frozenset({IdentifierKind.CLASS, IdentifierKind.ENUM})

# Serialized field order; optional fields are omitted when absent.
RECORD_FIELDS = (
    "record_id", "project", "file_path", "name", "kind", "declared_type",
    "enclosing_class", "enclosing_method", "line", "column",
    "initializer_literal", "source_expression", "supertypes",
)


def make_record_id(project: str, file_path: str, line: int, column: int, name: str) -> str:
    """Content hash of the record's identity. Stable across runs and machines."""
    key = "\x00".join((project, file_path, str(line), str(column), name))
    return hashlib.sha1(key.encode("utf-8")).hexdigest()[:16]


@dataclass(frozen=True)
class IdentifierRecord:
    """One declared identifier and where it was declared."""
    record_id: str
    project: str
    file_path: str
    name: str
    kind: IdentifierKind
    line: int
    column: int
    declared_type: Optional[str] = None
    enclosing_class: Optional[str] = None
    enclosing_method: Optional[str] = None
    initializer_literal: Optional[str] = None
    source_expression: Optional[str] = None
    supertypes: Tuple[str, ...] = ()

    def __post_init__(self):
        if not self.name or any(ch.isspace() for ch in self.name):
            raise ValueError(f"Identifier name must be non-empty without whitespace: {self.name!r}")
        if self.line < 1 or self.column < 1:
            raise ValueError(f"Line and column must be >= 1 for '{self.name}'")
        if self.kind in (IdentifierKind.PARAMETER, IdentifierKind.LOCAL_VARIABLE) and not self.enclosing_method:
            raise ValueError(f"{self.kind.value} '{self.name}' needs an enclosing method")

    @classmethod
    def create(cls, project: str, file_path: str, name: str, kind: IdentifierKind,
               line: int, column: int, **metadata: Any) -> "IdentifierRecord":
        """Builds a record, deriving its id from the identifying fields."""
        record_id = make_record_id(project, file_path, line, column, name)
        return cls(record_id=record_id, project=project, file_path=file_path, name=name,
                   kind=kind, line=line, column=column, **metadata)

    @property
    def sort_key(self) -> Tuple[str, int, int, str]:
        return (self.file_path, self.line, self.column, self.name)

    def to_dict(self) -> Dict[str, Any]:
        data: Dict[str, Any] = {}
        for name in RECORD_FIELDS:
            value = getattr(self, name)
            if value is None or value == ():
                continue
            if name == "kind":
                value = value.value
            elif name == "supertypes":
                value = list(value)
            data[name] = value
        return data

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "IdentifierRecord":
        unknown = set(data) - set(RECORD_FIELDS)
        if unknown:
            raise ValueError(f"unknown fields {sorted(unknown)}")
        values = dict(data)
        values["kind"] = IdentifierKind(values["kind"])
        values["supertypes"] = tuple(values.get("supertypes", ()))
        for int_field in ("line", "column"):
            if not isinstance(values.get(int_field), int) or isinstance(values.get(int_field), bool):
                raise ValueError(f"'{int_field}' must be an integer")
        return cls(**values)


class IdentifierInventory:
    """
    All identifiers captured for one project, in canonical order
    (file_path, line, column, name) with duplicate ids removed.
    """

    def __init__(self,
                 project: str,
                 records: Iterable[IdentifierRecord] = (),
                 files_scanned: int = 0,
                 files_failed: int = 0):
        unique: Dict[str, IdentifierRecord] = {}
        for record in records:
            unique.setdefault(record.record_id, record)
        self.project: str = project
        self.records: Tuple[IdentifierRecord, ...] = tuple(sorted(unique.values(), key=lambda r: r.sort_key))
        self.files_scanned: int = files_scanned
        self.files_failed: int = files_failed
        self._index: Dict[str, int] = {r.record_id: i for i, r in enumerate(self.records)}

    def __len__(self) -> int:
        return len(self.records)

    def __iter__(self):
        return iter(self.records)

    def __contains__(self, record_id: str) -> bool:
        return record_id in self._index

    def get(self, record_id: str) -> Optional[IdentifierRecord]:
        index = self._index.get(record_id)
        return self.records[index] if index is not None else None

    def position(self, record_id: str) -> int:
        """Canonical position of a record; raises KeyError for unknown ids."""
        return self._index[record_id]

    def __str__(self) -> str:
        return (f"{self.project}: {len(self.records)} identifiers "
                f"({self.files_scanned} files scanned, {self.files_failed} failed)")


# --- JSON Lines ---

def write_text(out_path: str, text: str):
    """Writes text to a file, or to standard output when out_path is '-'."""
    if out_path == "-":
        sys.stdout.write(text)
        sys.stdout.flush()
        return
    try:
        with open(out_path, "w", encoding="utf-8", newline="") as handle:
            handle.write(text)
    except OSError as e:
        raise OutputError(out_path, e) from e


def inventory_lines(inventory: IdentifierInventory) -> List[str]:
    return [json.dumps(record.to_dict(), ensure_ascii=False) for record in inventory.records]


def write_inventory(inventory: IdentifierInventory, out_path: str):
    """Writes one record per line, UTF-8, in canonical order. '-' means standard output."""
    lines = inventory_lines(inventory)
    write_text(out_path, "".join(line + "\n" for line in lines))
    logger.debug("Wrote %d records to %s", len(lines), out_path)


def read_inventory(path: str, project: Optional[str] = None) -> IdentifierInventory:
    """
    Reads an inventory written by write_inventory.

    Args:
        path: JSON Lines file.
        project: Label for an empty inventory; otherwise taken from the records.

    Raises:
        MalformedInventoryError naming the first bad line.
    """
    records: List[IdentifierRecord] = []
    first_seen: Dict[str, int] = {}
    try:
        with open(path, "rb") as handle:
            for line_number, raw in enumerate(handle, start=1):
                try:
                    line = raw.decode("utf-8")
                    if not line.strip():
                        continue
                    data = json.loads(line)
                    if not isinstance(data, dict):
                        raise ValueError("expected a JSON object")
                    record = IdentifierRecord.from_dict(data)
                except (ValueError, KeyError, TypeError) as e:
                    raise MalformedInventoryError(path, line_number, str(e)) from e
                if record.record_id in first_seen:
                    raise MalformedInventoryError(path, line_number,
                                                  f"duplicate record_id {record.record_id} "
                                                  f"(first on line {first_seen[record.record_id]})")
                first_seen[record.record_id] = line_number
                records.append(record)
    except OSError as e:
        raise OutputError(path, e) from e

    if records:
        project = records[0].project
    return IdentifierInventory(project or "unknown", records)
