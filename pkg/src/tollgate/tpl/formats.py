"""Format descriptors: data-driven navigation into credential documents.

Descriptors live in ``formats.json`` (bundled next to this module) so a new
format is a data change only::

    {
      "formats": {
        "<name>": {
          "required": ["dotted.path", ...],
          "id_field": "dotted.path" | null,
          "fields": {"<field atom>": "dotted.path", ...}
        }
      }
    }
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Dict, Mapping, Optional, Tuple

from tollgate.errors import UnknownFormat
from tollgate.paths import FORMATS_JSON

Path_ = Tuple[str, ...]

#: Sentinel for "path does not resolve".
MISSING = object()


def split_path(expr: str) -> Path_:
    return tuple(p for p in expr.split(".") if p)


def navigate(document: Any, path: Path_) -> Any:
    """Follow *path* through nested mappings; return :data:`MISSING` if absent."""
    node = document
    for part in path:
        if not isinstance(node, Mapping) or part not in node:
            return MISSING
        node = node[part]
    return node


@dataclass(frozen=True)
class FormatDescriptor:
    name: str
    required: Tuple[Path_, ...]
    field_paths: Mapping[str, Path_]
    id_field: Optional[Path_] = None

    def validates(self, document: Any) -> bool:
        """True iff every required path resolves to a non-null value."""
        if not isinstance(document, Mapping):
            return False
        for path in self.required:
            value = navigate(document, path)
            if value is MISSING or value is None:
                return False
        return True

    def field(self, document: Any, name: str) -> Any:
        path = self.field_paths.get(name)
        if path is None:
            return MISSING
        return navigate(document, path)

    def identifier(self, document: Any) -> Any:
        if self.id_field is None:
            return MISSING
        return navigate(document, self.id_field)


class FormatCatalog:
    """Named collection of :class:`FormatDescriptor` objects."""

    def __init__(self, descriptors: Mapping[str, FormatDescriptor]) -> None:
        self._descriptors: Dict[str, FormatDescriptor] = dict(descriptors)

    def get(self, name: str) -> FormatDescriptor:
        try:
            return self._descriptors[name]
        except KeyError:
            known = ", ".join(sorted(self._descriptors)) or "(none)"
            raise UnknownFormat(f"unknown format {name!r}. Known formats: {known}", format=name) from None

    def __contains__(self, name: object) -> bool:
        return name in self._descriptors

    def names(self) -> list[str]:
        return sorted(self._descriptors)

    @classmethod
    def from_dict(cls, raw: Mapping[str, Any]) -> "FormatCatalog":
        formats = raw.get("formats")
        if not isinstance(formats, Mapping):
            raise ValueError("format file must have a top-level 'formats' mapping")
        descriptors: Dict[str, FormatDescriptor] = {}
        for name, entry in formats.items():
            if not isinstance(entry, Mapping) or not isinstance(entry.get("fields"), Mapping):
                raise ValueError(f"format {name!r} must define a 'fields' mapping")
            id_field = entry.get("id_field")
            descriptors[name] = FormatDescriptor(
                name=name,
                required=tuple(split_path(p) for p in entry.get("required", [])),
                field_paths={k: split_path(v) for k, v in entry["fields"].items()},
                id_field=split_path(id_field) if id_field else None,
            )
        return cls(descriptors)


def load_formats(path: Path = FORMATS_JSON) -> FormatCatalog:
    """Load a descriptor file.

    Raises
    ------
    FileNotFoundError
        If *path* does not exist.
    ValueError
        If the file is structurally invalid.
    """
    if not path.exists():
        raise FileNotFoundError(f"Format file not found: {path}")
    with open(path, encoding="utf-8") as fh:
        return FormatCatalog.from_dict(json.load(fh))
