"""Canonical JSON encoding used for every signature and digest.

Sorted keys, UTF-8, no insignificant whitespace, integers unquoted.
"""
from __future__ import annotations

import hashlib
import json
from typing import Any


def canonical_bytes(document: Any) -> bytes:
    return json.dumps(
        document,
        sort_keys=True,
        separators=(",", ":"),
        ensure_ascii=False,
        allow_nan=False,
    ).encode("utf-8")


def digest_hex(document: Any) -> str:
    """SHA-256 (hex) of the canonical encoding of *document*."""
    return hashlib.sha256(canonical_bytes(document)).hexdigest()
