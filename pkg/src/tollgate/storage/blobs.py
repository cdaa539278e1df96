"""Content-addressable blob storage.

Blobs are stored under ``<root>/sha256-<hex>``; the blob id is the hex
SHA-256 of the content, so every read can be verified against its id.
"""
from __future__ import annotations

import hashlib
import os
import re
import tempfile
from pathlib import Path

from tollgate.errors import IntegrityError, NotFound, TooLarge

DEFAULT_MAX_BYTES = 64 * 1024 * 1024
_BLOB_ID = re.compile(r"[0-9a-f]{64}\Z")


class BlobStore:
    def __init__(self, root: str | Path, max_bytes: int = DEFAULT_MAX_BYTES) -> None:
        self.root = Path(root)
        self.root.mkdir(parents=True, exist_ok=True)
        self.max_bytes = max_bytes

    def _normalize(self, blob_id: str) -> str:
        d = blob_id.strip().lower()
        if d.startswith("sha256-") or d.startswith("sha256:"):
            d = d[len("sha256-"):]
        if not _BLOB_ID.match(d):
            raise NotFound(f"{blob_id!r} is not a blob id", blob_id=blob_id)
        return d

    def path_for(self, blob_id: str) -> Path:
        return self.root / f"sha256-{self._normalize(blob_id)}"

    def exists(self, blob_id: str) -> bool:
        try:
            return self.path_for(blob_id).is_file()
        except NotFound:
            return False

    def put(self, content: bytes) -> str:
        """Store *content* and return its id; storing the same bytes twice is a no-op."""
        if len(content) > self.max_bytes:
            raise TooLarge(
                f"blob of {len(content)} bytes exceeds the {self.max_bytes}-byte limit",
                size=len(content),
                limit=self.max_bytes,
            )
        blob_id = hashlib.sha256(content).hexdigest()
        path = self.path_for(blob_id)
        if not path.is_file():
            fd, tmp = tempfile.mkstemp(dir=self.root, prefix=".upload-")
            with os.fdopen(fd, "wb") as fh:
                fh.write(content)
            os.replace(tmp, path)
        return blob_id

    def get(self, blob_id: str) -> bytes:
        """Return the blob's bytes after checking them against *blob_id*.

        Raises
        ------
        NotFound
            If no blob is stored under *blob_id*.
        IntegrityError
            If the stored bytes no longer hash to *blob_id*.
        """
        expected = self._normalize(blob_id)
        path = self.root / f"sha256-{expected}"
        if not path.is_file():
            raise NotFound(f"blob {expected} not found", blob_id=expected)
        content = path.read_bytes()
        actual = hashlib.sha256(content).hexdigest()
        if actual != expected:
            raise IntegrityError(f"blob {expected} hashes to {actual}", blob_id=expected)
        return content
