"""TTL cache for trust-registry documents.

Readers of a fresh entry never block; refreshing an entry is exclusive.  A
failed refresh always raises, even if a stale copy is still held: stale
trust data is never served.
"""
from __future__ import annotations

import logging
import threading
import time
from dataclasses import dataclass
from typing import Any, Callable, Dict, Optional

logger = logging.getLogger(__name__)

DEFAULT_TTL_SEC = 300.0


@dataclass(frozen=True)
class CacheEntry:
    document: Any
    fetched_at: float


class RegistryCache:
    """Maps registry URL → (document, fetch timestamp)."""

    def __init__(
        self,
        fetch: Callable[[str], Any],
        ttl: float = DEFAULT_TTL_SEC,
        clock: Callable[[], float] = time.monotonic,
    ) -> None:
        self._fetch = fetch
        self.ttl = ttl
        self._clock = clock
        self._entries: Dict[str, CacheEntry] = {}
        self._lock = threading.Lock()
        self.fetches = 0

    def _fresh(self, url: str) -> Optional[CacheEntry]:
        entry = self._entries.get(url)
        if entry is not None and self._clock() - entry.fetched_at < self.ttl:
            return entry
        return None

    def get(self, url: str) -> Any:
        """Return the document for *url*, fetching it when absent or expired.

        Exceptions raised by the fetch function propagate unchanged.
        """
        entry = self._fresh(url)
        if entry is not None:
            return entry.document
        with self._lock:
            entry = self._fresh(url)
            if entry is not None:
                return entry.document
            if url in self._entries:
                logger.debug("registry entry expired: %s", url)
            document = self._fetch(url)
            self.fetches += 1
            self._entries[url] = CacheEntry(document, self._clock())
            return document

    def invalidate(self, url: str) -> None:
        with self._lock:
            self._entries.pop(url, None)

    def clear(self) -> None:
        with self._lock:
            self._entries.clear()

    def __len__(self) -> int:
        return len(self._entries)
