"""Namespaced JSON key-value table on an embedded SQLite file.

Schema::

    kv(namespace TEXT, key TEXT, value TEXT JSON, PRIMARY KEY (namespace, key))

Namespaces in use: ``accounts``, ``account_names``, ``products``.
"""
from __future__ import annotations

import json
import threading
from pathlib import Path
from typing import Any, Iterator, List, Optional, Tuple

from sqlalchemy import Column, String, Text, create_engine, select
from sqlalchemy.exc import IntegrityError as SqlIntegrityError
from sqlalchemy.orm import Session, declarative_base, sessionmaker
from sqlalchemy.pool import StaticPool

Base = declarative_base()


class Entry(Base):
    __tablename__ = "kv"

    namespace = Column(String(64), primary_key=True)
    key = Column(String(256), primary_key=True)
    value = Column(Text, nullable=False)


class KeyValueStore:
    def __init__(self, url: str) -> None:
        kwargs: dict = {"future": True}
        if url.startswith("sqlite"):
            kwargs["connect_args"] = {"check_same_thread": False}
        if url == "sqlite://":
            kwargs["poolclass"] = StaticPool
        self.engine = create_engine(url, **kwargs)
        Base.metadata.create_all(bind=self.engine)
        self._sessions = sessionmaker(bind=self.engine, expire_on_commit=False, future=True)
        self._write_lock = threading.Lock()

    @classmethod
    def at_path(cls, path: Path) -> "KeyValueStore":
        path.parent.mkdir(parents=True, exist_ok=True)
        return cls(f"sqlite:///{path}")

    @classmethod
    def in_memory(cls) -> "KeyValueStore":
        return cls("sqlite://")

    def _session(self) -> Session:
        return self._sessions()

    def get(self, namespace: str, key: str) -> Optional[Any]:
        with self._session() as db:
            row = db.get(Entry, (namespace, key))
            return None if row is None else json.loads(row.value)

    def put(self, namespace: str, key: str, value: Any) -> None:
        with self._write_lock, self._session() as db:
            db.merge(Entry(namespace=namespace, key=key, value=json.dumps(value)))
            db.commit()

    def insert(self, namespace: str, key: str, value: Any) -> bool:
        """Insert only if absent; returns ``False`` when the key already exists."""
        with self._write_lock, self._session() as db:
            db.add(Entry(namespace=namespace, key=key, value=json.dumps(value)))
            try:
                db.commit()
            except SqlIntegrityError:
                db.rollback()
                return False
        return True

    def items(self, namespace: str, after: Optional[str] = None) -> Iterator[Tuple[str, Any]]:
        """Entries of *namespace* ordered by key, optionally starting after *after*."""
        stmt = select(Entry).where(Entry.namespace == namespace)
        if after is not None:
            stmt = stmt.where(Entry.key > after)
        stmt = stmt.order_by(Entry.key)
        with self._session() as db:
            rows: List[Entry] = list(db.scalars(stmt))
        for row in rows:
            yield row.key, json.loads(row.value)
