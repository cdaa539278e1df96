"""Duck-typed HTTP transport.

Production code talks to services through anything with ``requests``-style
``get`` / ``post`` / ``put`` methods: a real :class:`requests.Session`, or a
:class:`ServiceRouter` that dispatches URLs to in-process FastAPI apps.  The
router is what :class:`~tollgate.deploy.LocalDeployment` and the end-to-end
tests use; it also records every request so tests can inspect traffic.
"""
from __future__ import annotations

import threading
from dataclasses import dataclass
from typing import Any, Dict, List, Optional, Set, Tuple
from urllib.parse import urlsplit

import requests
from fastapi import FastAPI
from fastapi.testclient import TestClient

from tollgate.canonical import canonical_bytes


@dataclass
class Exchange:
    method: str
    url: str
    body: bytes
    status: int
    response: bytes


class ServiceRouter:
    """Route ``scheme://host`` prefixes to mounted FastAPI apps."""

    def __init__(self) -> None:
        self._clients: Dict[str, TestClient] = {}
        self._locks: Dict[str, threading.Lock] = {}
        self._offline: Set[str] = set()
        self._log_lock = threading.Lock()
        self.exchanges: List[Exchange] = []

    @staticmethod
    def _origin(url: str) -> str:
        parts = urlsplit(url)
        return f"{parts.scheme}://{parts.netloc}"

    def mount(self, base_url: str, app: FastAPI) -> None:
        origin = self._origin(base_url)
        self._clients[origin] = TestClient(app, base_url=origin, raise_server_exceptions=False)
        self._locks[origin] = threading.Lock()

    def set_offline(self, base_url: str, offline: bool = True) -> None:
        origin = self._origin(base_url)
        if offline:
            self._offline.add(origin)
        else:
            self._offline.discard(origin)

    def _resolve(self, url: str) -> Tuple[str, TestClient, str]:
        origin = self._origin(url)
        if origin in self._offline or origin not in self._clients:
            raise requests.ConnectionError(f"cannot connect to {origin}")
        parts = urlsplit(url)
        path = parts.path or "/"
        if parts.query:
            path = f"{path}?{parts.query}"
        return origin, self._clients[origin], path

    def request(
        self,
        method: str,
        url: str,
        *,
        json: Any = None,
        data: Optional[bytes] = None,
        params: Optional[Dict[str, Any]] = None,
        timeout: Optional[float] = None,
        headers: Optional[Dict[str, str]] = None,
    ) -> Any:
        origin, client, path = self._resolve(url)
        body = data if data is not None else (canonical_bytes(json) if json is not None else b"")
        with self._locks[origin]:
            resp = client.request(
                method,
                path,
                content=data,
                json=json,
                params=params,
                headers=headers,
            )
        with self._log_lock:
            self.exchanges.append(Exchange(method, url, bytes(body), resp.status_code, resp.content))
        return resp

    def get(self, url: str, **kwargs: Any) -> Any:
        return self.request("GET", url, **kwargs)

    def post(self, url: str, **kwargs: Any) -> Any:
        return self.request("POST", url, **kwargs)

    def put(self, url: str, **kwargs: Any) -> Any:
        return self.request("PUT", url, **kwargs)


def http_session() -> requests.Session:
    session = requests.Session()
    session.headers["User-Agent"] = "tollgate"
    return session
