"""Trust-registry clients consumed by the credential builtins.

Two implementations share one interface:

* :class:`HttpTrustServices` talks to the mock registry endpoints of the
  storage service (``GET /trustlist/eidas``, ``GET /revocation``,
  ``GET /did/{id}``) through a :class:`~tollgate.tpl.cache.RegistryCache`.
* :class:`StaticTrustServices` serves fixture documents from memory; the
  offline ``tpl eval`` tool and unit tests use it.
"""
from __future__ import annotations

import json
import logging
import re
from pathlib import Path
from typing import Any, Dict, Mapping, Optional, Protocol, Set

import requests

from tollgate.errors import MalformedIdentifier, RegistryUnavailable, UnknownIdentifier
from tollgate.tpl.cache import DEFAULT_TTL_SEC, RegistryCache

logger = logging.getLogger(__name__)

DID_RE = re.compile(r"did:[a-z0-9]+:[A-Za-z0-9._:%-]+\Z")
DEFAULT_FETCH_TIMEOUT_SEC = 5.0


def check_did(identifier: str) -> str:
    if not isinstance(identifier, str) or not DID_RE.match(identifier):
        raise MalformedIdentifier(
            f"{identifier!r} is not of the form did:<method>:<id>",
            identifier=str(identifier),
        )
    return identifier


class TrustServices(Protocol):
    def qualified_issuers(self) -> Set[str]:
        ...

    def revoked_ids(self) -> Set[str]:
        ...

    def resolve(self, did: str) -> Mapping[str, Any]:
        ...


def _qualified(document: Any) -> Set[str]:
    if not isinstance(document, Mapping) or document.get("scheme") != "eIDAS":
        raise RegistryUnavailable("trust list is not an eIDAS scheme document")
    return set(document.get("qualified", []))


def _revoked(document: Any) -> Set[str]:
    if not isinstance(document, Mapping):
        raise RegistryUnavailable("revocation list is not a JSON object")
    return set(document.get("revoked", []))


class StaticTrustServices:
    """In-memory registries with the same semantics as the HTTP ones."""

    def __init__(
        self,
        trustlist: Optional[Mapping[str, Any]] = None,
        revocation: Optional[Mapping[str, Any]] = None,
        dids: Optional[Mapping[str, Mapping[str, Any]]] = None,
    ) -> None:
        self.trustlist = dict(trustlist or {"scheme": "eIDAS", "qualified": []})
        self.revocation = dict(revocation or {"revoked": []})
        self.dids: Dict[str, Mapping[str, Any]] = dict(dids or {})

    def qualified_issuers(self) -> Set[str]:
        return _qualified(self.trustlist)

    def revoked_ids(self) -> Set[str]:
        return _revoked(self.revocation)

    def resolve(self, did: str) -> Mapping[str, Any]:
        check_did(did)
        try:
            return self.dids[did]
        except KeyError:
            raise UnknownIdentifier(f"{did} is not registered", identifier=did) from None

    @classmethod
    def from_fixtures(cls, directory: Path) -> "StaticTrustServices":
        """Load ``trustlist.json``, ``revocation.json`` and ``dids.json``.

        Missing files yield empty registries.
        """

        def _load(name: str, default: Any) -> Any:
            path = directory / name
            if not path.exists():
                return default
            with open(path, encoding="utf-8") as fh:
                return json.load(fh)

        return cls(
            trustlist=_load("trustlist.json", None),
            revocation=_load("revocation.json", None),
            dids=_load("dids.json", {}),
        )


class HttpTrustServices:
    """Registry client over HTTP with TTL caching.

    *session* is anything with a ``requests``-style ``get(url, timeout=...)``.
    """

    def __init__(
        self,
        session: Any,
        trustlist_url: str,
        revocation_url: str,
        resolver_url: str,
        ttl: float = DEFAULT_TTL_SEC,
        timeout: float = DEFAULT_FETCH_TIMEOUT_SEC,
        cache: Optional[RegistryCache] = None,
    ) -> None:
        self.session = session
        self.trustlist_url = trustlist_url
        self.revocation_url = revocation_url
        self.resolver_url = resolver_url.rstrip("/")
        self.timeout = timeout
        self.cache = cache or RegistryCache(self._fetch, ttl=ttl)

    def _fetch(self, url: str) -> Any:
        try:
            resp = self.session.get(url, timeout=self.timeout)
        except requests.RequestException as exc:
            logger.warning("registry fetch failed: %s (%s)", url, exc)
            raise RegistryUnavailable(f"cannot fetch {url}: {exc}", url=url) from None
        if resp.status_code == 404 and url.startswith(self.resolver_url + "/did/"):
            did = url[len(self.resolver_url) + len("/did/"):]
            raise UnknownIdentifier(f"{did} is not registered", identifier=did)
        if resp.status_code != 200:
            raise RegistryUnavailable(f"{url} answered HTTP {resp.status_code}", url=url)
        try:
            return resp.json()
        except ValueError:
            raise RegistryUnavailable(f"{url} did not return JSON", url=url) from None

    def qualified_issuers(self) -> Set[str]:
        return _qualified(self.cache.get(self.trustlist_url))

    def revoked_ids(self) -> Set[str]:
        return _revoked(self.cache.get(self.revocation_url))

    def resolve(self, did: str) -> Mapping[str, Any]:
        check_did(did)
        document = self.cache.get(f"{self.resolver_url}/did/{did}")
        if not isinstance(document, Mapping):
            raise RegistryUnavailable(f"resolver returned a non-object for {did}")
        return document
