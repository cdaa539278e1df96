"""Mutable mock registries served by the storage service.

The documents start from the JSON fixtures in ``storage/fixtures`` and can be
changed at runtime through the admin endpoints (revocation, DID
registration).
"""
from __future__ import annotations

import copy
import json
import logging
import threading
from pathlib import Path
from typing import Any, Dict, List, Mapping, Optional

from tollgate.errors import UnknownIdentifier
from tollgate.paths import FIXTURES_DIR
from tollgate.tpl.trust import check_did

logger = logging.getLogger(__name__)


def _load_json(path: Path, default: Any) -> Any:
    if not path.exists():
        return default
    with open(path, encoding="utf-8") as fh:
        return json.load(fh)


class RegistryState:
    def __init__(
        self,
        trustlist: Optional[Mapping[str, Any]] = None,
        revoked: Optional[List[str]] = None,
        dids: Optional[Mapping[str, Mapping[str, Any]]] = None,
    ) -> None:
        self._lock = threading.Lock()
        self.trustlist: Dict[str, Any] = dict(trustlist or {"scheme": "eIDAS", "qualified": []})
        self.revoked: List[str] = list(revoked or [])
        self.dids: Dict[str, Dict[str, Any]] = {k: dict(v) for k, v in (dids or {}).items()}

    @classmethod
    def from_fixtures(cls, directory: Path = FIXTURES_DIR) -> "RegistryState":
        return cls(
            trustlist=_load_json(directory / "trustlist.json", None),
            revoked=_load_json(directory / "revocation.json", {}).get("revoked", []),
            dids=_load_json(directory / "dids.json", {}),
        )

    @classmethod
    def empty(cls) -> "RegistryState":
        return cls()

    def trustlist_document(self) -> Dict[str, Any]:
        with self._lock:
            return copy.deepcopy(self.trustlist)

    def revocation_document(self) -> Dict[str, Any]:
        with self._lock:
            return {"revoked": list(self.revoked)}

    def revoke(self, credential_id: str) -> None:
        with self._lock:
            if credential_id not in self.revoked:
                self.revoked.append(credential_id)
        logger.info("revoked credential %s", credential_id)

    def qualify(self, issuer: str) -> None:
        with self._lock:
            qualified = self.trustlist.setdefault("qualified", [])
            if issuer not in qualified:
                qualified.append(issuer)

    def register_did(self, document: Mapping[str, Any]) -> str:
        did = check_did(str(document.get("id", "")))
        with self._lock:
            self.dids[did] = dict(document)
        return did

    def resolve(self, did: str) -> Dict[str, Any]:
        check_did(did)
        with self._lock:
            document = self.dids.get(did)
        if document is None:
            raise UnknownIdentifier(f"{did} is not registered", identifier=did)
        return copy.deepcopy(document)
