"""In-process deployment: storage, N nodes and the marketplace behind one router.

Every service is the real FastAPI app; only the network is replaced by
:class:`~tollgate.transport.ServiceRouter`.  Used by ``tollgate demo`` and
the end-to-end tests.

Usage::

    dep = LocalDeployment(tmp_path, n=3)
    issuer = dep.register_issuer(TestIssuer.create("did:ex:uni-registry"))
    store = dep.new_buyer("did:ex:alice", issuer, {"organization_type": "public_university"})
    account = register_seller(dep.router, dep.marketplace_url, "clinic")
"""
from __future__ import annotations

import logging
from pathlib import Path
from typing import Any, Dict, Mapping, Optional, Sequence, Tuple

from tollgate.config import DeploymentConfig, MarketplaceConfig, StorageConfig, default_nodes
from tollgate.credentials.issuer import BuyerIdentity, CredentialStore, TestIssuer
from tollgate.http import raise_for_envelope
from tollgate.marketplace import service as marketplace_service
from tollgate.marketplace.broker import Marketplace
from tollgate.marketplace.store import KeyValueStore
from tollgate.node import service as node_service
from tollgate.node.runtime import NodeRuntime
from tollgate.storage import service as storage_service
from tollgate.storage.blobs import BlobStore
from tollgate.storage.registries import RegistryState
from tollgate.transport import ServiceRouter

logger = logging.getLogger(__name__)

# (issuer, claims, provides) for credentials beyond the main one
ExtraCredential = Tuple[TestIssuer, Mapping[str, Any], Sequence[str]]


class LocalDeployment:
    def __init__(
        self,
        root: Path,
        n: int = 3,
        operator_policies: Optional[Mapping[int, str]] = None,
        registries: Optional[RegistryState] = None,
        budget: Optional[int] = None,
        cache_ttl_sec: Optional[float] = None,
    ) -> None:
        self.root = Path(root)
        self.root.mkdir(parents=True, exist_ok=True)
        self.config = DeploymentConfig(
            name="local",
            storage=StorageConfig(root=str(self.root / "blobs")),
            nodes=default_nodes(n),
            marketplace=MarketplaceConfig(database=str(self.root / "marketplace.db")),
        )
        if budget is not None:
            self.config.tpl.budget = budget
        if cache_ttl_sec is not None:
            self.config.tpl.cache_ttl_sec = cache_ttl_sec
        for index, source in (operator_policies or {}).items():
            path = self.root / f"operator{index}.tpl"
            path.write_text(source, encoding="utf-8")
            self.config.node(index).operator_policy = str(path)

        self.router = ServiceRouter()
        self.registries = registries or RegistryState.from_fixtures()
        self.blobs = BlobStore(Path(self.config.storage.root), max_bytes=self.config.storage.max_bytes)
        self.router.mount(
            self.storage_url,
            storage_service.create_app(self.blobs, self.registries, base_url=self.storage_url),
        )

        self.nodes: Dict[int, NodeRuntime] = {}
        for node in self.config.nodes:
            node.key_file = str(self.root / "keys" / f"node{node.index}.json")
            runtime = NodeRuntime.from_config(self.config, node, session=self.router)
            self.nodes[node.index] = runtime
            self.router.mount(node.url, node_service.create_app(runtime))

        self.marketplace = Marketplace(
            KeyValueStore.at_path(Path(self.config.marketplace.database)),
            {node.index: node.url for node in self.config.nodes},
            session=self.router,
            fanout_timeout=self.config.marketplace.fanout_timeout_sec,
        )
        self.router.mount(self.marketplace_url, marketplace_service.create_app(self.marketplace))
        logger.info("local deployment with %d nodes under %s", n, self.root)

    @property
    def n(self) -> int:
        return self.config.n

    @property
    def storage_url(self) -> str:
        return self.config.storage.url.rstrip("/")

    @property
    def marketplace_url(self) -> str:
        return self.config.marketplace.url.rstrip("/")

    @property
    def node_urls(self) -> Dict[int, str]:
        return {node.index: node.url for node in self.config.nodes}

    # ── registries ────────────────────────────────────────────────────────

    def register_issuer(self, issuer: TestIssuer, qualified: bool = True) -> TestIssuer:
        """Publish the issuer's DID document and, by default, trust-list it."""
        raise_for_envelope(self.router.post(f"{self.storage_url}/admin/did", json=issuer.did_document()))
        if qualified:
            raise_for_envelope(self.router.post(f"{self.storage_url}/admin/qualify", json={"issuer": issuer.did}))
        return issuer

    def revoke(self, credential_id: str) -> None:
        raise_for_envelope(self.router.post(f"{self.storage_url}/admin/revoke", json={"id": credential_id}))

    def new_buyer(
        self,
        did: str,
        issuer: TestIssuer,
        claims: Mapping[str, Any],
        extra: Sequence[ExtraCredential] = (),
    ) -> CredentialStore:
        """A buyer identity holding a main credential and optional extras."""
        identity = BuyerIdentity.create(did)
        main = issuer.issue(identity, claims)
        store = CredentialStore(identity=identity, main_id=main.id, credentials=[main])
        for extra_issuer, extra_claims, provides in extra:
            store.add(extra_issuer.issue(identity, extra_claims), provides=provides)
        return store

    # ── fault injection ───────────────────────────────────────────────────

    def set_node_offline(self, index: int, offline: bool = True) -> None:
        self.router.set_offline(self.config.node(index).url, offline)

    def set_storage_offline(self, offline: bool = True) -> None:
        self.router.set_offline(self.storage_url, offline)
