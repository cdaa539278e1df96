"""Deployment configuration.

Loads a ``deployment.yaml`` file describing the storage service, the N
computation nodes, the marketplace, registry endpoints and interpreter
limits.

Usage::

    from tollgate.config import load_config

    cfg = load_config(Path("deployment.yaml"))
    print(cfg.n, [node.url for node in cfg.nodes])
"""
from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Optional

import yaml

from tollgate.paths import BLOB_DIR, DATA_ROOT_DIR, FIXTURES_DIR, MARKETPLACE_DB
from tollgate.tpl.cache import DEFAULT_TTL_SEC
from tollgate.tpl.engine import DEFAULT_BUDGET
from tollgate.tpl.trust import DEFAULT_FETCH_TIMEOUT_SEC

DEFAULT_NODE_COUNT = 3
DEFAULT_FANOUT_TIMEOUT_SEC = 30.0
DEFAULT_BLOB_MAX_BYTES = 64 * 1024 * 1024


# ── Config dataclasses ─────────────────────────────────────────────────────

@dataclass
class StorageConfig:
    url: str = "http://storage"
    root: str = str(BLOB_DIR)
    max_bytes: int = DEFAULT_BLOB_MAX_BYTES
    fixtures: str = str(FIXTURES_DIR)


@dataclass
class NodeConfig:
    index: int
    url: str
    key_file: str = ""
    operator_policy: Optional[str] = None
    # URL prefixes the node may fetch packages from; empty = storage url only.
    storage_allow: List[str] = field(default_factory=list)


@dataclass
class MarketplaceConfig:
    url: str = "http://marketplace"
    database: str = str(MARKETPLACE_DB)
    fanout_timeout_sec: float = DEFAULT_FANOUT_TIMEOUT_SEC


@dataclass
class RegistriesConfig:
    trustlist_url: str = ""
    revocation_url: str = ""
    resolver_url: str = ""


@dataclass
class TplConfig:
    budget: int = DEFAULT_BUDGET
    cache_ttl_sec: float = DEFAULT_TTL_SEC
    fetch_timeout_sec: float = DEFAULT_FETCH_TIMEOUT_SEC


@dataclass
class DeploymentConfig:
    name: str = "tollgate_local"
    storage: StorageConfig = field(default_factory=StorageConfig)
    nodes: List[NodeConfig] = field(default_factory=list)
    marketplace: MarketplaceConfig = field(default_factory=MarketplaceConfig)
    registries: RegistriesConfig = field(default_factory=RegistriesConfig)
    tpl: TplConfig = field(default_factory=TplConfig)

    def __post_init__(self) -> None:
        if not self.nodes:
            self.nodes = default_nodes(DEFAULT_NODE_COUNT)
        base = self.storage.url.rstrip("/")
        if not self.registries.trustlist_url:
            self.registries.trustlist_url = f"{base}/trustlist/eidas"
        if not self.registries.revocation_url:
            self.registries.revocation_url = f"{base}/revocation"
        if not self.registries.resolver_url:
            self.registries.resolver_url = base
        for node in self.nodes:
            if not node.storage_allow:
                node.storage_allow = [f"{base}/blobs/"]
            if not node.key_file:
                node.key_file = str(DATA_ROOT_DIR / "keys" / f"node{node.index}.json")

    @property
    def n(self) -> int:
        return len(self.nodes)

    def node(self, index: int) -> NodeConfig:
        for node in self.nodes:
            if node.index == index:
                return node
        raise KeyError(f"no node with index {index}")


def default_nodes(n: int) -> List[NodeConfig]:
    return [NodeConfig(index=i, url=f"http://node{i}") for i in range(1, n + 1)]


# ── Config loading ─────────────────────────────────────────────────────────

def _section(raw: Dict[str, Any], key: str, config_path: Path) -> Dict[str, Any]:
    value = raw.get(key, {}) or {}
    if not isinstance(value, dict):
        raise ValueError(
            f"'deployment.{key}' in {config_path} must be a mapping, got {type(value).__name__}."
        )
    return value


def _known(cls: type, values: Dict[str, Any], where: str, config_path: Path) -> Dict[str, Any]:
    allowed = set(cls.__dataclass_fields__)
    unknown = sorted(set(values) - allowed)
    if unknown:
        raise ValueError(
            f"Unknown key(s) {', '.join(unknown)} in '{where}' of {config_path}. "
            f"Known keys: {', '.join(sorted(allowed))}"
        )
    return values


def load_config(config_path: Path) -> DeploymentConfig:
    """Load and validate a deployment YAML file.

    Raises
    ------
    FileNotFoundError
        If *config_path* does not exist.
    ValueError
        If the YAML is structurally invalid, node indices are not exactly
        1..N, or fewer than two nodes are configured.
    """
    if not config_path.exists():
        raise FileNotFoundError(f"Config file not found: {config_path}")

    with open(config_path, encoding="utf-8") as fh:
        raw = yaml.safe_load(fh)

    if not isinstance(raw, dict) or "deployment" not in raw:
        raise ValueError(f"Config {config_path} must have a top-level 'deployment' key.")

    dep = raw.get("deployment") or {}
    if not isinstance(dep, dict):
        raise ValueError(
            f"'deployment' in {config_path} must be a mapping, got {type(dep).__name__}."
        )

    nodes_raw = dep.get("nodes")
    nodes: List[NodeConfig] = []
    if nodes_raw is not None:
        if not isinstance(nodes_raw, list):
            raise ValueError(f"'deployment.nodes' in {config_path} must be a list.")
        for i, entry in enumerate(nodes_raw):
            if not isinstance(entry, dict):
                raise ValueError(
                    f"Node #{i} in {config_path} must be a mapping, got {type(entry).__name__}."
                )
            if "index" not in entry or "url" not in entry:
                raise ValueError(f"Node #{i} in {config_path} needs both 'index' and 'url'.")
            nodes.append(NodeConfig(**_known(NodeConfig, entry, f"nodes[{i}]", config_path)))

        indices = sorted(n.index for n in nodes)
        if indices != list(range(1, len(nodes) + 1)):
            raise ValueError(
                f"Node indices in {config_path} must be exactly 1..N, got {indices}."
            )
        if len(nodes) < 2:
            raise ValueError(f"{config_path} configures {len(nodes)} node(s); at least 2 are required.")

    return DeploymentConfig(
        name=dep.get("name", "tollgate_local"),
        storage=StorageConfig(**_known(StorageConfig, _section(dep, "storage", config_path), "storage", config_path)),
        nodes=nodes,
        marketplace=MarketplaceConfig(
            **_known(MarketplaceConfig, _section(dep, "marketplace", config_path), "marketplace", config_path)
        ),
        registries=RegistriesConfig(
            **_known(RegistriesConfig, _section(dep, "registries", config_path), "registries", config_path)
        ),
        tpl=TplConfig(**_known(TplConfig, _section(dep, "tpl", config_path), "tpl", config_path)),
    )
