"""Node runtime: configuration, key material and the request entry point."""
from __future__ import annotations

import json
import logging
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Optional, Tuple

from tollgate.config import DeploymentConfig, NodeConfig
from tollgate.crypto.suite import KeyPair, generate_encryption_keypair
from tollgate.errors import PolicyDenied, TollgateError
from tollgate.node.models import ComputationRequest
from tollgate.node.pipeline import Pipeline, RequestContext
from tollgate.node.steps import default_steps
from tollgate.sharing.shamir import DEFAULT_VALUE_BOUND, SharingParams
from tollgate.tpl.builtins import credential_registry
from tollgate.tpl.engine import DEFAULT_BUDGET
from tollgate.tpl.parser import parse_policy
from tollgate.tpl.registry import BuiltinRegistry
from tollgate.tpl.terms import Policy
from tollgate.tpl.trust import DEFAULT_FETCH_TIMEOUT_SEC, HttpTrustServices, TrustServices

logger = logging.getLogger(__name__)

OPERATOR_POLICY_ID = "operator"


def load_or_create_keys(path: Path) -> KeyPair:
    """Read the node's X25519 key pair, generating and saving one on first use."""
    if path.exists():
        with open(path, encoding="utf-8") as fh:
            return KeyPair.from_dict(json.load(fh))
    keys = generate_encryption_keypair()
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(keys.to_dict(), indent=2), encoding="utf-8")
    path.chmod(0o600)
    logger.info("generated node key pair at %s", path)
    return keys


def load_operator_policy(path: Optional[str]) -> Optional[Policy]:
    if not path:
        return None
    source = Path(path).read_text(encoding="utf-8")
    return parse_policy(source, id=OPERATOR_POLICY_ID)


@dataclass
class NodeRuntime:
    index: int
    params: SharingParams
    keys: KeyPair
    session: Any
    trust: TrustServices
    storage_allow: List[str]
    operator_policy: Optional[Policy] = None
    budget: int = DEFAULT_BUDGET
    fetch_timeout: float = DEFAULT_FETCH_TIMEOUT_SEC
    value_bound: int = DEFAULT_VALUE_BOUND
    registry: BuiltinRegistry = field(init=False)

    def __post_init__(self) -> None:
        self.registry = credential_registry(self.trust)

    @classmethod
    def from_config(
        cls,
        deployment: DeploymentConfig,
        node: NodeConfig,
        session: Any,
        keys: Optional[KeyPair] = None,
    ) -> "NodeRuntime":
        reg = deployment.registries
        trust = HttpTrustServices(
            session,
            reg.trustlist_url,
            reg.revocation_url,
            reg.resolver_url,
            ttl=deployment.tpl.cache_ttl_sec,
            timeout=deployment.tpl.fetch_timeout_sec,
        )
        return cls(
            index=node.index,
            params=SharingParams(n=deployment.n),
            keys=keys or load_or_create_keys(Path(node.key_file)),
            session=session,
            trust=trust,
            storage_allow=list(node.storage_allow),
            operator_policy=load_operator_policy(node.operator_policy),
            budget=deployment.tpl.budget,
            fetch_timeout=deployment.tpl.fetch_timeout_sec,
        )

    def public_info(self) -> Dict[str, Any]:
        return {"index": self.index, "n": self.params.n, "public_key": self.keys.public}

    def handle_request(self, raw: Any) -> Tuple[int, Dict[str, Any]]:
        """Run the full pipeline and return ``(http status, envelope)``.

        Any error yields an error envelope without a ``ciphertext`` field.
        """
        t0 = time.perf_counter()
        request_id = str(raw.get("request_id", "")) if isinstance(raw, dict) else ""
        envelope: Dict[str, Any] = {"request_id": request_id, "node_index": self.index}
        try:
            request = ComputationRequest.from_dict(raw)
            ctx = Pipeline(default_steps()).run(RequestContext(request=request, runtime=self))
        except TollgateError as exc:
            error = {"code": exc.code, "message": exc.message}
            if isinstance(exc, PolicyDenied):
                error["trace"] = exc.trace
                error["failed_goal"] = exc.failed_goal
            else:
                error.update({k: v for k, v in exc.details.items() if k not in error})
            envelope["error"] = error
            logger.info(
                "request %s node %d denied: %s (%.3fs)",
                request_id, self.index, exc.code, time.perf_counter() - t0,
            )
            return exc.status, envelope
        except Exception as exc:
            logger.exception("request %s node %d failed unexpectedly", request_id, self.index)
            envelope["error"] = {"code": "internal_error", "message": type(exc).__name__}
            return 500, envelope

        envelope["ciphertext"] = ctx.ciphertext
        logger.info(
            "request %s node %d granted: %s over %d records (%.3fs)",
            request_id, self.index, request.computation.op, ctx.total_records, time.perf_counter() - t0,
        )
        return 200, envelope
