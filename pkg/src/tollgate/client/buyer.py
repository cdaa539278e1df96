"""Buyer side of the protocol: search, request, decrypt, reconstruct."""
from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Dict, List, Mapping, Optional, Sequence, Union

import requests

from tollgate.credentials.issuer import CredentialStore
from tollgate.crypto.suite import decrypt_result
from tollgate.errors import DecryptionFailure, InsufficientShares, PurchaseDenied, UnsupportedComputation
from tollgate.http import raise_for_envelope
from tollgate.node.models import Computation, ComputationRequest, NodeDecision, ProductRef
from tollgate.sharing.shamir import Share, SharingParams, reconstruct

logger = logging.getLogger(__name__)

Value = Union[int, Fraction]


@dataclass
class BuyerResult:
    request_id: str
    op: str
    decisions: List[NodeDecision] = field(default_factory=list)
    ciphertexts: Dict[int, Dict[str, str]] = field(default_factory=dict)
    shares: List[Share] = field(default_factory=list)
    count: Optional[int] = None
    value: Optional[Value] = None

    @property
    def granted(self) -> bool:
        return bool(self.decisions) and all(d.verdict == "granted" for d in self.decisions)


def search(session: Any, marketplace_url: str, query: str = "", tags: Sequence[str] = ()) -> List[Dict[str, Any]]:
    """All catalog pages matching *query* and *tags*."""
    products: List[Dict[str, Any]] = []
    cursor = None
    while True:
        params: Dict[str, Any] = {"query": query, "tag": list(tags)}
        if cursor:
            params["cursor"] = cursor
        page = raise_for_envelope(session.get(f"{marketplace_url}/products", params=params))
        products.extend(page["products"])
        cursor = page.get("next_cursor")
        if not cursor:
            return products


def build_request(
    precheck: Mapping[str, Any],
    computation: Computation,
    store: CredentialStore,
) -> ComputationRequest:
    """Request with a presentation bound to it through the challenge."""
    refs = [ProductRef.from_dict(p) for p in precheck["products"]]
    request = ComputationRequest.new(refs, computation)
    additional = store.additional_for(precheck.get("required", []))
    presentation = store.identity.present(store.main, additional, challenge=request.digest())
    return request.with_presentation(presentation.to_dict())


def _post_direct(session: Any, node_urls: Mapping[int, str], body: Mapping[str, Any]) -> List[Dict[str, Any]]:
    responses = []
    for index, url in sorted(node_urls.items()):
        try:
            resp = session.post(f"{url.rstrip('/')}/compute", json=body)
        except requests.RequestException as exc:
            responses.append({"node_index": index, "error": {"code": "node_unreachable", "message": str(exc)}})
            continue
        responses.append({"node_index": index, "status": resp.status_code, "body": resp.content.decode("utf-8")})
    return responses


def collect(
    responses: Sequence[Mapping[str, Any]],
    request: ComputationRequest,
    store: CredentialStore,
) -> BuyerResult:
    """Decrypt every granted envelope; record a decision per node."""
    result = BuyerResult(request_id=request.request_id, op=request.computation.op)
    for entry in responses:
        index = int(entry["node_index"])
        if "error" in entry:
            error = entry["error"]
            result.decisions.append(NodeDecision(request.request_id, index, "unreachable", error.get("code")))
            continue
        envelope = json.loads(entry["body"])
        if "error" in envelope or "ciphertext" not in envelope:
            error = envelope.get("error", {})
            result.decisions.append(
                NodeDecision(request.request_id, index, "denied", error.get("code"), list(error.get("trace") or []))
            )
            continue
        result.ciphertexts[index] = envelope["ciphertext"]
        plaintext = decrypt_result(envelope["ciphertext"], store.identity.encryption.secret, request.request_id)
        payload = json.loads(plaintext)
        if int(payload["x"]) != index:
            raise DecryptionFailure(f"node {index} returned a share for x={payload['x']}")
        result.shares.append(Share(x=index, y=int(payload["y"])))
        result.count = int(payload["count"])
        result.decisions.append(NodeDecision(request.request_id, index, "granted"))
    return result


def finalize(result: BuyerResult, n: int, scale: int = 1) -> Value:
    """Reconstruct the plaintext result; mean becomes ``Fraction(sum, count)``.

    Raises
    ------
    InsufficientShares
        Unless every node 1..*n* contributed a share.
    """
    missing = sorted(set(range(1, n + 1)) - {s.x for s in result.shares})
    if missing:
        raise InsufficientShares(
            f"no share from node(s) {missing}",
            required=n,
            received=len(result.shares),
            missing=missing,
        )
    total = reconstruct(result.shares, SharingParams(n=n))
    if result.op == "mean":
        value: Value = Fraction(total, result.count or 1)
    else:
        value = total
    if scale != 1 and result.op in ("sum", "mean", "dot"):
        value = Fraction(value) / scale
    result.value = value
    return value


def buy(
    session: Any,
    marketplace_url: str,
    product_ids: Sequence[str],
    computation: Computation,
    store: CredentialStore,
    direct_node_urls: Optional[Mapping[int, str]] = None,
    scale: int = 1,
) -> BuyerResult:
    """Run precheck → request → submit → decrypt → reconstruct.

    Raises
    ------
    UnsupportedComputation
        If the marketplace pre-check reports the computation as infeasible.
    PurchaseDenied
        If any node denies or is unreachable; carries the per-node decisions.
    InsufficientShares
        If a node of the deployment is missing from the responses.
    """
    precheck = raise_for_envelope(
        session.post(
            f"{marketplace_url}/precheck",
            json={"product_ids": list(product_ids), "computation": computation.to_dict()},
        )
    )
    if not precheck["feasible"]:
        raise UnsupportedComputation(f"marketplace reports {computation.op!r} as infeasible", op=computation.op)

    request = build_request(precheck, computation, store)
    body = request.to_dict()
    if direct_node_urls:
        responses = _post_direct(session, direct_node_urls, body)
    else:
        responses = raise_for_envelope(session.post(f"{marketplace_url}/submit", json=body))["responses"]

    result = collect(responses, request, store)
    if not result.granted:
        refused = [f"node {d.node_index}: {d.code}" for d in result.decisions if d.verdict != "granted"]
        raise PurchaseDenied("request refused (" + "; ".join(refused) + ")", decisions=result.decisions)
    finalize(result, n=int(precheck["n"]), scale=scale)
    logger.info("request %s reconstructed (%s)", request.request_id, computation.op)
    return result
