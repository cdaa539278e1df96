"""Wire models exchanged with computation nodes (see ``docs/wire.md``)."""
from __future__ import annotations

import json
import uuid
from dataclasses import dataclass, field
from typing import Any, Dict, List, Mapping, Optional, Tuple

from tollgate.canonical import canonical_bytes, digest_hex
from tollgate.errors import MalformedRequest
from tollgate.sharing.shamir import Share
from tollgate.tpl.terms import ATOM_RE

COMPUTATION_TYPES = ("simple_statistics", "machine_learning")
OPERATIONS = ("sum", "count", "mean", "dot")


@dataclass(frozen=True)
class DataPackage:
    """One node's slice of a data product, sealed by the seller."""

    product_id: str
    policy_hash: str
    records: Tuple[Share, ...]

    @property
    def record_count(self) -> int:
        return len(self.records)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "product_id": self.product_id,
            "policy_hash": self.policy_hash,
            "record_count": self.record_count,
            "records": [s.to_dict() for s in self.records],
        }

    def to_bytes(self) -> bytes:
        return canonical_bytes(self.to_dict())

    @classmethod
    def from_bytes(cls, data: bytes) -> "DataPackage":
        """Raises :exc:`ValueError` on a malformed package."""
        try:
            raw = json.loads(data.decode("utf-8"))
            records = tuple(Share.from_dict(r) for r in raw["records"])
            package = cls(
                product_id=str(raw["product_id"]),
                policy_hash=str(raw["policy_hash"]),
                records=records,
            )
            declared = int(raw["record_count"])
        except (KeyError, TypeError, UnicodeDecodeError, json.JSONDecodeError) as exc:
            raise ValueError(f"malformed data package: {exc}") from None
        if declared != package.record_count:
            raise ValueError(
                f"package declares {declared} records but carries {package.record_count}"
            )
        return package


@dataclass(frozen=True)
class ProductRef:
    product_id: str
    package_urls: Mapping[int, str]
    policy: str

    def to_dict(self) -> Dict[str, Any]:
        return {
            "product_id": self.product_id,
            "package_urls": {str(k): v for k, v in sorted(self.package_urls.items())},
            "policy": self.policy,
        }

    @classmethod
    def from_dict(cls, raw: Mapping[str, Any]) -> "ProductRef":
        return cls(
            product_id=str(raw["product_id"]),
            package_urls={int(k): str(v) for k, v in dict(raw["package_urls"]).items()},
            policy=str(raw["policy"]),
        )


@dataclass(frozen=True)
class Computation:
    type: str
    op: str
    weights: Optional[Tuple[int, ...]] = None

    def to_dict(self) -> Dict[str, Any]:
        body: Dict[str, Any] = {"type": self.type, "op": self.op}
        if self.weights is not None:
            body["weights"] = list(self.weights)
        return body

    @classmethod
    def from_dict(cls, raw: Mapping[str, Any]) -> "Computation":
        ctype, op = raw.get("type"), raw.get("op")
        if not isinstance(ctype, str) or not ATOM_RE.match(ctype):
            raise ValueError(f"computation type {ctype!r} is not an atom")
        if not isinstance(op, str) or not ATOM_RE.match(op):
            raise ValueError(f"computation op {op!r} is not an atom")
        weights = raw.get("weights")
        if weights is not None:
            if not isinstance(weights, list) or not all(
                isinstance(w, int) and not isinstance(w, bool) for w in weights
            ):
                raise ValueError("weights must be a list of integers")
            weights = tuple(weights)
        return cls(type=ctype, op=op, weights=weights)


@dataclass(frozen=True)
class ComputationRequest:
    request_id: str
    products: Tuple[ProductRef, ...]
    computation: Computation
    presentation: Optional[Mapping[str, Any]] = None

    @classmethod
    def new(cls, products: List[ProductRef], computation: Computation) -> "ComputationRequest":
        return cls(request_id=str(uuid.uuid4()), products=tuple(products), computation=computation)

    def unsigned(self) -> Dict[str, Any]:
        return {
            "request_id": self.request_id,
            "products": [p.to_dict() for p in self.products],
            "computation": self.computation.to_dict(),
        }

    def digest(self) -> str:
        """The challenge a presentation must carry: SHA-256 of the request sans presentation."""
        return digest_hex(self.unsigned())

    def with_presentation(self, presentation: Mapping[str, Any]) -> "ComputationRequest":
        return ComputationRequest(self.request_id, self.products, self.computation, presentation)

    def to_dict(self) -> Dict[str, Any]:
        body = self.unsigned()
        body["presentation"] = dict(self.presentation or {})
        return body

    @classmethod
    def from_dict(cls, raw: Any) -> "ComputationRequest":
        """Raises :exc:`MalformedRequest` on structural problems."""
        try:
            products = tuple(ProductRef.from_dict(p) for p in raw["products"])
            if not products:
                raise ValueError("request names no products")
            return cls(
                request_id=str(raw["request_id"]),
                products=products,
                computation=Computation.from_dict(raw["computation"]),
                presentation=raw.get("presentation"),
            )
        except (KeyError, TypeError, ValueError, AttributeError) as exc:
            raise MalformedRequest(f"malformed computation request: {exc}") from None


@dataclass
class NodeDecision:
    request_id: str
    node_index: int
    verdict: str  # "granted" | "denied" | "unreachable"
    code: Optional[str] = None
    trace: List[str] = field(default_factory=list)
