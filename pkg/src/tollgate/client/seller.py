"""Seller side of the protocol: share, seal, upload, publish.

Usage::

    account = register_seller(session, marketplace_url, "hospital-a")
    bundle = SellerBundle(records=read_records(Path("data.csv")),
                          policy_source=Path("policy.tpl").read_text(),
                          metadata={"title": "Blood pressure 2024"})
    product_id = sell(bundle, account, session, marketplace_url, storage_url)
"""
from __future__ import annotations

import csv
import json
import logging
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Any, Dict, List, Mapping, Optional

from tollgate.canonical import canonical_bytes
from tollgate.crypto.suite import hash_policy, seal_for_node
from tollgate.errors import PolicySyntaxError, TplError
from tollgate.http import raise_for_envelope
from tollgate.marketplace.broker import new_product_id
from tollgate.node.models import DataPackage
from tollgate.sharing.shamir import DEFAULT_VALUE_BOUND, Share, SharingParams, check_value_bound, share
from tollgate.tpl.parser import parse_policy

logger = logging.getLogger(__name__)


@dataclass
class SellerBundle:
    records: List[int]
    policy_source: str
    metadata: Dict[str, Any] = field(default_factory=dict)


@dataclass
class SellerAccount:
    """What ``seller keys fetch`` saves: the account id and the node key directory."""

    account_id: str
    n: int
    nodes: List[Dict[str, Any]]

    def save(self, path: Path) -> None:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(
            json.dumps({"account_id": self.account_id, "n": self.n, "nodes": self.nodes}, indent=2),
            encoding="utf-8",
        )

    @classmethod
    def load(cls, path: Path) -> "SellerAccount":
        if not path.exists():
            raise FileNotFoundError(f"Seller account file not found: {path}")
        raw = json.loads(path.read_text(encoding="utf-8"))
        return cls(account_id=raw["account_id"], n=int(raw["n"]), nodes=list(raw["nodes"]))


def read_records(path: Path, scale: int = 1) -> List[int]:
    """Read a single-column CSV of numbers, multiplied by *scale* and rounded to integers.

    A non-numeric first row is treated as a header.

    Raises
    ------
    ValueError
        On a non-numeric value after the header, or a row with several columns.
    """
    records: List[int] = []
    with open(path, newline="", encoding="utf-8") as fh:
        for lineno, row in enumerate(csv.reader(fh), start=1):
            cells = [c.strip() for c in row if c.strip()]
            if not cells:
                continue
            if len(cells) != 1:
                raise ValueError(f"{path}:{lineno}: expected one column, got {len(cells)}")
            try:
                value = Fraction(cells[0])
            except ValueError:
                if lineno == 1:
                    continue
                raise ValueError(f"{path}:{lineno}: {cells[0]!r} is not a number") from None
            records.append(round(value * scale))
    return records


def register_seller(session: Any, marketplace_url: str, name: str) -> SellerAccount:
    resp = session.post(f"{marketplace_url}/accounts", json={"name": name, "role": "seller"})
    body = raise_for_envelope(resp)
    return SellerAccount(account_id=body["account_id"], n=int(body["n"]), nodes=body["nodes"])


def split_records(
    records: List[int],
    params: SharingParams,
    value_bound: int = DEFAULT_VALUE_BOUND,
) -> List[List[Share]]:
    """Per-node share columns: ``columns[i]`` holds node i+1's share of every record.

    Raises
    ------
    SecretOutOfRange
        If a record exceeds *value_bound*, the bound nodes assume in their range checks.
    """
    check_value_bound(records, value_bound)
    columns: List[List[Share]] = [[] for _ in range(params.n)]
    for value in records:
        for i, s in enumerate(share(value, params)):
            columns[i].append(s)
    return columns


def sell(
    bundle: SellerBundle,
    account: SellerAccount,
    session: Any,
    marketplace_url: str,
    storage_url: str,
    product_id: Optional[str] = None,
    params: Optional[SharingParams] = None,
    value_bound: int = DEFAULT_VALUE_BOUND,
) -> str:
    """Share, seal and upload the records, then publish the product.

    Raises
    ------
    PolicySyntaxError
        If the policy does not parse; nothing is uploaded.
    SecretOutOfRange
        If a (scaled) record exceeds *value_bound*; nothing is uploaded.
    """
    product_id = product_id or new_product_id()
    try:
        parse_policy(bundle.policy_source, id=product_id)
    except TplError as exc:
        raise PolicySyntaxError(f"policy rejected: {exc.message}", **exc.details) from None

    params = params or SharingParams(n=account.n)
    columns = split_records(bundle.records, params, value_bound)
    policy_hash = hash_policy(bundle.policy_source)

    urls: Dict[str, str] = {}
    for node in sorted(account.nodes, key=lambda d: d["index"]):
        index = int(node["index"])
        package = DataPackage(product_id, policy_hash, tuple(columns[index - 1]))
        sealed = seal_for_node(package.to_bytes(), node["public_key"], product_id, index)
        resp = session.put(f"{storage_url}/blobs", data=canonical_bytes(sealed.to_dict()))
        urls[str(index)] = raise_for_envelope(resp)["url"]
        logger.debug("uploaded package for node %d of %s", index, product_id)

    metadata: Mapping[str, Any] = bundle.metadata
    product = {
        "product_id": product_id,
        "title": metadata.get("title", product_id),
        "description": metadata.get("description", ""),
        "tags": list(metadata.get("tags", [])),
        "record_count": len(bundle.records),
        "policy": bundle.policy_source,
        "package_urls": urls,
    }
    resp = session.post(
        f"{marketplace_url}/products",
        json={"seller_id": account.account_id, "product": product},
    )
    published = raise_for_envelope(resp)["product_id"]
    logger.info("published %s with %d records", published, len(bundle.records))
    return published
