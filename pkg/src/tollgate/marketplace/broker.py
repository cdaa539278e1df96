"""Marketplace logic: accounts, catalog, pre-check and node fan-out.

The marketplace never evaluates policies beyond listing required
credentials, and never opens packages or result ciphertexts; node responses
are relayed as the exact text the nodes returned.
"""
from __future__ import annotations

import concurrent.futures
import logging
import re
import time
import uuid
from typing import Any, Dict, List, Mapping, Optional, Sequence

import requests

from tollgate.credentials.verify import required_credentials
from tollgate.errors import (
    DuplicateAccount,
    DuplicateProduct,
    IncompleteShareSet,
    MarketplaceError,
    NodeUnreachable,
    NotASeller,
    PolicySyntaxError,
    TplError,
    UnknownAccount,
    UnknownProduct,
)
from tollgate.http import raise_for_envelope
from tollgate.marketplace.store import KeyValueStore
from tollgate.node.models import OPERATIONS, ComputationRequest, ProductRef
from tollgate.tpl.aggregate import aggregate_policies
from tollgate.tpl.parser import parse_policy

logger = logging.getLogger(__name__)

ROLES = ("seller", "buyer")
DEFAULT_PAGE_SIZE = 50
PRODUCT_ID_RE = re.compile(r"[A-Za-z0-9][A-Za-z0-9_.-]{0,63}\Z")


def new_product_id() -> str:
    return f"prod-{uuid.uuid4().hex[:16]}"


class Marketplace:
    def __init__(
        self,
        store: KeyValueStore,
        node_urls: Mapping[int, str],
        session: Any,
        fanout_timeout: float = 30.0,
    ) -> None:
        self.store = store
        self.node_urls = {int(k): v.rstrip("/") for k, v in node_urls.items()}
        self.session = session
        self.fanout_timeout = fanout_timeout
        self._directory: Optional[List[Dict[str, Any]]] = None

    @property
    def n(self) -> int:
        return len(self.node_urls)

    # ── accounts ──────────────────────────────────────────────────────────

    def node_directory(self) -> List[Dict[str, Any]]:
        """Public package keys of every node, fetched once from ``/pubkeys``."""
        if self._directory is None:
            directory = []
            for index, url in sorted(self.node_urls.items()):
                try:
                    resp = self.session.get(f"{url}/pubkeys", timeout=self.fanout_timeout)
                except requests.RequestException as exc:
                    raise NodeUnreachable(index, str(exc)) from None
                info = raise_for_envelope(resp)
                directory.append({"index": index, "url": url, "public_key": info["public_key"]})
            self._directory = directory
        return list(self._directory)

    def register_account(self, name: str, role: str, info: Optional[Mapping[str, Any]] = None) -> Dict[str, Any]:
        if role not in ROLES:
            raise MarketplaceError(f"role must be one of {', '.join(ROLES)}, got {role!r}")
        if not name:
            raise MarketplaceError("account name must not be empty")
        account_id = f"acct-{uuid.uuid4().hex[:16]}"
        if not self.store.insert("account_names", name, account_id):
            raise DuplicateAccount(f"an account named {name!r} already exists", name=name)
        self.store.put("accounts", account_id, {"id": account_id, "name": name, "role": role, "info": dict(info or {})})
        logger.info("registered %s account %s", role, account_id)
        return {"account_id": account_id, "role": role, "n": self.n, "nodes": self.node_directory()}

    def _account(self, account_id: str) -> Dict[str, Any]:
        account = self.store.get("accounts", account_id)
        if account is None:
            raise UnknownAccount(f"no account {account_id!r}", account_id=account_id)
        return account

    # ── catalog ───────────────────────────────────────────────────────────

    def publish_product(self, seller_id: str, product: Mapping[str, Any]) -> str:
        """List a product.

        Raises
        ------
        UnknownAccount / NotASeller
            If *seller_id* is unknown or not a seller account.
        PolicySyntaxError
            If the policy does not parse or has no ``accept/3``.
        IncompleteShareSet
            Unless exactly one package URL per node index 1..N is given.
        DuplicateProduct
            If the proposed product id is taken.
        """
        if self._account(seller_id)["role"] != "seller":
            raise NotASeller(f"account {seller_id} may not publish products", account_id=seller_id)

        product_id = str(product.get("product_id") or new_product_id())
        if not PRODUCT_ID_RE.match(product_id):
            raise MarketplaceError(f"product id {product_id!r} is not allowed", product_id=product_id)
        policy = str(product.get("policy", ""))
        try:
            parse_policy(policy, id=product_id)
        except TplError as exc:
            raise PolicySyntaxError(f"policy rejected: {exc.message}", **exc.details) from None

        raw_urls = product.get("package_urls") or {}
        urls = {int(k): str(v) for k, v in dict(raw_urls).items()}
        expected = set(range(1, self.n + 1))
        if set(urls) != expected:
            missing = sorted(expected - set(urls))
            raise IncompleteShareSet(
                f"package URLs must cover nodes 1..{self.n}; missing {missing}",
                missing=missing,
            )

        entry = {
            "product_id": product_id,
            "seller_id": seller_id,
            "metadata": {
                "title": str(product.get("title", "")),
                "description": str(product.get("description", "")),
                "record_count": int(product.get("record_count", 0)),
                "tags": [str(t) for t in product.get("tags", [])],
            },
            "policy": policy,
            "package_urls": {str(k): v for k, v in sorted(urls.items())},
        }
        if not self.store.insert("products", product_id, entry):
            raise DuplicateProduct(f"product {product_id} already exists", product_id=product_id)
        logger.info("published %s by %s (%d records declared)", product_id, seller_id, entry["metadata"]["record_count"])
        return product_id

    def get_product(self, product_id: str) -> Dict[str, Any]:
        product = self.store.get("products", product_id)
        if product is None:
            raise UnknownProduct(f"no product {product_id!r}", product_id=product_id)
        return product

    def search(
        self,
        query: str = "",
        tags: Sequence[str] = (),
        cursor: Optional[str] = None,
        limit: int = DEFAULT_PAGE_SIZE,
    ) -> Dict[str, Any]:
        """Products matching *query* (title/description substring) and all *tags*, ordered by id.

        Raises
        ------
        MarketplaceError
            If *limit* is below 1.
        """
        if limit < 1:
            raise MarketplaceError(f"limit must be at least 1, got {limit}", limit=limit)
        needle = query.lower().strip()
        wanted = set(tags)
        page: List[Dict[str, Any]] = []
        next_cursor = None
        for product_id, product in self.store.items("products", after=cursor):
            meta = product["metadata"]
            text = f"{meta['title']}\n{meta['description']}".lower()
            if needle and needle not in text:
                continue
            if wanted and not wanted.issubset(meta["tags"]):
                continue
            if len(page) == limit:
                next_cursor = page[-1]["product_id"]
                break
            page.append({"product_id": product_id, "seller_id": product["seller_id"], **meta})
        return {"products": page, "next_cursor": next_cursor}

    # ── buying ────────────────────────────────────────────────────────────

    def precheck(self, product_ids: Sequence[str], computation: Mapping[str, Any]) -> Dict[str, Any]:
        """Advisory check: op support and product existence, plus required credentials and N."""
        products = [self.get_product(pid) for pid in product_ids]
        op = computation.get("op")
        feasible = bool(products) and op in OPERATIONS
        policies = [parse_policy(p["policy"], id=p["product_id"]) for p in products]
        required = required_credentials(aggregate_policies(policies)) if policies else []
        refs = [
            ProductRef(p["product_id"], {int(k): v for k, v in p["package_urls"].items()}, p["policy"]).to_dict()
            for p in products
        ]
        return {"feasible": feasible, "required": required, "products": refs, "n": self.n}

    def _forward(self, index: int, body: Mapping[str, Any]) -> Dict[str, Any]:
        url = f"{self.node_urls[index]}/compute"
        try:
            resp = self.session.post(url, json=body, timeout=self.fanout_timeout)
        except requests.RequestException as exc:
            return {"node_index": index, "error": NodeUnreachable(index, str(exc)).to_dict()}
        return {"node_index": index, "status": resp.status_code, "body": resp.content.decode("utf-8")}

    def submit(self, request: Mapping[str, Any]) -> List[Dict[str, Any]]:
        """Forward *request* unchanged to every node in parallel.

        Each entry is ``{"node_index", "status", "body"}`` with the node's
        response text, or ``{"node_index", "error"}`` for an unreachable node.
        """
        parsed = ComputationRequest.from_dict(request)
        indices = sorted(self.node_urls)
        deadline = time.monotonic() + self.fanout_timeout
        pool = concurrent.futures.ThreadPoolExecutor(max_workers=len(indices))
        try:
            futures = {i: pool.submit(self._forward, i, request) for i in indices}
            responses = []
            for index in indices:
                try:
                    remaining = max(0.0, deadline - time.monotonic())
                    responses.append(futures[index].result(timeout=remaining))
                except concurrent.futures.TimeoutError:
                    responses.append(
                        {"node_index": index, "error": NodeUnreachable(index, "timed out").to_dict()}
                    )
        finally:
            # stragglers finish in the background; their answers are dropped
            pool.shutdown(wait=False, cancel_futures=True)
        logger.info("request %s fanned out to %d nodes", parsed.request_id, len(indices))
        return responses
