"""Scripted end-to-end run on a :class:`~tollgate.deploy.LocalDeployment`.

One seller lists a dataset under the research seller policy; two buyers
with different organisation types try different computations.  Each
outcome is compared with the plaintext answer.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path
from typing import List, Optional, Sequence, Union

import numpy as np

from tollgate.client.buyer import buy
from tollgate.client.seller import SellerBundle, register_seller, sell
from tollgate.credentials.issuer import CredentialStore, TestIssuer
from tollgate.deploy import LocalDeployment
from tollgate.errors import PurchaseDenied
from tollgate.node.models import Computation
from tollgate.paths import POLICY_CORPUS_DIR

logger = logging.getLogger(__name__)


@dataclass
class DemoOutcome:
    buyer: str
    computation_type: str
    op: str
    granted: bool
    value: Optional[Union[int, Fraction]] = None
    expected: Optional[Union[int, Fraction]] = None
    denial: str = ""

    @property
    def correct(self) -> bool:
        return not self.granted or self.value == self.expected


def _plaintext(op: str, records: Sequence[int]) -> Union[int, Fraction]:
    if op == "count":
        return len(records)
    if op == "mean":
        return Fraction(sum(records), len(records))
    return sum(records)


def run_demo(root: Path, n: int = 3, records: int = 150, seed: int = 7) -> List[DemoOutcome]:
    dep = LocalDeployment(root, n=n)
    university = dep.register_issuer(TestIssuer.create("did:ex:uni-registry"))
    council = dep.register_issuer(TestIssuer.create("did:ex:research-council"))
    buyers = {
        "alice": dep.new_buyer(
            "did:ex:alice", university,
            {"organization_type": "public_university", "organization_name": "Example University"},
        ),
        "bob": dep.new_buyer("did:ex:bob", council, {"organization_type": "private_research"}),
    }

    rng = np.random.default_rng(seed)
    data = [int(v) for v in rng.integers(40, 200, size=records)]
    account = register_seller(dep.router, dep.marketplace_url, "clinic")
    bundle = SellerBundle(
        records=data,
        policy_source=(POLICY_CORPUS_DIR / "research_seller.tpl").read_text(encoding="utf-8"),
        metadata={"title": "Resting heart rate", "tags": ["health"]},
    )
    product_id = sell(bundle, account, dep.router, dep.marketplace_url, dep.storage_url)
    print(f"▶ listed {product_id} with {records} records on {n} nodes")

    scenarios = [
        ("alice", "machine_learning", "mean"),
        ("bob", "simple_statistics", "sum"),
        ("bob", "machine_learning", "sum"),
    ]
    outcomes = []
    for name, computation_type, op in scenarios:
        store: CredentialStore = buyers[name]
        outcome = DemoOutcome(name, computation_type, op, granted=False, expected=_plaintext(op, data))
        try:
            result = buy(dep.router, dep.marketplace_url, [product_id], Computation(computation_type, op), store)
        except PurchaseDenied as exc:
            outcome.denial = ", ".join(sorted({d.code or d.verdict for d in exc.decisions if d.verdict != "granted"}))
        else:
            outcome.granted = True
            outcome.value = result.value
        outcomes.append(outcome)
        logger.debug("demo outcome %s", outcome)
    return outcomes
