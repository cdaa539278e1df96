"""Interpreter benchmark: evaluation time vs. policy count and policy size.

Reproduces the shape of the interpreter runtime table: a grid of
{1, 100} aggregated policies × {3, 20, 100} predicates per policy.  Each
policy is the research seller policy padded with helper predicates that
are defined but not called, so policy size grows without changing the
proof.  Absolute numbers are hardware-dependent; the ratios are what
matter.

Usage::

    python -m tollgate bench --repeats 20
"""
from __future__ import annotations

import time
from dataclasses import dataclass
from typing import Any, Dict, List, Mapping, Sequence

import numpy as np

from tollgate.paths import POLICY_CORPUS_DIR
from tollgate.tpl.aggregate import aggregate_policies
from tollgate.tpl.builtins import credential_registry
from tollgate.tpl.engine import EvaluationContext, Program, solve
from tollgate.tpl.parser import parse_policy
from tollgate.tpl.registry import BuiltinRegistry
from tollgate.tpl.terms import Atom, Compound, Integer, Policy
from tollgate.tpl.trust import StaticTrustServices

BENCH_ISSUER = "did:ex:bench-issuer"
BASE_PREDICATES = 3


@dataclass
class BenchRow:
    policies: int
    predicates: int
    mean_sec: float
    stdev_sec: float
    repeats: int


def padded_policy(policy_id: str, predicates: int) -> Policy:
    """Seller policy with ``predicates`` clauses in total (minimum 3)."""
    base = (POLICY_CORPUS_DIR / "research_seller.tpl").read_text(encoding="utf-8")
    extra = [
        f"helper{i}(X, Y) :-\n  X > {i},\n  Y == item{i}.\n"
        for i in range(max(0, predicates - BASE_PREDICATES))
    ]
    return parse_policy(base + "\n" + "\n".join(extra), id=policy_id)


def bench_presentation() -> Dict[str, Any]:
    """Structurally valid presentation document (signatures are not checked here)."""
    credential = {
        "id": "urn:cred:bench",
        "subject": "did:ex:bench-buyer",
        "issuer": BENCH_ISSUER,
        "claims": {"organization_type": "public_university"},
        "verification_key": "AA",
        "encryption_key": "AA",
        "issuer_signature": "AA",
    }
    return {
        "mainCredential": credential,
        "additional": [],
        "challenge": "00" * 32,
        "holder_signature": "AA",
    }


def bench_registry() -> BuiltinRegistry:
    services = StaticTrustServices(trustlist={"scheme": "eIDAS", "qualified": [BENCH_ISSUER]})
    return credential_registry(services)


def time_evaluation(
    program: Program,
    registry: BuiltinRegistry,
    document: Mapping[str, Any],
    repeats: int,
) -> List[float]:
    timings: List[float] = []
    for _ in range(repeats):
        context = EvaluationContext()
        handle = context.handles.register(document)
        query = Compound("accept", (handle, Integer(150), Atom("machine_learning")))
        t0 = time.perf_counter()
        answer = solve(program, query, registry, context=context)
        timings.append(time.perf_counter() - t0)
        if answer is None:
            raise RuntimeError("benchmark policy unexpectedly denied")
    return timings


def run_benchmark(
    policy_counts: Sequence[int] = (1, 100),
    predicate_counts: Sequence[int] = (3, 20, 100),
    repeats: int = 20,
) -> List[BenchRow]:
    registry = bench_registry()
    document = bench_presentation()
    rows: List[BenchRow] = []
    for count in policy_counts:
        for predicates in predicate_counts:
            members = [padded_policy(f"seller{i}", predicates) for i in range(count)]
            program = Program([aggregate_policies(members)])
            time_evaluation(program, registry, document, 2)  # warm-up
            timings = np.asarray(time_evaluation(program, registry, document, repeats))
            rows.append(
                BenchRow(
                    policies=count,
                    predicates=predicates,
                    mean_sec=float(timings.mean()),
                    stdev_sec=float(timings.std(ddof=1)) if timings.size > 1 else 0.0,
                    repeats=repeats,
                )
            )
    return rows


def scaling_ratios(rows: Sequence[BenchRow]) -> Dict[str, float]:
    """Ratios used to judge the table shape.

    ``policies`` = t(100 policies, 3 predicates) / t(1, 3);
    ``predicates`` = t(1 policy, 100 predicates) / t(1, 3).
    """
    by_key = {(r.policies, r.predicates): r.mean_sec for r in rows}
    out: Dict[str, float] = {}
    base = by_key.get((1, 3))
    if base:
        if (100, 3) in by_key:
            out["policies"] = by_key[(100, 3)] / base
        if (1, 100) in by_key:
            out["predicates"] = by_key[(1, 100)] / base
    return out


def format_table(rows: Sequence[BenchRow]) -> str:
    lines = ["# policies  # predicates/policy  run-time [s/op]"]
    for r in rows:
        lines.append(f"{r.policies:>10}  {r.predicates:>19}  {r.mean_sec:.6f} (± {r.stdev_sec:.6f})")
    return "\n".join(lines)
