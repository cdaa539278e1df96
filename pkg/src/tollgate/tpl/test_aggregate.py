"""Tests for policy aggregation (logical conjunction with namespacing)."""
import os
import sys

sys.path.insert(0, os.path.join(os.path.dirname(__file__), "..", ".."))

import pytest

from tollgate.errors import ArityMismatch, DuplicatePolicyId
from tollgate.paths import FIXTURES_DIR, POLICY_CORPUS_DIR
from tollgate.tpl.aggregate import REQUIREMENT_KEY, aggregate_policies, namespace_prefix
from tollgate.tpl.builtins import credential_registry
from tollgate.tpl.engine import EvaluationContext, core_registry, solve, solve_all
from tollgate.tpl.parser import parse_policy, parse_query
from tollgate.tpl.terms import Atom, Compound, Integer
from tollgate.tpl.trust import StaticTrustServices


def _policy(source: str, id: str):
    return parse_policy(source, id=id)


def _corpus(name: str, id: str = ""):
    return parse_policy((POLICY_CORPUS_DIR / f"{name}.tpl").read_text(encoding="utf-8"), id=id or name)


def _grants(policy, query: str) -> bool:
    return solve([policy], parse_query(query), core_registry()) is not None


# ── conjunction ─────────────────────────────────────────────────────────────

def test_single_policy_behaves_like_itself():
    agg = aggregate_policies([_corpus("ml_only")])
    assert _grants(agg, "accept(x, 101, machine_learning)")
    assert not _grants(agg, "accept(x, 101, simple_statistics)")


def test_all_members_must_accept():
    agg = aggregate_policies([_corpus("ml_only"), _corpus("operator_strict", "operator")])
    assert not _grants(agg, "accept(x, 500, machine_learning)")
    assert _grants(agg, "accept(x, 1001, machine_learning)")


def test_helper_names_do_not_collide():
    a = _policy("accept(_, _, C) :- ok(C).\nok(machine_learning).", "seller-a")
    b = _policy("accept(_, _, C) :- ok(C).\nok(simple_statistics).", "seller-b")
    agg = aggregate_policies([a, b])
    # each member sees only its own ok/1, so no computation type satisfies both
    assert not _grants(agg, "accept(x, 1, machine_learning)")
    assert not _grants(agg, "accept(x, 1, simple_statistics)")
    assert _grants(aggregate_policies([a]), "accept(x, 1, machine_learning)")


def test_aggregate_source_reparses():
    agg = aggregate_policies([_corpus("research_seller", "prod-1"), _corpus("multi_org", "prod-2")])
    again = parse_policy(agg.source_text, id=agg.id)
    assert again.clauses == agg.clauses


def test_namespace_prefix_is_an_atom_prefix():
    assert namespace_prefix("prod-1", 0) == "p0_prod_1__"
    assert namespace_prefix("Operator", 2) == "p2_operator__"
    assert namespace_prefix("42", 11) == "p11_42__"


@pytest.mark.parametrize("first,second", [("Prod-1", "prod_1"), ("a.b", "a-b"), ("x", "X")])
def test_ids_differing_in_case_or_punctuation(first, second):
    ml = _policy("accept(_, _, C) :- ok(C).\nok(machine_learning).", first)
    any_type = _policy("accept(_, N, _) :- N > 10.", second)
    agg = aggregate_policies([ml, any_type])
    assert _grants(agg, "accept(x, 11, machine_learning)")
    assert not _grants(agg, "accept(x, 11, simple_statistics)")
    assert not _grants(agg, "accept(x, 10, machine_learning)")


def test_renamed_helpers_cannot_meet_across_members():
    # id "a" with helper b__x and id "a__b" with helper x concatenate to the same text
    a = _policy("accept(_, _, _) :- b__x(1).\nb__x(1).", "a")
    ab = _policy("accept(_, _, _) :- x(2).\nx(2).", "a__b")
    agg = aggregate_policies([a, ab])
    assert _grants(agg, "accept(x, 1, t)")
    heads = [c.head for c in agg.clauses[1:]]
    names = {getattr(h, "functor", getattr(h, "name", None)) for h in heads}
    assert {"p0_a__b__x", "p1_a__b__x"} <= names


# ── requirements ────────────────────────────────────────────────────────────

def test_requirements_are_unioned():
    agg = aggregate_policies([_corpus("requires_affiliation"), _corpus("requires_two"), _corpus("ml_only")])
    assert agg.defines(REQUIREMENT_KEY)
    answers = solve_all([agg], parse_query("requires_credential(X)"), core_registry())
    assert [a["X"] for a in answers] == [Atom("org_affiliation"), Atom("org_affiliation"), Atom("ethics_approval")]


def test_no_requirements_means_no_requirement_clause():
    agg = aggregate_policies([_corpus("ml_only")])
    assert not agg.defines(REQUIREMENT_KEY)


# ── errors ──────────────────────────────────────────────────────────────────

def test_empty_aggregate_is_rejected():
    with pytest.raises(ValueError):
        aggregate_policies([])


def test_duplicate_ids_are_rejected():
    with pytest.raises(DuplicatePolicyId):
        aggregate_policies([_corpus("ml_only", "p"), _corpus("always_accept", "p")])


def test_entry_point_arity_mismatch():
    two = parse_policy("allow(_, _).", id="two", entry_point=("allow", 2))
    with pytest.raises(ArityMismatch):
        aggregate_policies([_corpus("ml_only"), two])


# ── conjunction over an enumerated input space ──────────────────────────────

PAIRS = [
    ("research_seller", "ml_only"),
    ("research_seller", "statistics_only"),
    ("multi_org", "min_records_500"),
    ("helper_chain", "nested_terms"),
    ("exclude_companies", "country_restricted"),
]
BUYERS = [
    ("public_university", "did:ex:uni-registry"),
    ("private_research", "did:ex:uni-registry"),
    ("public_university", "did:ex:diploma-mill"),
]
RECORD_COUNTS = [50, 101, 200]
COMPUTATION_TYPES = ["machine_learning", "simple_statistics"]


@pytest.fixture(scope="module")
def credentials():
    return credential_registry(StaticTrustServices.from_fixtures(FIXTURES_DIR))


def _presentation(org_type: str, issuer: str) -> dict:
    credential = {
        "id": "urn:cred:1",
        "subject": "did:ex:alice",
        "issuer": issuer,
        "claims": {"organization_type": org_type},
        "verification_key": "AA",
        "encryption_key": "AA",
        "issuer_signature": "AA",
    }
    return {"mainCredential": credential, "additional": [], "challenge": "00" * 32, "holder_signature": "AA"}


def _accepts(policy, registry, document, num_records, computation_type) -> bool:
    context = EvaluationContext()
    query = Compound("accept", (context.handles.register(document), Integer(num_records), Atom(computation_type)))
    return solve([policy], query, registry, context=context) is not None


@pytest.mark.parametrize("first,second", PAIRS)
def test_aggregate_accepts_iff_every_member_accepts(credentials, first, second):
    a, b = _corpus(first, "prod-a"), _corpus(second, "prod-b")
    agg = aggregate_policies([a, b])
    outcomes = set()
    for org_type, issuer in BUYERS:
        document = _presentation(org_type, issuer)
        for count in RECORD_COUNTS:
            for computation_type in COMPUTATION_TYPES:
                alone = (
                    _accepts(a, credentials, document, count, computation_type),
                    _accepts(b, credentials, document, count, computation_type),
                )
                together = _accepts(agg, credentials, document, count, computation_type)
                assert together == all(alone), (org_type, issuer, count, computation_type, alone)
                outcomes.add(alone)
    assert len(outcomes) > 1
