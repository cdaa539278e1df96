"""Tests for credentials, presentations and their verification."""
import os
import sys

sys.path.insert(0, os.path.join(os.path.dirname(__file__), "..", ".."))

import pytest

from tollgate.credentials.issuer import BuyerIdentity, CredentialStore, TestIssuer, build_presentation
from tollgate.credentials.model import Credential, Presentation
from tollgate.credentials.verify import (
    required_credentials,
    resolver_key_lookup,
    same_subject,
    verify_presentation,
)
from tollgate.errors import BadHolderSignature, BadIssuerSignature, ChallengeMismatch, SubjectMismatch
from tollgate.paths import POLICY_CORPUS_DIR
from tollgate.tpl.aggregate import aggregate_policies
from tollgate.tpl.parser import parse_policy
from tollgate.tpl.trust import StaticTrustServices

CHALLENGE = "ab" * 32


# ── fixtures ────────────────────────────────────────────────────────────────

@pytest.fixture
def world():
    issuer = TestIssuer.create("did:ex:uni-registry")
    council = TestIssuer.create("did:ex:research-council")
    dids = {}
    issuer.register(dids)
    council.register(dids)
    services = StaticTrustServices(dids=dids)
    alice = BuyerIdentity.create("did:ex:alice")
    return issuer, council, alice, resolver_key_lookup(services)


def _corpus(name: str):
    return parse_policy((POLICY_CORPUS_DIR / f"{name}.tpl").read_text(encoding="utf-8"), id=name)


# ── documents ───────────────────────────────────────────────────────────────

def test_credential_document_round_trip(world):
    issuer, _, alice, _ = world
    cred = issuer.issue(alice, {"organization_type": "public_university"})
    assert Credential.from_dict(cred.to_dict()) == cred
    assert cred.subject == alice.did
    assert cred.encryption_key == alice.encryption.public


def test_presentation_document_round_trip(world):
    issuer, council, alice, _ = world
    main = issuer.issue(alice, {"organization_type": "public_university"})
    extra = council.issue(alice, {"type": "ethics_approval"})
    vp = alice.present(main, [extra], CHALLENGE)
    again = Presentation.from_dict(vp.to_dict())
    assert again == vp
    assert [c.id for c in again.credentials] == [main.id, extra.id]


@pytest.mark.parametrize(
    "mutate",
    [
        lambda d: d.update(challenge="xyz"),
        lambda d: d.update(challenge="zz" * 32),
        lambda d: d.update(additional={}),
        lambda d: d.pop("holder_signature"),
        lambda d: d["mainCredential"].update(subject="alice"),
        lambda d: d["mainCredential"].update(claims=[]),
    ],
)
def test_malformed_presentation_documents(world, mutate):
    issuer, _, alice, _ = world
    doc = alice.present(issuer.issue(alice, {}), [], CHALLENGE).to_dict()
    mutate(doc)
    with pytest.raises(ValueError):
        Presentation.from_dict(doc)


# ── verify_presentation ─────────────────────────────────────────────────────

def test_valid_presentation_verifies(world):
    issuer, council, alice, lookup = world
    vp = alice.present(issuer.issue(alice, {}), [council.issue(alice, {})], CHALLENGE)
    verify_presentation(vp, CHALLENGE, lookup)
    verify_presentation(vp, CHALLENGE.upper(), lookup)


def test_wrong_challenge(world):
    issuer, _, alice, lookup = world
    vp = alice.present(issuer.issue(alice, {}), [], CHALLENGE)
    with pytest.raises(ChallengeMismatch):
        verify_presentation(vp, "cd" * 32, lookup)


def test_holder_signature_from_another_key(world):
    issuer, _, alice, lookup = world
    mallory = BuyerIdentity.create("did:ex:mallory")
    vp = build_presentation(issuer.issue(alice, {}), [], CHALLENGE, mallory.signing.secret)
    with pytest.raises(BadHolderSignature):
        verify_presentation(vp, CHALLENGE, lookup)


def test_edited_claims_break_issuer_signature(world):
    issuer, _, alice, lookup = world
    cred = issuer.issue(alice, {"organization_type": "private_research"})
    forged = Credential(**{**cred.to_dict(), "claims": {"organization_type": "public_university"}})
    vp = alice.present(forged, [], CHALLENGE)
    with pytest.raises(BadIssuerSignature) as info:
        verify_presentation(vp, CHALLENGE, lookup)
    assert info.value.credential_id == cred.id


def test_unresolvable_issuer(world):
    _, _, alice, lookup = world
    rogue = TestIssuer.create("did:ex:rogue")
    vp = alice.present(rogue.issue(alice, {}), [], CHALLENGE)
    with pytest.raises(BadIssuerSignature):
        verify_presentation(vp, CHALLENGE, lookup)


def test_issuer_checked_before_challenge(world):
    _, _, alice, lookup = world
    rogue = TestIssuer.create("did:ex:rogue")
    vp = alice.present(rogue.issue(alice, {}), [], CHALLENGE)
    with pytest.raises(BadIssuerSignature):
        verify_presentation(vp, "cd" * 32, lookup)


# ── same_subject ────────────────────────────────────────────────────────────

def test_same_subject_accepts_matching_credentials(world):
    issuer, council, alice, _ = world
    vp = alice.present(issuer.issue(alice, {}), [council.issue(alice, {})], CHALLENGE)
    same_subject(vp)


def test_foreign_credential_is_rejected(world):
    issuer, council, alice, _ = world
    bob = BuyerIdentity.create("did:ex:bob")
    bobs = council.issue(bob, {"type": "ethics_approval"})
    vp = alice.present(issuer.issue(alice, {}), [bobs], CHALLENGE)
    with pytest.raises(SubjectMismatch) as info:
        same_subject(vp)
    assert info.value.offending == [bobs.id]


def test_same_subject_ignores_order(world):
    issuer, council, alice, _ = world
    extras = [council.issue(alice, {"n": i}) for i in range(3)]
    for ordering in (extras, list(reversed(extras))):
        same_subject(alice.present(issuer.issue(alice, {}), ordering, CHALLENGE))


# ── required_credentials ────────────────────────────────────────────────────

def test_required_credentials():
    assert required_credentials(_corpus("research_seller")) == []
    assert required_credentials(_corpus("requires_affiliation")) == ["org_affiliation"]
    agg = aggregate_policies([_corpus("requires_affiliation"), _corpus("requires_two")])
    assert required_credentials(agg) == ["org_affiliation", "ethics_approval"]


# ── credential store ────────────────────────────────────────────────────────

def test_store_save_load_and_selection(world, tmp_path):
    issuer, council, alice, _ = world
    main = issuer.issue(alice, {"organization_type": "public_university"})
    store = CredentialStore(identity=alice, main_id=main.id, credentials=[main])
    ethics = council.issue(alice, {"type": "ethics_approval"})
    affiliation = council.issue(alice, {"type": "org_affiliation"})
    store.add(ethics, provides=["ethics_approval"])
    store.add(affiliation, provides=["org_affiliation"])

    path = tmp_path / "creds.json"
    store.save(path)
    loaded = CredentialStore.load(path)
    assert loaded.main == main
    assert loaded.identity == alice
    assert [c.id for c in loaded.additional_for(["org_affiliation"])] == [affiliation.id]
    assert [c.id for c in loaded.additional_for(["org_affiliation", "ethics_approval"])] == [ethics.id, affiliation.id]
    assert loaded.additional_for([]) == []


def test_store_missing_file(tmp_path):
    with pytest.raises(FileNotFoundError):
        CredentialStore.load(tmp_path / "absent.json")


def test_store_bad_file(tmp_path):
    path = tmp_path / "bad.json"
    path.write_text('{"identity": {}}', encoding="utf-8")
    with pytest.raises(ValueError):
        CredentialStore.load(path)
