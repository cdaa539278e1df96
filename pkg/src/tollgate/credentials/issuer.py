"""Test issuer, buyer identities and the buyer's credential store.

Usage::

    from tollgate.credentials.issuer import BuyerIdentity, TestIssuer

    issuer = TestIssuer.create("did:ex:uni-registry")
    alice = BuyerIdentity.create("did:ex:alice")
    cred = issuer.issue(alice, {"organization_type": "public_university"})
    vp = alice.present(cred, [], challenge=request_digest)
"""
from __future__ import annotations

import json
import uuid
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Mapping, MutableMapping, Optional, Sequence

from tollgate.credentials.model import Credential, Presentation
from tollgate.crypto.suite import (
    KeyPair,
    generate_encryption_keypair,
    generate_signing_keypair,
    sign,
)
from tollgate.tpl.trust import check_did


@dataclass(frozen=True)
class TestIssuer:
    """An issuer with an Ed25519 key; stands in for a qualified authority."""

    __test__ = False  # not a pytest class

    did: str
    keys: KeyPair

    @classmethod
    def create(cls, did: str) -> "TestIssuer":
        return cls(did=check_did(did), keys=generate_signing_keypair())

    def did_document(self) -> Dict[str, Any]:
        return {"id": self.did, "verification_key": self.keys.public}

    def register(self, dids: MutableMapping[str, Mapping[str, Any]]) -> None:
        """Publish this issuer's DID document into a resolver fixture mapping."""
        dids[self.did] = self.did_document()

    def issue(
        self,
        holder: "BuyerIdentity",
        claims: Mapping[str, Any],
        credential_id: Optional[str] = None,
        subject: Optional[str] = None,
    ) -> Credential:
        unsigned = Credential(
            id=credential_id or f"urn:uuid:{uuid.uuid4()}",
            subject=subject or holder.did,
            issuer=self.did,
            claims=dict(claims),
            verification_key=holder.signing.public,
            encryption_key=holder.encryption.public,
        )
        return Credential(
            **{**unsigned.unsigned(), "issuer_signature": sign(self.keys.secret, unsigned.signing_payload())}
        )


@dataclass(frozen=True)
class BuyerIdentity:
    did: str
    signing: KeyPair
    encryption: KeyPair

    @classmethod
    def create(cls, did: str) -> "BuyerIdentity":
        return cls(
            did=check_did(did),
            signing=generate_signing_keypair(),
            encryption=generate_encryption_keypair(),
        )

    def did_document(self) -> Dict[str, Any]:
        return {
            "id": self.did,
            "verification_key": self.signing.public,
            "encryption_key": self.encryption.public,
        }

    def present(
        self,
        main: Credential,
        additional: Sequence[Credential],
        challenge: str,
    ) -> Presentation:
        """Bundle credentials and sign them together with *challenge*."""
        return build_presentation(main, additional, challenge, self.signing.secret)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "did": self.did,
            "signing": self.signing.to_dict(),
            "encryption": self.encryption.to_dict(),
        }

    @classmethod
    def from_dict(cls, raw: Mapping[str, Any]) -> "BuyerIdentity":
        return cls(
            did=raw["did"],
            signing=KeyPair.from_dict(raw["signing"]),
            encryption=KeyPair.from_dict(raw["encryption"]),
        )


def build_presentation(
    main: Credential,
    additional: Sequence[Credential],
    challenge: str,
    holder_secret: str,
) -> Presentation:
    draft = Presentation(main_credential=main, additional=tuple(additional), challenge=challenge)
    return Presentation(
        main_credential=main,
        additional=tuple(additional),
        challenge=challenge,
        holder_signature=sign(holder_secret, draft.signing_payload()),
    )


# ── credential store ───────────────────────────────────────────────────────


@dataclass
class CredentialStore:
    """JSON file holding one buyer identity and the credentials issued to it.

    Layout::

        {"identity": {...}, "main": "<credential id>", "credentials": [{...}, ...]}

    ``credentials`` entries may carry a ``provides`` list naming the
    requirement atoms they satisfy (e.g. ``["org_affiliation"]``).
    """

    identity: BuyerIdentity
    main_id: str
    credentials: List[Credential] = field(default_factory=list)
    provides: Dict[str, List[str]] = field(default_factory=dict)

    @property
    def main(self) -> Credential:
        for c in self.credentials:
            if c.id == self.main_id:
                return c
        raise ValueError(f"credential store has no main credential {self.main_id!r}")

    def additional_for(self, requirements: Sequence[str]) -> List[Credential]:
        """Credentials other than the main one that cover *requirements*, in store order."""
        wanted = set(requirements)
        return [
            c
            for c in self.credentials
            if c.id != self.main_id and wanted.intersection(self.provides.get(c.id, []))
        ]

    def add(self, credential: Credential, provides: Sequence[str] = ()) -> None:
        self.credentials.append(credential)
        if provides:
            self.provides[credential.id] = list(provides)

    def to_dict(self) -> Dict[str, Any]:
        entries = []
        for c in self.credentials:
            entry = c.to_dict()
            if c.id in self.provides:
                entry["provides"] = list(self.provides[c.id])
            entries.append(entry)
        return {"identity": self.identity.to_dict(), "main": self.main_id, "credentials": entries}

    def save(self, path: Path) -> None:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(json.dumps(self.to_dict(), indent=2), encoding="utf-8")

    @classmethod
    def load(cls, path: Path) -> "CredentialStore":
        """Raises :exc:`FileNotFoundError` or :exc:`ValueError` on a bad file."""
        if not path.exists():
            raise FileNotFoundError(f"Credential store not found: {path}")
        try:
            raw = json.loads(path.read_text(encoding="utf-8"))
            credentials: List[Credential] = []
            provides: Dict[str, List[str]] = {}
            for entry in raw["credentials"]:
                credential = Credential.from_dict({k: v for k, v in entry.items() if k != "provides"})
                credentials.append(credential)
                if entry.get("provides"):
                    provides[credential.id] = list(entry["provides"])
            return cls(
                identity=BuyerIdentity.from_dict(raw["identity"]),
                main_id=raw["main"],
                credentials=credentials,
                provides=provides,
            )
        except (KeyError, TypeError, json.JSONDecodeError) as exc:
            raise ValueError(f"Credential store {path} is malformed: {exc}") from None
