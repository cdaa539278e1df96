"""Credential and presentation documents.

Both types are immutable views over the JSON documents that travel on the
wire; :meth:`to_dict` yields exactly the document the credential builtins
navigate with the ``w3c_verifiableCredential`` and
``w3c_verifiablePresentation`` formats.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Dict, Mapping, Tuple

from tollgate.canonical import canonical_bytes
from tollgate.tpl.trust import DID_RE

CHALLENGE_HEX_LEN = 64


def _require_str(raw: Mapping[str, Any], key: str) -> str:
    value = raw.get(key)
    if not isinstance(value, str):
        raise ValueError(f"credential field {key!r} must be a string")
    return value


@dataclass(frozen=True)
class Credential:
    id: str
    subject: str
    issuer: str
    claims: Mapping[str, Any]
    verification_key: str
    encryption_key: str
    issuer_signature: str = ""

    def unsigned(self) -> Dict[str, Any]:
        return {
            "id": self.id,
            "subject": self.subject,
            "issuer": self.issuer,
            "claims": dict(self.claims),
            "verification_key": self.verification_key,
            "encryption_key": self.encryption_key,
        }

    def signing_payload(self) -> bytes:
        """Canonical bytes covered by :attr:`issuer_signature`."""
        return canonical_bytes(self.unsigned())

    def to_dict(self) -> Dict[str, Any]:
        body = self.unsigned()
        body["issuer_signature"] = self.issuer_signature
        return body

    @classmethod
    def from_dict(cls, raw: Mapping[str, Any]) -> "Credential":
        if not isinstance(raw, Mapping):
            raise ValueError("credential must be a JSON object")
        claims = raw.get("claims")
        if not isinstance(claims, Mapping):
            raise ValueError("credential field 'claims' must be an object")
        subject = _require_str(raw, "subject")
        if not DID_RE.match(subject):
            raise ValueError(f"credential subject {subject!r} is not a DID")
        return cls(
            id=_require_str(raw, "id"),
            subject=subject,
            issuer=_require_str(raw, "issuer"),
            claims=dict(claims),
            verification_key=_require_str(raw, "verification_key"),
            encryption_key=_require_str(raw, "encryption_key"),
            issuer_signature=_require_str(raw, "issuer_signature"),
        )


@dataclass(frozen=True)
class Presentation:
    main_credential: Credential
    additional: Tuple[Credential, ...] = field(default_factory=tuple)
    challenge: str = ""
    holder_signature: str = ""

    @property
    def credentials(self) -> Tuple[Credential, ...]:
        return (self.main_credential,) + tuple(self.additional)

    def signing_payload(self) -> bytes:
        """Canonical bytes covered by :attr:`holder_signature`."""
        return canonical_bytes(
            {
                "mainCredential": self.main_credential.to_dict(),
                "additional": [c.to_dict() for c in self.additional],
                "challenge": self.challenge,
            }
        )

    def to_dict(self) -> Dict[str, Any]:
        return {
            "mainCredential": self.main_credential.to_dict(),
            "additional": [c.to_dict() for c in self.additional],
            "challenge": self.challenge,
            "holder_signature": self.holder_signature,
        }

    @classmethod
    def from_dict(cls, raw: Mapping[str, Any]) -> "Presentation":
        if not isinstance(raw, Mapping):
            raise ValueError("presentation must be a JSON object")
        additional = raw.get("additional", [])
        if not isinstance(additional, list):
            raise ValueError("presentation field 'additional' must be a list")
        challenge = raw.get("challenge")
        if not isinstance(challenge, str) or len(challenge) != CHALLENGE_HEX_LEN:
            raise ValueError("presentation challenge must be 32 bytes of hex")
        try:
            bytes.fromhex(challenge)
        except ValueError:
            raise ValueError("presentation challenge must be 32 bytes of hex") from None
        signature = raw.get("holder_signature")
        if not isinstance(signature, str):
            raise ValueError("presentation field 'holder_signature' must be a string")
        return cls(
            main_credential=Credential.from_dict(raw.get("mainCredential")),  # type: ignore[arg-type]
            additional=tuple(Credential.from_dict(c) for c in additional),
            challenge=challenge,
            holder_signature=signature,
        )
