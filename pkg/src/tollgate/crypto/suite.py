"""Cryptographic primitives for tollgate.

=====================  ====================================================
hashing                SHA-256 (policy binding, blob ids, request digests)
signatures             Ed25519 (issuer and holder signatures)
key agreement          X25519 + HKDF-SHA-256
AEAD                   ChaCha20-Poly1305 (12-byte random nonces)
=====================  ====================================================

Package sealing and result encryption share one hybrid construction: an
ephemeral X25519 key agrees a secret with the recipient key, HKDF derives a
one-time AEAD key (domain-separated by ``info``), and the AEAD covers the
caller's associated data.  Keys and ciphertexts travel as unpadded
base64url strings.
"""
from __future__ import annotations

import base64
import hashlib
import os
from dataclasses import dataclass
from typing import Any, Dict, Tuple, Union

from cryptography.exceptions import InvalidSignature, InvalidTag
from cryptography.hazmat.primitives import hashes, serialization
from cryptography.hazmat.primitives.asymmetric.ed25519 import (
    Ed25519PrivateKey,
    Ed25519PublicKey,
)
from cryptography.hazmat.primitives.asymmetric.x25519 import (
    X25519PrivateKey,
    X25519PublicKey,
)
from cryptography.hazmat.primitives.ciphers.aead import ChaCha20Poly1305
from cryptography.hazmat.primitives.kdf.hkdf import HKDF

from tollgate.errors import DecryptionFailure

NONCE_SIZE = 12
KEY_SIZE = 32
PACKAGE_INFO = b"tollgate/package/v1"
RESULT_INFO = b"tollgate/result/v1"

_RAW = serialization.Encoding.Raw
_RAW_PUB = serialization.PublicFormat.Raw
_RAW_PRIV = serialization.PrivateFormat.Raw
_NO_ENC = serialization.NoEncryption()


# ── encoding helpers ───────────────────────────────────────────────────────


def b64url_encode(data: bytes) -> str:
    return base64.urlsafe_b64encode(data).rstrip(b"=").decode("ascii")


def b64url_decode(text: str) -> bytes:
    try:
        return base64.urlsafe_b64decode(text + "=" * (-len(text) % 4))
    except (ValueError, TypeError) as exc:
        raise ValueError(f"invalid base64url value: {exc}") from None


# ── hashing ────────────────────────────────────────────────────────────────


def sha256_hex(data: bytes) -> str:
    return hashlib.sha256(data).hexdigest()


def hash_policy(source: Union[bytes, str]) -> str:
    """SHA-256 (hex) of the policy's exact source bytes."""
    if isinstance(source, str):
        source = source.encode("utf-8")
    return sha256_hex(source)


# ── key pairs ──────────────────────────────────────────────────────────────


@dataclass(frozen=True)
class KeyPair:
    """Raw key pair, both halves base64url encoded."""

    public: str
    secret: str

    def to_dict(self) -> Dict[str, str]:
        return {"public": self.public, "secret": self.secret}

    @classmethod
    def from_dict(cls, raw: Dict[str, str]) -> "KeyPair":
        return cls(public=raw["public"], secret=raw["secret"])


def generate_encryption_keypair() -> KeyPair:
    sk = X25519PrivateKey.generate()
    return KeyPair(
        public=b64url_encode(sk.public_key().public_bytes(_RAW, _RAW_PUB)),
        secret=b64url_encode(sk.private_bytes(_RAW, _RAW_PRIV, _NO_ENC)),
    )


def generate_signing_keypair() -> KeyPair:
    sk = Ed25519PrivateKey.generate()
    return KeyPair(
        public=b64url_encode(sk.public_key().public_bytes(_RAW, _RAW_PUB)),
        secret=b64url_encode(sk.private_bytes(_RAW, _RAW_PRIV, _NO_ENC)),
    )


# ── signatures ─────────────────────────────────────────────────────────────


def sign(secret_key: str, message: bytes) -> str:
    sk = Ed25519PrivateKey.from_private_bytes(b64url_decode(secret_key))
    return b64url_encode(sk.sign(message))


def verify_signature(public_key: str, message: bytes, signature: str) -> bool:
    """True iff *signature* is valid; malformed keys or signatures are invalid."""
    try:
        pk = Ed25519PublicKey.from_public_bytes(b64url_decode(public_key))
        pk.verify(b64url_decode(signature), message)
    except (InvalidSignature, ValueError):
        return False
    return True


# ── hybrid encryption ──────────────────────────────────────────────────────


def _derive(shared: bytes, ephemeral_public: bytes, recipient_public: bytes, info: bytes) -> bytes:
    return HKDF(
        algorithm=hashes.SHA256(),
        length=KEY_SIZE,
        salt=ephemeral_public + recipient_public,
        info=info,
    ).derive(shared)


def hybrid_encrypt(plaintext: bytes, recipient_public: str, aad: bytes, info: bytes) -> Dict[str, str]:
    recipient = b64url_decode(recipient_public)
    peer = X25519PublicKey.from_public_bytes(recipient)
    ephemeral = X25519PrivateKey.generate()
    ephemeral_public = ephemeral.public_key().public_bytes(_RAW, _RAW_PUB)
    key = _derive(ephemeral.exchange(peer), ephemeral_public, recipient, info)
    nonce = os.urandom(NONCE_SIZE)
    ciphertext = ChaCha20Poly1305(key).encrypt(nonce, plaintext, aad)
    return {
        "ephemeral_public_key": b64url_encode(ephemeral_public),
        "nonce": b64url_encode(nonce),
        "ciphertext": b64url_encode(ciphertext),
    }


def hybrid_decrypt(envelope: Dict[str, str], recipient_secret: str, aad: bytes, info: bytes) -> bytes:
    try:
        sk = X25519PrivateKey.from_private_bytes(b64url_decode(recipient_secret))
        recipient = sk.public_key().public_bytes(_RAW, _RAW_PUB)
        ephemeral_public = b64url_decode(envelope["ephemeral_public_key"])
        shared = sk.exchange(X25519PublicKey.from_public_bytes(ephemeral_public))
        key = _derive(shared, ephemeral_public, recipient, info)
        return ChaCha20Poly1305(key).decrypt(
            b64url_decode(envelope["nonce"]),
            b64url_decode(envelope["ciphertext"]),
            aad,
        )
    except (InvalidTag, ValueError, KeyError, TypeError) as exc:
        raise DecryptionFailure(f"cannot decrypt envelope: {type(exc).__name__}") from None


# ── sealed packages (seller → node) ────────────────────────────────────────


@dataclass(frozen=True)
class SealedPackage:
    recipient: int
    ephemeral_public_key: str
    nonce: str
    ciphertext: str
    associated_data: str

    def to_dict(self) -> Dict[str, Any]:
        return {
            "recipient": self.recipient,
            "ephemeral_public_key": self.ephemeral_public_key,
            "nonce": self.nonce,
            "ciphertext": self.ciphertext,
            "associated_data": self.associated_data,
        }

    @classmethod
    def from_dict(cls, raw: Dict[str, Any]) -> "SealedPackage":
        try:
            return cls(
                recipient=int(raw["recipient"]),
                ephemeral_public_key=str(raw["ephemeral_public_key"]),
                nonce=str(raw["nonce"]),
                ciphertext=str(raw["ciphertext"]),
                associated_data=str(raw["associated_data"]),
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise DecryptionFailure(f"malformed sealed package: {exc}") from None


def seal_for_node(package: bytes, node_public_key: str, product_id: str, recipient: int) -> SealedPackage:
    """Encrypt a canonical DataPackage for one node; *product_id* is the AAD."""
    envelope = hybrid_encrypt(package, node_public_key, product_id.encode("utf-8"), PACKAGE_INFO)
    return SealedPackage(recipient=recipient, associated_data=product_id, **envelope)


def open_from_seller(sealed: SealedPackage, node_secret_key: str) -> bytes:
    """Inverse of :func:`seal_for_node`; raises :exc:`DecryptionFailure`."""
    return hybrid_decrypt(
        {
            "ephemeral_public_key": sealed.ephemeral_public_key,
            "nonce": sealed.nonce,
            "ciphertext": sealed.ciphertext,
        },
        node_secret_key,
        sealed.associated_data.encode("utf-8"),
        PACKAGE_INFO,
    )


# ── result encryption (node → buyer) ───────────────────────────────────────


def encrypt_result(share: bytes, buyer_encryption_key: str, request_id: str = "") -> Dict[str, str]:
    return hybrid_encrypt(share, buyer_encryption_key, request_id.encode("utf-8"), RESULT_INFO)


def decrypt_result(envelope: Dict[str, str], buyer_secret_key: str, request_id: str = "") -> bytes:
    return hybrid_decrypt(envelope, buyer_secret_key, request_id.encode("utf-8"), RESULT_INFO)


def nonce_of(envelope: Union[SealedPackage, Dict[str, str]]) -> bytes:
    value = envelope.nonce if isinstance(envelope, SealedPackage) else envelope["nonce"]
    return b64url_decode(value)


def split_keypair(pair: KeyPair) -> Tuple[str, str]:
    return pair.public, pair.secret
