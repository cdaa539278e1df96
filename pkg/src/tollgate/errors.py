"""Exception hierarchy for tollgate.

Every error carries a stable snake_case :attr:`TollgateError.code` that is
used verbatim in wire envelopes (see ``docs/wire.md``).  Configuration
problems are *not* part of this hierarchy; the config loader raises plain
:exc:`ValueError` / :exc:`FileNotFoundError`.
"""
from __future__ import annotations

from typing import Any, Dict, List, Optional


class TollgateError(Exception):
    """Base class for all domain errors."""

    code: str = "tollgate_error"
    #: HTTP status used when the error crosses a service boundary.
    status: int = 400

    def __init__(self, message: str = "", **details: Any) -> None:
        super().__init__(message or self.code)
        self.message = message or self.code
        self.details: Dict[str, Any] = details

    def to_dict(self) -> Dict[str, Any]:
        body: Dict[str, Any] = {"code": self.code, "message": self.message}
        body.update(self.details)
        return body


# ── policy language ──────────────────────────────────────────────────────────


class TplError(TollgateError):
    code = "tpl_error"


class TplSyntaxError(TplError):
    code = "syntax_error"

    def __init__(self, message: str, line: int, column: int) -> None:
        super().__init__(f"{message} (line {line}, column {column})", line=line, column=column)
        self.line = line
        self.column = column


class MissingEntryPoint(TplError):
    code = "missing_entry_point"


class UnknownPredicate(TplError):
    code = "unknown_predicate"


class BudgetExceeded(TplError):
    code = "budget_exceeded"


class ArityMismatch(TplError):
    code = "arity_mismatch"


class DuplicatePolicyId(TplError):
    code = "duplicate_policy_id"


class BuiltinCollision(TplError):
    code = "builtin_collision"


class UnknownFormat(TplError):
    code = "unknown_format"


class FormatNotSet(TplError):
    code = "format_not_set"


class RegistryUnavailable(TplError):
    code = "registry_unavailable"
    status = 503


class UnknownIdentifier(TplError):
    code = "unknown_identifier"


class MalformedIdentifier(TplError):
    code = "malformed_identifier"


# ── credentials ──────────────────────────────────────────────────────────────


class CredentialError(TollgateError):
    code = "credential_error"
    status = 403


class BadHolderSignature(CredentialError):
    code = "bad_holder_signature"


class ChallengeMismatch(CredentialError):
    code = "challenge_mismatch"


class BadIssuerSignature(CredentialError):
    code = "bad_issuer_signature"

    def __init__(self, credential_id: str, reason: str = "") -> None:
        msg = f"issuer signature of credential {credential_id!r} does not verify"
        if reason:
            msg = f"{msg}: {reason}"
        super().__init__(msg, credential_id=credential_id)
        self.credential_id = credential_id


class SubjectMismatch(CredentialError):
    code = "subject_mismatch"

    def __init__(self, offending: List[str]) -> None:
        super().__init__(
            f"credentials {', '.join(offending)} do not share the main credential's subject",
            offending=list(offending),
        )
        self.offending = list(offending)


# ── crypto ───────────────────────────────────────────────────────────────────


class CryptoError(TollgateError):
    code = "crypto_error"


class DecryptionFailure(CryptoError):
    code = "decryption_failure"


# ── secret sharing ───────────────────────────────────────────────────────────


class SharingError(TollgateError):
    code = "sharing_error"


class SecretOutOfRange(SharingError):
    code = "secret_out_of_range"


class InsufficientShares(SharingError):
    code = "insufficient_shares"


class DuplicateEvaluationPoint(SharingError):
    code = "duplicate_evaluation_point"


class InvalidEvaluationPoint(SharingError):
    code = "invalid_evaluation_point"


class LengthMismatch(SharingError):
    code = "length_mismatch"


class ResultOutOfRange(SharingError):
    code = "result_out_of_range"


# ── node ─────────────────────────────────────────────────────────────────────


class NodeError(TollgateError):
    code = "node_error"
    status = 403


class PolicyHashMismatch(NodeError):
    code = "policy_hash_mismatch"


class PresentationInvalid(NodeError):
    code = "presentation_invalid"


class PolicyDenied(NodeError):
    code = "policy_denied"

    def __init__(
        self,
        message: str,
        trace: Optional[List[str]] = None,
        failed_goal: Optional[str] = None,
    ) -> None:
        super().__init__(message, trace=list(trace or []), failed_goal=failed_goal)
        self.trace = list(trace or [])
        self.failed_goal = failed_goal


class MalformedRequest(NodeError):
    code = "malformed_request"
    status = 400


class UnsupportedComputation(NodeError):
    code = "unsupported_computation"
    status = 400


class StorageUnreachable(NodeError):
    code = "storage_unreachable"
    status = 502


class PackageDecryptFailure(NodeError):
    code = "package_decrypt_failure"


# ── marketplace ──────────────────────────────────────────────────────────────


class MarketplaceError(TollgateError):
    code = "marketplace_error"


class DuplicateAccount(MarketplaceError):
    code = "duplicate_account"
    status = 409


class UnknownAccount(MarketplaceError):
    code = "unknown_account"
    status = 404


class NotASeller(MarketplaceError):
    code = "not_a_seller"
    status = 403


class PolicySyntaxError(MarketplaceError):
    code = "policy_syntax_error"


class IncompleteShareSet(MarketplaceError):
    code = "incomplete_share_set"


class DuplicateProduct(MarketplaceError):
    code = "duplicate_product"
    status = 409


class UnknownProduct(MarketplaceError):
    code = "unknown_product"
    status = 404


class NodeUnreachable(MarketplaceError):
    code = "node_unreachable"
    status = 502

    def __init__(self, index: int, reason: str = "") -> None:
        super().__init__(f"node {index} unreachable{': ' + reason if reason else ''}", index=index)
        self.index = index


# ── storage ──────────────────────────────────────────────────────────────────


class StorageError(TollgateError):
    code = "storage_error"


class TooLarge(StorageError):
    code = "too_large"
    status = 413


class NotFound(StorageError):
    code = "not_found"
    status = 404


class IntegrityError(StorageError):
    code = "integrity_error"
    status = 500


# ── client ───────────────────────────────────────────────────────────────────


class PurchaseDenied(TollgateError):
    """At least one node refused the request; no result can be reconstructed."""

    code = "purchase_denied"
    status = 403

    def __init__(self, message: str, decisions: Optional[List[Any]] = None) -> None:
        super().__init__(message)
        self.decisions = list(decisions or [])


_BY_CODE: Dict[str, type] = {}


def _index(cls: type) -> None:
    for sub in cls.__subclasses__():
        _BY_CODE.setdefault(sub.code, sub)
        _index(sub)


_index(TollgateError)


def error_class_for(code: str) -> type:
    """Return the exception class registered for a wire *code*."""
    return _BY_CODE.get(code, TollgateError)
