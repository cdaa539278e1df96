"""Presentation checks run by a node before policy evaluation."""
from __future__ import annotations

import hmac
import logging
from typing import Callable, List, Optional

from tollgate.crypto.suite import verify_signature
from tollgate.errors import (
    BadHolderSignature,
    BadIssuerSignature,
    ChallengeMismatch,
    MalformedIdentifier,
    SubjectMismatch,
    UnknownIdentifier,
)
from tollgate.tpl.aggregate import REQUIREMENT_KEY
from tollgate.tpl.engine import core_registry, solve_all
from tollgate.tpl.terms import Atom, Compound, Policy, Text, Variable, format_term
from tollgate.tpl.trust import TrustServices

logger = logging.getLogger(__name__)

IssuerKeyLookup = Callable[[str], str]


def resolver_key_lookup(services: TrustServices) -> IssuerKeyLookup:
    """Issuer public keys come from the ``verification_key`` of the issuer's DID document."""

    def lookup(issuer: str) -> str:
        document = services.resolve(issuer)
        key = document.get("verification_key")
        if not isinstance(key, str):
            raise UnknownIdentifier(f"{issuer} publishes no verification key", identifier=issuer)
        return key

    return lookup


def verify_presentation(presentation, expected_challenge: str, issuer_key: IssuerKeyLookup) -> None:
    """Check issuer signatures, the challenge binding and the holder proof.

    Raises
    ------
    BadIssuerSignature
        If any contained credential fails issuer verification (including an
        issuer that cannot be resolved).
    ChallengeMismatch
        If the challenge is not *expected_challenge*.
    BadHolderSignature
        If the holder signature does not verify under
        ``mainCredential.verification_key``.
    """
    for credential in presentation.credentials:
        try:
            key = issuer_key(credential.issuer)
        except (UnknownIdentifier, MalformedIdentifier) as exc:
            raise BadIssuerSignature(credential.id, exc.message) from None
        if not verify_signature(key, credential.signing_payload(), credential.issuer_signature):
            raise BadIssuerSignature(credential.id)

    if not hmac.compare_digest(presentation.challenge.lower(), expected_challenge.lower()):
        raise ChallengeMismatch(
            "presentation challenge does not match the request digest",
            expected=expected_challenge,
        )

    main = presentation.main_credential
    if not verify_signature(main.verification_key, presentation.signing_payload(), presentation.holder_signature):
        raise BadHolderSignature("holder signature does not verify under the main credential key")
    logger.debug("presentation for %s verified (%d credentials)", main.subject, len(presentation.credentials))


def same_subject(presentation) -> None:
    """Raise :exc:`SubjectMismatch` unless every credential names the main subject."""
    subject = presentation.main_credential.subject
    offending = [c.id for c in presentation.additional if c.subject != subject]
    if offending:
        raise SubjectMismatch(offending)


def _requirement_name(term) -> str:
    if isinstance(term, Atom):
        return term.name
    if isinstance(term, Text):
        return term.value
    return format_term(term)


def required_credentials(policy: Policy, budget: Optional[int] = None) -> List[str]:
    """Requirement atoms declared through ``requires_credential/1``, deduplicated in order."""
    if not policy.defines(REQUIREMENT_KEY):
        return []
    query = Compound(REQUIREMENT_KEY[0], (Variable("X"),))
    kwargs = {} if budget is None else {"budget": budget}
    answers = solve_all([policy], query, core_registry(), **kwargs)
    seen: List[str] = []
    for answer in answers:
        value = answer.get("X")
        if value is None:
            continue
        name = _requirement_name(value)
        if name not in seen:
            seen.append(name)
    return seen
