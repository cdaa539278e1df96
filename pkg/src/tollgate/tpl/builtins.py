"""Credential builtins used by seller policies.

========================  =====================================================
``set_format(H, F)``      bind format ``F`` to handle ``H`` if it validates
``extract(H, Field, V)``  read ``Field`` through ``H``'s format, unify with V
``check_eIDAS_qualified(I)``  issuer ``I`` is on the qualified trust list
``check_not_revoked(H)``  credential behind ``H`` is not revoked
``resolve_subject(D, H)`` resolve identifier ``D`` to a document handle
========================  =====================================================

All builtins are deterministic (at most one solution) and pure functions of
their arguments for a fixed registry state.
"""
from __future__ import annotations

import logging
from typing import Any, Optional

from tollgate.errors import FormatNotSet
from tollgate.tpl.engine import CallContext, HandleEntry, register_comparisons
from tollgate.tpl.formats import MISSING, FormatCatalog, load_formats
from tollgate.tpl.registry import BuiltinRegistry
from tollgate.tpl.terms import ATOM_RE, Atom, Handle, Integer, Term, Text
from tollgate.tpl.trust import TrustServices

logger = logging.getLogger(__name__)


def value_to_term(value: Any, call: CallContext) -> Optional[Term]:
    """Convert a JSON value into a term, or ``None`` if it has no term form.

    Strings in atom syntax become atoms so policies can compare them with
    ``==`` against atom literals; other strings become text.
    """
    if isinstance(value, bool):
        return Atom("true" if value else "false")
    if isinstance(value, int):
        return Integer(value)
    if isinstance(value, str):
        return Atom(value) if ATOM_RE.match(value) else Text(value)
    if isinstance(value, dict):
        return call.handles.register(value)
    return None


def _entry(call: CallContext, term: Term) -> Optional[HandleEntry]:
    resolved = call.deref(term)
    if not isinstance(resolved, Handle):
        return None
    return call.handles.get(resolved)


class CredentialBuiltins:
    """Binds the builtins to a format catalog and a set of trust registries."""

    def __init__(self, services: TrustServices, formats: Optional[FormatCatalog] = None) -> None:
        self.services = services
        self.formats = formats or load_formats()

    # set_format/2
    def set_format(self, call: CallContext, handle: Term, fmt: Term) -> bool:
        name = call.deref(fmt)
        if not isinstance(name, Atom):
            return False
        descriptor = self.formats.get(name.name)
        entry = _entry(call, handle)
        if entry is None or not descriptor.validates(entry.document):
            return False
        entry.format = descriptor.name
        return True

    # extract/3
    def extract(self, call: CallContext, handle: Term, field: Term, out: Term) -> bool:
        entry = _entry(call, handle)
        if entry is None:
            return False
        if entry.format is None:
            raise FormatNotSet("extract called on a handle without set_format")
        name = call.deref(field)
        if not isinstance(name, Atom):
            return False
        value = self.formats.get(entry.format).field(entry.document, name.name)
        if value is MISSING:
            return False
        term = value_to_term(value, call)
        if term is None:
            return False
        return call.unify(out, term)

    # check_eIDAS_qualified/1
    def check_eidas_qualified(self, call: CallContext, issuer: Term) -> bool:
        resolved = call.deref(issuer)
        if isinstance(resolved, Text):
            issuer_id: Any = resolved.value
        elif isinstance(resolved, Atom):
            issuer_id = resolved.name
        elif isinstance(resolved, Handle):
            entry = call.handles.get(resolved)
            issuer_id = entry.document.get("id") if entry else None
        else:
            return False
        if not isinstance(issuer_id, str):
            return False
        return issuer_id in self.services.qualified_issuers()

    # check_not_revoked/1
    def check_not_revoked(self, call: CallContext, credential: Term) -> bool:
        entry = _entry(call, credential)
        if entry is None:
            return False
        if entry.format is None:
            raise FormatNotSet("check_not_revoked needs a handle with a bound format")
        credential_id = self.formats.get(entry.format).identifier(entry.document)
        if not isinstance(credential_id, str):
            return False
        return credential_id not in self.services.revoked_ids()

    # resolve_subject/2
    def resolve_subject(self, call: CallContext, identifier: Term, out: Term) -> bool:
        resolved = call.deref(identifier)
        if isinstance(resolved, Text):
            did = resolved.value
        elif isinstance(resolved, Atom):
            did = resolved.name
        else:
            return False
        document = self.services.resolve(did)
        return call.unify(out, call.handles.register(dict(document)))

    def register_into(self, registry: BuiltinRegistry) -> None:
        registry.register("set_format", 2, self.set_format)
        registry.register("extract", 3, self.extract)
        registry.register("check_eIDAS_qualified", 1, self.check_eidas_qualified)
        registry.register("check_not_revoked", 1, self.check_not_revoked)
        registry.register("resolve_subject", 2, self.resolve_subject)


def credential_registry(services: TrustServices, formats: Optional[FormatCatalog] = None) -> BuiltinRegistry:
    """Frozen registry with comparisons plus the credential builtins."""
    registry = BuiltinRegistry()
    register_comparisons(registry)
    CredentialBuiltins(services, formats).register_into(registry)
    return registry.freeze()
