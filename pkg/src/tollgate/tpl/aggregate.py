"""Policy aggregation: the logical conjunction of several policies.

Each member's predicates are renamed with the prefix ``p<position>_<id>__``;
no prefix is a string prefix of another.  A synthetic entry clause calls
every member's (renamed) entry point, and ``requires_credential/1`` is
re-exported as the union of the members' requirement facts.
"""
from __future__ import annotations

import re
from typing import Dict, List, Sequence, Set

from tollgate.errors import ArityMismatch, DuplicatePolicyId
from tollgate.tpl.terms import (
    Atom,
    Clause,
    Compound,
    Policy,
    PredicateKey,
    Term,
    Variable,
    format_clause,
)

REQUIREMENT_KEY: PredicateKey = ("requires_credential", 1)
_NON_IDENT = re.compile(r"[^A-Za-z0-9_]")


def namespace_prefix(policy_id: str, position: int) -> str:
    """Return the predicate prefix for the member at *position* with *policy_id*.

    The id only makes traces readable; ``p<position>_`` keeps prefixes distinct.
    """
    slug = _NON_IDENT.sub("_", policy_id.lower())
    return f"p{position}_{slug}__"


def _rename_goal(term: Term, prefix: str, defined: Set[PredicateKey]) -> Term:
    if isinstance(term, Atom) and (term.name, 0) in defined:
        return Atom(prefix + term.name)
    if isinstance(term, Compound) and (term.functor, len(term.args)) in defined:
        return Compound(prefix + term.functor, term.args)
    return term


def namespace_policy(policy: Policy, prefix: str) -> List[Clause]:
    """Rename every predicate *policy* defines (heads and calls) with *prefix*."""
    defined = set(policy.predicates)
    return [
        Clause(
            _rename_goal(c.head, prefix, defined),  # type: ignore[arg-type]
            tuple(_rename_goal(g, prefix, defined) for g in c.body),
        )
        for c in policy.clauses
    ]


def _entry_vars(arity: int) -> List[Variable]:
    if arity == 3:
        return [Variable("A"), Variable("N"), Variable("C")]
    return [Variable(f"Arg{i}") for i in range(1, arity + 1)]


def aggregate_policies(policies: Sequence[Policy], id: str = "aggregate") -> Policy:
    """Return a policy that accepts iff every member policy accepts.

    Raises
    ------
    ValueError
        If *policies* is empty.
    ArityMismatch
        If member entry points disagree in arity.
    DuplicatePolicyId
        If two members share an id.
    """
    if not policies:
        raise ValueError("aggregate_policies needs at least one policy")

    arities = {p.entry_point[1] for p in policies}
    if len(arities) != 1:
        raise ArityMismatch(
            "entry points disagree in arity: "
            + ", ".join(f"{p.id}:{p.entry_point[0]}/{p.entry_point[1]}" for p in policies)
        )
    arity = arities.pop()
    names = {p.entry_point[0] for p in policies}
    entry_name = names.pop() if len(names) == 1 else "accept"

    prefixes: Dict[str, str] = {}
    for position, p in enumerate(policies):
        if p.id in prefixes:
            raise DuplicatePolicyId(f"policy id {p.id!r} appears more than once", policy_id=p.id)
        prefixes[p.id] = namespace_prefix(p.id, position)

    args = tuple(_entry_vars(arity))
    head = Compound(entry_name, args) if arity else Atom(entry_name)
    conjuncts = []
    for p in policies:
        name = prefixes[p.id] + p.entry_point[0]
        conjuncts.append(Compound(name, args) if arity else Atom(name))

    clauses: List[Clause] = [Clause(head, tuple(conjuncts))]
    x = Variable("X")
    for p in policies:
        if p.defines(REQUIREMENT_KEY):
            clauses.append(
                Clause(
                    Compound(REQUIREMENT_KEY[0], (x,)),
                    (Compound(prefixes[p.id] + REQUIREMENT_KEY[0], (x,)),),
                )
            )
    for p in policies:
        clauses.extend(namespace_policy(p, prefixes[p.id]))

    text = "\n\n".join(format_clause(c) for c in clauses) + "\n"
    return Policy(id=id, source_text=text, clauses=tuple(clauses), entry_point=(entry_name, arity))
