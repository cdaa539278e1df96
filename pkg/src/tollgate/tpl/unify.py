"""Unification with occurs-check.

:func:`unify` is the pure API (input bindings are never mutated).  The
solver uses :func:`unify_into`, which extends a mutable binding dict and
records every new variable on a trail so choice points can undo bindings.
"""
from __future__ import annotations

from typing import Dict, List, Mapping, Optional

from tollgate.tpl.terms import Compound, Term, Variable

Bindings = Dict[str, Term]


def walk(term: Term, env: Mapping[str, Term]) -> Term:
    """Follow variable bindings until an unbound variable or non-variable."""
    while isinstance(term, Variable):
        bound = env.get(term.name)
        if bound is None:
            return term
        term = bound
    return term


def substitute(term: Term, env: Mapping[str, Term]) -> Term:
    """Apply *env* to *term* fully (all nested variables resolved)."""
    term = walk(term, env)
    if isinstance(term, Compound):
        args = tuple(substitute(a, env) for a in term.args)
        if args == term.args:
            return term
        return Compound(term.functor, args)
    return term


def occurs(name: str, term: Term, env: Mapping[str, Term]) -> bool:
    stack = [term]
    while stack:
        t = walk(stack.pop(), env)
        if isinstance(t, Variable):
            if t.name == name:
                return True
        elif isinstance(t, Compound):
            stack.extend(t.args)
    return False


def unify_into(a: Term, b: Term, env: Bindings, trail: List[str]) -> bool:
    """Unify *a* and *b*, extending *env* in place.

    On failure some bindings may already be recorded on *trail*; the caller
    undoes them (see :func:`undo`).
    """
    stack = [(a, b)]
    while stack:
        x, y = stack.pop()
        x = walk(x, env)
        y = walk(y, env)
        if x is y or x == y:
            continue
        if isinstance(x, Variable):
            if occurs(x.name, y, env):
                return False
            env[x.name] = y
            trail.append(x.name)
            continue
        if isinstance(y, Variable):
            if occurs(y.name, x, env):
                return False
            env[y.name] = x
            trail.append(y.name)
            continue
        if isinstance(x, Compound) and isinstance(y, Compound):
            if x.functor != y.functor or len(x.args) != len(y.args):
                return False
            stack.extend(zip(x.args, y.args))
            continue
        return False
    return True


def undo(env: Bindings, trail: List[str], mark: int) -> None:
    while len(trail) > mark:
        del env[trail.pop()]


def normalize(env: Mapping[str, Term]) -> Bindings:
    """Resolve every binding fully so the map is idempotent."""
    out: Bindings = {}
    for name in env:
        value = substitute(Variable(name), env)
        if value != Variable(name):
            out[name] = value
    return out


def unify(a: Term, b: Term, bindings: Optional[Mapping[str, Term]] = None) -> Optional[Bindings]:
    """Return the normalized extension of *bindings* unifying *a* and *b*.

    Returns ``None`` when the terms do not unify.  *bindings* is left
    untouched either way.
    """
    env: Bindings = dict(bindings or {})
    if not unify_into(a, b, env, []):
        return None
    return normalize(env)
