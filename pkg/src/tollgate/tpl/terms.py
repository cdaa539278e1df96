"""Term, clause and policy data model for the trust policy language.

Terms are immutable and hashable.  A zero-arity compound does not exist:
``foo`` is always an :class:`Atom`.  :class:`Handle` is an opaque ground
constant referencing a document held by one evaluation (see
:mod:`tollgate.tpl.builtins`); it never appears in parsed source.
"""
from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Iterator, Tuple, Union

ATOM_RE = re.compile(r"[a-z][A-Za-z0-9_]*\Z")
VARIABLE_RE = re.compile(r"[A-Z_][A-Za-z0-9_]*(#\d+)*\Z")
#: Marks interpreter-made variable names; source text cannot contain it in a name.
FRESH_MARK = "#"
ANONYMOUS_RE = re.compile(r"_#\d+\Z")

#: Infix operators recognised by the parser, in the spelling they print with.
COMPARISON_OPS = (">=", "=<", "\\==", "==", ">", "<")


@dataclass(frozen=True, slots=True)
class Atom:
    name: str

    def __post_init__(self) -> None:
        if not ATOM_RE.match(self.name):
            raise ValueError(f"invalid atom name {self.name!r}")


@dataclass(frozen=True, slots=True)
class Variable:
    name: str

    def __post_init__(self) -> None:
        if not VARIABLE_RE.match(self.name):
            raise ValueError(f"invalid variable name {self.name!r}")


@dataclass(frozen=True, slots=True)
class Integer:
    value: int


@dataclass(frozen=True, slots=True)
class Text:
    value: str


@dataclass(frozen=True, slots=True)
class Handle:
    """Opaque reference to a document registered with an evaluation."""

    id: int


@dataclass(frozen=True, slots=True)
class Compound:
    functor: str
    args: Tuple["Term", ...]

    def __post_init__(self) -> None:
        if not self.args:
            raise ValueError(f"compound {self.functor!r} needs at least one argument")
        if self.functor not in COMPARISON_OPS and not ATOM_RE.match(self.functor):
            raise ValueError(f"invalid functor {self.functor!r}")

    @property
    def arity(self) -> int:
        return len(self.args)


Term = Union[Atom, Variable, Integer, Text, Handle, Compound]
PredicateKey = Tuple[str, int]


def compound(functor: str, *args: "Term") -> Compound:
    return Compound(functor, tuple(args))


def key_of(term: "Term") -> PredicateKey | None:
    """Return ``(name, arity)`` for callable terms, ``None`` otherwise."""
    if isinstance(term, Compound):
        return (term.functor, len(term.args))
    if isinstance(term, Atom):
        return (term.name, 0)
    return None


def variables_of(term: "Term") -> Iterator[Variable]:
    """Yield the variables of *term* left to right (duplicates included)."""
    stack = [term]
    while stack:
        t = stack.pop()
        if isinstance(t, Variable):
            yield t
        elif isinstance(t, Compound):
            stack.extend(reversed(t.args))


def is_ground(term: "Term") -> bool:
    return next(variables_of(term), None) is None


@dataclass(frozen=True, slots=True)
class Clause:
    head: Union[Atom, Compound]
    body: Tuple["Term", ...] = ()

    def __post_init__(self) -> None:
        if not isinstance(self.head, (Atom, Compound)):
            raise ValueError(f"clause head must be an atom or compound, got {self.head!r}")

    @property
    def key(self) -> PredicateKey:
        return key_of(self.head)  # type: ignore[return-value]

    @property
    def is_fact(self) -> bool:
        return not self.body


@dataclass(frozen=True)
class Policy:
    """A parsed policy.

    ``source_text`` is kept byte-exact; it is what gets hashed for binding.
    """

    id: str
    source_text: str
    clauses: Tuple[Clause, ...]
    entry_point: PredicateKey = ("accept", 3)
    predicates: frozenset = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        object.__setattr__(self, "predicates", frozenset(c.key for c in self.clauses))

    def defines(self, key: PredicateKey) -> bool:
        return key in self.predicates


# ── Pretty printing ────────────────────────────────────────────────────────


def _quote(text: str) -> str:
    escaped = (
        text.replace("\\", "\\\\")
        .replace('"', '\\"')
        .replace("\n", "\\n")
        .replace("\t", "\\t")
    )
    return f'"{escaped}"'


def format_term(term: "Term") -> str:
    """Render *term* in source syntax (re-parseable except for handles)."""
    if isinstance(term, Atom):
        return term.name
    if isinstance(term, Variable):
        return "_" if ANONYMOUS_RE.match(term.name) else term.name
    if isinstance(term, Integer):
        return str(term.value)
    if isinstance(term, Text):
        return _quote(term.value)
    if isinstance(term, Handle):
        return f"<handle#{term.id}>"
    if term.functor in COMPARISON_OPS:
        left, right = term.args
        return f"{format_term(left)} {term.functor} {format_term(right)}"
    return f"{term.functor}({', '.join(format_term(a) for a in term.args)})"


def format_clause(clause: Clause) -> str:
    head = format_term(clause.head)
    if not clause.body:
        return f"{head}."
    goals = ",\n  ".join(format_term(g) for g in clause.body)
    return f"{head} :-\n  {goals}."


def format_policy(policy: Policy) -> str:
    return "\n\n".join(format_clause(c) for c in policy.clauses) + "\n"
