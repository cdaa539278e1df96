"""Parser for the trust policy language (a Prolog-like subset).

Grammar::

    policy   := clause*
    clause   := head [":-" goal ("," goal)*] "."
    head     := compound | atom
    goal     := term [op term]          op in  >  <  >=  =<  ==  \\==
    term     := compound | atom | variable | integer | string
    compound := atom "(" term ("," term)* ")"

``%`` starts a line comment.  ``_`` is the anonymous variable; every
occurrence becomes a distinct fresh variable.

Usage::

    from tollgate.tpl.parser import parse_policy

    policy = parse_policy(Path("seller.tpl").read_text(), id="prod-1")
"""
from __future__ import annotations

import itertools
from typing import Iterable, List, Optional, Tuple

import pyparsing as pp

from tollgate.errors import MissingEntryPoint, TplSyntaxError
from tollgate.tpl.terms import (
    COMPARISON_OPS,
    FRESH_MARK,
    Atom,
    Clause,
    Compound,
    Integer,
    Policy,
    PredicateKey,
    Term,
    Text,
    Variable,
    variables_of,
)

DEFAULT_ENTRY_POINT: PredicateKey = ("accept", 3)


def _build_grammar() -> pp.ParserElement:
    LPAR, RPAR, DOT = map(pp.Suppress, "().")
    NECK = pp.Suppress(":-")

    atom_name = pp.Regex(r"[a-z][A-Za-z0-9_]*").set_name("atom")
    var_name = pp.Regex(r"[A-Z_][A-Za-z0-9_]*").set_name("variable")
    integer = pp.Regex(r"-?\d+").set_name("integer")
    string = pp.QuotedString('"', esc_char="\\").set_name("string")
    op = pp.one_of(list(COMPARISON_OPS)).set_name("comparison")

    term = pp.Forward().set_name("term")
    compound = atom_name + LPAR + pp.DelimitedList(term) + RPAR
    compound.set_parse_action(lambda t: Compound(t[0], tuple(t[1:])))

    atom = atom_name.copy().set_parse_action(lambda t: Atom(t[0]))
    variable = var_name.copy().set_parse_action(lambda t: Variable(t[0]))
    integer.set_parse_action(lambda t: Integer(int(t[0])))
    string.set_parse_action(lambda t: Text(t[0]))

    term <<= compound | atom | variable | integer | string

    goal = term + pp.Optional(op + term)
    goal.set_parse_action(lambda t: Compound(t[1], (t[0], t[2])) if len(t) == 3 else t[0])

    head = compound.copy() | atom.copy()
    clause = head + pp.Optional(NECK + pp.DelimitedList(goal)) + DOT
    clause.set_parse_action(lambda t: _RawClause(t[0], tuple(t[1:])))

    program = pp.ZeroOrMore(clause)
    program.ignore(pp.Regex(r"%[^\n]*"))
    return program


class _RawClause:
    """Parse-time holder; anonymous variables are renamed afterwards."""

    __slots__ = ("head", "body")

    def __init__(self, head: Term, body: Tuple[Term, ...]) -> None:
        self.head = head
        self.body = body


_GRAMMAR = _build_grammar()


def _rename_anonymous(term: Term, counter: "itertools.count[int]") -> Term:
    if isinstance(term, Variable) and term.name == "_":
        return Variable(f"_{FRESH_MARK}{next(counter)}")
    if isinstance(term, Compound):
        return Compound(term.functor, tuple(_rename_anonymous(a, counter) for a in term.args))
    return term


def _finish(raw: _RawClause) -> Clause:
    counter = itertools.count(1)
    head = _rename_anonymous(raw.head, counter)
    body = tuple(_rename_anonymous(g, counter) for g in raw.body)
    return Clause(head, body)  # type: ignore[arg-type]


def parse_clauses(source: str) -> List[Clause]:
    """Parse *source* into clauses without entry-point checks."""
    try:
        results = _GRAMMAR.parse_string(source, parse_all=True)
    except pp.ParseBaseException as exc:
        raise TplSyntaxError(exc.msg, exc.lineno, exc.col) from None
    return [_finish(raw) for raw in results]


def parse_policy(
    source: str,
    id: str,
    entry_point: Optional[PredicateKey] = None,
) -> Policy:
    """Parse *source* into a :class:`Policy`.

    Raises
    ------
    TplSyntaxError
        On malformed (or empty) input; carries ``line`` and ``column``.
    MissingEntryPoint
        If the entry point (default ``accept/3``) has no clause.
    """
    if not source or not source.strip():
        raise TplSyntaxError("empty policy", 1, 1)
    clauses = tuple(parse_clauses(source))
    entry = tuple(entry_point) if entry_point else DEFAULT_ENTRY_POINT
    if not any(c.key == entry for c in clauses):
        raise MissingEntryPoint(
            f"policy {id!r} defines no {entry[0]}/{entry[1]} clause",
            entry_point=f"{entry[0]}/{entry[1]}",
        )
    return Policy(id=id, source_text=source, clauses=clauses, entry_point=entry)  # type: ignore[arg-type]


def parse_query(source: str) -> Term:
    """Parse a single goal, e.g. ``accept(vp, 150, machine_learning)``.

    A trailing ``.`` is optional.
    """
    text = source.strip()
    if not text.endswith("."):
        text += "."
    clauses = parse_clauses(f"query__ :- {text}")
    if len(clauses) != 1 or len(clauses[0].body) != 1:
        raise TplSyntaxError("expected exactly one goal", 1, 1)
    return clauses[0].body[0]


def iter_singletons(clause: Clause) -> Iterable[str]:
    """Yield names of named variables that occur exactly once in *clause*."""
    seen: dict[str, int] = {}
    for term in (clause.head, *clause.body):
        for v in variables_of(term):
            seen[v.name] = seen.get(v.name, 0) + 1
    for name, count in seen.items():
        if count == 1 and not name.startswith("_"):
            yield name
