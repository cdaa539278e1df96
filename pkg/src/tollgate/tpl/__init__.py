"""tollgate.tpl – the trust policy language.

* :mod:`tollgate.tpl.terms` – term / clause / policy model and printer
* :mod:`tollgate.tpl.parser` – :func:`parse_policy`, :func:`parse_query`
* :mod:`tollgate.tpl.unify` – :func:`unify` with occurs-check
* :mod:`tollgate.tpl.engine` – :func:`solve`, :func:`solve_all`
* :mod:`tollgate.tpl.aggregate` – :func:`aggregate_policies`
* :mod:`tollgate.tpl.builtins` – credential builtins and their registry
"""
from __future__ import annotations

from tollgate.tpl.aggregate import aggregate_policies  # noqa: F401
from tollgate.tpl.engine import (  # noqa: F401
    DEFAULT_BUDGET,
    EvaluationContext,
    EvaluationTrace,
    Program,
    core_registry,
    solve,
    solve_all,
)
from tollgate.tpl.parser import parse_policy, parse_query  # noqa: F401
from tollgate.tpl.registry import BuiltinRegistry  # noqa: F401
from tollgate.tpl.unify import unify  # noqa: F401

__all__ = [
    "aggregate_policies",
    "DEFAULT_BUDGET",
    "EvaluationContext",
    "EvaluationTrace",
    "Program",
    "core_registry",
    "solve",
    "solve_all",
    "parse_policy",
    "parse_query",
    "BuiltinRegistry",
    "unify",
]
