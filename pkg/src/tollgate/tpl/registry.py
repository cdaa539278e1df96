"""Builtin registry: maps ``(name, arity)`` to host callbacks.

Usage::

    from tollgate.tpl.registry import BuiltinRegistry

    registry = BuiltinRegistry()
    registry.register("is_even", 1, lambda call, x: ...)
    registry.freeze()

A callback receives a :class:`~tollgate.tpl.engine.CallContext` followed by
the goal's arguments (unresolved) and returns ``True`` on success.
Builtins are deterministic: they succeed at most once and are never
re-entered on backtracking.
"""
from __future__ import annotations

from typing import Any, Callable, Dict, Iterable, List, Optional

from tollgate.tpl.terms import PredicateKey

Builtin = Callable[..., bool]


class BuiltinRegistry:
    """Maps predicate keys to builtin callbacks.

    The registry is mutable only until :meth:`freeze`; evaluations share a
    frozen registry without coordination.
    """

    def __init__(self, parent: Optional["BuiltinRegistry"] = None) -> None:
        self._builtins: Dict[PredicateKey, Builtin] = dict(parent._builtins) if parent else {}
        self._frozen = False

    def register(self, name: str, arity: int, fn: Builtin) -> None:
        """Register *fn* under ``name/arity``.

        Raises
        ------
        RuntimeError
            If the registry is already frozen.
        """
        if self._frozen:
            raise RuntimeError("builtin registry is frozen")
        self._builtins[(name, arity)] = fn

    def freeze(self) -> "BuiltinRegistry":
        self._frozen = True
        return self

    @property
    def frozen(self) -> bool:
        return self._frozen

    def get(self, key: PredicateKey) -> Optional[Builtin]:
        return self._builtins.get(key)

    def __contains__(self, key: Any) -> bool:
        return key in self._builtins

    def keys(self) -> Iterable[PredicateKey]:
        return self._builtins.keys()

    def names(self) -> List[str]:
        """Return a sorted list of ``name/arity`` strings."""
        return sorted(f"{n}/{a}" for n, a in self._builtins)
