"""Depth-first, left-to-right SLD resolution with chronological backtracking.

The solver runs on an explicit goal list and choice-point stack, so deep
recursion in a policy never touches the Python call stack; termination is
enforced by a resolution-step budget instead.

Usage::

    from tollgate.tpl.engine import solve
    from tollgate.tpl.parser import parse_policy, parse_query

    answer = solve([policy], parse_query("accept(H, 150, machine_learning)"), registry)
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import (
    Any,
    Dict,
    FrozenSet,
    Iterator,
    List,
    Mapping,
    Optional,
    Sequence,
    Tuple,
    Union,
)

from tollgate.errors import BuiltinCollision, BudgetExceeded, UnknownPredicate
from tollgate.tpl.registry import BuiltinRegistry
from tollgate.tpl.terms import (
    Atom,
    Clause,
    Compound,
    FRESH_MARK,
    Handle,
    Integer,
    Policy,
    PredicateKey,
    Term,
    Text,
    Variable,
    format_term,
    is_ground,
    key_of,
    variables_of,
)
from tollgate.tpl.unify import Bindings, substitute, undo, unify_into, walk

DEFAULT_BUDGET = 1_000_000
TRACE_LIMIT = 5_000


# ── Evaluation-local state ─────────────────────────────────────────────────


@dataclass
class HandleEntry:
    document: Mapping[str, Any]
    format: Optional[str] = None


class HandleTable:
    """Documents reachable from one evaluation through :class:`Handle` terms."""

    def __init__(self) -> None:
        self._entries: Dict[int, HandleEntry] = {}
        self._ids = itertools.count(1)

    def register(self, document: Mapping[str, Any]) -> Handle:
        handle = Handle(next(self._ids))
        self._entries[handle.id] = HandleEntry(document)
        return handle

    def get(self, handle: Handle) -> Optional[HandleEntry]:
        return self._entries.get(handle.id)

    def __len__(self) -> int:
        return len(self._entries)


@dataclass
class EvaluationContext:
    """Per-evaluation state handed to builtins."""

    handles: HandleTable = field(default_factory=HandleTable)


@dataclass
class EvaluationTrace:
    """Ordered audit of goal calls and failures during one evaluation."""

    events: List[str] = field(default_factory=list)
    failed_goal: Optional[str] = None
    truncated: bool = False
    steps: int = 0

    def record(self, kind: str, depth: int, goal: Term) -> None:
        if len(self.events) >= TRACE_LIMIT:
            self.truncated = True
            return
        self.events.append(f"{'  ' * depth}{kind}: {format_term(goal)}")


class CallContext:
    """What a builtin sees: the live bindings plus the evaluation context."""

    __slots__ = ("_env", "_trail", "evaluation")

    def __init__(self, env: Bindings, trail: List[str], evaluation: EvaluationContext) -> None:
        self._env = env
        self._trail = trail
        self.evaluation = evaluation

    @property
    def handles(self) -> HandleTable:
        return self.evaluation.handles

    def resolve(self, term: Term) -> Term:
        return substitute(term, self._env)

    def deref(self, term: Term) -> Term:
        return walk(term, self._env)

    def unify(self, a: Term, b: Term) -> bool:
        return unify_into(a, b, self._env, self._trail)


# ── Program ────────────────────────────────────────────────────────────────


@dataclass(frozen=True)
class _Compiled:
    head: Term
    body: Tuple[Term, ...]
    ground: bool


class Program:
    """Clause index over one or more policies (clause order preserved)."""

    def __init__(self, policies: Sequence[Policy]) -> None:
        self.policies: Tuple[Policy, ...] = tuple(policies)
        index: Dict[PredicateKey, List[_Compiled]] = {}
        for policy in self.policies:
            for clause in policy.clauses:
                index.setdefault(clause.key, []).append(_compile(clause))
        self._index: Dict[PredicateKey, Tuple[_Compiled, ...]] = {
            k: tuple(v) for k, v in index.items()
        }
        self._checked: Optional[FrozenSet[PredicateKey]] = None

    def clauses_for(self, key: PredicateKey) -> Optional[Tuple[_Compiled, ...]]:
        return self._index.get(key)

    def defines(self, key: PredicateKey) -> bool:
        return key in self._index

    def keys(self) -> List[PredicateKey]:
        return list(self._index)

    def check_builtins(self, registry: BuiltinRegistry) -> None:
        """Raise :exc:`BuiltinCollision` if a clause head shadows a builtin."""
        builtins = frozenset(registry.keys())
        if self._checked == builtins:
            return
        clashes = sorted(f"{n}/{a}" for n, a in self._index if (n, a) in builtins)
        if clashes:
            raise BuiltinCollision(
                f"clauses redefine builtin predicates: {', '.join(clashes)}",
                predicates=clashes,
            )
        self._checked = builtins


def _compile(clause: Clause) -> _Compiled:
    ground = is_ground(clause.head) and all(is_ground(g) for g in clause.body)
    return _Compiled(clause.head, clause.body, ground)


def _as_program(program: Union[Program, Sequence[Policy]]) -> Program:
    return program if isinstance(program, Program) else Program(program)


# ── Solver ─────────────────────────────────────────────────────────────────

_FAIL = object()
_DONE = object()


class _Solver:
    def __init__(
        self,
        program: Program,
        query: Term,
        registry: BuiltinRegistry,
        budget: int,
        context: EvaluationContext,
        trace: Optional[EvaluationTrace],
    ) -> None:
        if budget <= 0:
            raise ValueError("budget must be positive")
        self.program = program
        self.query = query
        self.registry = registry
        self.budget = budget
        self.context = context
        self.trace = trace
        self.env: Bindings = {}
        self.trail: List[str] = []
        self.choices: List[tuple] = []
        self.steps = 0
        self._renames = itertools.count(1)
        self._query_vars = list(dict.fromkeys(v.name for v in variables_of(query)))

    # -- helpers --------------------------------------------------------

    def _tick(self) -> None:
        self.steps += 1
        if self.steps > self.budget:
            raise BudgetExceeded(
                f"resolution step budget of {self.budget} exhausted",
                budget=self.budget,
            )

    def _rename(self, term: Term, mapping: Dict[str, Variable], tag: int) -> Term:
        if isinstance(term, Variable):
            v = mapping.get(term.name)
            if v is None:
                v = Variable(f"{term.name}{FRESH_MARK}{tag}")
                mapping[term.name] = v
            return v
        if isinstance(term, Compound):
            return Compound(term.functor, tuple(self._rename(a, mapping, tag) for a in term.args))
        return term

    def _failed(self, depth: int, goal: Term) -> None:
        if self.trace is not None:
            resolved = substitute(goal, self.env)
            self.trace.failed_goal = format_term(resolved)
            self.trace.record("fail", depth, resolved)

    def _answer(self) -> Bindings:
        out: Bindings = {}
        for name in self._query_vars:
            value = substitute(Variable(name), self.env)
            if value != Variable(name):
                out[name] = value
        return out

    # -- clause selection -----------------------------------------------

    def _try(self, goal: Term, depth: int, rest: Any, clauses: Tuple[_Compiled, ...], start: int) -> Any:
        env, trail = self.env, self.trail
        mark = len(trail)
        for i in range(start, len(clauses)):
            clause = clauses[i]
            if clause.ground:
                head, body = clause.head, clause.body
            else:
                mapping: Dict[str, Variable] = {}
                tag = next(self._renames)
                head = self._rename(clause.head, mapping, tag)
                body = tuple(self._rename(g, mapping, tag) for g in clause.body)
            if unify_into(head, goal, env, trail):
                if i + 1 < len(clauses):
                    self.choices.append((goal, depth, rest, clauses, i + 1, mark))
                goals = rest
                for g in reversed(body):
                    goals = (g, depth + 1, goals)
                return goals
            undo(env, trail, mark)
        self._failed(depth, goal)
        return _FAIL

    def _backtrack(self) -> Any:
        while self.choices:
            goal, depth, rest, clauses, start, mark = self.choices.pop()
            undo(self.env, self.trail, mark)
            self._tick()
            goals = self._try(goal, depth, rest, clauses, start)
            if goals is not _FAIL:
                return goals
        return _DONE

    # -- main loop ------------------------------------------------------

    def solutions(self) -> Iterator[Bindings]:
        self.program.check_builtins(self.registry)
        call = CallContext(self.env, self.trail, self.context)
        goals: Any = (self.query, 0, None)
        while True:
            if goals is _DONE:
                return
            if goals is None:
                yield self._answer()
                goals = self._backtrack()
                continue

            goal_term, depth, rest = goals
            self._tick()
            goal = walk(goal_term, self.env)
            key = key_of(goal)
            if key is None:
                raise UnknownPredicate(
                    f"goal {format_term(goal)} is not callable",
                    predicate=format_term(goal),
                )
            if self.trace is not None:
                self.trace.record("call", depth, substitute(goal, self.env))

            builtin = self.registry.get(key)
            if builtin is not None:
                mark = len(self.trail)
                args = goal.args if isinstance(goal, Compound) else ()
                if builtin(call, *args):
                    goals = rest
                    continue
                undo(self.env, self.trail, mark)
                self._failed(depth, goal)
                goals = self._backtrack()
                continue

            clauses = self.program.clauses_for(key)
            if clauses is None:
                raise UnknownPredicate(
                    f"no clause or builtin for {key[0]}/{key[1]}",
                    predicate=f"{key[0]}/{key[1]}",
                )
            goals = self._try(goal, depth, rest, clauses, 0)
            if goals is _FAIL:
                goals = self._backtrack()


def _finish_trace(trace: Optional[EvaluationTrace], solver: _Solver) -> None:
    if trace is not None:
        trace.steps = solver.steps


def solve(
    program: Union[Program, Sequence[Policy]],
    query: Term,
    registry: BuiltinRegistry,
    budget: int = DEFAULT_BUDGET,
    *,
    context: Optional[EvaluationContext] = None,
    trace: Optional[EvaluationTrace] = None,
) -> Optional[Bindings]:
    """Return the first solution's bindings for the query's variables.

    Returns ``None`` when the query fails.

    Raises
    ------
    BudgetExceeded
        When more than *budget* resolution steps are taken.
    UnknownPredicate
        When a goal matches no clause head and no builtin.
    BuiltinCollision
        When the program defines a predicate that is also a builtin.
    """
    solver = _Solver(_as_program(program), query, registry, budget, context or EvaluationContext(), trace)
    try:
        return next(solver.solutions(), None)
    finally:
        _finish_trace(trace, solver)


def solve_all(
    program: Union[Program, Sequence[Policy]],
    query: Term,
    registry: BuiltinRegistry,
    budget: int = DEFAULT_BUDGET,
    *,
    context: Optional[EvaluationContext] = None,
    trace: Optional[EvaluationTrace] = None,
) -> List[Bindings]:
    """Enumerate every solution in clause order (duplicates preserved)."""
    solver = _Solver(_as_program(program), query, registry, budget, context or EvaluationContext(), trace)
    try:
        return list(solver.solutions())
    finally:
        _finish_trace(trace, solver)


# ── Core builtins: comparisons ─────────────────────────────────────────────


def _ordered(a: Term, b: Term) -> Optional[Tuple[Any, Any]]:
    if isinstance(a, Integer) and isinstance(b, Integer):
        return a.value, b.value
    if isinstance(a, Text) and isinstance(b, Text):
        return a.value, b.value
    if isinstance(a, Atom) and isinstance(b, Atom):
        return a.name, b.name
    return None


def _comparison(op: str):
    def compare(call: CallContext, left: Term, right: Term) -> bool:
        a, b = call.resolve(left), call.resolve(right)
        if not (is_ground(a) and is_ground(b)):
            return False
        if op == "==":
            return a == b
        if op == "\\==":
            return a != b
        pair = _ordered(a, b)
        if pair is None:
            return False
        x, y = pair
        if op == ">":
            return x > y
        if op == "<":
            return x < y
        if op == ">=":
            return x >= y
        return x <= y  # =<

    compare.__name__ = f"compare_{op}"
    return compare


def core_registry() -> BuiltinRegistry:
    """A frozen registry with only the comparison operators."""
    registry = BuiltinRegistry()
    register_comparisons(registry)
    return registry.freeze()


def register_comparisons(registry: BuiltinRegistry) -> None:
    for op in (">", "<", ">=", "=<", "==", "\\=="):
        registry.register(op, 2, _comparison(op))
