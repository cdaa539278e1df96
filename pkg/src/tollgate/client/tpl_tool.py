"""Policy developer tool: ``tpl check`` (parse + lint) and ``tpl eval`` (offline run).

``tpl eval`` runs the same interpreter and builtins the nodes run, against
the bundled registry fixtures instead of the live registries.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import List, Optional, Set

from tollgate.errors import TplError
from tollgate.paths import FIXTURES_DIR
from tollgate.tpl.builtins import credential_registry
from tollgate.tpl.engine import DEFAULT_BUDGET, EvaluationContext, EvaluationTrace, solve
from tollgate.tpl.parser import iter_singletons, parse_policy, parse_query
from tollgate.tpl.terms import Atom, Compound, Integer, PredicateKey, format_policy, key_of
from tollgate.tpl.trust import StaticTrustServices


@dataclass
class CheckReport:
    path: str
    ok: bool
    entry_point: Optional[str] = None
    errors: List[str] = field(default_factory=list)
    warnings: List[str] = field(default_factory=list)
    printed: Optional[str] = None


def _builtin_keys() -> Set[PredicateKey]:
    return set(credential_registry(StaticTrustServices()).keys())


def check_policy(path: Path, pretty: bool = False) -> CheckReport:
    """Parse a policy file and lint it.

    Warnings: singleton variables, calls to predicates that are neither
    defined in the file nor built in.
    """
    report = CheckReport(path=str(path), ok=True)
    try:
        policy = parse_policy(path.read_text(encoding="utf-8"), id=path.stem)
    except TplError as exc:
        report.ok = False
        report.errors.append(f"{exc.code}: {exc.message}")
        return report
    report.entry_point = f"{policy.entry_point[0]}/{policy.entry_point[1]}"

    builtins = _builtin_keys()
    for clause in policy.clauses:
        head = f"{clause.key[0]}/{clause.key[1]}"
        for name in iter_singletons(clause):
            report.warnings.append(f"singleton variable {name} in a clause of {head}")
        for goal in clause.body:
            key = key_of(goal)
            if key is None:
                continue
            if key not in builtins and not policy.defines(key):
                report.warnings.append(f"{head} calls undefined predicate {key[0]}/{key[1]}")
    if pretty:
        report.printed = format_policy(policy)
    return report


@dataclass
class EvalResult:
    granted: bool
    trace: EvaluationTrace


def eval_policy(
    policy_path: Path,
    presentation_path: Optional[Path],
    num_records: int,
    computation_type: str,
    fixtures_dir: Path = FIXTURES_DIR,
    budget: int = DEFAULT_BUDGET,
    query: Optional[str] = None,
) -> EvalResult:
    """Evaluate ``accept(<presentation>, NumRecords, ComputationType)`` offline.

    With *query*, that goal is run instead and no presentation is needed.

    Raises
    ------
    FileNotFoundError
        If the policy or presentation file does not exist.
    """
    if not policy_path.exists():
        raise FileNotFoundError(f"Policy file not found: {policy_path}")
    policy = parse_policy(policy_path.read_text(encoding="utf-8"), id=policy_path.stem)
    registry = credential_registry(StaticTrustServices.from_fixtures(fixtures_dir))
    context = EvaluationContext()
    trace = EvaluationTrace()

    if query is not None:
        goal = parse_query(query)
    else:
        if presentation_path is None or not presentation_path.exists():
            raise FileNotFoundError(f"Presentation file not found: {presentation_path}")
        with open(presentation_path, encoding="utf-8") as fh:
            document = json.load(fh)
        goal = Compound(
            policy.entry_point[0],
            (context.handles.register(document), Integer(num_records), Atom(computation_type)),
        )
    answer = solve([policy], goal, registry, budget, context=context, trace=trace)
    return EvalResult(granted=answer is not None, trace=trace)
