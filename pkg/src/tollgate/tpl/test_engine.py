"""Tests for the resolution engine, comparisons and the research seller policy."""
import os
import sys

sys.path.insert(0, os.path.join(os.path.dirname(__file__), "..", ".."))

import pytest

from tollgate.errors import BudgetExceeded, BuiltinCollision, UnknownPredicate
from tollgate.paths import FIXTURES_DIR, POLICY_CORPUS_DIR
from tollgate.tpl.builtins import credential_registry
from tollgate.tpl.engine import EvaluationContext, EvaluationTrace, Program, core_registry, solve, solve_all
from tollgate.tpl.parser import parse_policy, parse_query
from tollgate.tpl.registry import BuiltinRegistry
from tollgate.tpl.terms import Atom, Compound, Integer
from tollgate.tpl.trust import StaticTrustServices
from tollgate.tpl.unify import substitute


# ── helpers ─────────────────────────────────────────────────────────────────

def _presentation(org_type: str, issuer: str = "did:ex:uni-registry") -> dict:
    credential = {
        "id": "urn:cred:1",
        "subject": "did:ex:alice",
        "issuer": issuer,
        "claims": {"organization_type": org_type, "organization_name": "Example University"},
        "verification_key": "AA",
        "encryption_key": "AA",
        "issuer_signature": "AA",
    }
    return {"mainCredential": credential, "additional": [], "challenge": "00" * 32, "holder_signature": "AA"}


def _corpus(name: str):
    return parse_policy((POLICY_CORPUS_DIR / f"{name}.tpl").read_text(encoding="utf-8"), id=name)


@pytest.fixture(scope="module")
def registry():
    return credential_registry(StaticTrustServices.from_fixtures(FIXTURES_DIR))


def _accept(policy, registry, document, num_records, computation_type, trace=None):
    context = EvaluationContext()
    query = Compound("accept", (context.handles.register(document), Integer(num_records), Atom(computation_type)))
    return solve([policy], query, registry, context=context, trace=trace) is not None


# ── research seller policy ──────────────────────────────────────────────────

@pytest.mark.parametrize(
    "org_type, computation_type, granted",
    [
        ("public_university", "machine_learning", True),
        ("private_research", "simple_statistics", True),
        ("public_university", "simple_statistics", False),
        ("private_research", "machine_learning", False),
    ],
)
def test_research_seller_matrix(registry, org_type, computation_type, granted):
    policy = _corpus("research_seller")
    assert _accept(policy, registry, _presentation(org_type), 150, computation_type) is granted


@pytest.mark.parametrize("num_records, granted", [(100, False), (101, True)])
def test_record_count_boundary(registry, num_records, granted):
    policy = _corpus("research_seller")
    assert _accept(policy, registry, _presentation("public_university"), num_records, "machine_learning") is granted


def test_unqualified_issuer_is_denied(registry):
    policy = _corpus("research_seller")
    document = _presentation("public_university", issuer="did:ex:diploma-mill")
    assert not _accept(policy, registry, document, 150, "machine_learning")


def test_trace_names_failed_goal(registry):
    trace = EvaluationTrace()
    policy = _corpus("research_seller")
    assert not _accept(policy, registry, _presentation("public_university"), 100, "machine_learning", trace)
    assert trace.failed_goal == "100 > 100"
    assert any("check_eIDAS_qualified" in e for e in trace.events)
    assert trace.steps > 0


@pytest.mark.parametrize(
    "name, num_records, computation_type, granted",
    [
        ("always_accept", 0, "anything", True),
        ("always_deny", 500, "simple_statistics", False),
        ("anonymous_vars", 2, "machine_learning", True),
        ("anonymous_vars", 2, "unrestricted", False),
        ("helper_chain", 101, "simple_statistics", True),
        ("ml_only", 101, "simple_statistics", False),
        ("negative_bounds", 0, "x", True),
        ("successor_chain", 101, "x", True),
        ("escaped_strings", 0, "x", True),
        ("text_compare", 0, "x", True),
        ("nested_terms", 101, "machine_learning", True),
        ("nested_terms", 100, "machine_learning", False),
        ("exclude_companies", 101, "x", True),
        ("country_restricted", 150, "simple_statistics", False),
    ],
)
def test_corpus_verdicts(registry, name, num_records, computation_type, granted):
    document = _presentation("public_university")
    assert _accept(_corpus(name), registry, document, num_records, computation_type) is granted


# ── engine behaviour ────────────────────────────────────────────────────────

def test_answer_bindings():
    policy = parse_policy("accept(_, _, _).\nkind(simple_statistics, linear).", id="p")
    answer = solve([policy], parse_query("kind(simple_statistics, K)"), core_registry())
    assert answer == {"K": Atom("linear")}


def test_solve_all_keeps_clause_order_and_duplicates():
    policy = parse_policy("accept(_, _, _).\np(1).\np(2).\np(1).", id="p")
    answers = solve_all([policy], parse_query("p(X)"), core_registry())
    assert [a["X"] for a in answers] == [Integer(1), Integer(2), Integer(1)]


def test_backtracking_into_second_clause():
    policy = parse_policy("accept(_, _, _).\nq(a).\nq(b).\nr(b).\ns(X) :- q(X), r(X).", id="p")
    assert solve([policy], parse_query("s(X)"), core_registry()) == {"X": Atom("b")}


def test_budget_exhaustion():
    policy = parse_policy("accept(_, _, _) :- loop.\nloop :- loop.", id="p")
    with pytest.raises(BudgetExceeded) as info:
        solve([policy], parse_query("accept(a, 1, b)"), core_registry(), budget=1000)
    assert info.value.details["budget"] == 1000


def test_deep_chain_stays_within_budget():
    term = Atom("zero")
    for _ in range(300):
        term = Compound("s", (term,))
    policy = parse_policy("accept(_, _, _).\nnat(zero).\nnat(s(X)) :- nat(X).", id="p")
    trace = EvaluationTrace()
    assert solve([policy], Compound("nat", (term,)), core_registry(), trace=trace) == {}
    assert trace.steps > 300


def test_unknown_predicate_is_an_error():
    policy = parse_policy("accept(_, _, _) :- missing(1).", id="p")
    with pytest.raises(UnknownPredicate) as info:
        solve([policy], parse_query("accept(a, 1, b)"), core_registry())
    assert info.value.details["predicate"] == "missing/1"


def test_builtin_collision(registry):
    policy = parse_policy("accept(_, _, _).\nextract(a, b, c).", id="p")
    with pytest.raises(BuiltinCollision):
        solve([policy], parse_query("accept(a, 1, b)"), registry)


def test_collision_check_follows_registry_contents():
    program = Program([parse_policy("accept(_, _, _) :- helper(1).\nhelper(1).", id="p")])
    registry = BuiltinRegistry(parent=core_registry())
    assert solve(program, parse_query("accept(a, 1, b)"), registry) == {}
    registry.register("helper", 1, lambda *args: True)
    with pytest.raises(BuiltinCollision):
        solve(program, parse_query("accept(a, 1, b)"), registry)
    assert solve(program, parse_query("accept(a, 1, b)"), core_registry()) == {}


def test_program_is_reusable():
    program = Program([parse_policy("accept(_, N, _) :- N > 1.", id="p")])
    registry = core_registry()
    assert solve(program, parse_query("accept(a, 2, b)"), registry) == {}
    assert solve(program, parse_query("accept(a, 1, b)"), registry) is None


# ── comparisons ─────────────────────────────────────────────────────────────

@pytest.mark.parametrize(
    "goal, holds",
    [
        ("3 > 2", True),
        ("2 > 3", False),
        ("3 >= 3", True),
        ("3 =< 2", False),
        ("a == a", True),
        ("a \\== b", True),
        ('"abc" < "abd"', True),
        ("apple < banana", True),
        ("3 > a", False),
        ('3 == "3"', False),
    ],
)
def test_comparisons(goal, holds):
    policy = parse_policy("accept(_, _, _).", id="p")
    answer = solve([policy], parse_query(goal), core_registry())
    assert (answer is not None) is holds


def test_comparison_with_unbound_variable_fails():
    policy = parse_policy("accept(_, _, _).", id="p")
    assert solve([policy], parse_query("X > 1"), core_registry()) is None


# ── acceptComputation solution sets ─────────────────────────────────────────

@pytest.mark.parametrize(
    "goal, expected",
    [
        ("acceptComputation(OrgType, CT)", []),
        ("acceptComputation(public_university, CT)", []),
        ("acceptComputation(public_university, machine_learning)", [{}]),
        ("acceptComputation(private_research, simple_statistics)", [{}]),
        ("acceptComputation(private_research, machine_learning)", []),
        ("acceptComputation(public_university, simple_statistics)", []),
    ],
)
def test_accept_computation_solution_set(registry, goal, expected):
    assert solve_all([_corpus("research_seller")], parse_query(goal), registry) == expected


# ── answers hold when substituted back ──────────────────────────────────────

GRAPH = """
accept(_, _, _).
edge(a, b).
edge(b, c).
edge(c, d).
edge(b, d).
path(X, Y) :- edge(X, Y).
path(X, Y) :- edge(X, Z), path(Z, Y).
label(f(a, N), N) :- N > 0.
"""


@pytest.mark.parametrize(
    "goal",
    [
        "path(a, Y)",
        "path(X, d)",
        "path(X, Y)",
        "edge(X, X)",
        "label(f(a, 3), L)",
        "path(b, Y)",
    ],
)
def test_answers_resolve_when_substituted(goal):
    program = Program([parse_policy(GRAPH, id="graph")])
    registry = core_registry()
    query = parse_query(goal)
    answers = solve_all(program, query, registry)
    for answer in answers:
        grounded = substitute(query, answer)
        assert solve(program, grounded, registry) == {}


def test_graph_answers_are_complete():
    program = Program([parse_policy(GRAPH, id="graph")])
    answers = solve_all(program, parse_query("path(a, Y)"), core_registry())
    assert sorted({a["Y"].name for a in answers}) == ["b", "c", "d"]


# ── repeated evaluation ─────────────────────────────────────────────────────

@pytest.mark.parametrize(
    "name, num_records, computation_type",
    [
        ("research_seller", 150, "machine_learning"),
        ("research_seller", 100, "machine_learning"),
        ("helper_chain", 101, "simple_statistics"),
        ("nested_terms", 100, "machine_learning"),
        ("country_restricted", 150, "simple_statistics"),
    ],
)
def test_evaluation_is_deterministic(registry, name, num_records, computation_type):
    document = _presentation("public_university")
    shared = Program([_corpus(name)])
    outcomes = []
    for program in (shared, shared, Program([_corpus(name)])):
        trace = EvaluationTrace()
        context = EvaluationContext()
        query = Compound("accept", (context.handles.register(document), Integer(num_records), Atom(computation_type)))
        answer = solve(program, query, registry, context=context, trace=trace)
        outcomes.append((answer, trace.steps, trace.events, trace.failed_goal))
    assert outcomes[0] == outcomes[1] == outcomes[2]
