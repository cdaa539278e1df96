"""Tests for the interpreter benchmark harness."""
import os
import sys

sys.path.insert(0, os.path.join(os.path.dirname(__file__), "..", ".."))

from tollgate.tpl.bench import (
    BenchRow,
    format_table,
    padded_policy,
    run_benchmark,
    scaling_ratios,
)


def test_padded_policy_size():
    assert len(padded_policy("p", 3).clauses) == 3
    assert len(padded_policy("p", 20).clauses) == 20
    assert len(padded_policy("p", 1).clauses) == 3


def test_run_benchmark_grid():
    rows = run_benchmark(policy_counts=(1, 2), predicate_counts=(3, 20), repeats=3)
    assert [(r.policies, r.predicates) for r in rows] == [(1, 3), (1, 20), (2, 3), (2, 20)]
    assert all(r.mean_sec > 0 and r.repeats == 3 for r in rows)


def test_scaling_ratios_and_table():
    rows = [
        BenchRow(1, 3, 0.01, 0.0, 5),
        BenchRow(1, 100, 0.012, 0.0, 5),
        BenchRow(100, 3, 0.95, 0.0, 5),
    ]
    ratios = scaling_ratios(rows)
    assert round(ratios["policies"]) == 95
    assert round(ratios["predicates"], 1) == 1.2
    table = format_table(rows)
    assert table.splitlines()[0].startswith("# policies")
    assert len(table.splitlines()) == 4


def test_runtime_grows_linearly_with_policy_count():
    rows = run_benchmark(policy_counts=(1, 100), predicate_counts=(3,), repeats=10)
    ratio = scaling_ratios(rows)["policies"]
    assert 50 <= ratio <= 200


def test_runtime_barely_depends_on_predicate_count():
    rows = run_benchmark(policy_counts=(1,), predicate_counts=(3, 100), repeats=20)
    assert scaling_ratios(rows)["predicates"] <= 2.0
