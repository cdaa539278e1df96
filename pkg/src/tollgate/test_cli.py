"""Tests for the command line entry point and the scripted demo."""
import json
import os
import sys

sys.path.insert(0, os.path.join(os.path.dirname(__file__), ".."))

import pytest

from tollgate.__main__ import EXIT_DENIED, EXIT_USAGE, main
from tollgate.credentials.issuer import BuyerIdentity, TestIssuer
from tollgate.demo import run_demo
from tollgate.paths import POLICY_CORPUS_DIR

RESEARCH_SELLER = str(POLICY_CORPUS_DIR / "research_seller.tpl")


@pytest.fixture
def presentation(tmp_path):
    issuer = TestIssuer.create("did:ex:uni-registry")
    holder = BuyerIdentity.create("did:ex:alice")
    vp = holder.present(issuer.issue(holder, {"organization_type": "public_university"}), [], "ab" * 32)
    path = tmp_path / "vp.json"
    path.write_text(json.dumps(vp.to_dict()), encoding="utf-8")
    return str(path)


# ── tpl ─────────────────────────────────────────────────────────────────────

def test_tpl_check_ok(capsys):
    assert main(["tpl", "check", RESEARCH_SELLER]) == 0
    assert "✓" in capsys.readouterr().out


def test_tpl_check_failure(tmp_path, capsys):
    bad = tmp_path / "bad.tpl"
    bad.write_text("helper(x).\n", encoding="utf-8")
    assert main(["tpl", "check", RESEARCH_SELLER, str(bad)]) == EXIT_USAGE
    assert "missing_entry_point" in capsys.readouterr().out


@pytest.mark.parametrize(
    "records,computation,code",
    [("150", "machine_learning", 0), ("100", "machine_learning", EXIT_DENIED), ("150", "simple_statistics", EXIT_DENIED)],
)
def test_tpl_eval_exit_codes(presentation, records, computation, code):
    argv = ["tpl", "eval", RESEARCH_SELLER, "--presentation", presentation,
            "--num-records", records, "--computation", computation]
    assert main(argv) == code


def test_tpl_eval_trace(presentation, capsys):
    main(["tpl", "eval", RESEARCH_SELLER, "--presentation", presentation,
          "--num-records", "100", "--computation", "machine_learning", "--trace"])
    out = capsys.readouterr().out
    assert "denied at 100 > 100" in out


def test_tpl_eval_missing_presentation(tmp_path):
    argv = ["tpl", "eval", RESEARCH_SELLER, "--presentation", str(tmp_path / "none.json")]
    assert main(argv) == EXIT_USAGE


def test_tpl_eval_query():
    argv = ["tpl", "eval", RESEARCH_SELLER, "--query", "acceptComputation(private_research, simple_statistics)"]
    assert main(argv) == 0


# ── demo ────────────────────────────────────────────────────────────────────

def test_demo_outcomes(tmp_path):
    outcomes = run_demo(tmp_path, records=150)
    summary = [(o.buyer, o.computation_type, o.op, o.granted) for o in outcomes]
    assert summary == [
        ("alice", "machine_learning", "mean", True),
        ("bob", "simple_statistics", "sum", True),
        ("bob", "machine_learning", "sum", False),
    ]
    assert all(o.correct for o in outcomes)
    assert outcomes[2].denial == "policy_denied"


def test_demo_command(tmp_path, capsys):
    assert main(["demo", "--root", str(tmp_path), "--records", "120"]) == 0
    assert "denied (policy_denied)" in capsys.readouterr().out
