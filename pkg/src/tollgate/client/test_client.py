"""Tests for the seller/buyer client helpers and the policy developer tool."""
import json
import os
import sys
from fractions import Fraction

sys.path.insert(0, os.path.join(os.path.dirname(__file__), "..", ".."))

import pytest

from tollgate.client.buyer import BuyerResult, finalize
from tollgate.client.seller import SellerAccount, read_records, split_records
from tollgate.client.tpl_tool import check_policy, eval_policy
from tollgate.credentials.issuer import BuyerIdentity, TestIssuer
from tollgate.errors import InsufficientShares, SecretOutOfRange
from tollgate.paths import POLICY_CORPUS_DIR
from tollgate.sharing.shamir import Share, SharingParams, constant_share, reconstruct, share


# ── seller ──────────────────────────────────────────────────────────────────

def test_read_records_with_header(tmp_path):
    path = tmp_path / "data.csv"
    path.write_text("heart_rate\n61\n72.5\n\n-3\n", encoding="utf-8")
    assert read_records(path) == [61, 72, -3]
    assert read_records(path, scale=10) == [610, 725, -30]


@pytest.mark.parametrize("text", ["1\nabc\n", "1,2\n"])
def test_read_records_errors(tmp_path, text):
    path = tmp_path / "data.csv"
    path.write_text(text, encoding="utf-8")
    with pytest.raises(ValueError):
        read_records(path)


def test_split_records_columns():
    params = SharingParams(n=3)
    columns = split_records([5, -7, 11], params)
    assert [len(c) for c in columns] == [3, 3, 3]
    assert all(s.x == i + 1 for i, col in enumerate(columns) for s in col)
    for j, value in enumerate([5, -7, 11]):
        assert reconstruct([col[j] for col in columns], params) == value


def test_split_records_rejects_values_beyond_the_node_bound():
    with pytest.raises(SecretOutOfRange):
        split_records([10**18, 10**18, 10**18], SharingParams(n=3))
    columns = split_records([10**18], SharingParams(n=3), value_bound=10**18)
    assert len(columns) == 3


def test_seller_account_file(tmp_path):
    account = SellerAccount("acct-1", 3, [{"index": 1, "url": "u", "public_key": "k"}])
    account.save(tmp_path / "a" / "seller.json")
    assert SellerAccount.load(tmp_path / "a" / "seller.json") == account
    with pytest.raises(FileNotFoundError):
        SellerAccount.load(tmp_path / "missing.json")


# ── buyer ───────────────────────────────────────────────────────────────────

def _result(op, secret, n=3, count=4):
    params = SharingParams(n=n)
    return BuyerResult(request_id="r", op=op, shares=share(secret, params), count=count)


def test_finalize_sum_and_mean():
    assert finalize(_result("sum", 42), n=3) == 42
    assert finalize(_result("mean", 42), n=3) == Fraction(21, 2)


def test_finalize_applies_scale():
    assert finalize(_result("sum", 725), n=3, scale=10) == Fraction(145, 2)
    params = SharingParams(n=3)
    count = BuyerResult("r", "count", shares=[Share(x, constant_share(4, params)) for x in (1, 2, 3)], count=4)
    assert finalize(count, n=3, scale=10) == 4


def test_finalize_needs_every_share():
    result = _result("sum", 42)
    result.shares = result.shares[:2]
    with pytest.raises(InsufficientShares):
        finalize(result, n=3)


def test_finalize_names_the_missing_node():
    result = _result("sum", 42)
    result.shares = [result.shares[0], result.shares[2]]
    with pytest.raises(InsufficientShares) as info:
        finalize(result, n=3)
    assert info.value.details["missing"] == [2]


# ── tpl check ───────────────────────────────────────────────────────────────

def test_check_corpus_policy():
    report = check_policy(POLICY_CORPUS_DIR / "research_seller.tpl", pretty=True)
    assert report.ok
    assert report.entry_point == "accept/3"
    assert report.warnings == []
    assert "acceptComputation" in report.printed


def test_check_reports_errors_and_warnings(tmp_path):
    broken = tmp_path / "broken.tpl"
    broken.write_text("accept(X, Y, Z) :- \n", encoding="utf-8")
    report = check_policy(broken)
    assert not report.ok
    assert report.errors[0].startswith("syntax_error")

    sloppy = tmp_path / "sloppy.tpl"
    sloppy.write_text("accept(Creds, N, T) :- N > 10, helper(T).\n", encoding="utf-8")
    report = check_policy(sloppy)
    assert report.ok
    assert any("singleton variable Creds" in w for w in report.warnings)
    assert any("undefined predicate helper/1" in w for w in report.warnings)


# ── tpl eval ────────────────────────────────────────────────────────────────

def _presentation(tmp_path, org_type):
    issuer = TestIssuer.create("did:ex:uni-registry")
    holder = BuyerIdentity.create("did:ex:alice")
    vp = holder.present(issuer.issue(holder, {"organization_type": org_type}), [], "ab" * 32)
    path = tmp_path / f"{org_type}.json"
    path.write_text(json.dumps(vp.to_dict()), encoding="utf-8")
    return path


@pytest.mark.parametrize(
    "org_type,computation,granted",
    [
        ("public_university", "machine_learning", True),
        ("public_university", "simple_statistics", False),
        ("private_research", "simple_statistics", True),
        ("private_research", "machine_learning", False),
    ],
)
def test_eval_research_seller(tmp_path, org_type, computation, granted):
    result = eval_policy(
        POLICY_CORPUS_DIR / "research_seller.tpl", _presentation(tmp_path, org_type), 150, computation
    )
    assert result.granted is granted


def test_eval_record_boundary(tmp_path):
    policy = POLICY_CORPUS_DIR / "research_seller.tpl"
    path = _presentation(tmp_path, "public_university")
    assert not eval_policy(policy, path, 100, "machine_learning").granted
    denied = eval_policy(policy, path, 100, "machine_learning")
    assert denied.trace.failed_goal == "100 > 100"
    assert eval_policy(policy, path, 101, "machine_learning").granted


def test_eval_query_needs_no_presentation():
    result = eval_policy(
        POLICY_CORPUS_DIR / "research_seller.tpl", None, 0, "",
        query="acceptComputation(public_university, machine_learning)",
    )
    assert result.granted


def test_eval_missing_files(tmp_path):
    with pytest.raises(FileNotFoundError):
        eval_policy(tmp_path / "absent.tpl", None, 1, "x")
    with pytest.raises(FileNotFoundError):
        eval_policy(POLICY_CORPUS_DIR / "research_seller.tpl", tmp_path / "absent.json", 1, "x")
