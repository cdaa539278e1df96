"""Tests for Shamir sharing and the share-local linear computations."""
import os
import random
import sys

sys.path.insert(0, os.path.join(os.path.dirname(__file__), "..", ".."))

import numpy as np
import pytest
from scipy import stats

from tollgate.errors import (
    DuplicateEvaluationPoint,
    InsufficientShares,
    InvalidEvaluationPoint,
    LengthMismatch,
    ResultOutOfRange,
    SecretOutOfRange,
)
from tollgate.sharing.shamir import (
    DEFAULT_PRIME,
    DEFAULT_VALUE_BOUND,
    Share,
    SharingParams,
    check_value_bound,
    constant_share,
    decode,
    encode,
    local_dot,
    local_sum,
    reconstruct,
    share,
)


class _SeededRandom(random.Random):
    """``secrets.SystemRandom``-compatible source with a fixed seed."""


# ── params and encoding ─────────────────────────────────────────────────────

def test_params_validation():
    with pytest.raises(ValueError):
        SharingParams(n=1)
    with pytest.raises(ValueError):
        SharingParams(n=5, prime=5)
    params = SharingParams(n=3)
    assert params.threshold == 3
    assert params.prime == DEFAULT_PRIME


@pytest.mark.parametrize("value", [0, 1, -1, 12345, -(2**60 - 1), 2**60 - 1])
def test_encode_decode(value):
    params = SharingParams(n=2)
    assert decode(encode(value, params), params) == value


def test_encode_out_of_range():
    params = SharingParams(n=2, prime=101)
    with pytest.raises(SecretOutOfRange):
        encode(51, params)
    assert decode(encode(-50, params), params) == -50


# ── sharing and reconstruction ──────────────────────────────────────────────

def test_round_trips():
    rng = _SeededRandom(7)
    for n in range(2, 6):
        params = SharingParams(n=n)
        for _ in range(2500):
            secret = rng.randint(-(2**40), 2**40)
            shares = share(secret, params, rng)
            assert [s.x for s in shares] == list(range(1, n + 1))
            rng.shuffle(shares)
            assert reconstruct(shares, params) == secret


@pytest.mark.parametrize("n", [2, 3, 5])
def test_missing_share_is_insufficient(n):
    params = SharingParams(n=n)
    shares = share(42, params)
    with pytest.raises(InsufficientShares) as info:
        reconstruct(shares[:-1], params)
    assert info.value.details == {"required": n, "received": n - 1}


def test_duplicate_evaluation_point():
    params = SharingParams(n=3)
    shares = share(42, params)
    with pytest.raises(DuplicateEvaluationPoint):
        reconstruct([shares[0], shares[0], shares[1]], params)


@pytest.mark.parametrize("x", [0, DEFAULT_PRIME, DEFAULT_PRIME + 1, 4, -1])
def test_evaluation_point_outside_node_range(x):
    params = SharingParams(n=3)
    shares = share(42, params)
    with pytest.raises(InvalidEvaluationPoint):
        reconstruct([Share(x, shares[0].y), shares[1], shares[2]], params)


def test_share_wire_form():
    s = Share(x=2, y=2**60)
    assert s.to_dict() == {"x": 2, "y": str(2**60)}
    assert Share.from_dict(s.to_dict()) == s


def test_any_n_minus_one_shares_look_uniform():
    # with N-1 shares of a fixed secret, each share value is uniform over Z_p
    params = SharingParams(n=3, prime=101)
    rng = _SeededRandom(99)
    samples = np.array([share(7, params, rng)[0].y for _ in range(100_000)])
    observed = np.bincount(samples, minlength=params.prime)
    _, p_value = stats.chisquare(observed)
    assert p_value > 0.01


# ── linear computations ─────────────────────────────────────────────────────

def _columns(records, params, rng):
    per_record = [share(v, params, rng) for v in records]
    return [[shares[i].y for shares in per_record] for i in range(params.n)]


def test_sum_is_homomorphic():
    rng = _SeededRandom(3)
    params = SharingParams(n=3)
    records = [rng.randint(-1000, 1000) for _ in range(200)]
    columns = _columns(records, params, rng)
    result = [Share(i + 1, local_sum(col, params)) for i, col in enumerate(columns)]
    assert reconstruct(result, params) == sum(records)


def test_dot_is_homomorphic():
    rng = _SeededRandom(4)
    params = SharingParams(n=4)
    records = [rng.randint(-500, 500) for _ in range(50)]
    weights = [rng.randint(-10, 10) for _ in range(50)]
    columns = _columns(records, params, rng)
    result = [Share(i + 1, local_dot(col, weights, params)) for i, col in enumerate(columns)]
    assert reconstruct(result, params) == sum(w * v for w, v in zip(weights, records))


def test_count_as_constant_share():
    params = SharingParams(n=3)
    result = [Share(x, constant_share(150, params)) for x in (1, 2, 3)]
    assert reconstruct(result, params) == 150


def test_dot_length_mismatch():
    params = SharingParams(n=2)
    with pytest.raises(LengthMismatch):
        local_dot([1, 2, 3], [1, 2], params)


def test_sum_overflow_guard():
    params = SharingParams(n=2, prime=101)
    with pytest.raises(ResultOutOfRange):
        local_sum([1, 2, 3], params, value_bound=20)
    assert local_sum([1, 2], params, value_bound=20) == 3


def test_dot_overflow_guard():
    params = SharingParams(n=2, prime=101)
    with pytest.raises(ResultOutOfRange):
        local_dot([1, 1], [10, 10], params, value_bound=5)


# ── per-record bound ────────────────────────────────────────────────────────

def test_value_bound_accepts_edges():
    check_value_bound([DEFAULT_VALUE_BOUND, -DEFAULT_VALUE_BOUND, 0])


@pytest.mark.parametrize("values", [[10**18, 10**18, 10**18], [1, -(DEFAULT_VALUE_BOUND + 1)]])
def test_value_bound_rejects_large_records(values):
    with pytest.raises(SecretOutOfRange) as info:
        check_value_bound(values)
    assert info.value.details["value_bound"] == DEFAULT_VALUE_BOUND


def test_bounded_records_cannot_wrap_the_sum():
    # largest batch the node-side guard admits, every record at the bound
    params = SharingParams(n=3)
    bound = 2**57
    count = params.half // bound
    records = [bound] * count
    check_value_bound(records, bound)
    per_record = [share(v, params) for v in records]
    columns = [[shares[i].y for shares in per_record] for i in range(params.n)]
    result = [Share(i + 1, local_sum(col, params, bound)) for i, col in enumerate(columns)]
    assert reconstruct(result, params) == sum(records) == 7 * 2**57
