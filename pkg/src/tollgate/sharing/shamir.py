"""Full-threshold Shamir sharing over a prime field, plus share-local linear ops.

Signed integers are encoded into ``[0, p)`` by reduction mod p and decoded
by centering, so any |v| < p/2 survives a round trip.  All N shares are
needed for reconstruction (polynomial degree N − 1).

Usage::

    params = SharingParams(n=3)
    shares = share(42, params)
    assert reconstruct(shares, params) == 42
"""
from __future__ import annotations

import secrets
from dataclasses import dataclass
from typing import Any, Dict, Iterable, List, Optional, Sequence

from tollgate.errors import (
    DuplicateEvaluationPoint,
    InsufficientShares,
    InvalidEvaluationPoint,
    LengthMismatch,
    ResultOutOfRange,
    SecretOutOfRange,
)

DEFAULT_PRIME = 2**61 - 1
#: Per-record magnitude bound used by the static range checks of the linear ops.
DEFAULT_VALUE_BOUND = 2**31


@dataclass(frozen=True)
class SharingParams:
    n: int
    prime: int = DEFAULT_PRIME

    def __post_init__(self) -> None:
        if self.n < 2:
            raise ValueError(f"need at least 2 nodes, got n={self.n}")
        if self.prime < 3:
            raise ValueError(f"field modulus must be an odd prime, got {self.prime}")
        if self.n >= self.prime:
            raise ValueError("n must be smaller than the field modulus")

    @property
    def threshold(self) -> int:
        return self.n

    @property
    def half(self) -> int:
        return self.prime // 2


@dataclass(frozen=True)
class Share:
    x: int
    y: int

    def to_dict(self) -> Dict[str, Any]:
        return {"x": self.x, "y": str(self.y)}

    @classmethod
    def from_dict(cls, raw: Dict[str, Any]) -> "Share":
        return cls(x=int(raw["x"]), y=int(raw["y"]))


# ── encoding ───────────────────────────────────────────────────────────────


def encode(value: int, params: SharingParams) -> int:
    if abs(value) > params.half:
        raise SecretOutOfRange(
            f"|{value}| exceeds the field encoding range p/2",
            value=str(value),
        )
    return value % params.prime


def check_value_bound(values: Iterable[int], value_bound: int = DEFAULT_VALUE_BOUND) -> None:
    """Reject records the share-local range checks do not account for.

    Raises
    ------
    SecretOutOfRange
        If any |value| exceeds *value_bound*.
    """
    for position, value in enumerate(values):
        if abs(value) > value_bound:
            raise SecretOutOfRange(
                f"record {position} has magnitude above the per-record bound {value_bound}",
                position=position,
                value_bound=value_bound,
            )


def decode(element: int, params: SharingParams) -> int:
    element %= params.prime
    return element - params.prime if element > params.half else element


# ── sharing ────────────────────────────────────────────────────────────────


def _evaluate(coefficients: Sequence[int], x: int, p: int) -> int:
    acc = 0
    for c in reversed(coefficients):
        acc = (acc * x + c) % p
    return acc


def share(
    secret: int,
    params: SharingParams,
    rng: Optional[secrets.SystemRandom] = None,
) -> List[Share]:
    """Split *secret* into ``params.n`` shares at x = 1..N.

    Raises
    ------
    SecretOutOfRange
        If |secret| ≥ p/2.
    """
    rng = rng or secrets.SystemRandom()
    p = params.prime
    coefficients = [encode(secret, params)] + [rng.randrange(p) for _ in range(params.n - 1)]
    return [Share(x, _evaluate(coefficients, x, p)) for x in range(1, params.n + 1)]


def reconstruct(shares: Sequence[Share], params: SharingParams) -> int:
    """Lagrange interpolation at x = 0, decoded to a signed integer.

    Raises
    ------
    InsufficientShares
        If fewer than N shares are given.
    InvalidEvaluationPoint
        If a share's x lies outside 1..N.
    DuplicateEvaluationPoint
        If two shares carry the same x.
    """
    bad = sorted(s.x for s in shares if not 1 <= s.x <= params.n)
    if bad:
        raise InvalidEvaluationPoint(f"evaluation points must lie in 1..{params.n}", points=bad)
    xs = [s.x for s in shares]
    if len(set(xs)) != len(xs):
        raise DuplicateEvaluationPoint("shares repeat an evaluation point", points=sorted(xs))
    if len(shares) < params.threshold:
        raise InsufficientShares(
            f"need {params.threshold} shares, got {len(shares)}",
            required=params.threshold,
            received=len(shares),
        )
    p = params.prime
    total = 0
    for i, si in enumerate(shares):
        num, den = 1, 1
        for j, sj in enumerate(shares):
            if i == j:
                continue
            num = num * (-sj.x) % p
            den = den * (si.x - sj.x) % p
        total = (total + si.y * num * pow(den, -1, p)) % p
    return decode(total, params)


# ── share-local linear computations ────────────────────────────────────────


def local_sum(
    records: Sequence[int],
    params: SharingParams,
    value_bound: int = DEFAULT_VALUE_BOUND,
) -> int:
    """Share of Σ records; raises :exc:`ResultOutOfRange` if the bound could overflow."""
    if len(records) * value_bound > params.half:
        raise ResultOutOfRange(
            f"{len(records)} records of magnitude ≤ {value_bound} may exceed the field range",
        )
    return sum(records) % params.prime


def local_dot(
    records: Sequence[int],
    weights: Sequence[int],
    params: SharingParams,
    value_bound: int = DEFAULT_VALUE_BOUND,
) -> int:
    """Share of Σ wᵢ·vᵢ for public signed weights."""
    if len(records) != len(weights):
        raise LengthMismatch(
            f"{len(weights)} weights for {len(records)} records",
            records=len(records),
            weights=len(weights),
        )
    if sum(abs(w) for w in weights) * value_bound > params.half:
        raise ResultOutOfRange("weights are too large for the field range")
    p = params.prime
    return sum((w % p) * y for w, y in zip(weights, records)) % p


def constant_share(value: int, params: SharingParams) -> int:
    """Share of a public value: the constant polynomial, identical on every node."""
    return encode(value, params)
