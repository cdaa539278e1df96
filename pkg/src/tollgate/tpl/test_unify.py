"""Tests for unification."""
import itertools
import os
import random
import sys

sys.path.insert(0, os.path.join(os.path.dirname(__file__), "..", ".."))

import pytest

from tollgate.tpl.terms import Atom, Compound, Integer, Text, Variable
from tollgate.tpl.unify import substitute, unify

X, Y, Z = Variable("X"), Variable("Y"), Variable("Z")


def f(*args):
    return Compound("f", tuple(args))


# ── basic cases ─────────────────────────────────────────────────────────────

def test_identical_constants():
    assert unify(Atom("a"), Atom("a")) == {}
    assert unify(Integer(3), Integer(3)) == {}


def test_distinct_constants_fail():
    assert unify(Atom("a"), Atom("b")) is None
    assert unify(Integer(1), Atom("a")) is None
    assert unify(Text("a"), Atom("a")) is None


def test_variable_binds():
    assert unify(X, Atom("a")) == {"X": Atom("a")}


def test_nested_compound():
    theta = unify(f(X, Compound("g", (Y,))), f(Atom("a"), Compound("g", (Integer(2),))))
    assert theta == {"X": Atom("a"), "Y": Integer(2)}


def test_functor_and_arity_must_match():
    assert unify(f(X), Compound("g", (X,))) is None
    assert unify(f(X), f(X, Y)) is None


def test_bindings_are_normalized():
    theta = unify(f(X, Y), f(Y, Atom("a")))
    assert theta == {"X": Atom("a"), "Y": Atom("a")}


def test_occurs_check():
    assert unify(X, f(X)) is None
    assert unify(f(X, Y), f(Y, f(X))) is None


def test_input_bindings_not_mutated():
    start = {"X": Atom("a")}
    theta = unify(Y, X, start)
    assert start == {"X": Atom("a")}
    assert theta == {"X": Atom("a"), "Y": Atom("a")}


def test_conflict_with_existing_binding():
    assert unify(X, Atom("b"), {"X": Atom("a")}) is None


# ── soundness over random terms ─────────────────────────────────────────────

def _random_term(rng: random.Random, depth: int):
    pick = rng.random()
    if depth == 0 or pick < 0.3:
        return rng.choice([X, Y, Z])
    if pick < 0.5:
        return rng.choice([Atom("a"), Atom("b"), Integer(1), Integer(2)])
    arity = rng.randint(1, 3)
    return Compound(rng.choice(["f", "g"]), tuple(_random_term(rng, depth - 1) for _ in range(arity)))


def test_unifier_makes_terms_equal():
    rng = random.Random(1234)
    unified = 0
    for _ in range(2000):
        a, b = _random_term(rng, 3), _random_term(rng, 3)
        theta = unify(a, b)
        if theta is None:
            continue
        unified += 1
        assert substitute(a, theta) == substitute(b, theta)
        # idempotent: applying twice changes nothing
        for value in theta.values():
            assert substitute(value, theta) == value
    assert unified > 100


GROUND = [Atom("a"), Atom("b"), Integer(1), Integer(2), f(Atom("a")), Compound("g", (Atom("b"),)), f(Integer(1), Integer(2))]


@pytest.mark.parametrize("seed", [7, 99, 2024])
def test_failed_unification_has_no_equating_substitution(seed):
    rng = random.Random(seed)
    failed = 0
    for _ in range(400):
        a, b = _random_term(rng, 2), _random_term(rng, 2)
        if unify(a, b) is not None:
            continue
        failed += 1
        for values in itertools.product(GROUND, repeat=3):
            env = dict(zip(("X", "Y", "Z"), values))
            assert substitute(a, env) != substitute(b, env)
    assert failed > 20
