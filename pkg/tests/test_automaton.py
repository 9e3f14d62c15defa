import json

import numpy as np
import pytest
from hypothesis import given, strategies as st

from fsalearn import SymbolicNFA, Transition, Valuation, accepts, equivalent_labels, parse_expr, to_dot
from fsalearn import automaton as fa
from fsalearn import expr as ex
from conftest import OBS, random_accepted_trace, random_automaton


def lab(text):
    return parse_expr(text, OBS, allow_primed=False)


def chain():
    return SymbolicNFA(("a", "b", "c", "d"), ("a",), (
        Transition("a", lab("x = 0"), "b"), Transition("b", lab("x = 1"), "c"),
        Transition("c", lab("x = 2"), "d")), OBS)


def obs(x, b=False):
    return Valuation(x=x, b=b)


def test_accepts_and_dead_end():
    m = chain()
    assert accepts(m, ())
    assert accepts(m, (obs(0), obs(1), obs(2)))
    assert not accepts(m, (obs(0), obs(1), obs(2), obs(3)))
    assert not accepts(m, (obs(1),))
    assert [len(s) for s in m.run_rows(m.observation_space.encode_many([obs(0), obs(2)]))] == [1, 0]


def test_nondeterminism_tracks_all_states():
    m = SymbolicNFA(("a", "b", "c"), ("a",), (
        Transition("a", lab("true"), "b"), Transition("a", lab("b"), "c"),
        Transition("c", lab("x = 3"), "c")), OBS)
    assert accepts(m, (obs(0, True), obs(3)))
    assert not accepts(m, (obs(0, False), obs(3)))


def test_construction_invariants():
    with pytest.raises(ValueError, match="unreachable"):
        SymbolicNFA(("a", "b"), ("a",), (), OBS)
    with pytest.raises(ValueError, match="unknown"):
        SymbolicNFA(("a",), ("z",), (), OBS)
    with pytest.raises(ValueError, match="primes"):
        SymbolicNFA(("a",), ("a",), (Transition("a", parse_expr("x' = 1", OBS), "a"),), OBS)


def test_json_round_trip():
    m = chain()
    again = fa.from_json(json.loads(fa.dumps(m)))
    assert again == m


def test_dot_export():
    dot = to_dot(chain(), "demo")
    assert dot.startswith('digraph "demo"')
    assert '"a" -> "b" [label="x = 0"];' in dot


def test_equivalent_labels():
    assert equivalent_labels(lab("x < 2"), lab("x = 0 or x = 1"), OBS)
    assert equivalent_labels(lab("b and x >= 0"), lab("b"), OBS)
    assert not equivalent_labels(lab("x < 2"), lab("x <= 2"), OBS)


def test_batch_acceptance_matches_single():
    rng = np.random.default_rng(3)
    m = random_automaton(rng)
    traces = [tuple(obs(int(rng.integers(4)), bool(rng.integers(2))) for _ in range(5)) for _ in range(30)]
    rows = np.stack([m.observation_space.encode_many(list(t)) for t in traces])
    assert list(m.accepts_rows(rows)) == [accepts(m, t) for t in traces]


@given(st.integers(0, 2 ** 32 - 1))
def test_prefix_closure(seed):
    rng = np.random.default_rng(seed)
    m = random_automaton(rng)
    t = random_accepted_trace(m, rng)
    assert accepts(m, t)
    for i in range(len(t) + 1):
        assert accepts(m, t[:i])
