import numpy as np
import pytest
from hypothesis import given, strategies as st

from fsalearn import (LearnerConfig, Provenance, TraceSet, Valuation, abstract_alphabet, accepts,
                      generate_trace_set, learn)
from fsalearn import expr as ex
from fsalearn.system import Domain, VarSpace, VariableDecl

S = VariableDecl("s", Domain.enumeration(["Off", "On"]), "state", True)
C = VariableDecl("c", Domain.integer(0, 9), "state", True)


def tset(decls, words):
    names = [d.name for d in decls]
    traces = [tuple(Valuation(zip(names, o if isinstance(o, tuple) else (o,))) for o in w) for w in words]
    return TraceSet.build(decls, traces, [Provenance.random(0, i) for i in range(len(traces))])


def classes_ok(preds, decls, observations):
    space = VarSpace(decls)
    rows = space.encode_many(observations)
    env = space.env(rows)
    table = np.stack([np.broadcast_to(np.asarray(ex.evaluate(p, env), dtype=bool), (len(rows),)) for p in preds])
    return (table.sum(axis=0) == 1).all()


def test_alphabet_both_values():
    preds = abstract_alphabet(tset([S], [["Off", "On"]]))
    assert [ex.render(p) for p in preds] == ["s = Off", "s = On"]


def test_alphabet_constant_gets_complement():
    preds = abstract_alphabet(tset([C], [[0, 0]]))
    assert [ex.render(p) for p in preds] == ["c = 0", "not c = 0"]
    assert classes_ok(preds, [C], [Valuation(c=v) for v in range(10)])


def test_alphabet_interval_split():
    ts = tset([C], [[0, 1, 9]])
    preds = abstract_alphabet(ts, LearnerConfig(abstraction="interval", max_splits=2))
    assert [ex.render(p) for p in preds] == ["c <= 1", "c > 1"]
    # each observation lands in exactly one class, as does every domain value
    assert classes_ok(preds, [C], [Valuation(c=v) for v in (0, 1, 9)])
    assert classes_ok(preds, [C], [Valuation(c=v) for v in range(10)])


def test_pta_chain():
    m = learn(tset([S], [["Off", "Off", "On"]]), LearnerConfig(strategy="pta-exact"))
    assert len(m.states) == 4
    assert len(m.transitions) == 3


def test_ktails_two_state_skeleton():
    ts = tset([S], [["Off", "On", "Off", "On"], ["Off", "On", "Off", "On", "Off", "On"]])
    m = learn(ts)
    assert len(m.states) == 2
    assert all(accepts(m, t) for t in ts)


def test_heater_reference_acceptance(heater):
    ref = heater.reference
    off, on = Valuation(s="Off", hot=False), Valuation(s="On", hot=True)
    assert accepts(ref, (off, on, off))
    assert not accepts(ref, (Valuation(s="On", hot=False), off, on))


def test_learned_heater_labels(heater):
    m = learn(generate_trace_set(heater.system, 50, 50, 0))
    assert [(t.src, ex.render(t.label), t.dst) for t in m.transitions] == [
        ("q0", "s = Off", "q0"), ("q0", "s = On and hot", "q1"),
        ("q1", "s = Off and not hot", "q0"), ("q1", "s = On", "q1")]


def test_state_ids_breadth_first(heater):
    m = learn(generate_trace_set(heater.system, 20, 20, 0))
    assert m.states == tuple(f"q{i}" for i in range(len(m.states)))
    assert m.initial == ("q0",)


def test_config_validation():
    with pytest.raises(ValueError):
        LearnerConfig(k_merge=0)
    with pytest.raises(ValueError):
        LearnerConfig(strategy="lstar")
    with pytest.raises(ValueError):
        learn(TraceSet((S,)))


# -- contract properties over random trace sets -------------------------------------

MIXED = (VariableDecl("m", Domain.enumeration(["A", "B", "C"]), "state", True),
         VariableDecl("n", Domain.integer(0, 6), "state", True),
         VariableDecl("f", Domain.boolean(), "state", True))

obs = st.tuples(st.sampled_from(["A", "B", "C"]), st.integers(0, 6), st.booleans())
words = st.lists(st.lists(obs, min_size=1, max_size=8), min_size=1, max_size=6)
configs = st.builds(LearnerConfig, strategy=st.sampled_from(["ktails", "pta-exact"]),
                    k_merge=st.integers(1, 3), abstraction=st.sampled_from(["value", "interval"]),
                    max_splits=st.integers(1, 4))


@given(words, words, configs)
def test_learn_accepts_every_input_trace(w1, w2, cfg):
    ts = tset(MIXED, w1).union(tset(MIXED, w2))
    m = learn(ts, cfg)
    for t in ts:
        assert accepts(m, t)
        assert accepts(m, t[: len(t) // 2])


@given(words, configs)
def test_learn_is_deterministic(w, cfg):
    ts = tset(MIXED, w)
    assert learn(ts, cfg) == learn(ts, cfg)


@given(words, configs)
def test_alphabet_partitions_observations(w, cfg):
    ts = tset(MIXED, w)
    preds = abstract_alphabet(ts, cfg)
    every = [o for t in ts for o in t]
    assert classes_ok(preds, MIXED, every)
    space = VarSpace(MIXED)
    assert classes_ok(preds, MIXED, space.decode_many(space.all_rows()))
