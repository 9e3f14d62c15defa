import numpy as np
import pytest
from hypothesis import given, strategies as st

from fsalearn import (Provenance, TraceFormatError, TraceSet, Valuation, generate_trace_set, parse_system,
                      read_traces, replays, simulate, step, write_traces)
from fsalearn.traces import read_csv, read_json, write_csv
from conftest import counter


def test_counter_simulation():
    assert simulate(counter(), 5, 4) == tuple(Valuation(c=v) for v in (1, 2, 3, 0))


def test_same_seed_same_trace(heater):
    assert simulate(heater.system, 11, 30) == simulate(heater.system, 11, 30)
    assert simulate(heater.system, 11, 30) != simulate(heater.system, 12, 30)


def test_heater_modes_appear_in_initial_set(heater):
    ts = generate_trace_set(heater.system, 50, 50, seed=0)
    seen = {o["s"] for t in ts for o in t}
    assert seen == {"Off", "On"}
    assert len(ts) <= 50


def test_single_short_trace():
    ts = generate_trace_set(counter(), 1, 1, seed=0)
    assert len(ts) == 1 and len(ts.traces[0]) == 1


def test_deterministic_system_dedups_to_one():
    assert len(generate_trace_set(counter(), 40, 10, seed=3)) == 1


def test_provenance_records_seed():
    ts = generate_trace_set(counter("(c + 2) mod 4"), 3, 2, seed=9)
    assert ts.provenance[0] == Provenance.random(9, 0)


def test_length_must_be_positive():
    with pytest.raises(ValueError):
        simulate(counter(), 0, 0)
    with pytest.raises(ValueError):
        generate_trace_set(counter(), 0, 5)


def test_generated_traces_replay_and_prefixes(benchmarks):
    for entry, sf in benchmarks:
        if entry.capacity_demo:
            continue
        ts = generate_trace_set(sf.system, 5, 12, seed=1)
        for t in ts:
            assert replays(sf.system, t)
            for i in (1, len(t) // 2):
                assert replays(sf.system, t[:i])


def test_replay_rejects_impossible_trace():
    assert not replays(counter(), (Valuation(c=1), Valuation(c=3)))
    assert not replays(counter(), (Valuation(c=2),))


def test_traces_consecutive_pairs_follow_step(heater):
    sys = heater.system
    t = simulate(sys, 4, 40)
    # observations carry the whole configuration here (the hidden input is not state)
    for a, b in zip(t, t[1:]):
        succ = {step(sys, a, {"hot": h, "go": g}) for h in (False, True) for g in (False, True)}
        assert b in succ


def test_json_round_trip(heater):
    ts = generate_trace_set(heater.system, 6, 7, seed=2)
    extra = TraceSet.build(ts.variables, [ts.traces[0][:2]], [Provenance.counterexample(3, "C4", fallback=True)])
    ts = ts.union(extra)
    assert read_traces(write_traces(ts, "json")) == ts


def test_csv_round_trip(heater):
    ts = generate_trace_set(heater.system, 4, 5, seed=2)
    text = write_csv(ts)
    assert text.splitlines()[2] == "trace,provenance,s,hot"
    assert read_traces(text) == ts
    assert read_csv(text) == ts


def test_missing_binding_names_variable():
    doc = '{"variables":[{"name":"c","domain":"int[0..3]"}],"traces":[{"observations":[{}]}]}'
    with pytest.raises(TraceFormatError, match="'c'") as err:
        read_json(doc)
    assert err.value.location == "traces[0].observations[0]"


def test_out_of_domain_value():
    doc = '{"variables":[{"name":"c","domain":"int[0..3]"}],"traces":[{"observations":[{"c": 7}]}]}'
    with pytest.raises(TraceFormatError, match="outside"):
        read_json(doc)


def test_malformed_json_location():
    with pytest.raises(TraceFormatError, match="line 1"):
        read_json("{ nope")


def test_csv_errors():
    with pytest.raises(TraceFormatError, match="variables"):
        read_csv("trace,provenance,c\n0,random:0,1\n")
    head = '# variables: [{"name": "c", "domain": "int[0..3]"}]\n'
    with pytest.raises(TraceFormatError, match="line 3"):
        read_csv(head + "trace,provenance,c\n0,random:0,x\n")


def test_empty_documents():
    assert len(read_traces("")) == 0
    assert len(read_json("  \n")) == 0
    assert len(read_csv("")) == 0


@given(st.integers(0, 10 ** 6), st.integers(1, 20))
def test_simulation_prefix_is_positive(seed, length):
    sys = parse_system("""
        state m: {A, B} observe; state n: int[0..2]; input u: bool;
        init m = A and n = 0;
        on u { n' = (n + 1) mod 3; m' = if n = 2 then B else A }
        else { m' = A }""").system
    t = simulate(sys, seed, length)
    assert replays(sys, t)
    assert replays(sys, t[: max(1, length // 2)])
