import pytest
from hypothesis import HealthCheck, settings

from fsalearn import parse_system
from fsalearn.benchmarks import load_benchmarks

settings.register_profile("default", deadline=None, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")

COUNTER = "state c: int[0..3] observe; init c = 0; on true {{ c' = {update} }}"


def counter(update="(c + 1) mod 4"):
    return parse_system(COUNTER.format(update=update)).system


@pytest.fixture(scope="session")
def benchmarks():
    return load_benchmarks()


@pytest.fixture(scope="session")
def heater():
    from fsalearn.benchmarks import get
    return get("heater").load()


# -- random automata ------------------------------------------------------------------

import numpy as np

from fsalearn import expr as ex
from fsalearn.automaton import SymbolicNFA, Transition
from fsalearn.system import Domain, VariableDecl

OBS = (VariableDecl("x", Domain.integer(0, 3), "state", True),
       VariableDecl("b", Domain.boolean(), "state", True))


def random_label(rng):
    x, b = OBS[0].var(), OBS[1].var()
    atoms = [ex.TRUE, b, ex.Not(b)] + [ex.Cmp(op, x, ex.Const(int(rng.integers(4)), ex.INT))
                                       for op in ("=", "<", ">=", "!=")]
    label = atoms[rng.integers(len(atoms))]
    if rng.random() < 0.4:
        other = atoms[rng.integers(len(atoms))]
        label = ex.And(label, other) if rng.random() < 0.5 else ex.Or(label, other)
    return label


def random_automaton(rng, max_states=6, max_extra=8):
    n = int(rng.integers(1, max_states + 1))
    states = tuple(f"s{i}" for i in range(n))
    edges = []
    for i in range(1, n):      # spanning tree keeps every state reachable
        edges.append(Transition(states[int(rng.integers(i))], random_label(rng), states[i]))
    for _ in range(int(rng.integers(0, max_extra + 1))):
        edges.append(Transition(states[int(rng.integers(n))], random_label(rng), states[int(rng.integers(n))]))
    initial = (states[0],) if rng.random() < 0.8 or n == 1 else (states[0], states[int(rng.integers(1, n))])
    return SymbolicNFA(states, initial, tuple(edges), OBS)


def random_accepted_trace(m, rng, max_len=12):
    """Random walk through ``m`` picking observations that satisfy the chosen edge labels."""
    from fsalearn.system import VarSpace
    space = VarSpace(OBS)
    rows = space.all_rows()
    table = m.label_matrix(rows)
    q = m.initial[int(rng.integers(len(m.initial)))]
    trace = []
    for _ in range(int(rng.integers(0, max_len + 1))):
        options = [(i, t) for i, t in enumerate(m.transitions) if t.src == q and table[:, i].any()]
        if not options:
            break
        i, t = options[int(rng.integers(len(options)))]
        hits = np.flatnonzero(table[:, i])
        trace.append(space.decode(rows[hits[rng.integers(len(hits))]]))
        q = t.dst
    return tuple(trace)


# -- acceptance summary ---------------------------------------------------------------

ACCEPTANCE = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(ACCEPTANCE):
        ok, text = ACCEPTANCE[n]
        terminalreporter.write_line(f"criterion {n:2d}: {'PASS' if ok else 'FAIL'}  {text}")
