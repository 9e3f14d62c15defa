"""Acceptance criteria 1-10; a summary line per criterion is printed after the run."""
import time
from contextlib import contextmanager

import numpy as np
import pytest

from conftest import ACCEPTANCE, counter, random_accepted_trace, random_automaton
from fsalearn import (CheckerConfig, LoopConfig, accepts, baseline_random, condition_count,
                      extract_conditions, is_spurious, reachable_states, run, trace_inclusion_oracle)
from fsalearn.benchmarks import get, list_benchmarks
from fsalearn.cli import main
from fsalearn.checker import Reachable, Spurious
from fsalearn.learner import LearnerConfig
from fsalearn.system import successors
from fsalearn.traces import simulate_rows

ENTRIES = list_benchmarks()
LEARNABLE = [e for e in ENTRIES if not e.capacity_demo]


@contextmanager
def criterion(n, text):
    ACCEPTANCE[n] = (False, text)
    yield
    ACCEPTANCE[n] = (True, text)


@pytest.fixture(scope="module")
def runs():
    out = {}
    for e in ENTRIES:
        sf = e.load()
        t0 = time.monotonic()
        m, report = run(sf.system, e.loop_config(), reference=sf.reference)
        out[e.name] = (e, sf, m, report, time.monotonic() - t0)
    return out


def test_1_complete_abstractions_include_all_traces(runs):
    with criterion(1, "alpha = 1 implies inclusion: oracle + 10,000 random traces of length 50"):
        checked = 0
        for e, sf, m, report, _ in runs.values():
            if report.alpha != 1:
                continue
            cfg = e.loop_config().checker
            assert trace_inclusion_oracle(sf.system, m, cfg).kind == "holds", e.name
            for start in range(0, 10_000, 1000):
                rngs = [np.random.default_rng([20240, i]) for i in range(start, start + 1000)]
                rows = simulate_rows(sf.system, rngs, 50)
                assert m.accepts_rows(rows).all(), e.name
            checked += 1
        assert checked == len(LEARNABLE)


def test_2_learned_models_match_references(runs):
    with criterion(2, "d = 1 on every benchmark that finishes"):
        for e, sf, m, report, _ in runs.values():
            if report.status in ("timeout", "capacity"):
                continue
            assert report.d == 1, (e.name, report.d)


def test_3_condition_count_identity():
    with criterion(3, "condition count = 1 + sum of distinct incoming labels (100 random automata)"):
        sys = counter()
        rng = np.random.default_rng(3)
        for _ in range(100):
            m = random_automaton(rng)
            assert len(extract_conditions(m, sys)) == condition_count(m)
            expected = 1 + sum(len({t.label for t in m.incoming(q)}) for q in m.states)
            assert condition_count(m) == expected


def _triage_all(sys, cfg):
    cs = sys.config_space
    reach = reachable_states(sys, 10 ** 5, cfg.enum_cap)
    counts = {"spurious": 0, "reachable": 0, "inconclusive": 0}
    for flat in range(cs.size):
        v = cs.decode(cs.rows(np.array([flat]))[0])
        verdict = is_spurious(sys, v, cfg)
        counts[verdict.kind] += 1
        if isinstance(verdict, Spurious):
            assert v not in reach
        elif isinstance(verdict, Reachable):
            w = verdict.witness
            assert w[-1] == v and len(w) <= cfg.k
            assert w[0] in reach
            for a, b in zip(w, w[1:]):
                assert b in successors(sys, a)
    return counts


def test_4_spuriousness_soundness():
    with criterion(4, "spurious verdicts unreachable, reachable witnesses replay"):
        totals = {"spurious": 0, "reachable": 0, "inconclusive": 0}
        systems = [(e.load().system, e.loop_config().checker) for e in LEARNABLE]
        systems += [(counter("c"), CheckerConfig(k=2)), (counter("(c + 2) mod 4"), CheckerConfig(k=2))]
        for sys, cfg in systems:
            for k, v in _triage_all(sys, cfg).items():
                totals[k] += v
        assert totals["spurious"] > 0 and totals["reachable"] > 0


def test_5_inconclusive_case():
    with criterion(5, "c' = (c + 2) mod 4 at k = 2: inconclusive, recorded, alpha = 1"):
        sys = counter("(c + 2) mod 4")
        verdict = is_spurious(sys, {"c": 3}, CheckerConfig(k=2))
        assert verdict.kind == "inconclusive"
        assert [dict(v) for v in verdict.path] == [{"c": 1}, {"c": 3}]
        cfg = LoopConfig(checker=CheckerConfig(k=2), learner=LearnerConfig(abstraction="interval"))
        m, report = run(sys, cfg)
        assert report.status == "success" and report.alpha == 1
        assert len(report.inconclusive) >= 1


def test_6_baseline_separation():
    with criterion(6, "rare guard: baseline alpha < 1 in >= 19/20 seeds, refinement alpha = 1 in 20/20"):
        e = get("rare_guard")
        sys = e.load().system
        baseline, refined = [], []
        for seed in range(20):
            cfg = e.loop_config(seed=seed)
            baseline.append(baseline_random(sys, 1000, cfg).alpha)
            refined.append(run(sys, cfg)[1].alpha)
        assert sum(a < 1 for a in baseline) >= 19
        assert all(a == 1 for a in refined)


def test_7_language_growth(runs):
    with criterion(7, "every refinement adds a trace rejected before and accepted after"):
        multi = 0
        extra = [run(get("rare_guard").load().system, get("rare_guard").loop_config(seed=s))[1] for s in range(1, 4)]
        for report in [r for *_, r, _ in runs.values()] + extra:
            if len(report.models) < 2:
                continue
            multi += 1
            for before, after, new in zip(report.models, report.models[1:], report.counterexample_sets):
                assert any(not accepts(before, t) and accepts(after, t) for t in new.traces)
        assert multi >= 2


def test_8_prefix_closure():
    with criterion(8, "prefixes of accepted traces are accepted (1,000 random pairs)"):
        rng = np.random.default_rng(8)
        for _ in range(1000):
            m = random_automaton(rng)
            trace = random_accepted_trace(m, rng)
            assert accepts(m, trace)
            assert all(accepts(m, trace[:j]) for j in range(len(trace)))


def test_9_reproducibility(tmp_path):
    with criterion(9, "identical manifests give byte-identical reports (3 benchmarks x 2 reruns)"):
        for name in ("heater", "vending_machine", "security_system"):
            first = tmp_path / name / "0"
            assert main(["learn", name, "--seed", "11", "--out", str(first)]) == 0
            for rerun in (1, 2):
                out = tmp_path / name / str(rerun)
                assert main(["replay", str(first / "manifest.json"), "--out", str(out)]) == 0
                for f in ("report.json", "model.json", "model.dot", "invariants.txt"):
                    assert (first / f).read_bytes() == (out / f).read_bytes(), (name, f)


def test_10_desk_scale_budget(runs, tmp_path):
    with criterion(10, "every benchmark under 60 s; the capacity demo exits with code 3"):
        for e, _, _, report, seconds in runs.values():
            assert seconds < 60, (e.name, seconds)
            expected = "capacity" if e.capacity_demo else "success"
            assert report.status == expected, e.name
        demo = next(e for e in ENTRIES if e.capacity_demo)
        assert main(["learn", demo.name, "--out", str(tmp_path)]) == 3
