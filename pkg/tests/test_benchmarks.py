import pytest

from fsalearn import reachable_states, run
from fsalearn.benchmarks import BenchmarkEntry, get, list_benchmarks, load_benchmarks

REQUIRED = {"heater", "vending_machine", "traffic_light", "counter_scheduler", "security_system", "rare_guard"}


def test_suite_contents(benchmarks):
    names = {e.name for e, _ in benchmarks}
    assert len(benchmarks) >= 8
    assert REQUIRED <= names
    assert sum(e.capacity_demo for e, _ in benchmarks) == 1
    assert any(e.rare for e, _ in benchmarks)


def test_heater_reference_has_two_states():
    assert len(get("heater").load().reference.states) == 2


def test_entries_declare_k(benchmarks):
    for e, sf in benchmarks:
        assert e.k >= 2
        assert sf.options.get("k") == e.k
        if not e.capacity_demo:
            assert e.expected["alpha"] == 1


def test_reachable_state_counts_within_policy(benchmarks):
    for e, sf in benchmarks:
        assert len(reachable_states(sf.system, 10 ** 5)) <= 10 ** 5


def test_unknown_benchmark():
    with pytest.raises(KeyError, match="available"):
        get("nope")


def test_declared_k_must_be_two_or_more():
    with pytest.raises(ValueError):
        BenchmarkEntry("x", "x.ts-dsl", 1, {})


@pytest.mark.parametrize("entry", [e for e in list_benchmarks() if not e.capacity_demo], ids=lambda e: e.name)
def test_benchmark_meets_expectations(entry):
    sf = entry.load()
    m, report = run(sf.system, entry.loop_config(), reference=sf.reference)
    exp = entry.expected
    assert report.status == exp["status"]
    assert exp["i"][0] <= report.i <= exp["i"][1]
    assert report.N == exp["N"]
    assert report.alpha == exp["alpha"] and report.d == exp["d"]
