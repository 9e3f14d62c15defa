# %% [markdown]
# # Transition systems and their traces
#
# A system is written in the small `.ts-dsl` language: typed variables, an
# initial predicate and guarded commands. Only `observe` variables show up in
# traces, so a trace is what an outside observer would log.

# %%
from fsalearn import parse_system, step, successors, reachable_states, generate_trace_set, write_traces

SOURCE = """
system thermostat;
state mode: {Idle, Heating} observe;
state temp: int[0..3] observe;
input cold: bool;

init mode = Idle and temp = 2;
on mode = Idle and cold and temp > 0 { temp' = temp - 1; mode' = Heating }
on mode = Heating and temp < 3 { temp' = temp + 1 }
on mode = Heating and temp = 3 { mode' = Idle }
else { }
"""
sf = parse_system(SOURCE)
sys = sf.system
print(sys.name, [v.name for v in sys.observed])

# %% Single steps are deterministic once the input is fixed.
s0 = {"mode": "Idle", "temp": 2}
print(step(sys, s0, {"cold": True}))
print(sorted(map(str, successors(sys, s0))))

# %% Exhaustive reachability works because every domain is finite.
print(len(reachable_states(sys, 1000)), "reachable configurations")

# %% Random simulation: trace i uses seed [seed, i], so trace sets are reproducible.
ts = generate_trace_set(sys, count=5, length=6, seed=1)
print(len(ts), "distinct traces")
print(write_traces(ts, "csv"))
