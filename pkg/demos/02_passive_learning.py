# %% [markdown]
# # Learning an automaton from traces
#
# The learner abstracts observations into a small alphabet of predicates and
# then folds the prefix tree of the abstracted traces. With `ktails`, states
# sharing their recent history and short futures collapse into one.

# %%
from fsalearn import LearnerConfig, abstract_alphabet, accepts, generate_trace_set, learn, to_dot
from fsalearn.benchmarks import get

sys = get("heater").load().system
traces = generate_trace_set(sys, count=50, length=50, seed=0)

# %% The alphabet: mutually exclusive predicates covering every observation.
from fsalearn.expr import render
print([render(p) for p in abstract_alphabet(traces)])

# %% Two strategies over the same data.
pta = learn(traces, LearnerConfig(strategy="pta-exact"))
kt = learn(traces, LearnerConfig(strategy="ktails", k_merge=1))
print("prefix tree:", len(pta.states), "states;  ktails:", len(kt.states), "states")
assert all(accepts(kt, t) for t in traces.traces)

# %% Graphviz output for inspection.
print(to_dot(kt, "heater"))
