# %% [markdown]
# # Checking whether an automaton covers every behaviour
#
# From a candidate automaton we extract implications: whenever the system is
# in a state matching an incoming label, its next observation must match one
# of the outgoing labels. If all of them hold, every trace of the system is
# accepted. Violations found from unreachable states are triaged with
# k-induction and discarded.

# %%
from fsalearn import (CheckerConfig, alpha, check_condition, extract_conditions, invariant_report,
                      is_spurious, learn, generate_trace_set, trace_inclusion_oracle)
from fsalearn.benchmarks import get

entry = get("vending_machine")
sys = entry.load().system
m = learn(generate_trace_set(sys, 50, 50, seed=0))
cfg = CheckerConfig(k=entry.k)
conditions = extract_conditions(m, sys)
verdicts = [check_condition(sys, c, cfg) for c in conditions]
print(invariant_report(conditions))
for c, v in zip(conditions, verdicts):
    print(c.id, v.kind)

# %% A violating predecessor that no run can reach is spurious.
for c, v in zip(conditions, verdicts):
    if v.kind == "violated":
        print(c.id, dict(v.pre), "->", is_spurious(sys, v.pre, cfg).kind)

# %% Small systems also admit a direct inclusion check, independent of the conditions.
print(trace_inclusion_oracle(sys, m, cfg))

# %% Counter example: c' = (c + 2) mod 4 from c = 0 never visits 1 or 3, but
# at k = 2 the step case cannot rule them out.
from fsalearn import parse_system
counter = parse_system("state c: int[0..3] observe; init c = 0; on true { c' = (c + 2) mod 4 }").system
print(is_spurious(counter, {"c": 3}, CheckerConfig(k=2)))
print(is_spurious(counter, {"c": 2}, CheckerConfig(k=2)))
