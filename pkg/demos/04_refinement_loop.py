# %% [markdown]
# # The refinement loop
#
# `run` alternates learning and checking. Each genuine violation becomes a new
# trace that the current automaton rejects, so every round strictly grows the
# learned language. The loop stops when all conditions hold.

# %%
from fsalearn import run
from fsalearn.benchmarks import list_benchmarks

for entry in list_benchmarks():
    sf = entry.load()
    m, report = run(sf.system, entry.loop_config(), reference=sf.reference)
    d = "-" if report.d is None else f"{report.d:g}"
    print(f"{entry.name:18s} {report.status:10s} i={report.i} N={report.N} alpha={report.alpha:g} d={d}")

# %% Per-iteration statistics for a benchmark that needs several rounds.
from fsalearn.benchmarks import get
entry = get("rare_guard")
m, report = run(entry.load().system, entry.loop_config())
for it in report.iterations:
    print(it)
