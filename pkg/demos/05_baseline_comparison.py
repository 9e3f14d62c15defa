# %% [markdown]
# # Random sampling versus refinement
#
# The rare-guard lock opens only on one key out of about a million. A
# thousand random traces almost never see it open, so a passively learned
# automaton misses that behaviour. The refinement loop finds it through the
# checker instead of through luck.

# %%
import numpy as np
from fsalearn import baseline_random, run
from fsalearn.benchmarks import get

entry = get("rare_guard")
sys = entry.load().system
passive, active = [], []
for seed in range(10):
    cfg = entry.loop_config(seed=seed)
    passive.append(baseline_random(sys, 1000, cfg).alpha)
    active.append(run(sys, cfg)[1].alpha)
print("baseline alpha:", np.round(passive, 2))
print("refined alpha: ", np.round(active, 2))
