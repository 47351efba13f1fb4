# %% [markdown]
# # A small architecture search
#
# The orchestrator expands a configuration into a grid of experiment
# specifications, trains every one of them on a pool of workers, then
# aggregates, selects a winner and draws plots. Everything goes through a
# write-once directory store.

# %%
import csv
import io
import json
import os
import tempfile

import numpy as np

from autoqml.metrics import AggregateStats, select_best
from autoqml.orchestrator import ObjectStore, estimated_evaluations, expand_grid, load_config, run_all
from autoqml.quantum import AnsatzDescriptor, build_ansatz, entangling_capability, transpile_depth

HERE = os.path.dirname(os.path.abspath(__file__)) if "__file__" in globals() else os.getcwd()
CONFIGS = os.path.join(HERE, "..", "configs")

# %% [markdown]
# ## Grid size
#
# The full listing produces hundreds of specifications; the desk-scale
# config is a 9-point slice that runs in about a minute.

# %%
for name in ("reference_grid.json", "desk_scale.json"):
    specs = expand_grid(load_config(os.path.join(CONFIGS, name)))
    print(f"{name:20s} {len(specs):4d} specs, ~{estimated_evaluations(specs):.2e} circuit evaluations")

# %% [markdown]
# ## Circuit cost and entanglement per Ansatz
#
# Transpiled depth targets a linear-chain device with an {RZ, SX, CX}
# basis. Entangling capability is the mean Meyer-Wallach measure over
# random parameter draws.

# %%
rng = np.random.default_rng(0)
for family in ("zoufal", "vallecorsa", "herr_1"):
    for k in (1, 2, 3):
        t = build_ansatz(AnsatzDescriptor(family, 5, k))
        q = entangling_capability(t, 100, rng)
        print(f"{family:10s} k={k}  params {t.num_params:3d}  depth {transpile_depth(t):4d}  Q {q:.3f}")

# %% [markdown]
# ## Selection on a reference table
#
# The composite score sums z-scores of mean RE, mean KS and mean depth.
# Lower is better.

# %%
rows = [("uniform", 1, 0.1780, 0.5692, 41.18), ("uniform", 2, 0.1104, 0.3562, 77.09),
        ("uniform", 3, 0.1540, 0.4329, 104.52), ("normal", 1, 0.1570, 0.2793, 203.42),
        ("normal", 2, 0.1446, 0.2434, 238.38), ("normal", 3, 0.1516, 0.2510, 271.2),
        ("random", 1, 0.3420, 1.1412, 33.75), ("random", 2, 0.1992, 0.7595, 74.55),
        ("random", 3, 0.1536, 0.5494, 101.89)]
stats = [AggregateStats(f"{i}-k{k}", ks, 0.0, re, 0.0, d, 0.0, 1) for i, k, ks, re, d in rows]
for sid, z in select_best(stats).ranking:
    print(f"{sid:10s} {z:7.3f}")

# %% [markdown]
# ## End to end on the desk-scale grid
#
# Three workers, nine specs, three runs each. The store is a temporary
# directory here; `autoqml run --config ... --store ...` does the same.
# Spawned workers cannot re-import a cell-style script, so the workers run
# one after another in this process. The static schedule makes the store
# contents identical to a parallel run.

# %%
store_root = tempfile.mkdtemp(prefix="autoqml-")
run_all(os.path.join(CONFIGS, "desk_scale.json"), store_root, max_parallel=1, progress=print)
store = ObjectStore(store_root)
print("\n".join(store.list()))

# %%
table = list(csv.DictReader(io.StringIO(store.get("processed/aggregate.csv").decode())))
for r in sorted(table, key=lambda r: float(r["mu_re"])):
    print(f"{r['initialization']:8s} k={r['k']}  mu_RE {float(r['mu_re']):.4f}  mu_KS {float(r['mu_ks']):.4f}  "
          f"depth {float(r['mu_depth']):.0f}")
print(json.dumps(json.loads(store.get("processed/selection.json"))["winner"], indent=1))
