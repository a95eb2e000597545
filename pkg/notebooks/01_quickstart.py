# %% [markdown]
# # Fitting a signed block model
#
# Two factions of eight members each.  Inside a faction every pair is on
# good terms; a handful of hostile ties run between the factions.  We fit
# the model with two groups and read back memberships and block matrices.

# %%
import itertools

import numpy as np

from ssbm import (FitConfig, SignedGraph, block_image, bridgeness, fit, hard_partition,
                  soft_membership)

edges = [(i, j, 1.0) for base in (0, 8) for i, j in itertools.combinations(range(base, base + 8), 2)]
edges += [(0, 8, -1.0), (3, 12, -1.0), (5, 9, -2.0)]
g = SignedGraph.from_edges(16, edges, directed=False)
print(g.summary_json())

# %%
res = fit(g, 2, FitConfig(restarts=5, seed=0))
print(f"log-likelihood {res.log_likelihood:.3f} after {res.iterations} iterations")

# %% [markdown]
# The block matrices are the coarse picture: positive mass on the
# diagonal, negative mass off it.

# %%
np.set_printoptions(precision=3, suppress=True)
print("omega+\n", res.params.omega_pos)
print("omega-\n", res.params.omega_neg)
print(block_image(res.params)["outgoing"])

# %%
m = soft_membership(res.params)
print("labels", hard_partition(m).labels)
print("bridgeness", bridgeness(m).round(4))
