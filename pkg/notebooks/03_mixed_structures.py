# %% [markdown]
# # Mixed structure types in one network
#
# A directed network with four blocks.  Block 0 is a community held
# together by positive edges only.  Block 1 is a signed community.  Block
# 2 fights internally but sends positive edges out.  Block 3 only sends
# negative edges.  A community-only method would have to force this into
# one pattern; the block matrices describe each block separately.

# %%
import numpy as np

from ssbm import (FitConfig, block_image, fit, generate_mixed_blocks, hard_partition, nmi,
                  soft_membership)
from ssbm.benchmark import MIXED_BLOCKS

print("(tail, head, sign, density)", MIXED_BLOCKS)
net = generate_mixed_blocks(seed=0)
res = fit(net.graph, 4, FitConfig(restarts=4, seed=0))
m = soft_membership(res.params)
out_labels = hard_partition(m, "outgoing").labels
print("outgoing-side NMI", nmi(net.truth, out_labels))

# %%
np.set_printoptions(precision=3, suppress=True)
img = block_image(res.params)
print("omega+\n", np.array(img["omega_pos"]))
print("omega-\n", np.array(img["omega_neg"]))
for r, kind in enumerate(img["outgoing"]):
    block = np.bincount(net.truth.labels[out_labels == r], minlength=4).argmax()
    print(f"fitted group {r} = planted block {block}: {kind}")

# %% [markdown]
# The incoming side groups vertices by who links *to* them, which need
# not agree with the outgoing side.

# %%
print("incoming-side NMI", nmi(net.truth, hard_partition(m, "incoming")))
print(img["incoming"])
