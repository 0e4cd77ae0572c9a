"""Product bases that are not tensor products, and how their factors still organize into bases."""

# %%
import numpy as np

from mupb import classify, conjecture2_grouping, extract_ortho_subset, partition
from mupb.corpus import domino_3x3, indirect_d4, random_product_basis

B = indirect_d4()  # |0,0>, |0,1>, |1,+>, |1,->
print("indirect d=4:", classify(B))

# %% Partition around the anchor |1,+>: vectors whose second factor overlaps it must be 1-orthogonal to it
p = partition(B, kappa=2)
print("I_kappa =", p.i_kappa, " complement =", p.i_kappa_bar)
print("orthonormal first factors through the anchor:", extract_ortho_subset(B, 0, 2).indices)

# %% The domino basis is not generated by any semi-direct construction
D = domino_3x3()
print("domino:", classify(D))
for k in range(9):
    print(f"  anchor {k}: first-factor basis at indices {extract_ortho_subset(D, 0, k).indices}")
g = conjecture2_grouping(D)
print("first factors grouped into bases:", g.first)
print("second factors grouped into bases:", g.second)

# %% Random semi-direct bases behave the same way
rng = np.random.default_rng(0)
ok = all(conjecture2_grouping(random_product_basis((3, 3), rng)).success for _ in range(200))
print("grouping succeeded on 200 random 3x3 bases:", ok)
