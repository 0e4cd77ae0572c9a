"""Walk through the canonical sets of MU product bases and the bound on their number."""

# %% Qubit triple: sigma_z, sigma_x, sigma_y eigenbases and their tensor powers
import numpy as np

from mupb import canonical_qubit_triple, canonical_qutrit_quadruple, mu_product_bound
from mupb.constructions import triple_2x5, weyl_operators
from mupb.mu import overlap_table, set_mu_report

S = canonical_qubit_triple(2)
print(S.names, "in dimension", S.dim)
print("squared overlaps between z and x bases:\n", np.round(overlap_table(S[0], S[1]), 3))

# %% Qutrits use the shift and phase operators; check Z X = omega X Z numerically
ops = weyl_operators(3)
print("ZX - wXZ:", np.abs(ops.Z @ ops.X - ops.omega * ops.X @ ops.Z).max())
Q = canonical_qutrit_quadruple(2)
rep, pair = set_mu_report(list(Q))
print(f"qutrit pair: {len(Q)} bases, worst deviation {rep.max_deviation:.1e} at bases {pair}")

# %% How many MU product bases can there be?
for sig in [(2, 5), (3, 3, 3), (4, 5), (6, 7)]:
    b = mu_product_bound(sig)
    print(sig, "->", b.bound, b.status.value, "(limited by d =", b.limiting_dim, ")")

# %% A triple in 2 x 5 built from six distinct MU bases of C^5 is maximal but indirect
T = triple_2x5(distinct=True)
print(T.provenance, "| pairwise MU:", set_mu_report(list(T))[0].passed)
