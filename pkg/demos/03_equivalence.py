"""Scramble a MU set with equivalence moves, then recover an explicit witness."""

# %%
import numpy as np

from mupb import canonical_qubit_triple, equivalent, fingerprint
from mupb.constructions import triple_2x5
from mupb.equivalence import apply_moves, random_moves, witness_maps

rng = np.random.default_rng(1)
A = canonical_qubit_triple(2)
moves = random_moves(A, 20, rng)
B = apply_moves(A, moves)
print("moves applied:", [type(m).__name__ for m in moves])
print("fingerprints equal:", fingerprint(A) == fingerprint(B))

# %%
v = equivalent(A, B)
print("verdict:", v.kind, "after", v.evaluations, "candidate evaluations")
print("witness:", [type(m).__name__ for m in v.witness])
print("witness replays:", witness_maps(A, B, v.witness))

# %% Two maximal triples in 2 x 5 that no sequence of moves connects
v = equivalent(triple_2x5(distinct=False), triple_2x5(distinct=True))
print("direct vs distinct-G triple:", v.kind, "separated by", v.separating)
