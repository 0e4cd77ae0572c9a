"""Vectors unbiased to maximal product sets are entangled; some sets admit no such vector at all."""

# %%
from mupb import audit_mu_vector, canonical_qubit_triple, extend_set, find_mu_vectors
from mupb.constructions import triple_2x3
from mupb.linalg import MubSet

S = canonical_qubit_triple(2)
res = find_mu_vectors(S, restarts=40, seed=0)
print(f"{len(res.vectors)} vectors MU to the qubit triple")
for v in res.vectors[:3]:
    print("  reduced-state deviations:", [f"{a.mixedness_deviation:.1e}" for a in audit_mu_vector(v, S)])

# %% In 2 x 3 no vector seems to be MU to a triple of MU product bases
T = triple_2x3(indirect=True)
r = find_mu_vectors(T, restarts=200, seed=0)
print(f"2x3 triple: {len(r.vectors)} vectors, best objective {r.best_residual:.3e} (evidence, not proof)")

# %% The triple cannot be extended by a fourth product basis, but two bases extend to three
print("extend qubit triple:", extend_set(S, restarts=12, seed=0).best_objective)
two = extend_set(MubSet([S[0], S[1]]), restarts=3, seed=0)
print("extend two bases: best objective", f"{two.best_objective:.1e},", len(two.found), "completions found")
