import itertools

import numpy as np
import pytest

from mupb.constructions import canonical_qubit_triple, canonical_qutrit_quadruple, complete_set_d5, pauli_triple, weyl_quadruple_d3
from mupb.equivalence import equivalent
from mupb.io import dumps, loads
from mupb.linalg import MubSet
from mupb.mu import set_mu_report
from mupb.search import (SearchPreconditionError, _Model, conjecture1_probe, direct_template,
                         enumerate_structured_sets, extend_set, mu_set_objective, semidirect_template,
                         templates_for)
from mupb.structure import Kind, classify


def test_direct_triples_count_2x5():
    out = enumerate_structured_sets((2, 5), (2, 1), complete_set_d5(), direct_only=True)
    assert len(out) == 6 * 5 * 4
    assert all(classify(B).kind == Kind.DIRECT for S in out for B in S)


def test_all_assignments_count_2x5_matches_brute_force():
    # brute force: every map of the 6 slots (3 rows x 2 entries) to pool members with rows using disjoint members
    brute = sum(1 for a in itertools.product(range(6), repeat=6)
                if not ({a[0], a[1]} & {a[2], a[3]} or {a[0], a[1]} & {a[4], a[5]} or {a[2], a[3]} & {a[4], a[5]}))
    out = enumerate_structured_sets((2, 5), (2, 1), complete_set_d5())
    assert len(out) == brute


def test_structured_2x2_and_3x3_all_canonical():
    q = canonical_qubit_triple(2)
    out = enumerate_structured_sets((2, 2), (2, 1), pauli_triple())
    assert out and all(equivalent(S, q).equivalent for S in out)
    t = canonical_qutrit_quadruple(2)
    out = enumerate_structured_sets((3, 3), (3, 1), weyl_quadruple_d3())
    assert out and all(len(S) == 4 for S in out)
    assert all(equivalent(S, t).equivalent for S in out[:6])


def test_enumerate_empty_pool():
    from mupb.constructions import ConstructionError
    with pytest.raises(ConstructionError):
        enumerate_structured_sets((2, 5), (2, 1), [])


@pytest.mark.parametrize("sig", [(2, 2), (2, 3), (2, 2, 2)])
def test_templates_produce_orthonormal_product_bases(sig):
    rng = np.random.default_rng(0)
    for t in templates_for(sig):
        m = _Model(t, np.eye(int(np.prod(sig))))
        B = m.product_basis(rng.normal(size=t.n_params))
        assert B.orthonormality(1e-10).passed


def test_template_kinds():
    rng = np.random.default_rng(2)
    t = semidirect_template((2, 3), 0)
    assert t.unitary_dims == (2, 3, 3)
    B = _Model(t, np.eye(6)).product_basis(rng.normal(size=t.n_params))
    assert classify(B).kind == Kind.INDIRECT
    assert direct_template((2, 3)).n_params == 4 + 9


def test_jacobian_matches_finite_differences():
    rng = np.random.default_rng(1)
    fixed = np.vstack([B.matrix() for B in canonical_qubit_triple(2)][:2])
    for t in templates_for((2, 2)):
        m = _Model(t, fixed)
        x = rng.normal(size=t.n_params)
        h = 1e-6
        fd = np.stack([(m.residuals(x + h * e) - m.residuals(x - h * e)) / (2 * h) for e in np.eye(t.n_params)], 1)
        assert np.abs(m.jacobian(x) - fd).max() < 1e-7


def test_objective_self_consistency():
    for S in (canonical_qubit_triple(2), canonical_qutrit_quadruple(2)):
        for k in range(len(S)):
            rest = [S[i] for i in range(len(S)) if i != k]
            assert mu_set_objective(rest, S[k]) < 1e-18


def test_extend_two_bases_recovers_third():
    S = canonical_qubit_triple(2)
    rep = extend_set(MubSet([S[0], S[1]]), restarts=4, seed=0)
    assert rep.found and rep.best_objective < 1e-18
    assert equivalent(rep.found[0], S).equivalent


def test_extend_full_triple_small_run():
    rep = extend_set(canonical_qubit_triple(2), restarts=6, seed=0)
    assert not rep.found and rep.bounded_away


def test_no_fifth_basis_for_qutrit_pair():
    rep = extend_set(canonical_qutrit_quadruple(2), restarts=4, seed=0)
    assert not rep.found and rep.best_objective > 1e-3


def test_extend_rejects_non_mu_input():
    S = canonical_qubit_triple(2)
    with pytest.raises(SearchPreconditionError):
        extend_set(MubSet([S[0], S[0]]), restarts=1)


def test_determinism():
    S = MubSet(list(canonical_qubit_triple(2))[:2])
    a, b = extend_set(S, restarts=3, seed=7), extend_set(S, restarts=3, seed=7)
    assert a.same_outcome(b)


def test_found_sets_revalidate_from_serialized_form():
    S = MubSet(list(canonical_qubit_triple(2))[:2])
    for F in extend_set(S, restarts=3, seed=0).found:
        G = loads(dumps(F))
        rep, _ = set_mu_report(list(G), 1e-9)
        assert rep.passed and all(B.orthonormality(1e-9).passed for B in G)


def test_conjecture1_precondition():
    with pytest.raises(SearchPreconditionError):
        conjecture1_probe((2, 2))
    with pytest.raises(SearchPreconditionError):
        conjecture1_probe((3, 4))


@pytest.mark.slow
def test_conjecture1_probe_runs(tmp_path):
    rep = conjecture1_probe((4, 4), restarts=1, sweeps=2, seed=0, out_dir=tmp_path)
    assert rep.target == "conjecture1" and len(rep.objectives) == 1 and rep.best_objective >= 0
    if rep.found:  # would be a counterexample and must have been written out
        assert "CONJECTURE-VIOLATION" in rep.flags and list(tmp_path.iterdir())
