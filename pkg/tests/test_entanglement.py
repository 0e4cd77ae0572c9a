import numpy as np
import pytest

from mupb.constructions import canonical_qubit_triple, canonical_qutrit_quadruple, complete_set_d5, prime_mub_set
from mupb.entanglement import (MuPreconditionError, audit_mu_vector, find_mu_vectors, is_maximally_entangled,
                               mixedness_deviation, mu_objective, mu_objective_grad, mu_residuals,
                               reconstruct_from_mu_probabilities)
from mupb.linalg import DimensionError, ProductKet, haar_ket, partial_trace


def test_bell_and_product():
    ok, dev = is_maximally_entangled(np.array([1, 0, 0, 1]) / np.sqrt(2), (2, 2), 0)
    assert ok and dev < 1e-15
    pk = ProductKet([np.array([1, 0]), np.array([0, 1, 0])])
    ok, dev = is_maximally_entangled(pk, (2, 3), 0)
    P = np.diag([1.0, 0.0])
    assert not ok and dev == pytest.approx(np.linalg.norm(P - np.eye(2) / 2))
    with pytest.raises(DimensionError):
        is_maximally_entangled(np.ones(4) / 2, (2, 3), 0)


def test_ghz_every_cut():
    v = np.zeros(8)
    v[0] = v[7] = 1 / np.sqrt(2)
    assert all(is_maximally_entangled(v, (2, 2, 2), r)[0] for r in range(3))


@pytest.mark.parametrize("p,mats", [(2, prime_mub_set(2)), (3, prime_mub_set(3)), (5, complete_set_d5())])
def test_reconstruction_identity(p, mats, rng):
    for _ in range(20):
        v = haar_ket(p * 3, rng)
        rho = partial_trace(v, (p, 3), 0).entries
        rebuilt, probs = reconstruct_from_mu_probabilities(rho, mats)
        assert np.allclose(rebuilt, rho, atol=1e-10)
        assert np.allclose(probs.sum(axis=1), 1)
    with pytest.raises(ValueError):
        reconstruct_from_mu_probabilities(rho, mats[:-1])


@pytest.mark.parametrize("d", [4, 6, 9])
def test_gradient_matches_finite_differences(d, rng):
    M = np.vstack([haar_ket(d, rng).coords.conj() for _ in range(2 * d)])
    for _ in range(10):
        x = rng.standard_normal(2 * d)
        h = 1e-6
        fd = np.array([(mu_objective(x + h * e, M) - mu_objective(x - h * e, M)) / (2 * h) for e in np.eye(2 * d)])
        g = mu_objective_grad(x, M)
        assert np.linalg.norm(g - fd) <= 1e-5 * np.linalg.norm(fd)


def test_objective_scale_invariant(rng):
    M = np.vstack([B.matrix().conj() for B in canonical_qubit_triple(2)])
    x = rng.standard_normal(8)
    assert mu_objective(x, M) == pytest.approx(mu_objective(3.7 * x, M))
    assert mu_residuals(x, M).shape == (12,)


def test_qubit_pair_vectors_are_maximally_entangled():
    S = canonical_qubit_triple(2)
    res = find_mu_vectors(S, restarts=30, seed=1)
    assert res.found
    for v in res.vectors:
        for a in audit_mu_vector(v, S):
            assert a.hypothesis and a.maximally_mixed and a.mixedness_deviation < 1e-8
            assert np.allclose(a.probabilities, 0.5, atol=1e-9)


def test_found_vectors_pass_direct_check():
    S = canonical_qubit_triple(2)
    M = np.vstack([B.matrix() for B in S])
    for v in find_mu_vectors(S, restarts=20, seed=3).vectors:
        assert np.abs(np.abs(M.conj() @ v.coords) ** 2 - 0.25).max() <= 1e-9


def test_complete_qubit_set_has_no_fourth_direction():
    res = find_mu_vectors(canonical_qubit_triple(1), restarts=30)
    assert not res.found and res.best_residual > 1e-3


def test_audit_rejects_non_mu_vector():
    S = canonical_qubit_triple(2)
    with pytest.raises(MuPreconditionError) as e:
        audit_mu_vector(np.array([1, 0, 0, 0]), S)
    assert e.value.basis == 0 and e.value.deviation == pytest.approx(0.75)


def test_qutrit_pair_vectors():
    S = canonical_qutrit_quadruple(2)
    res = find_mu_vectors(S, restarts=20, seed=0)
    assert res.found
    for v in res.vectors[:5]:
        audits = audit_mu_vector(v, S)
        assert all(a.hypothesis and a.maximally_mixed for a in audits)


def test_mixedness_deviation_zero_iff_maximally_mixed():
    assert mixedness_deviation(np.eye(3) / 3) == 0
    assert mixedness_deviation(np.diag([1, 0, 0])) > 0


def test_search_is_deterministic():
    S = canonical_qubit_triple(2)
    a, b = find_mu_vectors(S, restarts=5, seed=4), find_mu_vectors(S, restarts=5, seed=4)
    assert np.array_equal(a.residuals, b.residuals)
