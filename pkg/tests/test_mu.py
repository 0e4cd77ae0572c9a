import itertools

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from mupb.constructions import pauli_triple
from mupb.corpus import random_product_basis
from mupb.linalg import DimensionError, ProductBasis, ProductKet
from mupb.mu import (are_bases_mu, factorwise_mu, global_mu_oracle, is_mu_pair, overlap_table,
                     random_product_ket, set_mu_report, trace_identities)


def test_pair_and_bases():
    z, x, y = pauli_triple()
    assert is_mu_pair(z[:, 0], x[:, 1])
    assert not is_mu_pair(z[:, 0], z[:, 0])
    assert are_bases_mu(x.T, y.T).passed
    rep = are_bases_mu(z.T, z.T)
    assert not rep.passed and rep.max_deviation == pytest.approx(0.5)
    with pytest.raises(DimensionError):
        are_bases_mu(z.T, np.eye(3))
    with pytest.raises(DimensionError):
        is_mu_pair(z[:, 0], x[:, 0], d=3)


def test_overlap_table_rows_sum_to_one(corpus):
    t = overlap_table(corpus["zx_2x2"], corpus["xy_2x2"])
    assert np.allclose(t.sum(axis=0), 1) and np.allclose(t.sum(axis=1), 1)


def test_set_report_locates_worst_pair():
    z, x, y = pauli_triple()
    rep, where = set_mu_report([z.T, x.T, z.T])
    assert not rep.passed and where == (0, 2)


def test_factorwise_examples():
    z, x, _ = pauli_triple()
    B = ProductBasis.direct([z, z])
    plus = ProductKet([x[:, 0], x[:, 0]])
    assert factorwise_mu(plus, B).passed and global_mu_oracle(plus, B)
    half = ProductKet([x[:, 0], z[:, 0]])
    rep = factorwise_mu(half, B)
    assert not rep.passed and rep.failing_subsystems() == [1]
    assert not global_mu_oracle(half, B)


@pytest.mark.parametrize("sig", [(2, 2), (2, 3), (3, 3), (2, 2, 3)])
def test_factorwise_agrees_with_oracle_on_structured_instances(sig):
    rng = np.random.default_rng(7)
    agree = 0
    for _ in range(150):
        B = random_product_basis(sig, rng, structured=True)
        # product vectors built from unbiased local states hit the boundary cases
        B2 = random_product_basis(sig, rng, structured=True)
        mu = ProductKet(B2.factors[r][0] for r in range(len(sig)))
        assert factorwise_mu(mu, B).passed == global_mu_oracle(mu, B)
        agree += 1
    assert agree == 150


@settings(max_examples=60, deadline=None)
@given(st.sampled_from([(2, 2), (2, 3), (3, 3)]), st.integers(0, 2**31))
def test_trace_identities_property(sig, seed):
    rng = np.random.default_rng(seed)
    B = random_product_basis(sig, rng)
    mu = random_product_ket(sig, rng)
    s1, s2 = trace_identities(mu, B)
    assert s1 == pytest.approx(sig[1], abs=1e-9) and s2 == pytest.approx(sig[0], abs=1e-9)


def test_trace_identities_brute_force():
    # oracle: explicit double sum over basis indices
    rng = np.random.default_rng(3)
    B = random_product_basis((2, 3), rng)
    mu = random_product_ket((2, 3), rng)
    s1 = sum(abs(np.vdot(B.factors[0][i], mu.factors[0].coords)) ** 2 for i in range(6))
    assert trace_identities(mu, B)[0] == pytest.approx(s1)
    with pytest.raises(DimensionError):
        trace_identities(random_product_ket((2, 2, 2), rng), random_product_basis((2, 2, 2), rng))


def test_two_bases_mu_iff_all_pairs():
    # brute force over all vector pairs
    z, x, _ = pauli_triple()
    A, B = ProductBasis.direct([z, x]), ProductBasis.direct([x, z])
    brute = all(is_mu_pair(a, b, tol=1e-12) for a, b in itertools.product(A.matrix(), B.matrix()))
    assert brute == are_bases_mu(A, B, 1e-12).passed is True
