import itertools
import json

import numpy as np
import pytest

from mupb.corpus import domino_3x3, indirect_d4, random_product_basis
from mupb.linalg import DimensionError, ProductBasis, ProductKet, validate_orthonormal
from mupb.structure import (BoundStatus, GroupingResult, Kind, StructuralViolation, classify,
                            conjecture2_grouping, distinct_rays, extract_ortho_subset, known_mub_count,
                            mu_product_bound, partition, r_orthogonal)

S2 = 1 / np.sqrt(2)
ZERO, ONE = np.array([1, 0]), np.array([0, 1])
PLUS, MINUS = np.array([S2, S2]), np.array([S2, -S2])


def test_r_orthogonal_examples():
    a, b = ProductKet([ONE, PLUS]), ProductKet([ZERO, ZERO])
    assert r_orthogonal(a, b, 0) and not r_orthogonal(a, b, 1)
    c = ProductKet([ONE, ONE])
    assert r_orthogonal(c, b, 0) and r_orthogonal(c, b, 1)
    assert not any(r_orthogonal(a, a, r) for r in range(2))
    with pytest.raises(DimensionError):
        r_orthogonal(a, ProductKet([ZERO, np.array([1, 0, 0])]), 0)


def _hand_partition(B, kappa):
    """Oracle: the four-line definition over second factors."""
    b = B.factors[1]
    ik = [i for i in range(B.dim) if i != kappa and abs(np.vdot(b[kappa], b[i])) > 1e-9]
    ikb = [i for i in range(B.dim) if i != kappa and i not in ik]
    return tuple(ik), tuple(ikb)


def test_partition_indirect_d4():
    B = indirect_d4()  # |0,0>, |0,1>, |1,+>, |1,->
    p = partition(B, 2)
    assert p.i_kappa == (0, 1) and p.i_kappa_bar == (3,)
    assert (p.i_kappa, p.i_kappa_bar) == _hand_partition(B, 2)


def test_partition_standard():
    B = ProductBasis.direct([np.eye(2), np.eye(2)])  # |00>, |01>, |10>, |11>
    p = partition(B, 0)
    assert p.i_kappa == (2,) and p.i_kappa_bar == (1, 3)


def test_partition_domino_second_stage():
    B = domino_3x3()
    p = partition(B, 0)
    assert set(p.i_kappa) | set(p.i_kappa_bar) | {0} == set(range(9))
    lam = p.i_kappa[0]
    q = partition(B, 0, lam)
    assert len(q.i_kappa_lambda) >= 1 and set(q.i_kappa_lambda) <= set(p.i_kappa)
    with pytest.raises(ValueError):
        partition(B, 0, p.i_kappa_bar[0])


def test_partition_flags_invalid_basis():
    # two copies of |0,0>: not orthonormal, the anchor has no partner in subsystem 0
    f = np.array([ZERO, ZERO, ZERO, ONE])
    bad = ProductBasis((2, 2), [f, np.array([ZERO, ZERO, ONE, ONE])])
    with pytest.raises(StructuralViolation):
        partition(bad, 0)


def test_extract_indirect_d4():
    sub = extract_ortho_subset(indirect_d4(), 0, 2)
    assert sub.indices[0] == 2 and sub.indices[1] in (0, 1)


def test_extract_standard_3x3():
    B = ProductBasis.direct([np.eye(3), np.eye(3)])
    sub = extract_ortho_subset(B, 0, 1)
    firsts = sorted(int(np.argmax(np.abs(B.factors[0][i]))) for i in sub.indices)
    seconds = {int(np.argmax(np.abs(B.factors[1][i]))) for i in sub.indices}
    assert firsts == [0, 1, 2] and len(seconds) == 1


def test_extract_domino_against_brute_force():
    B = domino_3x3()
    a = B.factors[0]
    brute = {t for t in itertools.combinations(range(9), 3) if validate_orthonormal(a[list(t)]).passed}
    for k in range(9):
        sub = extract_ortho_subset(B, 0, k)
        assert tuple(sorted(sub.indices)) in brute and k in sub.indices


def test_extract_rejects_large_subsystem():
    with pytest.raises(ValueError):
        extract_ortho_subset(ProductBasis.direct([np.eye(4), np.eye(2)]), 0, 0)


@pytest.mark.parametrize("sig", [(2, 2), (2, 3), (3, 2), (3, 3), (2, 2, 3)])
def test_extract_on_generated(sig):
    rng = np.random.default_rng(11)
    for _ in range(40):
        B = random_product_basis(sig, rng)
        for r, dr in enumerate(sig):
            for k in range(B.dim):
                sub = extract_ortho_subset(B, r, k)
                assert validate_orthonormal(B.factors[r][list(sub.indices)]).passed
                p = partition(B, k, subsystem=r)
                assert len(p.i_kappa) >= dr - 1


def test_classify_examples(corpus):
    assert classify(corpus["std_2x3"]).kind == Kind.DIRECT
    c = classify(indirect_d4())
    assert c.kind == Kind.INDIRECT and c.per_subsystem_basis_count == (1, 2)
    assert classify(domino_3x3()).kind == Kind.INDIRECT


def test_classify_invariant_under_phase_and_order(rng):
    for _ in range(20):
        B = random_product_basis((2, 3), rng)
        ph = np.exp(2j * np.pi * rng.random(B.dim))
        C = ProductBasis(B.signature, [B.factors[0] * ph[:, None], B.factors[1]]).permuted(rng.permutation(B.dim))
        assert classify(B) == classify(C)
        c = classify(B)
        assert (c.kind == Kind.DIRECT) == all(n == 1 for n in c.per_subsystem_basis_count)


def test_distinct_rays_ignores_phase():
    labels, reps = distinct_rays(np.array([ZERO, 1j * ZERO, PLUS, -PLUS, ONE]))
    assert list(labels) == [0, 0, 1, 1, 2] and len(reps) == 3


@pytest.mark.parametrize("sig,bound,status", [
    ((2, 5), 3, BoundStatus.PROVEN), ((3, 3, 3), 4, BoundStatus.PROVEN), ((2, 3), 3, BoundStatus.PROVEN),
    ((4, 5), 5, BoundStatus.CONJECTURED), ((4, 4), 5, BoundStatus.CONJECTURED),
])
def test_bounds(sig, bound, status):
    b = mu_product_bound(sig)
    assert (b.bound, b.status) == (bound, status)


def test_bound_small_first_subsystem_always_proven():
    for d2 in range(2, 13):
        assert mu_product_bound((2, d2)).bound == 3
        if d2 >= 3:
            assert mu_product_bound((3, d2, 4)).bound == 4


def test_known_counts():
    assert known_mub_count(4) == (5, True)
    assert known_mub_count(6) == (3, False)
    assert known_mub_count(12) == (4, False)
    b = mu_product_bound((6, 7))
    assert b.status == BoundStatus.CONJECTURED and b.limiting_dim == 6 and b.assumed_counts[6] == 3


def test_grouping_indirect_d4():
    g = conjecture2_grouping(indirect_d4())
    assert g.success
    B = indirect_d4()
    # second subsystem: one group must be {|0>, |1>}, the other {|+>, |->}
    groups = [sorted(g2) for g2 in g.second]
    assert sorted(groups) == [[0, 1], [2, 3]]
    assert len(g.first) == 2 and all(validate_orthonormal(B.factors[0][list(x)]).passed for x in g.first)


def test_grouping_domino_matches_exhaustive():
    B = domino_3x3()
    g = conjecture2_grouping(B)
    assert g.success
    for r, groups in ((0, g.first), (1, g.second)):
        assert sorted(i for grp in groups for i in grp) == list(range(9))
        for grp in groups:
            assert validate_orthonormal(B.factors[r][list(grp)]).passed


def test_grouping_failure_is_persisted(tmp_path):
    f0 = np.array([ZERO, ZERO, PLUS, ONE])  # no exact cover into two bases
    B = ProductBasis((2, 2), [f0, np.array([ZERO, ONE, ZERO, ONE])])
    g = conjecture2_grouping(B)
    assert not g.success and "first" in g.witness
    path = g.persist(B, tmp_path / "cx.json")
    data = json.loads(path.read_text())
    assert data["grouping"]["success"] is False and data["signature"] == [2, 2]


def test_grouping_needs_bipartite(corpus):
    with pytest.raises(DimensionError):
        conjecture2_grouping(corpus["zxw_2x2x3"])
    assert isinstance(conjecture2_grouping(corpus["std_2x2"]), GroupingResult)
