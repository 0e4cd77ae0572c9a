"""Mutual-unbiasedness predicates.

All tolerances apply to squared overlaps: a pair passes when
``| |<a|b>|^2 - 1/d | <= tol``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .linalg import (DEFAULT_TOL, DimensionError, ProductBasis, ProductKet, as_array,
                     as_signature, haar_ket)


@dataclass(frozen=True)
class MuReport:
    passed: bool
    max_deviation: float
    worst_pair: tuple[int, int]
    tol: float

    def __bool__(self):
        return self.passed


@dataclass(frozen=True)
class FactorwiseReport:
    """Per-subsystem deviations ``| |<psi_i^r|mu^r>|^2 - 1/d_r |`` over all basis vectors i."""

    per_subsystem: tuple[np.ndarray, ...]
    passed: bool
    tol: float
    seed: int | None = field(default=None, compare=False)

    def failing_subsystems(self) -> list[int]:
        return [r for r, dev in enumerate(self.per_subsystem) if dev.max() > self.tol]

    def __bool__(self):
        return self.passed


def _rows(B) -> np.ndarray:
    if isinstance(B, ProductBasis):
        return B.matrix()
    return np.array([as_array(v) for v in B])


def is_mu_pair(a, b, d: int | None = None, tol: float = DEFAULT_TOL) -> bool:
    x, y = as_array(a), as_array(b)
    if x.size != y.size:
        raise DimensionError(f"dimension mismatch: {x.size} vs {y.size}")
    if d is None:
        d = x.size
    elif d != x.size:
        raise DimensionError(f"vectors have dimension {x.size}, not {d}")
    return bool(abs(abs(np.vdot(x, y)) ** 2 - 1 / d) <= tol)


def overlap_table(B1, B2) -> np.ndarray:
    """Squared overlaps ``|<b1_i|b2_j>|^2`` as a ``(d, d)`` array."""
    m1, m2 = _rows(B1), _rows(B2)
    return np.abs(m1.conj() @ m2.T) ** 2


def are_bases_mu(B1, B2, tol: float = DEFAULT_TOL) -> MuReport:
    m1, m2 = _rows(B1), _rows(B2)
    if m1.shape[1] != m2.shape[1]:
        raise DimensionError(f"dimension mismatch: {m1.shape[1]} vs {m2.shape[1]}")
    d = m1.shape[1]
    if m1.shape[0] != d or m2.shape[0] != d:
        raise DimensionError(f"a basis of C^{d} needs {d} vectors, got {m1.shape[0]} and {m2.shape[0]}")
    dev = np.abs(np.abs(m1.conj() @ m2.T) ** 2 - 1 / d)
    i, j = np.unravel_index(int(np.argmax(dev)), dev.shape)
    mx = float(dev[i, j])
    return MuReport(mx <= tol, mx, (int(i), int(j)), tol)


def set_mu_report(bases, tol: float = DEFAULT_TOL) -> tuple[MuReport, tuple[int, int]]:
    """Worst pairwise report over a collection of bases, plus the indices of that pair of bases."""
    bases = list(bases)
    worst, where = None, (0, 0)
    for a in range(len(bases)):
        for b in range(a + 1, len(bases)):
            rep = are_bases_mu(bases[a], bases[b], tol)
            if worst is None or rep.max_deviation > worst.max_deviation:
                worst, where = rep, (a, b)
    if worst is None:
        worst = MuReport(True, 0.0, (0, 0), tol)
    return worst, where


def _check_signature(mu: ProductKet, B: ProductBasis) -> None:
    if mu.signature != B.signature:
        raise DimensionError(f"signature mismatch: {mu.signature} vs {B.signature}")


def factorwise_mu(mu: ProductKet, B: ProductBasis, tol: float = DEFAULT_TOL) -> FactorwiseReport:
    """Factor-wise criterion for a product vector against a product basis.

    Each subsystem r is treated through the bipartition r | rest: the
    product vector is MU to B exactly when, for every r, the r-th factor of
    ``mu`` has squared overlap ``1/d_r`` with the r-th factor of every basis
    vector.
    """
    _check_signature(mu, B)
    devs = []
    for r in range(B.signature.n):
        bip = B.bipartition(r)
        own = bip.factors[0]
        dr = own.shape[1]
        ov = np.abs(own.conj() @ mu.factors[r].coords) ** 2
        devs.append(np.abs(ov - 1 / dr))
    passed = all(dv.max() <= tol for dv in devs)
    return FactorwiseReport(tuple(devs), passed, tol)


def global_mu_oracle(mu: ProductKet, B: ProductBasis, tol: float = DEFAULT_TOL) -> bool:
    """Direct check on the flattened vectors, used as the independent oracle for factorwise_mu."""
    _check_signature(mu, B)
    v = mu.flat().coords
    m = B.matrix()
    return bool(np.abs(np.abs(m.conj() @ v) ** 2 - 1 / B.dim).max() <= tol)


def trace_identities(mu: ProductKet, B: ProductBasis) -> tuple[float, float]:
    """``(sum_i |<psi_i^1|mu^1>|^2, sum_i |<psi_i^2|mu^2>|^2)`` for a bipartite basis.

    For any orthonormal product basis these equal ``(d_2, d_1)``.
    """
    if B.signature.n != 2:
        raise DimensionError(f"trace identities need a bipartite signature, got {B.signature}; "
                             "regroup with ProductBasis.bipartition first")
    _check_signature(mu, B)
    s1 = float(np.sum(np.abs(B.factors[0].conj() @ mu.factors[0].coords) ** 2))
    s2 = float(np.sum(np.abs(B.factors[1].conj() @ mu.factors[1].coords) ** 2))
    return s1, s2


def random_product_ket(sig, rng: np.random.Generator) -> ProductKet:
    sig = as_signature(sig)
    return ProductKet(haar_ket(d, rng) for d in sig.dims)
