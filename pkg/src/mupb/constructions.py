"""Factories for the canonical MU bases and MU product sets.

Bases are returned as matrices whose *columns* are the normalized basis
vectors, the way they are usually written down. Every constructed ket has
its first nonzero coordinate real and positive.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import product

import numpy as np

from .linalg import (DEFAULT_TOL, SELF_TOL, DimensionSignature, MubSet, ProductBasis,
                     as_signature, validate_orthonormal)
from .mu import are_bases_mu, set_mu_report

QUBIT_LABELS = ("z", "x", "y")
QUTRIT_LABELS = ("z", "x", "y", "w")


class ConstructionError(ValueError):
    pass


@dataclass(frozen=True)
class OperatorLibrary:
    """Shift and phase operators of C^p with ``Z X = omega X Z``."""

    p: int
    omega: complex
    X: np.ndarray
    Z: np.ndarray

    @property
    def XZ(self) -> np.ndarray:
        return self.X @ self.Z

    @property
    def XZ2(self) -> np.ndarray:
        return self.X @ self.Z @ self.Z

    def pauli(self) -> dict[str, np.ndarray]:
        """For p = 2 the Pauli matrices; ``XZ = -i sigma_y``."""
        if self.p != 2:
            raise ConstructionError("Pauli matrices only exist for p = 2")
        return {"z": self.Z, "x": self.X, "y": 1j * self.X @ self.Z}


def weyl_operators(p: int) -> OperatorLibrary:
    if p < 2:
        raise ConstructionError("p must be >= 2")
    omega = np.exp(2j * np.pi / p)
    X = np.roll(np.eye(p, dtype=complex), 1, axis=0)  # X|j> = |j+1 mod p>
    Z = np.diag(omega ** np.arange(p))
    return OperatorLibrary(p, complex(omega), X, Z)


def pauli_triple() -> list[np.ndarray]:
    """Eigenbases of sigma_z, sigma_x, sigma_y in C^2."""
    s = 1 / np.sqrt(2)
    return [
        np.eye(2, dtype=complex),
        s * np.array([[1, 1], [1, -1]], dtype=complex),
        s * np.array([[1, 1], [1j, -1j]], dtype=complex),
    ]


def chirp_basis(p: int, a: int) -> np.ndarray:
    """Columns ``m``: ``omega^(a j^2 + m j) / sqrt(p)`` for ``j = 0..p-1``."""
    omega = np.exp(2j * np.pi / p)
    j = np.arange(p)[:, None]
    m = np.arange(p)[None, :]
    return omega ** ((a * j * j + m * j) % p) / np.sqrt(p)


def prime_mub_set(p: int) -> list[np.ndarray]:
    """Complete set of p + 1 MU bases of C^p for p = 2 or an odd prime.

    For odd p: the standard basis followed by the chirp bases a = 0..p-1.
    """
    if p == 2:
        return pauli_triple()
    if p < 3 or any(p % q == 0 for q in range(2, int(p ** 0.5) + 1)):
        raise ConstructionError(f"{p} is not a prime")
    return [np.eye(p, dtype=complex)] + [chirp_basis(p, a) for a in range(p)]


def weyl_quadruple_d3() -> list[np.ndarray]:
    """The four MU bases of C^3 in the usual matrix form.

    With ``Z X = omega X Z`` and ``X|j> = |j+1>``, these are eigenbases of
    Z, X, X Z^2 and X Z in that order (columns of the third and fourth
    matrices are swapped relative to the X Z / X Z^2 labeling under the
    conjugate convention; the two labelings differ by complex conjugation).
    """
    return prime_mub_set(3)


def complete_set_d5() -> list[np.ndarray]:
    """Six MU bases of C^5: standard basis plus the five chirp bases, checked before use."""
    bases = prime_mub_set(5)
    for a in range(6):
        for b in range(a + 1, 6):
            rep = are_bases_mu(bases[a].T, bases[b].T, SELF_TOL)
            if not rep.passed:
                raise ConstructionError(f"d=5 bases {a},{b} not MU (deviation {rep.max_deviation:g})")
    return bases


def _local_set(p: int) -> tuple[list[np.ndarray], tuple[str, ...]]:
    if p == 2:
        return pauli_triple(), QUBIT_LABELS
    if p == 3:
        return weyl_quadruple_d3(), QUTRIT_LABELS
    raise ConstructionError("small blocks must have p in {2, 3}")


def canonical_power_set(p: int, n: int) -> MubSet:
    if n < 1:
        raise ConstructionError("n must be >= 1")
    local, labels = _local_set(p)
    bases = [ProductBasis.direct([m] * n) for m in local]
    fam = "qubit-triple" if p == 2 else "qutrit-quadruple"
    return MubSet(bases, names=list(labels), provenance=f"{fam} n={n}", tol=SELF_TOL)


def canonical_qubit_triple(n: int) -> MubSet:
    """Tensor powers of the sigma_z, sigma_x, sigma_y eigenbases in C^(2^n)."""
    return canonical_power_set(2, n)


def canonical_qutrit_quadruple(n: int) -> MubSet:
    return canonical_power_set(3, n)


def direct_sum_columns(m: np.ndarray) -> ProductBasis:
    """Single-subsystem ProductBasis from a matrix with basis columns."""
    return ProductBasis.direct([m])


@dataclass
class BasisAssignment:
    """Complement basis ``G(j_b)`` for every eigenstate ``j`` of every small-block basis ``b``.

    ``bases[b][j]`` is a :class:`ProductBasis` of the complement signature.
    """

    bases: list[list[ProductBasis]]

    @classmethod
    def uniform(cls, per_label: list[ProductBasis], count: int) -> "BasisAssignment":
        """Same complement basis for every eigenstate of a label (yields direct bases)."""
        return cls([[g] * count for g in per_label])

    def check(self, tol: float = DEFAULT_TOL) -> None:
        for b, row in enumerate(self.bases):
            for j, g in enumerate(row):
                rep = g.orthonormality(tol)
                if not rep.passed:
                    raise ConstructionError(f"G({j}_{b}) is not orthonormal (deviation {rep.max_deviation:g})")
        for b in range(len(self.bases)):
            for c in range(b + 1, len(self.bases)):
                for j, g in enumerate(self.bases[b]):
                    for k, h in enumerate(self.bases[c]):
                        rep = are_bases_mu(g, h, tol)
                        if not rep.passed:
                            raise ConstructionError(
                                f"cross-set condition fails: G({j}_{b}) vs G({k}_{c}) "
                                f"deviation {rep.max_deviation:g}")


def assemble_corollary_set(sig, small_block: tuple[int, int], assignment: BasisAssignment,
                           tol: float = DEFAULT_TOL) -> MubSet:
    """Build the p + 1 product bases ``{|j_b> (x) G(j_b)}`` for a block of k subsystems of dimension p."""
    sig = as_signature(sig)
    p, k = small_block
    if p not in (2, 3):
        raise ConstructionError("small block dimension must be 2 or 3")
    if k < 1 or k >= sig.n or sig.dims[:k] != (p,) * k:
        raise ConstructionError(f"signature {sig} does not start with {k} subsystems of dimension {p}")
    comp_sig = DimensionSignature(sig.dims[k:])
    local, labels = _local_set(p)
    if len(assignment.bases) != p + 1 or any(len(row) != p ** k for row in assignment.bases):
        raise ConstructionError(f"assignment needs {p + 1} rows of {p ** k} complement bases")
    for row in assignment.bases:
        for g in row:
            if g.signature != comp_sig:
                raise ConstructionError(f"complement basis has signature {g.signature}, expected {comp_sig}")
    assignment.check(tol)

    small_idx = np.indices((p,) * k).reshape(k, -1)
    dc = comp_sig.total
    out = []
    for b, m in enumerate(local):
        tabs = [[] for _ in range(sig.n)]
        for j in range(p ** k):
            g = assignment.bases[b][j]
            for r in range(k):
                tabs[r].append(np.repeat(m[:, small_idx[r, j]][None, :], dc, axis=0))
            for r in range(comp_sig.n):
                tabs[k + r].append(g.factors[r])
        out.append(ProductBasis(sig, [np.vstack(t) for t in tabs]))
    for b, basis in enumerate(out):
        rep = basis.orthonormality(tol)
        if not rep.passed:
            raise ConstructionError(f"assembled basis {labels[b]} not orthonormal ({rep.max_deviation:g})")
    rep, where = set_mu_report(out, tol)
    if not rep.passed:
        raise ConstructionError(f"assembled bases {where} not MU (deviation {rep.max_deviation:g})")
    return MubSet(out, names=list(labels), provenance=f"assembled p={p} k={k} sig={sig}", tol=tol)


def product_pool(mats: list[np.ndarray]) -> list[ProductBasis]:
    return [direct_sum_columns(m) for m in mats]


def triple_2x5(distinct: bool) -> MubSet:
    """MU product triple in 2 x 5: direct (``G(0_b) = G(1_b)``) or built from six distinct d=5 bases."""
    g = product_pool(complete_set_d5())
    if distinct:
        assign = BasisAssignment([[g[0], g[1]], [g[2], g[3]], [g[4], g[5]]])
    else:
        assign = BasisAssignment.uniform([g[0], g[1], g[2]], 2)
    return assemble_corollary_set((2, 5), (2, 1), assign)


def triple_2x3(indirect: bool = False) -> MubSet:
    """MU product triple in 2 x 3, direct or with two distinct C^3 bases in the y-branch."""
    g = product_pool(weyl_quadruple_d3())
    if indirect:
        assign = BasisAssignment([[g[0], g[0]], [g[1], g[1]], [g[2], g[3]]])
    else:
        assign = BasisAssignment.uniform([g[0], g[1], g[2]], 2)
    return assemble_corollary_set((2, 3), (2, 1), assign)


def all_tensor_sets(p: int, n: int):
    """All direct product bases built from the local complete set, as label tuples."""
    local, labels = _local_set(p)
    for combo in product(range(len(local)), repeat=n):
        yield tuple(labels[c] for c in combo), ProductBasis.direct([local[c] for c in combo])
