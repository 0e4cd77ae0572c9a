"""Structural analysis of product bases.

Covers r-orthogonality, the two-stage index partition around an anchor
vector, extraction of an orthonormal subset of factors in a subsystem of
dimension 2 or 3, direct/indirect classification, the bound on the number of
MU product bases, and the grouping of factors into local bases.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Sequence

import numpy as np

from .linalg import (DEFAULT_TOL, DimensionError, ProductBasis, ProductKet, as_signature,
                     validate_orthonormal)


class StructuralViolation(ValueError):
    """Raised when a claimed orthonormal product basis violates a structural guarantee."""


# --------------------------------------------------------------------------
# r-orthogonality and partitions


def r_orthogonal(v: ProductKet, w: ProductKet, r: int, tol: float = DEFAULT_TOL) -> bool:
    if v.signature != w.signature:
        raise DimensionError(f"signature mismatch: {v.signature} vs {w.signature}")
    v.signature.check_index(r)
    return abs(np.vdot(v.factors[r].coords, w.factors[r].coords)) <= tol


@dataclass(frozen=True)
class PartitionResult:
    kappa: int
    i_kappa: tuple[int, ...]
    i_kappa_bar: tuple[int, ...]
    lam: int | None = None
    i_kappa_lambda: tuple[int, ...] | None = None
    i_kappa_lambda_bar: tuple[int, ...] | None = None


def _as_bipartite(B: ProductBasis, subsystem: int) -> ProductBasis:
    if B.signature.n == 1:
        raise DimensionError("partition needs at least two subsystems")
    return B.bipartition(subsystem)


def _span_rank(vectors: np.ndarray, tol: float) -> int:
    if len(vectors) == 0:
        return 0
    s = np.linalg.svd(np.atleast_2d(vectors), compute_uv=False)
    return int(np.sum(s > max(tol, 1e-10) * max(1.0, s[0])))


def partition(B: ProductBasis, kappa: int, lam: int | None = None, tol: float = DEFAULT_TOL,
              subsystem: int = 0) -> PartitionResult:
    """Split the indices around anchor ``kappa`` by second-factor overlaps.

    The basis is viewed as ``C^{d_r} (x) C^{d/d_r}`` with ``r = subsystem``.
    ``i_kappa`` holds the vectors whose complement factor is *not* orthogonal
    to the anchor's (so their ``r``-factor must be); ``i_kappa_bar`` the
    rest. With ``lam`` (which must lie in ``i_kappa``) the second stage keeps
    the vectors whose complement factor overlaps both anchors.

    The ``r``-factors of the anchor(s) together with those of the first-stage
    (second-stage) set must span ``C^{d_r}``; otherwise the input is not an
    orthonormal product basis and :class:`StructuralViolation` is raised.
    """
    bip = _as_bipartite(B, subsystem)
    a, b = bip.factors
    d, d1 = a.shape
    if not 0 <= kappa < d:
        raise IndexError(f"kappa={kappa} out of range")
    ov = np.abs(b.conj() @ b[kappa])
    others = [i for i in range(d) if i != kappa]
    ik = tuple(i for i in others if ov[i] > tol)
    ikb = tuple(i for i in others if ov[i] <= tol)
    if len(ik) < d1 - 1 or _span_rank(a[[kappa, *ik]], tol) < d1:
        raise StructuralViolation(
            f"anchor {kappa}: first-stage set has {len(ik)} vectors and does not span C^{d1}; "
            "input is not an orthonormal product basis")
    if lam is None:
        return PartitionResult(kappa, ik, ikb)
    if lam not in ik:
        raise ValueError(f"lambda={lam} is not in the first-stage set {ik}")
    ov2 = np.abs(b.conj() @ b[lam])
    rest = [i for i in others if i != lam]
    ikl = tuple(i for i in rest if ov[i] > tol and ov2[i] > tol)
    iklb = tuple(i for i in rest if not (ov[i] > tol and ov2[i] > tol))
    if len(ikl) < d1 - 2 or _span_rank(a[[kappa, lam, *ikl]], tol) < d1:
        raise StructuralViolation(
            f"anchors ({kappa}, {lam}): second-stage set has {len(ikl)} vectors and does not span "
            f"C^{d1}; input is not an orthonormal product basis")
    return PartitionResult(kappa, ik, ikb, lam, ikl, iklb)


@dataclass(frozen=True)
class OrthoSubset:
    subsystem: int
    indices: tuple[int, ...]


def extract_ortho_subset(B: ProductBasis, r: int, kappa: int, tol: float = DEFAULT_TOL) -> OrthoSubset:
    """Indices, starting with ``kappa``, whose ``r``-factors form an orthonormal basis of C^{d_r}.

    Works for ``d_r`` in {2, 3}: pick a partner from the first-stage set of
    ``kappa``; for ``d_r = 3`` pick a third vector from the second-stage set.
    """
    B.signature.check_index(r)
    dr = B.signature.dims[r]
    if dr not in (2, 3):
        raise ValueError(f"extraction is guaranteed only for d_r in {{2, 3}}, got {dr}")
    a = B.factors[r]
    first = partition(B, kappa, tol=tol, subsystem=r)
    candidates = []
    if dr == 2:
        candidates = [(kappa, lam) for lam in first.i_kappa]
    else:
        for lam in first.i_kappa:
            second = partition(B, kappa, lam, tol=tol, subsystem=r)
            candidates.extend((kappa, lam, mu) for mu in second.i_kappa_lambda)
            if candidates:
                break
    for idx in candidates:
        if validate_orthonormal(a[list(idx)], tol).passed:
            return OrthoSubset(r, tuple(int(i) for i in idx))
    raise StructuralViolation(f"no orthonormal {dr}-subset through anchor {kappa}; input is not an "
                              "orthonormal product basis")


# --------------------------------------------------------------------------
# rays and classification


def distinct_rays(vectors: np.ndarray, tol: float = DEFAULT_TOL) -> tuple[np.ndarray, np.ndarray]:
    """Cluster rows into rays: ``a ~ b`` iff ``1 - |<a|b>| <= tol``.

    Returns ``(labels, representatives)``.
    """
    vectors = np.asarray(vectors)
    reps: list[np.ndarray] = []
    labels = np.empty(len(vectors), dtype=int)
    for i, v in enumerate(vectors):
        for k, rep in enumerate(reps):
            if 1 - abs(np.vdot(rep, v)) <= tol:
                labels[i] = k
                break
        else:
            labels[i] = len(reps)
            reps.append(v)
    return labels, np.array(reps)


def orthonormal_subsets(reps: np.ndarray, size: int, tol: float = DEFAULT_TOL,
                        limit: int | None = None) -> list[tuple[int, ...]]:
    """All ``size``-subsets of ``reps`` (as sorted index tuples) that are pairwise orthogonal."""
    n = len(reps)
    orth = np.abs(reps.conj() @ reps.T) <= tol
    out: list[tuple[int, ...]] = []

    def grow(chosen: list[int], cand: list[int]):
        if limit is not None and len(out) >= limit:
            return
        if len(chosen) == size:
            out.append(tuple(chosen))
            return
        for pos, c in enumerate(cand):
            grow(chosen + [c], [x for x in cand[pos + 1:] if orth[c, x]])

    grow([], list(range(n)))
    return out


class Kind(str, Enum):
    DIRECT = "direct"
    INDIRECT = "indirect"


@dataclass(frozen=True)
class BasisClass:
    kind: Kind
    per_subsystem_basis_count: tuple[int, ...]
    per_subsystem_ray_count: tuple[int, ...] = field(default=())


def local_bases(B: ProductBasis, r: int, tol: float = DEFAULT_TOL) -> list[np.ndarray]:
    """Distinct orthonormal bases of C^{d_r} found among the r-th factors, as row matrices."""
    _, reps = distinct_rays(B.factors[r], tol)
    return [reps[list(s)] for s in orthonormal_subsets(reps, B.signature.dims[r], tol)]


def classify(B: ProductBasis, tol: float = DEFAULT_TOL) -> BasisClass:
    """Direct iff each subsystem carries exactly ``d_r`` distinct factor rays.

    ``per_subsystem_basis_count[r]`` counts the distinct orthonormal bases of
    C^{d_r} that can be formed from the distinct r-th factor rays.
    """
    counts, rays = [], []
    for r, dr in enumerate(B.signature.dims):
        _, reps = distinct_rays(B.factors[r], tol)
        rays.append(len(reps))
        counts.append(len(orthonormal_subsets(reps, dr, tol)))
    direct = all(n == dr for n, dr in zip(rays, B.signature.dims))
    return BasisClass(Kind.DIRECT if direct else Kind.INDIRECT, tuple(counts), tuple(rays))


# --------------------------------------------------------------------------
# bounds


class BoundStatus(str, Enum):
    PROVEN = "proven"
    CONJECTURED = "conjectured"


def _prime_factors(n: int) -> dict[int, int]:
    out: dict[int, int] = {}
    p = 2
    while p * p <= n:
        while n % p == 0:
            out[p] = out.get(p, 0) + 1
            n //= p
        p += 1
    if n > 1:
        out[n] = out.get(n, 0) + 1
    return out


def known_mub_count(d: int) -> tuple[int, bool]:
    """Number of MU bases assumed for C^d and whether it is exact.

    Prime powers: ``d + 1`` (exact). Otherwise the tensor-product lower bound
    ``min(p^k) + 1`` over the prime-power factors of d (3 for d = 6).
    """
    f = _prime_factors(d)
    if len(f) == 1:
        return d + 1, True
    return min(p ** k for p, k in f.items()) + 1, False


@dataclass(frozen=True)
class BoundResult:
    bound: int
    status: BoundStatus
    limiting_dim: int
    assumed_counts: dict = field(default_factory=dict, compare=False)


def mu_product_bound(sig) -> BoundResult:
    """Maximum number of MU product bases for the signature.

    If the smallest subsystem has dimension 2 or 3 the bound ``d_min + 1`` is
    proven. Otherwise the conjectured bound ``d_m + 1`` is returned, where
    ``d_m`` is the subsystem with the fewest known MU bases (ties broken by
    smaller dimension); ``assumed_counts`` records the counts used.
    """
    sig = as_signature(sig)
    dmin = min(sig.dims)
    counts = {d: known_mub_count(d) for d in sorted(set(sig.dims))}
    if dmin in (2, 3):
        return BoundResult(dmin + 1, BoundStatus.PROVEN, dmin, {d: c for d, (c, _) in counts.items()})
    dm = min(counts, key=lambda d: (counts[d][0], d))
    return BoundResult(dm + 1, BoundStatus.CONJECTURED, dm, {d: c for d, (c, _) in counts.items()})


# --------------------------------------------------------------------------
# grouping of factors into local bases


def group_into_bases(vectors: np.ndarray, size: int, tol: float = DEFAULT_TOL) -> list[tuple[int, ...]] | None:
    """Partition the rows into groups of ``size`` pairwise orthogonal vectors (exact cover), or None."""
    n = len(vectors)
    if n % size:
        return None
    orth = np.abs(vectors.conj() @ vectors.T) <= tol
    used = np.zeros(n, dtype=bool)
    groups: list[tuple[int, ...]] = []

    def cliques(chosen, cand):
        if len(chosen) == size:
            yield tuple(chosen)
            return
        for pos, c in enumerate(cand):
            yield from cliques(chosen + [c], [x for x in cand[pos + 1:] if orth[c, x]])

    def solve() -> bool:
        free = np.flatnonzero(~used)
        if free.size == 0:
            return True
        i = int(free[0])
        cand = [int(j) for j in free[1:] if orth[i, j]]
        for grp in cliques([i], cand):
            used[list(grp)] = True
            groups.append(grp)
            if solve():
                return True
            groups.pop()
            used[list(grp)] = False
        return False

    return list(groups) if solve() else None


@dataclass
class GroupingResult:
    success: bool
    first: list[tuple[int, ...]] | None
    second: list[tuple[int, ...]] | None
    witness: str | None = None

    def persist(self, B: ProductBasis, path, tol: float = DEFAULT_TOL) -> Path:
        """Write the basis and the failure description as a counterexample artifact."""
        from .io import mubset_to_dict
        from .linalg import MubSet

        path = Path(path)
        payload = mubset_to_dict(MubSet([B], ["counterexample"], provenance="grouping failure", tol=tol))
        payload["grouping"] = {"success": self.success, "first": self.first, "second": self.second,
                               "witness": self.witness}
        path.write_text(json.dumps(payload, indent=1))
        return path


def conjecture2_grouping(B: ProductBasis, tol: float = DEFAULT_TOL) -> GroupingResult:
    """Group first factors into ``d_2`` bases of C^{d_1} and second factors into ``d_1`` bases of C^{d_2}.

    A failure on an orthonormal product basis would contradict the conjectured
    structure of product bases; the result then carries a witness string.
    """
    if B.signature.n != 2:
        raise DimensionError(f"grouping needs a bipartite basis, got {B.signature}")
    d1, d2 = B.signature.dims
    first = group_into_bases(B.factors[0], d1, tol)
    second = group_into_bases(B.factors[1], d2, tol)
    witness = None
    if first is None or second is None:
        side = "first" if first is None else "second"
        witness = f"no exact cover of the {side}-subsystem factors by orthonormal bases (tol={tol:g})"
    return GroupingResult(first is not None and second is not None, first, second, witness)


def factor_groups_as_vectors(B: ProductBasis, groups: Sequence[Sequence[int]], r: int) -> list[np.ndarray]:
    return [B.factors[r][list(g)] for g in groups]
