"""Entanglement of vectors that are MU to sets of product bases."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import least_squares

from .linalg import (DEFAULT_TOL, DensityMatrix, DimensionError, Ket, MubSet, as_array,
                     as_signature, partial_trace, reduced_state)
from .mu import are_bases_mu
from .structure import distinct_rays, orthonormal_subsets


class MuPreconditionError(ValueError):
    """The vector handed to an audit is not MU to every basis of the set."""

    def __init__(self, msg, basis: int, vector: int, deviation: float):
        super().__init__(msg)
        self.basis, self.vector, self.deviation = basis, vector, deviation


def mixedness_deviation(rho, d: int | None = None) -> float:
    """Frobenius distance ``||rho - I/d||_F``."""
    m = np.asarray(rho, dtype=complex)
    d = m.shape[0] if d is None else d
    return float(np.linalg.norm(m - np.eye(d) / d))


def is_maximally_entangled(v, sig, r: int, tol: float = DEFAULT_TOL) -> tuple[bool, float]:
    sig = as_signature(sig)
    x = as_array(v)
    if x.size != sig.total:
        raise DimensionError(f"vector of length {x.size} does not match {sig}")
    dev = mixedness_deviation(partial_trace(x, sig, r).entries)
    return dev <= tol, dev


def reconstruct_from_mu_probabilities(rho, complete_set: list[np.ndarray]) -> tuple[np.ndarray, np.ndarray]:
    """Rebuild ``rho`` from its diagonals in a complete set of MU bases.

    ``rho = sum_b sum_v p_b^v |v_b><v_b| - I`` with ``p_b^v = <v_b|rho|v_b>``;
    bases are matrices with basis columns. Returns ``(rebuilt, p)`` where
    ``p[b, v]`` are the probabilities.
    """
    rho = np.asarray(rho, dtype=complex)
    d = rho.shape[0]
    if len(complete_set) != d + 1:
        raise ValueError(f"need {d + 1} MU bases of C^{d}, got {len(complete_set)}")
    p = np.array([np.real(np.einsum("iv,ij,jv->v", m.conj(), rho, m)) for m in complete_set])
    out = -np.eye(d, dtype=complex)
    for m, pb in zip(complete_set, p):
        out += (m * pb) @ m.conj().T
    return out, p


@dataclass
class EntanglementAudit:
    subsystem: int
    reduced: DensityMatrix
    mixedness_deviation: float
    hypothesis: bool
    factor_bases: list = field(default_factory=list)
    probabilities: np.ndarray | None = None
    maximally_mixed: bool = False


def _factor_basis(B, r: int, tol: float) -> np.ndarray | None:
    """An orthonormal basis of C^{d_r} among the r-th factors of ``B`` (rows), if any."""
    _, reps = distinct_rays(B.factors[r], tol)
    subs = orthonormal_subsets(reps, B.signature.dims[r], tol, limit=1)
    return reps[list(subs[0])] if subs else None


def _check_mu(v: np.ndarray, S: MubSet, tol: float) -> None:
    worst = (0.0, 0, 0)
    for b, B in enumerate(S):
        dev = np.abs(np.abs(B.matrix().conj() @ v) ** 2 - 1 / S.dim)
        i = int(np.argmax(dev))
        if dev[i] > worst[0]:
            worst = (float(dev[i]), b, i)
    if worst[0] > tol:
        raise MuPreconditionError(f"vector is not MU to basis {worst[1]} (vector {worst[2]}, "
                                  f"deviation {worst[0]:.3g})", worst[1], worst[2], worst[0])


def audit_mu_vector(v, S: MubSet, tol: float = DEFAULT_TOL) -> list[EntanglementAudit]:
    """Reduced states of a vector MU to ``S``, one audit per subsystem.

    ``hypothesis`` is true for subsystem r when ``d_r + 1`` bases of ``S``
    each contain an orthonormal basis of C^{d_r} among their r-th factors and
    those local bases are pairwise MU. Then the diagonals of ``rho_r`` in
    every local basis are recorded and the reduced state must be ``I/d_r``.
    """
    x = as_array(v)
    sig = S.signature
    if x.size != sig.total:
        raise DimensionError(f"vector of length {x.size} does not match {sig}")
    _check_mu(x, S, tol)
    out = []
    for r, dr in enumerate(sig.dims):
        rho = partial_trace(x, sig, r)
        dev = mixedness_deviation(rho.entries)
        local = [fb for fb in (_factor_basis(B, r, tol) for B in S) if fb is not None]
        hyp = len(local) >= dr + 1 and all(
            are_bases_mu(local[a], local[b], tol).passed
            for a in range(dr + 1) for b in range(a + 1, dr + 1))
        audit = EntanglementAudit(r, rho, dev, hyp)
        if hyp:
            local = local[:dr + 1]
            audit.factor_bases = local
            audit.probabilities = np.array([np.real(np.einsum("vi,ij,vj->v", fb.conj(), rho.entries, fb))
                                            for fb in local])
            audit.maximally_mixed = dev <= tol
        out.append(audit)
    return out


# --------------------------------------------------------------------------
# search for vectors MU to a set of bases


def _stack(S) -> np.ndarray:
    """Rows = conjugated basis vectors of all bases, so ``M @ z`` are the overlaps."""
    if isinstance(S, MubSet):
        return np.vstack([B.matrix().conj() for B in S])
    return np.vstack([np.asarray(m).conj() for m in S])


def mu_residuals(x: np.ndarray, M: np.ndarray) -> np.ndarray:
    """``|<psi_k|v>|^2 - 1/d`` with ``v = z/|z|``, ``z = x[:d] + i x[d:]``."""
    d = M.shape[1]
    z = x[:d] + 1j * x[d:]
    return np.abs(M @ z) ** 2 / np.vdot(z, z).real - 1 / d


def mu_residual_jacobian(x: np.ndarray, M: np.ndarray) -> np.ndarray:
    d = M.shape[1]
    z = x[:d] + 1j * x[d:]
    nn = np.vdot(z, z).real
    a = M @ z
    p = np.abs(a) ** 2 / nn
    # d p_k / d conj(z) = (psi_k a_k - p_k z) / |z|^2, psi_k = conj(M[k])
    g = (M.conj() * a[:, None] - p[:, None] * z[None, :]) / nn
    return np.hstack([2 * g.real, 2 * g.imag])


def mu_objective(x: np.ndarray, M: np.ndarray) -> float:
    """``F = sum_k (|<psi_k|v>|^2 - 1/d)^2`` over all vectors of all bases."""
    e = mu_residuals(x, M)
    return float(e @ e)


def mu_objective_grad(x: np.ndarray, M: np.ndarray) -> np.ndarray:
    return 2 * mu_residuals(x, M) @ mu_residual_jacobian(x, M)


@dataclass
class MuVectorSearch:
    vectors: list
    best_residual: float
    residuals: np.ndarray
    restarts: int
    seed: int
    tol: float

    @property
    def found(self) -> bool:
        return bool(self.vectors)


def _restart_rng(seed: int, k: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence([seed, k]))


def find_mu_vectors(S, restarts: int = 200, tol: float = DEFAULT_TOL, seed: int = 0,
                    max_nfev: int = 400) -> MuVectorSearch:
    """Multi-start least squares on the MU residuals of a unit vector.

    Returns every restart whose final objective is below ``tol**2``,
    deduplicated up to global phase, and the best objective reached. An
    empty result only means none was found.
    """
    M = _stack(S)
    d = M.shape[1]
    found: list[np.ndarray] = []
    res = np.empty(restarts)
    for k in range(restarts):
        rng = _restart_rng(seed, k)
        x0 = rng.standard_normal(2 * d)
        sol = least_squares(mu_residuals, x0, jac=mu_residual_jacobian, args=(M,), method="trf",
                            xtol=1e-15, ftol=1e-15, gtol=1e-15, max_nfev=max_nfev)
        f = mu_objective(sol.x, M)
        res[k] = f
        if f < tol ** 2:
            z = sol.x[:d] + 1j * sol.x[d:]
            z = z / np.linalg.norm(z)
            if np.abs(np.abs(M @ z) ** 2 - 1 / d).max() > tol:
                continue
            if not any(abs(abs(np.vdot(w, z)) - 1) < 1e-8 for w in found):
                found.append(z)
    return MuVectorSearch([Ket(z) for z in found], float(res.min()), res, restarts, seed, tol)


def raw_reduced(v, sig, r: int) -> np.ndarray:
    sig = as_signature(sig)
    return reduced_state(as_array(v), sig.dims, r)
