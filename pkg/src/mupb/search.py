"""Numerical searches for MU product bases.

A candidate product basis is described by a *template*: for every vector and
every subsystem, which unitary supplies the factor and which column of it.
Unitaries are ``expm(A)`` with ``A`` anti-Hermitian, ``d_r**2`` real
parameters each, so candidates are orthonormal by construction.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from itertools import product
from pathlib import Path

import numpy as np
from scipy.linalg import expm, expm_frechet
from scipy.optimize import least_squares

from .constructions import BasisAssignment, ConstructionError, assemble_corollary_set, direct_sum_columns
from .linalg import DEFAULT_TOL, DimensionSignature, MubSet, ProductBasis, as_signature
from .mu import are_bases_mu, set_mu_report
from .structure import mu_product_bound

FOUND_OBJECTIVE = 1e-9
BOUNDED_AWAY = 1e-3


class SearchPreconditionError(ValueError):
    pass


@dataclass
class SearchReport:
    signature: DimensionSignature
    target: str
    seed: int
    restarts: int
    best_objective: float
    found: list = field(default_factory=list)
    wall_time: float = 0.0
    objectives: list = field(default_factory=list)
    flags: list = field(default_factory=list)

    @property
    def success(self) -> bool:
        return bool(self.found)

    @property
    def bounded_away(self) -> bool:
        return self.best_objective > BOUNDED_AWAY

    def same_outcome(self, other: "SearchReport") -> bool:
        """Equality of everything except wall time."""
        return (self.signature == other.signature and self.target == other.target
                and self.seed == other.seed and self.restarts == other.restarts
                and self.objectives == other.objectives and len(self.found) == len(other.found))


# --------------------------------------------------------------------------
# structured enumeration


def _as_pool(pool, comp_sig: DimensionSignature) -> list[ProductBasis]:
    out = []
    for g in pool:
        if not isinstance(g, ProductBasis):
            g = direct_sum_columns(np.asarray(g, dtype=complex))
        if g.signature != comp_sig:
            raise ConstructionError(f"pool basis has signature {g.signature}, expected {comp_sig}")
        out.append(g)
    return out


def _set_key(S: MubSet, digits: int = 6) -> frozenset:
    keys = []
    for B in S:
        rows = []
        for v in B.matrix():
            i = int(np.argmax(np.abs(v) > 1e-8))
            w = v * np.exp(-1j * np.angle(v[i]))
            rows.append(tuple(np.round(np.concatenate([w.real, w.imag]), digits) + 0.0))
        keys.append(tuple(sorted(rows)))
    return frozenset(keys)


def enumerate_structured_sets(sig, small_block: tuple[int, int], pool, tol: float = DEFAULT_TOL,
                              direct_only: bool = False) -> list[MubSet]:
    """Every MU set obtainable by filling a :class:`BasisAssignment` from ``pool``.

    Each of the ``p + 1`` rows takes ``p**k`` pool members; members in
    different rows must be MU to each other. ``direct_only`` restricts rows to
    a single repeated member. Sets that coincide as collections of bases are
    emitted once.
    """
    sig = as_signature(sig)
    p, k = small_block
    if not pool:
        raise ConstructionError("empty pool")
    comp = DimensionSignature(sig.dims[k:])
    g = _as_pool(pool, comp)
    for i, b in enumerate(g):
        if not b.orthonormality(tol).passed:
            raise ConstructionError(f"pool basis {i} is not orthonormal")
    n = len(g)
    mu = np.array([[i != j and are_bases_mu(g[i], g[j], tol).passed for j in range(n)] for i in range(n)])
    rows, width = p + 1, p ** k

    out, seen = [], set()

    def emit(assign: list[list[int]]) -> None:
        S = assemble_corollary_set(sig, small_block,
                                   BasisAssignment([[g[i] for i in row] for row in assign]), tol)
        key = _set_key(S)
        if key not in seen:
            seen.add(key)
            out.append(S)

    def rec(b: int, assign: list[list[int]]) -> None:
        if b == rows:
            emit(assign)
            return
        used = [i for row in assign for i in row]
        ok = [i for i in range(n) if all(mu[i, j] for j in used)]
        choices = ([(i,) * width for i in ok] if direct_only else product(ok, repeat=width))
        for row in choices:
            rec(b + 1, assign + [list(row)])

    rec(0, [])
    return out


# --------------------------------------------------------------------------
# parameterized product bases


@dataclass(frozen=True)
class Template:
    """``slots[i][s] = (unitary index, column)`` for vector i, subsystem s."""

    signature: DimensionSignature
    unitary_dims: tuple[int, ...]
    slots: tuple[tuple[tuple[int, int], ...], ...]
    name: str

    @property
    def n_params(self) -> int:
        return sum(d * d for d in self.unitary_dims)


def direct_template(sig) -> Template:
    sig = as_signature(sig)
    idx = np.indices(sig.dims).reshape(sig.n, -1).T
    slots = tuple(tuple((s, int(c)) for s, c in enumerate(row)) for row in idx)
    return Template(sig, sig.dims, slots, "direct")


def semidirect_template(sig, r: int) -> Template:
    """Split on subsystem ``r``: each of its ``d_r`` vectors gets its own direct basis of the rest."""
    sig = as_signature(sig)
    sig.check_index(r)
    rest = [s for s in range(sig.n) if s != r]
    dims = [sig.dims[r]]
    owner = {}
    for k in range(sig.dims[r]):
        for s in rest:
            owner[k, s] = len(dims)
            dims.append(sig.dims[s])
    slots = []
    for idx in np.indices(sig.dims).reshape(sig.n, -1).T:
        k = int(idx[r])
        slots.append(tuple((0, k) if s == r else (owner[k, s], int(idx[s])) for s in range(sig.n)))
    return Template(sig, tuple(dims), tuple(slots), f"semidirect[{r}]")


def templates_for(sig) -> list[Template]:
    sig = as_signature(sig)
    if sig.n == 1:
        return [direct_template(sig)]
    return [direct_template(sig)] + [semidirect_template(sig, r) for r in range(sig.n)]


def _anti_hermitian(theta: np.ndarray, d: int) -> np.ndarray:
    """``i H`` with H Hermitian built from d*d reals (diagonal, then upper real, upper imaginary)."""
    h = np.zeros((d, d), dtype=complex)
    h[np.diag_indices(d)] = theta[:d]
    iu = np.triu_indices(d, 1)
    m = len(iu[0])
    h[iu] = theta[d:d + m] + 1j * theta[d + m:d + 2 * m]
    h = h + np.triu(h, 1).conj().T
    return 1j * h


def _generator_basis(d: int) -> list[np.ndarray]:
    return [_anti_hermitian(e, d) for e in np.eye(d * d)]


class _Model:
    """Residuals ``|<s|b_i>|^2 - 1/d`` of a template basis against fixed vectors."""

    def __init__(self, template: Template, fixed: np.ndarray):
        self.t = template
        self.fixed_conj = np.asarray(fixed, dtype=complex).conj()
        self.d = template.signature.total
        self.offsets = np.cumsum([0] + [u * u for u in template.unitary_dims])
        self.gens = {u: _generator_basis(u) for u in set(template.unitary_dims)}
        sl = np.array(template.slots)  # (d, n, 2)
        self.which = sl[:, :, 0]
        self.col = sl[:, :, 1]

    def generators(self, x: np.ndarray):
        out = []
        for u, du in enumerate(self.t.unitary_dims):
            A = _anti_hermitian(x[self.offsets[u]:self.offsets[u + 1]], du)
            out.append(A)
        return out

    def _factors(self, mats) -> list[np.ndarray]:
        # factor table per subsystem, rows = vectors
        n = self.t.signature.n
        return [np.array([mats[self.which[i, s]][:, self.col[i, s]] for i in range(self.d)]) for s in range(n)]

    @staticmethod
    def _rowkron(tabs: list[np.ndarray]) -> np.ndarray:
        v = tabs[0]
        for t in tabs[1:]:
            v = (v[:, :, None] * t[:, None, :]).reshape(v.shape[0], -1)
        return v

    def basis_matrix(self, x: np.ndarray) -> np.ndarray:
        return self._rowkron(self._factors([expm(A) for A in self.generators(x)]))

    def product_basis(self, x: np.ndarray) -> ProductBasis:
        return ProductBasis(self.t.signature, self._factors([expm(A) for A in self.generators(x)]), normalize=True)

    def residuals(self, x: np.ndarray) -> np.ndarray:
        a = self.fixed_conj @ self.basis_matrix(x).T
        return (np.abs(a) ** 2 - 1 / self.d).ravel()

    def jacobian(self, x: np.ndarray) -> np.ndarray:
        As = self.generators(x)
        Us, dUs = [], []
        for A, du in zip(As, self.t.unitary_dims):
            derivs = []
            U = None
            for E in self.gens[du]:
                U, dU = expm_frechet(A, E)
                derivs.append(dU)
            Us.append(U)
            dUs.append(derivs)
        tabs = self._factors(Us)
        a = self.fixed_conj @ self._rowkron(tabs).T
        cols = []
        n = self.t.signature.n
        for u, derivs in enumerate(dUs):
            for dU in derivs:
                dB = np.zeros((self.d, self.d), dtype=complex)
                for s in range(n):
                    rows = np.nonzero(self.which[:, s] == u)[0]
                    if len(rows) == 0:
                        continue
                    sub = [t[rows] for t in tabs]
                    sub[s] = dU[:, self.col[rows, s]].T
                    dB[rows] += self._rowkron(sub)
                da = self.fixed_conj @ dB.T
                cols.append((2 * np.real(a.conj() * da)).ravel())
        return np.stack(cols, axis=1)

    def objective(self, x: np.ndarray) -> float:
        e = self.residuals(x)
        return float(e @ e)


def mu_set_objective(S: MubSet | list, candidate) -> float:
    """Total squared MU deviation of ``candidate`` against every basis of ``S``."""
    fixed = np.vstack([B.matrix() for B in S])
    c = candidate.matrix() if isinstance(candidate, ProductBasis) else np.asarray(candidate)
    d = c.shape[1]
    e = np.abs(fixed.conj() @ c.T) ** 2 - 1 / d
    return float(np.sum(e * e))


def _restart_rng(seed: int, k: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence([seed, k]))


def _solve(model: _Model, x0: np.ndarray, max_nfev: int):
    sol = least_squares(model.residuals, x0, jac=model.jacobian, method="trf",
                        xtol=1e-15, ftol=1e-15, gtol=1e-15, max_nfev=max_nfev)
    return sol.x, model.objective(sol.x)


def extend_set(S: MubSet, restarts: int = 200, tol: float = DEFAULT_TOL, seed: int = 0,
               max_nfev: int = 200, time_limit: float | None = None) -> SearchReport:
    """Look for one more product basis MU to every basis of ``S``.

    Restart ``k`` uses template ``k mod T`` (direct, then a semi-direct split
    on each subsystem) and a random start drawn from the ``(seed, k)`` stream.
    Candidates below the objective threshold are accepted only after full MU
    validation of the extended set at ``tol``.
    """
    t0 = time.perf_counter()
    sig = S.signature
    rep, where = set_mu_report(list(S), tol)
    if not rep.passed:
        raise SearchPreconditionError(f"input bases {where} are not MU (deviation {rep.max_deviation:g})")
    fixed = np.vstack([B.matrix() for B in S])
    models = [_Model(t, fixed) for t in templates_for(sig)]
    report = SearchReport(sig, "extend-set", seed, restarts, np.inf)
    for k in range(restarts):
        if time_limit is not None and time.perf_counter() - t0 > time_limit:
            report.flags.append(f"time limit reached after {k} restarts")
            report.restarts = k
            break
        model = models[k % len(models)]
        x0 = _restart_rng(seed, k).normal(scale=np.pi, size=model.t.n_params)
        x, f = _solve(model, x0, max_nfev)
        report.objectives.append(f)
        report.best_objective = min(report.best_objective, f)
        if f < FOUND_OBJECTIVE:
            cand = model.product_basis(x)
            ext = MubSet(list(S) + [cand], names=list(S.names) + [f"found{k}"],
                         provenance=f"extend-set seed={seed} restart={k} template={model.t.name}", tol=tol)
            r2, _ = set_mu_report(list(ext), tol)
            if r2.passed and cand.orthonormality(tol).passed:
                report.found.append(ext)
    report.wall_time = time.perf_counter() - t0
    return report


def conjecture1_probe(sig, restarts: int = 10, sweeps: int = 20, tol: float = DEFAULT_TOL, seed: int = 0,
                      max_nfev: int = 50, time_limit: float | None = None,
                      out_dir: str | Path | None = None) -> SearchReport:
    """Try to build one basis more than the conjectured bound when every dimension is >= 4.

    Alternating optimization: each sweep re-optimizes every basis against the
    others held fixed, templates cycling per basis. A success is flagged
    ``CONJECTURE-VIOLATION`` and written to ``out_dir`` when given.
    """
    from .io import save_mubset

    sig = as_signature(sig)
    if min(sig.dims) < 4:
        raise SearchPreconditionError(f"signature {sig} has a dimension below 4; use extend_set")
    t0 = time.perf_counter()
    target = mu_product_bound(sig).bound + 1
    temps = templates_for(sig)
    report = SearchReport(sig, "conjecture1", seed, restarts, np.inf)
    for k in range(restarts):
        if time_limit is not None and time.perf_counter() - t0 > time_limit:
            report.flags.append(f"time limit reached after {k} restarts")
            report.restarts = k
            break
        rng = _restart_rng(seed, k)
        chosen = [temps[(k + b) % len(temps)] for b in range(target)]
        xs = [rng.normal(scale=np.pi, size=t.n_params) for t in chosen]
        mats = [_Model(t, np.eye(sig.total)).basis_matrix(x) for t, x in zip(chosen, xs)]
        total = np.inf
        for _ in range(sweeps):
            for b in range(target):
                fixed = np.vstack([m for c, m in enumerate(mats) if c != b])
                model = _Model(chosen[b], fixed)
                xs[b], _ = _solve(model, xs[b], max_nfev)
                mats[b] = model.basis_matrix(xs[b])
            total = sum(mu_set_objective([_Wrap(mats[c]) for c in range(b)], mats[b]) for b in range(1, target))
            if total < FOUND_OBJECTIVE:
                break
        report.objectives.append(total)
        report.best_objective = min(report.best_objective, total)
        if total < FOUND_OBJECTIVE:
            bases = [_Model(t, np.eye(sig.total)).product_basis(x) for t, x in zip(chosen, xs)]
            S = MubSet(bases, provenance=f"CONJECTURE-VIOLATION sig={sig} seed={seed} restart={k}", tol=tol)
            r2, _ = set_mu_report(bases, tol)
            if r2.passed:
                report.found.append(S)
                report.flags.append("CONJECTURE-VIOLATION")
                if out_dir is not None:
                    Path(out_dir).mkdir(parents=True, exist_ok=True)
                    save_mubset(S, Path(out_dir) / f"conjecture1-violation-{sig}-seed{seed}-r{k}.mub.json",
                                seed=seed)
    report.wall_time = time.perf_counter() - t0
    return report


class _Wrap:
    """Minimal stand-in exposing ``matrix()`` for raw basis matrices."""

    def __init__(self, m: np.ndarray):
        self._m = m

    def matrix(self) -> np.ndarray:
        return self._m
