"""Fixture product bases and a seeded random product-basis generator."""

from __future__ import annotations

import numpy as np

from .constructions import pauli_triple, prime_mub_set, triple_2x3, weyl_quadruple_d3
from .linalg import ProductBasis, as_signature, haar_unitary

S2 = 1 / np.sqrt(2)


def _e(d, i):
    v = np.zeros(d, dtype=complex)
    v[i] = 1
    return v


def _pm(d, i, j, sign):
    return (_e(d, i) + sign * _e(d, j)) * S2


def indirect_d4() -> ProductBasis:
    """``{|0,0>, |0,1>, |1,+>, |1,->}``."""
    z0, z1 = _e(2, 0), _e(2, 1)
    plus, minus = _pm(2, 0, 1, 1), _pm(2, 0, 1, -1)
    return ProductBasis((2, 2), [np.array([z0, z0, z1, z1]), np.array([z0, z1, plus, minus])])


def domino_3x3() -> ProductBasis:
    """The nine-state domino basis of C^3 (x) C^3.

    Order: |1,1>, |0,0+1>, |0,0-1>, |2,1+2>, |2,1-2>, |1+2,0>, |1-2,0>, |0+1,2>, |0-1,2>.
    """
    e = lambda i: _e(3, i)  # noqa: E731
    pm = lambda i, j, s: _pm(3, i, j, s)  # noqa: E731
    pairs = [
        (e(1), e(1)),
        (e(0), pm(0, 1, 1)), (e(0), pm(0, 1, -1)),
        (e(2), pm(1, 2, 1)), (e(2), pm(1, 2, -1)),
        (pm(1, 2, 1), e(0)), (pm(1, 2, -1), e(0)),
        (pm(0, 1, 1), e(2)), (pm(0, 1, -1), e(2)),
    ]
    return ProductBasis((3, 3), [np.array([a for a, _ in pairs]), np.array([b for _, b in pairs])])


def fixture_corpus() -> dict[str, ProductBasis]:
    """Named orthonormal product bases covering direct, indirect and non-semi-direct structure."""
    q, t = pauli_triple(), weyl_quadruple_d3()
    out = {
        "indirect_d4": indirect_d4(),
        "domino_3x3": domino_3x3(),
        "std_2x2": ProductBasis.direct([q[0], q[0]]),
        "zx_2x2": ProductBasis.direct([q[0], q[1]]),
        "xy_2x2": ProductBasis.direct([q[1], q[2]]),
        "std_2x3": ProductBasis.direct([q[0], t[0]]),
        "yw_2x3": ProductBasis.direct([q[2], t[3]]),
        "std_3x3": ProductBasis.direct([t[0], t[0]]),
        "xy_3x3": ProductBasis.direct([t[1], t[2]]),
        "zxw_2x2x3": ProductBasis.direct([q[0], q[1], t[3]]),
    }
    for i, b in enumerate(triple_2x3(indirect=True)):
        out[f"triple_2x3_indirect_{i}"] = b
    return out


def _random_local_basis(d: int, rng: np.random.Generator, structured: bool) -> np.ndarray:
    """Basis as a matrix with basis columns."""
    if not structured:
        return haar_unitary(d, rng)
    try:
        pool = prime_mub_set(d)
    except ValueError:
        pool = [np.eye(d, dtype=complex)]
    m = pool[rng.integers(len(pool))]
    phases = np.exp(2j * np.pi * rng.random(d))
    return m[:, rng.permutation(d)] * phases


def _semidirect(dims: tuple[int, ...], rng, structured: bool, p_reuse: float) -> list[np.ndarray]:
    if len(dims) == 1:
        return [_random_local_basis(dims[0], rng, structured).T]
    r = int(rng.integers(len(dims)))
    rest = dims[:r] + dims[r + 1:]
    u = _random_local_basis(dims[r], rng, structured)
    tabs = [[] for _ in dims]
    branch = None
    for k in range(dims[r]):
        if branch is None or rng.random() >= p_reuse:
            branch = _semidirect(rest, rng, structured, p_reuse)
        size = branch[0].shape[0]
        tabs[r].append(np.repeat(u[:, k][None, :], size, axis=0))
        for s, tab in zip([s for s in range(len(dims)) if s != r], branch):
            tabs[s].append(tab)
    return [np.vstack(t) for t in tabs]


def random_product_basis(sig, rng: np.random.Generator, structured: bool | None = None,
                         p_reuse: float = 0.3) -> ProductBasis:
    """Random semi-direct product basis.

    One subsystem gets a random basis; each of its vectors is paired with an
    independently drawn product basis of the remaining subsystems (reused from
    the previous branch with probability ``p_reuse``, which produces direct
    bases). ``structured`` draws local bases from complete MU sets with random
    phases and orderings instead of Haar-random unitaries, so that exact zero
    overlaps and repeated rays occur; ``None`` picks at random.
    """
    sig = as_signature(sig)
    if structured is None:
        structured = bool(rng.random() < 0.5)
    tabs = _semidirect(sig.dims, rng, structured, p_reuse)
    order = rng.permutation(sig.total)
    return ProductBasis(sig, [t[order] for t in tabs], normalize=True)


def random_local_unitary_image(B: ProductBasis, rng: np.random.Generator) -> ProductBasis:
    """``B`` transformed by independent Haar unitaries on every subsystem."""
    us = [haar_unitary(d, rng) for d in B.signature.dims]
    return ProductBasis(B.signature, [f @ u.T for f, u in zip(B.factors, us)], normalize=True)
