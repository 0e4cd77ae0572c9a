"""Dense complex kernel for small multi-qudit spaces.

Index convention: tensor products are row-major, first factor slowest, i.e.
``tensor([a, b])[i * len(b) + j] == a[i] * b[j]``. Every module relies on it.
Subsystems are numbered from 0.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import reduce
from typing import Iterable, Sequence

import numpy as np

DEFAULT_TOL = 1e-9
SELF_TOL = 1e-12
NORM_REJECT = 1e-6


class DimensionError(ValueError):
    pass


class NormError(ValueError):
    pass


@dataclass(frozen=True)
class DimensionSignature:
    """Ordered subsystem dimensions ``(d_1, ..., d_n)``."""

    dims: tuple[int, ...]

    def __post_init__(self):
        dims = tuple(int(x) for x in self.dims)
        if len(dims) < 1:
            raise DimensionError("a signature needs at least one subsystem")
        if any(x < 2 for x in dims):
            raise DimensionError(f"subsystem dimensions must be >= 2, got {dims}")
        object.__setattr__(self, "dims", dims)

    @classmethod
    def of(cls, *dims) -> "DimensionSignature":
        if len(dims) == 1 and not isinstance(dims[0], (int, np.integer)):
            dims = tuple(dims[0])
        return cls(tuple(dims))

    @property
    def n(self) -> int:
        return len(self.dims)

    @property
    def total(self) -> int:
        return int(np.prod(self.dims))

    def complement(self, r: int) -> int:
        """Dimension of everything except subsystem ``r``."""
        self.check_index(r)
        return self.total // self.dims[r]

    def check_index(self, r: int) -> None:
        if not 0 <= r < self.n:
            raise IndexError(f"subsystem index {r} out of range for {self.dims}")

    def drop(self, r: int) -> "DimensionSignature":
        self.check_index(r)
        return DimensionSignature(self.dims[:r] + self.dims[r + 1:])

    def __len__(self):
        return self.n

    def __iter__(self):
        return iter(self.dims)

    def __str__(self):
        return "x".join(str(x) for x in self.dims)


def as_signature(sig) -> DimensionSignature:
    if isinstance(sig, DimensionSignature):
        return sig
    if isinstance(sig, (int, np.integer)):
        return DimensionSignature((int(sig),))
    return DimensionSignature(tuple(sig))


def _frozen(arr: np.ndarray) -> np.ndarray:
    arr = np.array(arr, dtype=complex)
    arr.setflags(write=False)
    return arr


def _rescaled(x: np.ndarray, nrm) -> np.ndarray:
    # leave data that is already unit to rounding untouched so serialization round-trips bit-exactly
    nrm = np.asarray(nrm)
    return x / np.where(np.abs(nrm - 1) <= 4 * np.finfo(float).eps, 1.0, nrm)


class Ket:
    """Unit vector in C^d.

    Inputs whose norm is off by more than ``NORM_REJECT`` raise ``NormError``
    unless ``normalize=True``; smaller deviations are rescaled silently.
    """

    __slots__ = ("coords",)

    def __init__(self, coords, normalize: bool = False):
        c = np.asarray(coords, dtype=complex).reshape(-1)
        if c.size == 0:
            raise DimensionError("empty ket")
        nrm = np.linalg.norm(c)
        if nrm == 0:
            raise NormError("zero vector cannot be a ket")
        if not normalize and abs(nrm - 1) > NORM_REJECT:
            raise NormError(f"ket norm {nrm:.9g} deviates from 1 by more than {NORM_REJECT:g}")
        self.coords = _frozen(_rescaled(c, nrm))

    @property
    def dim(self) -> int:
        return self.coords.size

    def __array__(self, dtype=None, copy=None):
        return self.coords if dtype is None else self.coords.astype(dtype)

    def __len__(self):
        return self.dim

    def __repr__(self):
        return f"Ket({np.array2string(self.coords, precision=4)})"


def as_array(v) -> np.ndarray:
    if isinstance(v, Ket):
        return v.coords
    if isinstance(v, ProductKet):
        return v.flat().coords
    return np.asarray(v, dtype=complex).reshape(-1)


class ProductKet:
    """A product vector stored by its factors, one per subsystem."""

    __slots__ = ("factors",)

    def __init__(self, factors: Iterable, normalize: bool = False):
        fs = tuple(f if isinstance(f, Ket) and not normalize else Ket(as_array(f), normalize=normalize)
                   for f in factors)
        if not fs:
            raise DimensionError("a product ket needs at least one factor")
        self.factors = fs

    @property
    def signature(self) -> DimensionSignature:
        return DimensionSignature(tuple(f.dim for f in self.factors))

    @property
    def dim(self) -> int:
        return int(np.prod([f.dim for f in self.factors]))

    def factor(self, r: int) -> Ket:
        return self.factors[r]

    def flat(self) -> Ket:
        return tensor(self.factors)

    def __len__(self):
        return len(self.factors)

    def __repr__(self):
        return "ProductKet(" + ", ".join(repr(f) for f in self.factors) + ")"


@dataclass(frozen=True)
class DensityMatrix:
    entries: np.ndarray

    def __post_init__(self):
        m = np.asarray(self.entries, dtype=complex)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise DimensionError(f"density matrix must be square, got shape {m.shape}")
        object.__setattr__(self, "entries", _frozen(m))

    @property
    def dim(self) -> int:
        return self.entries.shape[0]

    def is_valid(self, tol: float = DEFAULT_TOL) -> bool:
        m = self.entries
        if np.abs(m - m.conj().T).max() > tol:
            return False
        if abs(np.trace(m) - 1) > tol:
            return False
        return bool(np.linalg.eigvalsh((m + m.conj().T) / 2).min() >= -tol)

    def __array__(self, dtype=None, copy=None):
        return self.entries if dtype is None else self.entries.astype(dtype)


def tensor(factors: Sequence) -> Ket:
    """Kronecker product of ``factors`` in row-major order."""
    if len(factors) == 0:
        raise DimensionError("tensor of an empty factor list")
    arrs = [as_array(f) for f in factors]
    if any(a.size == 0 for a in arrs):
        raise DimensionError("empty factor")
    return Ket(reduce(np.kron, arrs), normalize=True)


def inner(a, b) -> complex:
    """``<a|b>``, antilinear in ``a``."""
    x, y = as_array(a), as_array(b)
    if x.shape != y.shape:
        raise DimensionError(f"dimension mismatch: {x.size} vs {y.size}")
    return complex(np.vdot(x, y))


def reduced_state(v, dims: Sequence[int], keep: int) -> np.ndarray:
    """Raw reduced matrix of ``|v><v|`` on subsystem ``keep`` (no normalization)."""
    x = as_array(v)
    t = x.reshape(dims)
    t = np.moveaxis(t, keep, 0).reshape(dims[keep], -1)
    return t @ t.conj().T


def partial_trace(v, sig, keep: int) -> DensityMatrix:
    """Trace ``|v><v|`` over every subsystem except ``keep``."""
    sig = as_signature(sig)
    x = as_array(v)
    if x.size != sig.total:
        raise DimensionError(f"vector of length {x.size} does not match signature {sig}")
    sig.check_index(keep)
    return DensityMatrix(reduced_state(x, sig.dims, keep))


@dataclass(frozen=True)
class ValidationReport:
    passed: bool
    max_deviation: float
    worst_pair: tuple[int, int]
    size: int
    dim: int
    tol: float

    def __bool__(self):
        return self.passed


def gram(vectors) -> np.ndarray:
    m = np.array([as_array(v) for v in vectors])
    return m.conj() @ m.T


def validate_orthonormal(basis, tol: float = DEFAULT_TOL) -> ValidationReport:
    """Largest ``|<b_i|b_j> - delta_ij|``; passing also needs ``len(basis) == dim``."""
    vecs = [as_array(v) for v in basis]
    if not vecs:
        raise DimensionError("empty basis")
    dim = vecs[0].size
    if any(v.size != dim for v in vecs):
        raise DimensionError("basis vectors have different dimensions")
    dev = np.abs(gram(vecs) - np.eye(len(vecs)))
    worst = np.unravel_index(int(np.argmax(dev)), dev.shape)
    mx = float(dev.max())
    return ValidationReport(passed=bool(mx <= tol and len(vecs) == dim), max_deviation=mx,
                            worst_pair=(int(worst[0]), int(worst[1])), size=len(vecs), dim=dim, tol=tol)


def haar_unitary(d: int, rng: np.random.Generator) -> np.ndarray:
    z = (rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))) / np.sqrt(2)
    q, r = np.linalg.qr(z)
    ph = np.diagonal(r) / np.abs(np.diagonal(r))
    return q * ph


def haar_ket(d: int, rng: np.random.Generator) -> Ket:
    z = rng.standard_normal(d) + 1j * rng.standard_normal(d)
    return Ket(z, normalize=True)


def is_unitary(u, tol: float = SELF_TOL) -> bool:
    u = np.asarray(u, dtype=complex)
    return u.ndim == 2 and u.shape[0] == u.shape[1] and np.abs(u.conj().T @ u - np.eye(len(u))).max() <= tol


def fix_phase(v: np.ndarray, tol: float = 1e-12) -> np.ndarray:
    """Rotate ``v`` so that its first non-negligible coordinate is real positive."""
    v = np.asarray(v, dtype=complex)
    nz = np.flatnonzero(np.abs(v) > tol)
    if nz.size == 0:
        return v
    c = v[nz[0]]
    return v * (abs(c) / c)


# --------------------------------------------------------------------------
# product bases and sets of them


class ProductBasis:
    """``d`` product vectors of C^d, stored as one factor table per subsystem.

    ``factors[r]`` has shape ``(d, d_r)``; row ``i`` is the r-th factor of
    vector ``i``. Construction checks shapes and factor norms, not
    orthogonality; use :meth:`orthonormality` for that.
    """

    def __init__(self, sig, factors: Sequence, normalize: bool = False):
        sig = as_signature(sig)
        if len(factors) != sig.n:
            raise DimensionError(f"expected {sig.n} factor tables, got {len(factors)}")
        tabs = []
        for r, (dr, f) in enumerate(zip(sig.dims, factors)):
            f = np.array(f, dtype=complex)
            if f.shape != (sig.total, dr):
                raise DimensionError(f"factor table {r} has shape {f.shape}, expected {(sig.total, dr)}")
            nrm = np.linalg.norm(f, axis=1)
            if np.any(nrm == 0):
                raise NormError(f"zero factor in subsystem {r}")
            if not normalize and np.abs(nrm - 1).max() > NORM_REJECT:
                i = int(np.argmax(np.abs(nrm - 1)))
                raise NormError(f"factor {r} of vector {i} has norm {nrm[i]:.9g}")
            tabs.append(_frozen(_rescaled(f, nrm[:, None])))
        self.signature = sig
        self.factors = tuple(tabs)

    @classmethod
    def from_kets(cls, kets: Sequence[ProductKet]) -> "ProductBasis":
        if not kets:
            raise DimensionError("empty basis")
        sig = kets[0].signature
        if any(k.signature != sig for k in kets):
            raise DimensionError("product kets with different signatures")
        return cls(sig, [np.array([k.factors[r].coords for k in kets]) for r in range(sig.n)])

    @classmethod
    def direct(cls, bases: Sequence) -> "ProductBasis":
        """Tensor product of one basis per subsystem; each given as a matrix with basis columns."""
        mats = [np.asarray(b, dtype=complex) for b in bases]
        sig = DimensionSignature(tuple(m.shape[0] for m in mats))
        idx = np.indices(sig.dims).reshape(sig.n, -1)
        return cls(sig, [mats[r][:, idx[r]].T for r in range(sig.n)])

    @property
    def dim(self) -> int:
        return self.signature.total

    def __len__(self):
        return self.dim

    def __getitem__(self, i) -> ProductKet:
        return ProductKet(Ket(f[i]) for f in self.factors)

    def __iter__(self):
        return (self[i] for i in range(self.dim))

    def vectors(self) -> list[ProductKet]:
        return list(self)

    def matrix(self) -> np.ndarray:
        """Flattened vectors as rows, shape ``(d, d)``."""
        out = self.factors[0]
        for f in self.factors[1:]:
            out = (out[:, :, None] * f[:, None, :]).reshape(out.shape[0], -1)
        return out

    def orthonormality(self, tol: float = DEFAULT_TOL) -> ValidationReport:
        return validate_orthonormal(self.matrix(), tol)

    def factor_gram(self, r: int) -> np.ndarray:
        f = self.factors[r]
        return f.conj() @ f.T

    def bipartition(self, r: int) -> "ProductBasis":
        """Regroup as ``C^{d_r} (x) C^{d/d_r}``: subsystem ``r`` first, the rest flattened."""
        self.signature.check_index(r)
        if self.signature.n == 2 and r == 0:
            return self
        rest = [self.factors[s] for s in range(self.signature.n) if s != r]
        comp = rest[0]
        for f in rest[1:]:
            comp = (comp[:, :, None] * f[:, None, :]).reshape(comp.shape[0], -1)
        sig = DimensionSignature((self.signature.dims[r], self.signature.complement(r)))
        return ProductBasis(sig, [self.factors[r], comp])

    def permuted(self, order) -> "ProductBasis":
        order = np.asarray(order)
        return ProductBasis(self.signature, [f[order] for f in self.factors])

    def __repr__(self):
        return f"ProductBasis({self.signature})"


class MubSet:
    """Ordered collection of product bases that are meant to be pairwise MU."""

    def __init__(self, bases: Sequence[ProductBasis], names: Sequence[str] | None = None,
                 provenance: str = "", tol: float = DEFAULT_TOL, metadata: dict | None = None):
        bases = tuple(bases)
        if not bases:
            raise DimensionError("empty MubSet")
        sig = bases[0].signature
        if any(b.signature != sig for b in bases):
            raise DimensionError("bases in a MubSet must share a signature")
        self.bases = bases
        self.names = tuple(names) if names is not None else tuple(f"B{i}" for i in range(len(bases)))
        if len(self.names) != len(bases):
            raise ValueError("one name per basis")
        self.provenance = provenance
        self.tol = tol
        self.metadata = dict(metadata or {})

    @property
    def signature(self) -> DimensionSignature:
        return self.bases[0].signature

    @property
    def dim(self) -> int:
        return self.signature.total

    def __len__(self):
        return len(self.bases)

    def __getitem__(self, i) -> ProductBasis:
        return self.bases[i]

    def __iter__(self):
        return iter(self.bases)

    def subset(self, idx) -> "MubSet":
        idx = list(idx)
        return MubSet([self.bases[i] for i in idx], [self.names[i] for i in idx],
                      self.provenance, self.tol, self.metadata)

    def matrices(self) -> np.ndarray:
        return np.array([b.matrix() for b in self.bases])

    def __repr__(self):
        return f"MubSet({len(self)} bases, {self.signature}, {self.provenance!r})"
