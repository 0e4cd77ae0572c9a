"""JSON serialization of :class:`MubSet` (the ``.mub.json`` format).

Layout::

    {"signature": [2, 2],
     "bases": [{"name": "z", "vectors": [[[[re, im], ...], [[re, im], ...]], ...]}, ...],
     "metadata": {"version": "...", "seed": 0, "tol": 1e-9, "provenance": "..."}}

Each vector is a list of per-subsystem factors. Floats are written with
Python's shortest round-trip repr, so values survive a save/load unchanged.
"""

from __future__ import annotations

import json
from pathlib import Path
from typing import Any

import numpy as np

from . import __version__
from .linalg import DEFAULT_TOL, DimensionError, MubSet, NormError, ProductBasis


class MubFileError(ValueError):
    """Schema or content problem in a MubFile; ``path`` locates it, e.g. ``bases[1].vectors[3][0]``."""

    def __init__(self, path: str, msg: str):
        super().__init__(f"{path}: {msg}" if path else msg)
        self.path = path


def _pair(z: complex) -> list[float]:
    return [float(z.real), float(z.imag)]


def mubset_to_dict(S: MubSet, seed: int | None = None) -> dict[str, Any]:
    bases = []
    for name, B in zip(S.names, S):
        vecs = [[[_pair(z) for z in f[i]] for f in B.factors] for i in range(B.dim)]
        bases.append({"name": name, "vectors": vecs})
    meta = {"version": __version__, "seed": seed, "tol": S.tol, "provenance": S.provenance}
    for k, v in S.metadata.items():
        meta.setdefault(k, v)
    return {"signature": list(S.signature.dims), "bases": bases, "metadata": meta}


def _expect(cond: bool, path: str, msg: str) -> None:
    if not cond:
        raise MubFileError(path, msg)


def _number(x, path: str) -> float:
    _expect(isinstance(x, (int, float)) and not isinstance(x, bool), path, "expected a number")
    return float(x)


def mubset_from_dict(data: Any, normalize: bool = False) -> MubSet:
    """Decode and validate; factor norms follow the usual policy unless ``normalize``."""
    _expect(isinstance(data, dict), "", "top level must be an object")
    for key in ("signature", "bases"):
        _expect(key in data, key, "missing")
    sig = data["signature"]
    _expect(isinstance(sig, list) and sig and all(isinstance(x, int) and not isinstance(x, bool) and x >= 2
                                                     for x in sig),
            "signature", "must be a non-empty list of integers >= 2")
    total = int(np.prod(sig))
    bases_raw = data["bases"]
    _expect(isinstance(bases_raw, list) and bases_raw, "bases", "must be a non-empty list")
    bases, names = [], []
    for b, braw in enumerate(bases_raw):
        bp = f"bases[{b}]"
        _expect(isinstance(braw, dict), bp, "must be an object")
        _expect(isinstance(braw.get("vectors"), list), f"{bp}.vectors", "missing or not a list")
        vecs = braw["vectors"]
        _expect(len(vecs) == total, f"{bp}.vectors", f"has {len(vecs)} vectors, expected {total}")
        tabs = [np.empty((total, d), dtype=complex) for d in sig]
        for i, v in enumerate(vecs):
            vp = f"{bp}.vectors[{i}]"
            _expect(isinstance(v, list) and len(v) == len(sig), vp, f"expected {len(sig)} factors")
            for r, (f, d) in enumerate(zip(v, sig)):
                fp = f"{vp}[{r}]"
                _expect(isinstance(f, list) and len(f) == d, fp, f"factor length must be {d}")
                for c, z in enumerate(f):
                    zp = f"{fp}[{c}]"
                    _expect(isinstance(z, list) and len(z) == 2, zp, "complex numbers are [re, im] pairs")
                    tabs[r][i, c] = complex(_number(z[0], zp), _number(z[1], zp))
        try:
            bases.append(ProductBasis(tuple(sig), tabs, normalize=normalize))
        except NormError as e:
            raise MubFileError(bp, f"norm check failed ({e}); use --normalize to rescale") from e
        except DimensionError as e:
            raise MubFileError(bp, str(e)) from e
        name = braw.get("name", f"B{b}")
        _expect(isinstance(name, str), f"{bp}.name", "must be a string")
        names.append(name)
    meta = data.get("metadata", {}) or {}
    _expect(isinstance(meta, dict), "metadata", "must be an object")
    tol = meta.get("tol", DEFAULT_TOL)
    tol = DEFAULT_TOL if tol is None else _number(tol, "metadata.tol")
    extra = {k: v for k, v in meta.items() if k not in ("tol", "provenance")}
    return MubSet(bases, names, provenance=str(meta.get("provenance", "")), tol=tol, metadata=extra)


def dumps(S: MubSet, seed: int | None = None) -> str:
    return json.dumps(mubset_to_dict(S, seed), indent=1)


def loads(text: str, normalize: bool = False) -> MubSet:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as e:
        raise MubFileError(f"line {e.lineno} column {e.colno}", f"invalid JSON: {e.msg}") from e
    return mubset_from_dict(data, normalize)


def save_mubset(S: MubSet, path, seed: int | None = None) -> Path:
    path = Path(path)
    path.write_text(dumps(S, seed) + "\n")
    return path


def load_mubset(path, normalize: bool = False) -> MubSet:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as e:
        raise MubFileError(str(path), f"cannot read file ({e.strerror})") from e
    return loads(text, normalize)
