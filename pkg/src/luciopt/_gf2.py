"""Small dense GF(2) linear algebra on numpy boolean arrays."""

from __future__ import annotations

import numpy as np


def as_bits(m) -> np.ndarray:
    a = np.asarray(m, dtype=bool)
    return a.reshape(1, -1) if a.ndim == 1 else a.copy()


def rref(m) -> tuple[np.ndarray, list[int]]:
    """Reduced row echelon form; returns (matrix, pivot columns)."""
    a = as_bits(m)
    rows, cols = a.shape
    pivots: list[int] = []
    r = 0
    for c in range(cols):
        if r == rows:
            break
        hit = np.nonzero(a[r:, c])[0]
        if hit.size == 0:
            continue
        p = r + hit[0]
        if p != r:
            a[[r, p]] = a[[p, r]]
        others = np.nonzero(a[:, c])[0]
        others = others[others != r]
        if others.size:
            a[others] ^= a[r]
        pivots.append(c)
        r += 1
    return a[:r], pivots


def rank(m) -> int:
    a = as_bits(m)
    if a.size == 0:
        return 0
    return len(rref(a)[1])


def nullspace(m, ncols: int | None = None) -> np.ndarray:
    """Basis (rows) of {x : m x = 0}, in reduced form."""
    a = as_bits(m)
    if a.size == 0:
        n = a.shape[1] if a.ndim == 2 and a.shape[1] else (ncols or 0)
        return np.eye(n, dtype=bool)
    r, piv = rref(a)
    n = a.shape[1]
    free = [c for c in range(n) if c not in set(piv)]
    out = np.zeros((len(free), n), dtype=bool)
    for k, f in enumerate(free):
        out[k, f] = True
        for i, p in enumerate(piv):
            if r[i, f]:
                out[k, p] = True
    if out.shape[0]:
        out = rref(out)[0]
    return out


def in_span(rows, v) -> bool:
    a = as_bits(rows)
    v = np.asarray(v, dtype=bool)
    if a.size == 0:
        return not v.any()
    return rank(np.vstack([a, v])) == rank(a)


def reduce(rows_rref: np.ndarray, pivots: list[int], v) -> np.ndarray:
    """Reduce ``v`` against a matrix already in RREF."""
    v = np.array(v, dtype=bool)
    for i, p in enumerate(pivots):
        if v[p]:
            v ^= rows_rref[i]
    return v
