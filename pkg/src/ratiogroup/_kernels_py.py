"""Pure numpy implementations of the hot loops (fallback for the compiled core)."""

from __future__ import annotations

import numpy as np

BACKEND = "numpy"


def strip_primes(u: int, v: int, n0: int, count: int, primes) -> tuple[np.ndarray, np.ndarray]:
    """Valuations of ``u*n + v`` at ``primes`` for ``n = n0 .. n0+count-1``.

    Returns ``(exps, cof)``: ``exps[i, k] = v_{p_k}(u*(n0+i) + v)`` and ``cof``
    the value with those primes removed (sign kept). Zero values get
    exponent 0 and cofactor 0.
    """
    primes = [int(p) for p in primes]
    vals = u * (n0 + np.arange(count, dtype=np.int64)) + v
    cof = vals.copy()
    exps = np.zeros((count, len(primes)), dtype=np.int32)
    if count == 0:
        return exps, cof
    top = int(np.abs(vals).max())
    zero = cof == 0
    for k, p in enumerate(primes):
        if u % p:
            pj = p
            while pj <= top:
                root = (-v * pow(u, -1, pj)) % pj
                start = (root - n0) % pj
                sl = slice(start, count, pj)
                exps[sl, k] += 1
                cof[sl] //= p
                pj *= p
        else:
            mask = (cof % p == 0) & ~zero
            while mask.any():
                exps[mask, k] += 1
                cof[mask] //= p
                mask = (cof % p == 0) & ~zero
    exps[zero] = 0
    return exps, cof


def pair_histogram(idx1: np.ndarray, idx2: np.ndarray, shift: np.ndarray, table: np.ndarray, L: int) -> np.ndarray:
    """Histogram of ``table[idx1] - table[idx2] + shift (mod L)``.

    Entries where either table value is negative (a non-unit) are skipped.
    """
    a = table[idx1]
    b = table[idx2]
    ok = (a >= 0) & (b >= 0)
    k = (a[ok] - b[ok] + shift[ok]) % L
    return np.bincount(k, minlength=L).astype(np.int64)
