# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled hot loops; semantics identical to ``_kernels_py``."""

import numpy as np
cimport numpy as cnp

cnp.import_array()

BACKEND = "cython"


def strip_primes(long long u, long long v, long long n0, Py_ssize_t count, primes):
    cdef Py_ssize_t i, k, start, step
    cdef long long p, pj, top, root, x
    cdef cnp.ndarray[cnp.int64_t, ndim=1] cof = np.empty(count, dtype=np.int64)
    cdef cnp.ndarray[cnp.int32_t, ndim=2] exps = np.zeros((count, len(primes)), dtype=np.int32)
    top = 0
    for i in range(count):
        x = u * (n0 + i) + v
        cof[i] = x
        if x < 0:
            x = -x
        if x > top:
            top = x
    for k in range(len(primes)):
        p = primes[k]
        if u % p != 0:
            pj = p
            while pj <= top:
                root = <long long>((-(<object>v) * pow(<object>u, -1, <object>pj)) % (<object>pj))
                start = <Py_ssize_t>(((root - n0) % pj + pj) % pj)
                step = <Py_ssize_t>pj
                i = start
                while i < count:
                    if cof[i] != 0:
                        exps[i, k] += 1
                        cof[i] //= p
                    i += step
                if pj > top // p:
                    break
                pj *= p
        else:
            for i in range(count):
                x = cof[i]
                if x == 0:
                    continue
                while x % p == 0:
                    x //= p
                    exps[i, k] += 1
                cof[i] = x
    return exps, cof


def pair_histogram(cnp.int64_t[:] idx1, cnp.int64_t[:] idx2, cnp.int64_t[:] shift,
                   cnp.int64_t[:] table, long long L):
    cdef Py_ssize_t i, n = idx1.shape[0]
    cdef long long a, b, kk
    cdef cnp.ndarray[cnp.int64_t, ndim=1] hist = np.zeros(L, dtype=np.int64)
    for i in range(n):
        a = table[idx1[i]]
        b = table[idx2[i]]
        if a < 0 or b < 0:
            continue
        kk = (a - b + shift[i]) % L
        if kk < 0:
            kk += L
        hist[kk] += 1
    return hist
