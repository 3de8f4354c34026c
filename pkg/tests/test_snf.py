import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from ratiogroup.snf import is_unimodular, matmul_exact, snf


def _chain(inv):
    return all(b % a == 0 for a, b in zip(inv, inv[1:]))


def test_small_examples():
    r = snf([[2, 4, 4], [-6, 6, 12], [10, -4, -16]])
    assert r.invariants == [2, 6, 12] and r.check([[2, 4, 4], [-6, 6, 12], [10, -4, -16]])
    r = snf([[2, 0], [0, 3]])
    assert r.invariants == [1, 6]
    r = snf([[0, 0], [0, 0]])
    assert r.invariants == [] and r.rank == 0
    r = snf(np.zeros((0, 3), dtype=np.int64))
    assert r.rank == 0


def test_unimodular_helper():
    assert is_unimodular(np.array([[1, 1], [0, 1]], dtype=object))
    assert not is_unimodular(np.array([[2, 0], [0, 1]], dtype=object))


@settings(max_examples=60, deadline=None)
@given(st.integers(1, 40), st.integers(1, 100), st.integers(0, 2**32 - 1))
def test_random_dense(m, n, seed):
    rng = np.random.default_rng(seed)
    A = rng.integers(-9, 10, size=(m, n))
    r = snf(A, with_inverses=True)
    assert r.check(A)
    assert _chain(r.invariants) and all(d > 0 for d in r.invariants)
    assert r.rank == np.linalg.matrix_rank(A.astype(float))


def test_random_sparse_200_by_2000():
    rng = np.random.default_rng(7)
    A = np.zeros((200, 2000), dtype=np.int64)
    for j in range(2000):
        rows = rng.choice(200, size=rng.integers(1, 5), replace=False)
        A[rows, j] = rng.integers(-3, 4, size=len(rows))
    r = snf(A, with_inverses=True)
    assert r.check(A)
    assert _chain(r.invariants)


def test_big_entries_exact():
    A = np.array([[2**70, 3**50], [5**40, 7**30]], dtype=object)
    r = snf(A, with_inverses=True)
    assert r.check(A)
    det = A[0, 0] * A[1, 1] - A[0, 1] * A[1, 0]
    assert r.invariants[0] * r.invariants[1] == abs(det)


def test_matmul_exact_no_overflow():
    X = np.array([[2**62, 2**62]], dtype=object)
    Y = np.array([[4], [4]], dtype=object)
    assert matmul_exact(X, Y)[0, 0] == 2**65
