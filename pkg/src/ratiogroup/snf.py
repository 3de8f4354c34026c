"""Smith normal form with unimodular transforms over arbitrary-precision integers.

Sparse elimination: the matrix is held as column dictionaries, pivots are
chosen by minimal absolute value and then minimal Markowitz cost
``(row_count - 1) * (col_count - 1)``, which keeps fill-in (and therefore
coefficient growth) low on the sparse exponent matrices this package builds.
Row operations are accumulated into ``U``, column operations into ``V``, so
``U @ A @ V == D`` exactly.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = ["SNFResult", "snf", "matmul_exact", "is_unimodular"]


@dataclass
class SNFResult:
    """``U @ A @ V = D`` with ``D`` diagonal and ``invariants`` its nonzero entries.

    ``U`` and ``V`` are square ``numpy`` object arrays of Python ints. When
    requested, their exact inverses are carried along: an integer inverse is
    the unimodularity certificate for transforms too large for a determinant.
    """

    invariants: list[int]
    U: np.ndarray
    V: np.ndarray
    rank: int
    shape: tuple[int, int]
    U_inv: np.ndarray | None = None
    V_inv: np.ndarray | None = None

    @property
    def diagonal(self) -> list[int]:
        return self.invariants + [0] * (min(self.shape) - self.rank)

    def D(self) -> np.ndarray:
        m, n = self.shape
        out = np.zeros((m, n), dtype=object)
        for i, d in enumerate(self.invariants):
            out[i, i] = d
        return out

    def check(self, A) -> bool:
        """Exact verification of ``U A V = D`` (and of the inverses, if carried)."""
        A = _as_object(A)
        if not np.array_equal(matmul_exact(matmul_exact(self.U, A), self.V), self.D()):
            return False
        for X, Xi in ((self.U, self.U_inv), (self.V, self.V_inv)):
            if Xi is not None and not np.array_equal(
                matmul_exact(X, Xi), np.eye(X.shape[0], dtype=np.int64).astype(object)
            ):
                return False
        return True


def _as_object(A) -> np.ndarray:
    arr = np.array(A, dtype=object)
    if arr.ndim != 2:
        arr = arr.reshape(len(A), -1) if len(A) else np.zeros((0, 0), dtype=object)
    return arr


def matmul_exact(X: np.ndarray, Y: np.ndarray) -> np.ndarray:
    """Exact integer product; int64 when it provably cannot overflow."""
    X, Y = np.asarray(X), np.asarray(Y)
    if X.size == 0 or Y.size == 0:
        return np.zeros((X.shape[0], Y.shape[1]), dtype=object)
    mx = max(abs(int(v)) for v in X.flat) if X.size else 0
    my = max(abs(int(v)) for v in Y.flat) if Y.size else 0
    bound = mx * my * max(X.shape[1], 1)
    if bound < 2**53:
        # every partial sum is an integer below 2**53, so BLAS float64 is exact
        prod = X.astype(np.float64) @ Y.astype(np.float64)
        return prod.astype(np.int64).astype(object)
    if bound < 2**62:
        return (X.astype(np.int64) @ Y.astype(np.int64)).astype(object)
    # sparse fallback keeps big-integer work proportional to the nonzeros
    out = np.zeros((X.shape[0], Y.shape[1]), dtype=object)
    ycols = [(j, [(i, int(v)) for i, v in enumerate(Y[:, j]) if v]) for j in range(Y.shape[1])]
    for r in range(X.shape[0]):
        row = X[r]
        for j, col in ycols:
            s = 0
            for i, v in col:
                x = row[i]
                if x:
                    s += int(x) * v
            out[r, j] = s
    return out


def is_unimodular(M: np.ndarray) -> bool:
    """``|det M| == 1`` via fraction-free (Bareiss) elimination."""
    M = [[int(x) for x in row] for row in np.asarray(M)]
    n = len(M)
    if n == 0:
        return True
    sign, prev = 1, 1
    for k in range(n - 1):
        if M[k][k] == 0:
            swap = next((i for i in range(k + 1, n) if M[i][k] != 0), None)
            if swap is None:
                return False
            M[k], M[swap] = M[swap], M[k]
            sign = -sign
        pk = M[k][k]
        rowk = M[k]
        for i in range(k + 1, n):
            mik = M[i][k]
            rowi = M[i]
            for j in range(k + 1, n):
                rowi[j] = (rowi[j] * pk - mik * rowk[j]) // prev
        prev = pk
    return abs(M[n - 1][n - 1]) == 1


def snf(A, with_inverses: bool = False) -> SNFResult:
    A = _as_object(A)
    m, n = A.shape
    cols: list[dict[int, int]] = [dict() for _ in range(n)]
    rows: list[set[int]] = [set() for _ in range(m)]
    for (i, j), v in np.ndenumerate(A):
        v = int(v)
        if v:
            cols[j][i] = v
            rows[i].add(j)
    U = [{i: 1} for i in range(m)]  # row i of U, sparse
    V = [{j: 1} for j in range(n)]  # column j of V, sparse
    Ui = [{i: 1} for i in range(m)] if with_inverses else None  # columns of U^-1
    Vi = [{j: 1} for j in range(n)] if with_inverses else None  # rows of V^-1
    live_rows, live_cols = set(range(m)), set(range(n))
    pivots: list[tuple[int, int, int]] = []

    def col_axpy(dst: int, src: int, q: int) -> None:
        # column dst -= q * column src (in A and V)
        cd, cs = cols[dst], cols[src]
        for i, v in cs.items():
            w = cd.get(i, 0) - q * v
            if w:
                if i not in cd:
                    rows[i].add(dst)
                cd[i] = w
            elif i in cd:
                del cd[i]
                rows[i].discard(dst)
        _axpy(V[dst], V[src], -q)
        if Vi is not None:
            _axpy(Vi[src], Vi[dst], q)

    def row_axpy(dst: int, src: int, q: int) -> None:
        # row dst -= q * row src (in A and U)
        for j in list(rows[src]):
            c = cols[j]
            w = c.get(dst, 0) - q * c[src]
            if w:
                if dst not in c:
                    rows[dst].add(j)
                c[dst] = w
            else:
                if dst in c:
                    del c[dst]
                    rows[dst].discard(j)
        _axpy(U[dst], U[src], -q)
        if Ui is not None:
            _axpy(Ui[src], Ui[dst], q)

    def choose_pivot():
        best, best_key = None, None
        for j in live_cols:
            cj = cols[j]
            if not cj:
                continue
            lc = len(cj) - 1
            for i, v in cj.items():
                key = (abs(v), lc * (len(rows[i]) - 1))
                if best_key is None or key < best_key:
                    best_key, best = key, (i, j)
                    if key == (1, 0):
                        return best
        return best

    while True:
        piv = choose_pivot()
        if piv is None:
            break
        r, c = piv
        while True:
            p = cols[c][r]
            for j in [j for j in rows[r] if j != c]:
                q = cols[j][r] // p
                if q:
                    col_axpy(j, c, q)
            for i in [i for i in cols[c] if i != r]:
                q = cols[c][i] // p
                if q:
                    row_axpy(i, r, q)
            rest_r = [(abs(cols[j][r]), 0, j) for j in rows[r] if j != c]
            rest_c = [(abs(v), 1, i) for i, v in cols[c].items() if i != r]
            if not rest_r and not rest_c:
                break
            _, kind, idx = min(rest_r + rest_c)
            if kind == 0:
                c = idx
            else:
                r = idx
        pivots.append((r, c, cols[c][r]))
        live_rows.discard(r)
        live_cols.discard(c)
        rows[r].discard(c)
        del cols[c][r]

    # assemble: pivot rows/cols first, in pivot order
    row_order = [r for r, _, _ in pivots] + sorted(live_rows)
    col_order = [c for _, c, _ in pivots] + sorted(live_cols)
    diag = [d for _, _, d in pivots]
    Ud = np.zeros((m, m), dtype=object)
    for new, old in enumerate(row_order):
        for j, v in U[old].items():
            Ud[new, j] = v
    Vd = np.zeros((n, n), dtype=object)
    for new, old in enumerate(col_order):
        for i, v in V[old].items():
            Vd[i, new] = v
    Uid = Vid = None
    if with_inverses:
        Uid = np.zeros((m, m), dtype=object)
        for new, old in enumerate(row_order):
            for i, v in Ui[old].items():
                Uid[i, new] = v
        Vid = np.zeros((n, n), dtype=object)
        for new, old in enumerate(col_order):
            for j, v in Vi[old].items():
                Vid[new, j] = v
    # signs and the divisibility chain d1 | d2 | ...
    for k, d in enumerate(diag):
        if d < 0:
            diag[k] = -d
            Vd[:, k] = -Vd[:, k]
            if Vid is not None:
                Vid[k] = -Vid[k]
    _fix_chain(diag, Ud, Vd, Uid, Vid)
    return SNFResult(diag, Ud, Vd, len(diag), (m, n), Uid, Vid)


def _axpy(dst: dict, src: dict, q: int) -> None:
    """``dst += q * src`` on sparse vectors."""
    for i, v in src.items():
        w = dst.get(i, 0) + q * v
        if w:
            dst[i] = w
        else:
            dst.pop(i, None)


def _fix_chain(diag, U, V, U_inv=None, V_inv=None) -> None:
    """Make ``diag`` a divisibility chain with 2x2 unimodular moves.

    For ``a, b`` with ``g = gcd(a, b) = s a + t b`` and ``l = ab/g``:
    ``[[s, t], [-b/g, a/g]] diag(a, b) [[1, -t b/g], [1, s a/g]] = diag(g, l)``.
    """
    k = len(diag)
    changed = True
    while changed:
        changed = False
        for i in range(k):
            for j in range(i + 1, k):
                a, b = diag[i], diag[j]
                if b % a == 0:
                    continue
                g, s, t = _xgcd(a, b)
                ag, bg = a // g, b // g
                ui, uj = U[i].copy(), U[j].copy()
                U[i] = s * ui + t * uj
                U[j] = -bg * ui + ag * uj
                vi, vj = V[:, i].copy(), V[:, j].copy()
                V[:, i] = vi + vj
                V[:, j] = -t * bg * vi + s * ag * vj
                if U_inv is not None:
                    ci, cj = U_inv[:, i].copy(), U_inv[:, j].copy()
                    U_inv[:, i] = ag * ci + bg * cj
                    U_inv[:, j] = -t * ci + s * cj
                if V_inv is not None:
                    ri, rj = V_inv[i].copy(), V_inv[j].copy()
                    V_inv[i] = s * ag * ri + t * bg * rj
                    V_inv[j] = rj - ri
                diag[i], diag[j] = g, a * bg
                changed = True


def _xgcd(a: int, b: int) -> tuple[int, int, int]:
    x0, y0, x1, y1 = 1, 0, 0, 1
    while b:
        q, a, b = a // b, b, a % b
        x0, x1 = x1, x0 - q * x1
        y0, y1 = y1, y0 - q * y1
    return a, x0, y0
