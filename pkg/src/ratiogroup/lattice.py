"""Brute-force lattice oracle for G at finite N.

The ratios ``(an+b)/(An+B)`` for ``k <= n <= N`` become integer exponent
vectors over a finite prime support; the cokernel of that exponent matrix is
a finite-N shadow of G. Smith normal form gives its invariants, decides
membership (with the order of a class when it is torsion) and yields explicit
product certificates, which are verified by exact rational multiplication.

Support policies:

``full``
    every prime appearing in some column. Primes that occur in a single
    column are free at finite N and show up in the free rank.
``smooth:B``
    columns whose ratio is ``B``-smooth, over the primes ``<= B`` plus the
    primes of ``gcd(a1, A1)`` (which never occur but belong to G). At
    stabilized N this recovers the structure of G restricted to those primes.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .arith import ArithmeticError_, PrimeExponentMap, primes_up_to
from .family import RatioFamily
from .kernels import strip_primes
from .snf import SNFResult, matmul_exact, snf

__all__ = [
    "ExponentMatrix",
    "MembershipResult",
    "OracleResult",
    "RepresentationError",
    "certificate_json",
    "exponent_matrix",
    "membership",
    "parse_policy",
    "quotient_invariants",
    "represent",
]

DEFAULT_POLICY = "smooth:100"


class RepresentationError(ArithmeticError_):
    """Target is not in the relation lattice; carries the obstruction."""

    def __init__(self, message, obstruction=None, order=None):
        super().__init__(message)
        self.obstruction = obstruction
        self.order = order


def parse_policy(policy: str) -> tuple[str, int | None]:
    if policy == "full":
        return "full", None
    if policy.startswith("smooth:"):
        try:
            B = int(policy.split(":", 1)[1])
        except ValueError:
            B = 0
        if B >= 2:
            return "smooth", B
    raise ValueError(f"unknown support policy {policy!r} (use 'full' or 'smooth:B')")


@dataclass
class ExponentMatrix:
    """Rows are primes (``support``), columns the indices ``ns``."""

    support: list[int]
    ns: list[int]
    columns: list[dict[int, int]]  # prime -> exponent, one per n

    @property
    def shape(self) -> tuple[int, int]:
        return len(self.support), len(self.ns)

    def dense(self) -> np.ndarray:
        row = {p: i for i, p in enumerate(self.support)}
        M = np.zeros(self.shape, dtype=object)
        for j, col in enumerate(self.columns):
            for p, e in col.items():
                M[row[p], j] = e
        return M

    def column_value(self, j: int) -> Fraction:
        return PrimeExponentMap(self.columns[j]).value()

    def to_text(self) -> str:
        """Plain-text integer grid, one line ``p: e_k ... e_N`` per prime."""
        M = self.dense()
        lines = [f"# columns n = {' '.join(map(str, self.ns))}"]
        for i, p in enumerate(self.support):
            lines.append(f"{p}: " + " ".join(str(int(x)) for x in M[i]))
        return "\n".join(lines) + "\n"


def _factor_forms(u: int, v: int, ns_start: int, count: int, primes):
    exps, cof = strip_primes(u, v, ns_start, count, primes)
    return exps, cof


def exponent_matrix(
    f: RatioFamily,
    N: int,
    policy: str = "full",
    restrict: tuple[int, int] | None = None,
    extra_rows=(),
) -> ExponentMatrix:
    """Exponent vectors of the ratios for ``k <= n <= N``.

    ``restrict = (n0, M)`` keeps only ``n = n0 (mod M)``. The support is the
    set of primes appearing (all primes up to ``B`` for ``smooth:B``) plus
    ``extra_rows``; the oracle passes the primes of ``gcd(a1, A1)``, which
    never appear but are free directions of the quotient.
    """
    kind, B = parse_policy(policy)
    if N < f.k:
        return ExponentMatrix(sorted(set(extra_rows)), [], [])
    count = N - f.k + 1
    top = max(f.a * N + f.b, f.A * N + f.B)
    if kind == "full":
        primes = list(primes_up_to(math.isqrt(top) + 1))
    else:
        primes = list(primes_up_to(B))
    e1, c1 = _factor_forms(f.a, f.b, f.k, count, primes)
    e2, c2 = _factor_forms(f.A, f.B, f.k, count, primes)
    cols, ns = [], []
    for i in range(count):
        r1, r2 = int(c1[i]), int(c2[i])
        if kind == "smooth" and (r1 != 1 or r2 != 1):
            continue
        if restrict is not None and (f.k + i - restrict[0]) % restrict[1]:
            continue
        col: dict[int, int] = {}
        for k in np.nonzero(e1[i])[0]:
            col[primes[k]] = col.get(primes[k], 0) + int(e1[i, k])
        for k in np.nonzero(e2[i])[0]:
            col[primes[k]] = col.get(primes[k], 0) - int(e2[i, k])
        # leftover cofactors are prime (all factors below sqrt(top) removed)
        if r1 > 1:
            col[r1] = col.get(r1, 0) + 1
        if r2 > 1:
            col[r2] = col.get(r2, 0) - 1
        cols.append({p: e for p, e in col.items() if e})
        ns.append(f.k + i)
    support = set(p for c in cols for p in c)
    if kind == "smooth":
        support |= set(primes)
    support |= set(extra_rows)
    return ExponentMatrix(sorted(support), ns, cols)


@dataclass
class OracleResult:
    N: int
    policy: str
    support: list[int]
    torsion: list[int]
    free_rank: int
    free_generators: list[dict[int, int]]
    stabilized: bool
    rank: int
    matrix: ExponentMatrix = field(repr=False, default=None)
    snf: SNFResult = field(repr=False, default=None)

    def to_json(self) -> dict:
        return {
            "N": self.N,
            "policy": self.policy,
            "support_size": len(self.support),
            "columns": len(self.matrix.ns) if self.matrix else 0,
            "torsion": self.torsion,
            "free_rank": self.free_rank,
            "free_generators": [{str(p): e for p, e in g.items()} for g in self.free_generators],
            "stabilized": self.stabilized,
        }


def _quotient(M: ExponentMatrix) -> tuple[SNFResult, list[int], int]:
    A = M.dense()
    if A.size == 0:
        res = snf(np.zeros((len(M.support), 0), dtype=object))
    else:
        res = snf(A)
    torsion = [d for d in res.invariants if d > 1]
    return res, torsion, len(M.support) - res.rank


def _free_generators(M: ExponentMatrix, res: SNFResult, priority) -> list[dict[int, int]]:
    """Primes whose classes are independent modulo the relation lattice.

    Greedy over ``priority`` first, then the rest of the support; a prime is
    kept when its image in the free quotient raises the rank.
    """
    m = len(M.support)
    r = res.rank
    if m - r == 0:
        return []
    order = [p for p in priority if p in M.support] + [p for p in M.support if p not in priority]
    idx = {p: i for i, p in enumerate(M.support)}
    chosen, rows = [], []
    for p in order:
        img = [int(res.U[i, idx[p]]) for i in range(r, m)]
        trial = rows + [img]
        if np.linalg.matrix_rank(np.array(trial, dtype=float)) == len(trial):
            rows, chosen = trial, chosen + [p]
            if len(chosen) == m - r:
                break
    return [{p: 1} for p in chosen]


def quotient_invariants(
    f: RatioFamily,
    N: int,
    policy: str = DEFAULT_POLICY,
    check_stability: bool = True,
    restrict: tuple[int, int] | None = None,
) -> OracleResult:
    M = exponent_matrix(f, N, policy, restrict, f.free_primes)
    res, torsion, free = _quotient(M)
    stable = False
    if check_stability and N // 2 >= f.k:
        M2 = exponent_matrix(f, N // 2, policy, restrict, f.free_primes)
        _, t2, fr2 = _quotient(M2)
        if parse_policy(policy)[0] == "smooth":
            # fixed support: the whole cokernel must be unchanged
            stable = t2 == torsion and fr2 == free
        else:
            # new large primes keep entering as free directions; only torsion can settle
            stable = t2 == torsion
    gens = _free_generators(M, res, list(f.free_primes))
    return OracleResult(N, policy, M.support, torsion, free, gens, stable, res.rank, M, res)


@dataclass
class MembershipResult:
    status: str  # in_lattice | torsion_class | not_decided_at_N
    order: int | None = None
    certificate: list[tuple[int, int]] = field(default_factory=list)
    reason: str = ""

    def to_json(self) -> dict:
        out = {"status": self.status, "reason": self.reason}
        if self.order is not None:
            out["order"] = self.order
        if self.status == "in_lattice" or self.certificate:
            out["certificate"] = certificate_json(self.certificate)
        return out


def certificate_json(cert: list[tuple[int, int]]) -> list[dict]:
    return [{"n": n, "epsilon": e} for n, e in cert]


def _target_vector(oracle: OracleResult, r) -> list[int] | None:
    rm = r if isinstance(r, PrimeExponentMap) else PrimeExponentMap.of(r)
    idx = {p: i for i, p in enumerate(oracle.support)}
    vec = [0] * len(oracle.support)
    for p, e in rm.items():
        if p not in idx:
            return None
        vec[idx[p]] = e
    return vec


def _reduce_certificate(x: list[int], kernel: list[list[int]], passes: int = 4) -> list[int]:
    """Greedy L1 reduction of ``x`` by kernel vectors (support size first)."""
    if not kernel:
        return x
    x = np.array(x, dtype=object)
    K = [np.array(k, dtype=object) for k in kernel]

    def cost(v):
        nz = sum(1 for t in v if t)
        return (nz, sum(abs(int(t)) for t in v))

    best = cost(x)
    for _ in range(passes):
        improved = False
        for k in K:
            for s in (1, -1):
                while True:
                    y = x + s * k
                    c = cost(y)
                    if c < best:
                        x, best, improved = y, c, True
                    else:
                        break
        if not improved:
            break
    return [int(t) for t in x]


def _verify(f: RatioFamily, cert: list[tuple[int, int]], target: Fraction) -> bool:
    prod = Fraction(1)
    for n, e in cert:
        prod *= f.ratio(n) ** e
    return prod == target


def membership(f: RatioFamily, r, N: int, policy: str = DEFAULT_POLICY, oracle: OracleResult | None = None) -> MembershipResult:
    r = Fraction(r)
    if r <= 0:
        raise ValueError("target must be a positive rational")
    if r == 1:
        return MembershipResult("in_lattice", 1, [], "trivial target")
    oracle = oracle or quotient_invariants(f, N, policy, check_stability=False)
    vec = _target_vector(oracle, r)
    if vec is None:
        return MembershipResult("not_decided_at_N", reason="target has primes outside the matrix support")
    res = oracle.snf
    m = len(vec)
    y = [sum(int(res.U[i, j]) * vec[j] for j in range(m) if vec[j]) for i in range(m)]
    if any(y[i] for i in range(res.rank, m)):
        return MembershipResult("not_decided_at_N", reason="class of the target has infinite order at this N")
    d = res.invariants
    v = math.lcm(1, *(d[i] // math.gcd(d[i], y[i]) for i in range(res.rank)))
    z = [v * y[i] // d[i] for i in range(res.rank)]
    ncols = len(oracle.matrix.ns)
    x = [sum(int(res.V[j, i]) * z[i] for i in range(res.rank)) for j in range(ncols)]
    kernel = [[int(res.V[j, i]) for j in range(ncols)] for i in range(res.rank, ncols)]
    x = _reduce_certificate(x, kernel)
    cert = [(n, e) for n, e in zip(oracle.matrix.ns, x) if e]
    if not _verify(f, cert, r**v):
        raise ArithmeticError_("internal error: certificate failed the exact product check")
    status = "in_lattice" if v == 1 else "torsion_class"
    return MembershipResult(status, v, cert, f"class of order {v}" if v > 1 else "")


def _describe_obstruction(f: RatioFamily, r: Fraction):
    """A dual character that is not 1 on ``r``, named by order and conductor."""
    from .dualdet import dual_group

    try:
        dual = dual_group(f)
    except ArithmeticError_:
        return None
    names = {2: "quadratic", 3: "cubic", 4: "quartic", 6: "sextic"}
    for g in dual.elements:
        a = g.evaluate(f, r)
        if a:
            order = math.lcm(g.chi.order, *(x.denominator for _, x in g.torsion_values)) if g.torsion_values else g.chi.order
            name = names.get(order, f"order-{order}")
            if a == Fraction(1, 2):
                val = "-1"
            elif a == Fraction(1, 4):
                val = "i"
            elif a == Fraction(3, 4):
                val = "-i"
            else:
                val = f"exp(2*pi*i*{a.numerator}/{a.denominator})"
            return {
                "character": g.to_json(),
                "text": f"{name} character mod {g.chi.conductor} value {val}",
            }
    return None


def represent(f: RatioFamily, r, N: int, policy: str = DEFAULT_POLICY) -> list[tuple[int, int]]:
    """Explicit ``[(n_j, eps_j)]`` with ``prod ratio(n_j)**eps_j == r`` exactly."""
    r = Fraction(r)
    res = membership(f, r, N, policy)
    if res.status == "in_lattice":
        return res.certificate
    obstruction = _describe_obstruction(f, r)
    text = obstruction["text"] if obstruction else res.reason
    raise RepresentationError(
        f"{r} is not a product of ratios at N={N}: {text}", obstruction, res.order
    )


def dumps(obj) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"))
