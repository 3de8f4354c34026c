"""Normalized ratio families ``(a n + b) / (A n + B)`` and their residue classes."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

from .arith import (
    ArithmeticError_,
    PrimeExponentMap,
    crt_solve,
    euler_phi,
    factorize,
    valuation,
)

__all__ = [
    "CaptureClass",
    "CaptureError",
    "CoprimeClass",
    "FamilyError",
    "RatioFamily",
    "capture_class",
    "coprime_class",
    "normalize_family",
    "ratio_congruent",
    "reduce_pair",
]


class FamilyError(ArithmeticError_):
    """Invalid family parameters."""


class CaptureError(ArithmeticError_):
    """No residue class realizes the requested prime-power capture."""


@dataclass(frozen=True)
class RatioFamily:
    a: int
    b: int
    A: int
    B: int
    k: int
    Delta: int
    alpha: int
    beta: int
    a1: int
    b1: int
    A1: int
    B1: int
    rho: PrimeExponentMap
    rho0: PrimeExponentMap
    Delta1: int
    delta: int
    torsion_exponent: int
    case_tag: str

    @property
    def params(self) -> tuple[int, int, int, int]:
        return self.a, self.b, self.A, self.B

    @property
    def delta_primes(self) -> tuple[int, ...]:
        return tuple(factorize(self.delta))

    @property
    def free_primes(self) -> tuple[int, ...]:
        """Primes dividing ``gcd(a1, A1)``: they never divide a reduced form."""
        return tuple(factorize(math.gcd(self.a1, self.A1)))

    @property
    def torsion_primes(self) -> tuple[int, ...]:
        free = set(self.free_primes)
        return tuple(p for p in self.delta_primes if p not in free)

    def forms(self, n: int) -> tuple[int, int]:
        """The reduced linear forms ``(a1 n + b1, A1 n + B1)``."""
        return self.a1 * n + self.b1, self.A1 * n + self.B1

    def ratio(self, n: int) -> Fraction:
        return Fraction(self.a * n + self.b, self.A * n + self.B)

    def ratio_factored(self, n: int) -> PrimeExponentMap:
        return PrimeExponentMap.of(self.ratio(n))

    def describe(self) -> dict:
        return {
            "a": self.a, "b": self.b, "A": self.A, "B": self.B, "k": self.k,
            "Delta": self.Delta, "alpha": self.alpha, "beta": self.beta,
            "Delta1": self.Delta1, "delta": self.delta,
            "rho": {str(p): e for p, e in self.rho.items()},
            "rho0": {str(p): e for p, e in self.rho0.items()},
            "torsion_exponent": self.torsion_exponent, "case": self.case_tag,
        }


def normalize_family(a: int, b: int, A: int, B: int, k: int = 1) -> RatioFamily:
    if a <= 0 or A <= 0:
        raise FamilyError(f"need a > 0 and A > 0, got a={a}, A={A}")
    Delta = a * B - A * b
    if Delta == 0:
        raise FamilyError(f"degenerate family: aB - Ab = {a}*{B} - {A}*{b} = 0")
    if k < 1:
        raise FamilyError(f"k must be positive, got {k}")
    # smallest n with both forms positive
    k = max(k, -b // a + 1, -B // A + 1)
    alpha, beta = math.gcd(a, b), math.gcd(A, B)
    a1, b1, A1, B1 = a // alpha, b // alpha, A // beta, B // beta
    Delta1 = a1 * B1 - A1 * b1
    rho = PrimeExponentMap.of(Fraction(alpha, beta))
    free = set(factorize(math.gcd(a1, A1)))
    rho0 = PrimeExponentMap({p: e for p, e in rho.items() if p in free})
    delta = 2 * (a * A * abs(Delta)) ** 3
    # the prime 2 always divides delta, so it takes part in the case split
    M = math.lcm(2, a * A * abs(Delta))
    case = "first_case" if _has_coprime_class(a1, b1, A1, B1, M) else "second_case"
    return RatioFamily(
        a=a, b=b, A=A, B=B, k=k, Delta=Delta, alpha=alpha, beta=beta,
        a1=a1, b1=b1, A1=A1, B1=B1, rho=rho, rho0=rho0, Delta1=Delta1,
        delta=delta, torsion_exponent=2 * euler_phi(delta), case_tag=case,
    )


def _has_coprime_class(a1, b1, A1, B1, M) -> bool:
    # existence is local: one good residue per prime of M suffices (CRT)
    for p in factorize(M):
        if not any((a1 * s + b1) * (A1 * s + B1) % p for s in range(p)):
            return False
    return True


@dataclass(frozen=True)
class CoprimeClass:
    case: str
    modulus: int
    residues: tuple[int, ...]  # (s,) in the first case, (n1, n2) in the second


def coprime_class(f: RatioFamily) -> CoprimeClass:
    """Residue classes where both forms avoid the small primes, found by a bounded scan starting at ``k``.

    First case: ``s`` with ``(a1 s + b1)(A1 s + B1)`` coprime to ``2aA|Delta|``.
    Second case: ``n1`` with ``2 || a1 n1 + b1`` and ``n2`` with
    ``2 || A1 n2 + B1``, every other factor odd and coprime to ``aA|Delta|``.
    """
    M = math.lcm(2, f.a * f.A * abs(f.Delta))
    if f.case_tag == "first_case":
        for s in range(f.k, f.k + M):
            u, v = f.forms(s)
            if math.gcd(u * v, M) == 1:
                return CoprimeClass("first_case", M, (s % M,))
        raise FamilyError("family admits no coprime residue class (first case scan empty)")
    odd = M
    while odd % 2 == 0:
        odd //= 2
    mod = 4 * odd
    n1 = n2 = None
    for n in range(f.k, f.k + mod):
        u, v = f.forms(n)
        if n1 is None and u % 4 == 2 and math.gcd(u // 2 * v, M) == 1:
            n1 = n
        if n2 is None and v % 4 == 2 and math.gcd(u * (v // 2), M) == 1:
            n2 = n
        if n1 is not None and n2 is not None:
            return CoprimeClass("second_case", mod, (n1 % mod, n2 % mod))
    raise FamilyError("family admits no coprime residue class")


@dataclass(frozen=True)
class CaptureClass:
    """A progression ``n = n0 (mod modulus)`` fixing all delta-prime content.

    ``valuations`` holds the net exponent of each delta prime in the reduced
    ratio ``(a1 n + b1)/(A1 n + B1)``; ``cofactors`` are the delta-coprime parts
    of the two forms modulo ``delta``. Together they give the relation
    ``g(rho) * prod g(q)**valuations[q] * chi(c1) * conj(chi(c2)) = 1``.
    """

    prime: int
    exponent: int
    side: str
    n0: int
    modulus: int
    valuations: dict[int, int] = field(hash=False)
    cofactors: tuple[int, int]

    def members(self, count: int = 10) -> list[int]:
        return [self.n0 + j * self.modulus for j in range(count)]


def _local_class(p, E_min, u, v, U, V, want=None):
    """Search residues mod ``p**E`` fixing both ``p``-valuations.

    ``want=(e, avoid)`` asks for ``v_p(u n + v) == e`` with the other valuation
    preferably different from ``avoid``. Returns ``(residue, E, v1, v2)``.
    """
    E = E_min
    while E <= E_min + 40:
        pe = p**E
        best = None
        for n in range(pe):
            s1, s2 = (u * n + v) % pe, (U * n + V) % pe
            if s1 == 0 or s2 == 0:
                continue
            v1, v2 = valuation(s1, p), valuation(s2, p)
            if want is not None:
                if v1 != want[0]:
                    continue
                key = (v2 == want[1], v2)
            else:
                key = (v1 + v2,)
            if best is None or key < best[0]:
                best = (key, n, v1, v2)
            if want is None and v1 + v2 == 0:
                break
        if best is not None:
            return best[1], E, best[2], best[3]
        E += 1
    raise CaptureError(f"no class fixing the {p}-valuations")


def capture_class(f: RatioFamily, p: int, e: int, side: str = "numerator") -> CaptureClass:
    """Progression on which ``p**e`` exactly divides one reduced form.

    Every other prime of ``delta`` has fixed (minimal) valuation on the class,
    and both cofactors are fixed modulo ``delta``.
    """
    if side not in ("numerator", "denominator"):
        raise ValueError(f"side must be numerator or denominator, got {side!r}")
    if f.delta % p:
        raise CaptureError(f"{p} does not divide delta = {f.delta}")
    if e < 1:
        raise CaptureError("exponent must be positive")
    (u, v), (U, V) = ((f.a1, f.b1), (f.A1, f.B1))
    if side == "denominator":
        (u, v), (U, V) = (U, V), (u, v)
    if u % p == 0:
        raise CaptureError(f"not capturable: {p} divides the leading coefficient {u}, "
                           f"so {p} never divides {u}n{v:+d}")
    local = {}
    for q in factorize(f.delta):
        if q == p:
            r, E, v1, v2 = _local_class(q, e + 1, u, v, U, V, want=(e, e))
            if v1 == v2:
                raise CaptureError(f"not capturable: net {p}-exponent is 0 for e={e}")
        else:
            r, E, v1, v2 = _local_class(q, 1, u, v, U, V)
        if side == "denominator":
            v1, v2 = v2, v1
        local[q] = (r, E, v1, v2)
    M = math.prod(
        q ** max(E, valuation(f.delta, q) + v1 + v2) for q, (r, E, v1, v2) in local.items()
    )
    n0, _ = crt_solve((r % q**E, q**E) for q, (r, E, _, _) in local.items())
    n0 %= M
    while n0 < f.k:
        n0 += M
    num, den = f.forms(n0)
    vals = {}
    for q, (_, _, v1, v2) in local.items():
        num //= q**v1
        den //= q**v2
        if v1 != v2:
            vals[q] = v1 - v2
    return CaptureClass(p, e, side, n0, M, vals, (num % f.delta, den % f.delta))


def ratio_congruent(u1: int, v1: int, u2: int, v2: int, n: int, n_prime: int, s: int) -> bool:
    """Whether the ratios at ``n`` and ``n'`` agree modulo ``s``.

    Decided twice, by cross-multiplication and by the ``Delta0 (n - n')`` test.
    """
    if s < 1:
        raise ValueError("s must be positive")
    if math.gcd(s, (u2 * n + v2) * (u2 * n_prime + v2)) != 1:
        raise ValueError("precondition violated: s shares a factor with a denominator")
    direct = ((u1 * n + v1) * (u2 * n_prime + v2) - (u1 * n_prime + v1) * (u2 * n + v2)) % s == 0
    delta0 = u1 * v2 - u2 * v1
    via_delta = delta0 * (n - n_prime) % s == 0
    assert direct == via_delta
    return direct


def reduce_pair(a: int, b: int, A: int, B: int) -> RatioFamily:
    """The single-function family ``(Ab(aB+1) n + 1) / (Ab n + 1)``."""
    if b <= 0 or B <= 0:
        raise FamilyError("reduce_pair needs b > 0 and B > 0")
    if a * B - A * b == 0:
        raise FamilyError("degenerate family: aB - Ab = 0")
    return normalize_family(A * b * (a * B + 1), 1, A * b, 1, 1)
