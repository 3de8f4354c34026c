"""Correlation means ``x^-1 sum g(an+b) conj g(An+B)`` and their predictions.

``g`` is completely multiplicative: a Dirichlet character away from the
primes of its modulus, with explicit values (a root of unity, or 0) at those
primes. Three numbers are compared:

* the empirical mean (sieved linear-form factorizations, float, compensated
  and partition-ordered summation so results are bit-reproducible);
* the truncated Euler product ``prod_{p <= P} w_p`` of the independence
  heuristic, which is only asymptotically right when ``g(p)`` is close to 1
  on most primes (the diagnostic ``S(x)`` measures this);
* the exact limit, from the local-sum factorization over a modulus ``D``
  containing the primes of the character modulus and of ``delta``.
"""

from __future__ import annotations

import cmath
import dataclasses
import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .arith import factorize, primes_up_to, valuation
from .cyclotomic import CyclotomicNumber
from .dirichlet import DirichletCharacter, log_table
from .family import RatioFamily
from .kernels import strip_primes

__all__ = [
    "EulerFactor",
    "MultFunctionSpec",
    "corr_report",
    "empirical_corr",
    "euler_factor",
    "euler_product",
    "limit_mean",
    "s_diagnostic",
]

CHUNK = 1 << 16


@dataclass(frozen=True)
class MultFunctionSpec:
    """``g(p) = chi(p)`` for ``p`` prime to the modulus, else ``overrides[p]``.

    Override values are angles (``Fraction`` in ``[0, 1)``) or ``None`` for the
    value 0. A prime of the modulus without an override gets 0, like ``chi``.
    """

    chi: DirichletCharacter
    overrides: tuple[tuple[int, Fraction | None], ...] = ()
    completely_multiplicative: bool = True

    def __post_init__(self):
        clean = []
        for p, a in sorted(dict(self.overrides).items()):
            if self.chi.modulus % p:
                raise ValueError(f"override at {p}, which does not divide the modulus {self.chi.modulus}")
            clean.append((int(p), None if a is None else Fraction(a) % 1))
        object.__setattr__(self, "overrides", tuple(clean))

    @classmethod
    def make(cls, chi: DirichletCharacter, overrides: dict | None = None) -> MultFunctionSpec:
        return cls(chi, tuple((overrides or {}).items()))

    @classmethod
    def from_gcharacter(cls, f: RatioFamily, g) -> MultFunctionSpec:
        vals = dict(g.torsion_values)
        vals.update(g.free_prime_values(f))
        return cls(g.chi, tuple(vals.items()))

    @property
    def override_map(self) -> dict[int, Fraction | None]:
        return dict(self.overrides)

    @property
    def modulus_primes(self) -> tuple[int, ...]:
        return tuple(factorize(self.chi.modulus))

    def prime_angle(self, p: int) -> Fraction | None:
        if self.chi.modulus % p == 0:
            return self.override_map.get(p)
        return self.chi.angle(p)

    def value(self, p: int) -> complex:
        a = self.prime_angle(p)
        return 0j if a is None else cmath.exp(2j * math.pi * float(a))


def _primitive_table(chi: DirichletCharacter):
    prim = chi.primitive()
    table, L = log_table(prim)
    return prim.modulus, table, L


def _form_angles(g: MultFunctionSpec, u: int, v: int, n0: int, count: int, prim):
    """Angles (in turns, float) of ``g(u n + v)``, and a mask of zero values."""
    c, table, L = prim
    primes = g.modulus_primes
    exps, cof = strip_primes(u, v, n0, count, primes)
    ang = table[np.mod(cof, c)].astype(np.float64) / L
    zero = cof == 0
    om = g.override_map
    for k, p in enumerate(primes):
        a = om.get(p)
        hit = exps[:, k] > 0
        if a is None:
            zero |= hit
        elif a:
            ang += exps[:, k] * float(a)
    return ang, zero


def empirical_corr(g: MultFunctionSpec, f: RatioFamily, x: int, threads: int = 1) -> complex:
    """Mean of ``g(an+b) conj g(An+B)`` over ``k <= n <= x``.

    Normalized by the number of terms ``x - k + 1`` (so ``g = 1`` gives exactly
    1 for every ``k``). Chunks of fixed size are summed in order.
    """
    if x < f.k:
        raise ValueError(f"x = {x} is below k = {f.k}")
    prim = _primitive_table(g.chi)
    starts = list(range(f.k, x + 1, CHUNK))

    def chunk(s):
        cnt = min(CHUNK, x + 1 - s)
        a1, z1 = _form_angles(g, f.a, f.b, s, cnt, prim)
        a2, z2 = _form_angles(g, f.A, f.B, s, cnt, prim)
        t = 2 * math.pi * (a1 - a2)
        live = ~(z1 | z2)
        return float(np.cos(t[live]).sum()), float(np.sin(t[live]).sum())

    if threads > 1 and len(starts) > 1:
        from concurrent.futures import ThreadPoolExecutor

        with ThreadPoolExecutor(max_workers=threads) as pool:
            parts = list(pool.map(chunk, starts))
    else:
        parts = [chunk(s) for s in starts]
    n = x - f.k + 1
    return complex(math.fsum(p[0] for p in parts) / n, math.fsum(p[1] for p in parts) / n)


@dataclass
class EulerFactor:
    prime: int
    value: complex
    case: str
    exact: CyclotomicNumber | None = field(default=None, repr=False)


def _z(g: MultFunctionSpec, q: int):
    a = g.prime_angle(q)
    return a, (0j if a is None else cmath.exp(2j * math.pi * float(a)))


def euler_factor(g: MultFunctionSpec, f: RatioFamily, q: int, exact: bool = True) -> EulerFactor:
    """Local factor ``w_q`` for the reduced forms ``a1 n + b1``, ``A1 n + B1``."""
    angle, z = _z(g, q)
    in_a, in_A = f.a1 % q == 0, f.A1 % q == 0
    if in_a and in_A:
        one = CyclotomicNumber.rational(1) if exact else None
        return EulerFactor(q, 1 + 0j, "divides_both", one)
    if angle is None:
        return EulerFactor(q, _series(z, q, valuation(f.Delta1, q), in_a, in_A), "general_lemmaC")
    Z = CyclotomicNumber.from_angle(angle) if exact else None
    if in_A:
        val = (q - 1) / (q - z)
        ex = (CyclotomicNumber.rational(q - 1) * (CyclotomicNumber.rational(q) - Z).inverse()) if exact else None
        return EulerFactor(q, val, "divides_A_only", ex)
    if in_a:
        val = (q - 1) / (q - z.conjugate())
        ex = (CyclotomicNumber.rational(q - 1) * (CyclotomicNumber.rational(q) - Z.conj()).inverse()) if exact else None
        return EulerFactor(q, val, "divides_a_only", ex)
    d = valuation(f.Delta1, q)
    w = (z - 1) / (q - z)
    val = 1 + q ** (-d) * 2 * w.real
    ex = None
    if exact:
        W = (Z - CyclotomicNumber.rational(1)) * (CyclotomicNumber.rational(q) - Z).inverse()
        ex = CyclotomicNumber.rational(1) + (W + W.conj()) * Fraction(1, q**d)
    return EulerFactor(q, complex(val), "coprime_aA", ex)


def _series(z: complex, q: int, d: int, in_a: bool, in_A: bool, depth: int = 60) -> complex:
    """``sum h(q^m1) conj h(q^m2) / q^max`` with ``min(m1, m2) <= d``."""

    def h(m):
        return 1 + 0j if m == 0 else z ** (m - 1) * (z - 1)

    M1 = 0 if in_a else depth
    M2 = 0 if in_A else depth
    tot = 0j
    for m1 in range(M1 + 1):
        for m2 in range(M2 + 1):
            if min(m1, m2) > d:
                continue
            tot += h(m1) * h(m2).conjugate() / q ** max(m1, m2)
    return tot


def _prefactor(g: MultFunctionSpec, f: RatioFamily) -> complex:
    """``g(alpha) conj g(beta)``: the reduced forms drop the contents."""
    out = 1 + 0j
    for p, e in factorize(f.alpha).items():
        out *= g.value(p) ** e
    for p, e in factorize(f.beta).items():
        out *= g.value(p).conjugate() ** e
    return out


def euler_product(g: MultFunctionSpec, f: RatioFamily, P: int) -> complex:
    prod = _prefactor(g, f)
    special = set(g.modulus_primes) | set(factorize(f.delta)) | set(factorize(f.a1 * f.A1))
    rest = [q for q in primes_up_to(P) if q not in special]
    for q in primes_up_to(P):
        if q in special:
            prod *= euler_factor(g, f, q, exact=False).value
    if rest:
        # generic primes: coprime to a1 A1 Delta1 and to the modulus
        qs = np.array(rest, dtype=np.int64)
        z = _prime_values(g, qs)
        w = 1 + 2 * ((z - 1) / (qs - z)).real
        prod *= np.prod(w)
    return complex(prod)


def _prime_values(g: MultFunctionSpec, primes) -> np.ndarray:
    """``g(p)`` for an array of primes, via the primitive character table."""
    c, table, L = _primitive_table(g.chi)
    primes = np.asarray(primes, dtype=np.int64)
    out = np.exp(2j * np.pi * table[np.mod(primes, c)] / L)
    for q in g.modulus_primes:
        out[primes == q] = g.value(q)
    return out


def s_diagnostic(g: MultFunctionSpec, x: int) -> float:
    """``sum over both functions of sum_{log x < p <= x} |g(p) - 1|^2 / p``."""
    ps = np.array([p for p in primes_up_to(x) if p > math.log(x)], dtype=np.int64)
    if not len(ps):
        return 0.0
    terms = np.abs(_prime_values(g, ps) - 1) ** 2 / ps
    return 2 * math.fsum(terms.tolist())


def limit_mean(g: MultFunctionSpec, f: RatioFamily) -> CyclotomicNumber:
    """Exact ``lim x^-1 sum g(an+b) conj g(An+B)``.

    Uses the local-sum factorization with ``delta`` replaced by a modulus
    ``D`` whose primes cover the character modulus and ``delta``; ``g`` agrees
    with ``chi`` induced mod ``D`` on everything prime to ``D``.
    """
    from .dualdet import eta, eta_context, local_factor

    primes = set(factorize(f.delta)) | set(g.modulus_primes)
    D = 1
    for p in sorted(primes):
        D *= p ** max(valuation(f.delta, p), valuation(g.chi.modulus, p), 1)
    F = dataclasses.replace(f, delta=D)
    chi = g.chi.primitive().induce(D)
    out = CyclotomicNumber.rational(1)
    for p in sorted(primes):
        ctx = eta_context(F, chi, p)
        a = g.prime_angle(p) if g.chi.modulus % p == 0 else chi_angle_outside(g, p)
        if a is None:
            factor = eta(ctx, F, 0, 0)
        else:
            factor = local_factor(ctx, F, a)
        out = out * factor
    for p, e in factorize(f.alpha).items():
        a = g.prime_angle(p)
        if a is None:
            return CyclotomicNumber(1)
        out = out * CyclotomicNumber.from_angle(a * e)
    for p, e in factorize(f.beta).items():
        a = g.prime_angle(p)
        if a is None:
            return CyclotomicNumber(1)
        out = out * CyclotomicNumber.from_angle(-a * e)
    return out


def chi_angle_outside(g: MultFunctionSpec, p: int) -> Fraction:
    # p divides delta but not the character modulus: g(p) = chi(p)
    return g.chi.angle(p)


def corr_report(g: MultFunctionSpec, f: RatioFamily, x: int, P: int, threads: int = 1, with_limit: bool = True) -> dict:
    if P < 2:
        raise ValueError("prime bound P must be at least 2")
    mean = empirical_corr(g, f, x, threads)
    prod = euler_product(g, f, P)
    out = {
        "mean_re": mean.real,
        "mean_im": mean.imag,
        "product_re": prod.real,
        "product_im": prod.imag,
        "abs_diff": abs(mean - prod),
        "S_x": s_diagnostic(g, x),
        "x": x,
        "P": P,
    }
    if with_limit:
        lim = limit_mean(g, f).to_complex()
        out["limit_re"] = lim.real
        out["limit_im"] = lim.imag
    return out
