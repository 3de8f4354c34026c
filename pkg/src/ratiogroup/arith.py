"""Exact integer arithmetic: factorization, CRT, unit groups and discrete logs.

Everything here is a pure function of its arguments. A few results are
memoised with ``functools.lru_cache``; the caches never change an answer.
"""

from __future__ import annotations

import math
import random
from collections.abc import Iterable, Iterator, Mapping
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache, reduce

import numpy as np

__all__ = [
    "ArithmeticError_",
    "PrimeExponentMap",
    "UnitGroupStructure",
    "crt_solve",
    "divisors",
    "euler_phi",
    "factorize",
    "is_prime",
    "mobius",
    "multiplicative_order",
    "primes_up_to",
    "unit_group",
    "valuation",
]


class ArithmeticError_(ValueError):
    """Raised for invalid arithmetic input (non-coprime moduli, zero, ...)."""


# Deterministic for n < 3.3e24 (Sorenson & Webster).
_MR_BASES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41)
_TRIAL_LIMIT = 10**6


@lru_cache(maxsize=None)
def primes_up_to(n: int) -> tuple[int, ...]:
    """All primes ``p <= n`` (sieve of Eratosthenes)."""
    if n < 2:
        return ()
    sieve = np.ones(n + 1, dtype=bool)
    sieve[:2] = False
    for p in range(2, math.isqrt(n) + 1):
        if sieve[p]:
            sieve[p * p :: p] = False
    return tuple(int(p) for p in np.flatnonzero(sieve))


_SMALL_PRIMES = primes_up_to(1000)


def is_prime(n: int) -> bool:
    """Miller-Rabin with a witness set that is deterministic below 3.3e24."""
    if n < 2:
        return False
    for p in _SMALL_PRIMES[:25]:
        if n % p == 0:
            return n == p
    d, s = n - 1, 0
    while d % 2 == 0:
        d //= 2
        s += 1
    for a in _MR_BASES:
        x = pow(a, d, n)
        if x in (1, n - 1):
            continue
        for _ in range(s - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True


def _pollard_brent(n: int) -> int:
    if n % 2 == 0:
        return 2
    rng = random.Random(n)  # seeded: factor order never depends on global state
    while True:
        y, c, m = rng.randrange(1, n), rng.randrange(1, n), 128
        g = r = q = 1
        x = ys = y
        while g == 1:
            x = y
            for _ in range(r):
                y = (y * y + c) % n
            k = 0
            while k < r and g == 1:
                ys = y
                for _ in range(min(m, r - k)):
                    y = (y * y + c) % n
                    q = q * abs(x - y) % n
                g = math.gcd(q, n)
                k += m
            r *= 2
        if g == n:
            g = 1
            while g == 1:
                ys = (ys * ys + c) % n
                g = math.gcd(abs(x - ys), n)
        if g != n:
            return g


def _factor_into(n: int, out: dict[int, int]) -> None:
    if n == 1:
        return
    if is_prime(n):
        out[n] = out.get(n, 0) + 1
        return
    d = _pollard_brent(n)
    _factor_into(d, out)
    _factor_into(n // d, out)


class PrimeExponentMap(Mapping):
    """Finitely supported map prime -> nonzero signed exponent.

    Encodes a positive rational number (a positive integer when all exponents
    are positive). Construction validates primality of keys and drops zeros.
    """

    __slots__ = ("_entries",)

    def __init__(self, entries: Mapping[int, int] | Iterable[tuple[int, int]] = ()):
        items = entries.items() if isinstance(entries, Mapping) else entries
        acc: dict[int, int] = {}
        for p, e in items:
            p, e = int(p), int(e)
            if not is_prime(p):
                raise ArithmeticError_(f"{p} is not prime")
            acc[p] = acc.get(p, 0) + e
        self._entries = tuple(sorted((p, e) for p, e in acc.items() if e))

    @classmethod
    def of(cls, value: int | Fraction | str) -> PrimeExponentMap:
        """Factor a positive integer or rational."""
        q = Fraction(value)
        if q <= 0:
            raise ArithmeticError_(f"expected a positive rational, got {value}")
        num = factorize(q.numerator)
        den = factorize(q.denominator)
        return num / den

    # Mapping protocol
    def __getitem__(self, p: int) -> int:
        for q, e in self._entries:
            if q == p:
                return e
        raise KeyError(p)

    def get(self, p, default=0):
        return dict(self._entries).get(p, default)

    def __iter__(self) -> Iterator[int]:
        return (p for p, _ in self._entries)

    def __len__(self) -> int:
        return len(self._entries)

    def __eq__(self, other) -> bool:
        if isinstance(other, PrimeExponentMap):
            return self._entries == other._entries
        if isinstance(other, Mapping):
            return self == PrimeExponentMap(other)
        return NotImplemented

    def __hash__(self) -> int:
        return hash(self._entries)

    def __repr__(self) -> str:
        return f"PrimeExponentMap({dict(self._entries)})"

    # Group operations
    def __mul__(self, other: PrimeExponentMap) -> PrimeExponentMap:
        return PrimeExponentMap(list(self._entries) + list(other._entries))

    def __truediv__(self, other: PrimeExponentMap) -> PrimeExponentMap:
        return self * other.inverse()

    def __pow__(self, k: int) -> PrimeExponentMap:
        return PrimeExponentMap((p, e * k) for p, e in self._entries)

    def inverse(self) -> PrimeExponentMap:
        return self ** -1

    def value(self) -> Fraction:
        """Exact reconstruction of the encoded rational."""
        num = den = 1
        for p, e in self._entries:
            if e > 0:
                num *= p**e
            else:
                den *= p ** (-e)
        return Fraction(num, den)

    def as_dict(self) -> dict[int, int]:
        return dict(self._entries)


def factorize(n: int) -> PrimeExponentMap:
    """Prime factorization of a positive integer.

    Trial division by primes below 10**6, then Brent's variant of Pollard rho
    with certified (deterministic Miller-Rabin) prime factors.
    """
    n = int(n)
    if n < 1:
        raise ArithmeticError_(f"cannot factor {n}")
    out: dict[int, int] = {}
    for p in primes_up_to(_TRIAL_LIMIT):
        if p * p > n:
            break
        if n % p == 0:
            e = 0
            while n % p == 0:
                n //= p
                e += 1
            out[p] = e
    if n > 1:
        _factor_into(n, out)
    return PrimeExponentMap(out)


def valuation(n: int, p: int) -> int:
    """Exponent of the prime ``p`` in the nonzero integer ``n``."""
    if n == 0:
        raise ArithmeticError_("valuation of 0 is infinite")
    n = abs(n)
    v = 0
    while n % p == 0:
        n //= p
        v += 1
    return v


def euler_phi(n: int) -> int:
    result = n
    for p in factorize(n):
        result = result // p * (p - 1)
    return result


def mobius(n: int) -> int:
    f = factorize(n)
    if any(e > 1 for e in f.values()):
        return 0
    return -1 if len(f) % 2 else 1


def divisors(n: int) -> list[int]:
    divs = [1]
    for p, e in factorize(n).items():
        divs = [d * p**k for d in divs for k in range(e + 1)]
    return sorted(divs)


def crt_solve(congruences: Iterable[tuple[int, int]]) -> tuple[int, int]:
    """Solve ``x = r_i (mod m_i)`` for pairwise coprime moduli.

    Returns ``(x, M)`` with ``0 <= x < M`` and ``M`` the product of moduli.
    """
    congruences = [(int(r), int(m)) for r, m in congruences]
    for i, (_, mi) in enumerate(congruences):
        if mi < 1:
            raise ArithmeticError_(f"modulus must be positive, got {mi}")
        for _, mj in congruences[i + 1 :]:
            if math.gcd(mi, mj) != 1:
                raise ArithmeticError_(f"moduli {mi} and {mj} are not coprime")
    x, M = 0, 1
    for r, m in congruences:
        # x + M*t = r (mod m)
        t = (r - x) * pow(M, -1, m) % m if m > 1 else 0
        x += M * t
        M *= m
    return x % M, M


def multiplicative_order(x: int, m: int) -> int:
    """Smallest ``e >= 1`` with ``x**e = 1 (mod m)``."""
    if m < 1:
        raise ArithmeticError_(f"modulus must be positive, got {m}")
    if math.gcd(x, m) != 1:
        raise ArithmeticError_(f"{x} is not a unit modulo {m}")
    if m == 1:
        return 1
    order = _carmichael(m)
    for p in factorize(order):
        while order % p == 0 and pow(x, order // p, m) == 1:
            order //= p
    return order


@lru_cache(maxsize=4096)
def _carmichael(m: int) -> int:
    parts = []
    for p, e in factorize(m).items():
        if p == 2 and e >= 3:
            parts.append(2 ** (e - 2))
        else:
            parts.append((p - 1) * p ** (e - 1))
    return reduce(math.lcm, parts, 1)


@lru_cache(maxsize=1024)
def _primitive_root(p: int, e: int) -> int:
    """Smallest primitive root modulo the odd prime power ``p**e``."""
    pe = p**e
    phi = (p - 1) * p ** (e - 1)
    qs = list(factorize(phi))
    for g in range(2, pe):
        if g % p == 0:
            continue
        if all(pow(g, phi // q, pe) != 1 for q in qs):
            return g
    raise AssertionError("no primitive root")  # unreachable for odd p


def _bsgs(g: int, h: int, order: int, m: int) -> int:
    """Discrete log of ``h`` to base ``g`` in a cyclic group of ``order``."""
    step = math.isqrt(order) + 1
    table = {}
    cur = 1
    for j in range(step):
        table.setdefault(cur, j)
        cur = cur * g % m
    giant = pow(g, -step, m)
    cur = h % m
    for i in range(step + 1):
        j = table.get(cur)
        if j is not None:
            return (i * step + j) % order
        cur = cur * giant % m
    raise ArithmeticError_(f"{h} is not a power of {g} modulo {m}")


def _cyclic_dlog(g: int, h: int, order: int, m: int) -> int:
    """Pohlig-Hellman over the prime-power parts of ``order``, BSGS inside."""
    residues = []
    for q, e in factorize(order).items():
        qe = q**e
        gq = pow(g, order // qe, m)
        hq = pow(h, order // qe, m)
        gamma = pow(gq, qe // q, m)  # order q
        x = 0
        for k in range(e):
            hk = pow(pow(gq, -x, m) * hq % m, qe // q ** (k + 1), m)
            d = _bsgs(gamma, hk, q, m)
            x += d * q**k
        residues.append((x, qe))
    x, _ = crt_solve(residues)
    return x


@dataclass(frozen=True)
class UnitGroupStructure:
    """Canonical basis of ``(Z/mZ)^*``.

    ``generators`` lists ``(residue, order)``. Each generator is the CRT lift
    of a local generator at one prime power of ``m`` (1 at the others):
    a primitive root for odd ``p**t``; ``-1`` for 4; ``-1`` and ``3`` for
    ``2**t`` with ``t >= 3``. ``prime_powers[i]`` records which ``(p, t)``
    generator ``i`` belongs to and ``local[i]`` its local residue.
    """

    modulus: int
    generators: tuple[tuple[int, int], ...]
    prime_powers: tuple[tuple[int, int], ...]
    local: tuple[int, ...]

    @property
    def orders(self) -> tuple[int, ...]:
        return tuple(o for _, o in self.generators)

    @property
    def order(self) -> int:
        return math.prod(self.orders)

    def dlog(self, x: int) -> tuple[int, ...]:
        """Exponent vector of the unit ``x`` in the generator basis."""
        m = self.modulus
        if math.gcd(x, m) != 1:
            raise ArithmeticError_(f"{x} is not a unit modulo {m}")
        out = []
        i = 0
        gens = self.generators
        while i < len(gens):
            p, t = self.prime_powers[i]
            pt = p**t
            y = x % pt
            if p == 2:
                # basis (-1, 3) for t >= 3, (-1,) for t == 2
                if t == 2:
                    out.append(0 if y == 1 else 1)
                    i += 1
                    continue
                sign = 0 if y % 8 in (1, 3) else 1
                if sign:
                    y = pt - y
                out.append(sign)
                out.append(_dlog_cached(3, y, 2 ** (t - 2), pt))
                i += 2
                continue
            out.append(_dlog_cached(self.local[i], y, gens[i][1], pt))
            i += 1
        return tuple(out)

    def element(self, exponents: Iterable[int]) -> int:
        x = 1 % self.modulus
        for (g, o), e in zip(self.generators, exponents):
            x = x * pow(g, e % o, self.modulus) % self.modulus
        return x


@lru_cache(maxsize=1 << 16)
def _dlog_cached(g: int, h: int, order: int, m: int) -> int:
    return _cyclic_dlog(g, h, order, m)


@lru_cache(maxsize=4096)
def unit_group(m: int) -> UnitGroupStructure:
    """Canonical generator basis of the unit group modulo ``m``."""
    if m < 1:
        raise ArithmeticError_(f"modulus must be positive, got {m}")
    fac = factorize(m)
    gens: list[tuple[int, int]] = []
    pps: list[tuple[int, int]] = []
    local: list[int] = []

    def lift(residue: int, p: int, t: int) -> int:
        pt = p**t
        rest = m // pt
        x, _ = crt_solve([(residue % pt, pt), (1 % rest, rest)])
        return x

    for p, t in fac.items():
        if p == 2:
            if t == 1:
                continue
            gens.append((lift(-1, 2, t), 2))
            pps.append((2, t))
            local.append(2**t - 1)
            if t >= 3:
                gens.append((lift(3, 2, t), 2 ** (t - 2)))
                pps.append((2, t))
                local.append(3)
        else:
            g = _primitive_root(p, t)
            gens.append((lift(g, p, t), (p - 1) * p ** (t - 1)))
            pps.append((p, t))
            local.append(g)
    return UnitGroupStructure(m, tuple(gens), tuple(pps), tuple(local))
