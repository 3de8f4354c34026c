"""Exact arithmetic in Q(zeta_N).

A :class:`CyclotomicNumber` of order ``N`` stores rational coefficients on the
power basis ``1, zeta, ..., zeta**(phi(N)-1)``: every input is reduced modulo
the cyclotomic polynomial ``Phi_N``. Since ``Phi_N(x) = Phi_r(x**(N/r))`` with
``r`` the radical of ``N``, the reduction is sparse even for large ``N``.
Equality of numbers of different order is decided after embedding both into
the lcm of the orders.
"""

from __future__ import annotations

import cmath
import heapq
import math
from collections.abc import Mapping
from fractions import Fraction
from functools import lru_cache

from .arith import euler_phi, factorize

__all__ = [
    "CyclotomicNumber",
    "cyc_arith",
    "cyc_is_value",
    "cyc_root",
    "cyclotomic_polynomial",
]

MAX_ORDER = 10**7


class CyclotomicOrderError(ValueError):
    pass


@lru_cache(maxsize=256)
def cyclotomic_polynomial(n: int) -> tuple[int, ...]:
    """Integer coefficients (constant term first) of ``Phi_n``."""
    rad = math.prod(factorize(n))
    poly = [-1, 1]  # Phi_1
    built = 1
    for p in factorize(rad):
        # Phi_{bp}(x) = Phi_b(x**p) / Phi_b(x) for p not dividing b
        stretched = [0] * ((len(poly) - 1) * p + 1)
        for i, c in enumerate(poly):
            stretched[i * p] = c
        poly = _exact_div(stretched, poly)
        built *= p
    s = n // rad
    if s > 1:
        stretched = [0] * ((len(poly) - 1) * s + 1)
        for i, c in enumerate(poly):
            stretched[i * s] = c
        poly = stretched
    return tuple(poly)


def _exact_div(num: list[int], den: list[int]) -> list[int]:
    num = list(num)
    out = [0] * (len(num) - len(den) + 1)
    lead = den[-1]
    for i in range(len(out) - 1, -1, -1):
        q, r = divmod(num[i + len(den) - 1], lead)
        assert r == 0
        out[i] = q
        if q:
            for j, c in enumerate(den):
                num[i + j] -= q * c
    assert not any(num[: len(den) - 1])
    return out


@lru_cache(maxsize=256)
def _reducer(n: int) -> tuple[int, int, tuple[tuple[int, int], ...]]:
    """``(phi(n), stride, terms)`` with ``x**phi(n) = -sum c * x**(stride*i)``."""
    rad = math.prod(factorize(n))
    base = cyclotomic_polynomial(rad)
    stride = n // rad
    deg = (len(base) - 1) * stride
    terms = tuple((i * stride, c) for i, c in enumerate(base[:-1]) if c)
    return deg, stride, terms


def _reduce(order: int, coeffs: Mapping[int, Fraction]) -> dict[int, Fraction]:
    acc: dict[int, Fraction] = {}
    for e, c in coeffs.items():
        if c:
            e %= order
            acc[e] = acc.get(e, 0) + c
    if order == 1:
        total = sum(acc.values(), Fraction(0))
        return {0: Fraction(total)} if total else {}
    deg, _, terms = _reducer(order)
    pending = [-e for e, c in acc.items() if c and e >= deg]
    heapq.heapify(pending)
    queued = {-e for e in pending}
    # exponents only decrease, so a descending sweep terminates
    while pending:
        e = -heapq.heappop(pending)
        queued.discard(e)
        c = acc.pop(e, 0)
        if not c:
            continue
        shift = e - deg
        for k, t in terms:
            f = shift + k
            acc[f] = acc.get(f, 0) - c * t
            if f >= deg and f not in queued:
                queued.add(f)
                heapq.heappush(pending, -f)
    return {e: Fraction(c) for e, c in acc.items() if c}


class CyclotomicNumber:
    """Element of Q(zeta_N), ``zeta_N = exp(2*pi*i/N)``, in canonical form."""

    __slots__ = ("order", "_coeffs", "_raw")
    __hash__ = None  # equality crosses orders; no canonical hash

    def __init__(self, order: int, coeffs: Mapping[int, Fraction | int] | None = None):
        order = int(order)
        if order < 1:
            raise CyclotomicOrderError(f"order must be positive, got {order}")
        if order > MAX_ORDER:
            raise CyclotomicOrderError(f"order {order} exceeds cap {MAX_ORDER}")
        self.order = order
        # reduction to the power basis is deferred until the coefficients are
        # needed; floating-point evaluation works on the raw form
        self._coeffs = None
        self._raw = dict(coeffs or {})

    @property
    def coeffs(self) -> dict[int, Fraction]:
        if self._coeffs is None:
            self._coeffs = _reduce(self.order, self._raw)
            self._raw = None
        return self._coeffs

    @coeffs.setter
    def coeffs(self, value) -> None:
        self._coeffs = value
        self._raw = None

    # construction helpers
    @classmethod
    def rational(cls, q) -> CyclotomicNumber:
        return cls(1, {0: Fraction(q)})

    @classmethod
    def root(cls, k: int, n: int) -> CyclotomicNumber:
        g = math.gcd(k % n, n) if k % n else n
        return cls(n // g, {(k % n) // g: 1}) if k % n else cls(1, {0: 1})

    @classmethod
    def from_angle(cls, angle: Fraction) -> CyclotomicNumber:
        """``exp(2*pi*i*angle)`` for a rational angle."""
        angle = Fraction(angle) % 1
        return cls.root(angle.numerator, angle.denominator)

    def embed(self, order: int) -> CyclotomicNumber:
        if order % self.order:
            raise CyclotomicOrderError(f"cannot embed order {self.order} into {order}")
        k = order // self.order
        out = CyclotomicNumber.__new__(CyclotomicNumber)
        out.order = order
        out.coeffs = _reduce(order, {e * k: c for e, c in self.coeffs.items()})
        return out

    def _common(self, other) -> tuple[CyclotomicNumber, CyclotomicNumber]:
        other = _coerce(other)
        if other.order == self.order:
            return self, other
        n = math.lcm(self.order, other.order)
        return self.embed(n), other.embed(n)

    # ring operations
    def __add__(self, other):
        try:
            x, y = self._common(other)
        except TypeError:
            return NotImplemented
        merged = dict(x.coeffs)
        for e, c in y.coeffs.items():
            merged[e] = merged.get(e, 0) + c
        return CyclotomicNumber(x.order, merged)

    __radd__ = __add__

    def __neg__(self):
        out = CyclotomicNumber.__new__(CyclotomicNumber)
        out.order = self.order
        out.coeffs = {e: -c for e, c in self.coeffs.items()}
        return out

    def __sub__(self, other):
        try:
            return self + (-_coerce(other))
        except TypeError:
            return NotImplemented

    def __rsub__(self, other):
        return _coerce(other) - self

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            out = CyclotomicNumber.__new__(CyclotomicNumber)
            out.order = self.order
            out.coeffs = {e: c * other for e, c in self.coeffs.items()} if other else {}
            return out
        try:
            x, y = self._common(other)
        except TypeError:
            return NotImplemented
        prod: dict[int, Fraction] = {}
        n = x.order
        for e1, c1 in x.coeffs.items():
            for e2, c2 in y.coeffs.items():
                e = (e1 + e2) % n
                prod[e] = prod.get(e, 0) + c1 * c2
        return CyclotomicNumber(n, prod)

    __rmul__ = __mul__

    def __pow__(self, k: int) -> CyclotomicNumber:
        if k < 0:
            return self.inverse() ** (-k)
        result = CyclotomicNumber(1, {0: 1})
        base = self
        while k:
            if k & 1:
                result = result * base
            base = base * base
            k >>= 1
        return result

    def __truediv__(self, other):
        if isinstance(other, (int, Fraction)):
            return self * (1 / Fraction(other))
        return self * _coerce(other).inverse()

    def __rtruediv__(self, other):
        return _coerce(other) * self.inverse()

    def conj(self) -> CyclotomicNumber:
        n = self.order
        return CyclotomicNumber(n, {(-e) % n: c for e, c in self.coeffs.items()})

    def galois(self, k: int) -> CyclotomicNumber:
        """Image under ``zeta -> zeta**k`` (``k`` coprime to the order)."""
        n = self.order
        return CyclotomicNumber(n, {(e * k) % n: c for e, c in self.coeffs.items()})

    def inverse(self) -> CyclotomicNumber:
        """Exact inverse: product of the other Galois conjugates over the norm."""
        if self.is_zero():
            raise ZeroDivisionError("inverse of zero")
        n = self.order
        if n <= 2 or len(self.coeffs) == 1 and self._is_monomial():
            if n <= 2:
                val = self.rational_value()
                return CyclotomicNumber.rational(1 / val)
            (e, c), = self.coeffs.items()
            return CyclotomicNumber(n, {(-e) % n: 1 / c})
        others = CyclotomicNumber(1, {0: 1})
        for k in range(2, n):
            if math.gcd(k, n) == 1:
                others = others * self.galois(k)
        norm = self * others
        if set(norm.coeffs) - {0}:
            raise AssertionError("norm is not rational")
        return others * (1 / norm.coeffs.get(0, Fraction(0)))

    def _is_monomial(self) -> bool:
        return len(self.coeffs) == 1

    # predicates and views
    def is_zero(self) -> bool:
        return not self.coeffs

    def is_one(self) -> bool:
        return self.coeffs == {0: 1}

    def is_rational(self) -> bool:
        return set(self.coeffs) <= {0}

    def rational_value(self) -> Fraction:
        if not self.is_rational():
            raise ValueError(f"{self!r} is not rational")
        return Fraction(self.coeffs.get(0, 0))

    def __eq__(self, other) -> bool:
        try:
            x, y = self._common(other)
        except TypeError:
            return NotImplemented
        return x.coeffs == y.coeffs

    def __complex__(self) -> complex:
        n = self.order
        terms = self._raw if self._coeffs is None else self._coeffs
        return sum(
            (float(c) * cmath.exp(2j * math.pi * e / n) for e, c in terms.items()),
            0j,
        )

    def to_complex(self) -> complex:
        return complex(self)

    def __abs__(self) -> float:
        return abs(complex(self))

    def __repr__(self) -> str:
        if not self.coeffs:
            return "0"
        terms = []
        for e, c in sorted(self.coeffs.items()):
            terms.append(f"{c}" if e == 0 else f"{c}*z{self.order}^{e}")
        return " + ".join(terms)

    def degree(self) -> int:
        return euler_phi(self.order)


def _coerce(x) -> CyclotomicNumber:
    if isinstance(x, CyclotomicNumber):
        return x
    if isinstance(x, (int, Fraction)):
        return CyclotomicNumber(1, {0: Fraction(x)})
    raise TypeError(f"cannot coerce {type(x).__name__} to CyclotomicNumber")


def cyc_root(k: int, n: int) -> CyclotomicNumber:
    """``exp(2*pi*i*k/n)``."""
    if n < 1:
        raise CyclotomicOrderError(f"order must be positive, got {n}")
    return CyclotomicNumber.root(k, n)


def cyc_arith(op: str, x: CyclotomicNumber, y: CyclotomicNumber | None = None):
    if op == "add":
        return x + y
    if op == "mul":
        return x * y
    if op == "conj":
        return x.conj()
    if op == "neg":
        return -x
    raise ValueError(f"unknown operation {op!r}")


def cyc_is_value(x: CyclotomicNumber, target: str) -> bool:
    if target == "zero":
        return x.is_zero()
    if target == "one":
        return x.is_one()
    raise ValueError(f"unknown target {target!r}")


def geometric_tail(ratio_root: Fraction, denom: int, start: int) -> CyclotomicNumber:
    """Exact ``sum_{b >= start} (w / denom)**b`` for ``w = exp(2*pi*i*ratio_root)``.

    Uses ``1/(1 - w/q) = q * sum_{k<N} w**k q**(N-1-k) / (q**N - 1)`` where
    ``N`` is the order of ``w``; requires ``denom >= 2``.
    """
    if denom < 2:
        raise ValueError("geometric tail needs |ratio| < 1")
    angle = Fraction(ratio_root) % 1
    n = angle.denominator
    k0 = angle.numerator
    num = {}
    for k in range(n):
        e = (k0 * k) % n
        num[e] = num.get(e, 0) + Fraction(denom ** (n - 1 - k))
    inv = CyclotomicNumber(n, num) * Fraction(denom, denom**n - 1)
    lead = CyclotomicNumber(n, {(k0 * start) % n: Fraction(1, denom**start)})
    return lead * inv
