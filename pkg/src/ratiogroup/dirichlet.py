"""Dirichlet characters on the canonical unit-group basis.

A character modulo ``m`` is stored as its exponent vector against the
generators of :func:`ratiogroup.arith.unit_group`: ``chi(g_i) =
exp(2*pi*i*e_i/o_i)``. Values are exact (:class:`CyclotomicNumber`); the
cheaper :meth:`DirichletCharacter.angle` returns the rational angle in
``[0, 1)`` or ``None`` off the units.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property, lru_cache

import numpy as np

from .arith import factorize, mobius, unit_group, divisors
from .cyclotomic import CyclotomicNumber

__all__ = [
    "CharacterError",
    "DirichletCharacter",
    "chi_decompose",
    "chi_eval",
    "chi_invariants",
    "dlog_table",
    "enumerate_characters",
    "gauss_sum",
    "log_table",
    "parse_label",
    "ramanujan_sum",
    "ramanujan_sum_direct",
]


class CharacterError(ValueError):
    pass


@dataclass(frozen=True)
class DirichletCharacter:
    modulus: int
    exponents: tuple[int, ...]

    def __post_init__(self):
        ug = unit_group(self.modulus)
        if len(self.exponents) != len(ug.generators):
            raise CharacterError(
                f"modulus {self.modulus} needs {len(ug.generators)} exponents, "
                f"got {len(self.exponents)}"
            )
        reduced = tuple(int(e) % o for e, o in zip(self.exponents, ug.orders))
        object.__setattr__(self, "exponents", reduced)

    @classmethod
    def principal(cls, m: int) -> DirichletCharacter:
        return cls(m, (0,) * len(unit_group(m).generators))

    @classmethod
    def from_generator_angles(cls, m: int, angles) -> DirichletCharacter:
        ug = unit_group(m)
        exps = []
        for a, o in zip(angles, ug.orders):
            e = Fraction(a) * o
            if e.denominator != 1:
                raise CharacterError(f"angle {a} is not a valid value at a generator of order {o}")
            exps.append(int(e))
        return cls(m, tuple(exps))

    @property
    def group(self):
        return unit_group(self.modulus)

    # evaluation
    def angle(self, n: int) -> Fraction | None:
        m = self.modulus
        if math.gcd(n, m) != 1:
            return None
        if m <= 2:
            return Fraction(0)
        logs = self.group.dlog(n % m)
        return sum(
            (Fraction(e * l, o) for e, l, o in zip(self.exponents, logs, self.group.orders)),
            Fraction(0),
        ) % 1

    def __call__(self, n: int) -> CyclotomicNumber:
        a = self.angle(n)
        if a is None:
            return CyclotomicNumber(1)
        return CyclotomicNumber.from_angle(a)

    def __mul__(self, other: DirichletCharacter) -> DirichletCharacter:
        if other.modulus != self.modulus:
            raise CharacterError("characters have different moduli")
        return DirichletCharacter(
            self.modulus, tuple(a + b for a, b in zip(self.exponents, other.exponents))
        )

    def conj(self) -> DirichletCharacter:
        return DirichletCharacter(self.modulus, tuple(-e for e in self.exponents))

    def __pow__(self, k: int) -> DirichletCharacter:
        return DirichletCharacter(self.modulus, tuple(e * k for e in self.exponents))

    # invariants
    @cached_property
    def order(self) -> int:
        return math.lcm(
            1, *(o // math.gcd(e, o) for e, o in zip(self.exponents, self.group.orders))
        )

    def is_principal(self) -> bool:
        return not any(self.exponents)

    @cached_property
    def conductor(self) -> int:
        return math.prod(p**c for p, c in self._local_conductors())

    def _local_conductors(self):
        for comp in self.components():
            (p, t), = factorize(comp.modulus).items()
            if comp.is_principal():
                yield p, 0
                continue
            c = 1 if p > 2 else 2
            while c < t and comp.angle(1 + p**c) != 0:
                c += 1
            yield p, c

    def is_primitive(self) -> bool:
        return self.conductor == self.modulus

    def components(self) -> list[DirichletCharacter]:
        """One character per prime power of the modulus (CRT decomposition)."""
        ug = self.group
        out = []
        i = 0
        for p, t in factorize(self.modulus).items():
            pt = p**t
            k = len(unit_group(pt).generators)
            out.append(DirichletCharacter(pt, self.exponents[i : i + k]))
            i += k
        return out

    def induce(self, modulus: int) -> DirichletCharacter:
        """The character modulo a multiple ``modulus`` induced by this one."""
        if modulus % self.modulus:
            raise CharacterError(f"{modulus} is not a multiple of {self.modulus}")
        return DirichletCharacter.from_generator_angles(
            modulus, [self.angle(g) for g, _ in unit_group(modulus).generators]
        )

    def primitive(self) -> DirichletCharacter:
        """The primitive character modulo the conductor inducing this one."""
        c = self.conductor
        angles = []
        for h, _ in unit_group(c).generators:
            lift = h
            while math.gcd(lift, self.modulus) != 1:
                lift += c
            angles.append(self.angle(lift))
        return DirichletCharacter.from_generator_angles(c, angles)

    def label(self) -> str:
        return f"m={self.modulus};e={','.join(map(str, self.exponents))}"

    def __repr__(self) -> str:
        return f"DirichletCharacter({self.label()})"


def parse_label(text: str) -> DirichletCharacter:
    """Inverse of :meth:`DirichletCharacter.label`."""
    try:
        mpart, epart = text.strip().split(";")
        key_m, m = mpart.split("=")
        key_e, e = epart.split("=")
        if key_m != "m" or key_e != "e":
            raise ValueError
        exps = tuple(int(x) for x in e.split(",")) if e else ()
        return DirichletCharacter(int(m), exps)
    except ValueError as exc:
        raise CharacterError(f"malformed character label {text!r}") from exc


def enumerate_characters(m: int, order_divides: int | None = None) -> list[DirichletCharacter]:
    """Characters modulo ``m`` (optionally with order dividing a bound).

    Ordered by conductor, then lexicographically by exponent vector.
    """
    ug = unit_group(m)
    ranges = []
    for o in ug.orders:
        step = o // math.gcd(o, order_divides) if order_divides else 1
        ranges.append(range(0, o, step))
    chars = [DirichletCharacter(m, e) for e in itertools.product(*ranges)]
    chars.sort(key=lambda c: (c.conductor, c.exponents))
    return chars


def chi_eval(chi: DirichletCharacter, n: int) -> CyclotomicNumber:
    return chi(n)


def chi_invariants(chi: DirichletCharacter) -> tuple[int, int, bool]:
    return chi.order, chi.conductor, chi.is_primitive()


def chi_decompose(chi: DirichletCharacter) -> list[DirichletCharacter]:
    return chi.components()


def gauss_sum(chi: DirichletCharacter) -> CyclotomicNumber:
    """``sum_{r mod m} chi(r) exp(2*pi*i*r/m)`` for a primitive character."""
    if not chi.is_primitive():
        raise CharacterError(f"{chi.label()} is not primitive")
    m = chi.modulus
    n = math.lcm(m, chi.order)
    coeffs: dict[int, int] = {}
    for r in range(m):
        a = chi.angle(r)
        if a is None:
            continue
        e = (int(a * n) + r * (n // m)) % n
        coeffs[e] = coeffs.get(e, 0) + 1
    return CyclotomicNumber(n, coeffs)


def ramanujan_sum(m: int, x: int) -> int:
    """``c_m(x) = sum_{d | gcd(m, x)} mu(m/d) d``."""
    g = math.gcd(m, x)
    return sum(mobius(m // d) * d for d in divisors(g))


def ramanujan_sum_direct(m: int, x: int) -> CyclotomicNumber:
    """The same sum as an exponential sum over reduced residues."""
    coeffs: dict[int, int] = {}
    for z in range(m):
        if math.gcd(z, m) == 1:
            e = x * z % m
            coeffs[e] = coeffs.get(e, 0) + 1
    return CyclotomicNumber(m, coeffs)


@lru_cache(maxsize=64)
def dlog_table(pt: int) -> np.ndarray:
    """Exponent vectors of every residue modulo the prime power ``pt``.

    Returns an ``int64`` array of shape ``(pt, max(k, 1))`` where ``k`` is the
    number of canonical generators; rows of non-units are ``-1``. (For the
    trivial groups mod 1 and 2 the single column is just a unit flag.)
    """
    ug = unit_group(pt)
    k = len(ug.generators)
    table = np.full((pt, max(k, 1)), -1, dtype=np.int64)
    if k == 0:
        table[1 % pt, 0] = 0
        return table
    if k == 1:
        g, o = ug.generators[0]
        table[_power_orbit(g, o, pt), 0] = np.arange(o)
        return table
    # 2**t, t >= 3: x = (-1)**a * 3**b
    _, o3 = ug.generators[1]
    orbit = _power_orbit(3, o3, pt)
    table[orbit, 0] = 0
    table[orbit, 1] = np.arange(o3)
    table[(pt - orbit) % pt, 0] = 1
    table[(pt - orbit) % pt, 1] = np.arange(o3)
    return table


def _power_orbit(g: int, order: int, m: int) -> np.ndarray:
    """``[g**0, g**1, ..., g**(order-1)] mod m`` built blockwise in int64."""
    block = min(order, 1024)
    head = np.empty(block, dtype=np.int64)
    x = 1
    for i in range(block):
        head[i] = x
        x = x * g % m
    out = np.empty(order, dtype=np.int64)
    step = pow(g, block, m)
    cur = head
    for start in range(0, order, block):
        stop = min(order, start + block)
        out[start:stop] = cur[: stop - start]
        cur = cur * step % m
    return out


def log_table(chi: DirichletCharacter) -> tuple[np.ndarray, int]:
    """``(table, L)`` with ``chi(r) = exp(2*pi*i*table[r]/L)`` for every residue.

    ``L`` is the order of ``chi``; non-units get ``-1``.
    """
    m = chi.modulus
    L = chi.order
    table = np.zeros(m, dtype=np.int64)
    unit = np.ones(m, dtype=bool)
    r = np.arange(m, dtype=np.int64)
    for comp in chi.components():
        pt = comp.modulus
        logs = dlog_table(pt)
        sub = logs[r % pt]
        unit &= sub[:, 0] >= 0
        for col, (e, o) in enumerate(zip(comp.exponents, unit_group(pt).orders)):
            if e:
                table += sub[:, col] * ((e * L) // o)
    table %= L
    table[~unit] = -1
    if m == 1:
        table[:] = 0
    return table, L
