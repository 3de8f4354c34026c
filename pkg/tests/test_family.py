import math
import random
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from ratiogroup.arith import factorize, valuation
from ratiogroup.family import (
    CaptureError,
    FamilyError,
    capture_class,
    coprime_class,
    normalize_family,
    ratio_congruent,
    reduce_pair,
)


def test_normalize_examples(trivial_family, torsion_family):
    f = trivial_family
    assert (f.Delta, f.alpha, f.beta, f.delta) == (1, 1, 1, 6750)
    assert len(f.rho) == 0
    g = torsion_family
    assert g.Delta == -10 and g.delta == 2**4 * 5**9 == 31250000
    assert g.torsion_exponent == 2 * 12500000
    with pytest.raises(FamilyError, match="degenerate"):
        normalize_family(4, 2, 2, 1)
    with pytest.raises(FamilyError):
        normalize_family(0, 1, 1, 1)


def test_normalize_constants():
    f = normalize_family(6, 4, 9, 3)
    assert (f.alpha, f.beta, f.a1, f.b1, f.A1, f.B1) == (2, 3, 3, 2, 3, 1)
    assert f.Delta == f.alpha * f.beta * f.Delta1
    assert f.rho.value() == Fraction(2, 3)
    assert f.free_primes == (3,) and f.rho0.value() == Fraction(1, 3)


@settings(max_examples=200, deadline=None)
@given(st.integers(1, 12), st.integers(-20, 20), st.integers(1, 12), st.integers(-20, 20))
def test_normalize_invariants(a, b, A, B):
    if a * B - A * b == 0:
        with pytest.raises(FamilyError):
            normalize_family(a, b, A, B)
        return
    f = normalize_family(a, b, A, B)
    assert f.Delta == f.alpha * f.beta * f.Delta1
    assert math.gcd(f.a1, f.b1) == 1 and math.gcd(f.A1, f.B1) == 1
    assert a * f.k + b > 0 and A * f.k + B > 0
    M = a * A * abs(f.Delta)
    literal = any(math.gcd((a * s + b) * (A * s + B), math.lcm(2, M)) == 1 for s in range(math.lcm(2, M)))
    reduced = any(math.gcd(f.forms(s)[0] * f.forms(s)[1], math.lcm(2, M)) == 1 for s in range(math.lcm(2, M)))
    assert (f.case_tag == "first_case") == reduced
    if f.alpha == f.beta == 1:
        assert reduced == literal


def test_coprime_class_examples(torsion_family, trivial_family):
    c = coprime_class(torsion_family)
    assert c.case == "first_case" and c.modulus == 250 and c.residues == (2,)
    c = coprime_class(trivial_family)
    assert c.case == "second_case" and c.modulus == 60 and c.residues[0] == 7
    u, v = trivial_family.forms(7)
    assert (u, v) == (22, 37)
    c = coprime_class(normalize_family(2, 1, 4, 1))
    assert c.case == "first_case" and c.residues == (1,) and c.modulus == 16


@pytest.mark.parametrize("params", [(5, 1, 5, -1), (3, 1, 5, 2), (2, 1, 4, 1), (1, 1, 1, 2), (7, 3, 2, 5)])
def test_coprime_class_conditions_hold(params):
    f = normalize_family(*params)
    c = coprime_class(f)
    M = math.lcm(2, f.a * f.A * abs(f.Delta))
    for n in range(f.k, f.k + 10**4):
        u, v = f.forms(n)
        if c.case == "first_case":
            if n % c.modulus == c.residues[0]:
                assert math.gcd(u * v, M) == 1
        else:
            if n % c.modulus == c.residues[0]:
                assert valuation(u, 2) == 1 and math.gcd(u // 2 * v, M) == 1
            if n % c.modulus == c.residues[1]:
                assert valuation(v, 2) == 1 and math.gcd(u * (v // 2), M) == 1


def _check_capture(f, cc, samples=10):
    for n in cc.members(samples):
        assert n >= f.k
        num, den = f.forms(n)
        target = num if cc.side == "numerator" else den
        assert valuation(target, cc.prime) == cc.exponent
        for q in f.delta_primes:
            assert valuation(num, q) - valuation(den, q) == cc.valuations.get(q, 0)
            num //= q ** valuation(num, q)
            den //= q ** valuation(den, q)
        assert (num % f.delta, den % f.delta) == cc.cofactors


def test_capture_examples(torsion_family, trivial_family):
    cc = capture_class(torsion_family, 2, 4)
    _check_capture(torsion_family, cc)
    assert cc.valuations[2] == 3
    # the progression quoted for this capture satisfies the same exact-power condition
    for n in range(3, 3 + 10 * 2**8 * 5**8 * 7, 2**8 * 5**8 * 7):
        assert valuation(5 * n + 1, 2) == 4 and valuation(5 * n - 1, 2) == 1
    cc = capture_class(trivial_family, 3, 1, "denominator")
    _check_capture(trivial_family, cc)
    with pytest.raises(CaptureError, match="not capturable"):
        capture_class(torsion_family, 5, 1)


@pytest.mark.parametrize("params", [(5, 1, 5, -1), (3, 1, 5, 2), (2, 1, 4, 1), (7, 3, 2, 5), (6, 4, 9, 3)])
def test_capture_templates(params):
    f = normalize_family(*params)
    for p in f.torsion_primes:
        for side in ("numerator", "denominator"):
            for e in (1, 2, 3):
                try:
                    cc = capture_class(f, p, e, side)
                except CaptureError:
                    continue
                _check_capture(f, cc)


def test_ratio_congruent_examples():
    assert ratio_congruent(3, 1, 5, 2, 11, 11, 7)
    u = 5**9 * 2
    for n in range(0, 40):
        for m in range(0, 40):
            assert ratio_congruent(u, 1, u, -1, n, m, 16) == ((n - m) % 4 == 0)
    assert ratio_congruent(1, 1, 1, 2, 0, 5, 5)
    with pytest.raises(ValueError):
        ratio_congruent(1, 0, 2, 0, 1, 2, 4)


def test_ratio_congruent_random_agreement():
    rnd = random.Random(1)
    done = 0
    while done < 10**4:
        u1, v1, u2, v2 = (rnd.randint(-30, 30) for _ in range(4))
        n, m, s = rnd.randint(-50, 50), rnd.randint(-50, 50), rnd.randint(1, 200)
        if math.gcd(s, (u2 * n + v2) * (u2 * m + v2)) != 1:
            continue
        ratio_congruent(u1, v1, u2, v2, n, m, s)  # asserts internally
        done += 1


def test_reduce_pair():
    f = reduce_pair(1, 1, 1, 2)
    assert f.params == (3, 1, 1, 1)
    assert reduce_pair(2, 1, 1, 1).params == (3, 1, 1, 1)
    for a, b, A, B in [(2, 3, 5, 7), (1, 1, 4, 9), (3, 2, 1, 1)]:
        g = reduce_pair(a, b, A, B)
        assert g.Delta == A * b * a * B > 0
    with pytest.raises(FamilyError):
        reduce_pair(1, 0, 1, 2)
