"""Acceptance criteria 1-9; each test prints one PASS/FAIL line (see conftest)."""

import math
import random
import time
from fractions import Fraction

import numpy as np
import pytest

from ratiogroup.arith import crt_solve, euler_phi, factorize, multiplicative_order, unit_group
from ratiogroup.correlation import MultFunctionSpec, corr_report, euler_factor, euler_product
from ratiogroup.cyclotomic import CyclotomicNumber
from ratiogroup.dirichlet import (
    DirichletCharacter,
    enumerate_characters,
    gauss_sum,
    ramanujan_sum,
    ramanujan_sum_direct,
)
from ratiogroup.dualdet import GCharacter, dual_group, eta, eta_context, presentation, s_value, theta
from ratiogroup.family import normalize_family
from ratiogroup.lattice import RepresentationError, membership, quotient_invariants, represent
from ratiogroup.snf import snf

pytestmark = pytest.mark.acceptance


def _quadratic_lift(f, order=2):
    chi5 = next(c for c in enumerate_characters(5) if c.order == order)
    exps = DirichletCharacter.principal(16).exponents + chi5.induce(5**9).exponents
    return DirichletCharacter(f.delta, exps)


def test_criterion_1_trivial_group():
    t0 = time.perf_counter()
    f = normalize_family(3, 1, 5, 2)
    dual = dual_group(f)
    pres = presentation(f, quotient_invariants(f, 2000), dual)
    elapsed = time.perf_counter() - t0
    assert pres.torsion_invariants == [] and pres.trivial
    assert dual.candidates_before <= 1800 and dual.candidates_after_screen < dual.candidates_before
    assert elapsed < 60


def test_criterion_2_torsion_two():
    t0 = time.perf_counter()
    f = normalize_family(5, 1, 5, -1)
    dual = dual_group(f)
    pres = presentation(f, quotient_invariants(f, 2000), dual)
    elapsed = time.perf_counter() - t0
    assert pres.torsion_invariants == [2]
    assert pres.free_rank == 1 and pres.free_generators == [{5: 1}]
    (g,) = [g for g in dual.elements if not g.is_identity()]
    assert g.chi == _quadratic_lift(f)
    assert g.torsion_map[2] == Fraction(1, 2)  # g(2) = -1
    assert dual.candidates_after_filters < 64
    assert elapsed < 300


def test_criterion_3_membership():
    f = normalize_family(5, 1, 5, -1)
    for N in (2000, 10000, 100000):
        m = membership(f, 57, N)
        if m.status == "torsion_class":
            break
    assert m.status == "torsion_class" and m.order == 2 and N <= 10**5
    prod = Fraction(1)
    for n, e in m.certificate:
        prod *= Fraction(f.a * n + f.b, f.A * n + f.B) ** e
    assert prod == 57**2
    with pytest.raises(RepresentationError) as err:
        represent(f, 2, N)
    assert err.value.obstruction["text"] == "quadratic character mod 5 value -1"


def test_criterion_4_eta_table():
    f = normalize_family(5, 1, 5, -1)
    ctx = eta_context(f, DirichletCharacter.principal(f.delta), 2)
    half = CyclotomicNumber.rational(Fraction(1, 2))
    zero = CyclotomicNumber(1)
    assert eta(ctx, f, 1, 1) == zero
    z = ctx.z
    for b in range(8):
        for c in range(8):
            val = eta(ctx, f, b, c)
            if (b, c) == (1, 1) or (max(b, c) >= 1 and min(b, c) == 0) or min(b, c) > z:
                assert val == zero, (b, c)
            else:
                assert val == half, (b, c)


@pytest.mark.parametrize("order", [2, 4])
def test_criterion_5_condition_iii_closed_form(order):
    f = normalize_family(5, 1, 5, -1)
    chi = _quadratic_lift(f, order)
    chi2 = chi.components()[1]
    a_chi2_2 = chi2.angle(2)
    conj_chi2_m1 = CyclotomicNumber.from_angle(-chi2.angle(-1) % 1)
    mismatches = []
    for k in range(4):
        z = Fraction(k, 4)
        g = GCharacter(chi, ((2, (z + a_chi2_2) % 1),), Fraction(0))
        expected = (CyclotomicNumber.rational(2) - CyclotomicNumber.from_angle(z)) * conj_chi2_m1
        got = s_value(f, g)
        if got != expected:
            mismatches.append((str(z), repr(got), repr(expected)))
    assert not mismatches, mismatches


def test_criterion_6_character_sums():
    for pt in range(2, 344):
        fac = factorize(pt)
        if len(fac) != 1:
            continue
        for chi in enumerate_characters(pt):
            if chi.is_primitive():
                assert abs(abs(gauss_sum(chi).to_complex()) - math.sqrt(pt)) < 1e-9, chi
    for pt in range(2, 244):
        if len(factorize(pt)) != 1:
            continue
        for x in range(pt):
            assert CyclotomicNumber.rational(ramanujan_sum(pt, x)) == ramanujan_sum_direct(pt, x)


@pytest.mark.parametrize("params", [(3, 1, 5, 2), (5, 1, 5, -1), (1, 1, 1, 2)])
def test_criterion_7_oracle_agreement(params):
    f = normalize_family(*params)
    N = 2000
    res = quotient_invariants(f, N)
    while not res.stabilized and N < 16000:
        N *= 2
        res = quotient_invariants(f, N)
    assert res.stabilized
    assert list(res.torsion) == dual_group(f).invariants


def test_criterion_8_correlation():
    t0 = time.perf_counter()
    f = normalize_family(5, 1, 5, -1)
    (g,) = [g for g in dual_group(f).elements if not g.is_identity()]
    spec = MultFunctionSpec.from_gcharacter(f, g)
    rep = corr_report(spec, f, 10**6, 10**4)
    assert abs(complex(rep["mean_re"], rep["mean_im"]) - 1) <= 0.01
    one = MultFunctionSpec.make(DirichletCharacter.principal(1))
    rep1 = corr_report(one, f, 10**5, 10**4)
    assert rep1["abs_diff"] == 0 and euler_product(one, f, 10**4) == 1
    rnd = random.Random(2024)
    for _ in range(1000):
        q = rnd.choice([2, 3, 5, 7, 11, 13, 101])
        ang = Fraction(rnd.randint(0, 719), 720)
        fam = normalize_family(rnd.randint(1, 30), rnd.randint(1, 30), rnd.randint(1, 30), rnd.randint(31, 60))
        h = MultFunctionSpec.make(DirichletCharacter.principal(q), {q: ang})
        assert abs(euler_factor(h, fam, q, exact=False).value) <= 1 + 1e-12
    assert time.perf_counter() - t0 < 120


def test_criterion_9_property_suites():
    # SNF: sparse random matrices up to 200 x 2000, dense ones up to 40 x 100
    rng = np.random.default_rng(99)
    for m, n in ((50, 500), (100, 1000), (200, 2000)):
        A = np.zeros((m, n), dtype=np.int64)
        for j in range(n):
            rows = rng.choice(m, size=rng.integers(1, 5), replace=False)
            A[rows, j] = rng.integers(-4, 5, size=len(rows))
        r = snf(A, with_inverses=True)
        assert r.check(A)
        assert all(b % a == 0 for a, b in zip(r.invariants, r.invariants[1:]))
    for m, n in ((10, 30), (25, 60), (40, 100)):
        A = rng.integers(-9, 10, size=(m, n))
        assert snf(A, with_inverses=True).check(A)
    # arithmetic core
    for n in range(1, 10**5 + 1):
        assert math.prod(p**e for p, e in factorize(n).items()) == n
    rnd = random.Random(9)
    for _ in range(300):
        mods, M = [], 1
        while True:
            q = rnd.randint(2, 2000)
            if all(math.gcd(q, x) == 1 for x in mods) and M * q <= 10**9:
                mods.append(q)
                M *= q
            elif M * 2 > 10**9 or len(mods) >= 5:
                break
            elif M * q > 10**9:
                break
        res = [rnd.randrange(q) for q in mods]
        x, mod = crt_solve(list(zip(res, mods)))
        assert mod == M and all(x % q == r for q, r in zip(mods, res))
    for m in range(1, 3001):
        ug = unit_group(m)
        assert math.prod(ug.orders) == euler_phi(m)
        x = rnd.randrange(1, m + 1)
        if math.gcd(x, m) == 1:
            assert euler_phi(m) % multiplicative_order(x, m) == 0
    # theta bound over delta-smooth pairs with lcm <= 10^4 on both worked families
    for params in ((3, 1, 5, 2), (5, 1, 5, -1)):
        f = normalize_family(*params)
        chis = [DirichletCharacter.principal(f.delta)] + [g.chi for g in dual_group(f).elements]
        smooth = [1]
        for p in f.delta_primes:
            smooth = [d * p**e for d in smooth for e in range(20) if d * p**e <= 10**4]
        for chi in chis:
            for d1 in smooth:
                for d2 in smooth:
                    if math.lcm(d1, d2) > 10**4 or f.Delta % math.gcd(d1, d2):
                        continue
                    assert abs(theta(f, chi, d1, d2).to_complex()) <= 1 / max(d1, d2) + 1e-12
