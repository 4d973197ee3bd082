import math
from fractions import Fraction

import numpy as np
import pytest

from eighthmoment.arith import G4_closed, PrimePowerArg, build_tables
from eighthmoment.errors import DomainError, PoleError, PrecisionError
from eighthmoment.eulerprod import (EulerProductSpec, LaurentPoly, ShiftParams, Yp_identity_check, Yp_stated, Z1,
                                    a4_local_via_G4, a4_via_G4, a_constant, g_constant, g_derivative_definition,
                                    g_derivative_functions, local_expansion, prime_zeta, primes_upto,
                                    remainder_decay_exponent, scrH_direct, scrH_factored, scrI, theta_exponent)
from eighthmoment.special import zeta

A4 = 2.1468140977940e-4
LOOSE = EulerProductSpec(prime_cutoff=10**3, target_tolerance=1.0)


def test_g_constant():
    assert g_constant(1) == 1
    assert g_constant(2) == 2
    assert g_constant(3) == 42
    assert g_constant(4) == 24024
    assert isinstance(g_constant(4), Fraction)
    with pytest.raises(DomainError):
        g_constant(9)


def test_a_small_k():
    assert float(a_constant(1, EulerProductSpec(10**4))) == pytest.approx(1, abs=1e-14)
    assert float(a_constant(2, EulerProductSpec(10**5))) == pytest.approx(6 / math.pi**2, rel=1e-10)
    with pytest.raises(DomainError):
        a_constant(7)


def test_a4_two_cutoffs():
    lo = a_constant(4, EulerProductSpec(10**5))
    hi = a_constant(4, EulerProductSpec(10**6))
    assert abs(lo.value - hi.value) <= lo.tail_bound + hi.tail_bound
    assert float(hi) == pytest.approx(A4, rel=1e-12)


def test_a4_tolerance_enforced():
    with pytest.raises(PrecisionError):
        a_constant(4, EulerProductSpec(prime_cutoff=10, target_tolerance=1e-30))


def test_prime_zeta():
    p = primes_upto(10**6).astype(float)
    direct = np.sum(p**-3.0)
    assert prime_zeta(3) == pytest.approx(direct, rel=1e-12)
    assert prime_zeta(2).real == pytest.approx(0.45224742004106549850, rel=1e-13)


def test_a4_local_hand_expansion():
    g = [G4_closed(PrimePowerArg(2, j, 1)).real for j in (1, 2, 3)]
    assert g[0] == pytest.approx(1.75)
    hand = 0.5**9 * (1 + sum(gj**2 * 0.5 * 2.0**-j for j, gj in zip((1, 2, 3), g)))
    assert a4_local_via_G4(np.array([2.0]), j_max=3)[0] == pytest.approx(hand, rel=1e-15)


def test_j_truncation():
    p = np.array([5.0, 7.0, 101.0, 9973.0])
    assert np.max(np.abs(a4_local_via_G4(p, j_max=30) - a4_local_via_G4(p, j_max=60))) < 1e-14
    two = np.array([2.0])
    adaptive = a4_local_via_G4(two)[0]
    assert adaptive == pytest.approx(a4_local_via_G4(two, j_max=400)[0], rel=1e-15)
    # at p = 2 thirty terms are visibly short
    assert abs(a4_local_via_G4(two, j_max=30)[0] - adaptive) > 1e-9


def test_a4_routes_and_tail_model():
    small = a4_via_G4(LOOSE)
    big = a4_via_G4(EulerProductSpec(10**4, target_tolerance=1.0))
    assert abs(small.value - big.value) <= small.tail_bound + big.tail_bound
    route = a4_via_G4(EulerProductSpec(10**5))
    assert float(route) == pytest.approx(A4, rel=1e-10)


def test_Z1():
    z0 = Z1(0)
    assert abs(float(z0) - A4) < 1e-8
    s = 0.3 + 0.7j
    assert Z1(s.conjugate()).value == pytest.approx(np.conj(Z1(s).value), rel=1e-13)
    with pytest.raises(DomainError):
        Z1(-0.25)


def test_Z1_direct_sum():
    tables = build_tables(10**6, ks=(4,))
    m = np.arange(1, 10**6 + 1, dtype=float)
    direct = np.sum(tables.tau_k(4)[1:].astype(float) ** 2 / m**3) / zeta(3).real ** 16
    assert float(Z1(1)) == pytest.approx(direct, rel=1e-6)


def test_scrI_at_origin():
    val = scrI(ShiftParams(0, 0, 0, 0))
    assert abs(val.value - A4) < 1e-8


def test_scrI_conjugation():
    prm = ShiftParams(0.01 + 0.01j, -0.02, 0.005j, 0.4 + 0.3j)
    assert scrI(prm.conjugate()).value == pytest.approx(np.conj(scrI(prm).value), rel=1e-12)


def test_scrH_routes_agree():
    prm = ShiftParams(0.01, -0.02, 0.005, 0.8)
    fac = scrH_factored(prm)
    direct = scrH_direct(prm)
    assert abs(fac.value - direct.value) / abs(fac.value) < 1e-5
    assert abs(fac.value - direct.value) <= 10 * (fac.tail_bound + direct.tail_bound) + 1e-12 * abs(fac.value)


def test_scrH_truncated_sum():
    prm = ShiftParams(0.01, -0.02, 0.005, 1.0)
    single = scrH_direct(prm, r_max=None, q_max=1)
    assert single.value == pytest.approx(zeta(2 * 1.0 - 0.005), rel=1e-13)
    a = scrH_direct(prm, r_max=10**4, q_max=50)
    b = scrH_direct(prm, r_max=10**5, q_max=50)
    assert abs(a.value - b.value) <= a.r_tail_bound
    truncated = scrH_direct(prm, r_max=None, q_max=2000)
    full = scrH_direct(prm)
    assert abs(truncated.value - full.value) <= truncated.q_tail_bound


def test_scrH_errors():
    with pytest.raises(DomainError):
        scrH_direct(ShiftParams(0, 0, 0, 0.55))
    with pytest.raises(PoleError):
        scrH_factored(ShiftParams(0.01, 0.0, 0.0, 0.005))
    with pytest.raises(DomainError):
        ShiftParams(0.06, 0, 0, 1)


def test_Yp_identity():
    check = Yp_identity_check()
    assert check.exact_match
    assert check.max_numeric_error < 1e-12
    stated = Yp_stated()
    assert stated.evaluate(1, 1) == pytest.approx(-9)
    assert stated[(-2, -1, 0)] == 4
    assert local_expansion()["Yp"][(-2, -1, 0)] == 4
    single = Yp_identity_check(1.05 + 0.02j, 0.97 - 0.01j)
    assert single.max_numeric_error < 1e-12


def test_laurent_poly_algebra():
    x = LaurentPoly.monomial(Fraction(1), 1)
    y = LaurentPoly.monomial(Fraction(1), 0, 1)
    prod = (x + y) * (x - y)
    assert prod == x * x - y * y
    assert local_expansion()["W1"] == LaurentPoly()


@pytest.mark.parametrize("sigma", [0.0, 0.25, 0.5])
def test_remainder_exponent(sigma):
    prm = ShiftParams(0.01, -0.02, 0.005, sigma)
    assert remainder_decay_exponent(prm) <= theta_exponent(sigma) + 7 * prm.delta_prime + 0.2


def test_theta():
    assert theta_exponent(0.3) == -2
    assert theta_exponent(-0.1) == pytest.approx(-1.8)
    assert theta_exponent(-0.4) == pytest.approx(-0.6)
    with pytest.raises(DomainError):
        theta_exponent(-0.6)


def test_g_functions():
    s = 0.7 + 0.2j
    assert g_derivative_functions(s, 0) == pytest.approx(zeta(1 + 2 * s) ** 3, rel=1e-14)
    for s, k in ((2, 1), (1, 3), (0.3 + 1j, 2), (-0.1 + 0.5j, 3)):
        assert abs(g_derivative_functions(s, k) - g_derivative_definition(s, k)) < 1e-8
    with pytest.raises(PoleError):
        g_derivative_functions(0, 1)
