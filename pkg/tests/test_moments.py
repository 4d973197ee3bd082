import math
from fractions import Fraction

import numpy as np
import pytest

from eighthmoment.errors import CapacityError, DomainError, PrecisionError
from eighthmoment.eulerprod import g_constant
from eighthmoment.moments import (ConstantLedger, MomentRequest, MomentWindow, OffDiagonalTerm, afe_check,
                                  constant_combination_check, diagonal_constant_check, moment_integral,
                                  prediction, shifted_moment)

EULER_GAMMA = 0.5772156649015329


def test_constant_combination_identities():
    report = constant_combination_check()
    assert report.passed and bool(report)
    assert set(report.checks) == {"six_term_sum", "diag_over_16!", "offdiag_over_16!", "difference_is_g4",
                                  "target_matches", "diag_residue_scaling"}


def test_perturbed_ledger_fails():
    ledger = ConstantLedger()
    terms = list(ledger.six_fractions)
    first = terms[0]
    terms[0] = OffDiagonalTerm(first.sign, first.denominator + 1, first.log_t_power, first.log_ratio_power)
    report = constant_combination_check(ConstantLedger(six_fractions=tuple(terms)))
    assert not report.checks["six_term_sum"]
    assert not report


def test_ledger_validation():
    with pytest.raises(DomainError):
        ConstantLedger(six_fractions=ConstantLedger().six_fractions[:5])
    t = ConstantLedger().six_fractions[0]
    bad = (OffDiagonalTerm(t.sign, t.denominator, t.log_t_power + 1, t.log_ratio_power),) + \
        ConstantLedger().six_fractions[1:]
    with pytest.raises(DomainError):
        ConstantLedger(six_fractions=bad)


def test_diagonal_residue_complex_mode():
    check = diagonal_constant_check()
    assert check.passed
    assert check.rel_error < 1e-6
    assert check.higher_max < 1e-6
    assert check.mode == "complex"


def test_diagonal_residue_real_mode_is_ill_conditioned():
    with pytest.raises(PrecisionError):
        diagonal_constant_check(mode="real")
    with pytest.raises(DomainError):
        diagonal_constant_check(mode="imaginary")


def test_prediction_small_k():
    p1 = prediction(1000.0, 1)
    assert p1.value == pytest.approx(1000 * math.log(1000), rel=1e-14)
    p2 = prediction(1000.0, 2)
    assert p2.rational_factor == Fraction(1, 12)
    assert p2.value == pytest.approx(1000 * math.log(1000) ** 4 / (2 * math.pi**2), rel=1e-5)
    assert prediction(2000.0, 2).value > p2.value
    with pytest.raises(DomainError):
        prediction(2.0, 2)


def test_prediction_eighth_moment_routes_agree():
    p = prediction(1e4, 4)
    assert p.rational_factor == Fraction(g_constant(4), math.factorial(16))
    assert p.leading_via_24024 == pytest.approx(p.value, rel=1e-15)
    assert prediction(1e5, 4).value > p.value


def test_second_moment_classical_asymptotic():
    T = 2000.0
    est = moment_integral(MomentRequest(0, T, k=1))
    classical = T * math.log(T / (2 * math.pi)) + (2 * EULER_GAMMA - 1) * T
    assert est.value == pytest.approx(classical, rel=2e-3)
    assert 0.7 < est.value / (T * math.log(T)) < 0.85


def test_moment_monotone_and_additive():
    whole = moment_integral(MomentRequest(0, 500, k=2)).value
    a = moment_integral(MomentRequest(0, 250, k=2)).value
    b = moment_integral(MomentRequest(250, 500, k=2)).value
    assert a + b == pytest.approx(whole, rel=1e-7)
    assert a < whole


def test_eighth_moment_tolerance_halving():
    first = moment_integral(MomentRequest(0, 1000, k=4))
    second = moment_integral(MomentRequest(0, 1000, k=4, step_control=5e-9))
    assert abs(first.value - second.value) <= max(first.error, 1e-8 * abs(first.value))


def test_threads_do_not_change_value():
    one = moment_integral(MomentRequest(100, 300, k=2)).value
    two = moment_integral(MomentRequest(100, 300, k=2, threads=2)).value
    assert one == pytest.approx(two, rel=1e-12)


def test_window_properties():
    w = MomentWindow(1000.0)
    assert w.smoothness == 100.0
    assert w(1000.0) == 0 and w(2000.0) == 0 and w(1500.0) > 0.9
    consts = w.derivative_constants()
    assert all(math.isfinite(v) for v in consts.values())
    # smoothing at T/T0 = 10 keeps derivative growth bounded by T0^-j
    assert consts[1] < 10 and consts[2] < 100
    with pytest.raises(DomainError):
        MomentWindow(1000.0, 2000.0)


def test_windowed_moment_below_sharp_moment():
    w = MomentWindow(200.0)
    smooth = moment_integral(MomentRequest(200, 400, k=1, weight=w)).value
    sharp = moment_integral(MomentRequest(200, 400, k=1)).value
    assert 0 < smooth < sharp


def test_request_validation():
    with pytest.raises(DomainError):
        MomentRequest(10, 5)
    with pytest.raises(DomainError):
        MomentRequest(0, 10, k=1.3)
    with pytest.raises(DomainError):
        MomentRequest(0, 1e9)
    with pytest.raises(DomainError):
        MomentRequest(0, 100, weight=MomentWindow(80.0))


def test_shifted_moment_symmetry_and_zero_shift():
    req = MomentRequest(0, 300, k=1)
    plus = shifted_moment(req, 5.0)
    minus = shifted_moment(req, -5.0)
    assert plus.value == pytest.approx(minus.value, rel=1e-6)
    zero = shifted_moment(req, 0.0)
    assert zero.value == pytest.approx(moment_integral(req).value, rel=1e-12)
    assert math.isfinite(zero.normalized) and zero.normalized > 0
    with pytest.raises(DomainError):
        shifted_moment(req, 200.0)


def test_afe_validation():
    with pytest.raises(DomainError):
        afe_check(10.0)
    with pytest.raises(CapacityError):
        afe_check(40.0, term_cap=10**5)
    with pytest.raises(DomainError):
        afe_check(20.0, U_epsilon=1.5)


def test_afe_at_twenty():
    res = afe_check(20.0, U_epsilon=0.1)
    assert res.rel_error < 1e-5
    assert res.imag_ratio < 1e-8
    assert res.diagonal_value.real > 0
    assert res.truncated_value is not None and math.isfinite(abs(res.truncated_value))


@pytest.mark.slow
def test_afe_at_thirty():
    res = afe_check(30.0)
    assert res.rel_error < 1e-3
    assert res.imag_ratio < 1e-8
