import math

import numpy as np
import pytest

from eighthmoment.arith import G_k_table, build_tables, ramanujan_column
from eighthmoment.divisor import (MainTermSpec, W0, conjecture_experiment, divisor_sum_bruteforce,
                                  divisor_sum_classical, main_term, make_bump_weight, make_partition_weight,
                                  partition_of_unity)
from eighthmoment.errors import CapacityError, DomainError
from eighthmoment.numerics import ContourCircle


def test_bump_support():
    f = make_bump_weight(1000, 2000)
    assert f(1500, 3000) > 0
    assert f(990, 3000) == 0
    assert f(1500, 4100) == 0
    assert f.P == 1.5


def _d1(g, h):
    return (-g(2 * h) + 8 * g(h) - 8 * g(-h) + g(-2 * h)) / (12 * h)


def _d2(g, h):
    return (-g(2 * h) + 16 * g(h) - 30 * g(0) + 16 * g(-h) - g(-2 * h)) / (12 * h * h)


@pytest.mark.parametrize("weight", [make_bump_weight(1000, 700, 2.0), make_partition_weight(1000, 700)],
                         ids=["bump", "partition"])
def test_bump_derivatives_finite_difference(weight):
    # five-point stencils in the scaled variables u = x/X, v = y/Y
    rng = np.random.default_rng(1)
    X, Y, h = weight.X, weight.Y, 2.5e-4
    f = lambda u, v: weight(X * u, Y * v)
    for _ in range(50):
        u, v = rng.uniform(1.05, 1.95, size=2)
        x, y = X * u, Y * v
        pairs = [
            (weight.derivative(x, y, 1, 0) * X, _d1(lambda e: f(u + e, v), h)),
            (weight.derivative(x, y, 0, 1) * Y, _d1(lambda e: f(u, v + e), h)),
            (weight.derivative(x, y, 2, 0) * X**2, _d2(lambda e: f(u + e, v), h)),
            (weight.derivative(x, y, 0, 2) * Y**2, _d2(lambda e: f(u, v + e), h)),
            (weight.derivative(x, y, 1, 1) * X * Y, _d1(lambda e: _d1(lambda d: f(u + e, v + d), h), h)),
        ]
        for exact, approx in pairs:
            assert abs(exact - approx) < 1e-6


def test_derivative_constants_recorded():
    consts = make_bump_weight(1e4, 1e4).derivative_constants()
    assert set(consts) == {(m, n) for m in range(3) for n in range(3)}
    assert 0.5 < consts[(0, 0)] <= 1.0
    assert all(math.isfinite(v) for v in consts.values())


def test_partition_of_unity():
    assert partition_of_unity(1.0, (-4, 4)).sum() == pytest.approx(1, abs=1e-15)
    big = 1e6
    lo = math.floor(2 * math.log2(big)) - 2
    assert partition_of_unity(big, (lo, lo + 4)).sum() == pytest.approx(1, abs=1e-12)
    for x in np.geomspace(1, 1e8, 300):
        k0 = math.floor(2 * math.log2(x)) - 2
        w = partition_of_unity(x, range(k0, k0 + 5))
        assert abs(w.sum() - 1) < 1e-12
        assert np.count_nonzero(w) <= 2
    assert W0(0.99) == 0 and W0(2.01) == 0
    with pytest.raises(DomainError):
        partition_of_unity(0.5, (0, 2))


def test_classical_sums(small_tables):
    assert divisor_sum_classical(small_tables, 2, 4, 1) == 18
    assert divisor_sum_classical(small_tables, 2, 1, 1) == 2
    tau4 = [None] + [sum(1 for a in range(1, n + 1) if n % a == 0 for b in range(1, n // a + 1) if (n // a) % b == 0
                         for c in range(1, n // (a * b) + 1) if (n // (a * b)) % c == 0) for n in range(1, 13)]
    assert divisor_sum_classical(small_tables, 4, 10, 2) == sum(tau4[n] * tau4[n + 2] for n in range(1, 11))
    with pytest.raises(CapacityError):
        divisor_sum_classical(small_tables, 2, 10**6, 1)


def test_bruteforce_properties(small_tables):
    f = make_bump_weight(1000, 1000)
    plus = divisor_sum_bruteforce(small_tables, 3, 3, 5, f)
    minus = divisor_sum_bruteforce(small_tables, 3, 3, -5, f)
    assert plus == pytest.approx(minus, rel=1e-14)
    bigger = build_tables(10_000, ks=(3,))
    assert divisor_sum_bruteforce(bigger, 3, 3, 5, f) == plus
    with pytest.raises(CapacityError):
        divisor_sum_bruteforce(small_tables, 2, 2, 1, make_bump_weight(1e4, 1e4))
    with pytest.raises(DomainError):
        divisor_sum_bruteforce(small_tables, 2, 2, 0, f)


def test_main_term_k2_within_five_percent(divisor_tables):
    f = make_bump_weight(1e5, 1e5)
    rec = conjecture_experiment(divisor_tables, MainTermSpec(2, 2, 1), f)
    d = rec.to_dict()
    assert d["relative_error"] < 0.05
    assert d["normalized_error"] == pytest.approx(d["abs_error"] / 1e5**0.51)
    for key in ("k", "l", "r", "X", "Y", "P", "q_max", "radii", "bruteforce", "main_term", "abs_error",
                "normalized_error", "runtime_ms"):
        assert key in d


def test_main_term_symmetry_and_realness():
    f = make_bump_weight(1e5, 1e5)
    a = main_term(MainTermSpec(3, 3, 6), f)
    b = main_term(MainTermSpec(3, 3, -6), f)
    assert a.value == pytest.approx(b.value, rel=1e-9)
    assert a.imag_ratio < 1e-6


def test_main_term_radius_independence():
    f = make_bump_weight(1e5, 1e5)
    vals = [main_term(MainTermSpec(2, 3, 2, contours=(ContourCircle(1, r), ContourCircle(1, r))), f).value
            for r in (0.04, 0.06)]
    assert vals[0] == pytest.approx(vals[1], rel=1e-6)


def test_truncated_q_sum(divisor_tables):
    f = make_bump_weight(1e5, 1e5)
    a = main_term(MainTermSpec(2, 2, 3, q_method="truncated", q_max=2000), f, divisor_tables)
    b = main_term(MainTermSpec(2, 2, 3, q_method="truncated", q_max=4000), f, divisor_tables)
    euler = main_term(MainTermSpec(2, 2, 3), f)
    assert abs(a.value - b.value) <= a.q_tail
    assert abs(b.value - euler.value) <= b.q_tail + euler.q_tail


def test_q_term_bound(small_tables):
    r, radius = 12, 0.05
    c = ContourCircle(1, radius)
    z = c.points(64)
    q_max = 2000
    G = G_k_table(4, z, small_tables, q_max)
    cq = ramanujan_column(small_tables, r, q_max)
    tau4 = small_tables.tau_k(4)
    for q in range(1, q_max + 1):
        term = np.abs(cq[q] * G[q][:, None] * G[q][None, :] * np.exp(-np.add.outer(z, z) * math.log(q)))
        bound = math.gcd(q, r) * 32.0 ** (2 * small_tables.omega[q]) * tau4[q] ** 2 * q ** (-2 + 4 * radius)
        assert term.max() <= bound


def test_spec_validation():
    with pytest.raises(DomainError):
        MainTermSpec(5, 2, 1)
    with pytest.raises(DomainError):
        MainTermSpec(2, 2, 0)
    with pytest.raises(DomainError):
        MainTermSpec(2, 2, 1, contours=(ContourCircle(1, 0.2), ContourCircle(1, 0.05)))
    with pytest.raises(DomainError):
        main_term(MainTermSpec(2, 2, 10**5), make_bump_weight(1e5, 1e5))
