import math
import random
from fractions import Fraction

import numpy as np
import pytest

from eighthmoment.errors import ConvergenceError, DomainError, EvaluationError
from eighthmoment.numerics import (ContourCircle, adaptive_line_quadrature, cauchy_derivative,
                                   circle_integral, fixed_gauss_legendre, rational_ops)


def test_circle_examples():
    c = ContourCircle(1, 0.05)
    assert circle_integral(lambda z: 1 / (z - 1), c).value == pytest.approx(1, abs=1e-14)
    assert abs(circle_integral(lambda z: z**2, c).value) < 1e-14
    assert circle_integral(lambda z: np.exp(z) / (z - 1) ** 3, c).value == pytest.approx(math.e / 2, rel=1e-12)


@pytest.mark.parametrize("n", [-3, -2, -1, 0, 1, 2])
def test_circle_monomials(n):
    c = ContourCircle(0, 0.7)
    val = circle_integral(lambda z: z**n, c).value
    assert abs(val - (1 if n == -1 else 0)) < 1e-12


def test_circle_validation():
    with pytest.raises(DomainError):
        ContourCircle(0, -1)
    with pytest.raises(DomainError):
        ContourCircle(0, 1, nodes=32)
    with pytest.raises(DomainError):
        ContourCircle(0, 1, nodes=100)
    with pytest.raises(EvaluationError):
        circle_integral(lambda z: np.full(z.shape, np.nan), ContourCircle(0, 1))


def test_circle_error_estimate_is_honest():
    # exp(1/z) has an essential singularity inside, so convergence is algebraic-free but slow-ish
    f = lambda z: np.exp(np.cos(z)) / (z - 0.5)
    c = ContourCircle(0, 1)
    est = circle_integral(f, c, rtol=1e-6)
    exact = math.exp(math.cos(0.5))
    assert abs(est.value - exact) <= 10 * est.error + 1e-15


def test_circle_convergence_cap():
    with pytest.raises(ConvergenceError):
        circle_integral(lambda z: 1 / (z - 0.999), ContourCircle(0, 1), max_nodes=256)


def test_cauchy_examples():
    assert cauchy_derivative(np.exp, 0, 16, 16.0).value == pytest.approx(1, rel=1e-10)
    assert abs(cauchy_derivative(lambda z: z**5, 0, 3, 0.5).value) < 1e-12
    assert cauchy_derivative(lambda z: 1 / (1 - z), 0, 4, 0.3).value == pytest.approx(24, rel=1e-10)


def test_line_quadrature_examples():
    assert adaptive_line_quadrature(lambda x: x**2, 0, 1, 1e-14).value == pytest.approx(1 / 3, rel=1e-14)
    est = adaptive_line_quadrature(lambda x: 1 / x, 1, 2, 1e-12)
    assert abs(est.value - math.log(2)) < 1e-12


def test_line_quadrature_bump_matches_fixed_rule():
    def bump(x):
        x = np.asarray(x, dtype=float)
        inside = (x > 0) & (x < 1)
        out = np.zeros_like(x)
        out[inside] = np.exp(-1 / (x[inside] * (1 - x[inside])))
        return out

    tol = 1e-12
    adaptive = adaptive_line_quadrature(bump, 0, 1, tol).value
    fixed = fixed_gauss_legendre(bump, 0, 1, panels=400)
    assert abs(adaptive - fixed) < 2 * tol


def test_line_quadrature_stall():
    with pytest.raises(ConvergenceError) as info:
        adaptive_line_quadrature(lambda x: 1 / np.sqrt(np.abs(x - 0.3)), 0, 1, 1e-14, max_intervals=50)
    assert info.value.estimate is not None


def test_rational_examples():
    assert rational_ops(Fraction(1, 3), Fraction(1, 6), "+") == Fraction(1, 2)
    assert rational_ops(Fraction(4, 638512875), Fraction(131072, math.factorial(16)), "=")
    assert rational_ops(Fraction(13381, 2615348736000), Fraction(107048, math.factorial(16)), "=")
    with pytest.raises(ZeroDivisionError):
        rational_ops(1, 0, "/")
    with pytest.raises(DomainError):
        rational_ops(1, 2, "^")


def test_rational_laws():
    rng = random.Random(5)
    for _ in range(200):
        a, b, c = (Fraction(rng.randint(-10**12, 10**12), rng.randint(1, 10**12)) for _ in range(3))
        assert rational_ops(rational_ops(a, b, "+"), c, "+") == rational_ops(a, rational_ops(b, c, "+"), "+")
        assert rational_ops(a, b, "*") == rational_ops(b, a, "*")
        r = rational_ops(a, b, "*")
        assert math.gcd(r.numerator, r.denominator) == 1 and r.denominator > 0
