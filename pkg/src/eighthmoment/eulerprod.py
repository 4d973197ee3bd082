"""Arithmetic constants and Euler products.

Covers g_k, a_k (two routes for k = 4), the diagonal factor Z₁(s), the
local factors 𝓘_p and their product, the double series ℋ(u₁,u₂,u₃,s) both
summed directly and in zeta-factored form, the Y_p polynomial identity and
the g_j(s) derivative functions.

Every infinite product is split at a prime cutoff P.  Above P the leading
terms of the log local factor are summed exactly through tails of the prime
zeta function P(w) = Σ_p p^{-w}; what remains is bounded by a tail model
c·Σ_{n>P} n^{-β}.
"""

from __future__ import annotations

import cmath
import math
import random
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

import numpy as np

from .arith import ArithTables, Q_poly, build_tables, factorize, multiplicative_table, smallest_prime_factors
from .errors import DomainError, PoleError, PrecisionError
from .numerics import cauchy_derivative
from .special import zeta, zeta_deriv

SERIES_ORDER = 40


@dataclass(frozen=True)
class EulerProductSpec:
    """Truncation control for an Euler product.

    ``tail_model`` (c, β) overrides the automatically derived bound
    c·Σ_{n>P} n^{-β} on the unaccelerated part of the log tail.
    """

    prime_cutoff: int = 10**6
    tail_model: tuple | None = None
    target_tolerance: float = 1e-8

    def __post_init__(self):
        if self.prime_cutoff < 2:
            raise DomainError("prime cutoff must be at least 2")
        if self.tail_model is not None and not self.tail_model[1] > 1:
            raise DomainError("tail model exponent must exceed 1")


FUNCTION_SPEC = EulerProductSpec(prime_cutoff=10**4)


@dataclass(frozen=True)
class ProductValue:
    """Value of a truncated, tail-corrected product with its certified bound."""

    value: complex
    tail_bound: float
    prime_cutoff: int
    tail_model: tuple

    def __complex__(self):
        return complex(self.value)

    def __float__(self):
        return float(np.real(self.value))


@dataclass(frozen=True)
class ShiftParams:
    """Shifts (u₁, u₂, u₃) and the variable s, with |u_i| < δ′."""

    u1: complex
    u2: complex
    u3: complex
    s: complex
    delta_prime: float = 0.05

    def __post_init__(self):
        if not 0 < self.delta_prime < 0.2:
            raise DomainError("δ′ must lie in (0, 1/5)")
        if max(abs(self.u1), abs(self.u2), abs(self.u3)) >= self.delta_prime:
            raise DomainError("shifts must satisfy |u_i| < δ′")

    def conjugate(self) -> "ShiftParams":
        c = complex.conjugate
        return ShiftParams(c(complex(self.u1)), c(complex(self.u2)), c(complex(self.u3)),
                           c(complex(self.s)), self.delta_prime)


# ---------------------------------------------------------------------------
# prime sums


@lru_cache(maxsize=8)
def primes_upto(n: int) -> np.ndarray:
    spf = smallest_prime_factors(max(int(n), 2))
    idx = np.arange(len(spf))
    return idx[(spf == idx) & (idx >= 2)].astype(np.int64)


@lru_cache(maxsize=None)
def _mobius_small(m: int) -> int:
    out = 1
    for _, e in factorize(m).items():
        if e > 1:
            return 0
        out = -out
    return out


def prime_zeta(w: complex) -> complex:
    """P(w) = Σ_p p^{-w} via Σ_m μ(m)/m · log ζ(mw), for Re w ≥ 1.05.

    Above Re w = 1.05 the principal logarithm of ζ agrees with the Euler
    product logarithm, since log ζ(Re w) < π there.
    """
    w = complex(w)
    if w.real < 1.05:
        raise DomainError("prime zeta evaluated only for Re w >= 1.05")
    ms = [m for m in range(1, 200) if _mobius_small(m) != 0 and m * w.real * math.log(2) < 45]
    vals = zeta(np.array([m * w for m in ms]))
    return complex(sum(_mobius_small(m) / m * np.log(v) for m, v in zip(ms, vals)))


def prime_tail(w: complex, cutoff: int) -> complex:
    """Σ_{p > cutoff} p^{-w}."""
    ps = primes_upto(cutoff).astype(float)
    return prime_zeta(w) - complex(np.sum(np.exp(-complex(w) * np.log(ps))))


def prime_tail_array(w, cutoff: int) -> np.ndarray:
    """Vectorised ``prime_tail`` over an array of exponents."""
    w = np.asarray(w, dtype=complex)
    flat = w.ravel()
    if flat.size == 0:
        return w.copy()
    low = float(flat.real.min())
    if low < 1.05:
        raise DomainError("prime zeta evaluated only for Re w >= 1.05")
    ms = [m for m in range(1, 200) if _mobius_small(m) != 0 and m * low * math.log(2) < 45]
    out = np.zeros(flat.shape, dtype=complex)
    for m in ms:
        out += _mobius_small(m) / m * np.log(zeta(m * flat))
    logp = np.log(primes_upto(cutoff).astype(float))
    for i in range(0, flat.size, 1024):
        out[i:i + 1024] -= np.exp(-np.outer(flat[i:i + 1024], logp)).sum(axis=1)
    return out.reshape(w.shape)


def integer_tail_bound(beta: float, cutoff: int) -> float:
    """Upper bound for Σ_{n > cutoff} n^{-β}."""
    if beta <= 1:
        return math.inf
    return cutoff ** (1 - beta) / (beta - 1)


# ---------------------------------------------------------------------------
# exact power series in one variable


def series_mul(a, b, order=SERIES_ORDER):
    out = [Fraction(0)] * (order + 1)
    for i, x in enumerate(a[: order + 1]):
        if x:
            for j, y in enumerate(b[: order + 1 - i]):
                out[i + j] += x * y
    return out


def series_log(a, order=SERIES_ORDER):
    """Coefficients of log(a(y)) for a power series with a(0) = 1."""
    if a[0] != 1:
        raise DomainError("log series needs constant term 1")
    a = list(a) + [Fraction(0)] * (order + 1 - len(a))
    c = [Fraction(0)] * (order + 1)
    for n in range(1, order + 1):
        acc = n * a[n]
        for i in range(1, n):
            acc -= i * c[i] * a[n - i]
        c[n] = acc / n
    return c


def _one_minus_y_power(e: int, order=SERIES_ORDER):
    return [Fraction((-1) ** i * math.comb(e, i)) for i in range(min(e, order) + 1)]


@lru_cache(maxsize=None)
def binomial_square_log_series(k: int) -> tuple:
    """log of (1-y)^{k²} Σ_m C(k+m-1, m)² y^m as exact coefficients."""
    inner = [Fraction(math.comb(k + m - 1, m) ** 2) for m in range(SERIES_ORDER + 1)]
    return tuple(series_log(series_mul(_one_minus_y_power(k * k), inner)))


@lru_cache(maxsize=None)
def g4_route_log_series() -> tuple:
    """log of (1-y)^9 (1 + Σ_j G₄(1,p^j)² (1-y) y^j) with y = 1/p, exactly.

    At z = 1, G₄(1, p^j)(1 - y) = τ₄(p^j)𝒬_j(y) - τ₄(p^{j-1})𝒬_{j-1}(y).
    """
    def q_coeffs(j):
        if j == 0:
            return [Fraction(1)]
        return [Fraction(1), Fraction(-3 * j, j + 1), Fraction(3 * j, j + 2), Fraction(-j, j + 3)]

    geometric = [Fraction(1)] * (SERIES_ORDER + 1)
    total = [Fraction(0)] * (SERIES_ORDER + 1)
    for j in range(1, SERIES_ORDER + 1):
        hi = [math.comb(j + 3, 3) * c for c in q_coeffs(j)]
        lo = [math.comb(j + 2, 3) * c for c in q_coeffs(j - 1)]
        poly = [(hi[i] if i < len(hi) else 0) - (lo[i] if i < len(lo) else 0) for i in range(4)]
        sq = series_mul(poly, poly)
        for i, v in enumerate(sq):
            if i + j <= SERIES_ORDER:
                total[i + j] += v
    total = series_mul(total, geometric)
    total[0] += 1
    return tuple(series_log(series_mul(_one_minus_y_power(9), total)))


def _accelerated_tail(log_coeffs, w: complex, cutoff: int, accelerate: int = 6):
    """Σ_{p > cutoff} Σ_n c_n p^{-nw} with orders ≤ ``accelerate`` summed exactly.

    Returns (tail, bound, (c, β)) where the bound covers the remaining orders.
    """
    sigma = complex(w).real
    tail = 0.0 + 0.0j
    bound = 0.0
    leading = None
    for n, c in enumerate(log_coeffs):
        if n == 0 or c == 0:
            continue
        c = complex(c)
        if n <= accelerate and n * sigma >= 1.05:
            tail += c * prime_tail(n * w, cutoff)
            continue
        if leading is None:
            leading = (abs(c), n * sigma)
        bound += abs(c) * integer_tail_bound(n * sigma, cutoff)
    return tail, bound, leading or (0.0, math.inf)


def _finish(log_sum, tail, bound, spec: EulerProductSpec, model, what: str) -> ProductValue:
    if spec.tail_model is not None:
        c, beta = spec.tail_model
        bound = c * integer_tail_bound(beta, spec.prime_cutoff)
        model = tuple(spec.tail_model)
    value = np.exp(log_sum + tail)
    abs_bound = abs(value) * math.expm1(bound) if math.isfinite(bound) else math.inf
    # double-precision rounding in the log sum and its exponential
    abs_bound += abs(value) * 64 * np.finfo(float).eps * (1 + abs(log_sum))
    if not abs_bound <= spec.target_tolerance:
        raise PrecisionError(
            f"{what}: tail bound {abs_bound:.3e} exceeds tolerance {spec.target_tolerance:.1e}",
            value, abs_bound)
    return ProductValue(complex(value), abs_bound, spec.prime_cutoff, model)


def _log_binomial_square_factor(k: int, y: np.ndarray) -> np.ndarray:
    """log[(1-y)^{k²} Σ_m C(k+m-1,m)² y^m], the inner series summed to machine tail."""
    acc = np.zeros_like(y)
    term_y = np.ones_like(y)
    for m in range(1, 10_000):
        term_y = term_y * y
        term = math.comb(k + m - 1, m) ** 2 * term_y
        acc += term
        if m > 2 and np.all(np.abs(term) <= 1e-18 * np.abs(1 + acc)):
            break
    return k * k * np.log1p(-y) + np.log1p(acc)


# ---------------------------------------------------------------------------
# constants


def g_constant(k: int) -> Fraction:
    """g_k = (k²)! Π_{j<k} j!/(k+j)!, an integer."""
    if not 1 <= k <= 8:
        raise DomainError("g_k is provided for 1 <= k <= 8")
    out = Fraction(math.factorial(k * k))
    for j in range(k):
        out *= Fraction(math.factorial(j), math.factorial(k + j))
    return out


def a_constant(k: int, spec: EulerProductSpec = EulerProductSpec()) -> ProductValue:
    """a_k = Π_p (1-1/p)^{k²} Σ_m C(k+m-1,m)² p^{-m}."""
    if not 1 <= k <= 6:
        raise DomainError("a_k is provided for 1 <= k <= 6")
    y = 1.0 / primes_upto(spec.prime_cutoff).astype(float)
    log_sum = math.fsum(_log_binomial_square_factor(k, y))
    tail, bound, model = _accelerated_tail(binomial_square_log_series(k), 1.0, spec.prime_cutoff)
    return _finish(log_sum, tail.real, bound, spec, model, f"a_{k}")


def G4_closed_array(p, j, z):
    """Vectorised G₄(z, p^j) closed form, including j = 0."""
    p = np.asarray(p, dtype=float)
    j = np.asarray(j)
    x = p ** (-z)
    tau_hi = (j + 1) * (j + 2) * (j + 3) / 6
    tau_lo = j * (j + 1) * (j + 2) / 6
    val = p / (p - 1) * (tau_hi * Q_poly(j, x) - p ** (z - 1) * tau_lo * Q_poly(np.maximum(j - 1, 0), x))
    return np.where(j == 0, 1.0, val)


def _g4_local_sum(p: np.ndarray, z1, z2, weight, j_max=None, tol=1e-18):
    """Σ_{j≥1} G₄(z1,p^j) G₄(z2,p^j) weight(j) over a vector of primes."""
    total = np.zeros(p.shape, dtype=complex)
    j = 1
    while True:
        term = G4_closed_array(p, j, z1) * G4_closed_array(p, j, z2) * weight(j)
        total += term
        if j_max is not None:
            if j >= j_max:
                return total
        elif j > 3 and np.all(np.abs(term) <= tol * np.abs(1 + total)):
            return total
        j += 1


def a4_local_via_G4(p, j_max=None) -> np.ndarray:
    """(1-1/p)⁹ (1 + Σ_j G₄(1,p^j)² (1-1/p) p^{-j}) for a vector of primes."""
    p = np.asarray(p, dtype=float)
    inner = _g4_local_sum(p, 1.0, 1.0, lambda j: (1 - 1 / p) * p ** (-float(j)), j_max)
    return (1 - 1 / p) ** 9 * (1 + inner.real)


def a4_via_G4(spec: EulerProductSpec = EulerProductSpec(), j_max=None) -> ProductValue:
    """Second route to a₄ through squares of G₄(1, p^j)."""
    p = primes_upto(spec.prime_cutoff).astype(float)
    inner = _g4_local_sum(p, 1.0, 1.0, lambda j: (1 - 1 / p) * p ** (-float(j)), j_max).real
    log_sum = math.fsum(9 * np.log1p(-1 / p) + np.log1p(inner))
    tail, bound, model = _accelerated_tail(g4_route_log_series(), 1.0, spec.prime_cutoff)
    return _finish(log_sum, tail.real, bound, spec, model, "a_4 via G_4")


def Z1(s: complex, spec: EulerProductSpec = FUNCTION_SPEC, eps0: float = 0.01) -> ProductValue:
    """Z₁(s) = Π_p (1 - p^{-1-2s})^{16} Σ_r C(r+3,3)² p^{-r(1+2s)}."""
    s = complex(s)
    if s.real <= -0.25 + eps0:
        raise DomainError("Z_1 is evaluated only for Re s > -1/4 + ε₀")
    w = 1 + 2 * s
    p = primes_upto(spec.prime_cutoff).astype(float)
    y = np.exp(-w * np.log(p))
    log_sum = complex(np.sum(_log_binomial_square_factor(4, y)))
    tail, bound, model = _accelerated_tail(binomial_square_log_series(4), w, spec.prime_cutoff)
    return _finish(log_sum, tail, bound, spec, model, "Z_1")


# ---------------------------------------------------------------------------
# Laurent polynomials in X₁, X₂, X₃ with rational coefficients


class LaurentPoly(dict):
    """Sparse polynomial {(e1, e2, e3): Fraction} in X₁^{e1} X₂^{e2} X₃^{e3}."""

    @classmethod
    def const(cls, c):
        return cls({(0, 0, 0): Fraction(c)}) if c else cls()

    @classmethod
    def monomial(cls, c, e1=0, e2=0, e3=0):
        return cls({(e1, e2, e3): Fraction(c)})

    def __add__(self, other):
        out = LaurentPoly(self)
        for key, v in other.items():
            out[key] = out.get(key, Fraction(0)) + v
            if out[key] == 0:
                del out[key]
        return out

    def __neg__(self):
        return LaurentPoly({k: -v for k, v in self.items()})

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, other):
        if not isinstance(other, LaurentPoly):
            return LaurentPoly({k: v * other for k, v in self.items() if v * other})
        out = LaurentPoly()
        for k1, v1 in self.items():
            for k2, v2 in other.items():
                key = (k1[0] + k2[0], k1[1] + k2[1], k1[2] + k2[2])
                out[key] = out.get(key, Fraction(0)) + v1 * v2
        return LaurentPoly({k: v for k, v in out.items() if v})

    __rmul__ = __mul__

    def evaluate(self, x1, x2, x3=1.0):
        return sum(float(v) * x1 ** e[0] * x2 ** e[1] * x3 ** e[2] for e, v in self.items())

    def swap12(self):
        return LaurentPoly({(e[1], e[0], e[2]): v for e, v in self.items()})


def _alpha(var: int):
    """α_0..α_3 for X_var: coefficients of U^j in τ₄(p)𝒬₁(UX) - X^{-1}."""
    m = LaurentPoly.monomial

    def x(c, e):
        return m(c, e, 0) if var == 1 else m(c, 0, e)

    return [x(4, 0) + x(-1, -1), x(-6, 1), x(4, 2), x(-1, 3)]


def _beta(var: int):
    """β_0..β_3 for X_var: coefficients of U^j in τ₄(p²)𝒬₂(UX) - X^{-1}τ₄(p)𝒬₁(UX)."""
    m = LaurentPoly.monomial

    def x(c, e):
        return m(c, e, 0) if var == 1 else m(c, 0, e)

    return [x(10, 0) + x(-4, -1), x(-20, 1) + x(6, 0), x(15, 2) + x(-4, 1), x(-4, 3) + x(1, 2)]


def _convolve(a, b):
    out = [LaurentPoly() for _ in range(7)]
    for i, x in enumerate(a):
        for j, y in enumerate(b):
            out[i + j] = out[i + j] + x * y
    return out


def _tilde(coeffs, k):
    return sum((LaurentPoly(coeffs[k - i]) * (i + 1) for i in range(k + 1) if k - i <= 6), LaurentPoly())


def _product_series_W():
    """W-coefficients a_0, a_1, a_2 of (1-W)^16 (1-X₁⁻¹X₂⁻¹W)(1-X₁⁻¹W)^{-4}(1-X₂⁻¹W)^{-4}."""
    m = LaurentPoly.monomial
    factors = [
        [LaurentPoly.const(math.comb(16, n) * (-1) ** n) for n in range(3)],
        [LaurentPoly.const(1), m(-1, -1, -1), LaurentPoly()],
        [m(math.comb(n + 3, 3), -n, 0) for n in range(3)],
        [m(math.comb(n + 3, 3), 0, -n) for n in range(3)],
    ]
    acc = [LaurentPoly.const(1), LaurentPoly(), LaurentPoly()]
    for f in factors:
        acc = [sum((acc[i] * f[n - i] for i in range(n + 1)), LaurentPoly()) for n in range(3)]
    return acc


def Yp_stated() -> LaurentPoly:
    """Y_p as written in closed form."""
    m = LaurentPoly.monomial
    terms = [(-6, 0, -2), (-6, -2, 0), (-16, -1, -1), (4, -1, -2), (4, -2, -1), (-1, -2, -2),
             (-36, 0, 0), (24, 0, -1), (24, -1, 0)]
    return sum((m(c, e1, e2) for c, e1, e2 in terms), LaurentPoly())


@lru_cache(maxsize=1)
def local_expansion():
    """Exact coefficients of the expansion of 𝓘_p to second order in (U, W).

    Returns a dict with keys 'A0', 'A1', 'B0', 'a1', 'a2', 'Yp', 'U2', 'UW', 'W2'.
    The coefficient of W² is B̃₀ + Ã₀a₁ + a₂.
    """
    A = _convolve(_alpha(1), _alpha(2))
    B = _convolve(_beta(1), _beta(2))
    a = _product_series_W()
    A0t, B0t = _tilde(A, 0), _tilde(B, 0)
    yp = B0t + A0t * a[1] + a[2]
    x3 = LaurentPoly.monomial(1, 0, 0, 1)
    return {
        "A0": A[0], "A1": A[1], "B0": B[0], "a1": a[1], "a2": a[2], "A0_tilde": A0t,
        "Yp": yp,
        "U2": -(x3 * A[0]),
        "UW": _tilde(A, 1),
        "W2": yp,
        "W1": A0t + a[1],
    }


@dataclass(frozen=True)
class YpCheck:
    exact_match: bool
    max_numeric_error: float
    coefficients: dict


def Yp_identity_check(x1_inv=None, x2_inv=None, samples: int = 50, seed: int = 1) -> YpCheck:
    """Compare the expansion B̃₀ + Ã₀a₁ + a₂ with the stated Y_p.

    The comparison is coefficientwise over Q, then numeric at the given point
    (x1_inv, x2_inv = X₁⁻¹, X₂⁻¹) or at random points in the annulus
    0.9 ≤ |X| ≤ 1.1.
    """
    derived = local_expansion()["Yp"]
    stated = Yp_stated()
    exact = (derived - stated) == LaurentPoly()
    if x1_inv is not None:
        points = [(1 / complex(x1_inv), 1 / complex(x2_inv))]
    else:
        rng = random.Random(seed)
        points = [tuple(cmath.rect(rng.uniform(0.9, 1.1), rng.uniform(0, 2 * math.pi)) for _ in range(2))
                  for _ in range(samples)]
    err = 0.0
    for x1, x2 in points:
        lhs = _yp_from_definitions_numeric(x1, x2)
        rhs = stated.evaluate(x1, x2)
        err = max(err, abs(lhs - rhs) / max(1.0, abs(rhs)))
    coeffs = {k: v for k, v in sorted(derived.items())}
    return YpCheck(exact, err, coeffs)


def _yp_from_definitions_numeric(x1: complex, x2: complex) -> complex:
    """B̃₀ + Ã₀a₁ + a₂ in floating point, independent of the exact expansion."""
    al = lambda X: [4 - 1 / X, -6 * X, 4 * X**2, -X**3]
    be = lambda X: [10 - 4 / X, -20 * X + 6, 15 * X**2 - 4 * X, -4 * X**3 + X**2]
    A0 = al(x1)[0] * al(x2)[0]
    B0 = be(x1)[0] * be(x2)[0]
    # W-series of the product by multiplying truncated numeric series
    series = [1.0, 0.0, 0.0]
    factors = [
        [1.0, -16.0, 120.0],
        [1.0, -1 / (x1 * x2), 0.0],
        [1.0, 4 / x1, 10 / x1**2],
        [1.0, 4 / x2, 10 / x2**2],
    ]
    for f in factors:
        series = [sum(series[i] * f[n - i] for i in range(n + 1)) for n in range(3)]
    return B0 + A0 * series[1] + series[2]


# ---------------------------------------------------------------------------
# 𝓘_p, 𝓘 and ℋ


def _X(p, u):
    return np.exp(-u * np.log(p))


def scrI_local(params: ShiftParams, p) -> np.ndarray:
    """𝓘_p(u₁,u₂,u₃,s) for a vector of primes, summing the j-series to machine tail."""
    p = np.asarray(p, dtype=float)
    u1, u2, u3, s = (complex(v) for v in (params.u1, params.u2, params.u3, params.s))
    logp = np.log(p)
    W = np.exp(-(1 + 2 * s) * logp)
    U2X3 = np.exp(-(2 + u3) * logp)
    log_pi = (16 * np.log1p(-W) + np.log1p(-np.exp((u1 + u2) * logp) * W)
              - 4 * np.log1p(-np.exp(u1 * logp) * W) - 4 * np.log1p(-np.exp(u2 * logp) * W))
    series = _g4_local_sum(p, 1 + u1, 1 + u2, lambda j: W ** (j - 1) * (W - U2X3))
    return np.exp(log_pi) * (1 + series)


def _monomial_value(poly: LaurentPoly, p, u1, u2, u3):
    p = np.asarray(p, dtype=float)
    out = np.zeros(p.shape, dtype=complex)
    for (e1, e2, e3), c in poly.items():
        out += float(c) * np.exp(-(e1 * u1 + e2 * u2 + e3 * u3) * np.log(p))
    return out


def _monomial_tail(poly: LaurentPoly, base: complex, u1, u2, u3, cutoff: int) -> complex:
    """Σ_{p>cutoff} p^{-base} Σ c X₁^{e1}X₂^{e2}X₃^{e3}."""
    return sum(float(c) * prime_tail(base + e1 * u1 + e2 * u2 + e3 * u3, cutoff)
               for (e1, e2, e3), c in poly.items())


def theta_exponent(sigma: float) -> float:
    """ϑ(σ): -2 for σ ≥ 0, -2-2σ on [-1/4, 0), -3-6σ on [-1/2, -1/4)."""
    if sigma >= 0:
        return -2.0
    if sigma >= -0.25:
        return -2 - 2 * sigma
    if sigma >= -0.5:
        return -3 - 6 * sigma
    raise DomainError("ϑ(σ) is defined for σ >= -1/2")


def _fitted_tail_model(residual, p, beta):
    """c with |residual_p| ≤ c p^{-β} over the largest sampled primes, padded 4×."""
    top = slice(max(0, len(p) - 200), len(p))
    c = float(np.max(np.abs(residual[top]) * p[top] ** beta)) if len(p) else 0.0
    return 4 * c


def scrI(params: ShiftParams, spec: EulerProductSpec = FUNCTION_SPEC) -> ProductValue:
    """𝓘(u₁,u₂,u₃,s) = Π_p 𝓘_p with second-order terms summed exactly above P."""
    u1, u2, u3, s = (complex(v) for v in (params.u1, params.u2, params.u3, params.s))
    if s.real <= -0.25 + params.delta_prime:
        raise DomainError("𝓘 is evaluated only for Re s > -1/4 + δ′")
    p = primes_upto(spec.prime_cutoff).astype(float)
    local = scrI_local(params, p)
    logs = np.log(local)
    log_sum = complex(np.sum(logs))
    exp = local_expansion()
    w = 1 + 2 * s
    second = (_monomial_value(exp["U2"], p, u1, u2, u3) * p**-2.0
              + _monomial_value(exp["UW"], p, u1, u2, u3) * np.exp(-(1 + w) * np.log(p))
              + _monomial_value(exp["W2"], p, u1, u2, u3) * np.exp(-2 * w * np.log(p)))
    tail = (_monomial_tail(exp["U2"], 2.0, u1, u2, u3, spec.prime_cutoff)
            + _monomial_tail(exp["UW"], 1 + w, u1, u2, u3, spec.prime_cutoff)
            + _monomial_tail(exp["W2"], 2 * w, u1, u2, u3, spec.prime_cutoff))
    shift = sum(abs(v.real) for v in (u1, u2, u3))
    beta = min(3.0, 2 + w.real, 1 + 2 * w.real, 3 * w.real) - shift
    c = _fitted_tail_model(logs - second, p, beta)
    bound = c * integer_tail_bound(beta, spec.prime_cutoff)
    return _finish(log_sum, tail, bound, spec, (c, beta), "𝓘")


def _check_poles(params: ShiftParams, min_distance: float = 1e-3):
    u1, u2, u3, s = (complex(v) for v in (params.u1, params.u2, params.u3, params.s))
    for pole in ((1 + u3) / 2, 0.0, (u1 + u2) / 2):
        if abs(s - pole) < min_distance:
            raise PoleError(f"s = {s} is within {min_distance} of the pole at {pole}")


def zeta_quotient(params: ShiftParams) -> complex:
    """ζ(2s-u₃) ζ(1+2s)^16 ζ(1+2s-u₁-u₂) / (ζ(1+2s-u₁)^4 ζ(1+2s-u₂)^4)."""
    u1, u2, u3, s = (complex(v) for v in (params.u1, params.u2, params.u3, params.s))
    z = zeta(np.array([2 * s - u3, 1 + 2 * s, 1 + 2 * s - u1 - u2, 1 + 2 * s - u1, 1 + 2 * s - u2]))
    return complex(z[0] * z[1] ** 16 * z[2] / (z[3] ** 4 * z[4] ** 4))


def scrH_factored(params: ShiftParams, spec: EulerProductSpec = FUNCTION_SPEC) -> ProductValue:
    """ℋ as the zeta quotient times 𝓘."""
    s = complex(params.s)
    if s.real <= -0.25 + params.delta_prime:
        raise DomainError("factored ℋ is evaluated only for Re s > -1/4 + δ′")
    _check_poles(params)
    quotient = zeta_quotient(params)
    prod = scrI(params, spec)
    return ProductValue(quotient * prod.value, abs(quotient) * prod.tail_bound,
                        prod.prime_cutoff, prod.tail_model)


def _check_direct_region(params: ShiftParams):
    s, u3 = complex(params.s), complex(params.u3)
    if (2 * s - u3).real <= 1 or s.real <= 0.5 + 2 * params.delta_prime:
        raise DomainError("direct ℋ needs Re(2s-u₃) > 1 and Re s > 1/2 + 2δ′")


def ramanujan_prime_power(a: int, b: int, p: int) -> int:
    """c_{p^a}(p^b) for b ≥ 0 (b = ∞ is not needed here)."""
    if a == 0:
        return 1
    if a <= b:
        return p**a - p ** (a - 1)
    if a == b + 1:
        return -(p**b)
    return 0


def scrH_direct_local(params: ShiftParams, p, tol: float = 1e-18) -> np.ndarray:
    """(1 - p^{-c}) Σ_{a,b≥0} c_{p^a}(p^b) α_{p^a} p^{-bc}, with c = 2s - u₃.

    α_q = G₄(1+u₁,q) G₄(1+u₂,q) q^{-2-u₃}.  Because (q, r) ↦ c_q(r) α_q r^{-c}
    factors over primes, ℋ is the product of these two-variable local sums;
    the factor (1 - p^{-c}) removes ζ(c), which is restored by the caller.
    """
    p = np.asarray(p, dtype=float)
    u1, u2, u3, s = (complex(v) for v in (params.u1, params.u2, params.u3, params.s))
    c = 2 * s - u3
    logp = np.log(p)
    # scaled[a] = p^a α_{p^a}, which stays bounded for every prime
    scaled = [np.ones(p.shape, dtype=complex)]
    a = 1
    while True:
        g = G4_closed_array(p, a, 1 + u1) * G4_closed_array(p, a, 1 + u2)
        scaled.append(g * np.exp(-a * (1 + u3) * logp))
        if a > 3 and np.all(np.abs(scaled[-1]) <= tol):
            break
        a += 1
    a_max = len(scaled) - 1
    # running[b] = Σ_{a≤b} φ(p^a) α_{p^a}; the a = b+1 term is -p^b α_{p^{b+1}}
    phi_alpha = [scaled[0]] + [(1 - 1 / p) * scaled[k] for k in range(1, a_max + 1)]
    running = np.cumsum(np.array(phi_alpha), axis=0)
    pc = np.exp(-c * logp)
    total = np.zeros(p.shape, dtype=complex)
    weight = np.ones(p.shape, dtype=complex)
    b = 0
    while True:
        inner = running[min(b, a_max)]
        if b + 1 <= a_max:
            inner = inner - scaled[b + 1] / p
        term = weight * inner
        total += term
        if b > a_max and np.all(np.abs(term) <= tol * np.abs(total)):
            break
        weight = weight * pc
        b += 1
    return (1 - pc) * total


@dataclass(frozen=True)
class DirectSum:
    value: complex
    r_tail_bound: float
    q_tail_bound: float
    r_max: int | None
    q_max: int | None

    @property
    def tail_bound(self) -> float:
        return self.r_tail_bound + self.q_tail_bound

    def __complex__(self):
        return complex(self.value)


def scrH_direct(params: ShiftParams, r_max: int | None = None, q_max: int | None = None,
                tables: ArithTables | None = None,
                spec: EulerProductSpec = FUNCTION_SPEC) -> DirectSum:
    """ℋ summed from its defining double series over r and q.

    With integer r_max and q_max this is the literal truncated sum
    Σ_{r≤r_max} Σ_{q≤q_max} c_q(r) α_q r^{-c}, computed exactly by grouping
    r into multiples of d | q.  ``r_max=None`` completes the r-sum with ζ(c).
    ``q_max=None`` completes the q-sum as well by multiplying the
    two-variable local sums over all primes (see ``scrH_direct_local``).
    """
    _check_direct_region(params)
    u1, u2, u3, s = (complex(v) for v in (params.u1, params.u2, params.u3, params.s))
    c = 2 * s - u3
    zeta_c = zeta(c)
    if q_max is None:
        if r_max is not None:
            raise DomainError("a completed q-sum needs a completed r-sum")
        p = primes_upto(spec.prime_cutoff).astype(float)
        local = scrH_direct_local(params, p)
        logs = np.log(local)
        # leading behaviour from G₄(1+u,p) = 4 - p^u + O(p^{u-1}):
        # log factor = A₀ p^{-1-2s} - A₀ X₃ p^{-2} + smaller terms
        exp = local_expansion()
        w = 1 + 2 * s
        first = (_monomial_value(exp["A0"], p, u1, u2, u3) * np.exp(-w * np.log(p))
                 + _monomial_value(exp["U2"], p, u1, u2, u3) * p**-2.0)
        tail = (_monomial_tail(exp["A0"], w, u1, u2, u3, spec.prime_cutoff)
                + _monomial_tail(exp["U2"], 2.0, u1, u2, u3, spec.prime_cutoff))
        shift = sum(abs(v.real) for v in (u1, u2, u3))
        beta = min(3.0, 2 + w.real, 2 * w.real) - shift
        cst = _fitted_tail_model(logs - first, p, beta)
        bound = cst * integer_tail_bound(beta, spec.prime_cutoff)
        value = zeta_c * np.exp(np.sum(logs) + tail)
        return DirectSum(complex(value), 0.0, abs(value) * math.expm1(bound), None, None)

    q_max = int(q_max)
    if tables is None or tables.limit < q_max:
        tables = build_tables(max(q_max, 2), ks=(2,))

    def alpha_local(pp, e):
        return (G4_closed_array(pp, e, 1 + u1) * G4_closed_array(pp, e, 1 + u2)
                * np.exp(-e * (2 + u3) * np.log(pp.astype(float))))

    alpha = multiplicative_table(tables, alpha_local, q_max)
    mu = tables.mu[: q_max + 1].astype(float)
    beta_d = _mobius_inner(alpha, mu, q_max) * np.arange(q_max + 1)
    d = np.arange(1, q_max + 1, dtype=float)
    d_pow = np.exp(-c * np.log(d))
    sigma_c = c.real
    if r_max is None:
        value = zeta_c * np.sum(beta_d[1:] * d_pow)
        r_bound = 0.0
    else:
        r_max = int(r_max)
        partial = np.concatenate([[0.0], np.cumsum(np.exp(-c * np.log(np.arange(1, r_max + 1, dtype=float))))])
        counts = r_max // np.arange(1, q_max + 1)
        value = np.sum(beta_d[1:] * d_pow * partial[counts])
        r_tail = np.where(counts > 0, np.maximum(counts, 1) ** (1 - sigma_c) / (sigma_c - 1),
                          float(zeta(sigma_c).real))
        r_bound = float(np.sum(np.abs(beta_d[1:]) * d ** (-sigma_c) * r_tail))
    q_bound = _q_tail_bound(params, tables, alpha, q_max, sigma_c)
    return DirectSum(complex(value), r_bound, q_bound, r_max, q_max)


def _mobius_inner(alpha: np.ndarray, mu: np.ndarray, n: int) -> np.ndarray:
    """inner[d] = Σ_{m ≤ n/d} μ(m) α[dm] for d = 1..n (hyperbola split)."""
    out = np.zeros(n + 1, dtype=complex)
    root = math.isqrt(n)
    for m in range(1, root + 1):
        if mu[m]:
            top = n // m
            out[1: top + 1] += mu[m] * alpha[m: m * top + 1: m]
    for d in range(1, n // (root + 1) + 1):
        lo, hi = root + 1, n // d
        if hi >= lo:
            out[d] += np.dot(mu[lo: hi + 1], alpha[d * lo: d * hi + 1: d])
    return out


def _q_tail_bound(params: ShiftParams, tables, alpha, q_max: int, sigma_c: float) -> float:
    """Bound on Σ_{q>q_max} Σ_r |c_q(r) α_q r^{-c}| using |c_q(r)| ≤ gcd(q, r).

    Σ_r gcd(q,r) r^{-σ} = ζ(σ) Σ_{d|q} φ(d) d^{-σ}, so the tail is ζ(σ) times
    the tail of the multiplicative majorant m(q) = |α_q| Σ_{d|q} φ(d) d^{-σ}.
    That tail equals the full majorant product minus its partial sum; the
    product is taken over primes up to 10·q_max and bounded beyond through
    the pointwise bound on the local factor of G₄.
    """
    u1, u2, u3 = (complex(v) for v in (params.u1, params.u2, params.u3))

    def gcd_weight(pp, e):
        pp = pp.astype(float)
        total = np.ones(pp.shape)
        for i in range(1, int(np.max(e)) + 1 if np.size(e) else 1):
            total = total + np.where(e >= i, (pp**i - pp ** (i - 1)) * pp ** (-i * sigma_c), 0.0)
        return total

    weights = multiplicative_table(tables, gcd_weight, q_max, dtype=float)
    partial = float(np.sum(np.abs(alpha[1:]) * weights[1:]))
    cutoff = 10 * q_max
    p = primes_upto(cutoff).astype(float)
    local = np.ones(p.shape)
    j = 1
    gsum = np.ones(p.shape)
    while True:
        gsum = gsum + (p**j - p ** (j - 1)) * p ** (-j * sigma_c)
        term = (np.abs(G4_closed_array(p, j, 1 + u1) * G4_closed_array(p, j, 1 + u2))
                * p ** (-j * (2 + u3.real)) * gsum)
        local += term
        if j > 3 and np.all(term <= 1e-18 * local):
            break
        j += 1
    log_full = float(np.sum(np.log(local)))
    # primes beyond the cutoff: |G₄(1+u,p^j)| ≤ 2τ₄(p^j)(1+p^{-1-Re u})³(1+p^{Re u})
    re1, re2 = u1.real, u2.real
    lead = 4 * 4 * (1 + cutoff ** (-1 - re1)) ** 3 * (1 + cutoff ** (-1 - re2)) ** 3 * 4
    beta = 1 + sigma_c + u3.real - max(re1, 0) - max(re2, 0)
    log_full += 2 * lead * integer_tail_bound(beta, cutoff)
    full = math.exp(log_full)
    return float(zeta(sigma_c).real) * max(full - partial, 0.0)


# ---------------------------------------------------------------------------
# local-factor remainder and g_j(s)


def scrI_remainder(params: ShiftParams, p, statement_sign: bool = True) -> np.ndarray:
    """𝓘_p - 1 ± Y_p p^{-2-4s}.

    ``statement_sign=True`` removes -Y_p W² (the expansion as stated);
    False removes +Y_p W², the sign produced by expanding the local factor.
    """
    p = np.asarray(p, dtype=float)
    u1, u2, u3, s = (complex(v) for v in (params.u1, params.u2, params.u3, params.s))
    yp = _monomial_value(local_expansion()["Yp"], p, u1, u2, u3)
    w2 = np.exp(-(2 + 4 * s) * np.log(p))
    main = 1 - yp * w2 if statement_sign else 1 + yp * w2
    return scrI_local(params, p) - main


def remainder_decay_exponent(params: ShiftParams, p_lo: int = 100, p_hi: int = 1000,
                             statement_sign: bool = True) -> float:
    """Least-squares slope of log|remainder| against log p over primes in [p_lo, p_hi]."""
    p = primes_upto(p_hi)
    p = p[p >= p_lo].astype(float)
    rem = np.abs(scrI_remainder(params, p, statement_sign))
    slope, _ = np.polyfit(np.log(p), np.log(rem), 1)
    return float(slope)


def g_derivative_functions(s: complex, k: int) -> complex:
    """g_k(s) for k ≤ 3 from the closed forms in ζ, ζ′, ζ″, ζ‴ at 1 + 2s."""
    if k not in (0, 1, 2, 3):
        raise DomainError("g_k(s) is provided for k = 0..3")
    s = complex(s)
    if abs(s) < 1e-3:
        raise PoleError("g_k(s) has a pole at s = 0")
    if s.real <= -0.25:
        raise DomainError("g_k(s) is evaluated only for Re s > -1/4")
    z = 1 + 2 * s
    radius = min(0.2, abs(s))
    d = [zeta_deriv(z, n, radius=radius).value for n in range(k + 1)]
    if k == 0:
        return d[0] ** 3
    if k == 1:
        return 4 * d[1] * d[0] ** 2
    if k == 2:
        return 20 * d[1] ** 2 * d[0] - 4 * d[2] * d[0] ** 2
    return 120 * d[1] ** 3 - 60 * d[1] * d[2] * d[0] + 4 * d[3] * d[0] ** 2


def g_derivative_definition(s: complex, k: int, radius: float | None = None) -> complex:
    """ζ(1+2s)^7 ∂^k/∂z^k ζ(1+2s-z)^{-4} at z = 0, by a Cauchy circle in z."""
    s = complex(s)
    base = 1 + 2 * s
    radius = radius or min(0.05, abs(base - 1) / 2)
    est = cauchy_derivative(lambda z: zeta(base - z) ** -4, 0.0, k, radius)
    return zeta(base) ** 7 * est.value


__all__ = [
    "EulerProductSpec", "ProductValue", "ShiftParams", "DirectSum", "LaurentPoly", "YpCheck",
    "a_constant", "a4_via_G4", "a4_local_via_G4", "g_constant", "Z1", "scrI", "scrI_local",
    "scrH_direct", "scrH_factored", "scrH_direct_local", "Yp_identity_check", "Yp_stated",
    "local_expansion", "g_derivative_functions", "g_derivative_definition", "theta_exponent",
    "scrI_remainder", "remainder_decay_exponent", "prime_zeta", "prime_tail", "prime_tail_array",
    "primes_upto", "zeta_quotient",
]
