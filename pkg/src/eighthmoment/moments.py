"""Critical-line moments of ζ, the smoothed functional-equation check for
|ζ|⁸, shifted moments, and the exact rational constants of the eighth moment.
"""

from __future__ import annotations

import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from importlib import resources

import numpy as np

from .arith import build_tables
from .divisor import _bump
from .errors import CapacityError, DomainError, PrecisionError
from .eulerprod import EulerProductSpec, FUNCTION_SPEC, Z1, a_constant, g_constant
from .numerics import Estimate, adaptive_line_quadrature
from .special import MAX_HEIGHT, KernelParams, kernel_V, shifted_normalizer, zeta

AFE_TERM_CAP = 5 * 10**7


# ---------------------------------------------------------------------------
# windows and requests


@dataclass(frozen=True)
class MomentWindow:
    """ω(t) = b(t/T) for the bump b supported on [1, 2], with T₀ = T/sharpness."""

    T: float
    T0: float | None = None

    def __post_init__(self):
        if not self.T > 0:
            raise DomainError("window scale T must be positive")
        if self.T0 is not None and not 0 < self.T0 <= self.T:
            raise DomainError("window smoothness scale must satisfy 0 < T0 <= T")

    @property
    def smoothness(self) -> float:
        return self.T / 10 if self.T0 is None else self.T0

    @property
    def support(self) -> tuple:
        return self.T, 2 * self.T

    def __call__(self, t, order: int = 0):
        sharp = self.T / self.smoothness
        return _bump(np.asarray(t, dtype=float) / self.T, sharp, order) / self.T**order

    def derivative_constants(self, samples: int = 4001) -> dict:
        """max |ω^{(j)}| · T₀^j for j = 0, 1, 2 on a grid over the support."""
        t = np.linspace(self.T, 2 * self.T, samples)[1:-1]
        return {j: float(np.max(np.abs(self(t, j)))) * self.smoothness**j for j in range(3)}


@dataclass(frozen=True)
class MomentRequest:
    T_lo: float
    T_hi: float
    k: float = 4.0
    step_control: float = 1e-8
    weight: MomentWindow | None = None
    threads: int = 1

    def __post_init__(self):
        if not 0 <= self.T_lo < self.T_hi:
            raise DomainError("need 0 <= T_lo < T_hi")
        if self.T_hi > MAX_HEIGHT:
            raise DomainError(f"T_hi = {self.T_hi:g} is above the ζ envelope {MAX_HEIGHT:g}")
        if not self.k >= 0.5 or (2 * self.k) != round(2 * self.k):
            raise DomainError("k must be a positive multiple of 1/2")
        if not self.step_control > 0:
            raise DomainError("step control must be positive")
        if self.weight is not None:
            lo, hi = self.weight.support
            if lo < self.T_lo or hi > self.T_hi:
                raise DomainError("window support must lie inside [T_lo, T_hi]")


def _critical_abs(t: np.ndarray, threads: int) -> np.ndarray:
    """|ζ(1/2 + it)| on a node array, split across worker threads in order."""
    if threads <= 1 or t.size < 4096:
        return np.abs(zeta(0.5 + 1j * t))
    chunks = np.array_split(t, threads)
    with ThreadPoolExecutor(threads) as pool:
        parts = list(pool.map(lambda c: np.abs(zeta(0.5 + 1j * c)), chunks))
    return np.concatenate(parts)


def _integrate(req: MomentRequest, integrand) -> Estimate:
    """Adaptive quadrature to ``step_control`` relative to a coarse first pass."""
    pieces = max(1, int(math.ceil((req.T_hi - req.T_lo) / 2)))
    coarse = adaptive_line_quadrature(integrand, req.T_lo, req.T_hi, math.inf, pieces=pieces)
    tol = req.step_control * max(abs(coarse.value), coarse.error, 1e-300)
    return adaptive_line_quadrature(integrand, req.T_lo, req.T_hi, tol, pieces=pieces)


def moment_integral(req: MomentRequest) -> Estimate:
    """∫ |ζ(1/2+it)|^{2k} ω(t) dt over [T_lo, T_hi] with ω = 1 when no window is set."""

    def integrand(t):
        val = _critical_abs(t, req.threads) ** (2 * req.k)
        return val if req.weight is None else val * req.weight(t)

    return _integrate(req, integrand)


@dataclass(frozen=True)
class ShiftedMoment:
    t0: float
    value: float
    error: float
    normalized: float


def shifted_moment(req: MomentRequest, t0: float) -> ShiftedMoment:
    """∫ |ζ(1/2+i(t+t0))|^k |ζ(1/2+i(t-t0))|^k dt, normalised by T(log T)^{k²/2}𝒢^{k²/2}.

    ``req.k`` is the exponent on each factor, so at t0 = 0 the integrand is
    |ζ|^{2k}, the same as ``moment_integral`` for the same request.
    """
    T = req.T_hi
    if abs(t0) > 0.5 * T:
        raise DomainError("shift must satisfy |t0| <= T_hi/2")
    if T + abs(t0) > MAX_HEIGHT:
        raise DomainError("shifted ordinates leave the ζ envelope")

    def integrand(t):
        if t0 == 0:
            val = _critical_abs(t, req.threads) ** (2 * req.k)
        else:
            both = _critical_abs(np.concatenate([t + t0, t - t0]), req.threads)
            val = (both[:t.size] * both[t.size:]) ** req.k
        return val if req.weight is None else val * req.weight(t)

    est = _integrate(req, integrand)
    value = float(np.real(est.value))
    k2 = req.k * req.k / 2
    norm = T * math.log(T) ** k2 * shifted_normalizer(T, t0) ** k2
    return ShiftedMoment(t0, value, est.error, value / norm)


# ---------------------------------------------------------------------------
# smoothed functional equation for |ζ|⁸


@dataclass(frozen=True)
class AfeCheck:
    t: float
    afe_value: complex
    direct_value: float
    rel_error: float
    diagonal_value: complex
    terms: int
    truncated_value: complex | None = None

    @property
    def imag_ratio(self) -> float:
        return abs(self.afe_value.imag) / abs(self.afe_value)


def _kernel_interpolant(params: KernelParams, u_lo: float, u_hi: float, tilde: bool,
                        degree: int = 200):
    """Chebyshev interpolant of u ↦ Re V_t(e^u) on [u_lo, u_hi]."""
    j = np.arange(degree)
    nodes = np.cos(np.pi * (j + 0.5) / degree)
    u = 0.5 * (u_lo + u_hi) + 0.5 * (u_hi - u_lo) * nodes
    vals = np.real(kernel_V(params, np.exp(u), tilde=tilde))
    coef = np.polynomial.chebyshev.chebfit(nodes, vals, degree - 1)

    def interp(uu):
        return np.polynomial.chebyshev.chebval((2 * uu - (u_lo + u_hi)) / (u_hi - u_lo), coef)

    return interp


def _pair_coefficients(a: np.ndarray, K: int) -> np.ndarray:
    """c[N] = Σ_{mn=N} a[m] conj(a[n]) for N ≤ K by the hyperbola split."""
    c = np.zeros(K + 1, dtype=complex)
    root = math.isqrt(K)
    for m in range(1, root + 1):
        top = K // m
        c[m:m * top + 1:m] += a[m] * np.conj(a[1:top + 1])
    for n in range(1, root + 1):
        top = K // n
        if top <= root:
            continue
        c[(root + 1) * n:top * n + 1:n] += a[root + 1:top + 1] * np.conj(a[n])
    return c


def afe_check(t: float, U_epsilon: float | None = None, L: float = 9.5,
              term_cap: int = AFE_TERM_CAP) -> AfeCheck:
    """Compare 2Σ τ₄(m)τ₄(n)(mn)^{-1/2}(m/n)^{-it} V_t(π⁴mn) with |ζ(1/2+it)|⁸.

    Products mn are cut at K = (t/2π)⁴ e^L, where V_t(π⁴K) has decayed like
    exp(-L²/16).  L is lowered to fit ``term_cap``; below L = 7 the cut
    would dominate the error and a CapacityError is raised instead.

    With ``U_epsilon`` set, the truncated kernel Ṽ_t with U = t^{1-ε} is also
    summed over the same products and returned as ``truncated_value``.
    """
    if not 20 <= t <= 60:
        raise DomainError("afe_check is calibrated for 20 <= t <= 60")
    base = (t / (2 * math.pi)) ** 4
    L = min(L, math.log(term_cap / base))
    if L < 7:
        raise CapacityError(f"term cap {term_cap} too small for t = {t:g}; raise term_cap")
    K = int(base * math.exp(L))
    if U_epsilon is not None and not 0 < U_epsilon < 1:
        raise DomainError("U_epsilon must lie in (0, 1)")
    tables = build_tables(K, ks=(4,))
    tau4 = tables.tau_k(4)
    del tables
    a = np.exp(-1j * t * np.log(np.arange(1, K + 1, dtype=float)))
    a *= tau4[1:]
    a = np.concatenate([[0j], a])
    c = _pair_coefficients(a, K)
    del a

    u_lo, u_hi = math.log(math.pi**4), math.log(math.pi**4 * K)
    kernels = [_kernel_interpolant(KernelParams(t), u_lo, u_hi, tilde=False)]
    if U_epsilon is not None:
        kernels.append(_kernel_interpolant(KernelParams(t, t ** (1 - U_epsilon)), u_lo, u_hi, tilde=True))
    sums = [0j] * len(kernels)
    chunk = 2**22
    for lo in range(1, K + 1, chunk):
        n = np.arange(lo, min(lo + chunk, K + 1), dtype=float)
        u = np.log(math.pi**4 * n)
        weights = c[lo:lo + n.size] / np.sqrt(n)
        for i, kernel in enumerate(kernels):
            sums[i] += complex(np.sum(weights * kernel(u)))
    value = 2 * sums[0]
    truncated = 2 * sums[1] if U_epsilon is not None else None

    squares = np.arange(1, math.isqrt(K) + 1)
    diag = 2 * complex(np.sum(tau4[squares] ** 2 / squares * kernels[0](np.log(math.pi**4 * squares**2.0))))

    direct = float(abs(zeta(0.5 + 1j * t)) ** 8)
    return AfeCheck(t, value, direct, abs(value.real - direct) / direct, diag, K, truncated)


# ---------------------------------------------------------------------------
# exact constants


def _data_file() -> dict:
    with resources.files(__package__).joinpath("data/offdiagonal_terms.json").open() as fh:
        return json.load(fh)


@dataclass(frozen=True)
class OffDiagonalTerm:
    """sign · (log t)^{n1} (log U⁴/t²)^{n2} / denominator."""

    sign: int
    denominator: int
    log_t_power: int
    log_ratio_power: int

    @property
    def fraction(self) -> Fraction:
        return Fraction(self.sign, self.denominator)

    @property
    def weighted(self) -> Fraction:
        # at leading order log(U⁴/t²) = 2 log T, so each power of the ratio doubles
        return self.fraction * 2**self.log_ratio_power


def _default_terms() -> tuple:
    return tuple(OffDiagonalTerm(**{k: d[k] for k in ("sign", "denominator", "log_t_power",
                                                      "log_ratio_power")})
                 for d in _data_file()["terms"])


def _default_fraction(key: str) -> Fraction:
    return Fraction(_data_file()[key])


@dataclass(frozen=True)
class ConstantLedger:
    diag_coeff: Fraction = field(default_factory=lambda: _default_fraction("diag_coeff"))
    offdiag_coeff: Fraction = field(default_factory=lambda: _default_fraction("offdiag_coeff"))
    six_fractions: tuple = field(default_factory=_default_terms)
    target: Fraction = field(default_factory=lambda: _default_fraction("target"))

    def __post_init__(self):
        if len(self.six_fractions) != 6:
            raise DomainError("the off-diagonal ledger holds exactly six terms")
        for term in self.six_fractions:
            if term.log_t_power + term.log_ratio_power != 16:
                raise DomainError("every off-diagonal term must have total log degree 16")


@dataclass(frozen=True)
class IdentityReport:
    checks: dict

    @property
    def passed(self) -> bool:
        return all(self.checks.values())

    def __bool__(self):
        return self.passed


def constant_combination_check(ledger: ConstantLedger | None = None) -> IdentityReport:
    """Exact checks: the weighted six-term sum, the reductions to /16!, and 24024."""
    ledger = ledger or ConstantLedger()
    f16 = math.factorial(16)
    weighted = sum((t.weighted for t in ledger.six_fractions), Fraction(0))
    diag16 = ledger.diag_coeff * f16
    off16 = -ledger.offdiag_coeff * f16
    checks = {
        "six_term_sum": weighted == ledger.offdiag_coeff,
        "diag_over_16!": ledger.diag_coeff == Fraction(131072, f16),
        "offdiag_over_16!": -ledger.offdiag_coeff == Fraction(107048, f16),
        "difference_is_g4": diag16 - off16 == 24024 == g_constant(4),
        "target_matches": ledger.target == (ledger.diag_coeff + ledger.offdiag_coeff),
        "diag_residue_scaling": 638512875 * 2**15 == f16,
    }
    return IdentityReport(checks)


@dataclass(frozen=True)
class DiagonalCheck:
    leading: float
    expected: float
    rel_error: float
    higher_max: float
    passed: bool
    mode: str


def _diagonal_integrand_nodes(radius: float, nodes: int, spec: EulerProductSpec):
    """s_j on |s| = radius and A(s_j)·s_j with A = ζ¹⁶(1+2s)Z₁(s)(2π)^{-4s}G(s)/s."""
    s = radius * np.exp(2j * np.pi * np.arange(nodes) / nodes)
    z1 = np.array([complex(Z1(sj, spec)) for sj in s])
    log_a = 16 * np.log(zeta(1 + 2 * s)) + np.log(z1) - 4 * s * math.log(2 * math.pi) + s**2
    return s, np.exp(log_a)


def _residue_in_log_u(s, a_times_s, logs_u):
    """Residue at 0 of A(s)U^{4s} for each log U, by the trapezoid rule on the s circle."""
    return np.exp(4 * np.outer(logs_u, s)) @ a_times_s / len(s)


def diagonal_constant_check(mode: str = "complex", radius: float = 0.02, nodes: int = 256,
                            log_u_radius: float = 25.0, log_u_nodes: int = 64,
                            spec: EulerProductSpec = FUNCTION_SPEC, rtol: float = 1e-4) -> DiagonalCheck:
    """Extract the (log U)¹⁶ coefficient of the order-17 residue and compare with 2Z₁(0)/638512875.

    ``mode="complex"`` samples log U on a circle in ℂ, so the polynomial
    coefficients come out of a discrete Fourier transform with no conditioning
    loss.  ``mode="real"`` solves the Vandermonde system at log U = 10..26 and
    raises PrecisionError when its condition number swamps the tolerance.
    """
    if mode not in ("complex", "real"):
        raise DomainError("mode must be 'complex' or 'real'")
    if not 0 < radius < 0.2:
        raise DomainError("s circle must stay inside |s| < 0.2")
    expected = 2 * float(Z1(0, spec)) / 638512875
    s, a_s = _diagonal_integrand_nodes(radius, nodes, spec)

    if mode == "real":
        logs_u = np.arange(10.0, 27.0)
        vander = np.vander(logs_u, 17, increasing=True)
        cond = np.linalg.cond(vander)
        if cond * 1e-8 > rtol:
            raise PrecisionError(
                f"real log-U Vandermonde has condition {cond:.2e}; use mode='complex'", None, cond)
        coeffs = np.linalg.solve(vander, np.real(_residue_in_log_u(s, a_s, logs_u)))
        leading, higher = coeffs[16], 0.0
    else:
        theta = 2 * np.pi * np.arange(log_u_nodes) / log_u_nodes
        logs_u = log_u_radius * np.exp(1j * theta)
        residues = _residue_in_log_u(s, a_s, logs_u)
        coeffs = np.fft.fft(residues) / log_u_nodes / log_u_radius ** np.arange(log_u_nodes)
        leading = float(np.real(coeffs[16]))
        # beyond degree 16 only rounding and aliasing should remain
        scale = np.abs(coeffs[:17]) * log_u_radius ** np.arange(17)
        higher = float(np.max(np.abs(coeffs[17:log_u_nodes // 2]) * log_u_radius
                              ** np.arange(17, log_u_nodes // 2)) / scale.max())
    rel = abs(leading - expected) / abs(expected)
    return DiagonalCheck(leading, expected, rel, higher, rel < rtol, mode)


# ---------------------------------------------------------------------------
# leading-order prediction


@lru_cache(maxsize=None)
def _a_value(k: int) -> float:
    if k == 1:
        return 1.0
    return float(a_constant(k, EulerProductSpec(prime_cutoff=10**5, target_tolerance=1e-6)))


@dataclass(frozen=True)
class Prediction:
    T: float
    k: int
    rational_factor: Fraction
    leading: float
    leading_via_24024: float | None

    @property
    def value(self) -> float:
        return self.leading


def prediction(T: float, k: int) -> Prediction:
    """g_k a_k/(k²)! · T (log T)^{k²}; for k = 4 also via the coefficient 24024/16!."""
    if not T > math.e:
        raise DomainError("prediction needs T > e")
    factor = g_constant(k) / math.factorial(k * k)
    a = _a_value(k)
    lead = float(factor) * a * T * math.log(T) ** (k * k)
    alt = None
    if k == 4:
        alt_factor = Fraction(24024, math.factorial(16))
        if alt_factor != factor:
            raise PrecisionError("g_4/16! disagrees with 24024/16!")
        alt = float(alt_factor) * a * T * math.log(T) ** 16
    return Prediction(T, k, factor, lead, alt)


__all__ = [
    "AfeCheck", "ConstantLedger", "DiagonalCheck", "IdentityReport", "MomentRequest",
    "MomentWindow", "OffDiagonalTerm", "Prediction", "ShiftedMoment", "afe_check",
    "constant_combination_check", "diagonal_constant_check", "moment_integral", "prediction",
    "shifted_moment",
]
