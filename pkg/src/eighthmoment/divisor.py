"""Smoothed shifted divisor sums and the conjectural main term.

The main term is the double circle integral around z₁ = z₂ = 1 of
ζ^k(z₁) ζ^ℓ(z₂) S(z₁, z₂) M(z₁, z₂), where

    S(z₁, z₂) = Σ_q c_q(r) G_k(z₁, q) G_ℓ(z₂, q) q^{-z₁-z₂}
    M(z₁, z₂) = ∫ f(x, x-r) x^{z₁-1} (x-r)^{z₂-1} dx.

Both circles are discretised by the trapezoid rule, so every quantity is a
matrix over node pairs.  S is multiplicative in q; by default it is summed as
an Euler product (only primes dividing r carry more than one term), with the
q-sum truncated at q_max available as a cross-check.
"""

from __future__ import annotations

import math
import time
from dataclasses import asdict, dataclass, field

import numpy as np

from .arith import ArithTables, G_k_prime_power, G_k_table, factorize, ramanujan_column
from .errors import CapacityError, ConvergenceError, DomainError, EvaluationError, PrecisionError
from .eulerprod import integer_tail_bound, prime_tail_array, primes_upto
from .numerics import ContourCircle
from .special import zeta

EPS0 = 0.01
EPS_PRIME = 0.05


# ---------------------------------------------------------------------------
# smooth weights


def _logistic_step(t, order: int = 0):
    """Smooth step S(t) = h(t)/(h(t)+h(1-t)), h(t) = exp(-1/t), and its derivatives.

    Written as S = 1/(1+e^φ) with φ = 1/t - 1/(1-t), which avoids overflow.
    """
    t = np.asarray(t, dtype=float)
    inside = (t > 0) & (t < 1)
    tc = np.where(inside, t, 0.5)
    phi = 1 / tc - 1 / (1 - tc)
    e = np.exp(-np.abs(phi))
    s = np.where(phi > 0, e / (1 + e), 1 / (1 + e))
    if order == 0:
        return np.where(t >= 1, 1.0, np.where(inside, s, 0.0))
    d1 = -1 / tc**2 - 1 / (1 - tc) ** 2
    logistic = s * (1 - s)
    if order == 1:
        return np.where(inside, -logistic * d1, 0.0)
    if order == 2:
        d2 = 2 / tc**3 - 2 / (1 - tc) ** 3
        first = -logistic * d1
        return np.where(inside, -(first * (1 - 2 * s) * d1 + logistic * d2), 0.0)
    raise DomainError("smooth step derivatives are provided up to order 2")


def _bump(u, sharpness: float, order: int = 0):
    """b(u) = S(s(u-1))·S(s(2-u)): 1 on [1+1/s, 2-1/s], zero outside (1, 2)."""
    a, c = sharpness * (np.asarray(u, dtype=float) - 1), sharpness * (2 - np.asarray(u, dtype=float))
    S = _logistic_step
    if order == 0:
        return S(a) * S(c)
    if order == 1:
        return sharpness * (S(a, 1) * S(c) - S(a) * S(c, 1))
    if order == 2:
        return sharpness**2 * (S(a, 2) * S(c) - 2 * S(a, 1) * S(c, 1) + S(a) * S(c, 2))
    raise DomainError("bump derivatives are provided up to order 2")


_LOG_SCALE = 2 / math.log(2)


def _cell(v, order: int = 0):
    """w(v) = S(v) - S(v-1), supported in [0, 2] with Σ_k w(v-k) = 1."""
    return _logistic_step(v, order) - _logistic_step(np.asarray(v) - 1, order)


def W0(u, order: int = 0):
    """Partition cell W₀(u) = w(2 log₂ u), supported in [1, 2]."""
    u = np.asarray(u, dtype=float)
    pos = np.where(u > 0, u, 1.0)
    v = _LOG_SCALE * np.log(pos)
    if order == 0:
        out = _cell(v)
    elif order == 1:
        out = _cell(v, 1) * _LOG_SCALE / pos
    elif order == 2:
        out = (_cell(v, 2) * _LOG_SCALE**2 - _cell(v, 1) * _LOG_SCALE) / pos**2
    else:
        raise DomainError("cell derivatives are provided up to order 2")
    return np.where(u > 0, out, 0.0)


@dataclass(frozen=True)
class SmoothWeight:
    """f(x, y) = b(x/X) b(y/Y) for a one-dimensional profile b on [1, 2]."""

    X: float
    Y: float
    P: float
    kind: str = "product_bump"
    sharpness: float = 1.5

    def __post_init__(self):
        if self.kind not in ("product_bump", "partition_cell"):
            raise DomainError(f"unknown weight kind {self.kind!r}")
        if self.X < 1 or self.Y < 1:
            raise DomainError("weight scales must be at least 1")

    def profile(self, u, order: int = 0):
        if self.kind == "product_bump":
            return _bump(u, self.sharpness, order)
        return W0(u, order)

    def __call__(self, x, y):
        return self.profile(np.asarray(x) / self.X) * self.profile(np.asarray(y) / self.Y)

    def derivative(self, x, y, m: int, n: int):
        """∂^{m+n} f / ∂x^m ∂y^n for m, n ≤ 2."""
        return (self.profile(np.asarray(x) / self.X, m) / self.X**m
                * self.profile(np.asarray(y) / self.Y, n) / self.Y**n)

    def derivative_constants(self, grid: int = 20) -> dict:
        """max |x^m y^n f^{(m,n)}| / P^{m+n} over a grid × grid sample of the support."""
        xs = self.X * np.linspace(1, 2, grid + 2)[1:-1]
        ys = self.Y * np.linspace(1, 2, grid + 2)[1:-1]
        gx, gy = np.meshgrid(xs, ys, indexing="ij")
        out = {}
        for m in range(3):
            for n in range(3):
                val = np.abs(gx**m * gy**n * self.derivative(gx, gy, m, n))
                out[(m, n)] = float(val.max()) / self.P ** (m + n)
        return out

    def support_interval(self, r: int) -> tuple:
        """x-range where f(x, x - r) can be nonzero."""
        return max(self.X, self.Y + r), min(2 * self.X, 2 * self.Y + r)


def make_bump_weight(X: float, Y: float, sharpness: float = 1.5) -> SmoothWeight:
    if sharpness < 1:
        raise DomainError("sharpness must be at least 1")
    return SmoothWeight(float(X), float(Y), P=float(sharpness), kind="product_bump", sharpness=float(sharpness))


def make_partition_weight(X: float, Y: float) -> SmoothWeight:
    return SmoothWeight(float(X), float(Y), P=_LOG_SCALE, kind="partition_cell")


def partition_of_unity(x: float, k_range) -> np.ndarray:
    """W₀(x / 2^{k/2}) for k in ``k_range`` (an iterable or (lo, hi) inclusive)."""
    if x < 1:
        raise DomainError("partition of unity is used for x >= 1")
    if isinstance(k_range, tuple) and len(k_range) == 2:
        k_range = range(k_range[0], k_range[1] + 1)
    ks = np.asarray(list(k_range), dtype=float)
    return W0(x / 2 ** (ks / 2))


# ---------------------------------------------------------------------------
# brute-force sums


def divisor_sum_bruteforce(tables: ArithTables, k: int, l: int, r: int, f: SmoothWeight) -> float:
    """Σ_{m-n=r} τ_k(m) τ_ℓ(n) f(m, n) over the support of f."""
    if r == 0:
        raise DomainError("shift r must be nonzero")
    if 2 * max(f.X, f.Y) + abs(r) > tables.limit:
        raise CapacityError(f"tables up to {tables.limit} do not cover 2X + |r|")
    lo, hi = f.support_interval(r)
    m = np.arange(max(math.ceil(lo), 1), math.floor(hi) + 1)
    m = m[m - r >= 1]
    weights = f(m.astype(float), (m - r).astype(float))
    values = tables.tau_k(k)[m].astype(float) * tables.tau_k(l)[m - r].astype(float) * weights
    return float(np.sum(values))


def divisor_sum_classical(tables: ArithTables, k: int, x: float, r: int) -> int:
    """D_k(x; r) = Σ_{n≤x} τ_k(n) τ_k(n+r), exactly."""
    if r < 1:
        raise DomainError("classical shift r must be positive")
    top = math.floor(x)
    if top + r > tables.limit:
        raise CapacityError(f"tables up to {tables.limit} do not cover x + r")
    if top < 1:
        return 0
    tau = tables.tau_k(k)
    a = tau[1: top + 1].astype(object)
    b = tau[1 + r: top + r + 1].astype(object)
    return int(np.dot(a, b))


# ---------------------------------------------------------------------------
# main term


@dataclass(frozen=True)
class MainTermSpec:
    k: int
    l: int
    r: int
    contours: tuple = (ContourCircle(1.0, 0.05), ContourCircle(1.0, 0.05))
    q_max: int = 10**4
    x_tolerance: float = 1e-10
    q_method: str = "euler"
    prime_cutoff: int = 10**4
    contour_tolerance: float = 1e-9
    q_tolerance: float = 1e-3
    eps_prime: float = EPS_PRIME

    def __post_init__(self):
        if self.k not in (2, 3, 4) or self.l not in (2, 3, 4):
            raise DomainError("main term is provided for k, ℓ in {2, 3, 4}")
        if self.r == 0:
            raise DomainError("shift r must be nonzero")
        for c in self.contours:
            if c.center != 1 or not 0 < c.radius < 0.1:
                raise DomainError("contours must be circles about 1 with radius in (0, 1/10)")
        if self.q_method not in ("euler", "truncated"):
            raise DomainError(f"unknown q-sum method {self.q_method!r}")


@dataclass(frozen=True)
class MainTermResult:
    value: float
    error: float
    q_tail: float
    imag_ratio: float
    nodes: tuple

    def __float__(self):
        return self.value


def _ramanujan_prime_power(p: int, j: int, v: int) -> int:
    """c_{p^j}(r) where v = v_p(r)."""
    if j == 0:
        return 1
    if j <= v:
        return p**j - p ** (j - 1)
    if j == v + 1:
        return -(p**v)
    return 0


def _log_S_euler(k, l, r, z1, z2, cutoff):
    """log S on the node grid plus a bound on its unsummed prime tail."""
    r_fac = factorize(abs(r))
    primes = primes_upto(cutoff)
    generic = primes[~np.isin(primes, list(r_fac))].astype(float)
    out = np.zeros((len(z1), len(z2)), dtype=complex)
    logp = np.log(generic)
    A = G_k_prime_power(k, generic[:, None], 1, z1[None, :]) * np.exp(-np.outer(logp, z1))
    B = G_k_prime_power(l, generic[:, None], 1, z2[None, :]) * np.exp(-np.outer(logp, z2))
    block = max(1, 2_000_000 // (len(z1) * len(z2)))
    for i in range(0, len(generic), block):
        out += np.log1p(-A[i:i + block, :, None] * B[i:i + block, None, :]).sum(axis=0)

    # primes dividing r: c_{p^j}(r) vanishes once j > v_p(r) + 1
    for p, v in r_fac.items():
        local = np.zeros_like(out)
        for j in range(v + 2):
            c = _ramanujan_prime_power(p, j, v)
            a = G_k_prime_power(k, float(p), j, z1) * float(p) ** (-j * z1)
            b = G_k_prime_power(l, float(p), j, z2) * float(p) ** (-j * z2)
            local += c * np.outer(a, b)
        out += np.log(local)

    # leading terms above the cutoff, from G_k(z, p) = k - p^{z-1} + O(p^{Re z - 2})
    pair = z1[:, None] + z2[None, :]
    tail = -(k * l * prime_tail_array(pair, cutoff)
             - l * prime_tail_array(z2 + 1, cutoff)[None, :]
             - k * prime_tail_array(z1 + 1, cutoff)[:, None]
             + prime_tail_array(np.array([2.0]), cutoff)[0])
    for p in r_fac:
        if p > cutoff:
            tail -= -(k - p ** (z1[:, None] - 1)) * (l - p ** (z2[None, :] - 1)) * p ** (-pair)
    out += tail

    # residual tail model fitted on the largest generic primes
    top = slice(max(0, len(generic) - 100), len(generic))
    pt = generic[top]
    lead = (k - pt[:, None, None] ** (z1[None, :, None] - 1)) * (l - pt[:, None, None] ** (z2[None, None, :] - 1)) \
        * pt[:, None, None] ** (-pair[None])
    resid = np.log1p(-A[top, :, None] * B[top, None, :]) + lead
    spread = max(abs(z1 - 1).max(), abs(z2 - 1).max())
    beta = 3 - 2 * spread
    c = 4 * float(np.max(np.abs(resid) * pt[:, None, None] ** beta))
    return out, c * integer_tail_bound(beta, cutoff)


def _S_matrix(spec: MainTermSpec, z1, z2, tables):
    """S on the node grid and an absolute per-node tail size."""
    log_s, bound = _log_S_euler(spec.k, spec.l, spec.r, z1, z2, spec.prime_cutoff)
    S_euler = np.exp(log_s)
    if spec.q_method == "euler":
        return S_euler, np.abs(S_euler) * math.expm1(bound)
    q = spec.q_max
    if tables is None or tables.limit < q:
        raise CapacityError(f"truncated q-sum needs tables up to {q}")
    qs = np.arange(q + 1, dtype=float)
    qs[0] = 1.0
    logq = np.log(qs)
    A = G_k_table(spec.k, z1, tables, q) * np.exp(-np.outer(logq, z1))
    B = G_k_table(spec.l, z2, tables, q) * np.exp(-np.outer(logq, z2))
    c = ramanujan_column(tables, spec.r, q).astype(float)
    c[0] = 0.0
    S = (A * c[:, None]).T @ B
    return S, np.abs(S - S_euler) + np.abs(S_euler) * math.expm1(bound)


def _x_moments(f: SmoothWeight, r: int, z1, z2, tol: float, max_nodes: int = 2**17):
    """M(z₁, z₂) on the node grid by the trapezoid rule in u = log(x/X)."""
    lo, hi = f.support_interval(r)
    if not hi > lo:
        raise DomainError("weight support misses the line n = m - r")
    a, b = math.log(lo), math.log(hi)

    def build(n):
        u = a + (b - a) * np.arange(1, n) / n
        x = np.exp(u)
        w = f(x, x - r) * x * (b - a) / n
        P1 = np.exp(np.outer(z1 - 1, u)) * w[None, :]
        P2 = np.exp(np.outer(z2 - 1, np.log(x - r)))
        return P1 @ P2.T

    n = 256
    prev = build(n)
    while True:
        n *= 2
        cur = build(n)
        err = np.max(np.abs(cur - prev))
        if err <= tol * np.max(np.abs(cur)):
            return cur, err
        if n >= max_nodes:
            raise ConvergenceError(f"x-integral not converged with {n} nodes", cur, err)
        prev = cur


def _trapezoid_pair(values, d1, d2, step1=1, step2=1):
    sub = values[::step1, ::step2] * d1[::step1, None] * d2[None, ::step2]
    return sub.sum() / sub.size


def main_term(spec: MainTermSpec, f: SmoothWeight, tables: ArithTables | None = None,
              max_nodes: int = 512) -> MainTermResult:
    """(2πi)^{-2} ∮∮ ζ^k(z₁) ζ^ℓ(z₂) S(z₁, z₂) M(z₁, z₂) dz₂ dz₁."""
    X = max(f.X, f.Y)
    if abs(spec.r) > X ** (1 - spec.eps_prime):
        raise DomainError("shift r exceeds the range |r| <= X^{1-ε′}")
    c1, c2 = spec.contours
    n1, n2 = c1.nodes, c2.nodes
    while True:
        z1 = c1.points(n1)
        z2 = c2.points(n2)
        d1, d2 = z1 - 1, z2 - 1
        S, S_tail = _S_matrix(spec, z1, z2, tables)
        M, _ = _x_moments(f, spec.r, z1, z2, spec.x_tolerance)
        Z = np.outer(zeta(z1) ** spec.k, zeta(z2) ** spec.l)
        F = Z * S * M
        total = _trapezoid_pair(F, d1, d2)
        coarse = _trapezoid_pair(F, d1, d2, 2, 2)
        err = abs(total - coarse)
        mass = _trapezoid_pair(np.abs(F), np.abs(d1), np.abs(d2))
        floor = 1e3 * np.finfo(float).eps * mass
        if err <= max(spec.contour_tolerance * abs(total), floor):
            break
        if 2 * max(n1, n2) > max_nodes:
            raise ConvergenceError(f"contour rule not converged at {n1}x{n2} nodes", total, err)
        n1, n2 = 2 * n1, 2 * n2
    q_tail = float(_trapezoid_pair(np.abs(Z * M) * S_tail, np.abs(d1), np.abs(d2)).real)
    if q_tail > spec.q_tolerance * abs(total.real):
        raise PrecisionError(f"q-sum tail {q_tail:.3e} exceeds tolerance", total.real, q_tail)
    imag_ratio = abs(total.imag) / max(abs(total.real), np.finfo(float).tiny)
    if imag_ratio >= 1e-6:
        raise EvaluationError(f"main term is not real: |Im|/|Re| = {imag_ratio:.2e}")
    return MainTermResult(float(total.real), float(max(err, floor)), q_tail, imag_ratio, (n1, n2))


# ---------------------------------------------------------------------------
# experiment harness


@dataclass(frozen=True)
class ExperimentRecord:
    k: int
    l: int
    r: int
    X: float
    Y: float
    P: float
    q_max: int | None
    radii: tuple
    bruteforce: float
    main_term: float
    abs_error: float
    normalized_error: float
    runtime_ms: float
    extra: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        out = asdict(self)
        out["radii"] = list(self.radii)
        out.update(out.pop("extra"))
        return out


def conjecture_experiment(tables: ArithTables, spec: MainTermSpec, f: SmoothWeight,
                          eps0: float = EPS0) -> ExperimentRecord:
    """Brute-force sum against the main term, with |Δ| / X^{1/2+ε₀}."""
    start = time.perf_counter()
    brute = divisor_sum_bruteforce(tables, spec.k, spec.l, spec.r, f)
    main = main_term(spec, f, tables if spec.q_method == "truncated" else None)
    diff = abs(brute - main.value)
    return ExperimentRecord(
        k=spec.k, l=spec.l, r=spec.r, X=f.X, Y=f.Y, P=f.P,
        q_max=spec.q_max if spec.q_method == "truncated" else None,
        radii=tuple(c.radius for c in spec.contours),
        bruteforce=brute, main_term=main.value, abs_error=diff,
        normalized_error=diff / f.X ** (0.5 + eps0),
        runtime_ms=1e3 * (time.perf_counter() - start),
        extra={"relative_error": diff / abs(brute), "main_term_error": main.error, "q_tail": main.q_tail},
    )


__all__ = [
    "ExperimentRecord", "MainTermResult", "MainTermSpec", "SmoothWeight", "W0",
    "conjecture_experiment", "divisor_sum_bruteforce", "divisor_sum_classical",
    "main_term", "make_bump_weight", "make_partition_weight", "partition_of_unity",
]
