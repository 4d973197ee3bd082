"""Sieved arithmetic functions and the local functions g_k, G_k.

Provides:
- ``build_tables``: smallest-prime-factor sieve with τ_k, μ, φ, ω arrays
- ``ramanujan_sum`` and a vectorised column of Ramanujan sums over q
- ``g_k_local`` (series definition), ``g_k_poly`` (exact finite form)
- ``G_k_def`` (double divisor sum) and the k = 4 closed form ``G4_closed``
- ``G_k_table``: G_k(z, q) for all q up to a bound on a vector of z nodes
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from itertools import combinations

import numpy as np

from .errors import CapacityError, DomainError

DEFAULT_MEMORY_BUDGET = 4 * 2**30


@dataclass(frozen=True)
class ArithTables:
    """Arithmetic arrays indexed by n = 0..limit (entry 0 is unused).

    ``prime_power[n]`` is the full power of the smallest prime dividing n,
    ``exponent[n]`` its exponent and ``cofactor[n] = n / prime_power[n]``.
    These three arrays drive every multiplicative construction below.
    """

    limit: int
    tau: dict
    mu: np.ndarray
    phi: np.ndarray
    omega: np.ndarray
    smallest_prime_factor: np.ndarray
    prime_power: np.ndarray
    exponent: np.ndarray
    cofactor: np.ndarray
    _primes: list = field(default_factory=list, repr=False, compare=False)

    def tau_k(self, k: int) -> np.ndarray:
        if k not in self.tau:
            raise DomainError(f"tables were built without tau_{k}")
        return self.tau[k]

    @property
    def primes(self) -> np.ndarray:
        if not self._primes:
            n = np.arange(self.limit + 1)
            self._primes.append(np.nonzero((self.smallest_prime_factor == n) & (n >= 2))[0])
        return self._primes[0]


@dataclass(frozen=True)
class PrimePowerArg:
    """The triple (p, j, z) at which g_k(z, p^j) and G_k(z, p^j) are evaluated."""

    p: int
    j: int
    z: complex

    def __post_init__(self):
        if self.p < 2 or not is_prime(self.p):
            raise DomainError(f"{self.p} is not a prime")
        if self.j < 0:
            raise DomainError("prime-power exponent must be nonnegative")


def table_bytes(limit: int, ks) -> int:
    """Approximate memory footprint of ``build_tables``."""
    return (limit + 1) * (4 + 4 + 4 + 1 + 1 + 1 + 8 + 8 * len(ks))


def smallest_prime_factors(limit: int) -> np.ndarray:
    spf = np.zeros(limit + 1, dtype=np.int32)
    for p in range(2, math.isqrt(limit) + 1):
        if spf[p] == 0:
            seg = spf[p * p::p]
            seg[seg == 0] = p
    n = np.arange(limit + 1, dtype=np.int32)
    unmarked = spf == 0
    spf[unmarked] = n[unmarked]
    return spf


def build_tables(limit: int, ks=(2, 3, 4), memory_budget: int = DEFAULT_MEMORY_BUDGET) -> ArithTables:
    """Sieve τ_k, μ, φ, ω up to ``limit``.

    Each n factors as n = p^e·m with p its smallest prime; values at n come
    from values at m < n.  Processing n in dyadic blocks [L, 2L) keeps every
    dependency in an already finished block, so each block is one vectorised
    update.
    """
    limit = int(limit)
    ks = sorted(set(int(k) for k in ks))
    if limit < 2:
        raise DomainError("table limit must be at least 2")
    if any(k < 2 for k in ks):
        raise DomainError("divisor-function orders must be >= 2")
    if limit >= 2**31 - 1 or table_bytes(limit, ks) > memory_budget:
        raise CapacityError(
            f"tables up to {limit} need ~{table_bytes(limit, ks) / 2**20:.0f} MiB, "
            f"above the budget of {memory_budget / 2**20:.0f} MiB")

    spf = smallest_prime_factors(limit)
    exponent = np.zeros(limit + 1, dtype=np.int8)
    cofactor = np.ones(limit + 1, dtype=np.int32)
    prime_power = np.ones(limit + 1, dtype=np.int32)
    mu = np.zeros(limit + 1, dtype=np.int8)
    phi = np.zeros(limit + 1, dtype=np.int64)
    omega = np.zeros(limit + 1, dtype=np.int8)
    tau = {k: np.zeros(limit + 1, dtype=np.int64) for k in ks}
    mu[1] = 1
    phi[1] = 1
    for k in ks:
        tau[k][1] = 1
    max_exp = max(1, int(math.log2(limit)) + 1)
    binom = {k: np.array([math.comb(a + k - 1, k - 1) for a in range(max_exp + 1)], dtype=np.int64)
             for k in ks}

    lo = 2
    while lo <= limit:
        hi = min(2 * lo, limit + 1)
        n = np.arange(lo, hi, dtype=np.int64)
        p = spf[lo:hi].astype(np.int64)
        m = n // p
        same = spf[m] == p
        e = np.where(same, exponent[m].astype(np.int64) + 1, 1)
        rest = np.where(same, cofactor[m], m)
        pe = n // rest
        exponent[lo:hi] = e
        cofactor[lo:hi] = rest
        prime_power[lo:hi] = pe
        mu[lo:hi] = np.where(e == 1, -mu[rest], 0)
        phi[lo:hi] = phi[rest] * (pe - pe // p)
        omega[lo:hi] = omega[rest] + 1
        for k in ks:
            tau[k][lo:hi] = tau[k][rest] * binom[k][e]
        lo = hi

    return ArithTables(limit=limit, tau=tau, mu=mu, phi=phi, omega=omega,
                       smallest_prime_factor=spf, prime_power=prime_power,
                       exponent=exponent, cofactor=cofactor)


def multiplicative_table(tables: ArithTables, local, upto: int, shape=(), dtype=complex) -> np.ndarray:
    """Array F[n] for n ≤ upto of the multiplicative F with F(p^e) = local(p, e).

    ``local`` receives integer arrays p, e of equal length and returns values
    of shape (len(p),) + shape.
    """
    if upto > tables.limit:
        raise CapacityError(f"need tables up to {upto}, have {tables.limit}")
    out = np.zeros((upto + 1,) + tuple(shape), dtype=dtype)
    out[1] = 1
    lo = 2
    while lo <= upto:
        hi = min(2 * lo, upto + 1)
        p = tables.smallest_prime_factor[lo:hi].astype(np.int64)
        e = tables.exponent[lo:hi].astype(np.int64)
        rest = tables.cofactor[lo:hi]
        out[lo:hi] = out[rest] * local(p, e)
        lo = hi
    return out


def is_prime(n: int) -> bool:
    if n < 2:
        return False
    for p in (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37):
        if n % p == 0:
            return n == p
    d, s = n - 1, 0
    while d % 2 == 0:
        d //= 2
        s += 1
    for a in (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37):
        x = pow(a, d, n)
        if x in (1, n - 1):
            continue
        for _ in range(s - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True


def factorize(n: int, tables: ArithTables | None = None) -> dict:
    """Prime factorisation {p: e}; uses the sieve when n is in range."""
    n = int(n)
    if n < 1:
        raise DomainError("can only factor positive integers")
    if tables is not None and n <= tables.limit:
        out = {}
        while n > 1:
            p = int(tables.smallest_prime_factor[n])
            out[p] = int(tables.exponent[n])
            n = int(tables.cofactor[n])
        return out
    from sympy import factorint

    return {int(p): int(e) for p, e in factorint(n).items()}


def _valuation(n: int, p: int) -> int:
    v = 0
    while n % p == 0:
        n //= p
        v += 1
    return v


def ramanujan_sum(q: int, r: int, tables: ArithTables | None = None) -> int:
    """c_q(r) = Σ_{d | (q, r)} d μ(q/d), computed prime by prime."""
    if q < 1:
        raise DomainError("Ramanujan sums need q >= 1")
    out = 1
    for p, a in factorize(q, tables).items():
        b = math.inf if r == 0 else _valuation(abs(r), p)
        if b >= a:
            out *= p**a - p ** (a - 1)
        elif b == a - 1:
            out *= -(p ** (a - 1))
        else:
            return 0
    return out


def ramanujan_column(tables: ArithTables, r: int, q_max: int) -> np.ndarray:
    """Array of c_q(r) for q = 0..q_max (entry 0 unused)."""
    if q_max > tables.limit:
        raise CapacityError(f"need tables up to {q_max}, have {tables.limit}")
    if r == 0:
        out = tables.phi[: q_max + 1].copy()
        out[0] = 0
        return out
    out = np.zeros(q_max + 1, dtype=np.int64)
    mu = tables.mu.astype(np.int64)
    for d in _divisors(abs(r)):
        if d <= q_max:
            out[d::d] += d * mu[1: q_max // d + 1]
    return out


def _divisors(n: int) -> list:
    small = [d for d in range(1, math.isqrt(n) + 1) if n % d == 0]
    return sorted(set(small + [n // d for d in small]))


# ---------------------------------------------------------------------------
# g_k and G_k


def tau_prime_power(k: int, a: int) -> int:
    return math.comb(a + k - 1, k - 1)


def g_k_local(k: int, arg: PrimePowerArg, min_terms: int = 40, max_terms: int = 10_000) -> complex:
    """g_k(z, p^j) as a ratio of the two defining power series in p^{-z}."""
    if k < 2:
        raise DomainError("g_k needs k >= 2")
    z = complex(arg.z)
    if z.real <= 0:
        raise DomainError("g_k(z, p^j) needs Re z > 0")
    if arg.j == 0:
        return 1.0 + 0.0j
    x = arg.p ** (-z)
    num = den = 0.0
    xi = 1.0 + 0.0j
    for i in range(max_terms):
        tn = tau_prime_power(k, i + arg.j) * xi
        td = tau_prime_power(k, i) * xi
        num += tn
        den += td
        if i >= min_terms and abs(tn) < 1e-17 * abs(num) and abs(td) < 1e-17 * abs(den):
            break
        xi *= x
    return num / den


@lru_cache(maxsize=None)
def g_k_coefficients(k: int, j: int) -> tuple:
    """Integer coefficients c_0..c_{k-1} with g_k(z, p^j) = Σ c_i p^{-iz}.

    (1 - x)^k Σ_i τ_k(p^{i+j}) x^i is a polynomial of degree < k because
    i ↦ τ_k(p^{i+j}) is a polynomial of degree k - 1.
    """
    return tuple(
        sum((-1) ** (n - i) * math.comb(k, n - i) * tau_prime_power(k, i + j) for i in range(n + 1))
        for n in range(k))


def g_k_poly(k: int, j, x):
    """g_k(z, p^j) evaluated at x = p^{-z}; j may be an integer array."""
    x = np.asarray(x)
    j = np.asarray(j)
    if j.ndim == 0:
        coeffs = g_k_coefficients(k, int(j))
        return sum(c * x**i for i, c in enumerate(coeffs))
    table = np.array([g_k_coefficients(k, int(v)) for v in range(int(j.max()) + 1)], dtype=float)
    sel = table[j]
    return sum(sel[..., i] * x**i for i in range(k))


def Q_poly(j: int, x):
    """𝒬_j(x) = 1 - 3j x/(j+1) + 3j x²/(j+2) - j x³/(j+3); j may be an array."""
    return 1 - 3 * j / (j + 1) * x + 3 * j / (j + 2) * x**2 - j / (j + 3) * x**3


def G4_closed(arg: PrimePowerArg) -> complex:
    """G_4(z, p^j) from the 𝒬_j closed form (j ≥ 1)."""
    if arg.j < 1:
        raise DomainError("closed form needs j >= 1")
    p, j, z = arg.p, arg.j, complex(arg.z)
    x = p ** (-z)
    return p / (p - 1) * (tau_prime_power(4, j) * Q_poly(j, x)
                          - p ** (z - 1) * tau_prime_power(4, j - 1) * Q_poly(j - 1, x))


def G4_prime(p, z):
    """G_4(z, p) expanded in powers of p^{-z}."""
    x = p ** (-z)
    return p / (p - 1) * (4 - p ** (z - 1) - 6 * x + 4 * x**2 - x**3)


def G4_prime_square(p, z):
    """G_4(z, p²) expanded in powers of p^{-z}."""
    x = p ** (-z)
    y = p ** (z - 1)
    return p / (p - 1) * ((10 - 4 * y) + (-20 + 6 * y) * x + (15 - 4 * y) * x**2 + (-4 + y) * x**3)


def G_k_prime_power(k: int, p, j, z):
    """G_k(z, p^j) for arrays; uses G = (p g(p^j) - p^z g(p^{j-1}))/(p - 1)."""
    p = np.asarray(p, dtype=float)
    j = np.asarray(j)
    x = p ** (-z)
    upper = g_k_poly(k, j, x)
    lower = g_k_poly(k, np.maximum(j - 1, 0), x)
    val = (p * upper - p**z * lower) / (p - 1)
    return np.where(j == 0, 1.0, val)


def G_k_def(k: int, q: int, z: complex, tables: ArithTables | None = None) -> complex:
    """G_k(z, q) straight from the double divisor sum over d | q, e | d.

    Only squarefree d and e contribute; g_k(z, ·) is evaluated through its
    prime-power factorisation with ``g_k_local``.
    """
    z = complex(z)
    if z.real <= 0:
        raise DomainError("G_k(z, q) needs Re z > 0")
    fac = factorize(q, tables)
    primes = sorted(fac)

    def g_of(exps: dict) -> complex:
        out = 1.0 + 0.0j
        for p, a in exps.items():
            if a:
                out *= g_k_local(k, PrimePowerArg(p, a, z))
        return out

    total = 0.0 + 0.0j
    for size in range(len(primes) + 1):
        for d_primes in combinations(primes, size):
            d = math.prod(d_primes)
            phi_d = math.prod(p - 1 for p in d_primes)
            outer = (-1) ** size * d**z / phi_d
            inner = 0.0 + 0.0j
            for esize in range(size + 1):
                for e_primes in combinations(d_primes, esize):
                    e = math.prod(e_primes)
                    exps = {p: fac[p] - (p in d_primes) + (p in e_primes) for p in primes}
                    inner += (-1) ** esize * e ** (-z) * g_of(exps)
            total += outer * inner
    return total


def G_k_table(k: int, z: np.ndarray, tables: ArithTables, q_max: int) -> np.ndarray:
    """G_k(z_i, q) for q = 0..q_max on a vector of nodes; shape (q_max+1, len(z))."""
    z = np.atleast_1d(np.asarray(z, dtype=complex))

    def local(p, e):
        return G_k_prime_power(k, p[:, None], e[:, None], z[None, :])

    return multiplicative_table(tables, local, q_max, shape=z.shape)


__all__ = [
    "ArithTables", "PrimePowerArg", "G4_closed", "G4_prime", "G4_prime_square", "G_k_def",
    "G_k_prime_power", "G_k_table", "Q_poly", "build_tables", "factorize", "g_k_coefficients",
    "g_k_local", "g_k_poly", "is_prime", "multiplicative_table", "ramanujan_column",
    "ramanujan_sum", "tau_prime_power",
]
