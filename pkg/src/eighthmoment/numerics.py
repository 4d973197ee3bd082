"""Contour quadrature, residue extraction and exact rational arithmetic.

All integrators take vectorised callables: ``f`` receives a numpy array of
nodes and must return an array of the same shape.
"""

from __future__ import annotations

import math
import operator
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .errors import ConvergenceError, DomainError, EvaluationError

BigRational = Fraction

_EPS = np.finfo(float).eps


@dataclass(frozen=True)
class Estimate:
    """A numerical value with an attached absolute error estimate."""

    value: complex
    error: float
    nodes: int = 0

    def __complex__(self):
        return complex(self.value)

    def __float__(self):
        return float(np.real(self.value))


@dataclass(frozen=True)
class ContourCircle:
    """Circle |z - center| = radius discretised by the trapezoid rule.

    ``nodes`` is the starting node count; integrators double it as needed.
    """

    center: complex
    radius: float
    nodes: int = 64

    def __post_init__(self):
        if not self.radius > 0:
            raise DomainError(f"circle radius must be positive, got {self.radius}")
        if self.nodes < 64 or self.nodes & (self.nodes - 1):
            raise DomainError(f"node count must be a power of two >= 64, got {self.nodes}")

    def points(self, n: int | None = None) -> np.ndarray:
        n = self.nodes if n is None else n
        theta = 2.0 * np.pi * np.arange(n) / n
        return self.center + self.radius * np.exp(1j * theta)


def _trapezoid_sum(f, contour: ContourCircle, n: int, offset: bool):
    """Sum of f(z)(z - c) over n equispaced nodes, optionally the odd half-step set."""
    theta = 2.0 * np.pi * (np.arange(n) + (0.5 if offset else 0.0)) / n
    dz = contour.radius * np.exp(1j * theta)
    vals = np.asarray(f(contour.center + dz), dtype=complex) * dz
    if not np.all(np.isfinite(vals)):
        raise EvaluationError("integrand is not finite at a contour node")
    return vals.sum(), np.abs(vals).sum()


def circle_integral(f, contour: ContourCircle, rtol: float = 1e-12, atol: float = 0.0,
                    max_nodes: int = 2**14) -> Estimate:
    """(1/2πi)∮ f(z) dz over ``contour`` with node doubling.

    The error estimate is the change between the last two node counts, floored
    at the rounding level of the node sum.
    """
    n = contour.nodes
    total, mass = _trapezoid_sum(f, contour, n, False)
    value = total / n
    while True:
        extra, extra_mass = _trapezoid_sum(f, contour, n, True)
        total += extra
        mass += extra_mass
        n *= 2
        new = total / n
        floor = 64 * _EPS * mass / n
        err = max(abs(new - value), floor)
        value = new
        if err <= max(atol, rtol * abs(value), floor):
            return Estimate(value, err, n)
        if 2 * n > max_nodes:
            raise ConvergenceError(
                f"circle rule not converged at {n} nodes (error {err:.3e})", value, err)


def cauchy_derivative(f, center: complex, order: int, radius: float, rtol: float = 1e-12,
                      nodes: int = 64, max_nodes: int = 2**14) -> Estimate:
    """order-th derivative of f at ``center`` from the Cauchy integral formula."""
    if order < 0:
        raise DomainError("derivative order must be nonnegative")
    scale = math.factorial(order)

    def g(z):
        return np.asarray(f(z), dtype=complex) / (z - center) ** (order + 1)

    est = circle_integral(g, ContourCircle(center, radius, nodes), rtol=rtol, max_nodes=max_nodes)
    return Estimate(scale * est.value, scale * est.error, est.nodes)


# Gauss-Kronrod 7/15 nodes and weights on [-1, 1]
_XGK = np.array([
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.0])
_WGK = np.array([
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714])
_WG = np.array([
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327])

_KR_NODES = np.concatenate([-_XGK[:-1], _XGK[::-1]])
_KR_WEIGHTS = np.concatenate([_WGK[:-1], _WGK[::-1]])
_G_WEIGHTS = np.zeros(15)
_G_WEIGHTS[[1, 3, 5]] = _WG[:3]
_G_WEIGHTS[[13, 11, 9]] = _WG[:3]
_G_WEIGHTS[7] = _WG[3]


def _gk15(f, a: np.ndarray, b: np.ndarray):
    """Kronrod value and |K - G| for a batch of intervals."""
    mid = 0.5 * (a + b)
    half = 0.5 * (b - a)
    x = mid[:, None] + half[:, None] * _KR_NODES[None, :]
    fx = np.asarray(f(x.ravel()), dtype=complex).reshape(x.shape)
    if not np.all(np.isfinite(fx)):
        raise EvaluationError("integrand is not finite at a quadrature node")
    kron = half * (fx @ _KR_WEIGHTS)
    gauss = half * (fx @ _G_WEIGHTS)
    return kron, np.abs(kron - gauss)


def adaptive_line_quadrature(f, a: float, b: float, tol: float, pieces: int = 1,
                             max_intervals: int = 200_000) -> Estimate:
    """Globally adaptive Gauss-Kronrod 7/15 quadrature of f over [a, b].

    Each round bisects every interval whose error exceeds its share of ``tol``
    and evaluates all new nodes in one call to ``f``.  ``pieces`` sets the
    initial uniform partition, which helps for oscillatory integrands.
    """
    if not tol > 0:
        raise DomainError("tolerance must be positive")
    if b == a:
        return Estimate(0.0, 0.0, 0)
    edges = np.linspace(a, b, pieces + 1)
    lo, hi = edges[:-1], edges[1:]
    vals, errs = _gk15(f, lo, hi)
    width = abs(b - a)
    evaluations = 15 * len(lo)
    while True:
        total_err = errs.sum()
        if total_err <= tol:
            return Estimate(vals.sum(), float(total_err), evaluations)
        share = tol * np.abs(hi - lo) / width
        bad = errs > share
        # tiny intervals can no longer improve; stop splitting them
        bad &= np.abs(hi - lo) > 64 * _EPS * max(abs(a), abs(b), 1.0)
        if not bad.any() or len(lo) + bad.sum() > max_intervals:
            raise ConvergenceError(
                f"adaptive quadrature stalled with error {total_err:.3e} > {tol:.3e}",
                vals.sum(), float(total_err))
        mid = 0.5 * (lo[bad] + hi[bad])
        new_lo = np.concatenate([lo[bad], mid])
        new_hi = np.concatenate([mid, hi[bad]])
        new_vals, new_errs = _gk15(f, new_lo, new_hi)
        evaluations += 15 * len(new_lo)
        keep = ~bad
        lo = np.concatenate([lo[keep], new_lo])
        hi = np.concatenate([hi[keep], new_hi])
        vals = np.concatenate([vals[keep], new_vals])
        errs = np.concatenate([errs[keep], new_errs])


def fixed_gauss_legendre(f, a: float, b: float, panels: int, order: int = 20) -> complex:
    """Composite Gauss-Legendre rule with equal panels."""
    x, w = np.polynomial.legendre.leggauss(order)
    edges = np.linspace(a, b, panels + 1)
    half = 0.5 * np.diff(edges)
    nodes = (0.5 * (edges[:-1] + edges[1:]))[:, None] + half[:, None] * x[None, :]
    fx = np.asarray(f(nodes.ravel()), dtype=complex).reshape(nodes.shape)
    return complex(np.sum(half[:, None] * w[None, :] * fx))


_RATIONAL_OPS = {
    "+": operator.add,
    "-": operator.sub,
    "*": operator.mul,
    "/": operator.truediv,
    "=": operator.eq,
}


def rational_ops(a, b, op: str):
    """Exact arithmetic on reduced fractions; ``=`` returns a bool."""
    if op not in _RATIONAL_OPS:
        raise DomainError(f"unknown rational operation {op!r}")
    x, y = Fraction(a), Fraction(b)
    if op == "/" and y == 0:
        raise ZeroDivisionError("rational division by zero")
    return _RATIONAL_OPS[op](x, y)


__all__ = [
    "BigRational", "ContourCircle", "Estimate", "adaptive_line_quadrature",
    "cauchy_derivative", "circle_integral", "fixed_gauss_legendre", "rational_ops",
]
