"""Quadrature rules, special functions and small numerical helpers.

The phase-space measure d^2mu(z) = exp(-|z|^2) d^2z / pi is discretised in
polar form: with s = r^2 the radial part becomes a Gauss-Laguerre integral in
s and the angular part a uniform periodic rule, so that

    integral z^n conj(z)^m d^2mu(z) = m! delta_{mn}

holds to rounding error for every monomial inside the rule's degree budget.
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass

import numpy as np
from scipy import special

from .errors import EvaluationError, ParameterError

__all__ = [
    "QuadratureRule",
    "PhaseSpaceGrid",
    "gauss_laguerre_rule",
    "angular_uniform_rule",
    "contour_line_rule",
    "phase_space_grid",
    "phase_space_integrate",
    "faddeeva",
    "erfc",
    "hermite_eval",
    "normalized_hermite",
    "complex_fd_derivative",
    "log_factorial",
    "sqrt_factorials",
]

MAX_LAGUERRE_NODES = 256


@dataclass(frozen=True, eq=False)
class QuadratureRule:
    """Nodes and weights of a one-dimensional rule.

    ``kind`` is one of ``"gauss_laguerre"`` (weight e^{-x} absorbed, on
    [0, inf)), ``"angular_uniform"`` (periodic, on [0, 2 pi)) or
    ``"contour_line"`` (finite Gauss-Legendre panel with e^{-x} folded into
    the weights, a drop-in replacement for Gauss-Laguerre when the integrand
    is only trustworthy on a bounded segment).
    """

    nodes: np.ndarray
    weights: np.ndarray
    kind: str

    def __post_init__(self):
        self.nodes.setflags(write=False)
        self.weights.setflags(write=False)

    def __len__(self):
        return len(self.nodes)


@functools.lru_cache(maxsize=None)
def gauss_laguerre_rule(n: int) -> QuadratureRule:
    """Gauss-Laguerre rule with ``n`` nodes for the weight e^{-x} on [0, inf).

    Exact for x^k, k <= 2n - 1. For n above ~180 the weights of the largest
    nodes drop below the smallest representable double and are flushed to 0.
    """
    if not isinstance(n, (int, np.integer)) or not 1 <= n <= MAX_LAGUERRE_NODES:
        raise ParameterError(f"gauss_laguerre_rule: n must be in [1, {MAX_LAGUERRE_NODES}], got {n!r}")
    x, w = special.roots_laguerre(int(n))
    return QuadratureRule(np.asarray(x, float), np.asarray(w, float), "gauss_laguerre")


@functools.lru_cache(maxsize=None)
def angular_uniform_rule(n: int) -> QuadratureRule:
    """Uniform periodic rule on [0, 2 pi): exact for e^{ik theta}, |k| < n."""
    if not isinstance(n, (int, np.integer)) or n < 1:
        raise ParameterError(f"angular_uniform_rule: n must be a positive integer, got {n!r}")
    theta = 2.0 * np.pi * np.arange(n) / n
    return QuadratureRule(theta, np.full(n, 2.0 * np.pi / n), "angular_uniform")


@functools.lru_cache(maxsize=None)
def contour_line_rule(n: int, length: float, panels: int = 1) -> QuadratureRule:
    """Composite Gauss-Legendre rule on [0, length] with e^{-x} folded in.

    ``sum(w * g(x))`` approximates the integral of g(x) e^{-x} over [0, length].
    """
    if n < 1 or panels < 1 or not length > 0:
        raise ParameterError("contour_line_rule: need n >= 1, panels >= 1, length > 0")
    t, wt = np.polynomial.legendre.leggauss(int(n))
    edges = np.linspace(0.0, float(length), int(panels) + 1)
    half = 0.5 * np.diff(edges)
    mid = 0.5 * (edges[1:] + edges[:-1])
    x = (mid[:, None] + half[:, None] * t[None, :]).ravel()
    w = (half[:, None] * wt[None, :]).ravel() * np.exp(-x)
    return QuadratureRule(x, w, "contour_line")


@dataclass(frozen=True, eq=False)
class PhaseSpaceGrid:
    """Tensor grid for integrals against d^2mu(z).

    ``max_exact_degree`` bounds n and m such that products z^n conj(z)^m (and
    the analogous products of two truncated series of that degree) are
    integrated exactly.
    """

    radial: QuadratureRule
    angular: QuadratureRule
    max_exact_degree: int

    @functools.cached_property
    def points(self) -> np.ndarray:
        r = np.sqrt(self.radial.nodes)
        return r[:, None] * np.exp(1j * self.angular.nodes)[None, :]

    @functools.cached_property
    def weights(self) -> np.ndarray:
        return np.outer(self.radial.weights, self.angular.weights) / (2.0 * np.pi)

    @property
    def radius(self) -> float:
        """Radius within which kernel-type integrands stay resolved."""
        return math.sqrt(self.max_exact_degree) / 2.0


@functools.lru_cache(maxsize=None)
def phase_space_grid(radial_nodes: int = 64, angular_nodes: int = 128) -> PhaseSpaceGrid:
    radial = gauss_laguerre_rule(radial_nodes)
    angular = angular_uniform_rule(angular_nodes)
    degree = min(radial_nodes - 1, angular_nodes // 2 - 1)
    if degree < 0:
        raise ParameterError("phase_space_grid: need angular_nodes >= 2")
    return PhaseSpaceGrid(radial, angular, degree)


def phase_space_integrate(g, grid: PhaseSpaceGrid | None = None) -> complex:
    """Approximate the integral of g(z) d^2mu(z).

    ``g`` is called once with the full 2-d array of grid points and must
    broadcast over it.
    """
    grid = grid or phase_space_grid()
    z = grid.points
    values = np.broadcast_to(np.asarray(g(z), dtype=complex), z.shape)
    bad = ~np.isfinite(values)
    if bad.any():
        i, j = np.argwhere(bad)[0]
        node = complex(z[i, j])
        raise EvaluationError(f"integrand is not finite at z = {node}", node=node)
    return complex(np.sum(grid.weights * values))


def faddeeva(u):
    """Faddeeva function w(u) = exp(-u^2) erfc(-i u).

    Backed by scipy's implementation of the Faddeeva package, which is
    accurate to ~1e-13 relative across the complex plane.
    """
    return special.wofz(np.asarray(u, dtype=complex))[()]


def erfc(u):
    """Complementary error function of complex argument via erfc(u) = e^{-u^2} w(iu)."""
    u = np.asarray(u, dtype=complex)
    return (np.exp(-u * u) * special.wofz(1j * u))[()]


def hermite_eval(n: int, x: float) -> float:
    """Physicists' Hermite polynomial H_n(x) by the three-term recurrence."""
    if n < 0:
        raise ParameterError("hermite_eval: n must be non-negative")
    h_prev, h = 0.0, 1.0
    for k in range(n):
        h_prev, h = h, 2.0 * x * h - 2.0 * k * h_prev
    return h


def normalized_hermite(N: int, x) -> np.ndarray:
    """h_n(x) = H_n(x) / sqrt(2^n n!) for n = 0..N, stacked along axis 0.

    This scaling keeps the recurrence in floating-point range for large n.
    """
    x = np.asarray(x, dtype=float)
    out = np.empty((N + 1,) + x.shape)
    out[0] = 1.0
    if N >= 1:
        out[1] = math.sqrt(2.0) * x
    for n in range(1, N):
        out[n + 1] = math.sqrt(2.0 / (n + 1)) * x * out[n] - math.sqrt(n / (n + 1)) * out[n - 1]
    return out


def complex_fd_derivative(g, x: complex, h: float = 1e-5) -> complex:
    """Central difference (g(x+h) - g(x-h)) / 2h; g is assumed analytic near x."""
    if not h > 0:
        raise ParameterError("complex_fd_derivative: step must be positive")
    return (g(x + h) - g(x - h)) / (2.0 * h)


def log_factorial(n) -> np.ndarray:
    return special.gammaln(np.asarray(n, dtype=float) + 1.0)


@functools.lru_cache(maxsize=None)
def _sqrt_factorials(N: int) -> np.ndarray:
    n = np.arange(N + 1)
    if N <= 170:
        # running product stays finite below 171!
        out = np.sqrt(np.cumprod(np.concatenate(([1.0], np.arange(1.0, N + 1)))))
    else:
        out = np.exp(0.5 * log_factorial(n))
    out.setflags(write=False)
    return out


def sqrt_factorials(N: int) -> np.ndarray:
    """sqrt(n!) for n = 0..N (overflows to inf past n ~ 300)."""
    return _sqrt_factorials(int(N))
