"""Scalar products computed directly from conjugate functions.

Three routes are offered and cross-checked against the series inner product
sum conj(a_n) b_n:

* the double phase-space formula, sum of products of coefficient integrals;
* the mixed formula pairing a conjugate function with a Bargmann function;
* the oscillatory line formula, an integral over a single complex plane
  with pure-phase weights e^{+-i|w|^2}.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .bargmann import BargmannFunction, evaluate
from .conjugate import ConjugateFunction, coeff_from_conjugate, laurent_sum
from .errors import AccuracyError, ParameterError
from .numerics import PhaseSpaceGrid, gauss_laguerre_rule, phase_space_grid
from .states import FockCoefficients, inner_series

__all__ = [
    "OverlapReport",
    "inner_conjugate_double",
    "inner_conjugate_line",
    "inner_mixed",
    "overlap_report",
]

QUADRATURE_MAX_N = 6


@dataclass(frozen=True)
class OverlapReport:
    value_series: complex
    value_double: complex
    value_line: complex | None
    value_mixed: complex
    max_disagreement: float

    def as_dict(self) -> dict:
        return {
            "value_series": self.value_series,
            "value_double": self.value_double,
            "value_line": self.value_line,
            "value_mixed": self.value_mixed,
            "max_disagreement": self.max_disagreement,
        }


def _coefficients(f: ConjugateFunction) -> np.ndarray:
    return np.array([coeff_from_conjugate(f, n) for n in range(f.truncation + 1)])


def inner_conjugate_double(f_psi: ConjugateFunction, f_phi: ConjugateFunction,
                           method: str = "termwise", grid: PhaseSpaceGrid | None = None) -> complex:
    """(psi, phi) = int conj(t) w e^{conj(t) w} conj(f_psi(t)) f_phi(w) d^2mu(t) d^2mu(w).

    ``termwise`` expands e^{conj(t) w} and integrates each monomial, which
    collapses to sum_n conj(a_n) b_n with a_n, b_n the coefficient integrals.
    ``quadrature`` sums the four-dimensional integral on a tensor grid
    (validation only, N <= 6).
    """
    if method == "termwise":
        a = _coefficients(f_psi)
        b = _coefficients(f_phi)
        n = min(a.size, b.size)
        return complex(np.vdot(a[:n], b[:n]))
    if method != "quadrature":
        raise ParameterError(f"unknown method {method!r}")
    if max(f_psi.truncation, f_phi.truncation) > QUADRATURE_MAX_N:
        raise ParameterError(f"four-dimensional quadrature is limited to N <= {QUADRATURE_MAX_N}")
    grid = grid or phase_space_grid(32, 64)
    z = grid.points.ravel()
    wts = grid.weights.ravel()
    left = wts * np.conj(z) * np.conj(laurent_sum(f_psi.laurent, z))
    right = wts * z * laurent_sum(f_phi.laurent, z)
    total = 0j
    # rows of the kernel e^{conj(t) w} in chunks to bound memory
    for start in range(0, z.size, 512):
        block = np.exp(np.conj(z[start:start + 512])[:, None] * z[None, :])
        total += left[start:start + 512] @ (block @ right)
    return complex(total)


def _conj_laurent(f: ConjugateFunction) -> np.ndarray:
    # conj(f(t)) = fbar(conj(t)) with fbar having conjugated coefficients
    return np.conj(f.laurent)


def _line_integrand(cbar_psi, c_phi, y, theta, eps):
    """Angular-summed integrand of the pre-limit line formula at complex y.

    With w_{+-} = sqrt(y +- i eps) e^{i theta} the formula reads
    (1/2 pi^2) int r dr dtheta [ conj f_psi(w_+ e^{-i pi/4}) f_phi(w_- e^{i pi/4}) e^{eps + i r^2}
                               + conj f_psi(w_- e^{i pi/4}) f_phi(w_+ e^{-i pi/4}) e^{eps - i r^2} ].
    Both pieces are written as analytic functions of y so that the tails can
    be rotated into the complex plane; the one without e^{iy} is returned
    separately.
    """
    y = np.asarray(y, dtype=complex)[:, None]
    e = np.exp(1j * theta)[None, :]
    rp = np.sqrt(y + 1j * eps)
    rm = np.sqrt(y - 1j * eps)
    q = np.exp(0.25j * np.pi)
    # conj(w_+ e^{-i pi/4}) continued analytically in y is sqrt(y - i eps) e^{-i theta} e^{i pi/4}
    t1 = rm * np.conj(e) * q
    w1 = rm * e * q
    t2 = rp * np.conj(e) / q
    w2 = rp * e / q
    plus = laurent_sum(cbar_psi, t1) * laurent_sum(c_phi, w1)
    minus = laurent_sum(cbar_psi, t2) * laurent_sum(c_phi, w2)
    return plus.mean(axis=1), minus.mean(axis=1)


def _line_rotated(f_psi, f_phi, eps, y_split, order, tail_nodes, n_theta):
    theta = 2 * np.pi * np.arange(n_theta) / n_theta
    cbar = _conj_laurent(f_psi)
    c = f_phi.laurent
    t, wt = np.polynomial.legendre.leggauss(order)
    edges = np.linspace(0.0, y_split, int(math.ceil(y_split)) + 1)
    half = 0.5 * np.diff(edges)
    mid = 0.5 * (edges[1:] + edges[:-1])
    y = (mid[:, None] + half[:, None] * t[None, :]).ravel()
    wy = (half[:, None] * wt[None, :]).ravel()
    plus, minus = _line_integrand(cbar, c, y, theta, eps)
    total = np.sum(wy * (plus * np.exp(1j * y) + minus * np.exp(-1j * y)))
    # tails: the e^{iy} piece decays along y = Y + is, the e^{-iy} piece along y = Y - is
    lag = gauss_laguerre_rule(tail_nodes)
    p_up, _ = _line_integrand(cbar, c, y_split + 1j * lag.nodes, theta, eps)
    _, m_dn = _line_integrand(cbar, c, y_split - 1j * lag.nodes, theta, eps)
    total += 1j * np.exp(1j * y_split) * np.sum(lag.weights * p_up)
    total += -1j * np.exp(-1j * y_split) * np.sum(lag.weights * m_dn)
    # (1/2 pi^2) * (1/2 dy) * (2 pi from the angular mean) * e^{eps}
    return complex(total * math.exp(eps) / (2.0 * math.pi))


def _line_damped(f_psi, f_phi, eps, delta, order, n_theta):
    theta = 2 * np.pi * np.arange(n_theta) / n_theta
    Y = 40.0 / delta
    t, wt = np.polynomial.legendre.leggauss(order)
    edges = np.linspace(0.0, Y, int(math.ceil(Y)) + 1)
    half = 0.5 * np.diff(edges)
    mid = 0.5 * (edges[1:] + edges[:-1])
    y = (mid[:, None] + half[:, None] * t[None, :]).ravel()
    wy = (half[:, None] * wt[None, :]).ravel()
    plus, minus = _line_integrand(_conj_laurent(f_psi), f_phi.laurent, y, theta, eps)
    total = np.sum(wy * np.exp(-delta * y) * (plus * np.exp(1j * y) + minus * np.exp(-1j * y)))
    return complex(total * math.exp(eps) / (2.0 * math.pi))


def inner_conjugate_line(f_psi: ConjugateFunction, f_phi: ConjugateFunction,
                         radial_nodes: int = 16, angular_nodes: int | None = None,
                         epsilon: float = 1.0, method: str = "rotated",
                         deltas=(0.2, 0.1, 0.05, 0.025), tol: float = 1e-4) -> complex:
    """The single-plane formula with pure-phase weights e^{+-i|w|^2}.

    The integrand is used at a fixed positive epsilon (the formula holds for
    every epsilon > 0; the limit is only needed to write it compactly).
    With y = r^2 the radial integral runs over [0, inf) against e^{+-iy}.

    ``method="rotated"`` integrates [0, Y] with Gauss-Legendre panels of
    ``radial_nodes`` points and rotates the two tails onto y = Y +- is, where
    the phases become decaying exponentials. ``method="richardson"`` instead
    damps the integrand by e^{-delta y} and extrapolates delta -> 0 over
    ``deltas``. Both use the Laurent data of the inputs; the angular sum is
    exact once it has more than 2N + 2 points (``angular_nodes``
    is raised to that minimum when smaller).

    Raises :class:`AccuracyError` when two independent estimates differ by
    more than ``tol``.
    """
    if not epsilon > 0:
        raise ParameterError("inner_conjugate_line: epsilon must be positive")
    n_theta = max(angular_nodes or 0, 2 * max(f_psi.truncation, f_phi.truncation) + 4)
    if method == "rotated":
        coarse = _line_rotated(f_psi, f_phi, epsilon, 24.0, radial_nodes, 48, n_theta)
        fine = _line_rotated(f_psi, f_phi, epsilon, 32.0, radial_nodes + 8, 64, n_theta)
    elif method == "richardson":
        vals = [_line_damped(f_psi, f_phi, epsilon, d, radial_nodes, n_theta) for d in deltas]
        d = np.asarray(deltas, dtype=float)
        if d.size < 3:
            raise ParameterError("richardson extrapolation needs at least three deltas")
        # polynomial extrapolation in delta through all samples, and through all but the largest
        fine = complex(np.linalg.solve(np.vander(d, d.size, increasing=True), vals)[0])
        coarse = complex(np.linalg.solve(np.vander(d[1:], d.size - 1, increasing=True), vals[1:])[0])
    else:
        raise ParameterError(f"unknown method {method!r}")
    residual = abs(fine - coarse)
    if residual > tol:
        raise AccuracyError(
            f"line-route estimates disagree by {residual:.3g} (> {tol:g})", residual=residual)
    return fine


def inner_mixed(f_psi: ConjugateFunction, phi: BargmannFunction,
                grid: PhaseSpaceGrid | None = None, method: str = "termwise") -> complex:
    """(psi, phi) = int conj(t) conj(f_psi(t)) phi(conj(t)) d^2mu(t).

    Termwise, conj(t)^{-n} against conj(t)^m pairs only n = m, leaving
    sum_n conj(a_n) b_n. ``method="grid"`` sums the integrand on the grid.
    """
    if method == "termwise":
        a = _coefficients(f_psi)
        return inner_series(FockCoefficients(a), phi.source)
    if method != "grid":
        raise ParameterError(f"unknown method {method!r}")
    grid = grid or phase_space_grid()
    need = max(f_psi.truncation, phi.degree)
    if need > grid.max_exact_degree:
        raise ParameterError(f"grid exactness budget {grid.max_exact_degree} is below {need}")
    t = grid.points
    vals = np.conj(t) * np.conj(laurent_sum(f_psi.laurent, t)) * evaluate(phi, np.conj(t))
    return complex(np.sum(grid.weights * vals))


def overlap_report(s_psi: FockCoefficients, s_phi: FockCoefficients, line: bool = True) -> OverlapReport:
    """All routes for one pair of states, with the largest pairwise disagreement."""
    from .conjugate import to_conjugate

    f_psi, f_phi = to_conjugate(s_psi), to_conjugate(s_phi)
    series = inner_series(s_psi, s_phi)
    double = inner_conjugate_double(f_psi, f_phi)
    mixed = inner_mixed(f_psi, BargmannFunction(s_phi))
    values = [series, double, mixed]
    value_line = None
    if line:
        value_line = inner_conjugate_line(f_psi, f_phi)
        values.append(value_line)
    spread = max(abs(x - y) for x in values for y in values)
    return OverlapReport(series, double, value_line, mixed, float(spread))
