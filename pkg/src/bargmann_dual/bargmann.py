"""Bargmann representation psi(z*) = <z|psi> of truncated states.

Everything flows through :class:`~bargmann_dual.states.FockCoefficients`;
a :class:`BargmannFunction` is the polynomial sum a_n z*^n / sqrt(n!).
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from functools import cached_property
from typing import Iterable

import numpy as np

from .errors import ParameterError, ReliabilityWarning
from .numerics import PhaseSpaceGrid, phase_space_grid, sqrt_factorials
from .states import FockCoefficients, OscillatorFrame

__all__ = [
    "BargmannFunction",
    "evaluate",
    "inner_bargmann",
    "coeff_extract",
    "reproduce",
    "apply_bargmann_operator",
    "bargmann_ho_hamiltonian",
    "position_overlap",
]


@dataclass(frozen=True, eq=False)
class BargmannFunction:
    source: FockCoefficients

    @cached_property
    def taylor(self) -> np.ndarray:
        """Power-series coefficients d_n = a_n / sqrt(n!)."""
        d = self.source.coeffs / sqrt_factorials(self.source.truncation)
        d.setflags(write=False)
        return d

    @property
    def degree(self) -> int:
        return self.source.truncation

    def __call__(self, zstar):
        return evaluate(self, zstar)

    @classmethod
    def from_taylor(cls, d, **kwargs) -> "BargmannFunction":
        d = np.asarray(d, dtype=complex)
        return cls(FockCoefficients(d * sqrt_factorials(d.size - 1), **kwargs))


def evaluate(psi: BargmannFunction, zstar):
    """Horner evaluation of the truncated series at z* (scalar or array)."""
    zstar = np.asarray(zstar, dtype=complex)
    acc = np.zeros_like(zstar)
    for d in psi.taylor[::-1]:
        acc = acc * zstar + d
    return acc[()]


def _require_budget(grid: PhaseSpaceGrid, *degrees):
    need = max(degrees)
    if need > grid.max_exact_degree:
        raise ParameterError(
            f"grid exactness budget {grid.max_exact_degree} is below the required degree {need}")


def inner_bargmann(psi: BargmannFunction, phi: BargmannFunction,
                   grid: PhaseSpaceGrid | None = None) -> complex:
    """(psi, phi) = integral conj(psi(z*)) phi(z*) d^2mu(z) on the grid."""
    grid = grid or phase_space_grid()
    _require_budget(grid, psi.degree, phi.degree)
    zs = np.conj(grid.points)
    return complex(np.sum(grid.weights * np.conj(evaluate(psi, zs)) * evaluate(phi, zs)))


def coeff_extract(psi: BargmannFunction, n: int, grid: PhaseSpaceGrid | None = None) -> complex:
    """a_n = (1/sqrt(n!)) integral psi(z*) z^n d^2mu(z)."""
    grid = grid or phase_space_grid()
    _require_budget(grid, n, psi.degree)
    z = grid.points
    integral = np.sum(grid.weights * evaluate(psi, np.conj(z)) * z**n)
    return complex(integral / sqrt_factorials(n)[n])


def reproduce(psi: BargmannFunction, wstar: complex, grid: PhaseSpaceGrid | None = None) -> complex:
    """psi(w*) recovered as integral e^{w* z} psi(z*) d^2mu(z)."""
    grid = grid or phase_space_grid()
    _require_budget(grid, psi.degree)
    if abs(wstar) > grid.radius:
        warnings.warn(
            f"|w*| = {abs(wstar):.3g} exceeds the grid reliability radius {grid.radius:.3g}",
            ReliabilityWarning, stacklevel=2)
    z = grid.points
    return complex(np.sum(grid.weights * np.exp(wstar * z) * evaluate(psi, np.conj(z))))


def _multiply_zstar(d):
    return np.concatenate(([0.0], d))


def _differentiate(d):
    if d.size == 1:
        return np.zeros(1, dtype=complex)
    return d[1:] * np.arange(1, d.size)


def apply_bargmann_operator(psi: BargmannFunction, word: Iterable[str]) -> BargmannFunction:
    """Apply a product of ladder operators, written left to right as in a^dag a.

    ``"create"`` multiplies by z*, ``"annihilate"`` differentiates in z*. The
    rightmost letter acts first. Polynomial degree grows with each creation,
    so nothing is truncated here.
    """
    d = np.array(psi.taylor)
    for letter in reversed(list(word)):
        if letter in ("create", "+", "adag"):
            d = _multiply_zstar(d)
        elif letter in ("annihilate", "-", "a"):
            d = _differentiate(d)
        else:
            raise ParameterError(f"unknown ladder letter {letter!r}")
    return BargmannFunction.from_taylor(d)


def bargmann_ho_hamiltonian(psi: BargmannFunction, frame: OscillatorFrame | None = None) -> BargmannFunction:
    """hbar omega (z* d/dz* + 1/2) psi."""
    frame = frame or OscillatorFrame()
    d = psi.taylor
    n = np.arange(d.size)
    return BargmannFunction.from_taylor(frame.hbar * frame.omega * (n + 0.5) * d)


def position_overlap(zstar, q: float, frame: OscillatorFrame | None = None):
    """Closed form of <z|q>."""
    frame = frame or OscillatorFrame()
    b = frame.b
    zstar = np.asarray(zstar, dtype=complex)
    x = q / b
    value = math.pi ** -0.25 * b ** -0.5 * np.exp(-x * x / 2 - zstar**2 / 2 + math.sqrt(2) * zstar * x)
    return value[()]
