"""Harmonic-oscillator propagators in both representations and related matrix elements.

Also hosts a small truncated-Fock-space evolution used as a numerically
exact reference for non-trivial Hamiltonians.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np
from scipy import linalg

from .conjugate import ConjugateFunction, PoleForm
from .errors import ParameterError, SingularityError
from .numerics import sqrt_factorials
from .states import DEFAULT_TRUNCATION, OscillatorFrame, coherent_state

__all__ = [
    "PropagatorSample",
    "exact_ho_bargmann",
    "exact_ho_conjugate",
    "ho_conjugate_function",
    "diagonal_trace_series",
    "diagonal_trace_direct",
    "matrix_element_conjugate",
    "matrix_element_laurent",
    "ladder_matrices",
    "fock_propagator",
]

_POLE_TOL = 1e-14


@dataclass(frozen=True)
class PropagatorSample:
    t: float
    argument: complex
    source: complex
    value: complex


def exact_ho_bargmann(zstar, z0: complex, t: float, frame: OscillatorFrame | None = None):
    """k(z*, z0, t) = <z| e^{-iHt/hbar} |z0> = exp(z0 e^{-i omega t} z* - i omega t / 2)."""
    frame = frame or OscillatorFrame()
    phase = cmath.exp(-1j * frame.omega * t)
    zstar = np.asarray(zstar, dtype=complex)
    return np.exp(z0 * phase * zstar - 0.5j * frame.omega * t)[()]


def exact_ho_conjugate(w, z0: complex, t: float, frame: OscillatorFrame | None = None):
    """e^{-i omega t/2} / (w - z0 e^{-i omega t})."""
    frame = frame or OscillatorFrame()
    pole = z0 * cmath.exp(-1j * frame.omega * t)
    w = np.asarray(w, dtype=complex)
    d = w - pole
    if np.any(np.abs(d) <= _POLE_TOL * max(1.0, abs(pole))):
        raise SingularityError(f"w coincides with the propagator pole {pole}")
    if np.any(np.abs(w) == 0):
        raise SingularityError("exact_ho_conjugate: w = 0")
    return (cmath.exp(-0.5j * frame.omega * t) / d)[()]


def ho_conjugate_function(z0: complex, t: float, frame: OscillatorFrame | None = None,
                          N: int = DEFAULT_TRUNCATION) -> ConjugateFunction:
    """The conjugate propagator as a pole form with its Laurent data."""
    frame = frame or OscillatorFrame()
    pole = complex(z0) * cmath.exp(-1j * frame.omega * t)
    scale = cmath.exp(-0.5j * frame.omega * t)
    c = scale * pole ** np.arange(N + 1)
    return ConjugateFunction(c, PoleForm(pole, scale), abs(pole) ** (N + 1))


def diagonal_trace_series(w, t: float, N: int, frame: OscillatorFrame | None = None):
    """(1/w) sum_{n<N} e^{-i omega (n+1/2) t}, summed in closed form."""
    frame = frame or OscillatorFrame()
    if N < 0:
        raise ParameterError("diagonal_trace_series: N must be non-negative")
    w = np.asarray(w, dtype=complex)
    if np.any(w == 0):
        raise SingularityError("diagonal_trace_series: w = 0")
    x = cmath.exp(-1j * frame.omega * t)
    half = cmath.exp(-0.5j * frame.omega * t)
    # resonance: omega t in 2 pi Z makes the ratio 0/0
    phase = (frame.omega * t) % (2 * math.pi)
    if min(phase, 2 * math.pi - phase) < 1e-12:
        total = N * half
    else:
        total = half * (1 - x ** N) / (1 - x)
    return (total / w)[()]


def diagonal_trace_direct(w, t: float, N: int, frame: OscillatorFrame | None = None):
    """Term-by-term version of :func:`diagonal_trace_series`."""
    frame = frame or OscillatorFrame()
    n = np.arange(N)
    return complex(np.sum(np.exp(-1j * frame.omega * (n + 0.5) * t)) / w)


def matrix_element_conjugate(op: str, zprime: complex, w, frame: OscillatorFrame | None = None):
    """Closed forms of f_{X|z'>}(w) and f_{P|z'>}(w).

    X: (b/sqrt2) [w/(w - z') + 1/(w - z')^2]
    P: (c/(i sqrt2)) [w/(w - z') - 1/(w - z')^2]

    The w/(w - z') piece carries the constant b/sqrt2 (resp. c/(i sqrt2)) left
    by multiplying the pole by w; it is kept here as written and dropped by
    :func:`matrix_element_laurent`, which lives on negative powers only.
    """
    frame = frame or OscillatorFrame()
    w = np.asarray(w, dtype=complex)
    d = w - zprime
    if np.any(np.abs(d) <= _POLE_TOL * max(1.0, abs(zprime))):
        raise SingularityError(f"w coincides with the pole at {zprime}")
    op = op.upper()
    if op == "X":
        return (frame.b / math.sqrt(2) * (w / d + 1 / d**2))[()]
    if op == "P":
        return (frame.c / (1j * math.sqrt(2)) * (w / d - 1 / d**2))[()]
    raise ParameterError(f"matrix_element_conjugate: op must be 'X' or 'P', got {op!r}")


def matrix_element_laurent(op: str, zprime: complex, frame: OscillatorFrame | None = None,
                           N: int = DEFAULT_TRUNCATION) -> ConjugateFunction:
    """Laurent data of the matrix element, i.e. to_conjugate of X|z'> or P|z'>.

    Expanding the closed form: w/(w - z') - 1 = sum z'^{n+1}/w^{n+1} and
    1/(w - z')^2 = sum n z'^{n-1}/w^{n+1}.
    """
    frame = frame or OscillatorFrame()
    n = np.arange(N + 1)
    zp = complex(zprime)
    shifted = zp ** (n + 1)
    derivative = np.where(n > 0, n * zp ** np.maximum(n - 1, 0), 0.0)
    op = op.upper()
    if op == "X":
        c = frame.b / math.sqrt(2) * (shifted + derivative)
    elif op == "P":
        c = frame.c / (1j * math.sqrt(2)) * (shifted - derivative)
    else:
        raise ParameterError(f"matrix_element_laurent: op must be 'X' or 'P', got {op!r}")
    return ConjugateFunction(c)


def ladder_matrices(D: int):
    """Annihilation and creation matrices on the span of |0>..|D-1>."""
    if D < 2:
        raise ParameterError("ladder_matrices: need D >= 2")
    a = np.diag(np.sqrt(np.arange(1, D, dtype=float)), 1).astype(complex)
    return a, a.conj().T


def fock_propagator(hamiltonian: np.ndarray, z_i: complex, zf_star, T: float, hbar: float = 1.0):
    """<z_f| e^{-iHT/hbar} |z_i> with H given as a truncated Fock matrix.

    The coherent ket |z_i> is truncated to the matrix size; choose the size
    well beyond |z_i|^2 and |z_f|^2.
    """
    D = hamiltonian.shape[0]
    ket = coherent_state(z_i, D - 1).coeffs
    evolved = linalg.expm(-1j * T / hbar * hamiltonian) @ ket
    d = evolved / sqrt_factorials(D - 1)
    zf = np.asarray(zf_star, dtype=complex)
    acc = np.zeros_like(zf)
    for dn in d[::-1]:
        acc = acc * zf + dn
    return acc[()]

