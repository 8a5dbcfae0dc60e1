"""Truncated Fock-space states and ladder-operator algebra on their coefficients."""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from .errors import ParameterError
from .numerics import normalized_hermite

__all__ = [
    "OscillatorFrame",
    "FockCoefficients",
    "DEFAULT_TRUNCATION",
    "fock_basis_state",
    "coherent_state",
    "position_eigenstate",
    "momentum_eigenstate",
    "apply_annihilation",
    "apply_creation",
    "inner_series",
    "random_state",
]

DEFAULT_TRUNCATION = 32


@dataclass(frozen=True)
class OscillatorFrame:
    """Mass, frequency and hbar of the reference oscillator.

    The length and momentum scales b = sqrt(hbar/(m omega)) and
    c = sqrt(m hbar omega) satisfy b c = hbar.
    """

    mass: float = 1.0
    omega: float = 1.0
    hbar: float = 1.0

    def __post_init__(self):
        for name in ("mass", "omega", "hbar"):
            value = getattr(self, name)
            if not (math.isfinite(value) and value > 0):
                raise ParameterError(f"OscillatorFrame.{name} must be positive and finite, got {value!r}")

    @property
    def b(self) -> float:
        return math.sqrt(self.hbar / (self.mass * self.omega))

    @property
    def c(self) -> float:
        return math.sqrt(self.mass * self.hbar * self.omega)


@dataclass(frozen=True, eq=False)
class FockCoefficients:
    """Coefficients a_0..a_N of a ket in the oscillator basis.

    ``tail_bound`` estimates the magnitude of the first coefficient lost to
    truncation (zero when the state is exactly representable);
    ``truncation_loss`` is set when an operation pushed weight past index N.
    ``origin`` records how the state was built, e.g. ``("coherent", z0)``,
    so that conjugate closed forms can be attached downstream.
    """

    coeffs: np.ndarray
    tail_bound: float = 0.0
    truncation_loss: float = 0.0
    origin: tuple | None = field(default=None)

    def __post_init__(self):
        a = np.array(self.coeffs, dtype=complex).ravel()
        if a.size == 0:
            raise ParameterError("FockCoefficients needs at least one coefficient")
        if not np.all(np.isfinite(a)):
            raise ParameterError("FockCoefficients entries must be finite")
        a.setflags(write=False)
        object.__setattr__(self, "coeffs", a)

    @property
    def truncation(self) -> int:
        return self.coeffs.size - 1

    @property
    def norm2(self) -> float:
        return float(np.vdot(self.coeffs, self.coeffs).real)

    def __len__(self):
        return self.coeffs.size

    def __mul__(self, alpha):
        return FockCoefficients(alpha * self.coeffs, abs(alpha) * self.tail_bound,
                                abs(alpha) * self.truncation_loss)

    __rmul__ = __mul__

    def __add__(self, other):
        a, b = _pad(self, other)
        return FockCoefficients(a + b, self.tail_bound + other.tail_bound,
                                self.truncation_loss + other.truncation_loss)

    def __sub__(self, other):
        return self + (-1.0) * other

    def padded(self, N: int) -> "FockCoefficients":
        if N < self.truncation:
            raise ParameterError("padded: cannot shrink a state")
        a = np.zeros(N + 1, dtype=complex)
        a[: self.coeffs.size] = self.coeffs
        return replace(self, coeffs=a)

    def normalized(self) -> "FockCoefficients":
        norm = math.sqrt(self.norm2)
        if norm == 0:
            raise ParameterError("cannot normalize the zero vector")
        return replace(self, coeffs=self.coeffs / norm, tail_bound=self.tail_bound / norm)


def _pad(s: FockCoefficients, t: FockCoefficients):
    n = max(s.coeffs.size, t.coeffs.size)
    a = np.zeros(n, dtype=complex)
    b = np.zeros(n, dtype=complex)
    a[: s.coeffs.size] = s.coeffs
    b[: t.coeffs.size] = t.coeffs
    return a, b


def _check_truncation(N):
    if not isinstance(N, (int, np.integer)) or N < 0:
        raise ParameterError(f"truncation must be a non-negative integer, got {N!r}")


def fock_basis_state(n: int, N: int = DEFAULT_TRUNCATION) -> FockCoefficients:
    _check_truncation(N)
    if not 0 <= n <= N:
        raise ParameterError(f"fock_basis_state: need 0 <= n <= N, got n={n}, N={N}")
    a = np.zeros(N + 1, dtype=complex)
    a[n] = 1.0
    return FockCoefficients(a, origin=("fock", int(n)))


def coherent_state(z0: complex, N: int = DEFAULT_TRUNCATION, normalized: bool = False) -> FockCoefficients:
    """Bargmann ket |z0> = exp(z0 a^dag)|0>, coefficients z0^n / sqrt(n!).

    The normalisation exp(-|z0|^2/2) is applied only when ``normalized``.
    """
    _check_truncation(N)
    z0 = complex(z0)
    a = np.empty(N + 1, dtype=complex)
    a[0] = 1.0
    for n in range(1, N + 1):
        a[n] = a[n - 1] * z0 / math.sqrt(n)
    tail = abs(a[N] * z0) / math.sqrt(N + 1)
    scale = math.exp(-abs(z0) ** 2 / 2) if normalized else 1.0
    origin = None if normalized else ("coherent", z0)
    return FockCoefficients(scale * a, scale * tail, origin=origin)


def _hermite_function_coeffs(x, scale, N):
    # phi_n(x * scale) for the oscillator of length `scale`
    h = normalized_hermite(N, x)
    return math.pi ** -0.25 * scale ** -0.5 * math.exp(-x * x / 2) * h


def position_eigenstate(q: float, frame: OscillatorFrame | None = None,
                        N: int = DEFAULT_TRUNCATION) -> FockCoefficients:
    """a_n = <n|q> = phi_n(q), the oscillator eigenfunctions with length scale b."""
    _check_truncation(N)
    frame = frame or OscillatorFrame()
    if not math.isfinite(q):
        raise ParameterError("position_eigenstate: q must be finite")
    a = _hermite_function_coeffs(q / frame.b, frame.b, N + 1)
    return FockCoefficients(a[: N + 1].astype(complex), float(abs(a[N + 1])),
                            origin=("position", float(q), frame))


def momentum_eigenstate(p: float, frame: OscillatorFrame | None = None,
                        N: int = DEFAULT_TRUNCATION) -> FockCoefficients:
    """a_n = <n|p> = i^n phi_n(p) with length scale c.

    The i^n phase makes sum_n <q|n><n|p> the plane wave e^{ipq/hbar}/sqrt(2 pi hbar).
    """
    _check_truncation(N)
    frame = frame or OscillatorFrame()
    if not math.isfinite(p):
        raise ParameterError("momentum_eigenstate: p must be finite")
    a = _hermite_function_coeffs(p / frame.c, frame.c, N + 1)
    phase = 1j ** np.arange(N + 2)
    return FockCoefficients(phase[: N + 1] * a[: N + 1], float(abs(a[N + 1])),
                            origin=("momentum", float(p), frame))


def apply_annihilation(s: FockCoefficients) -> FockCoefficients:
    """a'_n = sqrt(n+1) a_{n+1}; the top entry becomes 0."""
    a = s.coeffs
    N = s.truncation
    out = np.zeros_like(a)
    out[:-1] = np.sqrt(np.arange(1, N + 1)) * a[1:]
    # the lost coefficient a_{N+1} would have landed in slot N
    return FockCoefficients(out, math.sqrt(N + 1) * s.tail_bound, s.truncation_loss)


def apply_creation(s: FockCoefficients) -> FockCoefficients:
    """a'_n = sqrt(n) a_{n-1}; weight pushed past index N is reported as truncation_loss."""
    a = s.coeffs
    N = s.truncation
    out = np.zeros_like(a)
    out[1:] = np.sqrt(np.arange(1, N + 1)) * a[:-1]
    lost = math.sqrt(N + 1) * abs(a[-1])
    tail = math.hypot(lost, math.sqrt(N + 2) * s.tail_bound)
    return FockCoefficients(out, tail, s.truncation_loss + lost)


def inner_series(psi: FockCoefficients, phi: FockCoefficients) -> complex:
    """<psi|phi> = sum conj(a_n) b_n, shorter vector zero-padded."""
    a, b = _pad(psi, phi)
    return complex(np.vdot(a, b))


def random_state(N: int, rng: np.random.Generator, top_zero: bool = False) -> FockCoefficients:
    """Complex Gaussian coefficients with unit expected norm per entry."""
    a = (rng.standard_normal(N + 1) + 1j * rng.standard_normal(N + 1)) / math.sqrt(2)
    if top_zero:
        a[-1] = 0.0
    return FockCoefficients(a)
