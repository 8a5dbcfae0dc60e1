"""Semiclassical coherent-state propagator from complex classical trajectories.

A trajectory (u(t), v(t)) obeys

    du/dt = (1/i hbar) dH/dv,    dv/dt = -(1/i hbar) dH/du,

with H the Weyl symbol of the Hamiltonian. The Bargmann propagator is
approximated by sqrt(1/M_vv) exp(iS/hbar) summed over trajectories with
u(0) = z_i and v(T) = z_f*, where M is the tangent matrix of the flow and

    S = int_0^T [(i hbar/2)(u' v - u v') - H] dt - (i hbar/2)[u(T) z_f* + z_i v(0)].

The conjugate propagator follows by a saddle-point Laplace transform in z_f*,
which replaces the boundary condition by u(T) = w.
"""

from __future__ import annotations

import cmath
import math
import warnings
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .errors import (
    ContractError,
    DegenerateSaddle,
    EmptyTrajectorySum,
    FocalPointError,
    FocalPointWarning,
    IntegrationBlowUp,
    ParameterError,
    RootNotFound,
)
from .numerics import complex_fd_derivative
from .propagators import ladder_matrices
from .states import OscillatorFrame

__all__ = [
    "WeylHamiltonian",
    "ComplexTrajectory",
    "SemiclassicalResult",
    "GradientCheck",
    "zero_hamiltonian",
    "ho_hamiltonian",
    "quadratic_hamiltonian",
    "quartic_hamiltonian",
    "integrate_trajectory",
    "action",
    "shoot_bargmann",
    "shoot_conjugate",
    "ksc_bargmann",
    "ksc_conjugate",
    "gradient_check",
    "legendre_check",
    "saddle_residual",
    "DEFAULT_STEPS",
]

DEFAULT_STEPS = 1024
SHOOT_TOL = 1e-10
SINGULAR_JACOBIAN = 1e-8


@dataclass(frozen=True, eq=False)
class WeylHamiltonian:
    """An analytic Weyl symbol H(u, v) with its first and second derivatives.

    ``fock_matrix(D)``, when given, returns the Weyl-ordered operator on the
    first D Fock states and serves as the exact reference.
    """

    H: Callable[[complex, complex], complex]
    dH_du: Callable[[complex, complex], complex]
    dH_dv: Callable[[complex, complex], complex]
    d2H_dudu: Callable[[complex, complex], complex]
    d2H_dudv: Callable[[complex, complex], complex]
    d2H_dvdv: Callable[[complex, complex], complex]
    hbar: float = 1.0
    name: str = "custom"
    fock_matrix: Callable[[int], np.ndarray] | None = field(default=None, repr=False)
    self_test: bool = True

    def __post_init__(self):
        if not (math.isfinite(self.hbar) and self.hbar > 0):
            raise ParameterError("WeylHamiltonian.hbar must be positive")
        if self.self_test:
            self.check_derivatives()

    def check_derivatives(self, points: int = 20, tol: float = 1e-6, seed: int = 0):
        """Compare the supplied derivatives with complex central differences."""
        rng = np.random.default_rng(seed)
        us = rng.normal(size=points) + 1j * rng.normal(size=points)
        vs = rng.normal(size=points) + 1j * rng.normal(size=points)
        pairs = [
            ("dH_du", self.dH_du, lambda u, v: lambda x: self.H(x, v)),
            ("dH_dv", self.dH_dv, lambda u, v: lambda x: self.H(u, x)),
            ("d2H_dudu", self.d2H_dudu, lambda u, v: lambda x: self.dH_du(x, v)),
            ("d2H_dudv", self.d2H_dudv, lambda u, v: lambda x: self.dH_du(u, x)),
            ("d2H_dvdv", self.d2H_dvdv, lambda u, v: lambda x: self.dH_dv(u, x)),
        ]
        for u, v in zip(us, vs):
            u, v = complex(u), complex(v)
            for label, exact, partial in pairs:
                arg = u if label in ("dH_du", "d2H_dudu") else v
                fd = complex_fd_derivative(partial(u, v), arg, 1e-4)
                ref = exact(u, v)
                if abs(fd - ref) > tol * max(1.0, abs(ref)):
                    raise ParameterError(
                        f"{self.name}: supplied {label} disagrees with finite differences at "
                        f"(u, v) = ({u:.3g}, {v:.3g}): {ref} vs {fd}")


def zero_hamiltonian(hbar: float = 1.0) -> WeylHamiltonian:
    z = lambda u, v: 0j  # noqa: E731
    return WeylHamiltonian(z, z, z, z, z, z, hbar, "zero",
                           lambda D: np.zeros((D, D), dtype=complex))


def quadratic_hamiltonian(alpha: complex, beta: complex, gamma: complex,
                          hbar: float = 1.0) -> WeylHamiltonian:
    """H = hbar (alpha uv + beta u^2/2 + gamma v^2/2).

    The operator is hbar [alpha (n + 1/2) + beta a^2/2 + gamma adag^2/2].
    """
    h = hbar

    def matrix(D):
        a, ad = ladder_matrices(D)
        n = ad @ a
        return h * (alpha * (n + 0.5 * np.eye(D)) + 0.5 * beta * a @ a + 0.5 * gamma * ad @ ad)

    return WeylHamiltonian(
        lambda u, v: h * (alpha * u * v + 0.5 * beta * u * u + 0.5 * gamma * v * v),
        lambda u, v: h * (alpha * v + beta * u),
        lambda u, v: h * (alpha * u + gamma * v),
        lambda u, v: h * beta,
        lambda u, v: h * alpha,
        lambda u, v: h * gamma,
        hbar, f"quadratic({alpha}, {beta}, {gamma})", matrix)


def ho_hamiltonian(frame: OscillatorFrame | None = None) -> WeylHamiltonian:
    """H = hbar omega uv."""
    frame = frame or OscillatorFrame()
    H = quadratic_hamiltonian(frame.omega, 0.0, 0.0, frame.hbar)
    return WeylHamiltonian(H.H, H.dH_du, H.dH_dv, H.d2H_dudu, H.d2H_dudv, H.d2H_dvdv,
                           frame.hbar, "ho", H.fock_matrix, self_test=False)


def quartic_hamiltonian(omega: float, lam: complex, hbar: float = 1.0) -> WeylHamiltonian:
    """H = hbar omega uv + lam (uv)^2.

    Symmetrising the orderings of (uv)^2 gives the operator n^2 + n + 1/2,
    so the reference matrix is hbar omega (n + 1/2) + lam (n^2 + n + 1/2).
    """
    h = hbar

    def matrix(D):
        n = np.diag(np.arange(D, dtype=float)).astype(complex)
        eye = np.eye(D)
        return h * omega * (n + 0.5 * eye) + lam * (n @ n + n + 0.5 * eye)

    return WeylHamiltonian(
        lambda u, v: h * omega * u * v + lam * (u * v) ** 2,
        lambda u, v: h * omega * v + 2 * lam * u * v * v,
        lambda u, v: h * omega * u + 2 * lam * u * u * v,
        lambda u, v: 2 * lam * v * v,
        lambda u, v: h * omega + 4 * lam * u * v,
        lambda u, v: 2 * lam * u * u,
        hbar, f"quartic({omega}, {lam})", matrix)


@dataclass(frozen=True, eq=False)
class ComplexTrajectory:
    """A solution of the complex equations of motion on [0, T].

    ``S_dynamic`` is the time integral of (i hbar/2)(u'v - uv') - H; the
    boundary term is added by :func:`action`. ``M`` is ordered
    ((M_uu, M_uv), (M_vu, M_vv)). ``error`` is the step-halving estimate of
    the error in (u(T), v(T), M, S_dynamic).
    """

    times: np.ndarray
    u: np.ndarray
    v: np.ndarray
    M: np.ndarray
    S_dynamic: complex
    error: float
    M_uv_path: np.ndarray = field(repr=False)
    M_vv_path: np.ndarray = field(repr=False)
    S: complex | None = None
    hbar: float = 1.0

    @property
    def T(self) -> float:
        return float(self.times[-1])

    @property
    def u0(self) -> complex:
        return complex(self.u[0])

    @property
    def v0(self) -> complex:
        return complex(self.v[0])

    @property
    def uT(self) -> complex:
        return complex(self.u[-1])

    @property
    def vT(self) -> complex:
        return complex(self.v[-1])

    @property
    def det_M(self) -> complex:
        M = self.M
        return complex(M[0, 0] * M[1, 1] - M[0, 1] * M[1, 0])


def _rk4_run(H: WeylHamiltonian, u0: complex, v0: complex, T: float, steps: int, record: bool):
    hb = H.hbar
    k = 1.0 / (1j * hb)
    dHu, dHv = H.dH_du, H.dH_dv
    Huu, Huv, Hvv = H.d2H_dudu, H.d2H_dudv, H.d2H_dvdv
    Hf = H.H

    def rhs(y):
        u, v, m11, m12, m21, m22, _ = y
        hu = dHu(u, v)
        hv = dHv(u, v)
        du = k * hv
        dv = -k * hu
        a = k * Huv(u, v)
        b = k * Hvv(u, v)
        c = -k * Huu(u, v)
        # d = -a: the linearised flow is traceless
        return (du, dv,
                a * m11 + b * m21, a * m12 + b * m22,
                c * m11 - a * m21, c * m12 - a * m22,
                0.5j * hb * (du * v - u * dv) - Hf(u, v))

    y = (complex(u0), complex(v0), 1 + 0j, 0j, 0j, 1 + 0j, 0j)
    dt = T / steps
    us = [y[0]] if record else None
    vs = [y[1]] if record else None
    muv = [y[3]] if record else None
    mvv = [y[5]] if record else None
    for i in range(steps):
        k1 = rhs(y)
        k2 = rhs(tuple(a + 0.5 * dt * b for a, b in zip(y, k1)))
        k3 = rhs(tuple(a + 0.5 * dt * b for a, b in zip(y, k2)))
        k4 = rhs(tuple(a + dt * b for a, b in zip(y, k3)))
        y = tuple(a + dt / 6.0 * (b1 + 2 * b2 + 2 * b3 + b4)
                  for a, b1, b2, b3, b4 in zip(y, k1, k2, k3, k4))
        if not all(cmath.isfinite(x) for x in y):
            raise IntegrationBlowUp(f"trajectory left the finite range at t = {(i + 1) * dt:.6g}",
                                    time=(i + 1) * dt)
        if record:
            us.append(y[0])
            vs.append(y[1])
            muv.append(y[3])
            mvv.append(y[5])
    return y, (us, vs, muv, mvv)


def integrate_trajectory(H: WeylHamiltonian, u0: complex, v0: complex, T: float,
                         steps: int = DEFAULT_STEPS, estimate_error: bool = True) -> ComplexTrajectory:
    """Fixed-step RK4 for the trajectory, its tangent matrix and the action integrand.

    The error estimate compares with a run at twice the steps, (y_n - y_2n)/15.
    """
    if not (math.isfinite(T) and T >= 0):
        raise ParameterError("integrate_trajectory: T must be finite and non-negative")
    if steps < 16:
        raise ParameterError("integrate_trajectory: steps must be at least 16")
    y, (us, vs, muv, mvv) = _rk4_run(H, u0, v0, T, steps, True)
    error = 0.0
    if estimate_error:
        y2, _ = _rk4_run(H, u0, v0, T, 2 * steps, False)
        error = max(abs(a - b) for a, b in zip(y, y2)) / 15.0
    M = np.array([[y[2], y[3]], [y[4], y[5]]], dtype=complex)
    return ComplexTrajectory(np.linspace(0.0, T, steps + 1), np.array(us), np.array(vs), M, y[6],
                             float(error), np.array(muv), np.array(mvv), hbar=H.hbar)


def action(traj: ComplexTrajectory, H: WeylHamiltonian | None = None, zf_star: complex | None = None,
           tol: float = 1e-8) -> complex:
    """Total action with the boundary term, for the endpoint value z_f*."""
    zf = traj.vT if zf_star is None else complex(zf_star)
    if abs(traj.vT - zf) > tol * max(1.0, abs(zf)):
        raise ContractError(f"trajectory ends at v(T) = {traj.vT}, not at z_f* = {zf}")
    hb = traj.hbar if H is None else H.hbar
    return traj.S_dynamic - 0.5j * hb * (traj.uT * zf + traj.u0 * traj.v0)


def _with_action(traj: ComplexTrajectory, S: complex) -> ComplexTrajectory:
    return ComplexTrajectory(traj.times, traj.u, traj.v, traj.M, traj.S_dynamic, traj.error,
                             traj.M_uv_path, traj.M_vv_path, S, traj.hbar)


def _newton(H, z_i, target, T, v0, steps, which, max_iter):
    residual = math.inf
    for _ in range(max_iter):
        traj = integrate_trajectory(H, z_i, v0, T, steps, estimate_error=False)
        end = traj.vT if which == "v" else traj.uT
        jac = traj.M[1, 1] if which == "v" else traj.M[0, 1]
        residual = abs(end - target)
        if residual <= 1e-3 * SHOOT_TOL * max(1.0, abs(target)):
            return traj, v0, jac, residual
        if abs(jac) < SINGULAR_JACOBIAN:
            return traj, v0, jac, residual
        step = (end - target) / jac
        v0 = v0 - step
        if not cmath.isfinite(v0):
            break
        if abs(step) <= 1e-15 * max(1.0, abs(v0)):
            traj = integrate_trajectory(H, z_i, v0, T, steps, estimate_error=False)
            end = traj.vT if which == "v" else traj.uT
            jac = traj.M[1, 1] if which == "v" else traj.M[0, 1]
            return traj, v0, jac, abs(end - target)
    return None, v0, None, residual


def shoot_bargmann(H: WeylHamiltonian, z_i: complex, zf_star: complex, T: float,
                   v0_guess: complex | None = None, steps: int = DEFAULT_STEPS,
                   max_iter: int = 50, estimate_error: bool = True) -> ComplexTrajectory:
    """Newton on v(0) for u(0) = z_i, v(T) = z_f*, with Jacobian M_vv."""
    v0 = complex(zf_star if v0_guess is None else v0_guess)
    if not cmath.isfinite(v0):
        raise ParameterError("shoot_bargmann: v0_guess must be finite")
    traj, v0, jac, residual = _newton(H, complex(z_i), complex(zf_star), T, v0, steps, "v", max_iter)
    if traj is None or residual > SHOOT_TOL * max(1.0, abs(zf_star)):
        raise RootNotFound(f"shooting for v(T) = {zf_star} failed, residual {residual:.3g}",
                           residual=residual)
    if abs(jac) < SINGULAR_JACOBIAN:
        warnings.warn(f"|M_vv| = {abs(jac):.3g} near a focal point", FocalPointWarning, stacklevel=2)
    if estimate_error:
        traj = integrate_trajectory(H, z_i, v0, T, steps)
    return _with_action(traj, action(traj, H, zf_star))


def shoot_conjugate(H: WeylHamiltonian, z_i: complex, w: complex, T: float,
                    v0_guess: complex | None = None, steps: int = DEFAULT_STEPS,
                    max_iter: int = 50, estimate_error: bool = True) -> ComplexTrajectory:
    """Newton on v(0) for u(0) = z_i, u(T) = w, with Jacobian M_uv.

    The action stored on the result is the Bargmann action at z_f* = v(T).
    """
    v0 = complex(0.0 if v0_guess is None else v0_guess)
    if not cmath.isfinite(v0):
        raise ParameterError("shoot_conjugate: v0_guess must be finite")
    probe = integrate_trajectory(H, z_i, v0, T, steps, estimate_error=False)
    if abs(probe.M[0, 1]) < SINGULAR_JACOBIAN:
        raise DegenerateSaddle(
            f"M_uv = {probe.M[0, 1]:.3g}: u(T) does not depend on v(0); the Laplace integral over "
            "z_f* has a linear exponent and must be done exactly")
    traj, v0, jac, residual = _newton(H, complex(z_i), complex(w), T, v0, steps, "u", max_iter)
    if traj is None or residual > SHOOT_TOL * max(1.0, abs(w)):
        raise RootNotFound(f"shooting for u(T) = {w} failed, residual {residual:.3g}", residual=residual)
    if abs(jac) < SINGULAR_JACOBIAN:
        raise DegenerateSaddle(f"M_uv = {jac:.3g} at the converged trajectory")
    if estimate_error:
        traj = integrate_trajectory(H, z_i, v0, T, steps)
    return _with_action(traj, action(traj, H))


def _sqrt_inverse_continued(path: np.ndarray) -> complex:
    # sqrt(1/m) continued from m = 1 at t = 0 by unwrapping the phase of m(t)
    phase = np.unwrap(np.angle(path))
    return complex(abs(path[-1]) ** -0.5 * cmath.exp(-0.5j * (phase[-1] - phase[0])))


@dataclass(frozen=True)
class SemiclassicalResult:
    value: complex
    trajectories: tuple
    contributions: tuple
    fallback_used: bool = False


def _distinct(trajs, tol=1e-8):
    out = []
    for tr in trajs:
        if all(abs(tr.v0 - o.v0) > tol * max(1.0, abs(o.v0)) for o in out):
            out.append(tr)
    return out


def ksc_bargmann(H: WeylHamiltonian, z_i: complex, zf_star: complex, T: float,
                 guesses: Sequence[complex] | None = None, steps: int = DEFAULT_STEPS,
                 full_output: bool = False):
    """sum over distinct converged trajectories of sqrt(1/M_vv) e^{iS/hbar}."""
    guesses = [zf_star] if guesses is None else list(guesses)
    found = []
    for g in guesses:
        try:
            found.append(shoot_bargmann(H, z_i, zf_star, T, g, steps))
        except (RootNotFound, IntegrationBlowUp):
            continue
    found = _distinct(found)
    if not found:
        raise EmptyTrajectorySum("no initial guess converged")
    contributions = []
    for tr in found:
        if abs(tr.M[1, 1]) < SINGULAR_JACOBIAN:
            raise FocalPointError(
                f"M_vv = {tr.M[1, 1]:.3g}: the Bargmann prefactor diverges; use ksc_conjugate")
        pref = _sqrt_inverse_continued(tr.M_vv_path)
        contributions.append(pref * cmath.exp(1j * tr.S / H.hbar))
    value = complex(sum(contributions))
    if full_output:
        return SemiclassicalResult(value, tuple(found), tuple(contributions))
    return value


def _linear_exponent_fallback(H, z_i, w, T, steps):
    # for M_uv = 0, u(T) is independent of z_f* and iS/hbar = alpha + u(T) z_f*
    tr = shoot_bargmann(H, z_i, 0.0, T, 0.0, steps)
    alpha = 1j * tr.S / H.hbar
    pref = _sqrt_inverse_continued(tr.M_vv_path)
    return pref * cmath.exp(alpha) / (w - tr.uT)


def ksc_conjugate(H: WeylHamiltonian, z_i: complex, w: complex, T: float,
                  guesses: Sequence[complex] | None = None, steps: int = DEFAULT_STEPS,
                  allow_fallback: bool = False, full_output: bool = False):
    """Saddle-point Laplace transform of the semiclassical propagator.

    Each trajectory with u(0) = z_i, u(T) = w contributes

        sqrt(1/M_vv) sqrt(2 pi / (-A)) e^{i S~/hbar},   A = M_uv / M_vv,
        S~ = S + i hbar w z_f*,  z_f* = v(T),

    where A = du(T)/dz_f* is the second derivative of the exponent and the
    Gaussian square root is oriented along the integration ray
    arg z* = -arg w. Together the prefactor is sqrt(2 pi) sqrt(-1/M_uv) on
    that branch.

    When M_uv vanishes identically (the harmonic oscillator, H = 0) the
    exponent is linear in z_f* and the transform is a pole; a
    :class:`DegenerateSaddle` carrying that exact value in ``fallback`` is
    raised, or the value is returned when ``allow_fallback`` is set.
    """
    guesses = [0.0] if guesses is None else list(guesses)
    found = []
    degenerate = None
    for g in guesses:
        try:
            found.append(shoot_conjugate(H, z_i, w, T, g, steps))
        except DegenerateSaddle as exc:
            degenerate = exc
        except (RootNotFound, IntegrationBlowUp):
            continue
    found = _distinct(found)
    if not found:
        if degenerate is None:
            raise EmptyTrajectorySum("no initial guess converged")
        fallback = _linear_exponent_fallback(H, z_i, w, T, steps)
        if allow_fallback:
            if full_output:
                return SemiclassicalResult(fallback, (), (fallback,), True)
            return fallback
        raise DegenerateSaddle(str(degenerate), fallback=fallback)
    direction = complex(np.conj(w)) / abs(w)
    contributions = []
    for tr in found:
        A = tr.M[0, 1] / tr.M[1, 1]
        gauss = direction * cmath.sqrt(2 * math.pi / (-A * direction * direction))
        pref = _sqrt_inverse_continued(tr.M_vv_path) * gauss
        S_tilde = tr.S + 1j * H.hbar * w * tr.vT
        contributions.append(pref * cmath.exp(1j * S_tilde / H.hbar))
    value = complex(sum(contributions))
    if full_output:
        return SemiclassicalResult(value, tuple(found), tuple(contributions))
    return value


@dataclass(frozen=True)
class GradientCheck:
    """Relative errors of the three action-gradient relations."""

    zf_star: float
    z_i: float
    T: float

    @property
    def worst(self) -> float:
        return max(self.zf_star, self.z_i, self.T)


def _rel(a, b):
    return abs(a - b) / max(abs(b), 1e-300)


def gradient_check(H: WeylHamiltonian, traj: ComplexTrajectory, h: float = 1e-4,
                   steps: int | None = None) -> GradientCheck:
    """Finite-difference checks of dS/dz_f* = -i hbar u(T), dS/dz_i = -i hbar v(0), dS/dT = -H(u(T), z_f*).

    Each neighbour is re-shot from the converged v(0); central differences
    with step ``h`` are compared with the analytic values.
    """
    steps = steps or (len(traj.times) - 1)
    z_i, zf, T = traj.u0, traj.vT, traj.T
    hb = H.hbar

    def S(zi_, zf_, T_):
        return shoot_bargmann(H, zi_, zf_, T_, traj.v0, steps, estimate_error=False).S

    d_zf = (S(z_i, zf + h, T) - S(z_i, zf - h, T)) / (2 * h)
    d_zi = (S(z_i + h, zf, T) - S(z_i - h, zf, T)) / (2 * h)
    d_T = (S(z_i, zf, T + h) - S(z_i, zf, T - h)) / (2 * h)
    energy = H.H(traj.uT, zf)
    return GradientCheck(
        zf_star=_rel(d_zf, -1j * hb * traj.uT),
        z_i=_rel(d_zi, -1j * hb * traj.v0),
        T=_rel(d_T, -energy) if abs(energy) > 0 else abs(d_T),
    )


def legendre_check(H: WeylHamiltonian, traj: ComplexTrajectory, h: float = 1e-4,
                   steps: int | None = None) -> float:
    """Relative error of dS~/dw = i hbar z_f* along the conjugate shooting family."""
    steps = steps or (len(traj.times) - 1)
    w = traj.uT
    hb = H.hbar

    def S_tilde(w_):
        tr = shoot_conjugate(H, traj.u0, w_, traj.T, traj.v0, steps, estimate_error=False)
        return tr.S + 1j * hb * w_ * tr.vT

    d = (S_tilde(w + h) - S_tilde(w - h)) / (2 * h)
    return _rel(d, 1j * hb * traj.vT)


def saddle_residual(H: WeylHamiltonian, traj: ComplexTrajectory, w: complex,
                    method: str = "analytic", h: float = 1e-4) -> float:
    """Residual of the saddle condition d/dz_f* [S + i hbar w z_f*] = 0.

    ``analytic`` uses dS/dz_f* = -i hbar u(T). ``fd`` differentiates the
    exponent by re-shooting the Bargmann problem at z_f* = v(T) +- h, so it
    does not rely on the gradient relation.
    """
    if method == "analytic":
        return abs(-1j * H.hbar * traj.uT + 1j * H.hbar * w)
    if method != "fd":
        raise ParameterError(f"unknown method {method!r}")
    steps = len(traj.times) - 1
    zf = traj.vT

    def exponent(z):
        tr = shoot_bargmann(H, traj.u0, z, traj.T, traj.v0, steps, estimate_error=False)
        return tr.S + 1j * H.hbar * w * z

    return abs((exponent(zf + h) - exponent(zf - h)) / (2 * h))
