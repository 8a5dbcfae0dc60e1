"""The conjugate application psi(z*) -> f(w) = sum_n c_n / w^{n+1}, c_n = a_n sqrt(n!).

On f, the annihilation operator acts as multiplication by w and the creation
operator as -d/dw. Besides the Laurent data, a :class:`ConjugateFunction` may
carry an exact closed form (a simple pole for coherent states, an erfc form for
position/momentum eigenstates); when present it is used wherever it holds,
which analytically continues f inside the Laurent convergence circle.

Forward routes: Laurent coefficients, or the Laplace line integral
f(w) = (1/w) int_0^inf psi(x/w) e^{-x} dx.
Inverse routes: the Mellin (Bromwich) contour integral and the phase-space
formula psi(z*) = int w e^{z* w} f(w) d^2mu(w), evaluated termwise.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from .bargmann import BargmannFunction
from .errors import ConvergenceRegionError, DomainError, ParameterError, SingularityError
from .numerics import (
    PhaseSpaceGrid,
    QuadratureRule,
    erfc,
    faddeeva,
    gauss_laguerre_rule,
    phase_space_grid,
    sqrt_factorials,
)
from .states import (
    DEFAULT_TRUNCATION,
    FockCoefficients,
    OscillatorFrame,
    fock_basis_state,
    position_eigenstate,
)

__all__ = [
    "PoleForm",
    "ErfForm",
    "ConjugateFunction",
    "to_conjugate",
    "pole_function",
    "eval_conjugate",
    "laurent_sum",
    "laurent_tail_bound",
    "forward_line_integral",
    "inverse_mellin",
    "inverse_limit_at_origin",
    "inverse_phase_space",
    "coeff_from_conjugate",
    "apply_creation_conjugate",
    "apply_annihilation_conjugate",
    "apply_conjugate_ho_hamiltonian",
    "conjugate_ho_eigencheck",
    "erfc_branch_factor",
    "position_conjugate",
    "conjugate_reproduce",
    "conjugate_kernel",
]

_SINGULAR_TOL = 1e-300


@dataclass(frozen=True)
class PoleForm:
    """f(w) = scale / (w - z0)."""

    z0: complex
    scale: complex = 1.0


@dataclass(frozen=True)
class ErfForm:
    """Conjugate of a position (or momentum) eigenstate, valid for Re(w^2) > 0.

    For ``momentum=True`` the parameter is p and the scale c; with the i^n
    phase convention of :func:`~bargmann_dual.states.momentum_eigenstate`,
    f_p(w) = -i f_q(-i w) with q -> p, b -> c.
    """

    q: float
    frame: OscillatorFrame
    momentum: bool = False


@dataclass(frozen=True, eq=False)
class ConjugateFunction:
    laurent: np.ndarray
    closed_form: PoleForm | ErfForm | None = None
    tail_bound: float = 0.0
    truncation_loss: float = 0.0
    source: FockCoefficients | None = field(default=None, repr=False)

    def __post_init__(self):
        c = np.array(self.laurent, dtype=complex).ravel()
        if c.size == 0:
            raise ParameterError("ConjugateFunction needs at least one Laurent coefficient")
        c.setflags(write=False)
        object.__setattr__(self, "laurent", c)

    @property
    def truncation(self) -> int:
        return self.laurent.size - 1

    @property
    def fock(self) -> np.ndarray:
        """a_n = c_n / sqrt(n!)."""
        return self.laurent / sqrt_factorials(self.truncation)

    def laurent_only(self) -> "ConjugateFunction":
        return replace(self, closed_form=None)

    def __call__(self, w):
        return eval_conjugate(self, w)


def to_conjugate(s: FockCoefficients) -> ConjugateFunction:
    """c_n = a_n sqrt(n!), attaching the closed form of recognised sources."""
    c = s.coeffs * sqrt_factorials(s.truncation)
    closed = None
    if s.origin:
        kind = s.origin[0]
        if kind == "coherent":
            closed = PoleForm(s.origin[1])
        elif kind == "position":
            closed = ErfForm(s.origin[1], s.origin[2])
        elif kind == "momentum":
            closed = ErfForm(s.origin[1], s.origin[2], momentum=True)
    tail = s.tail_bound * math.sqrt(math.factorial(min(s.truncation + 1, 170)))
    return ConjugateFunction(c, closed, tail, source=s)


def pole_function(z0: complex, N: int = DEFAULT_TRUNCATION, scale: complex = 1.0) -> ConjugateFunction:
    """scale / (w - z0) with its Laurent data scale * z0^n, n <= N."""
    z0 = complex(z0)
    c = complex(scale) * z0 ** np.arange(N + 1)
    tail = abs(scale) * abs(z0) ** (N + 1)
    return ConjugateFunction(c, PoleForm(z0, complex(scale)), tail)


def laurent_sum(c: np.ndarray, w):
    """sum_n c_n / w^{n+1} by Horner's rule in 1/w."""
    w = np.asarray(w, dtype=complex)
    x = 1.0 / w
    acc = np.zeros_like(w)
    for cn in c[::-1]:
        acc = acc * x + cn
    return (acc * x)[()]


def laurent_tail_bound(f: ConjugateFunction, w) -> float:
    """Bound on the neglected Laurent tail at w.

    For a pole the geometric bound |s| |z0/w|^{N+1} / (|w| - |z0|) is exact;
    otherwise the magnitude of the last retained term is reported.
    """
    r = abs(w)
    N = f.truncation
    if isinstance(f.closed_form, PoleForm):
        z0 = abs(f.closed_form.z0)
        if r <= z0:
            return math.inf
        return abs(f.closed_form.scale) * (z0 / r) ** (N + 1) / (r - z0)
    return float(abs(f.laurent[-1]) / r ** (N + 1))


def _erf_form_value(form: ErfForm, w, branch="principal"):
    frame = form.frame
    if form.momentum:
        return -1j * _position_closed(form.q, frame.c, -1j * np.asarray(w, dtype=complex), branch)
    return _position_closed(form.q, frame.b, w, branch)


def _erf_domain(form: ErfForm, w):
    w = np.asarray(w, dtype=complex)
    arg = -1j * w if form.momentum else w
    return np.real(arg * arg) > 0


def eval_conjugate(f: ConjugateFunction, w, use_closed_form: bool = True):
    """Evaluate f(w); closed forms take precedence where they are valid."""
    w_arr = np.asarray(w, dtype=complex)
    if np.any(np.abs(w_arr) <= _SINGULAR_TOL):
        raise SingularityError("conjugate functions are singular at w = 0")
    form = f.closed_form if use_closed_form else None
    if isinstance(form, PoleForm):
        d = w_arr - form.z0
        if np.any(np.abs(d) <= _SINGULAR_TOL * max(1.0, abs(form.z0))):
            raise SingularityError(f"w coincides with the pole at {form.z0}")
        return (form.scale / d)[()]
    if isinstance(form, ErfForm):
        inside = _erf_domain(form, w_arr)
        out = np.empty_like(w_arr)
        if np.any(inside):
            out[inside] = _erf_form_value(form, w_arr[inside])
        if np.any(~inside):
            out[~inside] = laurent_sum(f.laurent, w_arr[~inside])
        return out[()]
    return laurent_sum(f.laurent, w_arr)


def forward_line_integral(psi, w: complex, rule: QuadratureRule | None = None) -> complex:
    """Laplace route: f(w) = (1/w) int_0^inf psi(x/w) e^{-x} dx along theta_z = theta_w.

    ``psi`` is a :class:`BargmannFunction` or any vectorised callable of z*.
    The rule must absorb e^{-x} (Gauss-Laguerre or ``contour_line``).
    """
    w = complex(w)
    if abs(w) <= _SINGULAR_TOL:
        raise SingularityError("forward_line_integral: w = 0")
    if isinstance(psi, BargmannFunction):
        origin = psi.source.origin
        if origin and origin[0] == "coherent" and abs(origin[1] / w) >= 1:
            raise ConvergenceRegionError(
                f"|z0/w| = {abs(origin[1] / w):.3g} >= 1: the series transform diverges here; "
                "evaluate the attached pole form instead")
    rule = rule or gauss_laguerre_rule(64)
    values = np.asarray(psi(rule.nodes / w), dtype=complex)
    return complex(np.sum(rule.weights * values) / w)


def _auto_epsilon(f: ConjugateFunction, zstar: complex) -> float:
    # balance e^{eps} against the Laurent growth sum |c_k| (|z*|/eps)^{k+1}
    r = abs(zstar)
    c = np.abs(f.laurent)
    k = np.arange(c.size)
    nz = c > 0
    floor = 0.5
    if isinstance(f.closed_form, PoleForm):
        floor = max(floor, (f.closed_form.z0 * zstar).real + 1.0)
    if not nz.any():
        return floor
    eps = np.geomspace(0.5, 4.0 * (c.size + 1), 256)
    with np.errstate(divide="ignore", over="ignore"):
        logs = np.log(c[nz])[None, :] + (k[nz] + 1)[None, :] * np.log(r / eps)[:, None]
    cost = eps + logs.max(axis=1)
    return float(max(eps[np.argmin(cost)], floor))


def inverse_limit_at_origin(f: ConjugateFunction) -> complex:
    """psi(0) = a_0 = c_0."""
    return complex(f.laurent[0])


def inverse_mellin(f: ConjugateFunction, zstar: complex, epsilon: float | None = None,
                   v_max: float | None = None, nodes: int = 4096, panel_order: int = 16) -> complex:
    """psi(z*) = (1/(2 pi z*)) int f(i v / z*) e^{iv} dv along Im v = -epsilon.

    The horizontal segment |Re v| <= v_max is integrated with composite
    Gauss-Legendre panels (graded towards the singularities near v = 0); the
    two semi-infinite tails are rotated onto vertical rays Re v = +-v_max,
    where e^{iv} decays and Gauss-Laguerre applies. ``nodes`` is the total
    node budget of the horizontal segment. By default epsilon is chosen to keep
    the integrand well scaled and the contour to the right of every pole of f.
    """
    zstar = complex(zstar)
    if abs(zstar) <= _SINGULAR_TOL:
        raise SingularityError("inverse_mellin: z* = 0; use inverse_limit_at_origin")
    eps = _auto_epsilon(f, zstar) if epsilon is None else float(epsilon)
    if not eps > 0:
        raise ParameterError("inverse_mellin: epsilon must be positive")
    if isinstance(f.closed_form, PoleForm):
        vp = -1j * f.closed_form.z0 * zstar
        if -vp.imag >= eps:
            raise ParameterError(
                f"epsilon = {eps:.3g} leaves the pole (Re(z0 z*) = {-vp.imag:.3g}) outside the contour")
    else:
        vp = 0j
    X = v_max if v_max is not None else 40.0 * max(1, f.truncation)
    X = max(X, 4.0 * abs(vp.real) + 4.0 * eps + 10.0)

    def g(v):
        return eval_conjugate(f, 1j * v / zstar) * np.exp(1j * v)

    # panel edges: fine near the singular region, ~unit width further out
    inner = min(X, 4.0 * eps + 2.0 * abs(vp.real) + 8.0)
    fine = min(eps, 1.0) / 2.0
    n_inner = max(2, int(math.ceil(2 * inner / fine)))
    budget = max(nodes // panel_order - n_inner, 2)
    n_outer = max(1, budget // 2)
    left = np.linspace(-X, -inner, n_outer + 1)
    mid = np.linspace(-inner, inner, n_inner + 1)
    right = np.linspace(inner, X, n_outer + 1)
    edges = np.concatenate((left, mid[1:], right[1:])) if inner < X else mid
    t, wt = np.polynomial.legendre.leggauss(panel_order)
    half = 0.5 * np.diff(edges)
    centre = 0.5 * (edges[1:] + edges[:-1])
    x = (centre[:, None] + half[:, None] * t[None, :]).ravel()
    wx = (half[:, None] * wt[None, :]).ravel()
    line = np.sum(wx * g(x - 1j * eps))

    lag = gauss_laguerre_rule(48)
    tails = 0j
    for sign in (1.0, -1.0):
        v = sign * X - 1j * eps + 1j * lag.nodes
        # e^{-t} is carried by the Laguerre weights
        vals = eval_conjugate(f, 1j * v / zstar) * np.exp(1j * (sign * X - 1j * eps))
        tails += sign * 1j * np.sum(lag.weights * vals)
    return complex((line + tails) / (2.0 * math.pi * zstar))


def _direct_pole_inverse(form: PoleForm, zstar: complex, grid: PhaseSpaceGrid) -> complex:
    # w/(w - z0) = 1 + z0/(w - z0); J = int e^{z*(w-z0)}/(w - z0) d^2mu(w) is done
    # in polar coordinates centred on the pole, where rho d rho cancels 1/|w - z0|
    z0 = form.z0
    n_r = 2 * len(grid.radial)
    n_phi = len(grid.angular)
    R = abs(z0) + abs(zstar) + 10.0
    t, wt = np.polynomial.legendre.leggauss(n_r)
    rho = 0.5 * R * (t + 1)
    w_rho = 0.5 * R * wt
    phi = 2 * np.pi * np.arange(n_phi) / n_phi
    e = np.exp(1j * phi)
    u = rho[:, None] * e[None, :]
    integrand = np.exp(zstar * u) * np.conj(e)[None, :] * np.exp(-np.abs(z0 + u) ** 2) / np.pi
    J = np.sum(w_rho[:, None] * integrand) * (2 * np.pi / n_phi)
    return complex(form.scale * (1.0 + z0 * np.exp(zstar * z0) * J))


def inverse_phase_space(f: ConjugateFunction, zstar, grid: PhaseSpaceGrid | None = None,
                        method: str = "termwise"):
    """psi(z*) = int w e^{z* w} f(w) d^2mu(w).

    ``termwise`` integrates each Laurent term analytically,
    int w^{-n} e^{z* w} d^2mu(w) = z*^n / n!, giving sum c_n z*^n / n!.

    ``direct`` is a validation mode. For a pole form it uses the split
    w/(w - z0) = 1 + z0/(w - z0) and integrates the remaining 1/(w - z0)
    singularity in coordinates centred on the pole. Because the closed form
    differs from its Laurent series inside |w| < |z0|, the direct integral
    equals exp(-|z0|^2) exp(z0 z*) rather than exp(z0 z*). For Laurent-only
    data it sums on the grid, relying on the angular rule to cancel the
    singular terms (keep N small).
    """
    if method == "termwise":
        d = f.laurent / (sqrt_factorials(f.truncation) ** 2)
        zs = np.asarray(zstar, dtype=complex)
        acc = np.zeros_like(zs)
        for dn in d[::-1]:
            acc = acc * zs + dn
        return acc[()]
    if method != "direct":
        raise ParameterError(f"unknown inverse_phase_space method {method!r}")
    grid = grid or phase_space_grid()
    zstar = complex(zstar)
    if isinstance(f.closed_form, PoleForm):
        if abs(f.closed_form.z0) > grid.radius:
            raise ParameterError(
                f"|z0| = {abs(f.closed_form.z0):.3g} exceeds the grid radius {grid.radius:.3g}")
        return _direct_pole_inverse(f.closed_form, zstar, grid)
    if f.truncation > 6:
        raise ParameterError("direct phase-space inversion of Laurent data is limited to N <= 6")
    w = grid.points
    vals = w * np.exp(zstar * w) * laurent_sum(f.laurent, w)
    return complex(np.sum(grid.weights * vals))


def coeff_from_conjugate(f: ConjugateFunction, n: int, grid: PhaseSpaceGrid | None = None,
                         method: str = "termwise") -> complex:
    """a_n = (1/sqrt(n!)) int f(w) w^{n+1} d^2mu(w).

    Termwise, w^{n+1} c_m / w^{m+1} integrates to c_n delta_mn, so a_n = c_n/sqrt(n!).
    ``method="grid"`` sums the Laurent data on the grid instead.
    """
    if n < 0:
        raise ParameterError("coeff_from_conjugate: n must be non-negative")
    if grid is not None and n > grid.max_exact_degree:
        raise ParameterError(f"n = {n} exceeds the grid budget {grid.max_exact_degree}")
    if method == "termwise":
        if n > f.truncation:
            return 0j
        return complex(f.laurent[n] / sqrt_factorials(n)[n])
    if method != "grid":
        raise ParameterError(f"unknown method {method!r}")
    grid = grid or phase_space_grid()
    w = grid.points
    vals = laurent_sum(f.laurent, w) * w ** (n + 1)
    return complex(np.sum(grid.weights * vals) / sqrt_factorials(n)[n])


def apply_creation_conjugate(f: ConjugateFunction) -> ConjugateFunction:
    """-d/dw: c_n/w^{n+1} -> (n+1) c_n / w^{n+2}; the top term leaves the truncation."""
    c = f.laurent
    N = f.truncation
    out = np.zeros_like(c)
    out[1:] = np.arange(1, N + 1) * c[:-1]
    lost = (N + 1) * abs(c[-1])
    return ConjugateFunction(out, None, (N + 2) * f.tail_bound + lost, f.truncation_loss + lost)


def apply_annihilation_conjugate(f: ConjugateFunction) -> ConjugateFunction:
    """Multiply by w and drop the resulting constant c_0 (only negative powers are kept)."""
    c = f.laurent
    out = np.zeros_like(c)
    out[:-1] = c[1:]
    closed = None
    if isinstance(f.closed_form, PoleForm):
        # w s/(w - z0) = s + s z0/(w - z0)
        closed = PoleForm(f.closed_form.z0, f.closed_form.scale * f.closed_form.z0)
    return ConjugateFunction(out, closed, f.tail_bound, f.truncation_loss)


def apply_conjugate_ho_hamiltonian(f: ConjugateFunction, frame: OscillatorFrame | None = None) -> ConjugateFunction:
    """hbar omega (-d/dw w + 1/2) f.

    The composition (-d/dw) o (w, projected) maps c_n -> n c_n, so the
    operator is diagonal on Laurent data.
    """
    frame = frame or OscillatorFrame()
    n = np.arange(f.laurent.size)
    energies = frame.hbar * frame.omega * (n + 0.5)
    return ConjugateFunction(energies * f.laurent, None, f.tail_bound, f.truncation_loss)


def conjugate_ho_eigencheck(n: int, N: int | None = None, frame: OscillatorFrame | None = None,
                            energy: float | None = None) -> float:
    """||H_C f_n - E f_n|| (Euclidean norm of Laurent data), E = hbar omega (n + 1/2) by default."""
    frame = frame or OscillatorFrame()
    N = max(n, DEFAULT_TRUNCATION) if N is None else N
    f = to_conjugate(fock_basis_state(n, N))
    if energy is None:
        energy = frame.hbar * frame.omega * (n + 0.5)
    hf = apply_conjugate_ho_hamiltonian(f, frame)
    return float(np.linalg.norm(hf.laurent - energy * f.laurent))


def erfc_branch_factor(u, branch: str = "principal", direction=1.0):
    """e^{u^2} F(u) with F(u) = (u/s)[1 - Erf(u^2/s)], s = sqrt(u^2) on the given branch.

    ``principal``: the root is fixed by the orientation of the Laplace ray,
    ``direction`` = sign(Re w) = +-1, so u/s = direction and
    e^{u^2}F(u) = direction * w(i direction u) with w the Faddeeva function
    (stable for large |u|). ``arctan``: s = r exp(i arctan(2 theta)/2)
    for u = r e^{i theta}, evaluated as written; it disagrees with the
    principal choice as soon as theta != 0.
    """
    u = np.asarray(u, dtype=complex)
    if branch == "principal":
        sign = np.where(np.asarray(direction) >= 0, 1.0, -1.0)
        return (sign * faddeeva(1j * sign * u))[()]
    if branch == "arctan":
        r = np.abs(u)
        theta = np.angle(u)
        s = r * np.exp(0.5j * np.arctan(2.0 * theta))
        return (np.exp(u * u) * (u / s) * erfc(u * u / s))[()]
    raise ParameterError(f"unknown branch {branch!r}")


def _position_closed(q, scale, w, branch="principal"):
    w = np.asarray(w, dtype=complex)
    x = q / scale
    u = w / math.sqrt(2.0) - x
    prefactor = math.pi ** 0.25 * scale ** -0.5 / math.sqrt(2.0) * math.exp(-x * x / 2)
    # e^{q^2/2b^2 - sqrt2 w q/b + w^2/2} = e^{u^2} e^{-q^2/2b^2}; the Laplace ray
    # x/w points along +-1 according to the sector of w
    return (prefactor * erfc_branch_factor(u, branch, np.sign(w.real)))[()]


def position_conjugate(q: float, frame: OscillatorFrame | None, w, form: str = "closed",
                       N: int = 64, branch: str = "principal"):
    """f_q(w), the conjugate of |q>.

    ``form="closed"`` is the erfc expression (requires Re(w^2) > 0);
    ``form="series"`` is the truncated Laurent sum with c_n = phi_0(q) 2^{-n/2} H_n(q/b).
    """
    frame = frame or OscillatorFrame()
    w_arr = np.asarray(w, dtype=complex)
    if np.any(np.abs(w_arr) <= _SINGULAR_TOL):
        raise SingularityError("position_conjugate: w = 0")
    if form == "closed":
        if np.any(np.real(w_arr * w_arr) <= 0):
            raise DomainError("the erfc closed form of f_q(w) needs Re(w^2) > 0")
        return _position_closed(q, frame.b, w_arr, branch)
    if form == "series":
        return laurent_sum(to_conjugate(position_eigenstate(q, frame, N)).laurent, w_arr)
    raise ParameterError(f"unknown form {form!r}")


def conjugate_reproduce(f: ConjugateFunction, w, grid: PhaseSpaceGrid | None = None):
    """f(w) = sum_n w^{-(n+1)} int w'^{n+1} f(w') d^2mu(w'), each integral done termwise."""
    c = np.array([coeff_from_conjugate(f, n, grid) for n in range(f.truncation + 1)])
    return laurent_sum(c * sqrt_factorials(f.truncation), w)


def conjugate_kernel(w, wprime):
    """The formal reproducing kernel w'/(w - w'); never integrated directly."""
    return wprime / (w - wprime)
