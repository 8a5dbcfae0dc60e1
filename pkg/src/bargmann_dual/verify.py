"""Invariant suites shared by the ``verify`` command and the test-suite.

Each suite draws its random inputs from a seeded generator and returns a
:class:`SuiteResult` with the worst error it saw.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass

import numpy as np

from .bargmann import BargmannFunction
from .conjugate import (
    apply_annihilation_conjugate,
    apply_creation_conjugate,
    conjugate_ho_eigencheck,
    eval_conjugate,
    forward_line_integral,
    inverse_mellin,
    inverse_phase_space,
    to_conjugate,
)
from .overlap import inner_conjugate_double, inner_conjugate_line, inner_mixed
from .propagators import exact_ho_bargmann, exact_ho_conjugate
from .semiclassical import ho_hamiltonian, ksc_bargmann, shoot_bargmann
from .states import apply_annihilation, apply_creation, inner_series, random_state

__all__ = ["SuiteResult", "SUITES", "run_suite", "run_all"]


@dataclass(frozen=True)
class SuiteResult:
    name: str
    passed: bool
    max_error: float
    tolerance: float
    samples: int

    def as_dict(self) -> dict:
        return asdict(self)


def _rel(a, b) -> float:
    return abs(a - b) / max(1.0, abs(b))


def _random_points(rng, n, rmin, rmax):
    r = rng.uniform(rmin, rmax, n)
    return r * np.exp(1j * rng.uniform(0, 2 * np.pi, n))


def _result(name, errors, tol):
    worst = float(max(errors)) if errors else 0.0
    return SuiteResult(name, bool(worst <= tol), worst, tol, len(errors))


def suite_roundtrip(rng) -> SuiteResult:
    errors = []
    for _ in range(5):
        s = random_state(16, rng)
        f = to_conjugate(s)
        psi = BargmannFunction(s)
        for z in _random_points(rng, 20, 0.1, 2.0):
            errors.append(_rel(inverse_phase_space(f, z), psi(z)))
    return _result("roundtrip", errors, 1e-10)


def suite_routes(rng) -> SuiteResult:
    errors = []
    for _ in range(5):
        s = random_state(16, rng)
        f = to_conjugate(s)
        psi = BargmannFunction(s)
        for w in _random_points(rng, 10, 1.0, 4.0):
            errors.append(_rel(forward_line_integral(psi, w), eval_conjugate(f, w)))
    return _result("routes", errors, 1e-10)


def suite_mellin(rng) -> SuiteResult:
    errors = []
    for _ in range(10):
        s = random_state(16, rng)
        z = complex(_random_points(rng, 1, 0.3, 2.0)[0])
        errors.append(_rel(inverse_mellin(to_conjugate(s), z), BargmannFunction(s)(z)))
    return _result("mellin", errors, 1e-6)


def suite_duality(rng) -> SuiteResult:
    errors = []
    for _ in range(20):
        s = random_state(12, rng)
        f = to_conjugate(s)
        for lhs, rhs in ((to_conjugate(apply_creation(s)), apply_creation_conjugate(f)),
                         (to_conjugate(apply_annihilation(s)), apply_annihilation_conjugate(f))):
            scale = max(1.0, float(np.max(np.abs(rhs.laurent))))
            errors.append(float(np.max(np.abs(lhs.laurent - rhs.laurent))) / scale)
    return _result("duality", errors, 1e-13)


def suite_eigen(rng) -> SuiteResult:
    del rng
    errors = [conjugate_ho_eigencheck(n) for n in range(33)]
    return _result("eigen", errors, 0.0)


def suite_overlap(rng) -> SuiteResult:
    errors = []
    for _ in range(10):
        s, t = random_state(8, rng), random_state(8, rng)
        f, g = to_conjugate(s), to_conjugate(t)
        ref = inner_series(s, t)
        errors.append(abs(inner_conjugate_double(f, g) - ref) / max(1.0, abs(ref)))
        errors.append(abs(inner_mixed(f, BargmannFunction(t)) - ref) / max(1.0, abs(ref)))
    line = []
    for _ in range(3):
        s, t = random_state(4, rng), random_state(4, rng)
        line.append(abs(inner_conjugate_line(to_conjugate(s), to_conjugate(t)) - inner_series(s, t)))
    termwise = _result("overlap", errors, 1e-13)
    worst_line = max(line)
    return SuiteResult("overlap", termwise.passed and worst_line <= 1e-4,
                       max(termwise.max_error, worst_line), 1e-4, len(errors) + len(line))


def suite_propagators(rng) -> SuiteResult:
    errors = []
    for _ in range(6):
        z0 = complex(_random_points(rng, 1, 0.1, 0.9)[0])
        t = float(rng.uniform(0, 2 * np.pi))
        w = complex(_random_points(rng, 1, 1.5, 3.0)[0])
        # forward_line_integral's coherent guard does not apply to a plain callable
        val = forward_line_integral(lambda zs: exact_ho_bargmann(zs, z0, t), w)
        errors.append(_rel(val, exact_ho_conjugate(w, z0, t)))
    return _result("propagators", errors, 1e-10)


def suite_semiclassical(rng) -> SuiteResult:
    H = ho_hamiltonian()
    errors = []
    for _ in range(4):
        z_i = complex(_random_points(rng, 1, 0.0, 1.0)[0])
        zf = complex(_random_points(rng, 1, 0.0, 1.0)[0])
        T = float(rng.uniform(0.2, 3.0))
        errors.append(_rel(ksc_bargmann(H, z_i, zf, T), exact_ho_bargmann(zf, z_i, T)))
        errors.append(abs(shoot_bargmann(H, z_i, zf, T).det_M - 1))
    return _result("semiclassical", errors, 1e-8)


SUITES = {
    "roundtrip": suite_roundtrip,
    "routes": suite_routes,
    "mellin": suite_mellin,
    "duality": suite_duality,
    "eigen": suite_eigen,
    "overlap": suite_overlap,
    "propagators": suite_propagators,
    "semiclassical": suite_semiclassical,
}


def run_suite(name: str, seed: int = 0) -> SuiteResult:
    # each suite gets its own stream so results do not depend on which others ran
    ss = np.random.SeedSequence([seed, sorted(SUITES).index(name)])
    return SUITES[name](np.random.default_rng(ss))


def run_all(seed: int = 0) -> list[SuiteResult]:
    return [run_suite(name, seed) for name in SUITES]

