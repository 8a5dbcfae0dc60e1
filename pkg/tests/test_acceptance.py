"""Acceptance criteria, one test each; every test prints a PASS/FAIL line."""

import cmath
import math
import time

import numpy as np
import pytest
from scipy.linalg import expm

from bargmann_dual.bargmann import BargmannFunction
from bargmann_dual.conjugate import (
    apply_annihilation_conjugate,
    apply_conjugate_ho_hamiltonian,
    apply_creation_conjugate,
    conjugate_ho_eigencheck,
    forward_line_integral,
    inverse_mellin,
    inverse_phase_space,
    pole_function,
    position_conjugate,
    to_conjugate,
)
from bargmann_dual.numerics import contour_line_rule, sqrt_factorials
from bargmann_dual.overlap import inner_conjugate_double, inner_conjugate_line, inner_mixed
from bargmann_dual.propagators import exact_ho_bargmann, exact_ho_conjugate, fock_propagator
from bargmann_dual.semiclassical import (
    gradient_check,
    ho_hamiltonian,
    ksc_bargmann,
    ksc_conjugate,
    quadratic_hamiltonian,
    saddle_residual,
    shoot_bargmann,
)
from bargmann_dual.states import (
    OscillatorFrame,
    apply_annihilation,
    apply_creation,
    coherent_state,
    fock_basis_state,
    inner_series,
    random_state,
)

from conftest import random_points

SEED = 1234


@pytest.fixture
def verdict(capsys):
    def emit(label, ok, detail):
        with capsys.disabled():
            print(f"\n[{'PASS' if ok else 'FAIL'}] {label}: {detail}")
        assert ok, f"{label}: {detail}"

    return emit


def rel(a, b):
    return abs(a - b) / max(1.0, abs(b))


def test_criterion_01_basis_transform(verdict):
    rng = np.random.default_rng(SEED)
    ws = random_points(rng, 10, 0.5, 5.0)
    worst = 0.0
    for n in range(21):
        psi = BargmannFunction(fock_basis_state(n, 20))
        for w in ws:
            exact = math.sqrt(math.factorial(n)) / w ** (n + 1)
            worst = max(worst, abs(forward_line_integral(psi, w) - exact) / abs(exact))
    verdict("1 basis transform identity", worst <= 1e-10, f"max rel err {worst:.2e} (n <= 20, 10 w)")


def test_criterion_02_phase_space_inversion(verdict):
    rng = np.random.default_rng(SEED + 2)
    zs = random_points(rng, 10, 0.1, 2.0)
    worst = 0.0
    for n in range(21):
        f = to_conjugate(fock_basis_state(n, 20))
        for z in zs:
            exact = z**n / math.sqrt(math.factorial(n))
            worst = max(worst, rel(inverse_phase_space(f, z), exact))
    for z0 in (0.3, 0.8, 0.5 + 0.5j):
        f = pole_function(z0)
        for z in zs:
            worst = max(worst, rel(inverse_phase_space(f, z), cmath.exp(z * z0)))
    verdict("2 phase-space inversion", worst <= 1e-10, f"max rel err {worst:.2e} (f_n and three poles)")


def test_criterion_03_round_trip(verdict):
    rng = np.random.default_rng(SEED + 3)
    mellin = termwise = 0.0
    for _ in range(50):
        s = random_state(16, rng)
        f = to_conjugate(s)
        psi = BargmannFunction(s)
        z = complex(random_points(rng, 1, 0.1, 2.0)[0])
        mellin = max(mellin, rel(inverse_mellin(f, z), psi(z)))
        termwise = max(termwise, rel(inverse_phase_space(f, z), psi(z)))
    ok = mellin <= 1e-6 and termwise <= 1e-12
    verdict("3 round trip", ok, f"Mellin {mellin:.2e}, termwise {termwise:.2e} over 50 states, N = 16")


def test_criterion_04_scalar_products(verdict):
    rng = np.random.default_rng(SEED + 4)
    termwise = line = 0.0
    for _ in range(20):
        n1, n2 = rng.integers(0, 9, size=2)
        s, t = random_state(int(n1), rng), random_state(int(n2), rng)
        f, g = to_conjugate(s), to_conjugate(t)
        ref = inner_series(s, t)
        termwise = max(termwise, rel(inner_conjugate_double(f, g), ref),
                       rel(inner_mixed(f, BargmannFunction(t)), ref))
        line = max(line, abs(inner_conjugate_line(f, g) - ref))
    ok = termwise <= 1e-13 and line <= 1e-4
    verdict("4 scalar-product agreement", ok, f"double/mixed {termwise:.2e}, line {line:.2e} (N <= 8)")


def test_criterion_05_conjugate_ho_eigenproblem(verdict):
    frames = [OscillatorFrame(), OscillatorFrame(mass=2.0, omega=0.7, hbar=0.3)]
    residual = 0.0
    eig_ok = True
    for frame in frames:
        for n in range(33):
            residual = max(residual, conjugate_ho_eigencheck(n, frame=frame))
            f = to_conjugate(fock_basis_state(n, 32))
            hf = apply_conjugate_ho_hamiltonian(f, frame)
            # the quotient is one rounding away from the product that the residual tests exactly
            eig = (hf.laurent[n] / f.laurent[n]).real
            eig_ok &= math.isclose(eig, frame.hbar * frame.omega * (n + 0.5), rel_tol=4e-16)
    verdict("5 conjugate HO eigenproblem", residual == 0.0 and eig_ok,
            f"max residual {residual!r}, eigenvalues hbar omega (n + 1/2): {eig_ok}")


def test_criterion_06_operator_duality(verdict):
    rng = np.random.default_rng(SEED + 6)
    worst = 0.0
    for _ in range(50):
        s = random_state(int(rng.integers(1, 30)), rng, top_zero=True)
        f = to_conjugate(s)
        for lhs, rhs in ((to_conjugate(apply_creation(s)), apply_creation_conjugate(f)),
                         (to_conjugate(apply_annihilation(s)), apply_annihilation_conjugate(f))):
            scale = float(np.max(np.abs(rhs.laurent))) or 1.0
            worst = max(worst, float(np.max(np.abs(lhs.laurent - rhs.laurent))) / scale)
    # only floating-point rounding separates the two sides
    verdict("6 operator-duality square", worst <= 1e-14, f"max rel Laurent mismatch {worst:.2e}")


def _position_sample(rng, rmin, rmax, count):
    frame = OscillatorFrame(mass=1.3, omega=0.8)
    out = []
    while len(out) < count:
        w = complex(random_points(rng, 1, rmin, rmax)[0])
        if (w * w).real > 0.05 * abs(w) ** 2:
            out.append((float(rng.uniform(-2, 2)) * frame.b, w))
    return frame, out


def test_criterion_07_position_dual_forms(verdict):
    rng = np.random.default_rng(SEED + 7)
    frame, sample = _position_sample(rng, 7.0, 10.0, 100)
    worst = 0.0
    for q, w in sample:
        closed = position_conjugate(q, frame, w)
        series = position_conjugate(q, frame, w, form="series", N=64)
        worst = max(worst, abs(closed - series) / abs(closed))
    verdict("7 position dual forms", worst <= 1e-8,
            f"max rel err {worst:.2e} (Re w^2 > 0, |q/b| <= 2, N = 64, 7 <= |w| <= 10)")


@pytest.mark.xfail(strict=True, reason="the N = 64 Laurent series is asymptotic; it diverges at |w| = 2")
def test_criterion_07_position_dual_forms_at_small_w(capsys):
    frame = OscillatorFrame()
    closed = position_conjugate(0.0, frame, 2.0)
    series = position_conjugate(0.0, frame, 2.0, form="series", N=64)
    err = abs(closed - series) / abs(closed)
    with capsys.disabled():
        print(f"\n[XFAIL] 7 position dual forms at q = 0, w = 2: rel err {err:.2e}")
    assert err <= 1e-8


def test_criterion_08_propagator_consistency(verdict):
    rng = np.random.default_rng(SEED + 8)
    frames = [OscillatorFrame(), OscillatorFrame(omega=2.5), OscillatorFrame(mass=0.5, omega=0.4)]
    worst = 0.0
    for k in range(6):
        frame = frames[k % 3]
        z0 = complex(random_points(rng, 1, 0.1, 1.5)[0])
        t = float(rng.uniform(0, 2 * np.pi / frame.omega))
        w = complex(random_points(rng, 1, abs(z0) * 1.2 + 0.3, 4.0)[0])
        val = forward_line_integral(lambda zs: exact_ho_bargmann(zs, z0, t, frame), w)
        worst = max(worst, rel(val, exact_ho_conjugate(w, z0, t, frame)))
    verdict("8 exact/conjugate propagator consistency", worst <= 1e-10, f"max rel err {worst:.2e} over 6 sets")


HO_ZI = [0.0, 0.7, -0.5 + 0.3j, 0.2 - 0.8j, 1.0j]
HO_ZF = [0.4, -0.3, 0.6 + 0.6j, -0.2 - 0.5j, 0.9j]
HO_T = [0.5, 1.0, 3.0]

QUAD = (1.0, 0.4, 0.4)
CONJ_POINTS = [
    (0.6, 1.2 + 2.9j, 0.71 + 0.23j),
    (1.0, 0.64 + 3.48j, 0.56 + 0.03j),
    (1.5, 0.83 + 4.04j, 0.72 + 0.21j),
    (2.0, -1.46 + 3.79j, 0.56 - 0.28j),
    (2.5, -0.75 + 3.41j, 0.61 - 0.07j),
]


@pytest.fixture(scope="module")
def trajectories():
    """Trajectories produced by criteria 9 and 10, shared with criterion 11."""
    return {"ho": [], "conjugate": []}


def test_criterion_09_ho_semiclassical_exactness(verdict, trajectories):
    H = ho_hamiltonian()
    worst = 0.0
    skipped = 0
    for T in HO_T:
        for z_i in HO_ZI:
            for zf in HO_ZF:
                tr = shoot_bargmann(H, z_i, zf, T)
                if abs(tr.M[1, 1]) < 0.1:
                    skipped += 1
                    continue
                trajectories["ho"].append((H, tr))
                val = ksc_bargmann(H, z_i, zf, T)
                worst = max(worst, abs(val - exact_ho_bargmann(zf, z_i, T)))
    n = len(trajectories["ho"])
    verdict("9 semiclassical HO exactness", worst <= 1e-8 and n == 75,
            f"max abs err {worst:.2e} over {n} points ({skipped} near focal points)")


def gaussian_fock_oracle(H, z_i, T, D=200):
    """Bargmann propagator of a quadratic H from truncated-Fock evolution.

    The evolved coherent ket gives the Taylor data d_0, d_1, d_2 of
    z -> <z|e^{-iHT}|z_i>; for quadratic H this function is exactly
    exp(c0 + c1 z + c2 z^2), which stays accurate far beyond the radius where
    summing the truncated Taylor series would cancel catastrophically.
    """
    Hm = H.fock_matrix(D)
    ket = coherent_state(z_i, D - 1).coeffs
    d = (expm(-1j * T / H.hbar * Hm) @ ket) / sqrt_factorials(D - 1)
    c0 = np.log(d[0])
    c1 = d[1] / d[0]
    c2 = d[2] / d[0] - c1**2 / 2

    def k(z):
        return np.exp(c0 + c1 * z + c2 * z * z)

    # the Gaussian form must reproduce the direct Fock sum where the latter is reliable
    check = max(abs(k(z) - fock_propagator(Hm, z_i, z, T, H.hbar)) / abs(k(z)) for z in (0.3, 0.5j, -0.7 + 0.2j))
    return k, check


def test_criterion_10_conjugate_semiclassical(verdict, trajectories):
    H = quadratic_hamiltonian(*QUAD)
    worst = saddle = gauss = 0.0
    for T, z_i, w in CONJ_POINTS:
        res = ksc_conjugate(H, z_i, w, T, full_output=True)
        tr = res.trajectories[0]
        trajectories["conjugate"].append((H, tr))
        k, check = gaussian_fock_oracle(H, z_i, T)
        gauss = max(gauss, check)
        # Laplace transform of the oracle along arg z* = -arg w, far past the saddle
        length = 2 * abs(tr.vT * w) + 30
        oracle = forward_line_integral(k, w, contour_line_rule(32, length, 64))
        worst = max(worst, abs(res.value - oracle) / abs(oracle))
        saddle = max(saddle, saddle_residual(H, tr, w), saddle_residual(H, tr, w, method="fd"))
    ok = worst <= 1e-4 and saddle <= 1e-9 and gauss <= 1e-10
    verdict("10 conjugate semiclassical (quadratic H)", ok,
            f"max rel err {worst:.2e}, saddle residual {saddle:.2e}, oracle self-check {gauss:.2e}")


def test_criterion_11_gradient_contract(verdict, trajectories):
    produced = trajectories["ho"] + trajectories["conjugate"]
    if len(produced) != 80:
        pytest.fail("criteria 9 and 10 must run first in the same session")
    start = time.perf_counter()
    worst = 0.0
    for H, tr in produced:
        worst = max(worst, gradient_check(H, tr).worst)
    verdict("11 action-gradient contract", worst <= 1e-6,
            f"max rel err {worst:.2e} over {len(produced)} trajectories ({time.perf_counter() - start:.1f} s)")
