import cmath
import math
import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate

from bargmann_dual.bargmann import BargmannFunction, position_overlap
from bargmann_dual.conjugate import (
    PoleForm,
    apply_annihilation_conjugate,
    apply_conjugate_ho_hamiltonian,
    apply_creation_conjugate,
    coeff_from_conjugate,
    conjugate_ho_eigencheck,
    conjugate_kernel,
    conjugate_reproduce,
    erfc_branch_factor,
    eval_conjugate,
    forward_line_integral,
    inverse_limit_at_origin,
    inverse_mellin,
    inverse_phase_space,
    laurent_tail_bound,
    pole_function,
    position_conjugate,
    to_conjugate,
)
from bargmann_dual.errors import ConvergenceRegionError, DomainError, ParameterError, SingularityError
from bargmann_dual.numerics import phase_space_grid
from bargmann_dual.states import (
    OscillatorFrame,
    apply_annihilation,
    apply_creation,
    coherent_state,
    fock_basis_state,
    momentum_eigenstate,
    position_eigenstate,
    random_state,
)

from conftest import random_points


@pytest.fixture(autouse=True)
def _quiet_quad():
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        yield


def laplace_oracle(psi, w):
    """(1/w) int_0^inf psi(x/w) e^{-x} dx by adaptive quadrature."""
    def part(fn):
        return integrate.quad(lambda x: fn(psi(x / w) * math.exp(-x)), 0, np.inf, limit=400,
                              epsabs=1e-15, epsrel=1e-13)[0]
    return complex(part(np.real), part(np.imag)) / w


def test_fock_laurent_data():
    f = to_conjugate(fock_basis_state(3, 6))
    assert f.laurent[3] == pytest.approx(math.sqrt(6))
    assert eval_conjugate(f, 2.0) == pytest.approx(math.sqrt(6) / 16)


def test_coherent_attaches_pole():
    f = to_conjugate(coherent_state(0.5 + 0.2j, 20))
    assert isinstance(f.closed_form, PoleForm)
    w = 1.5 - 0.4j
    assert eval_conjugate(f, w) == pytest.approx(1 / (w - 0.5 - 0.2j), rel=1e-15)
    assert eval_conjugate(f, w, use_closed_form=False) == pytest.approx(1 / (w - 0.5 - 0.2j), rel=1e-9)
    assert laurent_tail_bound(f, 0.3) == math.inf


def test_singularities():
    f = pole_function(0.5)
    with pytest.raises(SingularityError):
        eval_conjugate(f, 0.0)
    with pytest.raises(SingularityError):
        eval_conjugate(f, 0.5)


def test_forward_line_integral_fock(rng):
    for n in (0, 3, 9):
        psi = BargmannFunction(fock_basis_state(n, 12))
        for w in random_points(rng, 4, 0.5, 4.0):
            expected = math.sqrt(math.factorial(n)) / w ** (n + 1)
            assert forward_line_integral(psi, w) == pytest.approx(expected, rel=1e-12)


def test_forward_line_integral_against_quad(rng):
    s = random_state(6, rng)
    psi = BargmannFunction(s)
    f = to_conjugate(s)
    for w in random_points(rng, 3, 0.8, 3.0):
        assert laplace_oracle(psi, w) == pytest.approx(eval_conjugate(f, w), rel=1e-9)


def test_forward_line_integral_convergence_region():
    psi = BargmannFunction(coherent_state(2.0, 60))
    with pytest.raises(ConvergenceRegionError):
        forward_line_integral(psi, 1.5)
    assert forward_line_integral(psi, 4.0) == pytest.approx(1 / (4.0 - 2.0), rel=1e-10)


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_mellin_round_trip(seed):
    rng = np.random.default_rng(seed)
    s = random_state(10, rng)
    z = complex(random_points(rng, 1, 0.3, 2.0)[0])
    assert inverse_mellin(to_conjugate(s), z) == pytest.approx(BargmannFunction(s)(z), rel=1e-8, abs=1e-8)


def test_mellin_pole_and_origin():
    f = pole_function(0.5 + 0.5j)
    z = 0.7 - 0.2j
    assert inverse_mellin(f, z) == pytest.approx(cmath.exp(z * (0.5 + 0.5j)), rel=1e-12)
    assert inverse_limit_at_origin(f) == 1.0
    with pytest.raises(SingularityError):
        inverse_mellin(f, 0.0)
    with pytest.raises(ParameterError):
        inverse_mellin(f, 2.0, epsilon=0.1)


def test_termwise_inverse_and_coefficients(rng):
    s = random_state(12, rng)
    f = to_conjugate(s)
    psi = BargmannFunction(s)
    for z in random_points(rng, 5, 0.1, 3.0):
        assert inverse_phase_space(f, z) == pytest.approx(psi(z), rel=1e-13)
    for n in range(13):
        assert coeff_from_conjugate(f, n) == pytest.approx(s.coeffs[n])
    # on the grid the singular Laurent terms cancel only through the angular sum,
    # with round-off growing like r_min^{-N}; keep N small
    small = random_state(5, rng)
    grid = phase_space_grid(32, 64)
    for n in range(6):
        val = coeff_from_conjugate(to_conjugate(small), n, grid, method="grid")
        assert val == pytest.approx(small.coeffs[n], abs=1e-11)


def test_direct_inverse_matches_termwise_for_small_n(rng):
    s = random_state(4, rng)
    f = to_conjugate(s)
    for z in random_points(rng, 3, 0.1, 1.0):
        assert inverse_phase_space(f, z, method="direct") == pytest.approx(inverse_phase_space(f, z), abs=1e-10)
    with pytest.raises(ParameterError):
        inverse_phase_space(to_conjugate(random_state(10, rng)), 0.5, method="direct")


def test_direct_pole_inverse_carries_gaussian_factor():
    # the closed pole form differs from its Laurent series inside |w| < |z0|,
    # which leaves exp(-|z0|^2) in front of the direct integral
    z0, z = 0.6 + 0.2j, 0.4 - 0.3j
    val = inverse_phase_space(pole_function(z0), z, method="direct")
    assert val == pytest.approx(math.exp(-abs(z0) ** 2) * cmath.exp(z * z0), rel=1e-9)


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_duality_property(seed):
    rng = np.random.default_rng(seed)
    s = random_state(9, rng)
    f = to_conjugate(s)
    np.testing.assert_allclose(to_conjugate(apply_creation(s)).laurent, apply_creation_conjugate(f).laurent,
                               rtol=1e-13, atol=1e-13)
    np.testing.assert_allclose(to_conjugate(apply_annihilation(s)).laurent,
                               apply_annihilation_conjugate(f).laurent, rtol=1e-13, atol=1e-13)


def test_annihilation_of_pole_closed_form():
    f = pole_function(0.4 - 0.1j, 24)
    g = apply_annihilation_conjugate(f)
    w = 2.0 + 1.0j
    # w/(w - z0) minus its constant term
    assert eval_conjugate(g, w) == pytest.approx(w / (w - 0.4 + 0.1j) - 1, rel=1e-14)


def test_creation_loss_reporting():
    f = to_conjugate(fock_basis_state(5, 5))
    assert apply_creation_conjugate(f).truncation_loss == pytest.approx(6 * math.sqrt(120))


@pytest.mark.parametrize("n", [0, 1, 7, 32])
def test_eigencheck(n):
    assert conjugate_ho_eigencheck(n) == 0.0
    assert conjugate_ho_eigencheck(n, energy=n + 0.4) > 0


def test_ho_hamiltonian_with_frame():
    frame = OscillatorFrame(omega=3.0, hbar=0.5)
    f = to_conjugate(fock_basis_state(2, 4))
    np.testing.assert_array_equal(apply_conjugate_ho_hamiltonian(f, frame).laurent, 1.5 * 2.5 * f.laurent)
    assert conjugate_ho_eigencheck(2, frame=frame) == 0.0


@pytest.mark.parametrize("q,w", [(0.0, 1.5), (0.8, 1.2 + 0.5j), (-1.1, 2.0 - 0.9j), (1.5, 0.7 + 0.1j),
                                 (0.3, -1.5 + 0.2j), (-0.8, -2.0 - 0.5j)])
def test_position_closed_form_against_quad(q, w):
    frame = OscillatorFrame()
    oracle = laplace_oracle(lambda zs: position_overlap(zs, q, frame), w)
    assert position_conjugate(q, frame, w) == pytest.approx(oracle, rel=1e-10)


def test_position_closed_form_with_frame():
    frame = OscillatorFrame(mass=2.0, omega=0.5, hbar=0.7)
    w = 1.3 + 0.4j
    oracle = laplace_oracle(lambda zs: position_overlap(zs, 0.4, frame), w)
    assert position_conjugate(0.4, frame, w) == pytest.approx(oracle, rel=1e-10)


def test_position_domain():
    with pytest.raises(DomainError):
        position_conjugate(0.3, None, 1j)
    with pytest.raises(SingularityError):
        position_conjugate(0.3, None, 0.0)


def test_arctan_branch_differs_off_axis():
    u = 0.9 * cmath.exp(0.3j)
    assert abs(erfc_branch_factor(u, "arctan") - erfc_branch_factor(u)) > 1e-2
    # both agree on the positive real axis where the two square roots coincide
    assert erfc_branch_factor(0.9, "arctan") == pytest.approx(erfc_branch_factor(0.9), rel=1e-12)


def test_position_attached_form_and_fallback():
    s = position_eigenstate(0.5, None, 64)
    f = to_conjugate(s)
    w = 8.0 * cmath.exp(0.2j)
    assert eval_conjugate(f, w) == pytest.approx(eval_conjugate(f, w, use_closed_form=False), rel=1e-9)
    # outside Re(w^2) > 0 the Laurent data is used
    w_out = 9.0j * cmath.exp(0.1j)
    assert eval_conjugate(f, w_out) == pytest.approx(eval_conjugate(f, w_out, use_closed_form=False), rel=1e-15)


def test_momentum_closed_form():
    frame = OscillatorFrame(mass=1.3)
    f = to_conjugate(momentum_eigenstate(0.4, frame, 64))
    w = 8.5j * cmath.exp(0.15j)
    assert eval_conjugate(f, w) == pytest.approx(eval_conjugate(f, w, use_closed_form=False), rel=1e-9)


def test_conjugate_reproduce_and_kernel(rng):
    f = to_conjugate(random_state(8, rng))
    w = 1.7 + 0.3j
    assert conjugate_reproduce(f, w) == pytest.approx(eval_conjugate(f, w), rel=1e-13)
    assert conjugate_kernel(2.0, 0.5) == pytest.approx(0.5 / 1.5)
