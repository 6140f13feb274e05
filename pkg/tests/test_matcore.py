import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from geophase.errors import JumpTooLarge, NearZeroCrossing, NotHermitian, NotPositive, NotUnitTrace, ZeroTrace
from geophase.matcore import (
    SIGMA_X,
    SIGMA_Z,
    eig_hermitian,
    exp_hermitian_generator,
    principal_angle,
    scalar_unitary_distance,
    unwind_phase,
    validate_density,
)

S2 = 1 / math.sqrt(2)


def test_maximally_mixed_qubit():
    rho = validate_density(np.eye(2) / 2)
    assert np.allclose(rho.weights, [0.5, 0.5])
    assert rho.spectrum.degenerate


def test_diagonal_density_keeps_standard_basis():
    rho = validate_density(np.diag([0.75, 0.25]))
    assert np.allclose(rho.weights, [0.75, 0.25])
    assert np.allclose(rho.spectrum.eigenvectors, np.eye(2))


def test_x_polarised_density_eigenvectors():
    rho = validate_density((np.eye(2) + 0.5 * SIGMA_X) / 2)
    assert np.allclose(rho.weights, [0.75, 0.25])
    assert np.allclose(rho.spectrum.vector(0), [S2, S2])
    assert np.allclose(rho.spectrum.vector(1), [S2, -S2])


@pytest.mark.parametrize(
    "m, err",
    [
        (np.array([[0.5, 0.1], [0.2, 0.5]]), NotHermitian),
        (np.diag([0.6, 0.6]), NotUnitTrace),
        (np.diag([1.2, -0.2]), NotPositive),
    ],
)
def test_density_rejects_invalid(m, err):
    with pytest.raises(err):
        validate_density(m)


def test_tiny_negative_eigenvalue_is_clamped():
    rho = validate_density(np.diag([1.0 + 1e-12, -1e-12]))
    assert np.all(rho.weights >= 0)
    assert math.isclose(rho.weights.sum(), 1.0, abs_tol=1e-15)


def test_eig_identity_is_degenerate():
    s = eig_hermitian(np.eye(3))
    assert np.allclose(s.eigenvalues, 1)
    assert s.degenerate


def test_eig_sigma_z():
    s = eig_hermitian(SIGMA_Z)
    assert np.allclose(s.eigenvalues, [1, -1])
    assert np.allclose(s.eigenvectors, np.eye(2))
    assert not s.degenerate


def test_eig_sigma_x_phase_convention():
    s = eig_hermitian(SIGMA_X)
    assert np.allclose(s.eigenvalues, [1, -1])
    assert np.allclose(s.eigenvectors[:, 0], [S2, S2])
    assert np.allclose(s.eigenvectors[:, 1], [S2, -S2])


def test_exp_zero_time_is_identity():
    assert np.allclose(exp_hermitian_generator(SIGMA_X + SIGMA_Z, 0.0), np.eye(2), atol=1e-15)


def test_exp_diagonal():
    t = 0.7
    u = exp_hermitian_generator(0.5 * SIGMA_Z, t)
    assert np.allclose(u, np.diag([np.exp(-0.5j * t), np.exp(0.5j * t)]), atol=1e-14)


def test_exp_involutory_generator():
    u = exp_hermitian_generator(0.5 * math.pi * SIGMA_X, 1.0)
    assert np.allclose(u, -1j * SIGMA_X, atol=1e-14)


def test_scalar_distance_of_scalar():
    theta, dist = scalar_unitary_distance(np.exp(1j * math.pi / 3) * np.eye(2))
    assert math.isclose(theta, math.pi / 3, abs_tol=1e-14)
    assert dist < 1e-14


def test_scalar_distance_traceless_raises():
    with pytest.raises(ZeroTrace) as info:
        scalar_unitary_distance(SIGMA_Z)
    assert math.isclose(info.value.dist, 2.0, abs_tol=1e-14)


def test_scalar_distance_quarter_phase():
    theta, dist = scalar_unitary_distance(np.diag([1, 1j]))
    assert math.isclose(theta, math.pi / 4, abs_tol=1e-14)
    assert math.isclose(dist, math.sqrt(4 - 2 * math.sqrt(2)), abs_tol=1e-14)


def test_unwind_constant():
    assert np.allclose(unwind_phase([1, 1, 1]), 0)


def test_unwind_negative_spiral_branch():
    t = np.linspace(0, 2 * math.pi, 4097)
    theta = unwind_phase(np.exp(-0.5j * t))
    assert math.isclose(theta[-1], -math.pi, abs_tol=1e-12)


def test_unwind_near_zero():
    with pytest.raises(NearZeroCrossing):
        unwind_phase([1, 1e-12, 1])


def test_unwind_jump_too_large():
    with pytest.raises(JumpTooLarge):
        unwind_phase(np.exp(1j * np.array([0.0, 2.0])))


def test_principal_angle_range():
    assert principal_angle(-math.pi) == pytest.approx(math.pi)
    assert principal_angle(3 * math.pi / 2) == pytest.approx(-math.pi / 2)


def _hermitian(d, data):
    a = np.array(data[: d * d]).reshape(d, d) + 1j * np.array(data[d * d: 2 * d * d]).reshape(d, d)
    return (a + a.conj().T) / 2


floats = st.floats(-3, 3, allow_nan=False)


@settings(max_examples=60, deadline=None)
@given(st.integers(2, 5), st.lists(floats, min_size=50, max_size=50))
def test_eig_reconstructs(d, data):
    h = _hermitian(d, data)
    s = eig_hermitian(h)
    assert np.allclose(s.reconstruct(), h, atol=1e-10)
    assert np.all(np.diff(s.eigenvalues) <= 1e-12)
    assert np.allclose(s.eigenvectors.conj().T @ s.eigenvectors, np.eye(d), atol=1e-10)


@settings(max_examples=60, deadline=None)
@given(st.integers(2, 5), st.lists(floats, min_size=50, max_size=50), st.floats(-2, 2))
def test_exp_is_unitary_and_composes(d, data, t):
    h = _hermitian(d, data)
    u = exp_hermitian_generator(h, t)
    assert np.allclose(u.conj().T @ u, np.eye(d), atol=1e-10)
    assert np.allclose(exp_hermitian_generator(h, t / 2) @ exp_hermitian_generator(h, t / 2), u, atol=1e-10)


@settings(max_examples=60, deadline=None)
@given(st.lists(st.floats(-1.4, 1.4), min_size=1, max_size=200))
def test_unwind_recovers_small_step_walks(steps):
    angles = np.concatenate([[0.0], np.cumsum(steps)])
    assert np.allclose(unwind_phase(np.exp(1j * angles)), angles, atol=1e-9)
