import numpy as np
import pytest

from affinemaps.linalg import (
    dagger,
    herm_eig,
    is_psd,
    kron,
    partial_trace,
    random_density,
    random_unitary,
    unitary_from_hermitian,
)
from affinemaps.qubit2 import I2, SIGMA


def test_kron_identity():
    assert np.array_equal(kron(I2, I2), np.eye(4))


def test_kron_sigma3_identity():
    assert np.array_equal(kron(SIGMA[2], I2), np.diag([1.0, 1.0, -1.0, -1.0]).astype(complex))


def test_kron_f11_normalization():
    # direct 4x4 multiplication oracle for Tr[(s1 x s1)^2]
    f11 = kron(SIGMA[0], SIGMA[0])
    prod = f11 @ f11
    assert abs(np.trace(prod).real - 4.0) < 1e-14


def test_kron_associative(rng):
    a = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
    b = rng.normal(size=(3, 3)) + 1j * rng.normal(size=(3, 3))
    c = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
    np.testing.assert_allclose(kron(kron(a, b), c), kron(a, kron(b, c)), atol=1e-12)


def test_partial_trace_product_form(rng):
    a = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
    b = rng.normal(size=(3, 3)) + 1j * rng.normal(size=(3, 3))
    np.testing.assert_allclose(partial_trace(kron(a, b), 2, 3, "right"), a * np.trace(b), atol=1e-12)
    np.testing.assert_allclose(partial_trace(kron(a, b), 2, 3, "left"), b * np.trace(a), atol=1e-12)


def test_partial_trace_maximally_mixed():
    np.testing.assert_allclose(partial_trace(np.eye(4) / 4, 2, 2, "right"), np.eye(2) / 2, atol=1e-15)


def test_partial_trace_single_env_coefficient():
    # joint state with <S3> = 0.5 and every other coefficient zero
    pi = 0.25 * (np.eye(4) + 0.5 * kron(SIGMA[2], I2))
    expected = 0.5 * (I2 + 0.5 * SIGMA[2])
    np.testing.assert_allclose(partial_trace(pi, 2, 2, "right"), expected, atol=1e-14)


def test_partial_trace_preserves_trace(rng):
    m = rng.normal(size=(6, 6)) + 1j * rng.normal(size=(6, 6))
    for side, dims in [("right", (2, 3)), ("left", (2, 3))]:
        assert abs(np.trace(partial_trace(m, *dims, side)) - np.trace(m)) < 1e-12


def test_partial_trace_dimension_mismatch():
    with pytest.raises(ValueError):
        partial_trace(np.eye(4), 2, 3, "right")


def test_herm_eig_sigma3():
    w, _ = herm_eig(SIGMA[2])
    np.testing.assert_allclose(w, [-1.0, 1.0], atol=1e-14)


def test_herm_eig_sigma1_tensor_sigma1():
    # characteristic polynomial of s1 x s1 is (l^2 - 1)^2: eigenvalues -1, -1, 1, 1
    w, _ = herm_eig(kron(SIGMA[0], SIGMA[0]))
    np.testing.assert_allclose(w, [-1.0, -1.0, 1.0, 1.0], atol=1e-14)


def test_herm_eig_correlation_operator():
    # W = (0.6 s1 + 0.8 s3) x x1 squares to the identity: eigenvalues +-1 doubly
    w_op = kron(0.6 * SIGMA[0] + 0.8 * SIGMA[2], SIGMA[0])
    w, _ = herm_eig(w_op)
    np.testing.assert_allclose(w, [-1.0, -1.0, 1.0, 1.0], atol=1e-12)


def test_herm_eig_reconstructs(rng):
    for _ in range(20):
        g = rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4))
        h = g + dagger(g)
        w, v = herm_eig(h)
        np.testing.assert_allclose((v * w) @ dagger(v), h, atol=1e-10)


def test_herm_eig_rejects_non_hermitian():
    with pytest.raises(ValueError):
        herm_eig(np.array([[0.0, 1.0], [0.0, 0.0]]))


def test_unitary_from_hermitian_zero_scale():
    np.testing.assert_allclose(unitary_from_hermitian(SIGMA[2], 0.0), np.eye(2), atol=1e-14)


def test_unitary_from_hermitian_involutory_series():
    # for h^2 = 1 the exponential is cos(t) - i sin(t) h; checked against the solver
    gamma = 1.3
    h = kron(SIGMA[2], SIGMA[2])
    series = np.cos(gamma / 2) * np.eye(4) - 1j * np.sin(gamma / 2) * h
    np.testing.assert_allclose(unitary_from_hermitian(h, gamma / 2), series, atol=1e-12)


def test_unitary_from_hermitian_unitarity():
    h = 0.3 * kron(SIGMA[0], SIGMA[0]) + 0.7 * kron(SIGMA[1], SIGMA[1]) + 1.1 * kron(SIGMA[2], SIGMA[2])
    u = unitary_from_hermitian(h, 0.5)
    np.testing.assert_allclose(dagger(u) @ u, np.eye(4), atol=1e-12)


def test_unitary_from_hermitian_random(rng):
    for _ in range(20):
        g = rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4))
        h = g + dagger(g)
        u = unitary_from_hermitian(h, rng.uniform(-2, 2))
        np.testing.assert_allclose(dagger(u) @ u, np.eye(4), atol=1e-10)


def test_is_psd_maximally_mixed():
    assert is_psd(np.eye(4) / 4)


def test_is_psd_rejects_overweight_correlations():
    # fixed <x1> = <s3 x1> = 0.9 with zero probe: min eigenvalue is negative
    pi = 0.25 * (np.eye(4) + 0.9 * kron(SIGMA[2], SIGMA[0]) + 0.9 * kron(I2, SIGMA[0]))
    assert not is_psd(pi)


def test_is_psd_boundary_state():
    pi = 0.25 * (np.eye(4) + kron(SIGMA[0], SIGMA[0]))
    assert is_psd(pi)
    w = np.linalg.eigvalsh(pi)
    np.testing.assert_allclose(w, [0.0, 0.0, 0.5, 0.5], atol=1e-14)


def test_is_psd_rejects_non_hermitian():
    with pytest.raises(ValueError):
        is_psd(np.array([[0.0, 1.0], [0.0, 0.0]]))


def test_random_unitary_is_unitary(rng):
    u = random_unitary(6, rng)
    np.testing.assert_allclose(dagger(u) @ u, np.eye(6), atol=1e-12)


def test_random_density_is_state(rng):
    rho = random_density(4, rng)
    assert is_psd(rho)
    assert abs(np.trace(rho).real - 1.0) < 1e-12
