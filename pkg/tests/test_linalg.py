import numpy as np
import pytest

from athermality.errors import DimMismatch, NotHermitian
from athermality.linalg import eigh, is_psd, min_eigenvalue, trace_distance

from conftest import random_density


def test_eigh_identity():
    dec = eigh(np.eye(2))
    assert np.allclose(dec.eigenvalues, [1.0, 1.0])


def test_eigh_diagonal_sorted_ascending():
    dec = eigh(np.diag([3.0, 1.0]))
    assert np.allclose(dec.eigenvalues, [1.0, 3.0])


def test_eigh_pauli_x():
    dec = eigh(np.array([[0.0, 1.0], [1.0, 0.0]]))
    assert np.allclose(dec.eigenvalues, [-1.0, 1.0])


def test_eigh_rejects_non_hermitian():
    with pytest.raises(NotHermitian):
        eigh(np.array([[0.0, 1.0], [0.0, 0.0]]))


def test_eigh_reconstruction_and_unitarity(rng):
    for m in (2, 3, 5, 8):
        a = rng.normal(size=(m, m)) + 1j * rng.normal(size=(m, m))
        herm = a + a.conj().T
        dec = eigh(herm)
        scale = 1.0 + float(np.abs(dec.eigenvalues).max())
        assert np.abs(dec.reconstruct() - herm).max() <= 1e-10 * scale
        v = dec.eigenvectors
        assert np.abs(v.conj().T @ v - np.eye(m)).max() <= 1e-10
        assert abs(dec.eigenvalues.sum() - np.trace(herm).real) <= 1e-9 * m * max(
            1.0, np.abs(herm).max()
        )


def test_is_psd_examples():
    assert is_psd(np.eye(3))
    assert not is_psd(np.diag([1.0, -1.0]))
    # det = 0.3 - 0.36 < 0
    assert not is_psd(np.array([[1.0, 0.6], [0.6, 0.3]]))


def test_psd_closed_under_addition(rng):
    for _ in range(25):
        m = int(rng.integers(2, 6))
        a = random_density(rng, m)
        b = random_density(rng, m)
        assert is_psd(a) and is_psd(b)
        assert is_psd(a + b)


def test_trace_distance_examples():
    rho = np.diag([0.5, 0.5])
    assert trace_distance(rho, rho) == 0.0
    assert abs(trace_distance(np.diag([1.0, 0.0]), np.diag([0.0, 1.0])) - 1.0) <= 1e-12
    assert abs(trace_distance(np.diag([0.5, 0.5]), np.diag([0.8, 0.2])) - 0.3) <= 1e-12


def test_trace_distance_dim_mismatch():
    with pytest.raises(DimMismatch):
        trace_distance(np.eye(2) / 2, np.eye(3) / 3)


def test_trace_distance_is_a_metric(rng):
    for _ in range(20):
        m = int(rng.integers(2, 5))
        a, b, c = (random_density(rng, m) for _ in range(3))
        dab = trace_distance(a, b)
        assert abs(dab - trace_distance(b, a)) <= 1e-12
        assert dab <= trace_distance(a, c) + trace_distance(c, b) + 1e-12
        assert trace_distance(a, a) <= 1e-12
        assert 0.0 <= dab <= 1.0 + 1e-12


def test_min_eigenvalue_matches_eigh(rng):
    a = random_density(rng, 4)
    assert min_eigenvalue(a) == pytest.approx(float(eigh(a).eigenvalues[0]))
