import numpy as np
import pytest

from athermality.states import HamiltonianSpec
from athermality.symmetry import bohr_analysis


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)


def random_density(rng, m, coherent=True):
    """Random full-rank density matrix; purely diagonal when coherent=False."""
    a = rng.normal(size=(m, m)) + 1j * rng.normal(size=(m, m))
    rho = a @ a.conj().T + 0.05 * np.eye(m)
    rho = rho / np.trace(rho).real
    if not coherent:
        rho = np.diag(np.real(np.diag(rho)) / np.real(np.diag(rho)).sum()).astype(complex)
    return rho


def random_pure(rng, m):
    v = rng.normal(size=m) + 1j * rng.normal(size=m)
    v /= np.linalg.norm(v)
    return np.outer(v, v.conj())


def generic_levels(rng, m, scale=1.0):
    """Random levels, resampled until the Bohr spectrum is non-degenerate."""
    while True:
        levels = np.sort(rng.uniform(0.0, scale, size=m))
        levels[0] = 0.0
        h = HamiltonianSpec(levels)
        if bohr_analysis(h).non_degenerate_bohr:
            return h


def random_prob(rng, m, floor=0.01):
    p = rng.uniform(floor, 1.0, size=m)
    return p / p.sum()


def random_qubit(rng, min_coherence=1e-3):
    """Random qubit density matrix with strictly nonzero off-diagonal."""
    r = rng.uniform(0.05, 0.95)
    amax = np.sqrt(r * (1.0 - r))
    mag = rng.uniform(min_coherence, 0.98 * amax)
    a = mag * np.exp(1j * rng.uniform(0.0, 2.0 * np.pi))
    return np.array([[r, a], [np.conj(a), 1.0 - r]])
