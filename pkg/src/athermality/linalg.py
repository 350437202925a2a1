"""Dense complex linear algebra primitives used by every other module.

All matrices are square ``numpy`` arrays of ``complex128`` (row-major).
Eigenproblems are restricted to Hermitian inputs, which is all the theory
needs: states, Gibbs states and decision matrices are Hermitian by
construction.
"""

from dataclasses import dataclass

import numpy as np

from .errors import DimMismatch, NotHermitian

HERMITIAN_RTOL = 1e-9
PSD_TOL = 1e-9


def as_matrix(m) -> np.ndarray:
    """Coerce input to a square complex matrix."""
    a = np.asarray(m, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise DimMismatch(f"expected a square matrix, got shape {a.shape}")
    return a


def check_hermitian(m: np.ndarray, rtol: float = HERMITIAN_RTOL) -> np.ndarray:
    """Return ``m`` if it is Hermitian within ``rtol`` times its largest entry."""
    a = as_matrix(m)
    scale = max(1.0, float(np.abs(a).max()) if a.size else 0.0)
    dev = float(np.abs(a - a.conj().T).max())
    if dev > rtol * scale:
        raise NotHermitian(f"max |M - M†| = {dev:.3e} exceeds {rtol:.1e} * {scale:.3e}")
    return a


@dataclass(frozen=True)
class EigenDecomposition:
    """Ascending eigenvalues and the unitary of column eigenvectors."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    def reconstruct(self) -> np.ndarray:
        v = self.eigenvectors
        return (v * self.eigenvalues) @ v.conj().T


def eigh(m) -> EigenDecomposition:
    """Hermitian eigendecomposition with ascending eigenvalues.

    Raises ``NotHermitian`` when the symmetry check fails; backed by LAPACK.
    """
    a = check_hermitian(m)
    # Symmetrize before handing to LAPACK so the tolerance band does not leak
    # into the reconstruction guarantee.
    a = 0.5 * (a + a.conj().T)
    vals, vecs = np.linalg.eigh(a)
    return EigenDecomposition(eigenvalues=vals, eigenvectors=vecs)


def is_psd(m, tol: float = PSD_TOL) -> bool:
    """True iff the minimum eigenvalue is >= -tol * max(1, max eigenvalue)."""
    dec = eigh(m)
    lo = float(dec.eigenvalues[0])
    hi = float(dec.eigenvalues[-1])
    return lo >= -tol * max(1.0, hi)


def min_eigenvalue(m) -> float:
    """Smallest eigenvalue of a Hermitian matrix (the PSD margin)."""
    return float(eigh(m).eigenvalues[0])


def trace_distance(rho, sigma) -> float:
    """Half the trace norm of ``rho - sigma``; in [0, 1] for density matrices."""
    a = as_matrix(rho)
    b = as_matrix(sigma)
    if a.shape != b.shape:
        raise DimMismatch(f"shape {a.shape} vs {b.shape}")
    vals = eigh(a - b).eigenvalues
    return 0.5 * float(np.abs(vals).sum())


def tv_distance(p, q) -> float:
    """Total-variation distance between probability vectors."""
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    if p.shape != q.shape:
        raise DimMismatch(f"shape {p.shape} vs {q.shape}")
    return 0.5 * float(np.abs(p - q).sum())
