"""Pinching channels, Bohr-spectrum analysis and covariance of Choi matrices.

The energy structure of one or two Hamiltonians dictates which Choi-matrix
entries a time-translation covariant channel may populate.  All checks here
work with a relative tolerance on energy differences: levels or differences
closer than ``tol * (1 + max |level|)`` are treated as equal, and near
collisions are surfaced in ``BohrReport`` instead of silently resolved.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DimMismatch, InvalidChoi
from .linalg import as_matrix, is_psd
from .states import HamiltonianSpec, validate_density

ENERGY_RTOL = 1e-9


def _energy_tol(tol: float, *hams: HamiltonianSpec) -> float:
    scale = max((max(map(abs, h.levels)) for h in hams), default=0.0)
    return tol * (1.0 + scale)


def level_groups(h: HamiltonianSpec, tol: float = ENERGY_RTOL) -> list[list[int]]:
    """Indices grouped by equal energy, via connected components under ``tol``.

    Chaining is deliberate: levels linked by a chain of near collisions land
    in one group, which keeps the grouping order-independent.
    """
    atol = _energy_tol(tol, h)
    order = np.argsort(h.levels, kind="stable")
    groups: list[list[int]] = []
    last = None
    for idx in order:
        val = h.levels[idx]
        if last is not None and val - last <= atol:
            groups[-1].append(int(idx))
        else:
            groups.append([int(idx)])
        last = val
    for g in groups:
        g.sort()
    return groups


def group_labels(h: HamiltonianSpec, tol: float = ENERGY_RTOL) -> np.ndarray:
    labels = np.empty(h.dim, dtype=int)
    for k, grp in enumerate(level_groups(h, tol)):
        labels[grp] = k
    return labels


def pinch(rho, h: HamiltonianSpec, tol: float = ENERGY_RTOL) -> np.ndarray:
    """Sum of projections of ``rho`` onto the eigenspaces of each distinct energy.

    Kills coherence between different energies; for a non-degenerate
    Hamiltonian this is the completely dephasing channel.
    """
    a = validate_density(rho)
    if a.shape[0] != h.dim:
        raise DimMismatch(f"state dim {a.shape[0]} vs hamiltonian dim {h.dim}")
    labels = group_labels(h, tol)
    mask = labels[:, None] == labels[None, :]
    return np.where(mask, a, 0.0)


def pinch_n(amplitudes, n: int, h: HamiltonianSpec, tol: float = ENERGY_RTOL):
    """Spectral description of the pinched n-fold product of a pure state.

    Facade over the type machinery: returns per-total-energy classes carrying
    the class weight and the per-type amplitudes of the (pure) class block,
    without materializing the m**n-dimensional state.
    """
    from .types_engine import energy_class_spectrum

    return energy_class_spectrum(amplitudes, n, h, energy_rtol=tol)


@dataclass(frozen=True)
class BohrReport:
    """Distinctness report for a Hamiltonian's levels and level differences."""

    non_degenerate_spectrum: bool
    non_degenerate_bohr: bool
    colliding_pairs: list[tuple[tuple[int, int], tuple[int, int]]]


def bohr_analysis(h: HamiltonianSpec, tol: float = ENERGY_RTOL) -> BohrReport:
    """Check that all nonzero level differences are distinct within ``tol``.

    A collision is a pair of ordered index pairs (x, y), (x', y') with equal
    energy difference where neither the pairs coincide nor both differences
    are trivially zero (x == y and x' == y').
    """
    a = h.as_array()
    m = h.dim
    atol = _energy_tol(tol, h)

    pairs = [(x, y) for x in range(m) for y in range(m)]
    diffs = np.array([a[x] - a[y] for x, y in pairs])
    collisions: list[tuple[tuple[int, int], tuple[int, int]]] = []
    order = np.argsort(diffs, kind="stable")
    # Scan only neighbouring pairs in sorted difference order; equal values
    # are adjacent, so every collision class is contiguous.
    i = 0
    while i < len(order):
        j = i
        while j + 1 < len(order) and diffs[order[j + 1]] - diffs[order[j]] <= atol:
            j += 1
        if j > i:
            cls = [pairs[k] for k in order[i : j + 1]]
            for u in range(len(cls)):
                for v in range(u + 1, len(cls)):
                    (x, y), (xp, yp) = cls[u], cls[v]
                    if x == y and xp == yp:
                        continue
                    collisions.append(((x, y), (xp, yp)))
        i = j + 1

    spectrum_ok = all(
        abs(a[x] - a[y]) > atol for x in range(m) for y in range(x + 1, m)
    )
    return BohrReport(
        non_degenerate_spectrum=spectrum_ok,
        non_degenerate_bohr=not collisions,
        colliding_pairs=collisions,
    )


def relatively_nondegenerate(
    hA: HamiltonianSpec, hB: HamiltonianSpec, tol: float = ENERGY_RTOL
) -> bool:
    """True iff no cross-system difference collision: a_x - a_x' = b_y - b_y'
    forces x = x' and y = y'.

    Equivalent to non-degeneracy of the joint Hamiltonian; implies each
    Hamiltonian is itself non-degenerate.
    """
    a = hA.as_array()
    b = hB.as_array()
    atol = _energy_tol(tol, hA, hB)
    da = np.subtract.outer(a, a).reshape(-1)
    db = np.subtract.outer(b, b).reshape(-1)
    ia, ja = np.unravel_index(np.arange(da.size), (hA.dim, hA.dim))
    ib, jb = np.unravel_index(np.arange(db.size), (hB.dim, hB.dim))
    close = np.abs(np.subtract.outer(da, db)) <= atol
    trivial = (ia == ja)[:, None] & (ib == jb)[None, :]
    return not bool(np.any(close & ~trivial))


def covariant_choi_pattern(
    hA: HamiltonianSpec, hB: HamiltonianSpec, tol: float = ENERGY_RTOL
) -> np.ndarray:
    """Boolean mask over (x, y, x', y') where a covariant Choi entry may live.

    Entry (x, y, x', y') refers to the coefficient of |x><x'| (x) |y><y'| and
    is allowed exactly when a_x - b_y = a_x' - b_y' within tolerance.
    """
    a = hA.as_array()
    b = hB.as_array()
    atol = _energy_tol(tol, hA, hB)
    d = np.subtract.outer(a, b)  # d[x, y] = a_x - b_y
    return np.abs(d[:, :, None, None] - d[None, None, :, :]) <= atol


def validate_choi(j, dims: tuple[int, int], tol: float = 1e-9) -> np.ndarray:
    """Check PSD and trace preservation (partial trace over output = identity)."""
    ma, mb = dims
    a = as_matrix(j)
    if a.shape[0] != ma * mb:
        raise InvalidChoi(f"Choi dim {a.shape[0]} vs {ma}*{mb}")
    if not is_psd(a, tol):
        raise InvalidChoi("Choi matrix is not PSD")
    blocks = a.reshape(ma, mb, ma, mb)
    marginal = np.einsum("xyzy->xz", blocks)
    if np.abs(marginal - np.eye(ma)).max() > tol * ma:
        raise InvalidChoi("partial trace over output is not the identity")
    return a


def is_covariant(
    j,
    hA: HamiltonianSpec,
    hB: HamiltonianSpec,
    tol: float = ENERGY_RTOL,
) -> bool:
    """True iff the Choi matrix vanishes (within ``tol``) off the covariant pattern."""
    a = validate_choi(j, (hA.dim, hB.dim), tol=max(tol, 1e-8))
    mask = covariant_choi_pattern(hA, hB, tol)
    coeff = a.reshape(hA.dim, hB.dim, hA.dim, hB.dim)
    scale = max(1.0, float(np.abs(coeff).max()))
    off = np.abs(coeff[~mask])
    return off.size == 0 or float(off.max()) <= tol * scale


def choi_of_channel(apply_channel, m_in: int) -> np.ndarray:
    """Choi matrix of a channel given as a callable on matrices of size m_in."""
    basis = np.zeros((m_in, m_in), dtype=complex)
    basis[0, 0] = 1.0
    m_out = apply_channel(basis).shape[0]
    j = np.zeros((m_in * m_out, m_in * m_out), dtype=complex)
    blocks = j.reshape(m_in, m_out, m_in, m_out)
    for x in range(m_in):
        for xp in range(m_in):
            e = np.zeros((m_in, m_in), dtype=complex)
            e[x, xp] = 1.0
            blocks[x, :, xp, :] = apply_channel(e)
    return j


def apply_choi(j, rho, dims: tuple[int, int]) -> np.ndarray:
    """Channel action Tr_A[J (rho^T (x) I)] from the Choi matrix."""
    ma, mb = dims
    a = as_matrix(j).reshape(ma, mb, ma, mb)
    r = as_matrix(rho)
    if r.shape[0] != ma:
        raise DimMismatch(f"input dim {r.shape[0]} vs {ma}")
    return np.einsum("xyzw,xz->yw", a, r)
