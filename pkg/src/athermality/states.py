"""Hamiltonians, Gibbs states, density matrices and athermality pairs.

An athermality state is the pair (density matrix, Gibbs state) of one system
at one background inverse temperature.  Gibbs states are kept as probability
vectors since they are diagonal in the energy eigenbasis; the full matrix is
reconstructed on demand.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .errors import (
    BetaMismatch,
    DimMismatch,
    InvalidM,
    InvalidState,
    StateFileError,
)
from .linalg import as_matrix, check_hermitian, eigh

STATE_TOL = 1e-9
PROB_TOL = 1e-12


@dataclass(frozen=True)
class HamiltonianSpec:
    """Energy levels of a finite system, stored with the minimum shifted to 0.

    Repeated levels (degeneracy) are allowed here; operations that need
    distinct levels or a non-degenerate Bohr spectrum check for themselves.
    """

    levels: tuple[float, ...]

    def __init__(self, levels):
        arr = np.asarray(levels, dtype=float)
        if arr.ndim != 1 or arr.size < 1:
            raise DimMismatch("levels must be a non-empty 1-d array")
        if not np.all(np.isfinite(arr)):
            raise InvalidState("energy levels must be finite")
        arr = arr - arr.min()
        object.__setattr__(self, "levels", tuple(float(x) for x in arr))

    @property
    def dim(self) -> int:
        return len(self.levels)

    def as_array(self) -> np.ndarray:
        return np.asarray(self.levels, dtype=float)


def validate_prob_vector(p, tol: float = PROB_TOL) -> np.ndarray:
    """Coerce to a probability vector: nonnegative entries summing to 1."""
    arr = np.asarray(p, dtype=float)
    if arr.ndim != 1 or arr.size < 1:
        raise DimMismatch("probability vector must be 1-d and non-empty")
    if arr.min() < -tol:
        raise InvalidState(f"negative probability entry {arr.min():.3e}")
    total = float(arr.sum())
    if abs(total - 1.0) > max(tol, 1e-12 * arr.size):
        raise InvalidState(f"probabilities sum to {total!r}, not 1")
    return np.clip(arr, 0.0, None)


def validate_density(matrix, tol: float = STATE_TOL) -> np.ndarray:
    """Coerce to a density matrix: Hermitian, unit trace, PSD within ``tol``."""
    a = check_hermitian(as_matrix(matrix), rtol=tol)
    tr = complex(np.trace(a))
    if abs(tr - 1.0) > tol * a.shape[0]:
        raise InvalidState(f"trace is {tr!r}, not 1")
    vals = eigh(a).eigenvalues
    if float(vals[0]) < -tol * max(1.0, float(vals[-1])):
        raise InvalidState(f"matrix has negative eigenvalue {vals[0]:.3e}")
    return a


def pure_state(amplitudes) -> np.ndarray:
    """Density matrix of the pure state with the given amplitude vector."""
    v = np.asarray(amplitudes, dtype=complex)
    norm = float(np.linalg.norm(v))
    if abs(norm - 1.0) > 1e-9:
        raise InvalidState(f"amplitudes have norm {norm!r}, not 1")
    return np.outer(v, v.conj())


def gibbs_state(h: HamiltonianSpec, beta: float) -> np.ndarray:
    """Gibbs probability vector exp(-beta * a_x) / Z.

    Invariant under a common shift of all levels, hence under the
    normalization applied by ``HamiltonianSpec``.
    """
    if beta <= 0:
        raise InvalidState("beta must be positive")
    w = np.exp(-beta * h.as_array())
    return w / w.sum()


@dataclass(frozen=True)
class AthermalityState:
    """A density matrix paired with the Hamiltonian that defines its Gibbs state."""

    state: np.ndarray
    hamiltonian: HamiltonianSpec
    beta: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "state", validate_density(self.state))
        if self.state.shape[0] != self.hamiltonian.dim:
            raise DimMismatch(
                f"state dim {self.state.shape[0]} vs hamiltonian dim {self.hamiltonian.dim}"
            )
        if self.beta <= 0:
            raise InvalidState("beta must be positive")

    @property
    def dim(self) -> int:
        return self.hamiltonian.dim

    def gibbs(self) -> np.ndarray:
        return gibbs_state(self.hamiltonian, self.beta)

    def gibbs_matrix(self) -> np.ndarray:
        return np.diag(self.gibbs()).astype(complex)


def golden_unit(m: float) -> tuple[np.ndarray, np.ndarray]:
    """Reference two-level pair (state, gibbs) = ((1,0), (1/m, (m-1)/m)).

    ``m`` may be any real number > 1; the pair is quasi-classical and carries
    log2(m) bits of athermality.
    """
    if not m > 1:
        raise InvalidM(f"golden unit needs m > 1, got {m!r}")
    state = np.array([1.0, 0.0])
    gibbs = np.array([1.0 / m, (m - 1.0) / m])
    return state, gibbs


def tensor(a: AthermalityState, b: AthermalityState) -> AthermalityState:
    """Composite of two athermality states on non-interacting systems.

    Output levels are all pairwise sums a_x + b_y in row-major (x, y) order,
    so the output Gibbs vector is the Kronecker product of the marginals.
    """
    if abs(a.beta - b.beta) > 1e-12 * max(a.beta, b.beta):
        raise BetaMismatch(f"beta {a.beta!r} vs {b.beta!r}")
    la = a.hamiltonian.as_array()
    lb = b.hamiltonian.as_array()
    levels = np.add.outer(la, lb).reshape(-1)
    return AthermalityState(
        state=np.kron(a.state, b.state),
        hamiltonian=HamiltonianSpec(levels),
        beta=a.beta,
    )


def diag_of(rho) -> np.ndarray:
    """Diagonal of a density matrix in the energy (standard) basis."""
    a = validate_density(rho)
    return np.real(np.diag(a)).copy()


# --- JSON state-file schema -------------------------------------------------
#
# {"levels": [..], "beta": x, "rho": [[re, im], ..]}   (rho row-major)


def state_to_dict(s: AthermalityState) -> dict:
    flat = s.state.reshape(-1)
    return {
        "levels": [float(x) for x in s.hamiltonian.levels],
        "beta": float(s.beta),
        "rho": [[float(z.real), float(z.imag)] for z in flat],
    }


def state_from_dict(doc: dict) -> AthermalityState:
    try:
        levels = doc["levels"]
        beta = float(doc.get("beta", 1.0))
        pairs = doc["rho"]
        m = len(levels)
        if len(pairs) != m * m:
            raise StateFileError(f"rho has {len(pairs)} entries, expected {m * m}")
        flat = np.array([complex(re, im) for re, im in pairs])
    except StateFileError:
        raise
    except (KeyError, TypeError, ValueError) as exc:
        raise StateFileError(f"malformed state document: {exc}") from exc
    try:
        return AthermalityState(
            state=flat.reshape(m, m),
            hamiltonian=HamiltonianSpec(levels),
            beta=beta,
        )
    except (InvalidState, DimMismatch) as exc:
        raise StateFileError(str(exc)) from exc


def load_state(path) -> AthermalityState:
    try:
        with open(path) as fh:
            doc = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise StateFileError(f"cannot read state file {path}: {exc}") from exc
    return state_from_dict(doc)


def save_state(s: AthermalityState, path) -> None:
    with open(path, "w") as fh:
        json.dump(state_to_dict(s), fh, indent=2)
