"""Entropies and divergences, all in bits (base-2 logarithms).

Smoothed quantities are implemented for commuting (classical) pairs only;
that is the only regime the single-shot formulas need, and it keeps every
value here exact rather than approximately optimized.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import (
    DimMismatch,
    EpsOutOfRange,
    UnsupportedSmoothing,
    ZeroGibbsComponent,
)
from .linalg import eigh
from .states import AthermalityState, HamiltonianSpec, validate_density, validate_prob_vector
from .symmetry import level_groups, pinch

SUPPORT_TOL = 1e-14
MASS_TOL = 1e-12


@dataclass(frozen=True)
class DivergenceValue:
    """A divergence, +inf exactly when the support condition is violated."""

    value: float
    support_violation: bool = False

    def __float__(self) -> float:
        return self.value


def shannon_entropy(p) -> float:
    """Shannon entropy in bits; zero entries contribute nothing."""
    arr = np.asarray(p, dtype=float)
    pos = arr[arr > 0]
    return float(-(pos * np.log2(pos)).sum())


def von_neumann_entropy(rho) -> float:
    vals = eigh(validate_density(rho)).eigenvalues
    return shannon_entropy(np.clip(vals, 0.0, None))


def relative_entropy(rho, gamma) -> DivergenceValue:
    """Umegaki relative entropy Tr[rho log rho] - Tr[rho log gamma], in bits."""
    r = validate_density(rho)
    g = validate_density(gamma)
    if r.shape != g.shape:
        raise DimMismatch(f"shape {r.shape} vs {g.shape}")
    gdec = eigh(g)
    weights = np.real(np.einsum("ij,jk,ki->i", gdec.eigenvectors.conj().T, r, gdec.eigenvectors))
    weights = np.clip(weights, 0.0, None)
    support = gdec.eigenvalues > SUPPORT_TOL
    if float(weights[~support].sum()) > MASS_TOL:
        return DivergenceValue(math.inf, support_violation=True)
    cross = float((weights[support] * np.log2(gdec.eigenvalues[support])).sum())
    return DivergenceValue(-von_neumann_entropy(r) - cross)


def coherence(rho, h: HamiltonianSpec) -> float:
    """Asymmetry measure H(pinch(rho)) - H(rho); zero iff rho is quasi-classical."""
    r = validate_density(rho)
    return max(0.0, von_neumann_entropy(pinch(r, h)) - von_neumann_entropy(r))


def _classical_pair(p, g) -> tuple[np.ndarray, np.ndarray]:
    pv = validate_prob_vector(p)
    gv = validate_prob_vector(g)
    if pv.shape != gv.shape:
        raise DimMismatch(f"shape {pv.shape} vs {gv.shape}")
    return pv, gv


def dmin_eps_classical(p, g, eps: float) -> float:
    """Hypothesis-testing divergence for a commuting pair, exactly.

    Neyman-Pearson: rank outcomes by likelihood ratio p/g (infinite first),
    accept mass 1 - eps with a fractional final element, and return the
    negative log of the accepted g-mass.
    """
    if not 0 <= eps < 1:
        raise EpsOutOfRange(f"eps must be in [0, 1), got {eps!r}")
    pv, gv = _classical_pair(p, g)
    ratio = np.where(gv > 0, pv / np.where(gv > 0, gv, 1.0), math.inf)
    keep = (pv > 0) | (gv > 0)
    order = sorted(np.nonzero(keep)[0], key=lambda i: (-ratio[i], i))
    target = 1.0 - eps
    acc_p = 0.0
    acc_g = 0.0
    for i in order:
        if acc_p + pv[i] < target - 1e-15:
            acc_p += pv[i]
            acc_g += gv[i]
        else:
            frac = 0.0 if pv[i] <= 0 else (target - acc_p) / pv[i]
            acc_g += max(0.0, min(1.0, frac)) * gv[i]
            acc_p = target
            break
    if acc_g <= 0:
        return math.inf
    return -math.log2(acc_g)


def dmax_classical(p, g) -> float:
    """Max relative entropy log2 max_x p_x / g_x for commuting pairs."""
    pv, gv = _classical_pair(p, g)
    if np.any((gv <= SUPPORT_TOL) & (pv > MASS_TOL)):
        return math.inf
    sup = gv > SUPPORT_TOL
    ratios = pv[sup] / gv[sup]
    return math.log2(float(ratios.max())) if ratios.size else 0.0


def dmax(rho, gamma) -> DivergenceValue:
    """Max relative entropy log2 min{t >= 0 : t*gamma >= rho}."""
    r = validate_density(rho)
    g = validate_density(gamma)
    if r.shape != g.shape:
        raise DimMismatch(f"shape {r.shape} vs {g.shape}")
    gdec = eigh(g)
    support = gdec.eigenvalues > SUPPORT_TOL
    vecs = gdec.eigenvectors
    r_in_g = vecs.conj().T @ r @ vecs
    off_mass = float(np.real(np.diag(r_in_g)[~support]).sum())
    if off_mass > MASS_TOL:
        return DivergenceValue(math.inf, support_violation=True)
    scale = 1.0 / np.sqrt(gdec.eigenvalues[support])
    core = r_in_g[np.ix_(support, support)] * np.outer(scale, scale)
    t = float(eigh(core).eigenvalues[-1])
    return DivergenceValue(math.log2(max(t, SUPPORT_TOL)))


def _smoothing_excess(pv: np.ndarray, gv: np.ndarray, t: float) -> float:
    return float(np.clip(pv - t * gv, 0.0, None).sum())


def dmax_eps_classical(p, g, eps: float) -> float:
    """Smoothed max relative entropy for a commuting pair.

    The trace-ball smoothing is realized classically as the smallest t with
    sum_x (p_x - t g_x)_+ <= eps, located by bisection to 1e-12 relative.
    """
    if eps < 0:
        raise EpsOutOfRange(f"eps must be nonnegative, got {eps!r}")
    pv, gv = _classical_pair(p, g)
    if np.any(gv <= 0):
        raise ZeroGibbsComponent("smoothing requires a strictly positive gibbs vector")
    if _smoothing_excess(pv, gv, 0.0) <= eps:
        return -math.inf
    lo = 0.0
    hi = float((pv / gv).max())
    while hi - lo > 1e-12 * max(1.0, hi):
        mid = 0.5 * (lo + hi)
        if _smoothing_excess(pv, gv, mid) <= eps:
            hi = mid
        else:
            lo = mid
    return math.log2(hi)


def pinched_pair_with_gibbs(
    rho, h: HamiltonianSpec, gibbs, tol: float = 1e-9
) -> tuple[np.ndarray, np.ndarray]:
    """Joint eigenbasis description of (pinch(rho), gibbs) as two classical vectors.

    The pinched state is block diagonal over the energy eigenspaces and the
    Gibbs weight is constant on each block, so diagonalizing each block gives
    a commuting classical pair.
    """
    pinched = pinch(rho, h, tol)
    gv = validate_prob_vector(gibbs)
    if gv.size != h.dim:
        raise DimMismatch(f"gibbs dim {gv.size} vs hamiltonian dim {h.dim}")
    ps: list[float] = []
    gs: list[float] = []
    for grp in level_groups(h, tol):
        block = pinched[np.ix_(grp, grp)]
        vals = np.clip(eigh(block).eigenvalues, 0.0, None)
        gval = float(gv[grp].mean())
        ps.extend(float(v) for v in vals)
        gs.extend(gval for _ in vals)
    return np.asarray(ps), np.asarray(gs)


def pinched_classical_pair(
    state: AthermalityState, tol: float = 1e-9
) -> tuple[np.ndarray, np.ndarray]:
    return pinched_pair_with_gibbs(state.state, state.hamiltonian, state.gibbs(), tol)


def distill_single_shot(state: AthermalityState, eps: float) -> float:
    """Single-shot distillable athermality: the hypothesis-testing divergence
    of the pinched state against the Gibbs state."""
    p, g = pinched_classical_pair(state)
    return dmin_eps_classical(p, g, eps)


def cost_single_shot_gpo(state: AthermalityState, eps: float) -> float:
    """Single-shot Gibbs-preserving cost D_max^eps.

    The eps = 0 case is exact for any quantum state; smoothing is supported
    for quasi-classical states only.
    """
    if eps == 0:
        return dmax(state.state, state.gibbs_matrix()).value
    if coherence(state.state, state.hamiltonian) > 1e-9:
        raise UnsupportedSmoothing(
            "smoothed cost is implemented for quasi-classical states only"
        )
    p, g = pinched_classical_pair(state)
    return dmax_eps_classical(p, g, eps)
