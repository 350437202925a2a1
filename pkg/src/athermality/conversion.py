"""Single-shot conversion deciders for athermality states.

Every decider returns a ``ConversionVerdict`` carrying the decision, a signed
margin (slack of the binding positivity or majorization condition), optional
witnesses (a PSD matrix Q and a column-stochastic matrix P), and the key of
the criterion that produced the answer.  Margins let callers band-filter
knife-edge instances instead of trusting a sign at machine precision.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import linprog

from .divergences import pinched_pair_with_gibbs
from .errors import (
    DimMismatch,
    DimNot2,
    LPNumericalFailure,
    PreconditionViolated,
    ZeroDiagonal,
    ZeroGibbsComponent,
)
from .linalg import eigh, is_psd, min_eigenvalue
from .states import HamiltonianSpec, validate_density, validate_prob_vector
from .symmetry import bohr_analysis

PSD_TOL = 1e-9
ZERO_TOL = 1e-12

# Criterion keys embedded in verdicts so downstream scripts can tell which
# decision rule fired.
CRIT_COVARIANT = "thm:ttcs"
CRIT_SAME_DIAGONAL = "thm:thm31"
CRIT_GPC_PROGRAM = "lem:lem1841"
CRIT_QUBIT_RATIO = "eq:90"
CRIT_QUBIT_FIXED_POINT = "thm:thmqu"
CRIT_CLASSICAL = "eq:19"
CRIT_PURE_PARENT = "cor:puretomix"
CRIT_CONVERSION_DISTANCE = "eq:18p93"


class Decision(enum.Enum):
    FEASIBLE = "Feasible"
    INFEASIBLE = "Infeasible"
    NOT_FOUND_WITHIN_BUDGET = "NotFoundWithinBudget"


@dataclass
class ConversionVerdict:
    decision: Decision
    margin: float
    criterion: str
    diagnostics: str = ""
    witness_q: np.ndarray | None = None
    witness_p: np.ndarray | None = None

    @property
    def feasible(self) -> bool:
        return self.decision is Decision.FEASIBLE


@dataclass(frozen=True)
class QBuild:
    """Entrywise ratio matrix of the covariant-conversion criterion."""

    matrix: np.ndarray
    free_mask: np.ndarray

    @property
    def has_free(self) -> bool:
        return bool(self.free_mask.any())


@dataclass(frozen=True)
class StructuralInfeasibility:
    """Target has coherence where the source has none; no channel can help."""

    entries: list = field(default_factory=list)
    max_violation: float = 0.0


def build_Q(rho, sigma, zero_tol: float = ZERO_TOL) -> QBuild | StructuralInfeasibility:
    """Ratio matrix q_xy = s_xy / r_xy (diagonal min{1, s_xx/r_xx}).

    Off-diagonal positions where both states vanish are marked free; positions
    where only the source vanishes make the conversion structurally
    infeasible.
    """
    r = validate_density(rho)
    s = validate_density(sigma)
    if r.shape != s.shape:
        raise DimMismatch(f"shape {r.shape} vs {s.shape}")
    m = r.shape[0]
    q = np.zeros((m, m), dtype=complex)
    free = np.zeros((m, m), dtype=bool)
    violations = []
    for x in range(m):
        rxx = float(r[x, x].real)
        sxx = float(s[x, x].real)
        if rxx > zero_tol:
            q[x, x] = min(1.0, sxx / rxx)
        elif sxx > zero_tol:
            raise ZeroDiagonal(
                f"source diagonal r_{x}{x} vanishes while target s_{x}{x} = {sxx:.3e}"
            )
        else:
            q[x, x] = 1.0
    for x in range(m):
        for y in range(m):
            if x == y:
                continue
            if abs(r[x, y]) > zero_tol:
                q[x, y] = s[x, y] / r[x, y]
            elif abs(s[x, y]) > zero_tol:
                violations.append((x, y))
            else:
                free[x, y] = True
    if violations:
        worst = max(abs(s[x, y]) for x, y in violations)
        return StructuralInfeasibility(entries=violations, max_violation=worst)
    return QBuild(matrix=q, free_mask=free)


def conversion_stochastic(r_diag, s_diag) -> np.ndarray:
    """Column-stochastic P with P r = s and maximal diagonal p_{x|x}.

    Off-diagonal mass moves from shrinking entries to growing ones in
    proportion to the respective surpluses; exact conversion (r = s) gets the
    identity.
    """
    r = np.asarray(r_diag, dtype=float)
    s = np.asarray(s_diag, dtype=float)
    m = r.size
    mu = 0.5 * float(np.abs(s - r).sum())
    if mu <= 1e-15:
        return np.eye(m)
    grow = np.clip(s - r, 0.0, None)
    shrink = np.clip(r - s, 0.0, None)
    p = np.zeros((m, m))
    for x in range(m):
        for y in range(m):
            if x == y:
                p[y, x] = min(1.0, s[x] / r[x]) if r[x] > 0 else 1.0
            elif r[x] > 0:
                p[y, x] = grow[y] * shrink[x] / (mu * r[x])
    return p


def choi_from_witness(p: np.ndarray, q: np.ndarray) -> np.ndarray:
    """Choi matrix of the covariant channel defined by (P, Q).

    Diagonal blocks carry the classical action p_{y|x}; the coherence-to-
    coherence action sits on the |xx><yy| entries given by Q's off-diagonal.
    """
    m = p.shape[0]
    j = np.zeros((m * m, m * m), dtype=complex)
    blocks = j.reshape(m, m, m, m)
    for x in range(m):
        for y in range(m):
            blocks[x, y, x, y] = p[y, x]
    for x in range(m):
        for y in range(m):
            if x != y:
                blocks[x, x, y, y] = q[x, y]
    return j


def _complete_psd(
    fixed: np.ndarray,
    free_mask: np.ndarray,
    max_iter: int = 10000,
    residual_tol: float = 1e-10,
) -> tuple[np.ndarray | None, float]:
    """Alternating projection onto the PSD cone holding fixed entries.

    Free entries start at zero; convergence certifies feasibility, running
    out of budget certifies nothing.
    """
    fixed = 0.5 * (fixed + fixed.conj().T)
    keep = ~free_mask
    x = fixed.copy()
    resid = math.inf
    for _ in range(max_iter):
        dec = eigh(x)
        clipped = (dec.eigenvectors * np.clip(dec.eigenvalues, 0.0, None)) @ dec.eigenvectors.conj().T
        y = np.where(keep, fixed, clipped)
        y = 0.5 * (y + y.conj().T)
        resid = float(np.abs(y - clipped).max())
        x = y
        if resid <= residual_tol:
            return x, resid
    return None, resid


def covariant_convertible(
    rho,
    sigma,
    h: HamiltonianSpec,
    psd_tol: float = PSD_TOL,
    zero_tol: float = ZERO_TOL,
    budget: int = 10000,
) -> ConversionVerdict:
    """Decide whether a time-translation covariant channel maps rho to sigma.

    Requires a non-degenerate Bohr spectrum.  With all source off-diagonals
    nonzero the answer is exact (PSD test of the ratio matrix); vanishing
    pairs trigger a PSD-completion search whose failure is reported as
    NotFoundWithinBudget, never as infeasibility.
    """
    report = bohr_analysis(h)
    if not report.non_degenerate_bohr:
        raise PreconditionViolated(
            f"Hamiltonian has a degenerate Bohr spectrum: {report.colliding_pairs[:3]}..."
        )
    built = build_Q(rho, sigma, zero_tol)
    if isinstance(built, StructuralInfeasibility):
        return ConversionVerdict(
            decision=Decision.INFEASIBLE,
            margin=-built.max_violation,
            criterion=CRIT_COVARIANT,
            diagnostics=(
                "target carries coherence on zero entries of the source: "
                f"{built.entries[:5]}"
            ),
        )
    r_diag = np.real(np.diag(validate_density(rho)))
    s_diag = np.real(np.diag(validate_density(sigma)))
    if not built.has_free:
        margin = min_eigenvalue(built.matrix)
        if is_psd(built.matrix, psd_tol):
            return ConversionVerdict(
                decision=Decision.FEASIBLE,
                margin=margin,
                criterion=CRIT_COVARIANT,
                witness_q=built.matrix,
                witness_p=conversion_stochastic(r_diag, s_diag),
            )
        return ConversionVerdict(
            decision=Decision.INFEASIBLE,
            margin=margin,
            criterion=CRIT_COVARIANT,
            diagnostics="ratio matrix has a negative eigenvalue",
        )
    completed, resid = _complete_psd(
        np.where(built.free_mask, 0.0, built.matrix), built.free_mask, max_iter=budget
    )
    if completed is not None and is_psd(completed, psd_tol):
        return ConversionVerdict(
            decision=Decision.FEASIBLE,
            margin=min_eigenvalue(completed),
            criterion=CRIT_COVARIANT,
            diagnostics="free entries set by PSD completion",
            witness_q=completed,
            witness_p=conversion_stochastic(r_diag, s_diag),
        )
    return ConversionVerdict(
        decision=Decision.NOT_FOUND_WITHIN_BUDGET,
        margin=-resid,
        criterion=CRIT_COVARIANT,
        diagnostics=(
            f"PSD completion stalled with residual {resid:.3e}; "
            "feasibility undecided on the free-entry path"
        ),
    )


def pure_parent(sigma) -> np.ndarray:
    """Amplitudes of the pure state that converts to sigma covariantly:
    component-wise square roots of sigma's diagonal."""
    s = validate_density(sigma)
    return np.sqrt(np.clip(np.real(np.diag(s)), 0.0, None))


# --- relative majorization ---------------------------------------------------


def _check_pair(p, g):
    pv = validate_prob_vector(p)
    gv = validate_prob_vector(g)
    if pv.shape != gv.shape:
        raise DimMismatch(f"shape {pv.shape} vs {gv.shape}")
    if np.any((gv <= 0) & (pv > 0)):
        raise ZeroGibbsComponent("gibbs entry is zero where the state has mass")
    keep = (pv > 0) | (gv > 0)
    return pv[keep], gv[keep]


def lorenz_margin(p, g, q, h) -> float:
    """Minimal gap of the testing curves sum_x (p - t g)_+ over all breakpoints.

    Nonnegative exactly when (p, g) relatively majorizes (q, h); both curves
    are piecewise linear in t, so the finite breakpoint set is exhaustive.
    Below the first breakpoint the curves coincide at 1 - t, so feasible
    instances sit at margin 0: the value measures violation, not slack.
    """
    pv, gv = _check_pair(p, g)
    qv, hv = _check_pair(q, h)
    points = np.concatenate((pv / gv, qv / hv))
    points = points[points > 0]
    gap = math.inf
    for t in points:
        fp = float(np.clip(pv - t * gv, 0.0, None).sum())
        fq = float(np.clip(qv - t * hv, 0.0, None).sum())
        if fp == 0.0 and fq == 0.0:
            # both curves have run out; 0 >= 0 carries no information
            continue
        gap = min(gap, fp - fq)
    return gap


def relative_majorization(p, g, q, h, tol: float = 1e-12) -> bool:
    """True iff a single column-stochastic map sends p to q and g to h."""
    return lorenz_margin(p, g, q, h) >= -tol


def stochastic_map_exists(p, g, q, h) -> bool:
    """LP oracle for relative majorization: search the stochastic matrix
    explicitly.  Independent of the breakpoint test above."""
    pv = validate_prob_vector(p)
    gv = validate_prob_vector(g)
    qv = validate_prob_vector(q)
    hv = validate_prob_vector(h)
    m = pv.size
    n = qv.size
    nv = n * m
    a_eq = []
    b_eq = []
    for y in range(n):
        row = np.zeros(nv)
        row[y * m : (y + 1) * m] = pv
        a_eq.append(row)
        b_eq.append(qv[y])
    for y in range(n):
        row = np.zeros(nv)
        row[y * m : (y + 1) * m] = gv
        a_eq.append(row)
        b_eq.append(hv[y])
    for x in range(m):
        row = np.zeros(nv)
        row[x::m] = 1.0
        a_eq.append(row)
        b_eq.append(1.0)
    res = linprog(
        c=np.zeros(nv),
        A_eq=np.asarray(a_eq),
        b_eq=np.asarray(b_eq),
        bounds=[(0.0, 1.0)] * nv,
        method="highs",
    )
    if res.status == 0:
        return True
    if res.status == 2:
        return False
    raise LPNumericalFailure(f"linprog status {res.status}: {res.message}")


# --- qubit closed form --------------------------------------------------------


def _qubit_entries(rho, sigma, gamma):
    r_mat = validate_density(rho)
    s_mat = validate_density(sigma)
    if r_mat.shape[0] != 2 or s_mat.shape[0] != 2:
        raise DimNot2("qubit criterion requires 2x2 states")
    gv = validate_prob_vector(gamma)
    if gv.size != 2:
        raise DimNot2("gamma must be a 2-component probability vector")
    if gv.min() <= 0:
        raise ZeroGibbsComponent("qubit gibbs vector must be strictly positive")
    return (
        float(r_mat[0, 0].real),
        complex(r_mat[0, 1]),
        float(s_mat[0, 0].real),
        complex(s_mat[0, 1]),
        float(gv[0]),
    )


def qubit_ratio_margin(r: float, s: float, g: float, coh_ratio_sq: float) -> float:
    """Slack of the qubit coherence-ratio bound for diagonal data (r, s, g).

    Positive means the bound |b/a|^2 <= p00 * p11 holds, where p00 and p11
    come from Cramer's rule on the Gibbs-preserving linear system.
    """
    p00 = (s * (1 - g) - g * (1 - r)) / (r - g)
    p11 = (r * (1 - g) - g * (1 - s)) / (r - g)
    return p00 * p11 - coh_ratio_sq


def gpc_convertible_qubit(rho, sigma, gamma, tol: float = 1e-9) -> ConversionVerdict:
    """Exact closed-form decision for qubit conversions under Gibbs-preserving
    covariant channels.

    Branches: quasi-classical source (no coherence), trivial Hamiltonian
    (g = 1/2, spectra majorization), Gibbs-diagonal source (r = g), and the
    generic Cramer + coherence-ratio test.
    """
    r, a, s, b, g = _qubit_entries(rho, sigma, gamma)
    gvec = np.array([g, 1.0 - g])

    if abs(a) <= ZERO_TOL:
        if abs(b) > ZERO_TOL:
            return ConversionVerdict(
                decision=Decision.INFEASIBLE,
                margin=-abs(b),
                criterion=CRIT_CLASSICAL,
                diagnostics="source is quasi-classical; coherence cannot be created",
            )
        gap = lorenz_margin([r, 1 - r], gvec, [s, 1 - s], gvec)
        if gap >= -tol:
            if abs(r - g) > ZERO_TOL:
                p = _qubit_cramer(r, s, g)
            else:
                p = np.eye(2)
            return ConversionVerdict(
                decision=Decision.FEASIBLE,
                margin=gap,
                criterion=CRIT_CLASSICAL,
                witness_p=p,
                witness_q=np.eye(2, dtype=complex),
            )
        return ConversionVerdict(
            decision=Decision.INFEASIBLE,
            margin=gap,
            criterion=CRIT_CLASSICAL,
            diagnostics="relative majorization fails on the diagonals",
        )

    if abs(g - 0.5) <= 1e-9:
        return _qubit_trivial_hamiltonian(rho, sigma)

    if abs(r - g) <= ZERO_TOL:
        if abs(s - g) > tol:
            return ConversionVerdict(
                decision=Decision.INFEASIBLE,
                margin=-abs(s - g),
                criterion=CRIT_QUBIT_FIXED_POINT,
                diagnostics="source diagonal equals gibbs, so the target's must too",
            )
        margin = abs(a) - abs(b)
        if margin >= -tol:
            q = np.array([[1.0, b / a], [np.conj(b / a), 1.0]])
            return ConversionVerdict(
                decision=Decision.FEASIBLE,
                margin=margin,
                criterion=CRIT_QUBIT_FIXED_POINT,
                witness_p=np.eye(2),
                witness_q=q,
            )
        return ConversionVerdict(
            decision=Decision.INFEASIBLE,
            margin=margin,
            criterion=CRIT_QUBIT_FIXED_POINT,
            diagnostics="coherence magnitude cannot grow at the gibbs fixed point",
        )

    p = _qubit_cramer(r, s, g)
    stoch_margin = float(p.min())
    ratio_margin = qubit_ratio_margin(r, s, g, abs(b / a) ** 2)
    margin = min(stoch_margin, ratio_margin)
    if stoch_margin >= -tol and ratio_margin >= -tol:
        q = np.array([[p[0, 0], b / a], [np.conj(b / a), p[1, 1]]])
        return ConversionVerdict(
            decision=Decision.FEASIBLE,
            margin=margin,
            criterion=CRIT_QUBIT_RATIO,
            witness_p=p,
            witness_q=q,
        )
    why = (
        "relative majorization fails on the diagonals"
        if stoch_margin < -tol
        else "coherence ratio bound fails"
    )
    return ConversionVerdict(
        decision=Decision.INFEASIBLE,
        margin=margin,
        criterion=CRIT_QUBIT_RATIO,
        diagnostics=why,
    )


def _qubit_cramer(r: float, s: float, g: float) -> np.ndarray:
    """Unique candidate stochastic matrix with P r = s and P g = g (r != g)."""
    p00 = (s * (1 - g) - g * (1 - r)) / (r - g)
    p11 = (r * (1 - g) - g * (1 - s)) / (r - g)
    return np.array([[p00, 1.0 - p11], [1.0 - p00, p11]])


def _qubit_trivial_hamiltonian(rho, sigma) -> ConversionVerdict:
    """g = 1/2: all unitaries are free, so only the spectra matter."""
    rv = np.sort(eigh(validate_density(rho)).eigenvalues)[::-1]
    sv = np.sort(eigh(validate_density(sigma)).eigenvalues)[::-1]
    margin = float(rv[0] - sv[0])
    if margin >= -1e-12:
        if rv[0] - rv[1] > 1e-14:
            t = (sv[0] - rv[1]) / (rv[0] - rv[1])
        else:
            t = 1.0
        t = min(1.0, max(0.0, t))
        mix = np.array([[t, 1.0 - t], [1.0 - t, t]])
        return ConversionVerdict(
            decision=Decision.FEASIBLE,
            margin=margin,
            criterion=CRIT_CLASSICAL,
            diagnostics="trivial hamiltonian: witness mixes sorted spectra",
            witness_p=mix,
            witness_q=np.eye(2, dtype=complex),
        )
    return ConversionVerdict(
        decision=Decision.INFEASIBLE,
        margin=margin,
        criterion=CRIT_CLASSICAL,
        diagnostics="spectrum of the target majorizes the source's",
    )


def qubit_sweep_threshold(
    sigma,
    gamma,
    r: float = 0.5,
    lo: float = 1e-6,
    hi: float = 1.0,
    tol: float = 1e-12,
) -> dict:
    """Locate the coherence threshold of the qubit ratio bound by bisection.

    Sweeps source states with fixed diagonal (r, 1-r) and off-diagonal
    magnitude a; the ratio margin is monotone in a, so the feasibility
    boundary is a single point.
    """
    _, _, s, b, g = _qubit_entries(sigma, sigma, gamma)
    if abs(r - g) <= ZERO_TOL:
        raise PreconditionViolated("sweep diagonal must differ from the gibbs weight")
    stoch_margin = float(_qubit_cramer(r, s, g).min())
    if stoch_margin < -1e-12:
        return {
            "threshold": None,
            "stochastic_margin": stoch_margin,
            "diagonal": r,
            "target_coherence": abs(b),
        }

    def margin(a: float) -> float:
        return qubit_ratio_margin(r, s, g, abs(b) ** 2 / a**2)

    if margin(hi) < 0:
        return {
            "threshold": None,
            "margin_hi": margin(hi),
            "diagonal": r,
            "target_coherence": abs(b),
        }
    a_lo, a_hi = lo, hi
    while a_hi - a_lo > tol:
        mid = 0.5 * (a_lo + a_hi)
        if margin(mid) >= 0:
            a_hi = mid
        else:
            a_lo = mid
    return {
        "threshold": a_hi,
        "stochastic_margin": stoch_margin,
        "margin_at_threshold": margin(a_hi),
        "diagonal": r,
        "target_coherence": abs(b),
    }


# --- the convex feasibility program (Lemma-5 form) ----------------------------


def _dykstra_system(r_mat, s_mat, gvec, m, zero_tol):
    """Affine constraint system over (P, M) for the Gibbs-preserving program.

    Variable order: P row-major (m*m), diag M (m), Re upper M (K), Im upper M
    (K).  Returns (A, b, upper_pairs, structural_violations).
    """
    iu, ju = np.triu_indices(m, 1)
    pairs = list(zip(iu.tolist(), ju.tolist()))
    k = len(pairs)
    nvar = m * m + m + 2 * k
    rows = []
    rhs = []
    r_diag = np.real(np.diag(r_mat))
    s_diag = np.real(np.diag(s_mat))

    def p_idx(y, x):
        return y * m + x

    for y in range(m):
        row = np.zeros(nvar)
        for x in range(m):
            row[p_idx(y, x)] = r_diag[x]
        rows.append(row)
        rhs.append(s_diag[y])
    for y in range(m):
        row = np.zeros(nvar)
        for x in range(m):
            row[p_idx(y, x)] = gvec[x]
        rows.append(row)
        rhs.append(gvec[y])
    for x in range(m):
        row = np.zeros(nvar)
        for y in range(m):
            row[p_idx(y, x)] = 1.0
        rows.append(row)
        rhs.append(1.0)
    for x in range(m):
        row = np.zeros(nvar)
        row[m * m + x] = 1.0
        row[p_idx(x, x)] = -1.0
        rows.append(row)
        rhs.append(0.0)

    violations = []
    for t, (x, y) in enumerate(pairs):
        rxy = r_mat[x, y]
        sxy = s_mat[x, y]
        if abs(rxy) > zero_tol:
            val = sxy / rxy
            row = np.zeros(nvar)
            row[m * m + m + t] = 1.0
            rows.append(row)
            rhs.append(val.real)
            row = np.zeros(nvar)
            row[m * m + m + k + t] = 1.0
            rows.append(row)
            rhs.append(val.imag)
        elif abs(sxy) > zero_tol:
            violations.append((x, y))
        # both zero: entry is free, no constraint
    return np.asarray(rows), np.asarray(rhs), pairs, violations


def _unpack_m(v, m, pairs):
    k = len(pairs)
    mm = np.zeros((m, m), dtype=complex)
    mm[np.diag_indices(m)] = v[m * m : m * m + m]
    for t, (x, y) in enumerate(pairs):
        z = complex(v[m * m + m + t], v[m * m + m + k + t])
        mm[x, y] = z
        mm[y, x] = np.conj(z)
    return mm


def _pack_m(v, mat, m, pairs):
    k = len(pairs)
    v[m * m : m * m + m] = np.real(np.diag(mat))
    for t, (x, y) in enumerate(pairs):
        v[m * m + m + t] = mat[x, y].real
        v[m * m + m + k + t] = mat[x, y].imag


def gpc_feasible(
    rho,
    sigma,
    gamma,
    h: HamiltonianSpec,
    budget: int = 20000,
    feas_tol: float = 1e-9,
    zero_tol: float = ZERO_TOL,
) -> ConversionVerdict:
    """Decide Gibbs-preserving covariant convertibility by Dykstra projections.

    Alternates between the affine set (stochastic action P r = s, P g = g,
    column sums, and the tie between M's diagonal and P's) and the product of
    the nonnegativity box with the PSD cone.  Convergence certifies
    feasibility; exhausting the budget is reported as such, never as a
    negative certificate.
    """
    r_mat = validate_density(rho)
    s_mat = validate_density(sigma)
    if r_mat.shape != s_mat.shape:
        raise DimMismatch(f"shape {r_mat.shape} vs {s_mat.shape}")
    gvec = validate_prob_vector(gamma)
    if gvec.size != r_mat.shape[0]:
        raise DimMismatch("gibbs vector dimension mismatch")
    if gvec.min() <= 0:
        raise ZeroGibbsComponent("gibbs vector must be strictly positive")
    report = bohr_analysis(h)
    if not report.non_degenerate_bohr:
        raise PreconditionViolated(
            f"Hamiltonian has a degenerate Bohr spectrum: {report.colliding_pairs[:3]}..."
        )
    m = r_mat.shape[0]
    a, b, pairs, violations = _dykstra_system(r_mat, s_mat, gvec, m, zero_tol)
    if violations:
        worst = max(abs(s_mat[x, y]) for x, y in violations)
        return ConversionVerdict(
            decision=Decision.INFEASIBLE,
            margin=-worst,
            criterion=CRIT_GPC_PROGRAM,
            diagnostics=(
                "target carries coherence on zero entries of the source: "
                f"{violations[:5]}"
            ),
        )

    pinv = np.linalg.pinv(a)
    shift = pinv @ b
    proj_mat = np.eye(a.shape[1]) - pinv @ a

    def project_affine(v):
        return proj_mat @ v + shift

    def project_cone(v):
        w = v.copy()
        w[: m * m] = np.clip(w[: m * m], 0.0, None)
        mat = _unpack_m(w, m, pairs)
        dec = eigh(mat)
        clipped = (dec.eigenvectors * np.clip(dec.eigenvalues, 0.0, None)) @ dec.eigenvectors.conj().T
        _pack_m(w, clipped, m, pairs)
        return w

    nvar = a.shape[1]
    v = np.zeros(nvar)
    v[: m * m] = np.eye(m).reshape(-1)
    v[m * m : m * m + m] = 1.0
    v = project_affine(v)
    corr = np.zeros(nvar)
    resid = math.inf
    window: list[float] = []
    iterations = 0
    for it in range(budget):
        iterations = it + 1
        y = project_cone(v + corr)
        corr = v + corr - y
        v = project_affine(y)
        resid = float(np.abs(v - y).max())
        if resid <= feas_tol:
            break
        window.append(resid)
        if len(window) > 200:
            window.pop(0)
            if resid > 100 * feas_tol and window[0] - resid < 1e-3 * resid:
                break

    mat = _unpack_m(v, m, pairs)
    margin = min_eigenvalue(mat)
    if resid <= feas_tol:
        p = np.clip(v[: m * m].reshape(m, m), 0.0, None)
        p /= p.sum(axis=0, keepdims=True)
        return ConversionVerdict(
            decision=Decision.FEASIBLE,
            margin=margin,
            criterion=CRIT_GPC_PROGRAM,
            diagnostics=f"converged in {iterations} iterations, residual {resid:.2e}",
            witness_p=p,
            witness_q=mat,
        )
    return ConversionVerdict(
        decision=Decision.NOT_FOUND_WITHIN_BUDGET,
        margin=-resid,
        criterion=CRIT_GPC_PROGRAM,
        diagnostics=(
            f"no feasible point within {iterations} iterations; "
            f"residual gap {resid:.3e} (semi-decision)"
        ),
    )


def same_diagonal_gpc(rho, sigma, h: HamiltonianSpec, tol: float = 1e-9) -> ConversionVerdict:
    """Same-diagonal criterion: only the coherence pattern matters.

    Feasible iff the unit-diagonal ratio matrix is PSD; the Gibbs state plays
    no role because the non-uniformity content of the two states is equal.
    """
    from .errors import DiagonalMismatch

    r_mat = validate_density(rho)
    s_mat = validate_density(sigma)
    if r_mat.shape != s_mat.shape:
        raise DimMismatch(f"shape {r_mat.shape} vs {s_mat.shape}")
    report = bohr_analysis(h)
    if not report.non_degenerate_bohr:
        raise PreconditionViolated("Hamiltonian has a degenerate Bohr spectrum")
    r_diag = np.real(np.diag(r_mat))
    s_diag = np.real(np.diag(s_mat))
    if float(np.abs(r_diag - s_diag).max()) > tol:
        raise DiagonalMismatch(
            f"diagonals differ by {float(np.abs(r_diag - s_diag).max()):.3e}"
        )
    m = r_mat.shape[0]
    off = ~np.eye(m, dtype=bool)
    if np.any(np.abs(r_mat[off]) <= ZERO_TOL):
        raise PreconditionViolated("source must have nonzero off-diagonal entries")
    q = np.eye(m, dtype=complex)
    q[off] = s_mat[off] / r_mat[off]
    margin = min_eigenvalue(q)
    if is_psd(q, PSD_TOL):
        return ConversionVerdict(
            decision=Decision.FEASIBLE,
            margin=margin,
            criterion=CRIT_SAME_DIAGONAL,
            witness_p=np.eye(m),
            witness_q=q,
        )
    return ConversionVerdict(
        decision=Decision.INFEASIBLE,
        margin=margin,
        criterion=CRIT_SAME_DIAGONAL,
        diagnostics="unit-diagonal ratio matrix has a negative eigenvalue",
    )


def conversion_distance_to_quasiclassical(
    rho,
    gamma_in,
    q_target,
    g_out,
    h_in: HamiltonianSpec,
) -> float:
    """Best trace-distance approach to a quasi-classical target.

    The covariant constraint collapses onto pinching the source, after which
    the problem is the classical Gibbs-preserving transport LP: minimize
    0.5 * ||q - T p||_1 over column-stochastic T with T g_in = g_out.
    """
    p_vec, g_vec = pinched_pair_with_gibbs(rho, h_in, gamma_in)
    qv = validate_prob_vector(q_target)
    gout = validate_prob_vector(g_out)
    if qv.shape != gout.shape:
        raise DimMismatch("target state and gibbs must share a dimension")
    m = p_vec.size
    n = qv.size
    nt = n * m
    c = np.concatenate([np.zeros(nt), 0.5 * np.ones(n)])
    a_ub = []
    b_ub = []
    for y in range(n):
        row = np.zeros(nt + n)
        row[y * m : (y + 1) * m] = p_vec
        row[nt + y] = -1.0
        a_ub.append(row)
        b_ub.append(qv[y])
        row = np.zeros(nt + n)
        row[y * m : (y + 1) * m] = -p_vec
        row[nt + y] = -1.0
        a_ub.append(row)
        b_ub.append(-qv[y])
    a_eq = []
    b_eq = []
    for x in range(m):
        row = np.zeros(nt + n)
        row[x:nt:m] = 1.0
        a_eq.append(row)
        b_eq.append(1.0)
    for y in range(n):
        row = np.zeros(nt + n)
        row[y * m : (y + 1) * m] = g_vec
        a_eq.append(row)
        b_eq.append(gout[y])
    res = linprog(
        c=c,
        A_ub=np.asarray(a_ub),
        b_ub=np.asarray(b_ub),
        A_eq=np.asarray(a_eq),
        b_eq=np.asarray(b_eq),
        bounds=[(0.0, None)] * (nt + n),
        method="highs",
    )
    if not res.success:
        raise LPNumericalFailure(f"linprog status {res.status}: {res.message}")
    return max(0.0, float(res.fun))
