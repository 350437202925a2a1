"""Method-of-types machinery for i.i.d. asymptotics.

Everything runs on type vectors (integer compositions of n) instead of the
m**n-dimensional product space, and all weights live in the log2 domain so
that nothing underflows before n of a few thousand.
"""

from __future__ import annotations

import io
import math
from dataclasses import dataclass
from math import comb

import numpy as np
from scipy.special import gammaln

from .errors import (
    DimMismatch,
    EmptyTypicalSet,
    NotProductPure,
    PreconditionViolated,
    SupportViolation,
    TooLarge,
)
from .states import HamiltonianSpec, validate_prob_vector

MAX_TYPES = 10**7
LN2 = math.log(2.0)


@dataclass(frozen=True)
class TypeVector:
    """Occupation counts of one empirical frequency class."""

    counts: tuple[int, ...]

    @property
    def n(self) -> int:
        return sum(self.counts)

    @property
    def m(self) -> int:
        return len(self.counts)

    def probabilities(self) -> np.ndarray:
        return np.asarray(self.counts, dtype=float) / self.n


def count_types(n: int, m: int) -> int:
    return comb(n + m - 1, m - 1)


def _counts_matrix(n: int, m: int) -> np.ndarray:
    """All compositions of n into m nonnegative parts, lexicographically."""
    if n < 1 or m < 1:
        raise DimMismatch("need n >= 1 and m >= 1")
    if count_types(n, m) > MAX_TYPES:
        raise TooLarge(f"{count_types(n, m)} types exceeds the {MAX_TYPES} cap")
    if m == 1:
        return np.array([[n]], dtype=np.int64)
    if m == 2:
        k = np.arange(n + 1, dtype=np.int64)
        return np.stack([k, n - k], axis=1)
    rows: list[list[int]] = []

    def rec(prefix: list[int], remaining: int, slots: int):
        if slots == 1:
            rows.append(prefix + [remaining])
            return
        for c in range(remaining + 1):
            rec(prefix + [c], remaining - c, slots - 1)

    rec([], n, m)
    return np.asarray(rows, dtype=np.int64)


def enumerate_types(n: int, m: int) -> list[TypeVector]:
    """All types of sequences of length n over an m-letter alphabet."""
    return [TypeVector(tuple(int(c) for c in row)) for row in _counts_matrix(n, m)]


def _log2_multinomial(counts: np.ndarray) -> np.ndarray:
    n = counts.sum(axis=-1)
    return (gammaln(n + 1) - gammaln(counts + 1).sum(axis=-1)) / LN2


def multinomial_log(t: TypeVector) -> float:
    """log2 of the number of sequences of type t."""
    return float(_log2_multinomial(np.asarray(t.counts, dtype=float)))


def _log2_weights(counts: np.ndarray, p: np.ndarray) -> np.ndarray:
    """log2 of the total probability each type carries under an i.i.d. source."""
    with np.errstate(divide="ignore"):
        logp = np.log2(p)
    contrib = counts @ np.where(p > 0, logp, 0.0)
    w = _log2_multinomial(counts) + contrib
    if np.any(p <= 0):
        unsupported = (counts[:, p <= 0] > 0).any(axis=1)
        w = np.where(unsupported, -math.inf, w)
    return w


def type_weight_log(t: TypeVector, p) -> float:
    """log2 probability that an i.i.d. p source emits a sequence of type t."""
    pv = validate_prob_vector(p)
    if pv.size != t.m:
        raise DimMismatch(f"type has {t.m} parts, p has {pv.size}")
    return float(_log2_weights(np.asarray([t.counts], dtype=np.int64), pv)[0])


def type_energy(t: TypeVector, h: HamiltonianSpec) -> float:
    """Total energy of the eigenspace labelled by t: n times the type-average energy."""
    if t.m != h.dim:
        raise DimMismatch(f"type has {t.m} parts, hamiltonian has {h.dim} levels")
    return float(np.dot(t.counts, h.as_array()))


def _tv_to(counts: np.ndarray, p: np.ndarray) -> np.ndarray:
    n = counts[0].sum()
    return 0.5 * np.abs(counts / n - p).sum(axis=1)


def typical_set(n: int, eps: float, p) -> list[TypeVector]:
    """Types within total-variation eps of p (inclusive)."""
    if eps <= 0:
        raise PreconditionViolated("eps must be positive")
    pv = validate_prob_vector(p)
    counts = _counts_matrix(n, pv.size)
    keep = _tv_to(counts, pv) <= eps + 1e-12
    return [TypeVector(tuple(int(c) for c in row)) for row in counts[keep]]


def _sum_exp2(logs: np.ndarray) -> float:
    finite = logs[np.isfinite(logs)]
    if finite.size == 0:
        return 0.0
    mx = float(finite.max())
    return float(2.0**mx * np.exp2(finite - mx).sum())


def tail_mass_and_bound(n: int, eps: float, p) -> tuple[float, float]:
    """Exact probability outside the typical ball and its Pinsker-style bound
    2**(-2 n eps^2) * (n+1)**m."""
    if eps <= 0:
        raise PreconditionViolated("eps must be positive")
    pv = validate_prob_vector(p)
    counts = _counts_matrix(n, pv.size)
    weights = _log2_weights(counts, pv)
    outside = _tv_to(counts, pv) > eps + 1e-12
    tail = _sum_exp2(weights[outside])
    bound = 2.0 ** (-2.0 * n * eps * eps) * float((n + 1) ** pv.size)
    return tail, bound


def as_type_probabilities(psi) -> np.ndarray:
    """Per-letter probabilities from either amplitudes or a probability vector.

    A normalized amplitude vector (unit 2-norm) maps to its squared moduli; a
    probability vector passes through.  Vectors valid under both readings are
    0/1-valued, where the two coincide.
    """
    arr = np.asarray(psi)
    if np.iscomplexobj(arr) or np.any(np.asarray(arr, dtype=float) < 0):
        amp = np.asarray(arr, dtype=complex)
        if abs(np.linalg.norm(amp) - 1.0) > 1e-9:
            raise NotProductPure(f"amplitude norm {np.linalg.norm(amp)!r} is not 1")
        return np.abs(amp) ** 2
    arr = np.asarray(arr, dtype=float)
    if abs(arr.sum() - 1.0) <= 1e-9:
        return validate_prob_vector(arr)
    if abs(np.linalg.norm(arr) - 1.0) <= 1e-9:
        return arr**2
    raise NotProductPure("input is neither a probability nor a unit amplitude vector")


@dataclass(frozen=True)
class EnergyClass:
    """One total-energy eigenspace: its weight and the pure block over types."""

    energy: float
    log_weight: float
    members: tuple[tuple[TypeVector, float], ...]


def default_energy_tol(n: int, h: HamiltonianSpec, rtol: float = 1e-9) -> float:
    return rtol * max(1.0, n * max(h.levels))


def energy_class_spectrum(
    psi, n: int, h: HamiltonianSpec, energy_rtol: float = 1e-9, energy_tol: float | None = None
) -> list[EnergyClass]:
    """Group the type decomposition of an n-fold product pure state by energy.

    Each class block of the pinched state is pure, so (class weight, member
    amplitudes) determine the pinched entropy and Gibbs cross term without
    touching the exponential-size product space.
    """
    pv = as_type_probabilities(psi)
    if pv.size != h.dim:
        raise DimMismatch(f"{pv.size} amplitudes vs {h.dim} levels")
    counts = _counts_matrix(n, pv.size)
    weights = _log2_weights(counts, pv)
    finite = np.isfinite(weights)
    counts = counts[finite]
    weights = weights[finite]
    energies = counts @ h.as_array()
    tol = default_energy_tol(n, h, energy_rtol) if energy_tol is None else energy_tol
    order = np.lexsort((np.arange(len(energies)), energies))
    classes: list[EnergyClass] = []
    start = 0
    sorted_idx = list(order)
    while start < len(sorted_idx):
        stop = start + 1
        while (
            stop < len(sorted_idx)
            and energies[sorted_idx[stop]] - energies[sorted_idx[stop - 1]] <= tol
        ):
            stop += 1
        idx = sorted_idx[start:stop]
        members = tuple(
            (TypeVector(tuple(int(c) for c in counts[i])), float(weights[i])) for i in idx
        )
        logw = math.log2(_sum_exp2(weights[idx])) if idx else -math.inf
        classes.append(
            EnergyClass(energy=float(energies[idx[0]]), log_weight=logw, members=members)
        )
        start = stop
    return classes


def distill_rate_estimate(
    n: int, psi, gibbs, h: HamiltonianSpec, energy_tol: float | None = None
) -> float:
    """Per-copy divergence of the pinched n-fold product state from the Gibbs
    state, computed entirely from energy classes of types.

    Converges to the relative entropy of the single-copy pair as n grows;
    merged classes on rationally dependent ladders are the correct physics,
    not an artifact.
    """
    gv = validate_prob_vector(gibbs)
    pv = as_type_probabilities(psi)
    if np.any((gv <= 0) & (pv > 0)):
        raise SupportViolation("gibbs vector vanishes on the state's support")
    classes = energy_class_spectrum(psi, n, h, energy_tol=energy_tol)
    entropy = 0.0
    cross = 0.0
    with np.errstate(divide="ignore"):
        logg = np.where(gv > 0, np.log2(np.where(gv > 0, gv, 1.0)), 0.0)
    for cls in classes:
        w = 2.0**cls.log_weight
        if w > 0:
            entropy -= w * cls.log_weight
        for tvec, logw in cls.members:
            cross += 2.0**logw * float(np.dot(tvec.counts, logg))
    return (-entropy - cross) / n


def coherence_growth(n: int, psi, h: HamiltonianSpec) -> tuple[float, float]:
    """Coherence of the n-fold product pure state and its logarithmic bound
    m * log2(n+1)."""
    classes = energy_class_spectrum(psi, n, h)
    value = 0.0
    for cls in classes:
        w = 2.0**cls.log_weight
        if w > 0:
            value -= w * cls.log_weight
    pv = as_type_probabilities(psi)
    bound = pv.size * math.log2(n + 1)
    return value, bound


@dataclass(frozen=True)
class SpectrumEntry:
    type: TypeVector
    log_weight: float
    energy: float


@dataclass(frozen=True)
class TypedSpectrum:
    """Type-resolved description of a (possibly truncated) product pure state."""

    entries: tuple[SpectrumEntry, ...]
    n: int
    log_retained_mass: float = 0.0

    def total_mass(self) -> float:
        return _sum_exp2(np.array([e.log_weight for e in self.entries]))

    def energy_spread(self) -> float:
        energies = [e.energy for e in self.entries]
        return max(energies) - min(energies)

    @property
    def trace_distance_proxy(self) -> float:
        """Upper bound sqrt(1 - retained mass) on the half trace distance to
        the untruncated state."""
        return math.sqrt(max(0.0, 1.0 - 2.0**self.log_retained_mass))


def chi_state(n: int, alpha: float, psi, h: HamiltonianSpec) -> TypedSpectrum:
    """Typical-set truncation of the n-fold product state at radius n**(alpha-1).

    Retained weights are renormalized; the retained mass (before
    renormalization) is recorded so callers can bound the trace distance to
    the untruncated state.
    """
    if not 0.5 < alpha < 1.0:
        raise PreconditionViolated(f"alpha must lie in (1/2, 1), got {alpha!r}")
    pv = as_type_probabilities(psi)
    if pv.size != h.dim:
        raise DimMismatch(f"{pv.size} amplitudes vs {h.dim} levels")
    eps_n = float(n) ** (alpha - 1.0)
    counts = _counts_matrix(n, pv.size)
    weights = _log2_weights(counts, pv)
    keep = (_tv_to(counts, pv) <= eps_n + 1e-12) & np.isfinite(weights)
    counts = counts[keep]
    weights = weights[keep]
    if counts.shape[0] == 0:
        raise EmptyTypicalSet(f"no types within {eps_n!r} of p at n={n}")
    retained = _sum_exp2(weights)
    log_retained = math.log2(retained)
    energies = counts @ h.as_array()
    entries = tuple(
        SpectrumEntry(
            type=TypeVector(tuple(int(c) for c in counts[i])),
            log_weight=float(weights[i] - log_retained),
            energy=float(energies[i]),
        )
        for i in range(counts.shape[0])
    )
    spec = TypedSpectrum(entries=entries, n=n, log_retained_mass=log_retained)
    spread_cap = 4.0 * n**alpha * float(h.as_array().sum())
    assert spec.energy_spread() <= spread_cap + 1e-9 * (1.0 + spread_cap)
    return spec


def min_energy_type(
    spec: TypedSpectrum,
    h: HamiltonianSpec,
    gibbs=None,
    energy_rtol: float = 1e-9,
) -> tuple[TypeVector, bool]:
    """Retained type of minimal energy.

    Ties are broken lexicographically; when a Gibbs vector is supplied the
    tie resolves toward the cost-optimal (largest Gibbs overlap) choice
    first.  The returned flag marks that a tie was present.
    """
    tol = default_energy_tol(spec.n, h, energy_rtol)
    emin = min(e.energy for e in spec.entries)
    candidates = [e.type for e in spec.entries if e.energy - emin <= tol]
    tie = len(candidates) > 1
    if gibbs is not None and tie:
        gv = validate_prob_vector(gibbs)
        with np.errstate(divide="ignore"):
            logg = np.log2(np.where(gv > 0, gv, 1.0))

        def overlap(t: TypeVector) -> float:
            if np.any((gv <= 0) & (np.asarray(t.counts) > 0)):
                return -math.inf
            return float(np.dot(t.counts, logg))

        best = max(overlap(t) for t in candidates)
        candidates = [t for t in candidates if overlap(t) >= best - 1e-12]
    return min(candidates, key=lambda t: t.counts), tie


def pure_cost_per_copy(n: int, alpha: float, psi, gibbs, h: HamiltonianSpec) -> float:
    """Per-copy preparation cost of the truncated product state.

    The protocol charges the max divergence of the minimum-energy retained
    basis state against the Gibbs state, which is the Gibbs log-overlap of
    that type; converges to the single-copy relative entropy.
    """
    gv = validate_prob_vector(gibbs)
    pv = as_type_probabilities(psi)
    if np.any((gv <= 0) & (pv > 0)):
        raise SupportViolation("gibbs vector vanishes on the state's support")
    spec = chi_state(n, alpha, pv, h)
    z, _ = min_energy_type(spec, h, gibbs=gv)
    zc = np.asarray(z.counts)
    with np.errstate(divide="ignore"):
        logg = np.log2(np.where(gv > 0, gv, 1.0))
    return -float(np.dot(zc, logg)) / n


@dataclass(frozen=True)
class SlarSpec:
    """Reference system whose maximal energy grows as c * n**alpha.

    Levels start at zero and mirror the energies retained in the truncated
    product state; the weights reproduce its energy distribution exactly.
    """

    n: int
    alpha: float
    levels: tuple[float, ...]
    phi_weights: np.ndarray
    z_type: TypeVector
    c_bound: float
    tie_flagged: bool

    @property
    def max_level(self) -> float:
        return max(self.levels)

    @property
    def contract_bound(self) -> float:
        return self.c_bound * self.n**self.alpha

    @property
    def tight_bound(self) -> float:
        # Diagnostic only: the intermediate constant 2 * sum(a) from the
        # construction, stricter than the contracted 4 * sum(a).
        return 0.5 * self.contract_bound


def slar_reference(n: int, alpha: float, psi, h: HamiltonianSpec) -> SlarSpec:
    """Build the sublinear reference system matching the truncated state.

    The pure reference state on these levels, together with the
    minimum-energy basis state of the product space, has exactly the energy
    histogram of the truncated product state.
    """
    spec = chi_state(n, alpha, psi, h)
    order = sorted(
        range(len(spec.entries)),
        key=lambda i: (spec.entries[i].energy, spec.entries[i].type.counts),
    )
    emin = spec.entries[order[0]].energy
    levels = tuple(spec.entries[i].energy - emin for i in order)
    weights = np.array([2.0 ** spec.entries[i].log_weight for i in order])
    weights = weights / weights.sum()
    z, tie = min_energy_type(spec, h)
    c_bound = 4.0 * float(h.as_array().sum())
    out = SlarSpec(
        n=n,
        alpha=alpha,
        levels=levels,
        phi_weights=weights,
        z_type=z,
        c_bound=c_bound,
        tie_flagged=tie,
    )
    assert out.max_level <= out.contract_bound + 1e-9 * (1.0 + out.contract_bound)
    return out


def slar_budget(spec: SlarSpec, beta: float) -> tuple[float, float]:
    """Athermality budget of the reference system.

    Returns (beta * max level, beta * c * n**alpha): the divergence any state
    on the reference system can carry, and the sublinearity contract it obeys.
    """
    dmax_bound = beta * spec.max_level
    limit = beta * spec.contract_bound
    assert dmax_bound <= limit + 1e-9 * (1.0 + limit)
    return dmax_bound, limit


# --- rate/cost/budget series and their CSV form -------------------------------


def _pure_reference_rate(psi, gibbs) -> float:
    pv = as_type_probabilities(psi)
    gv = validate_prob_vector(gibbs)
    if np.any((gv <= 0) & (pv > 0)):
        raise SupportViolation("gibbs vector vanishes on the state's support")
    with np.errstate(divide="ignore"):
        logg = np.log2(np.where(gv > 0, gv, 1.0))
    return -float(np.dot(pv, logg))


def distill_series(ns, psi, gibbs, h: HamiltonianSpec) -> list[dict]:
    """Rows (n, rate estimate, gap bound m*log2(n+1)/n, limiting rate)."""
    pv = as_type_probabilities(psi)
    ref = _pure_reference_rate(pv, gibbs)
    rows = []
    for n in ns:
        rows.append(
            {
                "n": int(n),
                "value": distill_rate_estimate(n, pv, gibbs, h),
                "bound": pv.size * math.log2(n + 1) / n,
                "reference": ref,
            }
        )
    return rows


def cost_series(ns, alpha: float, psi, gibbs, h: HamiltonianSpec) -> list[dict]:
    """Rows (n, cost per copy, Lipschitz gap bound, limiting cost)."""
    pv = as_type_probabilities(psi)
    gv = validate_prob_vector(gibbs)
    ref = _pure_reference_rate(pv, gv)
    with np.errstate(divide="ignore"):
        logg = np.log2(gv[gv > 0])
    lips = float(logg.max() - logg.min())
    rows = []
    for n in ns:
        rows.append(
            {
                "n": int(n),
                "value": pure_cost_per_copy(n, alpha, pv, gv, h),
                "bound": float(n) ** (alpha - 1.0) * lips,
                "reference": ref,
            }
        )
    return rows


def coherence_series(ns, psi, h: HamiltonianSpec) -> list[dict]:
    """Rows (n, coherence of the n-fold product, m*log2(n+1), 0)."""
    rows = []
    for n in ns:
        value, bound = coherence_growth(n, psi, h)
        rows.append({"n": int(n), "value": value, "bound": bound, "reference": 0.0})
    return rows


def budget_series(ns, alpha: float, psi, h: HamiltonianSpec, beta: float) -> list[dict]:
    """Rows (n, per-copy budget, per-copy contract bound, 0)."""
    rows = []
    for n in ns:
        spec = slar_reference(n, alpha, psi, h)
        dmax_bound, limit = slar_budget(spec, beta)
        rows.append(
            {
                "n": int(n),
                "value": dmax_bound / n,
                "bound": limit / n,
                "reference": 0.0,
            }
        )
    return rows


def series_to_csv(rows: list[dict]) -> str:
    buf = io.StringIO()
    buf.write("n,value,bound,reference\n")
    for row in rows:
        buf.write(
            f"{row['n']},{row['value']:.12g},{row['bound']:.12g},{row['reference']:.12g}\n"
        )
    return buf.getvalue()
