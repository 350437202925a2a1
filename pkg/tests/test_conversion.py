import numpy as np
import pytest

from athermality.conversion import (
    Decision,
    QBuild,
    StructuralInfeasibility,
    build_Q,
    choi_from_witness,
    conversion_distance_to_quasiclassical,
    conversion_stochastic,
    covariant_convertible,
    gpc_convertible_qubit,
    gpc_feasible,
    lorenz_margin,
    pure_parent,
    qubit_sweep_threshold,
    relative_majorization,
    same_diagonal_gpc,
    stochastic_map_exists,
)
from athermality.divergences import coherence
from athermality.errors import (
    DiagonalMismatch,
    PreconditionViolated,
    ZeroDiagonal,
    ZeroGibbsComponent,
)
from athermality.linalg import is_psd
from athermality.states import HamiltonianSpec, gibbs_state, pure_state
from athermality.symmetry import apply_choi, is_covariant, pinch, validate_choi

from conftest import generic_levels, random_density, random_prob, random_qubit

H2 = HamiltonianSpec([0.0, 1.0])
PAPER_SIGMA = np.array([[2.0, np.sqrt(2.0)], [np.sqrt(2.0), 4.0]]) / 6.0
PAPER_GAMMA = np.array([1.0 / 3.0, 2.0 / 3.0])


def gibbs_hamiltonian(g):
    """Qubit Hamiltonian whose Gibbs state at beta=1 is (g, 1-g)."""
    return HamiltonianSpec([0.0, np.log(g / (1.0 - g))])


# --- build_Q -------------------------------------------------------------------


def test_build_q_identity_conversion(rng):
    rho = random_density(rng, 3)
    built = build_Q(rho, rho)
    assert isinstance(built, QBuild)
    assert not built.has_free
    assert np.allclose(built.matrix, np.ones((3, 3)))


def test_build_q_qubit_paper_form():
    a, b = 0.6, 0.4
    z, w = 0.3 + 0.1j, 0.05 - 0.2j
    rho = np.array([[a, z], [np.conj(z), 1 - a]])
    sigma = np.array([[b, w], [np.conj(w), 1 - b]])
    built = build_Q(rho, sigma)
    assert built.matrix[0, 0] == pytest.approx(b / a)
    assert built.matrix[1, 1] == pytest.approx(1.0)
    assert built.matrix[0, 1] == pytest.approx(w / z)


def test_build_q_structural_infeasibility():
    rho = np.diag([0.5, 0.5]).astype(complex)
    sigma = np.array([[0.5, 0.2], [0.2, 0.5]])
    built = build_Q(rho, sigma)
    assert isinstance(built, StructuralInfeasibility)
    assert (0, 1) in built.entries


def test_build_q_zero_diagonal():
    rho = np.diag([1.0, 0.0]).astype(complex)
    sigma = np.diag([0.5, 0.5]).astype(complex)
    with pytest.raises(ZeroDiagonal):
        build_Q(rho, sigma)


# --- covariant conversion ------------------------------------------------------


def test_covariant_identity_gives_identity_witness(rng):
    rho = random_density(rng, 2)
    v = covariant_convertible(rho, rho, H2)
    assert v.decision is Decision.FEASIBLE
    assert np.allclose(v.witness_p, np.eye(2))
    assert np.allclose(v.witness_q, np.ones((2, 2)))


def test_covariant_pure_to_mixed_qubit():
    a, b = 0.6, 0.4
    rho = np.array([[a, np.sqrt(a * (1 - a))], [np.sqrt(a * (1 - a)), 1 - a]])
    w_ok = np.sqrt(0.9 * b * (1 - a))
    w_bad = np.sqrt(1.1 * b * (1 - a))
    ok = np.array([[b, w_ok], [w_ok, 1 - b]])
    bad = np.array([[b, w_bad], [w_bad, 1 - b]])
    assert covariant_convertible(rho, ok, H2).decision is Decision.FEASIBLE
    assert covariant_convertible(rho, bad, H2).decision is Decision.INFEASIBLE


def test_covariant_mixed_cannot_reach_pure(rng):
    rho = random_qubit(rng)
    while min(np.linalg.eigvalsh(rho)) < 0.05:
        rho = random_qubit(rng)
    b = 0.45
    sigma = np.array([[b, np.sqrt(b * (1 - b))], [np.sqrt(b * (1 - b)), 1 - b]])
    assert covariant_convertible(rho, sigma, H2).decision is Decision.INFEASIBLE


def test_covariant_needs_bohr_spectrum(rng):
    rho = random_density(rng, 3)
    with pytest.raises(PreconditionViolated):
        covariant_convertible(rho, rho, HamiltonianSpec([0.0, 1.0, 2.0]))


def test_covariant_structural_verdict():
    rho = np.diag([0.5, 0.5]).astype(complex)
    sigma = np.array([[0.5, 0.2], [0.2, 0.5]])
    v = covariant_convertible(rho, sigma, H2)
    assert v.decision is Decision.INFEASIBLE
    assert "coherence" in v.diagnostics


def test_covariant_completion_feasible_block_case():
    h = HamiltonianSpec([0.0, 1.0, np.pi])
    z = 0.2 + 0.05j
    rho = np.array([[0.4, z, 0.0], [np.conj(z), 0.4, 0.0], [0.0, 0.0, 0.2]])
    sigma = rho.copy()
    sigma[0, 1] = 0.5 * z
    sigma[1, 0] = np.conj(0.5 * z)
    v = covariant_convertible(rho, sigma, h)
    assert v.decision is Decision.FEASIBLE
    assert "completion" in v.diagnostics
    assert is_psd(v.witness_q, 1e-8)


def test_covariant_completion_budget_exhaustion():
    h = HamiltonianSpec([0.0, 1.0, np.pi])
    z = 0.1
    rho = np.array([[0.4, z, 0.0], [z, 0.4, 0.0], [0.0, 0.0, 0.2]])
    sigma = rho.copy()
    sigma[0, 1] = sigma[1, 0] = 3.0 * z  # fixed 2x2 minor of Q becomes indefinite
    v = covariant_convertible(rho, sigma, h, budget=300)
    assert v.decision is Decision.NOT_FOUND_WITHIN_BUDGET


def test_conversion_stochastic_properties(rng):
    for _ in range(20):
        m = int(rng.integers(2, 6))
        r = random_prob(rng, m)
        s = random_prob(rng, m)
        p = conversion_stochastic(r, s)
        assert np.all(p >= -1e-12)
        assert np.allclose(p.sum(axis=0), 1.0, atol=1e-12)
        assert np.allclose(p @ r, s, atol=1e-12)


def test_witness_choi_passes_checks(rng):
    for _ in range(10):
        rho = random_qubit(rng)
        sigma = random_qubit(rng)
        v = covariant_convertible(rho, sigma, H2)
        if v.decision is not Decision.FEASIBLE:
            continue
        j = choi_from_witness(v.witness_p, v.witness_q)
        validate_choi(j, (2, 2), tol=1e-8)
        assert is_covariant(j, H2, H2)
        out = apply_choi(j, rho, (2, 2))
        assert np.abs(out - sigma).max() <= 1e-8


def test_covariant_transitivity(rng):
    h = generic_levels(rng, 3)
    m = 3
    for _ in range(10):
        rho = random_density(rng, m)
        chains = []
        state = rho
        for _step in range(2):
            p = rng.uniform(0.1, 1.0, size=(m, m))
            p /= p.sum(axis=0, keepdims=True)
            c = rng.normal(size=(m, m)) + 1j * rng.normal(size=(m, m))
            q = c @ c.conj().T + 0.2 * np.eye(m)
            d = np.sqrt(np.diag(q).real)
            q = q / np.outer(d, d) * np.sqrt(np.outer(np.diag(p), np.diag(p)))
            j = choi_from_witness(p, q)
            state = apply_choi(j, state, (m, m))
            state = 0.5 * (state + state.conj().T)
            chains.append(state)
        sigma, tau = chains
        if min(abs(sigma[x, y]) for x in range(m) for y in range(m)) < 1e-6:
            continue
        v1 = covariant_convertible(rho, sigma, h)
        v2 = covariant_convertible(sigma, tau, h)
        v3 = covariant_convertible(rho, tau, h)
        assert v1.decision is Decision.FEASIBLE
        assert v2.decision is Decision.FEASIBLE
        assert v3.decision is Decision.FEASIBLE


def test_covariant_feasible_implies_coherence_monotone(rng):
    for _ in range(20):
        rho = random_qubit(rng)
        sigma = random_qubit(rng)
        v = covariant_convertible(rho, sigma, H2)
        if v.decision is Decision.FEASIBLE and v.margin > 1e-8:
            assert coherence(sigma, H2) <= coherence(rho, H2) + 1e-9


# --- pure parent ----------------------------------------------------------------


def test_pure_parent_examples():
    p = np.array([0.2, 0.3, 0.5])
    assert np.allclose(pure_parent(np.diag(p).astype(complex)), np.sqrt(p))
    amps = pure_parent(PAPER_SIGMA)
    assert np.allclose(amps, np.sqrt([1.0 / 3.0, 2.0 / 3.0]))


def test_pure_parent_of_pure_state_matches_moduli(rng):
    v = rng.normal(size=3) + 1j * rng.normal(size=3)
    v /= np.linalg.norm(v)
    amps = pure_parent(np.outer(v, v.conj()))
    assert np.allclose(amps, np.abs(v), atol=1e-12)


def test_pure_parent_converts_covariantly(rng):
    for _ in range(10):
        m = int(rng.integers(2, 5))
        sigma = random_density(rng, m)
        h = generic_levels(rng, m)
        psi = pure_state(pure_parent(sigma))
        v = covariant_convertible(psi, sigma, h)
        assert v.decision is Decision.FEASIBLE
        assert v.margin >= -1e-8


# --- relative majorization -------------------------------------------------------


def test_relative_majorization_examples():
    u2 = [0.5, 0.5]
    assert relative_majorization([0.3, 0.7], [0.6, 0.4], [0.3, 0.7], [0.6, 0.4])
    assert relative_majorization([1.0, 0.0], u2, [0.5, 0.5], u2)
    assert not relative_majorization([0.5, 0.5], u2, [1.0, 0.0], u2)


def test_lorenz_margin_sign():
    u2 = [0.5, 0.5]
    assert lorenz_margin([0.5, 0.5], u2, [1.0, 0.0], u2) < 0
    assert lorenz_margin([1.0, 0.0], u2, [0.5, 0.5], u2) >= 0


def test_relative_majorization_zero_gibbs():
    with pytest.raises(ZeroGibbsComponent):
        relative_majorization([0.5, 0.5], [1.0, 0.0], [1.0, 0.0], [0.5, 0.5])


def test_relative_majorization_vs_lp(rng):
    for k in range(60):
        m = int(rng.integers(2, 5))
        n = int(rng.integers(2, 5))
        p, g = random_prob(rng, m), random_prob(rng, m)
        if k % 2 == 0:
            q, hh = random_prob(rng, n), random_prob(rng, n)
        else:
            e = rng.uniform(0.0, 1.0, size=(n, m))
            e /= e.sum(axis=0, keepdims=True)
            q, hh = e @ p, e @ g
        assert relative_majorization(p, g, q, hh, tol=1e-8) == stochastic_map_exists(
            p, g, q, hh
        )


# --- qubit closed form -----------------------------------------------------------


def test_qubit_paper_threshold():
    res = qubit_sweep_threshold(PAPER_SIGMA, PAPER_GAMMA)
    assert res["threshold"] == pytest.approx(0.5, abs=1e-9)


def test_qubit_sigma_to_itself():
    v = gpc_convertible_qubit(PAPER_SIGMA, PAPER_SIGMA, PAPER_GAMMA)
    assert v.decision is Decision.FEASIBLE


def test_qubit_paper_pure_family():
    # diagonal (1/2, 1/2), coherence a: feasible iff a >= 1/2 = b / sqrt(det gamma)
    for a, feasible in ((0.5, True), (0.49, False), (0.3, False)):
        rho = np.array([[0.5, a], [a, 0.5]])
        v = gpc_convertible_qubit(rho, PAPER_SIGMA, PAPER_GAMMA)
        assert (v.decision is Decision.FEASIBLE) == feasible


def test_qubit_s_equals_g_remark(rng):
    # target diagonal equal to gibbs: feasible iff |b|^2/|a|^2 <= det gamma
    g = 0.3
    gamma = np.array([g, 1 - g])
    det = g * (1 - g)
    r = 0.55
    a = 0.4
    for scale, feasible in ((0.9, True), (1.1, False)):
        b = a * np.sqrt(det) * scale
        if b > np.sqrt(g * (1 - g)):
            continue
        rho = np.array([[r, a], [a, 1 - r]])
        sigma = np.array([[g, b], [b, 1 - g]])
        v = gpc_convertible_qubit(rho, sigma, gamma)
        assert (v.decision is Decision.FEASIBLE) == feasible


def test_qubit_gibbs_diagonal_branch():
    g = 0.4
    gamma = np.array([g, 1 - g])
    a = 0.3
    rho = np.array([[g, a], [a, 1 - g]])
    smaller = np.array([[g, 0.2], [0.2, 1 - g]])
    larger = np.array([[g, 0.4], [0.4, 1 - g]])
    other_diag = np.array([[0.5, 0.2], [0.2, 0.5]])
    assert gpc_convertible_qubit(rho, smaller, gamma).decision is Decision.FEASIBLE
    assert gpc_convertible_qubit(rho, larger, gamma).decision is Decision.INFEASIBLE
    assert gpc_convertible_qubit(rho, other_diag, gamma).decision is Decision.INFEASIBLE


def test_qubit_classical_branch():
    gamma = np.array([0.25, 0.75])
    rho = np.diag([0.9, 0.1]).astype(complex)
    sigma = np.diag([0.5, 0.5]).astype(complex)
    v = gpc_convertible_qubit(rho, sigma, gamma)
    assert v.decision is Decision.FEASIBLE
    assert np.allclose(v.witness_p @ np.array([0.9, 0.1]), [0.5, 0.5], atol=1e-9)
    assert np.allclose(v.witness_p @ gamma, gamma, atol=1e-9)
    coherent = np.array([[0.5, 0.1], [0.1, 0.5]])
    assert gpc_convertible_qubit(rho, coherent, gamma).decision is Decision.INFEASIBLE


def test_qubit_trivial_hamiltonian_branch(rng):
    gamma = np.array([0.5, 0.5])
    rho = pure_state([np.sqrt(0.2), np.sqrt(0.8)])
    sigma = random_qubit(rng)
    v = gpc_convertible_qubit(rho, sigma, gamma)
    assert v.decision is Decision.FEASIBLE  # pure majorizes everything
    hot = np.eye(2, dtype=complex) / 2
    v2 = gpc_convertible_qubit(hot, rho, gamma)
    assert v2.decision is Decision.INFEASIBLE


# --- the Dykstra program ----------------------------------------------------------


def test_gpc_feasible_matches_closed_form(rng):
    checked = 0
    for _ in range(120):
        rho = random_qubit(rng)
        sigma = random_qubit(rng)
        g = float(rng.uniform(0.05, 0.95))
        if abs(g - 0.5) < 0.02:
            continue
        gamma = np.array([g, 1 - g])
        h = gibbs_hamiltonian(g)
        oracle = gpc_convertible_qubit(rho, sigma, gamma)
        solver = gpc_feasible(rho, sigma, gamma, h)
        if abs(oracle.margin) <= 1e-6:
            continue
        assert (solver.decision is Decision.FEASIBLE) == (
            oracle.decision is Decision.FEASIBLE
        )
        checked += 1
    assert checked >= 80


def test_gpc_feasible_witness_equations(rng):
    found = 0
    for _ in range(60):
        rho = random_qubit(rng)
        sigma = random_qubit(rng)
        g = float(rng.uniform(0.1, 0.9))
        if abs(g - 0.5) < 0.02:
            continue
        gamma = np.array([g, 1 - g])
        solver = gpc_feasible(rho, sigma, gamma, gibbs_hamiltonian(g))
        if solver.decision is not Decision.FEASIBLE:
            continue
        p = solver.witness_p
        r = np.real(np.diag(rho))
        s = np.real(np.diag(sigma))
        assert np.abs(p @ r - s).max() <= 1e-6
        assert np.abs(p @ gamma - gamma).max() <= 1e-6
        assert np.all(p >= -1e-10)
        assert is_psd(solver.witness_q, 1e-7)
        found += 1
    assert found >= 3


def test_gpc_feasible_implies_diagonal_majorization(rng):
    for _ in range(40):
        rho = random_qubit(rng)
        sigma = random_qubit(rng)
        g = float(rng.uniform(0.1, 0.9))
        if abs(g - 0.5) < 0.02:
            continue
        gamma = np.array([g, 1 - g])
        solver = gpc_feasible(rho, sigma, gamma, gibbs_hamiltonian(g))
        if solver.decision is Decision.FEASIBLE:
            assert lorenz_margin(
                np.real(np.diag(rho)), gamma, np.real(np.diag(sigma)), gamma
            ) >= -1e-7


def test_gpc_feasible_pinched_target(rng):
    rho = random_qubit(rng)
    g = 0.3
    gamma = np.array([g, 1 - g])
    h = gibbs_hamiltonian(g)
    sigma = pinch(rho, h)
    v = gpc_feasible(rho, sigma, gamma, h)
    assert v.decision is Decision.FEASIBLE


def test_gpc_feasible_structural(rng):
    g = 0.3
    gamma = np.array([g, 1 - g])
    rho = np.diag([0.6, 0.4]).astype(complex)
    sigma = np.array([[0.6, 0.1], [0.1, 0.4]])
    v = gpc_feasible(rho, sigma, gamma, gibbs_hamiltonian(g))
    assert v.decision is Decision.INFEASIBLE


def test_gpc_feasible_agrees_with_same_diagonal(rng):
    for _ in range(20):
        rho = random_qubit(rng)
        g = float(rng.uniform(0.1, 0.9))
        if abs(g - 0.5) < 0.02:
            continue
        gamma = np.array([g, 1 - g])
        h = gibbs_hamiltonian(g)
        scale = float(rng.uniform(0.2, 1.4))
        sigma = rho.copy()
        sigma[0, 1] *= scale
        sigma[1, 0] = np.conj(sigma[0, 1])
        if np.linalg.eigvalsh(sigma).min() < 1e-10:
            continue
        ref = same_diagonal_gpc(rho, sigma, h)
        sol = gpc_feasible(rho, sigma, gamma, h)
        if abs(ref.margin) <= 1e-6:
            continue
        assert (sol.decision is Decision.FEASIBLE) == (ref.decision is Decision.FEASIBLE)


# --- same diagonal ----------------------------------------------------------------


def test_same_diagonal_identity(rng):
    rho = random_qubit(rng)
    v = same_diagonal_gpc(rho, rho, H2)
    assert v.decision is Decision.FEASIBLE


def test_same_diagonal_pure_parent(rng):
    sigma = random_density(rng, 3)
    h = generic_levels(rng, 3)
    psi = pure_state(pure_parent(sigma))
    v = same_diagonal_gpc(psi, sigma, h)
    assert v.decision is Decision.FEASIBLE


def test_same_diagonal_growing_coherence_infeasible():
    z = 0.2
    rho = np.array([[0.5, z], [z, 0.5]])
    sigma = np.array([[0.5, 2 * z], [2 * z, 0.5]])
    v = same_diagonal_gpc(rho, sigma, H2)
    assert v.decision is Decision.INFEASIBLE


def test_same_diagonal_mismatch_raises(rng):
    rho = random_qubit(rng)
    sigma = rho.copy()
    sigma[0, 0] += 0.05
    sigma[1, 1] -= 0.05
    with pytest.raises(DiagonalMismatch):
        same_diagonal_gpc(rho, sigma, H2)


def test_same_diagonal_agrees_with_covariant(rng):
    for _ in range(20):
        rho = random_qubit(rng)
        sigma = rho.copy()
        scale = float(rng.uniform(0.2, 1.6))
        sigma[0, 1] *= scale
        sigma[1, 0] = np.conj(sigma[0, 1])
        if np.linalg.eigvalsh(sigma).min() < 1e-10:
            continue
        a = same_diagonal_gpc(rho, sigma, H2)
        b = covariant_convertible(rho, sigma, H2)
        assert a.decision == b.decision


# --- conversion distance -----------------------------------------------------------


def grid_distance_qubit(p, g_in, q, g_out, steps=4001):
    best = np.inf
    for t00 in np.linspace(0.0, 1.0, steps):
        t01 = (g_out[0] - t00 * g_in[0]) / g_in[1]
        if not -1e-12 <= t01 <= 1 + 1e-12:
            continue
        t = np.array([[t00, t01], [1 - t00, 1 - t01]])
        best = min(best, 0.5 * np.abs(q - t @ p).sum())
    return best


def test_conversion_distance_to_own_pinch(rng):
    rho = random_qubit(rng)
    g = 0.3
    gamma = np.array([g, 1 - g])
    h = gibbs_hamiltonian(g)
    p = np.real(np.diag(pinch(rho, h)))
    d = conversion_distance_to_quasiclassical(rho, gamma, p, gamma, h)
    assert d == pytest.approx(0.0, abs=1e-9)


def test_conversion_distance_gibbs_to_golden():
    g = 0.35
    gamma = np.array([g, 1 - g])
    h = gibbs_hamiltonian(g)
    state, unit_gibbs = __import__("athermality").golden_unit(3.0)
    d = conversion_distance_to_quasiclassical(
        np.diag(gamma).astype(complex), gamma, state, unit_gibbs, h
    )
    assert d == pytest.approx(1.0 - 1.0 / 3.0, abs=1e-9)


def test_conversion_distance_matches_grid(rng):
    for _ in range(10):
        rho = random_qubit(rng)
        g = float(rng.uniform(0.15, 0.85))
        gamma = np.array([g, 1 - g])
        h = gibbs_hamiltonian(g)
        q = random_prob(rng, 2)
        gout = random_prob(rng, 2)
        d = conversion_distance_to_quasiclassical(rho, gamma, q, gout, h)
        p = np.real(np.diag(pinch(rho, h)))
        grid = grid_distance_qubit(p, gamma, q, gout)
        assert d <= grid + 1e-9
        assert abs(d - grid) <= 1e-3


def test_conversion_distance_matches_cvxpy(rng):
    cvxpy = pytest.importorskip("cvxpy")
    for _ in range(5):
        m = 3
        rho = random_density(rng, m)
        h = generic_levels(rng, m)
        gamma = gibbs_state(h, 1.0)
        q = random_prob(rng, m)
        gout = random_prob(rng, m)
        d = conversion_distance_to_quasiclassical(rho, gamma, q, gout, h)
        p = np.real(np.diag(pinch(rho, h)))
        t = cvxpy.Variable((m, m), nonneg=True)
        cons = [cvxpy.sum(t, axis=0) == 1, t @ gamma == gout]
        prob = cvxpy.Problem(cvxpy.Minimize(0.5 * cvxpy.norm1(q - t @ p)), cons)
        prob.solve()
        assert d == pytest.approx(prob.value, abs=1e-6)
