"""Verification suites: each suite returns a list of check records.

Randomized checks draw from a generator seeded per suite from the config
seed, so reports for a fixed config and seed are reproducible.
"""

from __future__ import annotations

from itertools import combinations

import numpy as np

from . import multisymplectic as ms
from . import observables as obs
from . import phase_space as ps
from . import prequant as pq
from .reporting import CheckRecord, RunConfig, check, lower_bound_check
from .solution import (
    DetunedHistory,
    PolynomialTimeHistory,
    SolutionHistory,
    from_modes,
    kg_residual,
    random_solution,
    synthesize,
)

_SUITE_TAG = {"msymp": 1, "observables": 2, "phase-space": 3, "prequant": 4}


def _rng(cfg: RunConfig, suite: str) -> np.random.Generator:
    return np.random.default_rng([cfg.seed, _SUITE_TAG[suite]])


def _order_of_convergence(residuals) -> float:
    """Mean Richardson order from residuals at dt, dt/2, dt/4."""
    r = np.asarray(residuals, dtype=float)
    rates = np.log2(r[:-1] / r[1:])
    return float(np.mean(rates))


def _grids_for_dts(t_span: float, dts):
    for dt in dts:
        n = int(round(t_span / dt)) + 1
        yield np.linspace(0.0, t_span, n)


def suite_msymp(cfg: RunConfig) -> list:
    lat = cfg.lattice()
    rng = _rng(cfg, "msymp")
    sol = random_solution(lat, rng)
    out = []

    out.append(check("msymp.kg_residual", kg_residual(sol), 0.0,
                     cfg.tolerance("msymp.kg_residual", 1e-12)))

    residuals = [ms.hamilton_residual(sol, grid)
                 for grid in _grids_for_dts(0.4, (0.1, 0.05, 0.025))]
    out.append(check("msymp.hamilton_order",
                     _order_of_convergence(residuals), 2.0,
                     cfg.tolerance("msymp.hamilton_order", 0.1)))

    worst = 0.0
    for lam in (0.0, 0.37, 1.0):
        for _ in range(4):
            point = ms.MPoint(x=np.zeros(lat.d + 1),
                              phi=rng.standard_normal(),
                              e=rng.standard_normal(),
                              p=rng.standard_normal(lat.d + 1))
            basis = ms.basis_tangents(lat.d)
            picks = rng.choice(len(basis), size=lat.d + 2, replace=False)
            vectors = [basis[i] for i in picks]
            diff = abs(ms.dtheta_fd(lam, point, vectors)
                       - ms.omega_eval(vectors))
            worst = max(worst, diff)
    out.append(check("msymp.dtheta_vs_omega", worst, 0.0,
                     cfg.tolerance("msymp.dtheta_vs_omega", 1e-9)))

    out.append(check("msymp.hamilton2_pointwise",
                     ms.hamilton_pointwise_residual(sol, 0.3), 0.0,
                     cfg.tolerance("msymp.hamilton2_pointwise", 1e-9)))

    basis = ms.basis_tangents(lat.d)
    cols = []
    for combo in combinations(range(len(basis)), lat.d + 1):
        cols.append([ms.omega_eval([basis[i] for i in (row,) + combo])
                     if row not in combo else 0.0
                     for row in range(len(basis))])
    q = np.array(cols).T
    sigma_min = float(np.linalg.svd(q, compute_uv=False)[-1])
    out.append(lower_bound_check("msymp.omega_nondegenerate", sigma_min,
                                 cfg.tolerance("msymp.omega_nondegenerate_bound", 0.5)))

    hist = SolutionHistory(sol)
    lag = ms.lagrangian_action(lat, hist, 0.0, 1.0, 257)
    for lam in (0.0, 0.5, 1.0):
        got = ms.action_between_slices(sol, lam, 0.0, 1.0, 257)
        out.append(check(f"msymp.action_lagrangian_lam{lam:g}", got,
                         (2.0 * lam - 1.0) * lag,
                         cfg.tolerance("msymp.action_lagrangian", 1e-8)))

    var = random_solution(lat, rng)
    crit = ms.action_criticality(sol, var, cfg.lam)
    out.append(check("msymp.criticality_onshell", crit, 0.0,
                     cfg.tolerance("msymp.criticality_onshell", 1e-8)))

    detuned = DetunedHistory(sol, 0.5)
    crit_off = ms.action_criticality(sol, var, cfg.lam,
                                     base_history=detuned)
    out.append(lower_bound_check("msymp.criticality_offshell", crit_off,
                                 cfg.tolerance("msymp.criticality_offshell_bound", 1e-3)))
    return out


def suite_observables(cfg: RunConfig) -> list:
    lat = cfg.lattice()
    rng = _rng(cfg, "observables")
    sol = random_solution(lat, rng)
    phi = random_solution(lat, rng, real_flag=False)
    psi = random_solution(lat, rng, real_flag=False)
    out = []

    a_vals = np.array([obs.a_k(sol, k) for k in range(lat.n_modes)])
    astar_vals = np.array([obs.a_star_k(sol, k) for k in range(lat.n_modes)])
    out.append(check("observables.a_k_equals_modes",
                     float(np.max(np.abs(a_vals - sol.u))), 0.0,
                     cfg.tolerance("observables.a_k_equals_modes", 1e-12)))

    shift = max(abs(complex(obs.slice_integral(obs.AlphaK(k), sol, 1.7))
                    - a_vals[k]) for k in range(lat.n_modes))
    out.append(check("observables.a_k_t_independent", shift, 0.0,
                     cfg.tolerance("observables.a_k_t_independent", 1e-12)))

    rebuilt = from_modes(lat, a_vals, astar_vals, real_flag=False)
    recon = float(np.max(np.abs(synthesize(rebuilt, 0.6)
                                - synthesize(sol, 0.6))))
    out.append(check("observables.field_reconstruction", recon, 0.0,
                     cfg.tolerance("observables.field_reconstruction", 1e-12)))

    base_val = obs.slice_integral(obs.FPhi(phi), sol, 0.0)
    drift = max(abs(obs.slice_integral(obs.FPhi(phi), sol, t) - base_val)
                for t in (1.0, 2.5, 7.0))
    out.append(check("observables.fphi_t_independent", drift, 0.0,
                     cfg.tolerance("observables.fphi_t_independent", 1e-12)))

    b0 = obs.bracket_slice_integral(phi, psi, 0.0)
    bdrift = max(abs(obs.bracket_slice_integral(phi, psi, t) - b0)
                 for t in (1.0, 2.5, 7.0))
    out.append(check("observables.bracket_t_independent", bdrift, 0.0,
                     cfg.tolerance("observables.bracket_t_independent", 1e-12)))

    out.append(check("observables.bracket_antisymmetry",
                     abs(b0 + obs.bracket_slice_integral(psi, phi, 0.0)),
                     0.0, cfg.tolerance("observables.bracket_antisymmetry", 0.0)))

    f = rng.standard_normal(lat.n_modes) + 1j * rng.standard_normal(lat.n_modes)
    g = rng.standard_normal(lat.n_modes) + 1j * rng.standard_normal(lat.n_modes)
    closed = 1j * np.sum(lat.w * f * g)
    grid = obs.bracket_slice_integral(obs.generator_alpha_f(lat, f),
                                      obs.generator_alpha_star_g(lat, g))
    out.append(check("observables.bracket_two_path", closed, grid,
                     cfg.tolerance("observables.bracket_two_path", 1e-10)))

    aa = obs.bracket_slice_integral(obs.generator_alpha_f(lat, f),
                                    obs.generator_alpha_f(lat, g))
    out.append(check("observables.bracket_aa_zero", aa, 0.0,
                     cfg.tolerance("observables.bracket_aa_zero", 1e-12)))

    residuals = [obs.noether_divergence(phi, sol, grid)
                 for grid in _grids_for_dts(0.4, (0.1, 0.05, 0.025))]
    out.append(check("observables.noether_order",
                     _order_of_convergence(residuals), 2.0,
                     cfg.tolerance("observables.noether_order", 0.15)))

    probe = PolynomialTimeHistory(lat, [0.0, 1.0])
    bad = obs.noether_divergence(probe, sol, np.linspace(0.5, 1.5, 9))
    out.append(lower_bound_check("observables.noether_counterexample", bad,
                                 cfg.tolerance("observables.noether_counterexample_bound", 1e-3)))

    for mu in range(lat.d + 1):
        via_omega, direct = obs.pmu_bracket_identity(mu, phi, sol)
        out.append(check(f"observables.pmu_identity_mu{mu}", via_omega,
                         direct, cfg.tolerance("observables.pmu_identity", 1e-10)))
        p0 = obs.slice_integral(obs.Pmu(mu, 0.0), sol, 0.4)
        p1 = obs.slice_integral(obs.Pmu(mu, 1.0), sol, 0.4)
        out.append(check(f"observables.pmu_lambda_independent_mu{mu}", p0, p1,
                         cfg.tolerance("observables.pmu_lambda_independent", 1e-11)))

    energy = obs.energy_integral(sol, 0.0, cfg.lam)
    out.append(lower_bound_check("observables.energy_nonnegative", energy,
                                 0.0))
    out.append(check("observables.energy_conserved",
                     obs.energy_integral(sol, 2.3, cfg.lam), energy,
                     cfg.tolerance("observables.energy_conserved", 1e-10)))
    for i in range(1, lat.d + 1):
        out.append(check(f"observables.momentum_conserved_i{i}",
                         obs.momentum_integral(sol, i, 2.3, cfg.lam),
                         obs.momentum_integral(sol, i, 0.0, cfg.lam),
                         cfg.tolerance("observables.momentum_conserved", 1e-10)))
    return out


def suite_phase_space(cfg: RunConfig) -> list:
    lat = cfg.lattice()
    rng = _rng(cfg, "phase-space")
    sol = random_solution(lat, rng)
    d1 = random_solution(lat, rng)
    d2 = random_solution(lat, rng)
    out = []

    path_a = ps.omega_sigma(sol, d1, d2, 0.0, check=False)
    path_b = ps.omega_sigma_pointwise(sol, d1, d2, 0.0)
    out.append(check("phase_space.omega_two_path", path_a, path_b,
                     cfg.tolerance("phase_space.omega_two_path", 1e-10)))

    out.append(check("phase_space.omega_antisymmetry",
                     ps.omega_sigma(sol, d1, d1, 0.0, check=False), 0.0,
                     cfg.tolerance("phase_space.omega_antisymmetry", 0.0)))

    drift = max(abs(ps.omega_sigma(sol, d1, d2, t, check=False) - path_a)
                for t in (1.3, 2.6))
    out.append(check("phase_space.omega_t_independent", drift, 0.0,
                     cfg.tolerance("phase_space.omega_t_independent", 1e-12)))

    out.append(check("phase_space.omega_mode_form", path_a,
                     ps.omega_mode_form(lat, d1, d2),
                     cfg.tolerance("phase_space.omega_mode_form", 1e-12)))

    fd0 = ps.fd_delta_theta(sol, d1, d2, 0.0, 0.0)
    fd1 = ps.fd_delta_theta(sol, d1, d2, 1.0, 0.0)
    out.append(check("phase_space.fd_lambda_independent", fd0, fd1,
                     cfg.tolerance("phase_space.fd_lambda_independent", 1e-12)))
    out.append(check("phase_space.fd_matches_omega", fd1, path_a,
                     cfg.tolerance("phase_space.fd_matches_omega", 1e-10)))
    fd_half = ps.fd_delta_theta(sol, d1, d2, 1.0, 0.0, eps=5e-5)
    out.append(check("phase_space.fd_eps_independent", fd1, fd_half,
                     cfg.tolerance("phase_space.fd_eps_independent", 1e-11)))

    _, ratio = ps.gram_matrix(lat)
    out.append(lower_bound_check("phase_space.gram_min_eig", ratio,
                                 cfg.tolerance("phase_space.gram_min_eig_bound", 1e-8)))

    lhs, rhs = ps.theta_difference_vs_action(sol, d1, cfg.lam, 0.0, 1.0)
    out.append(check("phase_space.theta_vs_action", lhs, rhs,
                     cfg.tolerance("phase_space.theta_vs_action", 1e-8)))

    lin = (ps.theta_sigma(sol, 0.3 * d1 + (-1.2) * d2, cfg.lam, 0.0)
           - 0.3 * ps.theta_sigma(sol, d1, cfg.lam, 0.0)
           + 1.2 * ps.theta_sigma(sol, d2, cfg.lam, 0.0))
    out.append(check("phase_space.theta_linearity", lin, 0.0,
                     cfg.tolerance("phase_space.theta_linearity", 1e-12)))

    closed = ps.theta_sigma(sol, d1, cfg.lam, 0.0)
    pointwise = ps.theta_sigma_pointwise(sol, d1, cfg.lam, 0.0)
    out.append(check("phase_space.theta_pointwise_match", closed, pointwise,
                     cfg.tolerance("phase_space.theta_pointwise_match", 1e-12)))

    worst = 0.0
    for mu in range(1, lat.d + 1):
        shifted = ps.theta_sigma_pointwise(sol, d1, cfg.lam, 0.0,
                                           shift=(0.8, mu))
        worst = max(worst, abs(shifted - pointwise))
    out.append(check("phase_space.theta_rep_independent_spatial", worst, 0.0,
                     cfg.tolerance("phase_space.theta_rep_independent", 1e-10)))

    worst = 0.0
    for mu in range(lat.d + 1):
        shifted = ps.omega_sigma_pointwise(sol, d1, d2, 0.0,
                                           shift1=(0.8, mu), shift2=(-0.6, mu))
        worst = max(worst, abs(shifted - complex(path_a)))
    out.append(check("phase_space.omega_rep_independent", worst, 0.0,
                     cfg.tolerance("phase_space.omega_rep_independent", 1e-10)))

    c = 0.7
    lam = cfg.lam
    shifted = ps.theta_sigma_pointwise(sol, d1, lam, 0.0, shift=(c, 0))
    phi0 = synthesize(sol, 0.0)
    dt0 = synthesize(sol, 0.0, (0,))
    dtt0 = synthesize(sol, 0.0, (0, 0))
    dens = ms.theta_pullback_density(lat, phi0, dt0, dtt0, lam)
    expected = complex(closed) + c * lat.cell_volume * np.sum(dens)
    out.append(check("phase_space.theta_time_shift_identity", shifted,
                     expected,
                     cfg.tolerance("phase_space.theta_time_shift_identity", 1e-10)))
    return out


def _dyadic(rng: np.random.Generator, n: int) -> np.ndarray:
    re = rng.integers(-8, 9, size=n)
    im = rng.integers(-8, 9, size=n)
    return (re + 1j * im) / 16.0


def ccr_residual(lat, f, g, alpha, degree_bound: int = 6) -> float:
    """Max coefficient of ([a_f, a*_g] - hbar sum w f g) on one monomial."""
    state = pq.monomial(lat, dict(alpha), degree_bound)
    comm = pq.commutator(lambda s: pq.op_a(f, s),
                         lambda s: pq.op_a_star(g, s), state)
    scalar = lat.hbar * np.sum(lat.w * np.asarray(f) * np.asarray(g))
    resid = pq.state_sub(comm, pq.state_scale(scalar, state))
    coeffs = pq.prune(resid).coeffs
    return max((abs(c) for c in coeffs.values()), default=0.0)


def _random_state(lat, rng, degree: int, degree_bound: int = 6):
    monos = pq.monomials_up_to_degree(lat, degree)
    picks = rng.choice(len(monos), size=min(6, len(monos)), replace=False)
    state = pq.PolarizedState(lat, {}, degree_bound)
    for i in sorted(picks):
        coeff = complex(rng.standard_normal(), rng.standard_normal())
        state = pq.state_add(state, pq.state_scale(
            coeff, pq.PolarizedState(lat, {monos[i]: 1.0 + 0.0j}, degree_bound)))
    norm = np.sqrt(abs(pq.inner_product(state, state)))
    return pq.state_scale(1.0 / norm, state)


def suite_prequant(cfg: RunConfig) -> list:
    lat = cfg.lattice()
    rng = _rng(cfg, "prequant")
    mm = lat.n_modes
    f = rng.standard_normal(mm) + 1j * rng.standard_normal(mm)
    g = rng.standard_normal(mm) + 1j * rng.standard_normal(mm)
    out = []

    monos = pq.monomials_up_to_degree(lat, 3)
    worst = max(ccr_residual(lat, f, g, m) for m in monos)
    out.append(check("prequant.ccr_monomials", worst, 0.0,
                     cfg.tolerance("prequant.ccr_monomials", 1e-12)))

    fd1, fd2 = _dyadic(rng, mm), _dyadic(rng, mm)
    worst = 0.0
    for mono in monos:
        state = pq.monomial(lat, dict(mono))
        comm = pq.commutator(lambda s: pq.op_a(fd1, s),
                             lambda s: pq.op_a(fd2, s), state)
        worst = max(worst, 0.0 if pq.is_zero_state(comm) else 1.0)
    out.append(check("prequant.aa_exact_zero", worst, 0.0,
                     cfg.tolerance("prequant.aa_exact_zero", 0.0)))

    worst = 0.0
    for mono in pq.monomials_up_to_degree(lat, 2):
        state = pq.monomial(lat, dict(mono))
        comm = pq.commutator(lambda s: pq.op_a_star(f, s),
                             lambda s: pq.op_a_star(g, s), state)
        worst = max(worst, 0.0 if pq.is_zero_state(comm) else 1.0)
    out.append(check("prequant.astar_astar_exact_zero", worst, 0.0,
                     cfg.tolerance("prequant.astar_astar_exact_zero", 0.0)))

    zeta = np.zeros(lat.d + 1)
    zeta[0] = 1.0
    vac = pq.vacuum(lat)
    vac_resid = 0.0 if (pq.is_zero_state(pq.op_p(zeta, vac))
                        and pq.is_zero_state(pq.op_a(f, vac))) else 1.0
    out.append(check("prequant.vacuum_annihilated", vac_resid, 0.0,
                     cfg.tolerance("prequant.vacuum_annihilated", 0.0)))

    zetas = [zeta, np.concatenate(([0.7], rng.standard_normal(lat.d)))]
    worst = 0.0
    emin = np.inf
    for z in zetas:
        for mono in monos:
            state = pq.monomial(lat, dict(mono))
            eig = pq.p_eigenvalue(lat, mono, z)
            resid = pq.state_sub(pq.op_p(z, state),
                                 pq.state_scale(eig, state))
            coeffs = pq.prune(resid).coeffs
            worst = max(worst,
                        max((abs(c) for c in coeffs.values()), default=0.0))
    for mono in monos:
        emin = min(emin, -pq.p_eigenvalue(lat, mono, zeta))
    out.append(check("prequant.p_eigenvalues", worst, 0.0,
                     cfg.tolerance("prequant.p_eigenvalues", 1e-12)))
    out.append(lower_bound_check("prequant.energy_nonnegative", emin, 0.0))

    state = _random_state(lat, rng, 3)
    lhs = pq.commutator(lambda s: pq.op_p(zeta, s),
                        lambda s: pq.op_a_star(g, s), state)
    gprime = pq.minkowski_kz(lat, zeta) * g
    rhs = pq.state_scale(-lat.hbar, pq.op_a_star(gprime, state))
    resid = pq.prune(pq.state_sub(lhs, rhs)).coeffs
    out.append(check("prequant.p_astar_commutator",
                     max((abs(c) for c in resid.values()), default=0.0), 0.0,
                     cfg.tolerance("prequant.p_astar_commutator", 1e-12)))

    s1 = _random_state(lat, rng, 4)
    s2 = _random_state(lat, rng, 4)
    adj = abs(pq.inner_product(pq.op_a(f, s1), s2)
              - pq.inner_product(s1, pq.op_a_star(np.conj(f), s2)))
    out.append(check("prequant.adjointness", adj, 0.0,
                     cfg.tolerance("prequant.adjointness", 1e-12)))

    comm_vac = pq.commutator(lambda s: pq.op_a(f, s),
                             lambda s: pq.op_a_star(g, s), vac)
    scalar = comm_vac.coeffs.get((), 0.0 + 0.0j)
    classical = obs.bracket_regularized(lat, f, g)
    out.append(check("prequant.cross_module_ccr", scalar,
                     (lat.hbar / 1j) * classical,
                     cfg.tolerance("prequant.cross_module_ccr", 1e-12)))
    return out


SUITES = {
    "msymp": suite_msymp,
    "observables": suite_observables,
    "phase-space": suite_phase_space,
    "prequant": suite_prequant,
}


def run_suite(cfg: RunConfig, name: str) -> list:
    if name == "all":
        records = []
        for key in ("msymp", "observables", "phase-space", "prequant"):
            records.extend(SUITES[key](cfg))
        return records
    if name not in SUITES:
        raise KeyError(name)
    return SUITES[name](cfg)
