"""Slice observables, the regularized bracket, and conservation laws.

The single-mode cases are pinned by hand: at L = 2 pi, m = 1 the rest mode
has weight 1/2, so {a_f, a*_g} with f = g = delta_0 equals i/2 on the nose.
"""

import numpy as np
import pytest

from covkg import (
    AlphaF,
    AlphaK,
    AlphaStarG,
    AlphaStarK,
    FPhi,
    Pmu,
    a_k,
    a_star_k,
    bracket_regularized,
    build_lattice,
    energy_integral,
    momentum_integral,
    noether_divergence,
    pmu_bracket_identity,
    random_solution,
    slice_integral,
)
from covkg.observables import (
    bracket_slice_integral,
    classical_bracket_integral,
    derivative_solution,
    generator_alpha_f,
    generator_alpha_k,
    generator_alpha_star_g,
    generator_alpha_star_k,
    hamiltonian_deformation,
    omega_bracket_integral,
)
from covkg.solution import (
    PolynomialTimeHistory,
    evaluate_fields,
    field_energy,
    from_modes,
    synthesize,
)


@pytest.fixture(scope="module")
def lat():
    return build_lattice(d=1, L=2 * np.pi, N=32, n_max=7, m=1.0)


@pytest.fixture(scope="module")
def sol(lat):
    return random_solution(lat, np.random.default_rng(0))


@pytest.fixture(scope="module")
def rng():
    return np.random.default_rng(42)


def _random_pair(lat, rng):
    f = rng.standard_normal(lat.n_modes) + 1j * rng.standard_normal(lat.n_modes)
    g = rng.standard_normal(lat.n_modes) + 1j * rng.standard_normal(lat.n_modes)
    return f, g


# ---------------------------------------------------------------------------
# Mode readout
# ---------------------------------------------------------------------------

def test_a_k_reads_mode_coefficients(lat, sol):
    for k in (0, 3, 7, 14):
        assert a_k(sol, k) == pytest.approx(sol.u[k], abs=1e-13)
        assert a_star_k(sol, k) == pytest.approx(sol.ustar[k], abs=1e-13)


@pytest.mark.parametrize("t", [0.0, 1.7, 4.2])
def test_alpha_slice_integral_time_independent(lat, sol, t):
    """The slice functional returns u_k at any time, not just t = 0."""
    for k in (2, 9):
        got = slice_integral(AlphaK(k), sol, t)
        assert got == pytest.approx(sol.u[k], abs=1e-12)
        got = slice_integral(AlphaStarK(k), sol, t)
        assert got == pytest.approx(sol.ustar[k], abs=1e-12)


def test_field_rebuilt_from_mode_readout(lat, sol):
    us = np.array([slice_integral(AlphaK(k), sol, 0.6)
                   for k in range(lat.n_modes)])
    rebuilt = from_modes(lat, us)
    np.testing.assert_allclose(synthesize(rebuilt, 0.9), synthesize(sol, 0.9),
                               atol=1e-12)


def test_fphi_slice_integral_closed_form(lat, sol, rng):
    """Quadrature of p^0 Phi - phi d_t Phi matches the weighted mode sum."""
    probe = random_solution(lat, rng, real_flag=False)
    got = slice_integral(FPhi(probe), sol, 0.0)
    want = 1j * np.sum(lat.w * (sol.ustar * probe.u - sol.u * probe.ustar))
    assert got == pytest.approx(want, abs=1e-12)


@pytest.mark.parametrize("t", [0.0, 1.0, 2.5, 7.0])
def test_fphi_slice_integral_time_independent(lat, sol, t):
    probe = random_solution(lat, np.random.default_rng(77))
    base = slice_integral(FPhi(probe), sol, 0.0)
    assert slice_integral(FPhi(probe), sol, t) == pytest.approx(base,
                                                                abs=1e-12)


# ---------------------------------------------------------------------------
# Brackets
# ---------------------------------------------------------------------------

def test_single_mode_bracket_pinned(lat):
    """f = g = delta_0 gives {a_f, a*_g} = i w_0 = i/2 at these parameters."""
    i0 = lat.mode_index((0,))
    f = np.zeros(lat.n_modes)
    f[i0] = 1.0
    assert bracket_regularized(lat, f, f) == 0.5j
    phi = generator_alpha_f(lat, f)
    psi = generator_alpha_star_g(lat, f)
    assert bracket_slice_integral(phi, psi, 0.0) == pytest.approx(0.5j,
                                                                  abs=1e-15)


def test_bracket_regularized_closed_form(lat, rng):
    f, g = _random_pair(lat, rng)
    assert bracket_regularized(lat, f, g) == pytest.approx(
        1j * np.sum(lat.w * f * g), abs=1e-12)


@pytest.mark.parametrize("seed", range(6))
def test_bracket_two_path_agreement(lat, seed):
    """Slice quadrature of the generators equals the weighted mode sum."""
    f, g = _random_pair(lat, np.random.default_rng(seed))
    phi = generator_alpha_f(lat, f)
    psi = generator_alpha_star_g(lat, g)
    got = bracket_slice_integral(phi, psi, 0.0)
    assert abs(got - bracket_regularized(lat, f, g)) < 1e-10


def test_bracket_antisymmetry_exact(lat, rng):
    """B(Phi, Psi) + B(Psi, Phi) is the floating-point zero, not just small."""
    for _ in range(10):
        phi = random_solution(lat, rng, real_flag=False)
        psi = random_solution(lat, rng, real_flag=False)
        fwd = bracket_slice_integral(phi, psi, 0.3)
        rev = bracket_slice_integral(psi, phi, 0.3)
        assert fwd == -rev


@pytest.mark.parametrize("t", [0.0, 1.0, 2.5, 7.0])
def test_bracket_time_independent(lat, t):
    rng = np.random.default_rng(13)
    phi = random_solution(lat, rng, real_flag=False)
    psi = random_solution(lat, rng, real_flag=False)
    base = bracket_slice_integral(phi, psi, 0.0)
    assert bracket_slice_integral(phi, psi, t) == pytest.approx(base,
                                                                abs=1e-12)


@pytest.mark.parametrize("seed", range(5))
def test_annihilator_bracket_vanishes(lat, seed):
    """{a_f, a_f'} = 0: both generators live on the same branch."""
    rng = np.random.default_rng(seed)
    f, fp = _random_pair(lat, rng)
    got = classical_bracket_integral(AlphaF(f), AlphaF(fp),
                                     random_solution(lat, rng), 0.0)
    assert abs(got) < 1e-12
    g, gp = _random_pair(lat, rng)
    got = classical_bracket_integral(AlphaStarG(g), AlphaStarG(gp),
                                     random_solution(lat, rng), 0.0)
    assert abs(got) < 1e-12


# ---------------------------------------------------------------------------
# Translations and the momentum observables
# ---------------------------------------------------------------------------

@pytest.mark.parametrize("mu", [0, 1])
def test_pmu_bracket_identity(lat, sol, mu):
    """Omega route and the direct derivative route give the same number."""
    probe = random_solution(lat, np.random.default_rng(5), real_flag=False)
    via_omega, direct = pmu_bracket_identity(mu, probe, sol)
    assert via_omega == pytest.approx(direct, abs=1e-10)


def test_translation_deformation_shifts_fields(lat, sol):
    """Xi_{P_mu} is minus d_mu of the solution (flow toward -x^mu)."""
    for mu in (0, 1):
        xi = hamiltonian_deformation(Pmu(mu), sol)
        np.testing.assert_allclose(synthesize(xi, 0.8),
                                   -synthesize(sol, 0.8, (mu,)), atol=1e-12)


def test_translations_commute(lat, sol):
    assert classical_bracket_integral(Pmu(0), Pmu(1), sol) == 0.0
    got = omega_bracket_integral(Pmu(0), Pmu(1), sol)
    assert abs(got) < 1e-12


def test_bracket_paths_agree_on_all_pairs(lat, sol, rng):
    """Omega(Xi_F, Xi_G) equals the closed bracket for every observable pair."""
    f, g = _random_pair(lat, rng)
    probe = random_solution(lat, rng, real_flag=False)
    forms = [FPhi(probe), AlphaF(f), AlphaStarG(g), Pmu(0), Pmu(1)]
    for F in forms:
        for G in forms:
            a = omega_bracket_integral(F, G, sol, 0.0)
            b = classical_bracket_integral(F, G, sol, 0.0)
            assert abs(complex(a) - complex(b)) < 1e-10, (F, G)


@pytest.mark.parametrize("mu", [0, 1])
def test_pmu_lambda_independent(lat, sol, mu):
    a = slice_integral(Pmu(mu, lam=0.0), sol, 0.4)
    b = slice_integral(Pmu(mu, lam=1.0), sol, 0.4)
    assert a == pytest.approx(b, abs=1e-11)


# ---------------------------------------------------------------------------
# Energy and momentum
# ---------------------------------------------------------------------------

def test_energy_matches_direct_quadrature(lat, sol):
    """-integral of the pulled-back P_0 density is the canonical energy."""
    sd = evaluate_fields(sol, 0.0)
    want = field_energy(lat, sd.phi, sd.p[0])
    assert energy_integral(sol, 0.0) == pytest.approx(want, abs=1e-12)


def test_rest_mode_energy_pinned(lat):
    """The k = 0 mode with u = 1 carries energy w = 1/2 at m = 1, L = 2 pi."""
    u = np.zeros(lat.n_modes, dtype=complex)
    u[lat.mode_index((0,))] = 1.0
    sol = from_modes(lat, u)
    assert energy_integral(sol, 0.0) == pytest.approx(0.5, abs=1e-13)


@pytest.mark.parametrize("seed", range(5))
def test_energy_nonnegative(lat, seed):
    s = random_solution(lat, np.random.default_rng(seed))
    assert energy_integral(s, 0.0) >= 0.0


@pytest.mark.parametrize("lam", [0.0, 0.3, 1.0])
def test_energy_lambda_independent_and_conserved(lat, sol, lam):
    e0 = energy_integral(sol, 0.0, lam=lam)
    assert e0 == pytest.approx(energy_integral(sol, 0.0, lam=1.0), abs=1e-11)
    assert energy_integral(sol, 2.3, lam=lam) == pytest.approx(e0, abs=1e-10)


def test_momentum_matches_direct_quadrature(lat, sol):
    sd = evaluate_fields(sol, 0.0)
    want = lat.cell_volume * np.sum(sd.p[0] * sd.dphi[1])
    assert momentum_integral(sol, 1, 0.0, lam=1.0) == pytest.approx(
        want, abs=1e-12)


def test_momentum_conserved(lat, sol):
    p0 = momentum_integral(sol, 1, 0.0)
    assert momentum_integral(sol, 1, 3.1) == pytest.approx(p0, abs=1e-10)


def test_standing_mode_has_zero_momentum(lat):
    u = np.zeros(lat.n_modes, dtype=complex)
    u[lat.mode_index((0,))] = 1.0
    sol = from_modes(lat, u)
    assert abs(momentum_integral(sol, 1, 0.0)) < 1e-14


# ---------------------------------------------------------------------------
# Noether currents
# ---------------------------------------------------------------------------

def test_noether_divergence_second_order(lat, sol):
    """div J residual shrinks at second order in the time step."""
    probe = random_solution(lat, np.random.default_rng(3), real_flag=False)
    res = {}
    for dt in (0.1, 0.05, 0.025):
        n = int(round(0.4 / dt))
        res[dt] = noether_divergence(FPhi(probe), sol,
                                     0.5 + dt * np.arange(n + 1))
    p1 = np.log2(res[0.1] / res[0.05])
    p2 = np.log2(res[0.05] / res[0.025])
    assert (p1 + p2) / 2.0 == pytest.approx(2.0, abs=0.15)


def test_noether_divergence_nonsolution_probe(lat, sol):
    """Phi = t solves nothing, so its current has a visible divergence."""
    probe = PolynomialTimeHistory(lat, [0.0, 1.0])
    dt = 0.05
    got = noether_divergence(probe, sol, 0.5 + dt * np.arange(21))
    assert got > 1e-3


def test_noether_divergence_solution_probe_small(lat, sol):
    probe = random_solution(lat, np.random.default_rng(3), real_flag=False)
    dt = 0.01
    got = noether_divergence(FPhi(probe), sol, 0.5 + dt * np.arange(5))
    assert got < 1e-3
