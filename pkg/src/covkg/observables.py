"""Observable (n-1)-forms: slice integrals, brackets, ladder functionals.

A test solution Phi defines the linear observable

    F_Phi = (p^mu Phi - phi eta^{mu nu} d_nu Phi) beta_mu,

whose slice integral on a graph is (L/N)^d sum_j (p^0 Phi - phi d_t Phi).
The ladder forms are special cases with explicit generators:

    alpha_k      <->  Phi =  i exp(+i k.x) / (2 pi)^{d/2}
    alpha*_k     <->  Phi = -i exp(-i k.x) / (2 pi)^{d/2}
    alpha_f      <->  Phi_f  with ustar_k = i f_k   (u = 0)
    alpha*_g     <->  Phi*_g with u_k     = -i g_k  (ustar = 0)

so that a_k = u_k and a*_k = u*_k at every slice time.

Sign table, fixed by requiring Omega(Xi_F, Xi_G) = integral of {F, G}:

    {F_Phi, F_Psi}   -> integral (d_t Phi Psi - Phi d_t Psi)
    {a_f, a*_g}      -> i sum_k w_k f_k g_k
    {a_f, a_f'} = {a*_g, a*_g'} = 0
    {P_mu, F_Phi}    -> F_{d_mu Phi},  with Xi_{P_mu}: delta u_k = i k_mu u_k
                        (k_0 = k^0, k_i = -k^i lowered components)

and the translation invariants are nonnegative with the convention
energy = -integral P_0^{(lambda)}, momentum_i = -integral P_i^{(lambda)}.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .lattice import ModeLattice
from .phase_space import omega_sigma, translation_deformation
from .solution import (
    PolynomialTimeHistory,
    Solution,
    evaluate_fields,
    second_derivatives,
    synthesize,
)


@dataclass(frozen=True)
class FPhi:
    phi: Solution


@dataclass(frozen=True)
class AlphaK:
    k: int


@dataclass(frozen=True)
class AlphaStarK:
    k: int


@dataclass(frozen=True)
class AlphaF:
    f: np.ndarray


@dataclass(frozen=True)
class AlphaStarG:
    g: np.ndarray


@dataclass(frozen=True)
class Pmu:
    mu: int
    lam: float = 1.0


@dataclass(frozen=True)
class BracketForm:
    phi: Solution
    psi: Solution


ObservableForm = (FPhi, AlphaK, AlphaStarK, AlphaF, AlphaStarG, Pmu,
                  BracketForm)


def generator_alpha_k(lat: ModeLattice, k: int) -> Solution:
    """The solution i exp(+i k.x)/(2 pi)^{d/2} generating a_k."""
    us = np.zeros(lat.n_modes, dtype=complex)
    us[k] = 1j / lat.w[k]
    return Solution(lat, np.zeros(lat.n_modes, dtype=complex), us, False)


def generator_alpha_star_k(lat: ModeLattice, k: int) -> Solution:
    """The solution -i exp(-i k.x)/(2 pi)^{d/2} generating a*_k."""
    u = np.zeros(lat.n_modes, dtype=complex)
    u[k] = -1j / lat.w[k]
    return Solution(lat, u, np.zeros(lat.n_modes, dtype=complex), False)


def generator_alpha_f(lat: ModeLattice, f) -> Solution:
    f = np.asarray(f, dtype=complex)
    if f.shape != (lat.n_modes,):
        raise ValueError("f must have one component per mode")
    return Solution(lat, np.zeros_like(f), 1j * f, False)


def generator_alpha_star_g(lat: ModeLattice, g) -> Solution:
    g = np.asarray(g, dtype=complex)
    if g.shape != (lat.n_modes,):
        raise ValueError("g must have one component per mode")
    return Solution(lat, -1j * g, np.zeros_like(g), False)


def derivative_solution(phi: Solution, mu: int) -> Solution:
    """The solution d_mu Phi (mode multipliers -i k_mu on the u branch)."""
    lat = phi.lat
    if mu == 0:
        kz = lat.k0
    elif 1 <= mu <= lat.d:
        kz = -lat.k[:, mu - 1]
    else:
        raise ValueError(f"mu must lie in 0..{lat.d}")
    return Solution(lat, -1j * kz * phi.u, 1j * kz * phi.ustar, phi.real_flag)


def _as_generator(form, lat: ModeLattice):
    """The solution whose F_Phi realizes the form, or None for Pmu."""
    if isinstance(form, FPhi):
        return form.phi
    if isinstance(form, AlphaK):
        return generator_alpha_k(lat, form.k)
    if isinstance(form, AlphaStarK):
        return generator_alpha_star_k(lat, form.k)
    if isinstance(form, AlphaF):
        return generator_alpha_f(lat, form.f)
    if isinstance(form, AlphaStarG):
        return generator_alpha_star_g(lat, form.g)
    return None


def _maybe_real(value, *sols) -> complex:
    if all(s.real_flag for s in sols):
        return float(np.real(value))
    return complex(value)


def slice_integral(form, sol: Solution, t: float = 0.0):
    """Integral of the observable form over the slice t = const of the graph."""
    lat = sol.lat
    if isinstance(form, BracketForm):
        return bracket_slice_integral(form.phi, form.psi, t)
    if isinstance(form, Pmu):
        return _pmu_slice_integral(form, sol, t)
    gen = _as_generator(form, lat)
    if gen is None:
        raise TypeError(f"not an observable form: {form!r}")
    base = evaluate_fields(sol, t)
    val = synthesize(gen, t)
    dval = synthesize(gen, t, (0,))
    total = lat.cell_volume * np.sum(base.p[0] * val - base.phi * dval)
    return _maybe_real(total, sol, gen)


def _pmu_slice_integral(form: Pmu, sol: Solution, t: float):
    lat = sol.lat
    mu, lam = form.mu, form.lam
    if not 0 <= mu <= lat.d:
        raise ValueError(f"mu must lie in 0..{lat.d}")
    sd = evaluate_fields(sol, t)
    dd = second_derivatives(sol, t)
    if mu == 0:
        # e + lam p^a d_a phi - (1 - lam) phi d_a p^a, with p^a = -d_a phi
        lap = sum(dd[a, a] for a in range(1, lat.d + 1))
        dens = (sd.e - lam * np.sum(sd.dphi[1:] ** 2, axis=0)
                + (1.0 - lam) * sd.phi * lap)
    else:
        dens = (-lam * sd.p[0] * sd.dphi[mu]
                + (1.0 - lam) * sd.phi * dd[mu, 0])
    return _maybe_real(lat.cell_volume * np.sum(dens), sol)


def energy_integral(sol: Solution, t: float = 0.0, lam: float = 1.0) -> float:
    """Total energy -integral P_0^{(lambda)}; nonnegative on real solutions."""
    return -np.real(slice_integral(Pmu(0, lam), sol, t))


def momentum_integral(sol: Solution, i: int, t: float = 0.0,
                      lam: float = 1.0) -> float:
    """Spatial momentum -integral P_i^{(lambda)}."""
    if not 1 <= i <= sol.lat.d:
        raise ValueError(f"i must lie in 1..{sol.lat.d}")
    return -np.real(slice_integral(Pmu(i, lam), sol, t))


def a_k(sol: Solution, k: int) -> complex:
    """Annihilation functional a_k = integral alpha_k; equals u_k."""
    return complex(slice_integral(AlphaK(k), sol))


def a_star_k(sol: Solution, k: int) -> complex:
    """Creation functional a*_k = integral alpha*_k; equals u*_k."""
    return complex(slice_integral(AlphaStarK(k), sol))


def bracket_form(phi: Solution, psi: Solution) -> BracketForm:
    """The closed (n-1)-form eta^{mu nu}(d_nu Phi Psi - Phi d_nu Psi) beta_mu."""
    return BracketForm(phi, psi)


def _cmul(x, y):
    """Complex product assembled from plain real products.

    Hardware-fused complex multiplication need not commute in floating
    point (one factor's product is fused, the other rounded); building the
    parts from scalar multiplies keeps x * y == y * x bit for bit, which
    the exact-antisymmetry guarantee of the bracket relies on.
    """
    xr, xi = np.real(x), np.imag(x)
    yr, yi = np.real(y), np.imag(y)
    return (xr * yr - xi * yi) + 1j * (xr * yi + xi * yr)


def bracket_slice_integral(phi: Solution, psi: Solution, t: float = 0.0):
    """Grid quadrature of integral (d_t Phi Psi - Phi d_t Psi) at time t.

    Evaluated termwise with commutative products so that swapping the
    arguments negates every floating-point intermediate: antisymmetry
    holds exactly.
    """
    lat = phi.lat
    a, da = synthesize(phi, t), synthesize(phi, t, (0,))
    b, db = synthesize(psi, t), synthesize(psi, t, (0,))
    total = lat.cell_volume * np.sum(_cmul(da, b) - _cmul(a, db))
    return _maybe_real(total, phi, psi)


def bracket_regularized(lat: ModeLattice, f, g) -> complex:
    """{a_f, a*_g} = i sum_k w_k f_k g_k.

    Also recomputes the number as the slice bracket of the smeared
    generators Phi_f, Phi*_g; disagreement beyond 1e-10 raises.
    """
    f = np.asarray(f, dtype=complex)
    g = np.asarray(g, dtype=complex)
    closed = 1j * np.sum(lat.w * f * g)
    via_form = bracket_slice_integral(generator_alpha_f(lat, f),
                                      generator_alpha_star_g(lat, g))
    if abs(closed - via_form) > 1e-10:
        raise RuntimeError(
            "bracket_regularized internal check failed: "
            f"closed form {closed} vs slice bracket {via_form}")
    return complex(closed)


def _noether_terms(gen, lat: ModeLattice, t: float):
    """(value, d_t value, spatial laplacian) of the current generator at t."""
    if isinstance(gen, Solution):
        lap = sum(synthesize(gen, t, (a, a)) for a in range(1, lat.d + 1))
        return synthesize(gen, t), synthesize(gen, t, (0,)), lap
    if isinstance(gen, PolynomialTimeHistory):
        val, dval, _ = gen.at(t)
        return val, dval, np.zeros(lat.grid_shape)
    raise TypeError(f"unsupported current generator: {gen!r}")


def noether_divergence(gen, sol: Solution, t_grid) -> float:
    """Max |d_mu J^mu| of the current J^mu = p^mu Phi - phi eta^{mu nu} d_nu Phi.

    Spatial part by the product rule with exact mode derivatives; time part
    by centered differences over the uniform t_grid (order Delta t^2).
    """
    lat = sol.lat
    if isinstance(gen, FPhi):
        gen = gen.phi
    t_grid = np.asarray(t_grid, dtype=float)
    if t_grid.size < 3:
        raise ValueError("need at least 3 time points")
    dts = np.diff(t_grid)
    if not np.allclose(dts, dts[0], rtol=0.0, atol=1e-12 * max(1.0, abs(dts[0]))):
        raise ValueError("t_grid must be uniform")
    j0 = []
    div_space = []
    for t in t_grid:
        sd = evaluate_fields(sol, t)
        dd = second_derivatives(sol, t)
        val, dval, lap_gen = _noether_terms(gen, lat, t)
        j0.append(sd.p[0] * val - sd.phi * dval)
        acc = np.zeros(lat.grid_shape, dtype=complex)
        for a in range(1, lat.d + 1):
            # d_a (p^a Phi + phi d_a Phi) expanded termwise
            dgen_a = (synthesize(gen, t, (a,)) if isinstance(gen, Solution)
                      else np.zeros(lat.grid_shape))
            acc += (-dd[a, a] * val + sd.p[a] * dgen_a
                    + sd.dphi[a] * dgen_a)
        acc += sd.phi * lap_gen
        div_space.append(acc)
    dt = dts[0]
    worst = 0.0
    for i in range(1, t_grid.size - 1):
        resid = (j0[i + 1] - j0[i - 1]) / (2.0 * dt) + div_space[i]
        worst = max(worst, float(np.max(np.abs(resid))))
    return worst


def hamiltonian_deformation(form, sol: Solution) -> Solution:
    """The phase-space vector field Xi_F of an observable, as a Solution."""
    if isinstance(form, Pmu):
        return translation_deformation(sol, form.mu)
    gen = _as_generator(form, sol.lat)
    if gen is None:
        raise TypeError(f"no Hamiltonian deformation for {form!r}")
    return gen


def classical_bracket_integral(form1, form2, sol: Solution, t: float = 0.0):
    """Slice integral of {F, G} from the closed bracket calculus.

    Pairs of linear observables use the slice bracket of their generators;
    {P_mu, F_Phi} = F_{d_mu Phi}; translations commute among themselves.
    """
    lat = sol.lat
    g1 = _as_generator(form1, lat)
    g2 = _as_generator(form2, lat)
    if g1 is not None and g2 is not None:
        return bracket_slice_integral(g1, g2, t)
    if isinstance(form1, Pmu) and g2 is not None:
        return slice_integral(FPhi(derivative_solution(g2, form1.mu)), sol, t)
    if g1 is not None and isinstance(form2, Pmu):
        return -slice_integral(FPhi(derivative_solution(g1, form2.mu)), sol, t)
    if isinstance(form1, Pmu) and isinstance(form2, Pmu):
        return 0.0
    raise TypeError(f"no bracket rule for {form1!r}, {form2!r}")


def omega_bracket_integral(form1, form2, sol: Solution, t: float = 0.0):
    """Slice integral of {F, G} via Omega on the Hamiltonian deformations."""
    d1 = hamiltonian_deformation(form1, sol)
    d2 = hamiltonian_deformation(form2, sol)
    return omega_sigma(sol, d1, d2, t)


def pmu_bracket_identity(mu: int, phi: Solution, sol: Solution,
                         t: float = 0.0):
    """({P_mu, F_Phi} via Omega, integral F_{d_mu Phi}); the pair must agree."""
    via_omega = omega_bracket_integral(Pmu(mu), FPhi(phi), sol, t)
    direct = slice_integral(FPhi(derivative_solution(phi, mu)), sol, t)
    return complex(via_omega), complex(direct)
