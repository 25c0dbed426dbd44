"""Klein-Gordon solutions as mass-shell mode data.

A solution of box phi + m^2 phi = 0 on the periodic box is stored through its
mode coefficients (u_k, u*_k):

    phi(t, x) = (2pi)^(-d/2) sum_k w_k (u_k e^{-i k.x} + u*_k e^{+i k.x}),

with k.x = k0 t - kvec.xvec, so the u branch carries e^{-i k0 t} e^{+i kvec.x}
and the u* branch its reflection.  Real fields satisfy u*_k = conj(u_k).
Time never enters the state: evaluation is exact mode arithmetic, and
``evolve_exact`` merely re-bases the phases.  A leapfrog integrator is kept
alongside as an independent finite-difference oracle for the same equation.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field

import numpy as np

from .lattice import (
    ModeLattice,
    build_lattice,
    dft_forward,
    mode_sum_grid,
    out_of_band_fraction,
    spectral_gradient,
    spectral_laplacian,
)

_CONJ_TOL = 1e-12


@dataclass(frozen=True)
class Solution:
    """A Hamiltonian n-curve: per-mode coefficients (u_k, u*_k)."""

    lat: ModeLattice
    u: np.ndarray
    ustar: np.ndarray
    real_flag: bool

    def __add__(self, other: "Solution") -> "Solution":
        if other.lat is not self.lat and other.lat != self.lat:
            raise ValueError("solutions live on different lattices")
        return Solution(self.lat, self.u + other.u, self.ustar + other.ustar,
                        self.real_flag and other.real_flag)

    def __sub__(self, other: "Solution") -> "Solution":
        return self + (-1.0) * other

    def __rmul__(self, c) -> "Solution":
        stays_real = self.real_flag and np.imag(c) == 0
        return Solution(self.lat, c * self.u, c * self.ustar, stays_real)


@dataclass(frozen=True)
class SliceData:
    """Fields of a solution on one constant-time slice.

    ``dphi`` stacks the spacetime derivatives (index 0 is time), ``p`` the
    momenta p^mu = eta^{mu nu} d_nu phi, and ``e`` the energy coordinate
    fixed by the on-shell constraint H = 0.
    """

    t: float
    phi: np.ndarray
    dphi: np.ndarray
    p: np.ndarray
    e: np.ndarray


def from_modes(lat: ModeLattice, u, ustar=None, real_flag: bool = True) -> Solution:
    """Build a solution from mode coefficients.

    With ``real_flag`` the conjugacy u*_k = conj(u_k) is enforced: it is
    filled in when ``ustar`` is omitted and validated (within 1e-12) when
    both arrays are supplied.
    """
    u = np.array(u, dtype=complex)
    if u.shape != (lat.n_modes,):
        raise ValueError(f"expected {lat.n_modes} coefficients, got {u.shape}")
    if ustar is None:
        if not real_flag:
            raise ValueError("complex solutions need explicit ustar")
        ustar = np.conj(u)
    else:
        ustar = np.array(ustar, dtype=complex)
        if ustar.shape != u.shape:
            raise ValueError("u and ustar shapes differ")
        if real_flag:
            err = np.max(np.abs(ustar - np.conj(u))) if u.size else 0.0
            if err > _CONJ_TOL:
                raise ValueError(
                    f"reality violated: max |ustar - conj(u)| = {err:.3e}")
    u.setflags(write=False)
    ustar.setflags(write=False)
    return Solution(lat, u, ustar, bool(real_flag))


def zero_solution(lat: ModeLattice, real_flag: bool = True) -> Solution:
    z = np.zeros(lat.n_modes, dtype=complex)
    return from_modes(lat, z, z.copy(), real_flag)


def random_solution(lat: ModeLattice, rng: np.random.Generator,
                    real_flag: bool = True, scale: float = 1.0) -> Solution:
    """Seeded random solution with mildly decaying mode amplitudes."""
    amp = scale / (1.0 + np.sum(lat.k ** 2, axis=1))
    def draw():
        z = rng.standard_normal(lat.n_modes) + 1j * rng.standard_normal(lat.n_modes)
        return amp * z / np.sqrt(2.0)
    u = draw()
    ustar = np.conj(u) if real_flag else draw()
    return from_modes(lat, u, ustar, real_flag)


def derivative_factors(lat: ModeLattice, mu: int):
    """Per-branch mode multipliers implementing d/dx^mu (0 = time)."""
    if mu == 0:
        f = -1j * lat.k0
    elif 1 <= mu <= lat.d:
        f = 1j * lat.k[:, mu - 1]
    else:
        raise ValueError(f"mu must lie in 0..{lat.d}")
    return f, -f


def synthesize(sol: Solution, t: float, mus=(), extra_u=None, extra_us=None):
    """Evaluate (prod_mu d_mu) phi on the grid at time t.

    ``extra_u``/``extra_us`` multiply the two branches with arbitrary
    per-mode factors (used for operator polynomials such as the
    Klein-Gordon symbol).  Real solutions yield real grids whenever the
    branch factors are conjugate.
    """
    lat = sol.lat
    fu = np.ones(lat.n_modes, dtype=complex)
    fus = np.ones(lat.n_modes, dtype=complex)
    for mu in mus:
        a, b = derivative_factors(lat, mu)
        fu, fus = fu * a, fus * b
    if extra_u is not None:
        fu = fu * extra_u
    if extra_us is not None:
        fus = fus * extra_us
    pref = (2.0 * np.pi) ** (-lat.d / 2.0)
    plus = pref * lat.w * sol.u * np.exp(-1j * lat.k0 * t) * fu
    minus = pref * lat.w * sol.ustar * np.exp(1j * lat.k0 * t) * fus
    grid = mode_sum_grid(lat, plus, minus)
    if sol.real_flag and extra_u is None and extra_us is None:
        return grid.real
    return grid


def evaluate_fields(sol: Solution, t: float) -> SliceData:
    """All slice fields (phi, d_mu phi, p^mu, e) at time t."""
    lat = sol.lat
    phi = synthesize(sol, t)
    dphi = np.stack([synthesize(sol, t, (mu,)) for mu in range(lat.d + 1)])
    p = dphi.copy()
    p[1:] = -p[1:]
    quad = dphi[0] ** 2 - np.sum(dphi[1:] ** 2, axis=0)
    e = -0.5 * quad - 0.5 * lat.m ** 2 * phi ** 2
    return SliceData(t=float(t), phi=phi, dphi=dphi, p=p, e=e)


def second_derivatives(sol: Solution, t: float) -> np.ndarray:
    """The matrix d_mu d_nu phi on the grid, shape (d+1, d+1, N^d)."""
    n = sol.lat.d + 1
    out = np.empty((n, n) + sol.lat.grid_shape,
                   dtype=float if sol.real_flag else complex)
    for mu in range(n):
        for nu in range(mu, n):
            out[mu, nu] = synthesize(sol, t, (mu, nu))
            out[nu, mu] = out[mu, nu]
    return out


def from_cauchy(lat: ModeLattice, phi0, pi0) -> Solution:
    """Real solution with phi(0) = phi0 and d_t phi(0) = pi0.

    Inverts the slice data through u_k = i pihat_0(k) + k0 phihat_0(k);
    inputs must be real and band-limited (out-of-band power <= 1e-10).
    """
    phi0 = np.asarray(phi0, dtype=float)
    pi0 = np.asarray(pi0, dtype=float)
    for name, arr in (("phi0", phi0), ("pi0", pi0)):
        frac = out_of_band_fraction(lat, arr)
        if frac > 1e-10:
            raise ValueError(
                f"{name} is not band-limited: out-of-band fraction {frac:.3e}")
    u = 1j * dft_forward(lat, pi0) + lat.k0 * dft_forward(lat, phi0)
    return from_modes(lat, u, None, real_flag=True)


def evolve_exact(sol: Solution, t: float) -> Solution:
    """Re-base the solution so its new t=0 slice is the old t slice."""
    ph = np.exp(-1j * sol.lat.k0 * t)
    return Solution(sol.lat, sol.u * ph, sol.ustar * np.conj(ph), sol.real_flag)


def kg_residual(sol: Solution, t: float = 0.0) -> float:
    """Max-norm of (box + m^2) phi with exact mode derivatives."""
    lat = sol.lat
    sym = lat.m ** 2 + np.sum(lat.k ** 2, axis=1) - lat.k0 ** 2
    grid = synthesize(sol, t, extra_u=sym, extra_us=sym)
    return float(np.max(np.abs(grid)))


def kg_residual_grid(lat: ModeLattice, phi_tx, dt: float) -> float:
    """Max-norm KG residual of a sampled history, centered FD in time."""
    phi_tx = np.asarray(phi_tx)
    if phi_tx.shape[0] < 3:
        raise ValueError("need at least three time samples")
    best = 0.0
    for i in range(1, phi_tx.shape[0] - 1):
        dtt = (phi_tx[i + 1] - 2.0 * phi_tx[i] + phi_tx[i - 1]) / dt ** 2
        resid = dtt - spectral_laplacian(lat, phi_tx[i]) + lat.m ** 2 * phi_tx[i]
        best = max(best, float(np.max(np.abs(resid))))
    return best


def leapfrog_evolve(lat: ModeLattice, phi0, pi0, dt: float, steps: int) -> SliceData:
    """Kick-drift-kick integration of phidotdot = Lap phi - m^2 phi.

    Independent finite-difference oracle: spatial derivatives are spectral
    on the full grid, time stepping is second order and symplectic.
    """
    if not dt > 0:
        raise ValueError("dt must be positive")
    if dt * float(np.max(lat.k0)) >= 2.0:
        raise ValueError("unstable step: require dt * max(k0) < 2")
    phi = np.array(phi0, dtype=float)
    pi = np.array(pi0, dtype=float)
    if phi.shape != lat.grid_shape or pi.shape != lat.grid_shape:
        raise ValueError(f"Cauchy data must have shape {lat.grid_shape}")

    def force(f):
        return spectral_laplacian(lat, f) - lat.m ** 2 * f

    half = 0.5 * dt
    for _ in range(steps):
        pi = pi + half * force(phi)
        phi = phi + dt * pi
        pi = pi + half * force(phi)

    dphi = np.empty((lat.d + 1,) + lat.grid_shape)
    dphi[0] = pi
    dphi[1:] = spectral_gradient(lat, phi)
    p = dphi.copy()
    p[1:] = -p[1:]
    quad = dphi[0] ** 2 - np.sum(dphi[1:] ** 2, axis=0)
    e = -0.5 * quad - 0.5 * lat.m ** 2 * phi ** 2
    return SliceData(t=dt * steps, phi=phi, dphi=dphi, p=p, e=e)


def field_energy(lat: ModeLattice, phi, pi) -> float:
    """Grid quadrature of (pi^2 + |grad phi|^2 + m^2 phi^2) / 2."""
    grad = spectral_gradient(lat, phi)
    dens = 0.5 * (pi ** 2 + np.sum(grad ** 2, axis=0) + lat.m ** 2 * phi ** 2)
    return float(lat.cell_volume * np.sum(dens))


# ---------------------------------------------------------------------------
# Field histories: anything that can produce (phi, d_t phi, d_tt phi) grids.
# They let the action and current functionals run on configurations that are
# not solutions (windowed perturbations, detuned frequencies, probes).
# ---------------------------------------------------------------------------

class SolutionHistory:
    """History view of an exact solution."""

    def __init__(self, sol: Solution):
        self.sol = sol
        self.lat = sol.lat

    def at(self, t: float):
        s = self.sol
        return (synthesize(s, t),
                synthesize(s, t, (0,)),
                synthesize(s, t, (0, 0)))


class DetunedHistory:
    """Solution-shaped history with every frequency shifted by ``detune``.

    For detune != 0 the configuration violates the field equation by
    (2 k0 detune + detune^2) per mode, giving a controlled off-shell field.
    """

    def __init__(self, sol: Solution, detune: float):
        self.sol = sol
        self.lat = sol.lat
        self.detune = float(detune)

    def _eval(self, t, order):
        lat, s = self.lat, self.sol
        om = lat.k0 + self.detune
        fu = (-1j * om) ** order * np.exp(-1j * (om - lat.k0) * t)
        fus = (1j * om) ** order * np.exp(1j * (om - lat.k0) * t)
        grid = synthesize(s, t, extra_u=fu, extra_us=fus)
        return grid.real if s.real_flag else grid

    def at(self, t: float):
        return self._eval(t, 0), self._eval(t, 1), self._eval(t, 2)


class PolynomialTimeHistory:
    """Spatially constant history phi(t) = sum_j c_j t^j (a probe, not a solution)."""

    def __init__(self, lat: ModeLattice, coeffs):
        self.lat = lat
        self.coeffs = [float(c) for c in coeffs]

    def _val(self, t, shift):
        acc = 0.0
        for j, c in enumerate(self.coeffs):
            if j >= shift:
                fac = 1.0
                for r in range(shift):
                    fac *= (j - r)
                acc += c * fac * t ** (j - shift)
        return acc * np.ones(self.lat.grid_shape)

    def at(self, t: float):
        return self._val(t, 0), self._val(t, 1), self._val(t, 2)


@dataclass(frozen=True)
class TimeWindow:
    """Polynomial bump on [t1, t2]: eta = (4 s (1-s))^q, zero outside.

    q derivatives vanish at both ends, keeping the windowed integrand
    smooth enough for clean Simpson convergence.
    """

    t1: float
    t2: float
    q: int = 6

    def _uv(self, t):
        T = self.t2 - self.t1
        s = (np.asarray(t, dtype=float) - self.t1) / T
        inside = (s > 0.0) & (s < 1.0)
        s = np.where(inside, s, 0.0)
        return s, inside, T

    def value(self, t):
        s, inside, _ = self._uv(t)
        return np.where(inside, (4.0 * s * (1.0 - s)) ** self.q, 0.0)

    def d1(self, t):
        s, inside, T = self._uv(t)
        u = s * (1.0 - s)
        core = self.q * 4.0 ** self.q * u ** (self.q - 1) * (1.0 - 2.0 * s)
        return np.where(inside, core / T, 0.0)

    def d2(self, t):
        s, inside, T = self._uv(t)
        u = s * (1.0 - s)
        q = self.q
        core = q * 4.0 ** q * ((q - 1) * u ** (q - 2) * (1.0 - 2.0 * s) ** 2
                               - 2.0 * u ** (q - 1))
        return np.where(inside, core / T ** 2, 0.0)


class WindowedPerturbation:
    """base + eps * eta(t) * variation, with exact time derivatives."""

    def __init__(self, base, variation, window: TimeWindow, eps: float):
        self.base = base
        self.var = variation
        self.window = window
        self.eps = float(eps)
        self.lat = base.lat

    def at(self, t: float):
        b0, b1, b2 = self.base.at(t)
        v0, v1, v2 = self.var.at(t)
        w, w1, w2 = (float(self.window.value(t)), float(self.window.d1(t)),
                     float(self.window.d2(t)))
        e = self.eps
        return (b0 + e * w * v0,
                b1 + e * (w1 * v0 + w * v1),
                b2 + e * (w2 * v0 + 2.0 * w1 * v1 + w * v2))


# ---------------------------------------------------------------------------
# Serialization
# ---------------------------------------------------------------------------

def _pairs(arr) -> list:
    return [[float(z.real), float(z.imag)] for z in np.asarray(arr, dtype=complex)]


def solution_to_json(sol: Solution) -> str:
    lat = sol.lat
    doc = {
        "schema_version": 1,
        "lattice": {"d": lat.d, "L": lat.L, "N": lat.N, "n_max": lat.n_max,
                    "m": lat.m, "hbar": lat.hbar},
        "u": _pairs(sol.u),
        "ustar": _pairs(sol.ustar),
        "real_flag": sol.real_flag,
    }
    return json.dumps(doc, sort_keys=True, indent=2) + "\n"


def solution_from_json(text: str) -> Solution:
    doc = json.loads(text)
    lat = build_lattice(**doc["lattice"])
    u = np.array([complex(re, im) for re, im in doc["u"]])
    ustar = np.array([complex(re, im) for re, im in doc["ustar"]])
    return from_modes(lat, u, ustar, bool(doc["real_flag"]))


def write_cauchy_csv(lat: ModeLattice, phi0, pi0, path) -> None:
    """Columns: flat (C-order) grid index, phi0, pi0."""
    phi0 = np.asarray(phi0, dtype=float).reshape(-1)
    pi0 = np.asarray(pi0, dtype=float).reshape(-1)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["index", "phi0", "pi0"])
        for i, (a, b) in enumerate(zip(phi0, pi0)):
            writer.writerow([i, repr(float(a)), repr(float(b))])


def read_cauchy_csv(lat: ModeLattice, path):
    """Inverse of write_cauchy_csv; validates length against the grid."""
    idx, phi, pi = [], [], []
    with open(path, newline="") as fh:
        for row in csv.reader(fh):
            if not row or row[0].startswith("#") or row[0] == "index":
                continue
            idx.append(int(row[0]))
            phi.append(float(row[1]))
            pi.append(float(row[2]))
    n_cells = int(np.prod(lat.grid_shape))
    if len(idx) != n_cells or sorted(idx) != list(range(n_cells)):
        raise ValueError("Cauchy CSV does not cover the grid exactly once")
    phi_arr = np.empty(n_cells)
    pi_arr = np.empty(n_cells)
    phi_arr[idx] = phi
    pi_arr[idx] = pi
    return phi_arr.reshape(lat.grid_shape), pi_arr.reshape(lat.grid_shape)
