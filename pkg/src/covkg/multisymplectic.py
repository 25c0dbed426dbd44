"""The multisymplectic kernel on M = {(x^mu, phi, e, p^mu)}.

Conventions (n = d + 1 spacetime dimensions, metric eta = diag(+, -, ..., -)):

    beta   = dx^0 ^ ... ^ dx^(n-1)
    beta_mu = d/dx^mu  _|  beta = (-1)^mu dx^0 ^ ... ^ [dx^mu] ^ ... ^ dx^(n-1)
    omega  = de ^ beta + dp^mu ^ dphi ^ beta_mu
    theta_lambda = e beta + lambda p^mu dphi ^ beta_mu
                   - (1 - lambda) phi dp^mu ^ beta_mu
    H      = e + (1/2) eta_{mu nu} p^mu p^nu + (1/2) m^2 phi^2

Both forms are evaluated by explicit determinant expansion over the fixed
coordinate order (x^0..x^(n-1), phi, e, p^0..p^(n-1)); the space has
dimension 2n + 2, so no general exterior-algebra machinery is needed.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .lattice import ModeLattice, spectral_gradient, spectral_laplacian
from .solution import (
    SliceData,
    Solution,
    SolutionHistory,
    TimeWindow,
    WindowedPerturbation,
    evaluate_fields,
    second_derivatives,
)


@dataclass(frozen=True)
class MPoint:
    """A point of M: spacetime position, field value, energy, momenta."""

    x: np.ndarray
    phi: float
    e: float
    p: np.ndarray


@dataclass(frozen=True)
class MTangent:
    """A tangent vector of M in the coordinate splitting (dx, dphi, de, dp)."""

    dx: np.ndarray
    dphi: float
    de: float
    dp: np.ndarray

    def components(self) -> np.ndarray:
        dx = np.atleast_1d(np.asarray(self.dx))
        dp = np.atleast_1d(np.asarray(self.dp))
        return np.concatenate([dx, [self.dphi], [self.de], dp])


def vertical_tangent(n: int, dphi=0.0, de=0.0, dp=None) -> MTangent:
    """Tangent with no spacetime component (a deformation direction)."""
    dp = np.zeros(n) if dp is None else np.asarray(dp)
    return MTangent(dx=np.zeros(n), dphi=dphi, de=de, dp=dp)


def basis_tangents(d: int) -> list:
    """Coordinate directions of M, ordered (x^mu, phi, e, p^mu)."""
    n = d + 1
    dim = 2 * n + 2
    out = []
    for i in range(dim):
        comp = np.zeros(dim)
        comp[i] = 1.0
        out.append(MTangent(dx=comp[:n], dphi=comp[n], de=comp[n + 1],
                            dp=comp[n + 2:]))
    return out


def _det_on(indices, mats) -> complex:
    # entry [a, b] = component indices[a] of vector b
    sub = mats[list(indices), :]
    return np.linalg.det(sub.T)


def _stack(vectors) -> np.ndarray:
    comps = [np.asarray(v.components()) for v in vectors]
    dim = comps[0].shape[0]
    if any(c.shape != (dim,) for c in comps):
        raise ValueError("tangent vectors have mismatched dimensions")
    dtype = complex if any(np.iscomplexobj(c) for c in comps) else float
    return np.stack(comps).astype(dtype).T  # rows: coordinates, cols: vectors


def omega_eval(vectors):
    """Evaluate omega on exactly n + 1 tangent vectors."""
    vectors = list(vectors)
    mats = _stack(vectors)
    dim = mats.shape[0]
    if dim % 2 != 0 or dim < 6:
        raise ValueError("bad tangent dimension")
    n = (dim - 2) // 2
    if len(vectors) != n + 1:
        raise ValueError(f"omega takes n + 1 = {n + 1} vectors, "
                         f"got {len(vectors)}")
    ix, iphi, ie, ip = list(range(n)), n, n + 1, n + 2
    val = _det_on([ie] + ix, mats)
    for mu in range(n):
        sign = -1.0 if mu % 2 else 1.0
        rest = [a for a in ix if a != mu]
        val = val + sign * _det_on([ip + mu, iphi] + rest, mats)
    return val if np.iscomplexobj(mats) else float(val.real if np.iscomplexobj(val) else val)


def theta_eval(lam: float, point: MPoint, vectors):
    """Evaluate theta_lambda at ``point`` on exactly n tangent vectors."""
    vectors = list(vectors)
    mats = _stack(vectors)
    dim = mats.shape[0]
    n = (dim - 2) // 2
    if len(vectors) != n:
        raise ValueError(f"theta takes n = {n} vectors, got {len(vectors)}")
    ix, iphi, ip = list(range(n)), n, n + 2
    val = point.e * _det_on(ix, mats)
    for mu in range(n):
        sign = -1.0 if mu % 2 else 1.0
        rest = [a for a in ix if a != mu]
        val = val + lam * point.p[mu] * sign * _det_on([iphi] + rest, mats)
        val = val - (1.0 - lam) * point.phi * sign * _det_on([ip + mu] + rest, mats)
    complex_out = np.iscomplexobj(mats) or any(
        np.iscomplexobj(np.asarray(z)) for z in (point.phi, point.e, point.p))
    return val if complex_out else float(val)


def dtheta_fd(lam: float, point: MPoint, vectors, eps: float = 1e-3):
    """Exterior derivative d theta_lambda on n + 1 constant vector fields.

    d theta(v_0..v_n) = sum_i (-1)^i v_i[theta(.. v_i omitted ..)];
    the coefficients of theta are linear in the point coordinates, so the
    central differences below are exact up to roundoff and the result must
    reproduce omega_eval on the same vectors for every lambda.
    """
    vectors = list(vectors)

    def shifted(v: MTangent, s: float) -> MPoint:
        return MPoint(x=point.x + s * v.dx, phi=point.phi + s * v.dphi,
                      e=point.e + s * v.de, p=point.p + s * v.dp)

    total = 0.0
    for i, v in enumerate(vectors):
        rest = vectors[:i] + vectors[i + 1:]
        der = (theta_eval(lam, shifted(v, eps), rest)
               - theta_eval(lam, shifted(v, -eps), rest)) / (2.0 * eps)
        total = total + (-1.0 if i % 2 else 1.0) * der
    return total


def hamiltonian(point: MPoint, m: float):
    """H = e + (1/2) eta_{mu nu} p^mu p^nu + (1/2) m^2 phi^2."""
    p = np.asarray(point.p)
    quad = p[0] ** 2 - np.sum(p[1:] ** 2)
    return point.e + 0.5 * quad + 0.5 * m ** 2 * point.phi ** 2


# ---------------------------------------------------------------------------
# Graph frames: the canonical tangent basis X_mu of a solution graph in M
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class GraphFrame:
    """Slice fields plus the derivatives (d_mu e, d_mu p^nu) along the graph."""

    slice: SliceData
    de: np.ndarray   # (d+1, grid)
    dp: np.ndarray   # (d+1, d+1, grid), [mu, nu] = d_mu p^nu


def graph_frame(sol: Solution, t: float) -> GraphFrame:
    lat = sol.lat
    sd = evaluate_fields(sol, t)
    dd = second_derivatives(sol, t)
    eta = np.array([1.0] + [-1.0] * lat.d)
    dp = np.einsum("n,mn...->mn...", eta, dd)
    de = np.empty_like(dd[0])
    for mu in range(lat.d + 1):
        quad = dd[mu, 0] * sd.dphi[0] - np.sum(dd[mu, 1:] * sd.dphi[1:], axis=0)
        de[mu] = -quad - lat.m ** 2 * sd.phi * sd.dphi[mu]
    return GraphFrame(slice=sd, de=de, dp=dp)


def graph_tangent(frame: GraphFrame, mu: int, j) -> MTangent:
    """X_mu = d/dx^mu + d_mu phi d/dphi + d_mu e d/de + d_mu p^nu d/dp^nu at cell j."""
    sd = frame.slice
    n = sd.p.shape[0]
    dx = np.zeros(n)
    dx[mu] = 1.0
    return MTangent(dx=dx, dphi=sd.dphi[mu][j], de=frame.de[mu][j],
                    dp=np.array([frame.dp[mu, nu][j] for nu in range(n)]))


def hamilton_pointwise_residual(sol: Solution, t: float) -> float:
    """Max deviation in omega(xi, X_0..X_d) = dH(xi) beta(X) over the slice.

    xi runs over all coordinate directions; X is the canonical graph basis.
    Exact mode derivatives make this a roundoff-level identity on solutions.
    """
    lat = sol.lat
    frame = graph_frame(sol, t)
    sd = frame.slice
    n = lat.d + 1
    basis = basis_tangents(lat.d)
    eta = np.array([1.0] + [-1.0] * lat.d)
    worst = 0.0
    for j in np.ndindex(lat.grid_shape):
        xs = [graph_tangent(frame, mu, j) for mu in range(n)]
        beta_x = float(np.linalg.det(np.stack([x.dx for x in xs]).T))
        # dH components in coordinate order (x, phi, e, p)
        dh = np.concatenate([np.zeros(n), [lat.m ** 2 * sd.phi[j]], [1.0],
                             eta * sd.p[(slice(None),) + j]])
        for xi, dh_xi in zip(basis, dh):
            lhs = omega_eval([xi] + xs)
            worst = max(worst, abs(lhs - dh_xi * beta_x))
    return worst


# ---------------------------------------------------------------------------
# Hamilton-system residual (finite differences in time, spectral in space)
# ---------------------------------------------------------------------------

def _uniform_dt(t_grid) -> float:
    t_grid = np.asarray(t_grid, dtype=float)
    if t_grid.size < 3:
        raise ValueError("need at least three time samples")
    steps = np.diff(t_grid)
    if np.max(np.abs(steps - steps[0])) > 1e-12 * max(1.0, abs(steps[0])):
        raise ValueError("time grid must be uniform")
    return float(steps[0])


def hamilton_residual_fields(lat: ModeLattice, t_grid, phis, ps) -> float:
    """Residual of the Hamilton system for sampled (phi, p^mu) histories.

    Checks d phi/dx^mu = eta_{mu nu} p^nu and sum_mu d p^mu/dx^mu = -m^2 phi,
    with centered differences in time and spectral space derivatives.
    """
    dt = _uniform_dt(t_grid)
    phis = np.asarray(phis)
    ps = np.asarray(ps)
    worst = 0.0
    for i in range(1, phis.shape[0] - 1):
        grad_phi = spectral_gradient(lat, phis[i])
        dphi_dt = (phis[i + 1] - phis[i - 1]) / (2.0 * dt)
        worst = max(worst, float(np.max(np.abs(dphi_dt - ps[i, 0]))))
        for a in range(lat.d):
            worst = max(worst, float(np.max(np.abs(grad_phi[a] + ps[i, a + 1]))))
        dp0_dt = (ps[i + 1, 0] - ps[i - 1, 0]) / (2.0 * dt)
        div_sp = np.zeros_like(phis[i])
        for a in range(lat.d):
            div_sp = div_sp + spectral_gradient(lat, ps[i, a + 1])[a]
        worst = max(worst, float(np.max(np.abs(
            dp0_dt + div_sp + lat.m ** 2 * phis[i]))))
    return worst


def hamilton_residual(sol: Solution, t_grid) -> float:
    """Hamilton-system residual of an exact solution sampled on t_grid."""
    t_grid = np.asarray(t_grid, dtype=float)
    slices = [evaluate_fields(sol, t) for t in t_grid]
    phis = np.stack([s.phi for s in slices])
    ps = np.stack([s.p for s in slices])
    return hamilton_residual_fields(sol.lat, t_grid, phis, ps)


# ---------------------------------------------------------------------------
# Action between slices and criticality
# ---------------------------------------------------------------------------

def simpson(values, dt: float):
    """Composite Simpson rule; requires an odd number of samples."""
    values = np.asarray(values)
    n = values.shape[0]
    if n < 3 or n % 2 == 0:
        raise ValueError("Simpson rule needs an odd number >= 3 of samples")
    w = np.ones(n)
    w[1:-1:2] = 4.0
    w[2:-1:2] = 2.0
    return (dt / 3.0) * np.sum(w * values)


def theta_pullback_density(lat: ModeLattice, phi, dtphi, dttphi, lam: float):
    """Density of the pullback of theta_lambda to a holonomic graph.

    Everything is derived from (phi, d_t phi, d_tt phi) on one slice:
    p^mu = eta grad phi and d_mu p^mu = box phi, with spectral space
    derivatives.  On shell the density reduces to (2 lambda - 1) times the
    Lagrangian density.
    """
    grad = spectral_gradient(lat, phi)
    quad = dtphi ** 2 - np.sum(grad ** 2, axis=0)
    divp = dttphi - spectral_laplacian(lat, phi)
    en = -0.5 * quad - 0.5 * lat.m ** 2 * phi ** 2
    return en + lam * quad - (1.0 - lam) * phi * divp


def action_of_history(lat: ModeLattice, hist, lam: float, t1: float, t2: float,
                      n_t: int):
    """Integral of the theta_lambda pullback over t in [t1, t2] (Simpson)."""
    if not t2 > t1:
        raise ValueError("need t1 < t2")
    ts = np.linspace(t1, t2, n_t)
    vals = []
    for t in ts:
        phi, dtphi, dttphi = hist.at(t)
        dens = theta_pullback_density(lat, phi, dtphi, dttphi, lam)
        vals.append(lat.cell_volume * np.sum(dens))
    vals = np.asarray(vals)
    out = simpson(vals, ts[1] - ts[0])
    return complex(out) if np.iscomplexobj(vals) else float(out)


def action_between_slices(sol: Solution, lam: float, t1: float, t2: float,
                          n_t: int = 257) -> float:
    return action_of_history(sol.lat, SolutionHistory(sol), lam, t1, t2, n_t)


def lagrangian_action(lat: ModeLattice, hist, t1: float, t2: float,
                      n_t: int) -> float:
    """Independent quadrature of the Lagrangian (first derivatives only)."""
    ts = np.linspace(t1, t2, n_t)
    vals = np.empty(n_t)
    for i, t in enumerate(ts):
        phi, dtphi, _ = hist.at(t)
        grad = spectral_gradient(lat, phi)
        dens = 0.5 * (dtphi ** 2 - np.sum(grad ** 2, axis=0)) \
            - 0.5 * lat.m ** 2 * phi ** 2
        vals[i] = lat.cell_volume * np.sum(dens)
    return simpson(vals, ts[1] - ts[0])


def action_criticality(sol: Solution, variation: Solution, lam: float,
                       eps: float = 1e-3, t1: float = 0.0, t2: float = 1.0,
                       n_t: int = 1025, window_power: int = 6,
                       base_history=None) -> float:
    """|dA/d eps| for a compact-in-time holonomic variation of the graph.

    The variation is eta(t) * variation-field with eta a smooth bump
    supported in (t1, t2); p and e follow the perturbed phi holonomically,
    so the configuration leaves the shell and the derivative probes true
    criticality.  The action is quadratic in eps, hence the central
    difference equals the exact derivative up to quadrature error.
    """
    if not eps > 0:
        raise ValueError("eps must be positive")
    lat = sol.lat
    base = base_history if base_history is not None else SolutionHistory(sol)
    win = TimeWindow(t1, t2, window_power)
    var = SolutionHistory(variation)
    plus = action_of_history(
        lat, WindowedPerturbation(base, var, win, eps), lam, t1, t2, n_t)
    minus = action_of_history(
        lat, WindowedPerturbation(base, var, win, -eps), lam, t1, t2, n_t)
    return abs(plus - minus) / (2.0 * eps)
