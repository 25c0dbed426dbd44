"""Prequantization on polarized sections over the truncated mode set.

A state is psi = h(u*) |0> with h a polynomial and |0> the implicit
Gaussian exp(-(1/2 hbar) sum_k w_k u_k u*_k).  Only the coefficients of h
are stored, as a sparse map from exponent multi-indices to amplitudes.

Why the operators take the reduced form used here.  Write G for the
Gaussian exponent, so d|0>/du*_k = -(w_k/(2 hbar)) u_k |0> and
d|0>/du_k = -(w_k/(2 hbar)) u*_k |0>.  The prequantum operators are

    a_f   = hbar sum_k f_k d/du*_k + (1/2) sum_k w_k f_k u_k
    a*_g  = -hbar sum_k g_k d/du_k + (1/2) sum_k w_k g_k u*_k
    P_zeta = hbar sum_k (k.zeta) (u_k d/du_k - u*_k d/du*_k)

Acting on h(u*)|0>:

  * a_f: the derivative hits h and the Gaussian; the Gaussian term
    -(1/2) w_k f_k u_k h |0> cancels against the multiplication term,
    leaving hbar sum_k f_k (dh/du*_k) |0>.  On monomials: c_alpha feeds
    hbar f_k alpha_k c_alpha into alpha - e_k.
  * a*_g: h has no u dependence, so only the Gaussian responds:
    +(1/2) w_k g_k u*_k h |0>, which ADDS to the multiplication term,
    leaving multiplication by sum_k w_k g_k u*_k.  On monomials: c_alpha
    feeds w_k g_k c_alpha into alpha + e_k.
  * P_zeta: u_k d/du_k only sees the Gaussian, producing
    -(w_k/(2 hbar)) u_k u*_k; u*_k d/du*_k hits both h and the Gaussian,
    and the two Gaussian pieces cancel, leaving the diagonal action
    c_alpha -> -hbar (sum_k alpha_k (k.zeta)) c_alpha
    with k.zeta = k^0 zeta^0 - kvec . zetavec.

With the convention that the energy operator is -P_{e_0}, monomial
energies are +hbar sum_k alpha_k k^0, all nonnegative, and the vacuum
energy is exactly zero (no metaplectic correction is included).

The inner product is an artifact extension, pinned uniquely (among
diagonal pairings with <vacuum, vacuum> = 1) by requiring a*_g to be the
adjoint of a_{conj(g)}:  <(u*)^alpha, (u*)^alpha> =
prod_k alpha_k! (hbar / w_k)^{alpha_k}.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import factorial

import numpy as np

from .lattice import ModeLattice


class DegreeOverflowError(Exception):
    """Raised when a raising operator exceeds the state's degree bound."""


def canonical_alpha(pairs) -> tuple:
    """Multi-index as a sorted tuple of (mode, exponent), exponents >= 1."""
    acc = {}
    for k, e in dict(pairs).items():
        k, e = int(k), int(e)
        if e < 0:
            raise ValueError("exponents must be nonnegative")
        if e:
            acc[k] = acc.get(k, 0) + e
    return tuple(sorted(acc.items()))


def alpha_degree(alpha) -> int:
    return sum(e for _, e in alpha)


def _bump(alpha, k: int, de: int) -> tuple:
    acc = dict(alpha)
    acc[k] = acc.get(k, 0) + de
    if acc[k] < 0:
        raise ValueError("exponent would go negative")
    return tuple(sorted((kk, ee) for kk, ee in acc.items() if ee))


@dataclass(frozen=True)
class PolarizedState:
    """Sparse polynomial h(u*) applied to the implicit Gaussian vacuum."""
    lat: ModeLattice
    coeffs: dict
    degree_bound: int = 6


def prune(state: PolarizedState) -> PolarizedState:
    """Drop exactly-zero amplitudes (keeps structural zeros visible as absence)."""
    kept = {a: c for a, c in state.coeffs.items() if c != 0}
    return PolarizedState(state.lat, kept, state.degree_bound)


def vacuum(lat: ModeLattice, degree_bound: int = 6) -> PolarizedState:
    return PolarizedState(lat, {(): 1.0 + 0.0j}, degree_bound)


def monomial(lat: ModeLattice, pairs, degree_bound: int = 6) -> PolarizedState:
    """The state (u*)^alpha |0> for alpha given as {mode: exponent}."""
    alpha = canonical_alpha(pairs)
    for k, _ in alpha:
        if not 0 <= k < lat.n_modes:
            raise ValueError(f"mode index {k} out of range")
    if alpha_degree(alpha) > degree_bound:
        raise DegreeOverflowError("monomial exceeds degree bound")
    return PolarizedState(lat, {alpha: 1.0 + 0.0j}, degree_bound)


def state_add(s1: PolarizedState, s2: PolarizedState) -> PolarizedState:
    acc = dict(s1.coeffs)
    for a, c in s2.coeffs.items():
        acc[a] = acc.get(a, 0.0 + 0.0j) + c
    return PolarizedState(s1.lat, acc, max(s1.degree_bound, s2.degree_bound))


def state_scale(c, s: PolarizedState) -> PolarizedState:
    return PolarizedState(s.lat, {a: c * v for a, v in s.coeffs.items()},
                          s.degree_bound)


def state_sub(s1: PolarizedState, s2: PolarizedState) -> PolarizedState:
    return state_add(s1, state_scale(-1.0, s2))


def is_zero_state(s: PolarizedState) -> bool:
    return not prune(s).coeffs


def op_a(f, state: PolarizedState) -> PolarizedState:
    """Annihilation: c_alpha feeds hbar f_k alpha_k into alpha - e_k."""
    lat = state.lat
    f = np.asarray(f, dtype=complex)
    acc = {}
    for alpha in sorted(state.coeffs):
        c = state.coeffs[alpha]
        for k, e in alpha:
            if f[k] == 0:
                continue
            target = _bump(alpha, k, -1)
            term = lat.hbar * f[k] * e * c
            acc[target] = acc.get(target, 0.0 + 0.0j) + term
    return PolarizedState(lat, acc, state.degree_bound)


def op_a_star(g, state: PolarizedState) -> PolarizedState:
    """Creation: c_alpha feeds w_k g_k into alpha + e_k."""
    lat = state.lat
    g = np.asarray(g, dtype=complex)
    acc = {}
    for alpha in sorted(state.coeffs):
        c = state.coeffs[alpha]
        new_degree = alpha_degree(alpha) + 1
        for k in range(lat.n_modes):
            if g[k] == 0:
                continue
            if new_degree > state.degree_bound:
                raise DegreeOverflowError(
                    f"degree {new_degree} exceeds bound {state.degree_bound}")
            target = _bump(alpha, k, +1)
            term = lat.w[k] * g[k] * c
            acc[target] = acc.get(target, 0.0 + 0.0j) + term
    return PolarizedState(lat, acc, state.degree_bound)


def minkowski_kz(lat: ModeLattice, zeta) -> np.ndarray:
    """Per-mode pairing k.zeta = k^0 zeta^0 - kvec . zetavec."""
    zeta = np.asarray(zeta, dtype=float)
    if zeta.shape != (lat.d + 1,):
        raise ValueError(f"zeta must have {lat.d + 1} components")
    return lat.k0 * zeta[0] - lat.k @ zeta[1:]


def p_eigenvalue(lat: ModeLattice, alpha, zeta) -> float:
    """-hbar sum_k alpha_k (k.zeta), the diagonal value of op_p on alpha.

    Accumulated with a dot product, independently of the termwise sum
    inside op_p, so comparing the two is a nontrivial consistency check.
    """
    kz = minkowski_kz(lat, zeta)
    if not alpha:
        return 0.0
    ks = np.array([k for k, _ in alpha])
    es = np.array([e for _, e in alpha], dtype=float)
    return float(-lat.hbar * np.dot(es, kz[ks]))


def op_p(zeta, state: PolarizedState) -> PolarizedState:
    """Translation generator: diagonal with eigenvalue -hbar sum alpha_k (k.zeta)."""
    lat = state.lat
    kz = minkowski_kz(lat, zeta)
    acc = {}
    for alpha in sorted(state.coeffs):
        scale = -lat.hbar * sum(e * kz[k] for k, e in alpha)
        acc[alpha] = scale * state.coeffs[alpha]
    return PolarizedState(lat, acc, state.degree_bound)


def commutator(op_left, op_right, state: PolarizedState) -> PolarizedState:
    """(A B - B A) state, with exact zeros pruned away."""
    return prune(state_sub(op_left(op_right(state)),
                           op_right(op_left(state))))


def monomial_norm_sq(lat: ModeLattice, alpha) -> float:
    return float(np.prod([factorial(e) * (lat.hbar / lat.w[k]) ** e
                          for k, e in alpha]) if alpha else 1.0)


def inner_product(s1: PolarizedState, s2: PolarizedState) -> complex:
    """Diagonal pairing, conjugate-linear in the first argument."""
    total = 0.0 + 0.0j
    for alpha in sorted(set(s1.coeffs) & set(s2.coeffs)):
        total += (np.conj(s1.coeffs[alpha]) * s2.coeffs[alpha]
                  * monomial_norm_sq(s1.lat, alpha))
    return complex(total)


def monomials_up_to_degree(lat: ModeLattice, max_degree: int):
    """All exponent multi-indices with total degree <= max_degree, sorted."""
    out = [()]
    frontier = [()]
    for _ in range(max_degree):
        nxt = []
        for alpha in frontier:
            start = alpha[-1][0] if alpha else 0
            for k in range(start, lat.n_modes):
                nxt.append(_bump(alpha, k, +1))
        frontier = nxt
        out.extend(nxt)
    return sorted(set(out), key=lambda a: (alpha_degree(a), a))
