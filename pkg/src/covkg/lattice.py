"""Periodic box, truncated Fourier modes, and the discrete mass-shell measure.

Space is the periodic box [0, L)^d sampled on a uniform grid of N points per
axis, x_j = j L / N.  Retained wave vectors are k = (2pi/L) n with integer
|n_i| <= n_max; each carries the frequency k0 = sqrt(m^2 + |k|^2) and the
quadrature weight

    w_k = (2pi/L)^d / (2 k0),

the discrete counterpart of the invariant measure dk/(2 k0) on the positive
mass shell.  The hat transform uses the convention

    psi_hat(k) = (2pi)^(-d/2) (L/N)^d sum_j psi(x_j) e^(-i k.x_j),

which is exact (to roundoff) on band-limited fields because 2 n_max + 1 <= N.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np


@dataclass(frozen=True)
class ModeLattice:
    """Spatial grid plus the truncated positive mass shell.

    Parameters
    ----------
    d : spatial dimension (>= 1)
    L : box side length (> 0)
    N : grid points per axis (even, with 2*n_max + 1 <= N)
    n_max : per-axis mode cutoff (>= 0)
    m : mass (> 0; the massless zero mode has w_k = inf and is rejected)
    hbar : Planck constant (> 0)

    Derived arrays (read-only): ``modes`` the integer vectors n, ``k`` the
    wave vectors, ``k0`` the frequencies, ``w`` the weights.
    """

    d: int
    L: float
    N: int
    n_max: int
    m: float
    hbar: float = 1.0
    modes: np.ndarray = field(init=False, repr=False, compare=False)
    k: np.ndarray = field(init=False, repr=False, compare=False)
    k0: np.ndarray = field(init=False, repr=False, compare=False)
    w: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if self.d < 1:
            raise ValueError("spatial dimension d must be >= 1")
        if not self.L > 0:
            raise ValueError("box length L must be positive")
        if self.N < 2 or self.N % 2 != 0:
            raise ValueError("grid size N must be a positive even integer")
        if self.n_max < 0:
            raise ValueError("mode cutoff n_max must be >= 0")
        if 2 * self.n_max + 1 > self.N:
            raise ValueError(
                "aliasing: need 2*n_max + 1 <= N "
                f"(got n_max={self.n_max}, N={self.N})"
            )
        if not self.m > 0:
            raise ValueError("mass must be positive (k0 > 0 on the mass shell)")
        if not self.hbar > 0:
            raise ValueError("hbar must be positive")

        rng_n = range(-self.n_max, self.n_max + 1)
        modes = np.array(list(itertools.product(rng_n, repeat=self.d)), dtype=int)
        k = (2.0 * np.pi / self.L) * modes.astype(float)
        k0 = np.sqrt(self.m ** 2 + np.sum(k * k, axis=1))
        w = (2.0 * np.pi / self.L) ** self.d / (2.0 * k0)
        for name, arr in (("modes", modes), ("k", k), ("k0", k0), ("w", w)):
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    @property
    def n_modes(self) -> int:
        return self.modes.shape[0]

    @property
    def grid_shape(self) -> tuple:
        return (self.N,) * self.d

    @property
    def cell_volume(self) -> float:
        return (self.L / self.N) ** self.d

    def axis(self) -> np.ndarray:
        """Grid coordinates along one axis, x_j = j L / N."""
        return np.arange(self.N) * (self.L / self.N)

    def mode_index(self, n) -> int:
        """Index of the mode with integer vector n (lexicographic order)."""
        n = np.atleast_1d(np.asarray(n, dtype=int))
        if n.shape != (self.d,) or np.any(np.abs(n) > self.n_max):
            raise ValueError(f"{n} is not a lattice mode")
        width = 2 * self.n_max + 1
        idx = 0
        for ni in n:
            idx = idx * width + (int(ni) + self.n_max)
        return idx

    def conj_index(self) -> np.ndarray:
        """Permutation sending each mode to its spatial reflection k -> -k."""
        # lexicographic enumeration of a symmetric range reverses under n -> -n
        return np.arange(self.n_modes)[::-1].copy()

    def fft_indices(self) -> tuple:
        """Per-axis FFT bin of each mode (n_i mod N), as an index tuple."""
        return tuple(np.mod(self.modes[:, a], self.N) for a in range(self.d))


def build_lattice(d: int, L: float, N: int, n_max: int, m: float,
                  hbar: float = 1.0) -> ModeLattice:
    """Validate parameters and construct a ModeLattice."""
    return ModeLattice(d=int(d), L=float(L), N=int(N), n_max=int(n_max),
                       m=float(m), hbar=float(hbar))


def dispersion(lat: ModeLattice, kvec) -> float:
    """Mass-shell frequency k0 = sqrt(m^2 + |k|^2)."""
    kvec = np.atleast_1d(np.asarray(kvec, dtype=float))
    return float(np.sqrt(lat.m ** 2 + np.sum(kvec ** 2)))


def _check_grid(lat: ModeLattice, grid_field) -> np.ndarray:
    arr = np.asarray(grid_field)
    if arr.shape != lat.grid_shape:
        raise ValueError(f"grid field must have shape {lat.grid_shape}, "
                         f"got {arr.shape}")
    return arr


def dft_forward(lat: ModeLattice, grid_field) -> np.ndarray:
    """Hat transform: per-mode psi_hat(k) under the stated normalization."""
    arr = _check_grid(lat, grid_field)
    spec = np.fft.fftn(arr)
    coeff = spec[lat.fft_indices()]
    return (2.0 * np.pi) ** (-lat.d / 2.0) * (lat.L / lat.N) ** lat.d * coeff


def dft_inverse(lat: ModeLattice, mode_coefficients) -> np.ndarray:
    """Inverse of dft_forward on the retained band (returns a complex grid)."""
    coeff = np.asarray(mode_coefficients, dtype=complex)
    if coeff.shape != (lat.n_modes,):
        raise ValueError(f"expected {lat.n_modes} mode coefficients, "
                         f"got shape {coeff.shape}")
    spec = np.zeros(lat.grid_shape, dtype=complex)
    scale = (2.0 * np.pi) ** (lat.d / 2.0) / lat.L ** lat.d
    np.add.at(spec, lat.fft_indices(), coeff * scale)
    return np.fft.ifftn(spec) * lat.N ** lat.d


def mode_sum_grid(lat: ModeLattice, plus_coeff, minus_coeff) -> np.ndarray:
    """Evaluate sum_k (c+_k e^{+i k.x} + c-_k e^{-i k.x}) on the grid.

    The two coefficient arrays sit on the same mode list; the e^{-ik.x}
    branch is scattered onto the reflected FFT bins.  Exact for the retained
    band since all bin residues are distinct.
    """
    spec = np.zeros(lat.grid_shape, dtype=complex)
    idx = lat.fft_indices()
    np.add.at(spec, idx, np.asarray(plus_coeff, dtype=complex))
    ridx = tuple(np.mod(-lat.modes[:, a], lat.N) for a in range(lat.d))
    np.add.at(spec, ridx, np.asarray(minus_coeff, dtype=complex))
    return np.fft.ifftn(spec) * lat.N ** lat.d


def _fft_wavenumbers(lat: ModeLattice) -> list:
    """Full-grid angular wavenumbers per axis (for spectral derivatives)."""
    return [2.0 * np.pi * np.fft.fftfreq(lat.N, d=lat.L / lat.N)
            for _ in range(lat.d)]


def spectral_gradient(lat: ModeLattice, grid_field) -> np.ndarray:
    """All spatial derivatives of a band-limited grid field, shape (d, N^d)."""
    arr = _check_grid(lat, grid_field)
    spec = np.fft.fftn(arr)
    ks = _fft_wavenumbers(lat)
    out = np.empty((lat.d,) + lat.grid_shape, dtype=complex)
    for a in range(lat.d):
        shape = [1] * lat.d
        shape[a] = lat.N
        out[a] = np.fft.ifftn(1j * ks[a].reshape(shape) * spec)
    if np.isrealobj(arr):
        return out.real
    return out


def spectral_laplacian(lat: ModeLattice, grid_field) -> np.ndarray:
    """Laplacian of a band-limited grid field via the full-grid FFT."""
    arr = _check_grid(lat, grid_field)
    spec = np.fft.fftn(arr)
    ks = _fft_wavenumbers(lat)
    k2 = np.zeros(lat.grid_shape)
    for a in range(lat.d):
        shape = [1] * lat.d
        shape[a] = lat.N
        k2 = k2 + (ks[a].reshape(shape)) ** 2
    out = np.fft.ifftn(-k2 * spec)
    if np.isrealobj(arr):
        return out.real
    return out


def out_of_band_fraction(lat: ModeLattice, grid_field) -> float:
    """Fraction of spectral power carried by bins outside the retained band."""
    arr = _check_grid(lat, grid_field)
    spec = np.fft.fftn(arr)
    total = float(np.sum(np.abs(spec) ** 2))
    if total == 0.0:
        return 0.0
    mask = np.zeros(lat.grid_shape, dtype=bool)
    mask[lat.fft_indices()] = True
    return float(np.sum(np.abs(spec[~mask]) ** 2) / total)
