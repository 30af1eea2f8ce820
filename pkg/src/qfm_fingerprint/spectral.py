#!/usr/bin/env python3
"""Input grids, discrete Fourier analysis and the canonical half-spectrum.

Coefficients follow the series convention f(x) = Σ_ω c_ω exp(iω·x) with

    c_ω = K^-D Σ_x f(x) exp(-iω·x)

on the uniform grid x = 2πk/K, k = 0..K-1 per axis. Tensors are stored
centred: index j on an axis holds frequency j - K//2.
"""

import logging
from dataclasses import dataclass
from functools import lru_cache
from itertools import product
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy.special import comb

from .circuits import ModelSpec, build_model_circuit, evaluate_batch
from .errors import AliasingError, DimensionMismatchError
from .seeding import make_rng
from .statevec import expectation_mean_z_batch, sample_mean_z_batch, simulate

logger = logging.getLogger("spectral")


@dataclass(frozen=True)
class InputGrid:
    D: int
    K: int

    @property
    def axis(self) -> np.ndarray:
        return 2.0 * np.pi * np.arange(self.K) / self.K

    @property
    def points(self) -> np.ndarray:
        """(K^D, D) grid points, first dimension varying slowest"""
        mesh = np.meshgrid(*([self.axis] * self.D), indexing="ij")
        return np.stack([m.reshape(-1) for m in mesh], axis=1)

    @property
    def size(self) -> int:
        return self.K**self.D

    @property
    def shape(self) -> Tuple[int, ...]:
        return (self.K,) * self.D


def nyquist_points(max_freq: int) -> int:
    return 2 * max_freq + 1


def make_input_grid(nL: int, D: int, K: Optional[int] = None) -> InputGrid:
    """Uniform grid on [0, 2π)^D; K defaults to the alias-free 2nL+1"""
    if D < 1:
        raise ValueError(f"Input dimension must be at least 1, got {D}")
    if nL < 0:
        raise ValueError(f"Maximum frequency must be non-negative, got {nL}")
    minimum = nyquist_points(nL)
    if K is None:
        K = minimum
    elif K < minimum:
        raise AliasingError(
            f"{K} points per axis alias a band of ±{nL}; need at least {minimum}"
        )
    return InputGrid(D=D, K=int(K))


@lru_cache(maxsize=64)
def _canonical(max_freq: int, D: int) -> Tuple[Tuple[int, ...], ...]:
    """ω = 0 plus every ω whose last non-zero component is positive"""
    keep = []
    for omega in product(range(-max_freq, max_freq + 1), repeat=D):
        nonzero = [w for w in omega if w != 0]
        if not nonzero or nonzero[-1] > 0:
            keep.append(omega)
    return tuple(sorted(keep, key=lambda w: tuple(reversed(w))))


@dataclass(frozen=True)
class HalfSpectrumIndex:
    """Canonical frequencies: exactly one of ω, -ω for every ω ≠ 0.

    D=1: 0, 1, ..., nL.  D=2: (0,0) .. (nL,0), then (ω1, ω2) with ω2 > 0.
    """

    max_freq: int
    D: int

    @property
    def frequencies(self) -> Tuple[Tuple[int, ...], ...]:
        return _canonical(self.max_freq, self.D)

    def __len__(self) -> int:
        return len(self.frequencies)

    def positions(self, K: int) -> Tuple[np.ndarray, ...]:
        """Fancy index into a centred tensor with K points per axis"""
        omegas = np.array(self.frequencies, dtype=int) + K // 2
        return tuple(omegas[:, d] for d in range(self.D))

    def l1_norms(self) -> np.ndarray:
        return np.abs(np.array(self.frequencies)).sum(axis=1)

    def labels(self) -> List[str]:
        if self.D == 1:
            return [str(w[0]) for w in self.frequencies]
        return ["(" + ",".join(str(c) for c in w) + ")" for w in self.frequencies]


def half_spectrum_index(nL: int, D: int) -> HalfSpectrumIndex:
    return HalfSpectrumIndex(max_freq=nL, D=D)


@dataclass
class CoefficientTensor:
    D: int
    max_freq: int
    values: np.ndarray

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=np.complex128)
        if self.values.ndim != self.D or len(set(self.values.shape)) != 1:
            raise DimensionMismatchError(
                f"Expected a {self.D}-dimensional cube, got shape {self.values.shape}"
            )

    @property
    def K(self) -> int:
        return self.values.shape[0]

    @property
    def freqs(self) -> np.ndarray:
        return np.arange(self.K) - self.K // 2

    def __getitem__(self, omega) -> complex:
        omega = np.atleast_1d(omega)
        if omega.shape[0] != self.D:
            raise DimensionMismatchError(f"Frequency {tuple(omega)} is not {self.D}-D")
        index = tuple(int(w) + self.K // 2 for w in omega)
        if any(not 0 <= i < self.K for i in index):
            return 0j
        return complex(self.values[index])

    def truncate(self, nL: int) -> "CoefficientTensor":
        """Restrict to [-nL, nL]^D"""
        if nyquist_points(nL) > self.K:
            raise AliasingError(f"Tensor with K={self.K} does not cover ±{nL}")
        centre = self.K // 2
        window = tuple(slice(centre - nL, centre + nL + 1) for _ in range(self.D))
        return CoefficientTensor(self.D, nL, self.values[window].copy())

    def _symmetric_band(self) -> "CoefficientTensor":
        return self.truncate((self.K - 1) // 2)

    def hermitian_error(self) -> float:
        """max |c_-ω - conj(c_ω)| over the symmetric part of the tensor"""
        v = self._symmetric_band().values
        mirrored = v[(slice(None, None, -1),) * self.D]
        return float(np.max(np.abs(mirrored - np.conj(v))))

    def out_of_band_max(self, nL: int) -> float:
        """max |c_ω| over ‖ω‖∞ > nL"""
        grids = np.meshgrid(*([self.freqs] * self.D), indexing="ij")
        outside = np.zeros(self.values.shape, dtype=bool)
        for g in grids:
            outside |= np.abs(g) > nL
        if not outside.any():
            return 0.0
        return float(np.max(np.abs(self.values[outside])))

    def energy(self) -> float:
        return float(np.sum(np.abs(self.values) ** 2))

    def half_spectrum(self, index: Optional[HalfSpectrumIndex] = None) -> np.ndarray:
        index = index or half_spectrum_index(self.max_freq, self.D)
        return self.values[index.positions(self.K)]

    def records(self) -> List[Dict]:
        """Rows with one column per frequency component plus re/im"""
        grids = np.meshgrid(*([self.freqs] * self.D), indexing="ij")
        rows = []
        for pos in np.ndindex(*self.values.shape):
            row = {f"omega_{d}": int(grids[d][pos]) for d in range(self.D)}
            row["re"] = float(self.values[pos].real)
            row["im"] = float(self.values[pos].imag)
            rows.append(row)
        return rows

    @classmethod
    def from_records(cls, rows: Sequence[Dict], max_freq: Optional[int] = None):
        D = sum(1 for key in rows[0] if key.startswith("omega_"))
        span = max(abs(int(r[f"omega_{d}"])) for r in rows for d in range(D))
        K = 2 * span + 1
        values = np.zeros((K,) * D, dtype=np.complex128)
        for r in rows:
            pos = tuple(int(r[f"omega_{d}"]) + span for d in range(D))
            values[pos] = complex(float(r["re"]), float(r["im"]))
        return cls(D, span if max_freq is None else max_freq, values)


def _check_grid_values(values: np.ndarray, grid: InputGrid) -> np.ndarray:
    values = np.asarray(values)
    if values.shape[-1] != grid.size:
        raise DimensionMismatchError(
            f"Expected {grid.size} grid values, got {values.shape[-1]}"
        )
    return values


def dft_batch(values: np.ndarray, grid: InputGrid) -> np.ndarray:
    """Centred coefficients for each row of a (M, K^D) value array"""
    values = _check_grid_values(values, grid)
    rows = values.reshape((-1,) + grid.shape)
    axes = tuple(range(1, grid.D + 1))
    coeffs = np.fft.fftn(rows, axes=axes) / grid.size
    return np.fft.fftshift(coeffs, axes=axes)


def dft(values: np.ndarray, grid: InputGrid, max_freq: Optional[int] = None) -> CoefficientTensor:
    """Series coefficients c_ω of grid samples, frequencies centred on 0"""
    values = _check_grid_values(np.ravel(values), grid)
    nL = (grid.K - 1) // 2 if max_freq is None else max_freq
    return CoefficientTensor(grid.D, nL, dft_batch(values[None, :], grid)[0])


def idft(tensor: CoefficientTensor) -> np.ndarray:
    """Grid values (complex) reconstructed from a centred tensor"""
    shifted = np.fft.ifftshift(tensor.values)
    return (np.fft.ifftn(shifted) * tensor.K**tensor.D).reshape(-1)


def model_coefficients(
    spec: ModelSpec, theta: np.ndarray, K: Optional[int] = None
) -> CoefficientTensor:
    """Coefficients of f(·, θ) from one grid evaluation"""
    grid = make_input_grid(spec.max_freq, spec.dims, K)
    values = evaluate_batch(spec, theta, grid.points)
    return dft(values, grid, max_freq=spec.max_freq)


def model_coefficients_batch(
    spec: ModelSpec, thetas: np.ndarray, K: Optional[int] = None
) -> np.ndarray:
    """Centred coefficient tensors, one per parameter row: shape (M,) + (K,)*D"""
    grid = make_input_grid(spec.max_freq, spec.dims, K)
    thetas = np.atleast_2d(thetas)
    points = grid.points
    rows = np.repeat(thetas, grid.size, axis=0)
    xs = np.tile(points, (thetas.shape[0], 1))
    values = evaluate_batch(spec, rows, xs).reshape(thetas.shape[0], grid.size)
    return dft_batch(values, grid)


def degeneracy(n: int, L: int, omega: int) -> int:
    """Number of eigenvalue-sum pairs (Λ_j, Λ_k) with Λ_j - Λ_k = ω.

    Each of the nL encoding gates contributes ±1/2, so the count is the
    Vandermonde sum C(2nL, nL - |ω|); for L = 1 that is C(2n, n - |ω|).
    """
    nL = n * L
    if abs(omega) > nL:
        raise ValueError(f"Frequency {omega} outside the band ±{nL}")
    return int(comb(2 * nL, nL - abs(omega), exact=True))


def degeneracy_vector(n: int, L: int, omega: Sequence[int]) -> int:
    """Degeneracy of a frequency vector: product over input dimensions"""
    result = 1
    for w in omega:
        result *= degeneracy(n, L, int(w))
    return result


def sampled_model_coefficients(
    spec: ModelSpec, theta: np.ndarray, shots: int, seed: int, K: Optional[int] = None
) -> CoefficientTensor:
    """Coefficients from shot-sampled expectation values on the grid"""
    grid = make_input_grid(spec.max_freq, spec.dims, K)
    psi = simulate(spec.n, build_model_circuit(spec, theta, grid.points), grid.size)
    values = sample_mean_z_batch(psi, shots, make_rng(seed, "shots", 0))
    return dft(values, grid, max_freq=spec.max_freq)


def shot_noise_rms(
    spec: ModelSpec, theta: np.ndarray, shots: int, trials: int, seed: int
) -> float:
    """RMS deviation of shot-sampled coefficients from the exact ones"""
    if trials < 1:
        raise ValueError(f"Trial count must be at least 1, got {trials}")
    grid = make_input_grid(spec.max_freq, spec.dims)
    psi = simulate(spec.n, build_model_circuit(spec, theta, grid.points), grid.size)
    exact = dft_batch(expectation_mean_z_batch(psi), grid)[0]
    sq_errors = []
    for trial in range(trials):
        noisy = sample_mean_z_batch(psi, shots, make_rng(seed, "shots", trial))
        sq_errors.append(np.mean(np.abs(dft_batch(noisy, grid)[0] - exact) ** 2))
    rms = float(np.sqrt(np.mean(sq_errors)))
    logger.debug(f"Shot-noise RMS at {shots} shots over {trials} trials: {rms:.3e}")
    return rms
