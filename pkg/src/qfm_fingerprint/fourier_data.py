#!/usr/bin/env python3
"""Random truncated Fourier series targets and their Nyquist-sampled datasets"""

import logging
from dataclasses import dataclass
from typing import Dict, Optional

import numpy as np

from .errors import DimensionMismatchError, SymmetryError
from .seeding import make_rng
from .spectral import CoefficientTensor, half_spectrum_index, make_input_grid

logger = logging.getLogger("fourier_data")

IMAG_TOLERANCE = 1e-10


@dataclass
class FourierSeriesTarget:
    """Coefficients ĉ_ω over ω ∈ [-nL, nL]^D; Hermitian unless built with symmetric=False"""

    coefficients: CoefficientTensor
    seed: Optional[int] = None
    symmetric: bool = True

    @property
    def D(self) -> int:
        return self.coefficients.D

    @property
    def nL(self) -> int:
        return self.coefficients.max_freq

    def amplitude_bound(self) -> float:
        """Σ |ĉ_ω|, an upper bound on |f̂(x)|"""
        return float(np.sum(np.abs(self.coefficients.values)))

    def metadata(self) -> Dict:
        return {"D": self.D, "nL": self.nL, "seed": self.seed, "symmetric": self.symmetric}


def _unit_disc_draw(rng: np.random.Generator) -> complex:
    """√r·exp(-i2πp) with r, p ~ U(0, 1]"""
    r = 1.0 - rng.random()
    p = 1.0 - rng.random()
    return np.sqrt(r) * np.exp(-2j * np.pi * p)


def random_target(nL: int, D: int, seed: int, symmetric: bool = True) -> FourierSeriesTarget:
    """Random coefficients inside the unit circle.

    The canonical half-spectrum is drawn and mirrored as conjugates so the
    series is real; ĉ_0 keeps only the magnitude √r. With symmetric=False
    every coefficient is drawn independently and the series is complex.
    """
    if nL < 1:
        raise ValueError(f"Maximum frequency must be at least 1, got {nL}")
    rng = make_rng(seed, "target")
    K = 2 * nL + 1
    values = np.zeros((K,) * D, dtype=np.complex128)
    if not symmetric:
        for pos in np.ndindex(*values.shape):
            values[pos] = _unit_disc_draw(rng)
    else:
        for omega in half_spectrum_index(nL, D).frequencies:
            pos = tuple(w + nL for w in omega)
            mirror = tuple(nL - w for w in omega)
            if not any(omega):
                values[pos] = np.sqrt(1.0 - rng.random())
                continue
            c = _unit_disc_draw(rng)
            values[pos] = c
            values[mirror] = np.conj(c)
    return FourierSeriesTarget(CoefficientTensor(D, nL, values), seed, symmetric)


def target_from_coefficients(coefficients: Dict, D: int = 1) -> FourierSeriesTarget:
    """Target from an explicit {ω: ĉ_ω} mapping; missing frequencies are zero"""
    keys = [tuple(np.atleast_1d(w).tolist()) for w in coefficients]
    nL = max(max(abs(c) for c in w) for w in keys)
    values = np.zeros((2 * nL + 1,) * D, dtype=np.complex128)
    for w, c in zip(keys, coefficients.values()):
        if len(w) != D:
            raise DimensionMismatchError(f"Frequency {w} is not {D}-dimensional")
        values[tuple(x + nL for x in w)] = c
    tensor = CoefficientTensor(D, nL, values)
    return FourierSeriesTarget(tensor, None, tensor.hermitian_error() < IMAG_TOLERANCE)


def _series(t: FourierSeriesTarget, x: np.ndarray) -> np.ndarray:
    x = np.asarray(x, dtype=np.float64)
    points = np.atleast_2d(x) if x.ndim <= 1 else x
    if x.ndim == 1 and t.D == 1 and x.shape[0] != 1:
        points = x[:, None]
    if points.shape[-1] != t.D:
        raise DimensionMismatchError(f"Expected {t.D}-dimensional inputs, got {points.shape}")
    freqs = t.coefficients.freqs
    omegas = np.stack(
        [g.reshape(-1) for g in np.meshgrid(*([freqs] * t.D), indexing="ij")], axis=1
    )
    phases = np.exp(1j * points @ omegas.T)
    return phases @ t.coefficients.values.reshape(-1)


def evaluate_target_complex(t: FourierSeriesTarget, x: np.ndarray) -> np.ndarray:
    return _series(t, x)


def evaluate_target(t: FourierSeriesTarget, x: np.ndarray):
    """Σ_ω ĉ_ω exp(iω·x); a float for one point, an array for a batch"""
    values = _series(t, x)
    residue = float(np.max(np.abs(values.imag))) if values.size else 0.0
    if residue > IMAG_TOLERANCE:
        logger.error(f"Target series has imaginary residue {residue:.3e}")
        raise SymmetryError(f"Target is not Hermitian: imaginary residue {residue:.3e}")
    real = values.real
    x = np.asarray(x)
    if x.ndim == 0 or (x.ndim == 1 and x.shape[0] == t.D):
        return float(real[0])
    return real


@dataclass
class RegressionDataset:
    inputs: np.ndarray
    targets: np.ndarray
    target: Optional[FourierSeriesTarget] = None

    def __post_init__(self):
        self.inputs = np.atleast_2d(np.asarray(self.inputs, dtype=np.float64))
        self.targets = np.asarray(self.targets).reshape(-1)
        if self.inputs.shape[0] != self.targets.shape[0]:
            raise DimensionMismatchError(
                f"{self.inputs.shape[0]} inputs but {self.targets.shape[0]} targets"
            )

    def __len__(self) -> int:
        return self.targets.shape[0]

    @property
    def D(self) -> int:
        return self.inputs.shape[1]

    @property
    def is_complex(self) -> bool:
        return np.iscomplexobj(self.targets)


def make_dataset(t: FourierSeriesTarget, K: Optional[int] = None) -> RegressionDataset:
    """Exact target values on the uniform grid (K = 2nL+1 by default)"""
    grid = make_input_grid(t.nL, t.D, K)
    points = grid.points
    if t.symmetric:
        targets = evaluate_target(t, points)
    else:
        targets = evaluate_target_complex(t, points)
    logger.debug(f"Dataset of {grid.size} points for a D={t.D}, nL={t.nL} target")
    return RegressionDataset(points, targets, t)
