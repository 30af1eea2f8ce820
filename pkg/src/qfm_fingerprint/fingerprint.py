#!/usr/bin/env python3
"""Fourier fingerprints: correlations between coefficients over random parameters"""

import logging
import math
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

import numpy as np

from .circuits import ModelSpec
from .errors import ConfigError, DegenerateInputError
from .runner import WorkerPool, chunk_ranges
from .seeding import make_rng, uniform_parameters
from .spectral import (
    HalfSpectrumIndex,
    degeneracy_vector,
    half_spectrum_index,
    make_input_grid,
    model_coefficients_batch,
)

logger = logging.getLogger("fingerprint")

ZERO_VARIANCE = 1e-24

# Rows of (sample, grid point) simulated together in one pass
ROWS_PER_CHUNK = 20000

WEIGHTINGS = ("uniform", "inverse_linear", "variance")
PEARSON_MODES = ("complex", "split")


@dataclass
class CoefficientSamples:
    """M × |half-spectrum| coefficient matrix; row m comes from stream (seed, m)"""

    index: HalfSpectrumIndex
    master_seed: int
    matrix: np.ndarray
    spec: Optional[ModelSpec] = None

    @property
    def M(self) -> int:
        return self.matrix.shape[0]

    def column(self, omega) -> np.ndarray:
        omega = tuple(np.atleast_1d(omega).tolist())
        return self.matrix[:, self.index.frequencies.index(omega)]


def sample_coefficients(
    spec: ModelSpec,
    M: int,
    master_seed: int,
    K: Optional[int] = None,
    workers: Optional[int] = None,
) -> CoefficientSamples:
    """Half-spectrum coefficients of M models with θ ~ U[0, 2π)"""
    if M < 2:
        raise ValueError(f"Need at least 2 samples for correlations, got {M}")
    index = half_spectrum_index(spec.max_freq, spec.dims)
    grid = make_input_grid(spec.max_freq, spec.dims, K)
    positions = (slice(None),) + index.positions(grid.K)
    per_chunk = max(1, ROWS_PER_CHUNK // grid.size)

    def run(rows: range) -> np.ndarray:
        thetas = uniform_parameters(master_seed, "theta", np.array(rows), spec.param_count)
        return model_coefficients_batch(spec, thetas, grid.K)[positions]

    logger.info(
        f"Sampling {M} coefficient sets for {spec.label()} "
        f"({len(index)} frequencies, {spec.param_count} parameters)"
    )
    parts = WorkerPool(workers).map(run, chunk_ranges(M, per_chunk))
    return CoefficientSamples(index, master_seed, np.concatenate(parts, axis=0), spec)


@dataclass
class Fingerprint:
    """Symmetric |r| matrix over the canonical half-spectrum"""

    index: HalfSpectrumIndex
    R: np.ndarray
    M: int
    master_seed: int
    valid: np.ndarray
    mode: str = "complex"
    spec: Optional[ModelSpec] = None

    @property
    def size(self) -> int:
        return self.R.shape[0]

    @property
    def flagged(self) -> List[Tuple[int, ...]]:
        """Frequencies whose coefficient never varied"""
        return [w for w, ok in zip(self.index.frequencies, self.valid) if not ok]

    def lower_pairs(self) -> Tuple[np.ndarray, np.ndarray]:
        """Strict lower-triangle pairs among non-flagged columns"""
        rows, cols = np.tril_indices(self.size, k=-1)
        keep = self.valid[rows] & self.valid[cols]
        return rows[keep], cols[keep]

    def metadata(self) -> Dict:
        data = {
            "M": self.M,
            "master_seed": self.master_seed,
            "mode": self.mode,
            "frequencies": [list(w) for w in self.index.frequencies],
            "flagged": [list(w) for w in self.flagged],
        }
        if self.spec is not None:
            data["spec"] = self.spec.to_dict()
        return data


def _centred(X: np.ndarray, mode: str) -> Tuple[np.ndarray, int]:
    """Column-centred samples and their degrees of freedom.

    ``split`` centres real and imaginary parts on their own means before
    stacking them as 2M real samples.
    """
    if mode == "split":
        parts = [X.real - X.real.mean(axis=0), X.imag - X.imag.mean(axis=0)]
        return np.concatenate(parts, axis=0), 2 * (X.shape[0] - 1)
    return X - X.mean(axis=0, keepdims=True), X.shape[0] - 1


def pearson_matrix(samples: CoefficientSamples, mode: str = "complex") -> Fingerprint:
    """|r(ω, ω′)| between every pair of half-spectrum coefficients.

    ``complex`` correlates c_ω with conj(c_ω′) and takes the modulus;
    ``split`` stacks real and imaginary parts as separate real samples.
    """
    if mode not in PEARSON_MODES:
        raise ValueError(f"Unknown Pearson mode: {mode}")
    if samples.M < 2:
        raise ValueError(f"Need at least 2 samples, got {samples.M}")

    centred, dof = _centred(samples.matrix, mode)
    norms = np.sqrt(np.sum(np.abs(centred) ** 2, axis=0))
    variance = norms**2 / dof
    valid = variance >= ZERO_VARIANCE
    if not valid.any():
        raise DegenerateInputError("Every coefficient is constant across samples")
    if not valid.all():
        flagged = [w for w, ok in zip(samples.index.frequencies, valid) if not ok]
        logger.warning(f"Zero-variance coefficients excluded: {flagged}")

    cov = centred.T @ np.conj(centred)
    denom = np.outer(norms, norms)
    R = np.zeros(cov.shape)
    both = np.outer(valid, valid)
    R[both] = np.abs(cov[both]) / denom[both]
    R = np.clip(0.5 * (R + R.T), 0.0, 1.0)
    np.fill_diagonal(R, 1.0)
    return Fingerprint(
        samples.index, R, samples.M, samples.master_seed, valid, mode, samples.spec
    )


def _require_pairs(fp: Fingerprint) -> None:
    if fp.size < 2:
        raise ValueError(f"Correlation needs at least 2 frequencies, got {fp.size}")


def fcc(fp: Fingerprint) -> float:
    """Mean |r| over distinct frequency pairs"""
    _require_pairs(fp)
    rows, cols = fp.lower_pairs()
    if rows.size == 0:
        logger.warning("No pair of varying coefficients; FCC set to 0")
        return 0.0
    return float(np.mean(fp.R[rows, cols]))


def weighted_fcc(
    fp: Fingerprint, weighting: str = "uniform", profile: Optional["VarianceProfile"] = None
) -> float:
    """Weighted mean |r| over distinct pairs.

    inverse_linear: w = 1 / (‖ω‖₁ + ‖ω′‖₁), pairs with both norms zero dropped.
    variance: w = σ(ω)σ(ω′) from a variance profile of the same samples.
    """
    if weighting not in WEIGHTINGS:
        raise ValueError(f"Unknown weighting: {weighting}")
    if weighting == "uniform":
        return fcc(fp)
    _require_pairs(fp)
    rows, cols = fp.lower_pairs()
    if weighting == "inverse_linear":
        norms = fp.index.l1_norms().astype(float)
        total = norms[rows] + norms[cols]
        keep = total > 0
        rows, cols = rows[keep], cols[keep]
        weights = 1.0 / total[keep]
    else:
        if profile is None:
            raise ValueError("Variance weighting needs a variance profile")
        sigma = np.sqrt(profile.total)
        weights = sigma[rows] * sigma[cols]
    if weights.sum() <= 0:
        return 0.0
    return float(np.sum(fp.R[rows, cols] * weights) / weights.sum())


@dataclass
class VarianceProfile:
    index: HalfSpectrumIndex
    var_real: np.ndarray
    var_imag: np.ndarray
    var_abs: np.ndarray
    mean: np.ndarray

    @property
    def total(self) -> np.ndarray:
        """Var(c_ω) = Var(Re c_ω) + Var(Im c_ω)"""
        return self.var_real + self.var_imag

    def records(self) -> List[Dict]:
        rows = []
        for i, (label, w) in enumerate(zip(self.index.labels(), self.index.frequencies)):
            rows.append(
                {
                    "omega": label,
                    "l1": int(sum(abs(c) for c in w)),
                    "var_real": float(self.var_real[i]),
                    "var_imag": float(self.var_imag[i]),
                    "var_abs": float(self.var_abs[i]),
                    "mean_real": float(self.mean[i].real),
                    "mean_imag": float(self.mean[i].imag),
                }
            )
        return rows


def variance_profile(samples: CoefficientSamples) -> VarianceProfile:
    """Unbiased per-coefficient variances"""
    if samples.M < 2:
        raise ValueError(f"Need at least 2 samples, got {samples.M}")
    X = samples.matrix
    return VarianceProfile(
        index=samples.index,
        var_real=np.var(X.real, axis=0, ddof=1),
        var_imag=np.var(X.imag, axis=0, ddof=1),
        var_abs=np.var(np.abs(X), axis=0, ddof=1),
        mean=X.mean(axis=0),
    )


def surrogate_samples(n: int, L: int, M: int, seed: int, D: int = 1) -> CoefficientSamples:
    """Independent complex Gaussians with variance ∝ degeneracy of each frequency"""
    if M < 2:
        raise ValueError(f"Need at least 2 samples, got {M}")
    index = half_spectrum_index(n * L, D)
    scale = 4.0 ** (n * L * D)
    variance = np.array([degeneracy_vector(n, L, w) for w in index.frequencies]) / scale
    sigma = np.sqrt(variance / 2.0)
    F = len(index)
    matrix = np.empty((M, F), dtype=np.complex128)
    for m in range(M):
        draw = make_rng(seed, "surrogate", m).standard_normal((2, F))
        matrix[m] = sigma * (draw[0] + 1j * draw[1])
    return CoefficientSamples(index, seed, matrix)


def fcc_stderr(fp: Fingerprint, M: Optional[int] = None) -> float:
    """(1/P) Σ √((1 - r²) / (M - 1)²) over the P distinct pairs"""
    M = fp.M if M is None else M
    if M < 2:
        raise ValueError(f"Need at least 2 samples, got {M}")
    rows, cols = fp.lower_pairs()
    if rows.size == 0:
        return 0.0
    r = fp.R[rows, cols]
    return float(np.mean(np.sqrt(np.clip(1.0 - r**2, 0.0, None)) / (M - 1)))


def fit_variance_decay(profile: VarianceProfile, use: str = "abs") -> Tuple[float, float]:
    """Least-squares (α, β) for Var ≈ β·exp(-α‖ω‖₁)"""
    variance = profile.var_abs if use == "abs" else profile.total
    norms = profile.index.l1_norms()
    keep = variance > ZERO_VARIANCE
    if len(set(norms[keep].tolist())) < 2:
        raise DegenerateInputError("Need non-zero variances at two distinct ‖ω‖₁ to fit a decay")
    slope, intercept = np.polyfit(norms[keep], np.log(variance[keep]), 1)
    return float(-slope), float(np.exp(intercept))


def hoeffding_samples(epsilon: float, delta: float) -> int:
    """Smallest M with 2·exp(-2Mε²) ≤ δ"""
    if epsilon <= 0:
        raise ValueError(f"Epsilon must be positive, got {epsilon}")
    if not 0 < delta < 1:
        raise ValueError(f"Delta must lie in (0, 1), got {delta}")
    return int(math.ceil(math.log(2.0 / delta) / (2.0 * epsilon**2)))


def sample_count(spec: ModelSpec, preset: str = "desk") -> int:
    """Default parameter-sample count for a preset"""
    if preset == "desk":
        return 200 * spec.param_count
    if preset == "paper":
        return 500 * spec.param_count * 2**spec.n * spec.dims
    raise ConfigError(f"Unknown preset: {preset}")


@dataclass
class FingerprintReport:
    """Everything one fingerprint run produces"""

    fingerprint: Fingerprint
    profile: VarianceProfile
    fcc: float
    stderr: float
    weighted: Dict[str, float] = field(default_factory=dict)

    def summary(self) -> Dict:
        data = self.fingerprint.metadata()
        data.update({"fcc": self.fcc, "fcc_stderr": self.stderr, "weighted_fcc": self.weighted})
        return data


def analyze(samples: CoefficientSamples, mode: str = "complex") -> FingerprintReport:
    """Fingerprint, FCC, stderr and weighted FCCs of one sample matrix"""
    fp = pearson_matrix(samples, mode)
    profile = variance_profile(samples)
    weighted = {w: weighted_fcc(fp, w, profile) for w in WEIGHTINGS}
    report = FingerprintReport(fp, profile, weighted["uniform"], fcc_stderr(fp), weighted)
    logger.info(f"FCC {report.fcc:.4g} ± {report.stderr:.2g} over {fp.M} samples")
    return report
