#!/usr/bin/env python3
"""Expressibility: KL divergence of sampled state fidelities from the Haar distribution.

For Haar-random states of dimension N = 2^n the fidelity F = |⟨ψ|φ⟩|² has density
(N - 1)(1 - F)^(N - 2), so a bin [lo, hi] carries mass (1 - lo)^(N-1) - (1 - hi)^(N-1).
"""

import logging
from dataclasses import dataclass
from typing import Callable, Dict, List, Optional, Sequence

import numpy as np
from scipy.special import rel_entr

from .circuits import ModelSpec, ansatz_circuit
from .errors import ConfigError
from .runner import WorkerPool, chunk_ranges
from .seeding import uniform_parameters
from .statevec import GateOp, fidelity_batch, simulate

logger = logging.getLogger("expressibility")

DEFAULT_BINS = 75
DESK_PAIRS = 5000
PAIRS_PER_CHUNK = 2000

CircuitBuilder = Callable[[np.ndarray], Sequence[GateOp]]


def haar_bin_mass(lo: float, hi: float, n: int) -> float:
    """Haar probability that the fidelity of two n-qubit states lies in [lo, hi]"""
    if not 0.0 <= lo < hi <= 1.0:
        raise ValueError(f"Invalid fidelity interval [{lo}, {hi}]")
    exponent = 2**n - 1
    return float((1.0 - lo) ** exponent - (1.0 - hi) ** exponent)


def haar_bin_masses(edges: np.ndarray, n: int) -> np.ndarray:
    edges = np.asarray(edges, dtype=np.float64)
    tail = (1.0 - edges) ** (2**n - 1)
    return tail[:-1] - tail[1:]


@dataclass
class FidelityHistogram:
    edges: np.ndarray
    counts: np.ndarray

    @property
    def bins(self) -> int:
        return len(self.counts)

    @property
    def M_pairs(self) -> int:
        return int(self.counts.sum())

    @property
    def frequencies(self) -> np.ndarray:
        return self.counts / self.M_pairs

    def records(self, n: int) -> List[Dict]:
        haar = haar_bin_masses(self.edges, n)
        return [
            {
                "lo": float(self.edges[b]),
                "hi": float(self.edges[b + 1]),
                "count": int(self.counts[b]),
                "frequency": float(self.frequencies[b]),
                "haar_mass": float(haar[b]),
            }
            for b in range(self.bins)
        ]


def fidelity_histogram(fidelities: np.ndarray, bins: int = DEFAULT_BINS) -> FidelityHistogram:
    """Uniform bins on [0, 1]; F = 1 lands in the last bin"""
    if bins < 2:
        raise ValueError(f"Need at least 2 bins, got {bins}")
    counts, edges = np.histogram(np.clip(fidelities, 0.0, 1.0), bins=bins, range=(0.0, 1.0))
    return FidelityHistogram(edges, counts)


@dataclass
class ExpressibilityResult:
    kl: float
    n: int
    seed: Optional[int]
    histogram: FidelityHistogram

    @property
    def bins(self) -> int:
        return self.histogram.bins

    @property
    def M_pairs(self) -> int:
        return self.histogram.M_pairs

    @property
    def complement(self) -> float:
        """exp(-KL): 1 for a Haar-like ansatz, towards 0 for an idle one"""
        return float(np.exp(-self.kl))

    def summary(self) -> Dict:
        return {
            "kl": self.kl,
            "complement": self.complement,
            "bins": self.bins,
            "M_pairs": self.M_pairs,
            "n": self.n,
            "seed": self.seed,
        }


def expressibility_from_fidelities(
    fidelities: np.ndarray, n: int, bins: int = DEFAULT_BINS, seed: Optional[int] = None
) -> ExpressibilityResult:
    """KL(empirical ‖ Haar) of a fidelity sample"""
    fidelities = np.asarray(fidelities, dtype=np.float64)
    if fidelities.size < 1:
        raise ValueError("Need at least one fidelity")
    histogram = fidelity_histogram(fidelities, bins)
    q = haar_bin_masses(histogram.edges, n)
    p = histogram.frequencies
    underflow = (q <= 0) & (p > 0)
    if underflow.any():
        logger.warning(f"Haar mass underflows in {int(underflow.sum())} occupied bins")
        q = np.maximum(q, np.finfo(np.float64).tiny)
    kl = float(np.sum(rel_entr(p, q)))
    return ExpressibilityResult(max(kl, 0.0), n, seed, histogram)


def sample_circuit_fidelities(
    n: int,
    circuit: CircuitBuilder,
    param_count: int,
    M_pairs: int,
    seed: int,
    workers: Optional[int] = None,
    role: str = "fidelity",
) -> np.ndarray:
    """Fidelities of U(θ_a)|0⟩ and U(θ_b)|0⟩; pair p uses parameter streams 2p and 2p+1"""
    if M_pairs < 1:
        raise ValueError(f"Need at least one pair, got {M_pairs}")

    def run(pairs: range) -> np.ndarray:
        a = uniform_parameters(seed, role, 2 * np.array(pairs), param_count)
        b = uniform_parameters(seed, role, 2 * np.array(pairs) + 1, param_count)
        psi_a = simulate(n, circuit(a), len(pairs))
        psi_b = simulate(n, circuit(b), len(pairs))
        return fidelity_batch(psi_a, psi_b)

    parts = WorkerPool(workers).map(run, chunk_ranges(M_pairs, PAIRS_PER_CHUNK))
    return np.concatenate(parts)


def sample_fidelities(
    spec: ModelSpec,
    M_pairs: int,
    seed: int,
    workers: Optional[int] = None,
    role: str = "fidelity",
) -> np.ndarray:
    """State fidelities of the ansatz-only circuit under independent uniform θ"""
    return sample_circuit_fidelities(
        spec.n,
        lambda theta: ansatz_circuit(spec, theta),
        spec.param_count,
        M_pairs,
        seed,
        workers,
        role,
    )


def haar_random_states(n: int, count: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-distributed states: normalized complex Gaussian vectors"""
    z = rng.standard_normal((count, 2**n)) + 1j * rng.standard_normal((count, 2**n))
    return z / np.linalg.norm(z, axis=1, keepdims=True)


def haar_fidelities(n: int, M_pairs: int, rng: np.random.Generator) -> np.ndarray:
    return fidelity_batch(haar_random_states(n, M_pairs, rng), haar_random_states(n, M_pairs, rng))


def pair_count(spec: ModelSpec, preset: str = "desk") -> int:
    """Fidelity pairs for a preset; "paper" pairs up 500·|θ|·2^n parameter samples"""
    if preset == "desk":
        return DESK_PAIRS
    if preset == "paper":
        return max(1, 500 * spec.param_count * 2**spec.n // 2)
    raise ConfigError(f"Unknown preset: {preset}")


def expressibility(
    spec: ModelSpec,
    M_pairs: int,
    bins: int = DEFAULT_BINS,
    seed: int = 0,
    workers: Optional[int] = None,
    role: str = "fidelity",
) -> ExpressibilityResult:
    if bins < 2:
        raise ValueError(f"Need at least 2 bins, got {bins}")
    fidelities = sample_fidelities(spec, M_pairs, seed, workers, role)
    result = expressibility_from_fidelities(fidelities, spec.n, bins, seed)
    logger.info(f"Expressibility of {spec.label()}: KL {result.kl:.4g} over {M_pairs} pairs")
    return result
