#!/usr/bin/env python3

import logging
import time
from typing import Dict, Optional, Sequence

import pandas as pd
import psutil

from ..circuits import AnsatzKind, FeatureMapSpec, ModelSpec
from ..expressibility import DEFAULT_BINS, expressibility
from ..fingerprint import analyze, sample_coefficients


class MetricBenchmark:
    """Wall time of the FCC against expressibility at matched sample counts.

    Both metrics read the same parameter stream: the FCC uses rows 0..M-1 and
    expressibility pairs rows (2p, 2p+1), p < M/2.
    """

    def __init__(self, ansatz: str = "C15", layers: int = 1, workers: Optional[int] = None):
        self.logger = logging.getLogger("metric_bench")
        self.ansatz = AnsatzKind.parse(ansatz)
        self.layers = layers
        self.workers = workers
        self.process = psutil.Process()

    def _rss_mb(self) -> float:
        return self.process.memory_info().rss / (1024**2)

    def measure(self, n: int, samples: Optional[int] = None, seed: int = 0) -> Dict:
        spec = ModelSpec(n, self.layers, self.ansatz, FeatureMapSpec(("Y",)))
        samples = samples or 200 * spec.param_count
        samples += samples % 2
        pairs = samples // 2

        start = time.perf_counter()
        report = analyze(sample_coefficients(spec, samples, seed, workers=self.workers))
        fcc_seconds = time.perf_counter() - start

        start = time.perf_counter()
        expr = expressibility(spec, pairs, DEFAULT_BINS, seed, self.workers, role="theta")
        expr_seconds = time.perf_counter() - start

        row = {
            "n": n,
            "params": spec.param_count,
            "samples": samples,
            "pairs": pairs,
            "fcc_seconds": fcc_seconds,
            "expressibility_seconds": expr_seconds,
            "fcc": report.fcc,
            "expressibility_kl": expr.kl,
            "rss_mb": self._rss_mb(),
        }
        self.logger.info(
            f"n={n}: FCC {fcc_seconds:.2f}s, expressibility {expr_seconds:.2f}s "
            f"({samples} samples, RSS {row['rss_mb']:.0f} MB)"
        )
        return row

    def run(self, qubits: Sequence[int], samples: Optional[int] = None, seed: int = 0) -> pd.DataFrame:
        try:
            return pd.DataFrame([self.measure(n, samples, seed) for n in qubits])
        except Exception as e:
            self.logger.error(f"Benchmark failed: {e}")
            raise
