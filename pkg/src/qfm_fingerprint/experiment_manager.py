#!/usr/bin/env python3

import asyncio
import logging
from dataclasses import dataclass
from itertools import product
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd

from .circuits import AnsatzKind, FeatureMapSpec, ModelSpec
from .errors import ConfigError
from .expressibility import expressibility, pair_count
from .fingerprint import analyze, sample_coefficients, sample_count
from .fourier_data import make_dataset, random_target
from .hep import HEP_AXES, HepDatasetConfig, train_hep
from .runner import WorkerPool
from .trainer import DEFAULT_EPOCHS, DEFAULT_LR, train

TABLE_COLUMNS = [
    "ansatz", "n", "L", "D", "mean_mse", "std_mse", "fcc", "fcc_stderr",
    "weighted_fcc", "expressibility_kl", "expressibility_complement",
    "samples", "pairs", "seeds",
]

TASKS = ("fourier", "hep")


@dataclass
class GridSettings:
    """One grid over ansatzes; ``task`` picks Fourier-series or event regression"""

    n: int
    layers: int
    dims: int = 1
    axes: Optional[Sequence[str]] = None
    model_seeds: Sequence[int] = (0, 1, 2)
    data_seeds: Sequence[int] = (0, 1, 2)
    epochs: int = DEFAULT_EPOCHS
    lr: float = DEFAULT_LR
    preset: str = "desk"
    samples: Optional[int] = None
    pairs: Optional[int] = None
    bins: int = 75
    master_seed: int = 0
    task: str = "fourier"
    grid_points: Optional[int] = None
    events: int = 5000
    batch_size: int = 256

    def __post_init__(self):
        if self.task not in TASKS:
            raise ConfigError(f"Unknown task '{self.task}' (known: {', '.join(TASKS)})")

    def spec_for(self, ansatz: AnsatzKind) -> ModelSpec:
        if self.axes:
            axes = tuple(self.axes)
        elif self.task == "hep":
            axes = HEP_AXES
        else:
            axes = ("Y",) * self.dims
        return ModelSpec(self.n, self.layers, ansatz, FeatureMapSpec(axes))

    def sizes(self, ansatz: AnsatzKind) -> Tuple[int, int]:
        """(FCC samples, fidelity pairs); unset counts follow the preset for this ansatz"""
        spec = self.spec_for(ansatz)
        return (
            self.samples or sample_count(spec, self.preset),
            self.pairs or pair_count(spec, self.preset),
        )

    def hep_config(self, model_seed: int, data_seed: int) -> HepDatasetConfig:
        return HepDatasetConfig(
            events=self.events,
            K=self.grid_points,
            data_seed=data_seed,
            model_seed=model_seed,
            batch_size=self.batch_size,
            epochs=self.epochs,
            lr=self.lr,
        )


@dataclass
class ExperimentTable:
    table: pd.DataFrame
    runs: pd.DataFrame

    def scatter(self) -> pd.DataFrame:
        """MSE against both predictors, one row per ansatz"""
        return self.table[["ansatz", "fcc", "expressibility_complement", "mean_mse", "std_mse"]]


class ExperimentManager:
    """Runs the (ansatz × model seed × data seed) training grid and its metrics"""

    def __init__(
        self,
        settings: GridSettings,
        workers: Optional[int] = None,
        event_data: Optional[pd.DataFrame] = None,
    ):
        self.logger = logging.getLogger("experiment_manager")
        self.settings = settings
        self.pool = WorkerPool(workers)
        self.workers = workers
        self.event_data = event_data
        self.status: Dict[str, str] = {}

    def _train_one(self, key):
        ansatz, model_seed, data_seed = key
        s = self.settings
        spec = s.spec_for(ansatz)
        row = {"ansatz": ansatz.value, "model_seed": model_seed, "data_seed": data_seed}
        if s.task == "hep":
            result, report = train_hep(spec, s.hep_config(model_seed, data_seed), self.event_data)
            row.update(
                initial_val_loss=result.extra["initial_val_loss"],
                final_val_loss=result.extra["final_val_loss"],
                val_mse=report.val_mse,
                # held-out events score the grid
                final_mse=report.test_mse,
            )
            return row
        dataset = make_dataset(random_target(spec.max_freq, spec.dims, data_seed), s.grid_points)
        result = train(spec, dataset, s.epochs, s.lr, model_seed, data_seed=data_seed)
        row.update(initial_mse=result.initial_loss, final_mse=result.final_mse)
        return row

    def _metrics(self, ansatz: AnsatzKind) -> Dict:
        s = self.settings
        spec = s.spec_for(ansatz)
        samples, pairs = s.sizes(ansatz)
        report = analyze(sample_coefficients(spec, samples, s.master_seed, workers=self.workers))
        expr = expressibility(spec, pairs, s.bins, s.master_seed, workers=self.workers)
        return {
            "fcc": report.fcc,
            "fcc_stderr": report.stderr,
            "weighted_fcc": report.weighted["inverse_linear"],
            "expressibility_kl": expr.kl,
            "expressibility_complement": expr.complement,
            "samples": samples,
            "pairs": pairs,
        }

    async def run(self, ansatzes: Sequence[AnsatzKind]) -> ExperimentTable:
        """Train every grid point, then compute FCC and expressibility per ansatz"""
        s = self.settings
        keys = list(product(ansatzes, s.model_seeds, s.data_seeds))
        try:
            self.logger.info(
                f"Running {len(keys)} {s.task} training runs over {len(ansatzes)} ansatzes"
            )
            for ansatz in ansatzes:
                self.status[ansatz.value] = "training"
            runs = await self.pool.gather(self._train_one, keys)
            for ansatz in ansatzes:
                self.status[ansatz.value] = "metrics"
            metrics = await self.pool.gather(self._metrics, ansatzes)
            rows = []
            for ansatz, extra in zip(ansatzes, metrics):
                mine = [r for r in runs if r["ansatz"] == ansatz.value]
                rows.append(self._summarize(ansatz, mine, extra))
                self.status[ansatz.value] = "done"
            return ExperimentTable(
                pd.DataFrame(rows, columns=TABLE_COLUMNS), pd.DataFrame(runs)
            )
        except Exception as e:
            self.logger.error(f"Experiment grid failed: {e}")
            raise

    def _summarize(self, ansatz: AnsatzKind, runs: List[Dict], metrics: Dict) -> Dict:
        s = self.settings
        per_model = [
            np.mean([r["final_mse"] for r in runs if r["model_seed"] == m])
            for m in s.model_seeds
        ]
        row = {
            "ansatz": ansatz.value,
            "n": s.n,
            "L": s.layers,
            "D": s.spec_for(ansatz).dims,
            "mean_mse": float(np.mean([r["final_mse"] for r in runs])),
            # spread of the per-model-seed means over data seeds
            "std_mse": float(np.std(per_model)),
            "seeds": len(runs),
        }
        row.update(metrics)
        self.logger.info(
            f"{ansatz.value}: MSE {row['mean_mse']:.4g} ± {row['std_mse']:.2g}, "
            f"FCC {row['fcc']:.4g}, KL {row['expressibility_kl']:.4g}"
        )
        return row

    def get_status(self) -> Dict[str, str]:
        return dict(self.status)


def experiment_grid(
    ansatzes: Sequence,
    n: int,
    L: int,
    D: int = 1,
    model_seeds: Sequence[int] = (0, 1, 2),
    data_seeds: Sequence[int] = (0, 1, 2),
    epochs: int = DEFAULT_EPOCHS,
    lr: float = DEFAULT_LR,
    workers: Optional[int] = None,
    event_data: Optional[pd.DataFrame] = None,
    **options,
) -> ExperimentTable:
    if not ansatzes or not model_seeds or not data_seeds:
        raise ValueError("Ansatz and seed lists must be non-empty")
    kinds = list(dict.fromkeys(
        a if isinstance(a, AnsatzKind) else AnsatzKind.parse(a) for a in ansatzes
    ))
    settings = GridSettings(
        n, L, D, model_seeds=tuple(model_seeds), data_seeds=tuple(data_seeds),
        epochs=epochs, lr=lr, **options,
    )
    return asyncio.run(ExperimentManager(settings, workers, event_data).run(kinds))
