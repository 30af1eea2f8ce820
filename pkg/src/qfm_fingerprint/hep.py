#!/usr/bin/env python3
"""Leading-jet transverse momentum regression from two-particle collision events"""

import logging
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, Tuple, Union

import numpy as np
import pandas as pd
from scipy.special import huber, rel_entr
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.preprocessing import MinMaxScaler, QuantileTransformer
from sklearn.utils.validation import check_is_fitted

from .circuits import AnsatzKind, FeatureMapSpec, ModelSpec, evaluate_batch
from .errors import (
    ConfigError,
    DegenerateInputError,
    DimensionMismatchError,
    MalformedEventError,
)
from .seeding import make_rng
from .spectral import make_input_grid
from .trainer import AdamState, TrainResult, adam_step, initial_parameters

EVENT_COLUMNS = ["E1", "px1", "py1", "pz1", "E2", "px2", "py2", "pz2", "leading_pt"]

KL_BINS = 32
KL_WEIGHT = 0.001
PROBABILITY_FLOOR = 1e-9
HEP_AXES = ("X", "Y")

PathLike = Union[str, Path]


@dataclass(frozen=True)
class EventRecord:
    E1: float
    px1: float
    py1: float
    pz1: float
    E2: float
    px2: float
    py2: float
    pz2: float
    leading_pt: float = 0.0

    def swapped(self) -> "EventRecord":
        return EventRecord(
            self.E2, self.px2, self.py2, self.pz2,
            self.E1, self.px1, self.py1, self.pz1,
            self.leading_pt,
        )


def _features(E1, pz1, E2, pz2) -> Tuple[np.ndarray, np.ndarray]:
    E1, pz1, E2, pz2 = (np.asarray(a, dtype=np.float64) for a in (E1, pz1, E2, pz2))
    if np.any(E1 <= 0) or np.any(E2 <= 0):
        raise MalformedEventError("Particle energies must be positive")
    radicand = (E1 + E2) ** 2 - (pz1 + pz2) ** 2
    # Rounding can push a massless pair just below zero
    tolerance = 1e-12 * (E1 + E2) ** 2
    if np.any(radicand < -tolerance):
        bad = int(np.argmin(radicand + tolerance))
        raise MalformedEventError(f"Event {bad} has an imaginary centre-of-mass energy")
    return np.sqrt(np.clip(radicand, 0.0, None)), np.abs(E1 - E2)


def derive_features(e: EventRecord) -> Tuple[float, float]:
    """(E_CM, E_Δ) of one event"""
    e_cm, e_delta = _features(e.E1, e.pz1, e.E2, e.pz2)
    return float(e_cm), float(e_delta)


def feature_matrix(events: pd.DataFrame) -> np.ndarray:
    """(N, 2) array of E_CM and E_Δ"""
    e_cm, e_delta = _features(events["E1"], events["pz1"], events["E2"], events["pz2"])
    return np.column_stack([e_cm, e_delta])


def validate_events(events: pd.DataFrame) -> pd.DataFrame:
    missing = [c for c in EVENT_COLUMNS if c not in events.columns]
    if missing:
        raise MalformedEventError(f"Event table lacks columns: {missing}")
    events = events[EVENT_COLUMNS].astype(np.float64)
    if events.isna().any().any():
        raise MalformedEventError("Event table contains missing values")
    feature_matrix(events)
    return events.reset_index(drop=True)


def load_events(path: PathLike) -> pd.DataFrame:
    """Read E1,px1,py1,pz1,E2,px2,py2,pz2,leading_pt; other columns are dropped"""
    try:
        events = pd.read_csv(path)
    except (OSError, pd.errors.ParserError) as e:
        raise MalformedEventError(f"Cannot read events from {path}: {e}") from e
    return validate_events(events)


def save_events(events: pd.DataFrame, path: PathLike) -> None:
    events[EVENT_COLUMNS].to_csv(path, index=False, float_format="%.17g")


def generate_synthetic_events(count: int, seed: int) -> pd.DataFrame:
    """Massless beams colliding head-on along z.

    E1, E2 ~ U(10, 500); pz1 = E1, pz2 = -E2, so E_CM = 2√(E1·E2).
    The leading jet carries pT = (E_CM / 2)·√(1 - u²) with u ~ U(-1, 1),
    the transverse momentum of a 2→2 scatter at polar cosine u.
    """
    if count < 1:
        raise ValueError(f"Event count must be at least 1, got {count}")
    rng = make_rng(seed, "events")
    E1 = rng.uniform(10.0, 500.0, count)
    E2 = rng.uniform(10.0, 500.0, count)
    u = rng.uniform(-1.0, 1.0, count)
    zeros = np.zeros(count)
    e_cm = 2.0 * np.sqrt(E1 * E2)
    return pd.DataFrame(
        {
            "E1": E1, "px1": zeros, "py1": zeros, "pz1": E1,
            "E2": E2, "px2": zeros, "py2": zeros, "pz2": -E2,
            "leading_pt": 0.5 * e_cm * np.sqrt(1.0 - u**2),
        },
        columns=EVENT_COLUMNS,
    )


def split_events(
    events: pd.DataFrame, ratios: Tuple[float, float, float], seed: int
) -> Tuple[pd.DataFrame, pd.DataFrame, pd.DataFrame]:
    """Shuffled train/validation/test split"""
    if len(ratios) != 3 or any(r < 0 for r in ratios) or abs(sum(ratios) - 1.0) > 1e-9:
        raise ConfigError(f"Split ratios must be three non-negative numbers summing to 1: {ratios}")
    order = make_rng(seed, "split").permutation(len(events))
    n_train = int(ratios[0] * len(events))
    n_val = int(ratios[1] * len(events))
    parts = np.split(order, [n_train, n_train + n_val])
    return tuple(events.iloc[p].reset_index(drop=True) for p in parts)


class UniformQuantileTransformer(BaseEstimator, TransformerMixin):
    """Maps each feature through its empirical CDF onto [0, 2π).

    The output is 2π·u·span with u the CDF value in [0, 1]. The default span
    (q - 1)/q for q reference quantiles puts q equally spaced training values on
    q equally spaced points below 2π; span = (K - 1)/K sends the top of the
    range to the last point of a K-point input grid instead of wrapping to 0.
    """

    def __init__(
        self,
        n_quantiles: int = 1000,
        subsample: int = 10000,
        random_state: int = 0,
        span: Optional[float] = None,
    ):
        self.n_quantiles = n_quantiles
        self.span = span
        self.subsample = subsample
        self.random_state = random_state

    def fit(self, X, y=None):
        X = np.asarray(X, dtype=np.float64)
        X = X.reshape(-1, 1) if X.ndim == 1 else X
        for column in range(X.shape[1]):
            if np.unique(X[:, column]).size < 2:
                raise DegenerateInputError(
                    f"Feature {column} is constant; a quantile map needs two distinct values"
                )
        self.n_quantiles_ = min(self.n_quantiles, X.shape[0])
        self.quantile_ = QuantileTransformer(
            n_quantiles=self.n_quantiles_,
            output_distribution="uniform",
            subsample=self.subsample,
            random_state=self.random_state,
        ).fit(X)
        return self

    def transform(self, X):
        check_is_fitted(self, "quantile_")
        X = np.asarray(X, dtype=np.float64)
        flat = X.ndim == 1
        u = self.quantile_.transform(X.reshape(-1, 1) if flat else X)
        q = self.n_quantiles_
        span = (q - 1) / q if self.span is None else self.span
        out = 2.0 * np.pi * u * span
        return out.reshape(-1) if flat else out


def fit_quantile_transformer(values) -> UniformQuantileTransformer:
    return UniformQuantileTransformer().fit(values)


def discretize_index(value, K: int) -> np.ndarray:
    """Index k of the nearest grid point 2πk/K, wrapping 2π back to 0"""
    if K < 2:
        raise ValueError(f"Grid size must be at least 2, got {K}")
    return np.mod(np.rint(np.asarray(value) * K / (2.0 * np.pi)), K).astype(int)


def discretize(value, K: int):
    """Snap onto the grid 2πk/K"""
    snapped = 2.0 * np.pi * discretize_index(value, K) / K
    return float(snapped) if np.ndim(snapped) == 0 else snapped


class TargetScaler(BaseEstimator, TransformerMixin):
    """MinMax map of the training pT range onto [-1, 1]"""

    def fit(self, y, X=None):
        y = np.asarray(y, dtype=np.float64).reshape(-1, 1)
        if y.size < 2 or np.ptp(y) <= 0:
            raise DegenerateInputError("Target range is empty; cannot scale to [-1, 1]")
        self.scaler_ = MinMaxScaler(feature_range=(-1.0, 1.0)).fit(y)
        return self

    def transform(self, y):
        check_is_fitted(self, "scaler_")
        return self.scaler_.transform(np.asarray(y, dtype=np.float64).reshape(-1, 1)).reshape(-1)

    def inverse_transform(self, y):
        check_is_fitted(self, "scaler_")
        return self.scaler_.inverse_transform(
            np.asarray(y, dtype=np.float64).reshape(-1, 1)
        ).reshape(-1)

    @property
    def data_range(self) -> Tuple[float, float]:
        return float(self.scaler_.data_min_[0]), float(self.scaler_.data_max_[0])


def scale_target(values) -> Tuple[np.ndarray, TargetScaler]:
    scaler = TargetScaler().fit(values)
    return scaler.transform(values), scaler


def _check_lengths(pred: np.ndarray, target: np.ndarray) -> None:
    if pred.shape != target.shape:
        raise DimensionMismatchError(f"Predictions {pred.shape} vs targets {target.shape}")


def kl_divergence_histogram(
    pred, target, bins: int = KL_BINS, floor: float = PROBABILITY_FLOOR
) -> float:
    """KL(target histogram ‖ prediction histogram) over uniform bins on [-1, 1]"""
    pred = np.asarray(pred, dtype=np.float64)
    target = np.asarray(target, dtype=np.float64)
    _check_lengths(pred, target)
    edges = np.linspace(-1.0, 1.0, bins + 1)
    p = np.histogram(np.clip(target, -1.0, 1.0), edges)[0] / target.size
    q = np.histogram(np.clip(pred, -1.0, 1.0), edges)[0] / pred.size
    return float(np.sum(rel_entr(p, np.maximum(q, floor))))


def hep_loss(pred, target, bins: int = KL_BINS, kl_weight: float = KL_WEIGHT) -> float:
    """MSE + 0.001·KL"""
    pred = np.asarray(pred, dtype=np.float64)
    target = np.asarray(target, dtype=np.float64)
    _check_lengths(pred, target)
    if target.size < bins:
        raise DimensionMismatchError(
            f"Histogram loss needs at least {bins} values, got {target.size}"
        )
    mse = float(np.mean((pred - target) ** 2))
    return mse + kl_weight * kl_divergence_histogram(pred, target, bins)


def huber_metric(pred, target, delta: float = 1.0) -> float:
    pred = np.asarray(pred, dtype=np.float64)
    target = np.asarray(target, dtype=np.float64)
    _check_lengths(pred, target)
    return float(np.mean(huber(delta, pred - target)))


@dataclass
class HepDatasetConfig:
    events: int = 5000
    ratios: Tuple[float, float, float] = (0.8, 0.1, 0.1)
    K: Optional[int] = None
    data_seed: int = 0
    model_seed: int = 0
    batch_size: int = 256
    epochs: int = 30
    lr: float = 0.005
    bins: int = KL_BINS
    kl_weight: float = KL_WEIGHT
    fd_step: float = 1e-5

    def __post_init__(self):
        self.ratios = tuple(float(r) for r in self.ratios)
        if abs(sum(self.ratios) - 1.0) > 1e-9:
            raise ConfigError(f"Split ratios must sum to 1, got {self.ratios}")
        if self.events < 10:
            raise ConfigError(f"Need at least 10 events, got {self.events}")
        if self.batch_size < 1 or self.epochs < 1:
            raise ConfigError("Batch size and epoch count must be positive")
        if self.bins < 1 or self.batch_size < self.bins:
            raise ConfigError(
                f"Batch size {self.batch_size} is below the {self.bins} loss histogram bins"
            )

    def to_dict(self) -> Dict:
        data = asdict(self)
        data["ratios"] = list(self.ratios)
        return data


def default_hep_spec(n: int = 4, layers: int = 1, ansatz: str = "C15") -> ModelSpec:
    return ModelSpec(n, layers, AnsatzKind.parse(ansatz), FeatureMapSpec(HEP_AXES))


def minibatches(order: np.ndarray, size: int, minimum: int = 1) -> List[np.ndarray]:
    """Consecutive slices of ``order``; a tail shorter than ``minimum`` joins the last batch"""
    batches = [order[start:start + size] for start in range(0, len(order), size)]
    if len(batches) > 1 and len(batches[-1]) < minimum:
        tail = batches.pop()
        batches[-1] = np.concatenate([batches[-1], tail])
    return batches


@dataclass
class SplitData:
    grid_index: np.ndarray
    target: np.ndarray
    pt: np.ndarray


@dataclass
class HepReport:
    val_mse: float
    test_mse: float
    val_kl: float
    test_kl: float
    val_huber: float
    test_huber: float
    abs_dev_mean: float
    abs_dev_std: float
    deviation_histogram: List[Dict] = field(default_factory=list)
    predictions_pt: Optional[np.ndarray] = None

    def summary(self) -> Dict:
        data = asdict(self)
        data.pop("deviation_histogram")
        data.pop("predictions_pt")
        return data


class HepPipeline:
    """Feature preparation, mini-batch training and evaluation for one model"""

    def __init__(self, spec: ModelSpec, config: HepDatasetConfig):
        self.logger = logging.getLogger("hep_pipeline")
        if spec.dims != 2:
            raise ConfigError(f"The event model takes 2 input features, spec has {spec.dims}")
        self.spec = spec
        self.config = config
        self.grid = make_input_grid(spec.max_freq, 2, config.K)
        self.transformer: Optional[UniformQuantileTransformer] = None
        self.scaler: Optional[TargetScaler] = None
        self.splits: Dict[str, SplitData] = {}

    def prepare(self, events: pd.DataFrame) -> None:
        """Fit the feature and target maps on the training split only"""
        try:
            events = validate_events(events)
            train, val, test = split_events(events, self.config.ratios, self.config.data_seed)
            smallest = min(len(train), len(val), len(test))
            if smallest < self.config.bins:
                raise ConfigError(
                    f"Every split needs at least {self.config.bins} events, smallest has {smallest}"
                )
            self.transformer = UniformQuantileTransformer(
                span=(self.grid.K - 1) / self.grid.K
            ).fit(feature_matrix(train))
            self.scaler = TargetScaler().fit(train["leading_pt"])
            for name, part in (("train", train), ("val", val), ("test", test)):
                self.splits[name] = self._encode(part)
            self.logger.info(
                f"Prepared {len(train)}/{len(val)}/{len(test)} events on a "
                f"{self.grid.K}x{self.grid.K} input grid"
            )
        except Exception as e:
            self.logger.error(f"Event preparation failed: {e}")
            raise

    def _encode(self, part: pd.DataFrame) -> SplitData:
        angles = self.transformer.transform(feature_matrix(part))
        k = discretize_index(angles, self.grid.K)
        pt = part["leading_pt"].to_numpy()
        return SplitData(k[:, 0] * self.grid.K + k[:, 1], self.scaler.transform(pt), pt)

    def grid_values(self, thetas: np.ndarray) -> np.ndarray:
        """Model output on every grid point for each parameter row: (M, K²)"""
        thetas = np.atleast_2d(thetas)
        rows = np.repeat(thetas, self.grid.size, axis=0)
        xs = np.tile(self.grid.points, (thetas.shape[0], 1))
        return evaluate_batch(self.spec, rows, xs).reshape(thetas.shape[0], self.grid.size)

    def predict(self, theta: np.ndarray, split: str) -> np.ndarray:
        return self.grid_values(theta)[0][self.splits[split].grid_index]

    def loss(self, theta: np.ndarray, split: str) -> float:
        return hep_loss(
            self.predict(theta, split), self.splits[split].target,
            self.config.bins, self.config.kl_weight,
        )

    def _batch_gradient(self, theta: np.ndarray, batch: np.ndarray) -> np.ndarray:
        P = theta.shape[0]
        h = self.config.fd_step
        shifts = h * np.eye(P)
        table = self.grid_values(np.concatenate([theta + shifts, theta - shifts]))
        data = self.splits["train"]
        preds = table[:, data.grid_index[batch]]
        target = data.target[batch]
        losses = np.array(
            [hep_loss(p, target, self.config.bins, self.config.kl_weight) for p in preds]
        )
        return (losses[:P] - losses[P:]) / (2.0 * h)

    def train(self) -> TrainResult:
        """Mini-batch Adam on MSE + 0.001·KL with central finite differences"""
        if not self.splits:
            raise RuntimeError("Call prepare() before train()")
        cfg = self.config
        theta = initial_parameters(self.spec, cfg.model_seed)
        state = AdamState.create(self.spec.param_count, cfg.lr)
        n_train = len(self.splits["train"].target)
        initial_val = self.loss(theta, "val")
        history = []
        for epoch in range(cfg.epochs):
            order = make_rng(cfg.data_seed, "batches", epoch).permutation(n_train)
            for batch in minibatches(order, cfg.batch_size, cfg.bins):
                grad = self._batch_gradient(theta, batch)
                state, theta = adam_step(state, grad, theta)
            history.append(self.loss(theta, "val"))
            self.logger.debug(f"Epoch {epoch}: validation loss {history[-1]:.5g}")
        self.logger.info(f"Validation loss {initial_val:.4g} -> {history[-1]:.4g}")
        val = self.splits["val"]
        final_mse = float(np.mean((self.predict(theta, "val") - val.target) ** 2))
        return TrainResult(
            history, theta, final_mse,
            cfg.model_seed, cfg.data_seed, "finite_diff",
            extra={"initial_val_loss": initial_val, "final_val_loss": history[-1]},
        )

    def report(self, theta: np.ndarray, bins: int = 20) -> HepReport:
        table = self.grid_values(theta)[0]
        scores = {}
        for name in ("val", "test"):
            data = self.splits[name]
            pred = table[data.grid_index]
            scores[name] = (
                float(np.mean((pred - data.target) ** 2)),
                kl_divergence_histogram(pred, data.target, self.config.bins),
                huber_metric(pred, data.target),
            )
        val = self.splits["val"]
        pred_pt = self.scaler.inverse_transform(table[val.grid_index])
        deviation = np.abs(pred_pt - val.pt)
        counts, edges = np.histogram(deviation, bins=bins)
        histogram = [
            {"lo": float(edges[b]), "hi": float(edges[b + 1]), "count": int(counts[b])}
            for b in range(bins)
        ]
        return HepReport(
            val_mse=scores["val"][0], test_mse=scores["test"][0],
            val_kl=scores["val"][1], test_kl=scores["test"][1],
            val_huber=scores["val"][2], test_huber=scores["test"][2],
            abs_dev_mean=float(deviation.mean()) if deviation.size else 0.0,
            abs_dev_std=float(deviation.std()) if deviation.size else 0.0,
            deviation_histogram=histogram,
            predictions_pt=pred_pt,
        )


def train_hep(
    spec: ModelSpec, config: HepDatasetConfig, events: Optional[pd.DataFrame] = None
) -> Tuple[TrainResult, HepReport]:
    """Train on the given events, or on synthetic ones when none are supplied"""
    if events is None:
        events = generate_synthetic_events(config.events, config.data_seed)
    pipeline = HepPipeline(spec, config)
    pipeline.prepare(events)
    result = pipeline.train()
    return result, pipeline.report(result.theta)
