#!/usr/bin/env python3
"""Run configuration: JSON file, then command-line overrides, then preset defaults"""

import json
from dataclasses import asdict, dataclass, field, fields, replace
from pathlib import Path
from typing import Dict, List, Optional, Tuple, Union

from .circuits import AnsatzKind, FeatureMapSpec, ModelSpec
from .errors import ConfigError
from .experiment_manager import TASKS
from .expressibility import pair_count
from .fingerprint import sample_count
from .hep import HEP_AXES

PRESETS = ("desk", "paper")
FORMATS = ("csv", "json")


@dataclass(frozen=True)
class RunConfig:
    command: str = "fingerprint"
    task: str = "fourier"
    ansatz: List[str] = field(default_factory=lambda: ["C15"])
    qubits: int = 4
    layers: int = 1
    dims: Optional[int] = None
    axes: Optional[List[str]] = None
    samples: Optional[int] = None
    pairs: Optional[int] = None
    bins: int = 75
    seed: int = 0
    preset: str = "desk"
    out: str = "results"
    format: str = "csv"
    workers: Optional[int] = None
    mode: str = "complex"
    surrogate: bool = False
    epochs: Optional[int] = None
    lr: Optional[float] = None
    model_seeds: List[int] = field(default_factory=lambda: [0, 1, 2])
    data_seeds: List[int] = field(default_factory=lambda: [0, 1, 2])
    events: int = 5000
    events_path: Optional[str] = None
    dataset_path: Optional[str] = None
    batch_size: int = 256
    grid_points: Optional[int] = None
    bench_qubits: List[int] = field(default_factory=lambda: [2, 4, 6])

    @classmethod
    def from_dict(cls, data: Dict) -> "RunConfig":
        known = {f.name for f in fields(cls)}
        unknown = sorted(set(data) - known)
        if unknown:
            raise ConfigError(f"Unknown configuration keys: {unknown}")
        if isinstance(data.get("ansatz"), str):
            data = dict(data, ansatz=[data["ansatz"]])
        return cls(**data)

    @classmethod
    def load(cls, path: Union[str, Path]) -> "RunConfig":
        try:
            data = json.loads(Path(path).read_text())
        except (OSError, json.JSONDecodeError) as e:
            raise ConfigError(f"Cannot read config {path}: {e}") from e
        if not isinstance(data, dict):
            raise ConfigError(f"Config {path} must hold a JSON object")
        return cls.from_dict(data)

    def merged(self, overrides: Dict) -> "RunConfig":
        """Copy with every non-None override applied"""
        updates = {k: v for k, v in overrides.items() if v is not None}
        return RunConfig.from_dict(dict(self.to_dict(), **updates))

    @property
    def event_model(self) -> bool:
        """Commands that train on collision events take two input features"""
        return self.command == "train-hep" or self.task == "hep"

    def resolve(self) -> "RunConfig":
        """Validate and fill preset-dependent defaults"""
        if self.preset not in PRESETS:
            raise ConfigError(f"Unknown preset '{self.preset}' (known: {', '.join(PRESETS)})")
        if self.format not in FORMATS:
            raise ConfigError(f"Unknown format '{self.format}'")
        if self.task not in TASKS:
            raise ConfigError(f"Unknown task '{self.task}' (known: {', '.join(TASKS)})")
        if not self.ansatz:
            raise ConfigError("At least one ansatz is required")
        try:
            kinds = [AnsatzKind.parse(a).value for a in self.ansatz]
            specs = [self.spec(a) for a in kinds]
        except ValueError as e:
            raise ConfigError(str(e)) from e
        updates = {"ansatz": kinds, "dims": specs[0].dims}
        if self.epochs is None:
            updates["epochs"] = 30 if self.event_model else 1000
        if self.lr is None:
            updates["lr"] = 0.005 if self.event_model else 0.01
        # several ansatzes keep None and size each run from its own parameter count
        single = len(specs) == 1 and self.command != "bench"
        if self.samples is None and single:
            updates["samples"] = sample_count(specs[0], self.preset)
        if self.pairs is None and single:
            updates["pairs"] = pair_count(specs[0], self.preset)
        return replace(self, **updates)

    def feature_axes(self) -> Tuple[str, ...]:
        if self.axes:
            axes = tuple(self.axes)
        elif self.event_model:
            axes = HEP_AXES
        else:
            axes = ("Y",) * (self.dims or 1)
        if self.dims is not None and len(axes) != self.dims:
            raise ConfigError(f"{len(axes)} feature-map axes for {self.dims} input dimensions")
        if self.event_model and len(axes) != 2:
            raise ConfigError(f"The event model takes 2 input features, got axes {list(axes)}")
        return axes

    def spec(self, ansatz: Optional[str] = None) -> ModelSpec:
        return ModelSpec(
            self.qubits,
            self.layers,
            AnsatzKind.parse(ansatz or self.ansatz[0]),
            FeatureMapSpec(self.feature_axes()),
        )

    def to_dict(self) -> Dict:
        return asdict(self)

    def write(self, path: Union[str, Path]) -> None:
        Path(path).write_text(json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n")
