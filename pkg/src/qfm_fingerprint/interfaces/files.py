#!/usr/bin/env python3

import json
import logging
from pathlib import Path
from typing import Dict, List, Sequence, Union

import numpy as np
import pandas as pd

from ..fourier_data import RegressionDataset
from ..spectral import CoefficientTensor

FLOAT_FORMAT = "%.17g"


def _to_builtin(value):
    if isinstance(value, np.integer):
        return int(value)
    if isinstance(value, np.floating):
        return float(value)
    if isinstance(value, np.ndarray):
        return value.tolist()
    if isinstance(value, complex):
        return {"re": value.real, "im": value.imag}
    raise TypeError(f"Cannot serialize {type(value).__name__}")


def dumps(data) -> str:
    return json.dumps(data, indent=2, sort_keys=True, default=_to_builtin) + "\n"


class ResultWriter:
    """Writes one command's outputs into its output directory"""

    def __init__(self, out_dir: Union[str, Path], fmt: str = "csv"):
        self.logger = logging.getLogger("result_writer")
        self.out_dir = Path(out_dir)
        self.fmt = fmt
        self.written: List[Path] = []

    def open(self) -> "ResultWriter":
        """Create the output directory before any work is done"""
        self.out_dir.mkdir(parents=True, exist_ok=True)
        return self

    def _path(self, name: str) -> Path:
        self.out_dir.mkdir(parents=True, exist_ok=True)
        path = self.out_dir / name
        self.written.append(path)
        return path

    def write_json(self, name: str, data: Dict) -> Path:
        path = self._path(name)
        path.write_text(dumps(data))
        self.logger.debug(f"Wrote {path}")
        return path

    def write_text(self, name: str, text: str) -> Path:
        path = self._path(name)
        path.write_text(text)
        return path

    def write_table(self, stem: str, table: pd.DataFrame) -> Path:
        """CSV or JSON records, depending on the writer's format"""
        if self.fmt == "json":
            path = self._path(f"{stem}.json")
            path.write_text(table.to_json(orient="records", indent=2, double_precision=15) + "\n")
        else:
            path = self._path(f"{stem}.csv")
            table.to_csv(path, index=False, float_format=FLOAT_FORMAT)
        self.logger.debug(f"Wrote {path}")
        return path

    def write_coefficients(self, stem: str, tensor: CoefficientTensor) -> Path:
        """One row per frequency: omega_0 .. omega_(D-1), re, im"""
        return self.write_table(stem, pd.DataFrame(tensor.records()))

    def write_matrix(self, stem: str, matrix: np.ndarray, labels: Sequence[str]) -> Path:
        frame = pd.DataFrame(matrix, index=list(labels), columns=list(labels))
        path = self._path(f"{stem}.csv")
        frame.to_csv(path, index_label="omega", float_format=FLOAT_FORMAT)
        return path

    def summary(self) -> List[str]:
        return [str(p) for p in self.written]


def read_matrix(path: Union[str, Path]) -> pd.DataFrame:
    return pd.read_csv(path, index_col="omega")


def dataset_frame(dataset: RegressionDataset) -> pd.DataFrame:
    """x_0 .. x_(D-1) and target columns; complex targets add target_imag"""
    frame = pd.DataFrame(dataset.inputs, columns=[f"x_{d}" for d in range(dataset.D)])
    frame["target"] = np.real(dataset.targets)
    if dataset.is_complex:
        frame["target_imag"] = np.imag(dataset.targets)
    return frame


def read_coefficients(path: Union[str, Path]) -> CoefficientTensor:
    """Tensor back from a coefficients CSV or JSON table"""
    path = Path(path)
    frame = pd.read_json(path, orient="records") if path.suffix == ".json" else pd.read_csv(path)
    return CoefficientTensor.from_records(frame.to_dict(orient="records"))


def read_dataset(path: Union[str, Path]) -> RegressionDataset:
    try:
        frame = pd.read_csv(path)
    except (OSError, pd.errors.ParserError, pd.errors.EmptyDataError) as e:
        raise ValueError(f"Cannot read dataset from {path}: {e}") from e
    x_cols = sorted((c for c in frame.columns if c.startswith("x_")), key=lambda c: int(c[2:]))
    if not x_cols or "target" not in frame.columns:
        raise ValueError(f"Dataset {path} needs x_0 .. x_(D-1) and target columns")
    targets = frame["target"].to_numpy()
    if "target_imag" in frame.columns:
        targets = targets + 1j * frame["target_imag"].to_numpy()
    return RegressionDataset(frame[x_cols].to_numpy(), targets)
