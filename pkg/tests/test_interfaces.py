import json

import numpy as np
import pandas as pd
import pytest

from qfm_fingerprint.circuits import AnsatzKind, FeatureMapSpec, ModelSpec
from qfm_fingerprint.errors import DimensionMismatchError
from qfm_fingerprint.fourier_data import make_dataset, random_target
from qfm_fingerprint.interfaces.files import (
    ResultWriter,
    dataset_frame,
    dumps,
    read_coefficients,
    read_dataset,
    read_matrix,
)
from qfm_fingerprint.interfaces.heatmap import lower_triangle, render_heatmap
from qfm_fingerprint.spectral import model_coefficients

MATRIX = np.array([[1.0, 0.2, 0.4], [0.2, 1.0, 0.6], [0.4, 0.6, 1.0]])
LABELS = ["0", "1", "2"]


def test_lower_triangle_masks_upper_part():
    tri = lower_triangle(MATRIX)
    assert tri.shape == (2, 2)
    assert tri.mask.tolist() == [[False, True], [False, False]]
    assert tri[1, 1] == pytest.approx(0.6)


def test_heatmap_is_standalone_and_reproducible():
    first = render_heatmap(MATRIX, LABELS, title="C15")
    second = render_heatmap(MATRIX, LABELS, title="C15")
    assert first.lstrip().startswith("<?xml")
    assert "</svg>" in first
    assert first == second


def test_heatmap_input_checks():
    with pytest.raises(DimensionMismatchError):
        render_heatmap(np.ones((2, 3)), ["a", "b"])
    with pytest.raises(DimensionMismatchError):
        render_heatmap(MATRIX, ["a", "b"])
    with pytest.raises(ValueError):
        render_heatmap(np.ones((1, 1)), ["a"])


def test_dumps_handles_numpy_values():
    data = json.loads(dumps({"a": np.float64(0.5), "b": np.arange(3), "c": np.int64(4)}))
    assert data == {"a": 0.5, "b": [0, 1, 2], "c": 4}


def test_table_formats(tmp_path):
    table = pd.DataFrame({"ansatz": ["C15"], "fcc": [1 / 3]})
    csv_path = ResultWriter(tmp_path / "csv", "csv").write_table("fcc", table)
    assert pd.read_csv(csv_path)["fcc"].iloc[0] == 1 / 3
    json_path = ResultWriter(tmp_path / "json", "json").write_table("fcc", table)
    assert json.loads(json_path.read_text()) == [{"ansatz": "C15", "fcc": pytest.approx(1 / 3)}]


def test_matrix_file(tmp_path):
    writer = ResultWriter(tmp_path)
    path = writer.write_matrix("fingerprint", MATRIX, LABELS)
    frame = read_matrix(path)
    np.testing.assert_allclose(frame.to_numpy(), MATRIX)
    assert writer.summary() == [str(path)]


def test_dataset_file(tmp_path):
    dataset = make_dataset(random_target(2, 2, seed=1))
    path = tmp_path / "dataset.csv"
    dataset_frame(dataset).to_csv(path, index=False, float_format="%.17g")
    loaded = read_dataset(path)
    np.testing.assert_allclose(loaded.inputs, dataset.inputs)
    np.testing.assert_allclose(loaded.targets, dataset.targets)


def test_complex_dataset_frame():
    dataset = make_dataset(random_target(1, 1, seed=1, symmetric=False))
    assert list(dataset_frame(dataset).columns) == ["x_0", "target", "target_imag"]


def test_two_by_two_heatmap_has_one_cell():
    svg = render_heatmap(np.array([[1.0, 1.4], [1.4, 1.0]]), ["0", "1"])
    assert "</svg>" in svg
    assert lower_triangle(np.array([[1.0, 1.4], [1.4, 1.0]])).tolist() == [[1.0]]


@pytest.mark.parametrize("fmt", ["csv", "json"])
def test_coefficient_file(tmp_path, fmt):
    spec = ModelSpec(2, 1, AnsatzKind.HEA, FeatureMapSpec(("X", "Y")))
    theta = np.random.default_rng(3).uniform(0, 2 * np.pi, spec.param_count)
    tensor = model_coefficients(spec, theta)
    path = ResultWriter(tmp_path, fmt).write_coefficients("coefficients", tensor)
    assert path.suffix == f".{fmt}"
    loaded = read_coefficients(path)
    assert loaded.D == 2
    assert loaded.K == tensor.K
    np.testing.assert_allclose(loaded.values, tensor.values, atol=1e-14)


def test_dataset_file_without_target_rejected(tmp_path):
    path = tmp_path / "dataset.csv"
    pd.DataFrame({"x_0": [0.0, 1.0], "y": [1.0, 2.0]}).to_csv(path, index=False)
    with pytest.raises(ValueError):
        read_dataset(path)
    with pytest.raises(ValueError):
        read_dataset(tmp_path / "missing.csv")
