import json

import numpy as np
import pandas as pd
import pytest

from qfm_fingerprint.circuits import AnsatzKind, ModelSpec
from qfm_fingerprint.cli import EXIT_CONFIG, EXIT_OK, EXIT_RUNTIME, build_parser, main
from qfm_fingerprint.fourier_data import make_dataset, random_target
from qfm_fingerprint.interfaces.files import dataset_frame, read_coefficients, read_matrix
from qfm_fingerprint.seeding import uniform_parameters
from qfm_fingerprint.spectral import model_coefficients


def run(tmp_path, *args):
    return main([*args, "--out", str(tmp_path), "-q"])


def test_fcc_command(tmp_path):
    assert run(tmp_path, "fcc", "--ansatz", "C15", "HEA", "--qubits", "2", "--samples", "40", "--workers", "1") == EXIT_OK
    table = pd.read_csv(tmp_path / "fcc.csv")
    assert table["ansatz"].tolist() == ["C15", "HEA"]
    assert (table["samples"] == 40).all()
    config = json.loads((tmp_path / "config.json").read_text())
    assert config["command"] == "fcc"


def test_fingerprint_command_writes_matrix_and_heatmap(tmp_path):
    assert run(tmp_path, "fingerprint", "--qubits", "2", "--samples", "30") == EXIT_OK
    matrix = read_matrix(tmp_path / "fingerprint_C15_n2_L1_Y.csv")
    assert matrix.shape == (3, 3)
    assert (tmp_path / "fingerprint_C15_n2_L1_Y.svg").read_text().lstrip().startswith("<?xml")
    summary = json.loads((tmp_path / "fingerprint_C15_n2_L1_Y.json").read_text())
    assert summary["M"] == 30


def test_surrogate_flag(tmp_path):
    assert run(tmp_path, "fingerprint", "--surrogate", "--qubits", "3", "--samples", "100") == EXIT_OK
    assert (tmp_path / "surrogate.csv").exists()


def test_expressibility_command_json(tmp_path):
    assert run(tmp_path, "expressibility", "--qubits", "2", "--pairs", "50", "--bins", "10", "--format", "json") == EXIT_OK
    results = json.loads((tmp_path / "expressibility.json").read_text())
    assert results["C15"]["M_pairs"] == 50
    histogram = json.loads((tmp_path / "histogram_C15_n2_L1_Y.json").read_text())
    assert len(histogram) == 10


def test_variance_command(tmp_path):
    assert run(tmp_path, "variance", "--qubits", "2", "--samples", "50") == EXIT_OK
    profile = pd.read_csv(tmp_path / "variance_C15_n2_L1_Y.csv")
    assert profile["l1"].tolist() == [0, 1, 2]


def test_train_fs_command(tmp_path):
    args = ["train-fs", "--ansatz", "YZY", "--qubits", "1", "--epochs", "3",
            "--model-seeds", "0", "1", "--data-seeds", "0"]
    assert run(tmp_path, *args) == EXIT_OK
    runs = pd.read_csv(tmp_path / "runs.csv")
    assert len(runs) == 2
    history = pd.read_csv(tmp_path / "history.csv")
    assert len(history) == 3
    dataset = pd.read_csv(tmp_path / "dataset_seed0.csv")
    assert len(dataset) == 3


def test_bench_command(tmp_path):
    assert run(tmp_path, "bench", "--bench-qubits", "2", "--samples", "20", "--pairs", "10") == EXIT_OK
    bench = pd.read_csv(tmp_path / "bench.csv")
    assert bench["n"].tolist() == [2]


def test_config_file_errors_exit_with_config_code(tmp_path):
    path = tmp_path / "bad.json"
    path.write_text(json.dumps({"colour": "blue"}))
    assert run(tmp_path, "fcc", "--config", str(path)) == EXIT_CONFIG


def test_config_file_values_are_overridden(tmp_path):
    path = tmp_path / "run.json"
    path.write_text(json.dumps({"qubits": 5, "samples": 20, "ansatz": "YZY"}))
    assert run(tmp_path / "out", "fcc", "--config", str(path), "--qubits", "1") == EXIT_OK
    table = pd.read_csv(tmp_path / "out" / "fcc.csv")
    assert table["n"].tolist() == [1]


def test_parser_rejects_unknown_preset():
    with pytest.raises(SystemExit):
        build_parser().parse_args(["fcc", "--preset", "huge"])


def test_rerun_from_config_echo_is_byte_identical(tmp_path):
    first, second = tmp_path / "first", tmp_path / "second"
    assert run(first, "fingerprint", "--qubits", "2", "--samples", "25", "--seed", "3") == EXIT_OK
    stem = "fingerprint_C15_n2_L1_Y.csv"
    assert run(second, "fingerprint", "--config", str(first / "config.json")) == EXIT_OK
    assert (first / stem).read_bytes() == (second / stem).read_bytes()


def test_fingerprint_command_exports_coefficients(tmp_path):
    assert run(tmp_path, "fingerprint", "--qubits", "2", "--samples", "20", "--seed", "1") == EXIT_OK
    tensor = read_coefficients(tmp_path / "coefficients_C15_n2_L1_Y.csv")
    spec = ModelSpec(2, 1, AnsatzKind.C15)
    theta = uniform_parameters(1, "theta", np.arange(1), spec.param_count)[0]
    np.testing.assert_allclose(tensor.values, model_coefficients(spec, theta).values, atol=1e-15)


def test_unwritable_output_directory_is_a_runtime_failure(tmp_path):
    blocker = tmp_path / "blocker"
    blocker.write_text("")
    args = ["fcc", "--qubits", "2", "--samples", "20", "--out", str(blocker / "sub"), "-q"]
    assert main(args) == EXIT_RUNTIME


def test_missing_event_file_is_a_runtime_failure(tmp_path):
    assert run(tmp_path, "train-hep", "--events-path", str(tmp_path / "none.csv")) == EXIT_RUNTIME


def test_train_fs_on_imported_dataset(tmp_path):
    path = tmp_path / "data.csv"
    dataset_frame(make_dataset(random_target(1, 1, seed=3))).to_csv(path, index=False)
    args = ["train-fs", "--ansatz", "YZY", "--qubits", "1", "--epochs", "2",
            "--model-seeds", "0", "1", "--dataset-path", str(path)]
    assert run(tmp_path / "out", *args) == EXIT_OK
    runs = pd.read_csv(tmp_path / "out" / "runs.csv")
    assert len(runs) == 2
    assert runs["data_seed"].isna().all()
    assert not list((tmp_path / "out").glob("dataset_seed*"))


def test_imported_dataset_must_match_input_dimension(tmp_path):
    path = tmp_path / "data.csv"
    dataset_frame(make_dataset(random_target(1, 2, seed=3))).to_csv(path, index=False)
    args = ["train-fs", "--qubits", "1", "--ansatz", "YZY", "--dataset-path", str(path)]
    assert run(tmp_path / "out", *args) == EXIT_CONFIG


def test_train_hep_axes_need_two_features(tmp_path):
    assert run(tmp_path, "train-hep", "--axes", "Y") == EXIT_CONFIG
    assert run(tmp_path, "train-hep", "--ansatz", "C15", "C18") == EXIT_CONFIG


def test_event_experiment_command(tmp_path):
    args = ["experiment", "--task", "hep", "--ansatz", "C15", "C18", "--qubits", "2",
            "--epochs", "1", "--model-seeds", "0", "--data-seeds", "0", "--events", "400",
            "--batch-size", "64", "--samples", "20", "--pairs", "20"]
    assert run(tmp_path, *args) == EXIT_OK
    table = pd.read_csv(tmp_path / "experiment.csv")
    assert table["ansatz"].tolist() == ["C15", "C18"]
    assert (table["D"] == 2).all()
