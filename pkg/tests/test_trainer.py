import numpy as np
import pytest

from qfm_fingerprint.circuits import AnsatzKind, FeatureMapSpec, ModelSpec, evaluate_batch
from qfm_fingerprint.errors import DimensionMismatchError, ParameterShiftError
from qfm_fingerprint.fourier_data import (
    RegressionDataset,
    make_dataset,
    random_target,
    target_from_coefficients,
)
from qfm_fingerprint.trainer import (
    AdamState,
    adam_step,
    coefficient_loss,
    gradient,
    initial_parameters,
    model_gradient,
    mse_loss,
    resolve_method,
    train,
)

PARSEVAL_CASES = [
    (AnsatzKind.YZY, 1, ("Y",)),
    (AnsatzKind.C15, 2, ("Y",)),
    (AnsatzKind.HEA, 3, ("Z",)),
    (AnsatzKind.C18, 4, ("Y",)),
    (AnsatzKind.C16, 2, ("X", "Y")),
]


@pytest.mark.parametrize("ansatz, n, axes", PARSEVAL_CASES)
def test_grid_mse_equals_coefficient_distance(ansatz, n, axes):
    spec = ModelSpec(n, 1, ansatz, FeatureMapSpec(axes))
    rng = np.random.default_rng(n)
    for trial in range(4):
        target = random_target(spec.max_freq, spec.dims, seed=trial)
        theta = rng.uniform(0, 2 * np.pi, spec.param_count)
        dataset = make_dataset(target)
        assert mse_loss(spec, theta, dataset) == pytest.approx(
            coefficient_loss(spec, theta, target), abs=1e-9
        )


@pytest.mark.parametrize("ansatz", [AnsatzKind.C15, AnsatzKind.HEA, AnsatzKind.YZY])
def test_parameter_shift_matches_finite_differences(ansatz):
    spec = ModelSpec(3, 1, ansatz)
    rng = np.random.default_rng(0)
    theta = rng.uniform(0, 2 * np.pi, spec.param_count)
    xs = rng.uniform(0, 2 * np.pi, (4, 1))
    shift = model_gradient(spec, theta, xs, "param_shift")
    fd = model_gradient(spec, theta, xs, "finite_diff")
    assert shift.shape == (4, spec.param_count)
    np.testing.assert_allclose(shift, fd, atol=1e-5)


def test_single_qubit_analytic_gradient():
    spec = ModelSpec(1, 1, AnsatzKind.YZY)
    theta = np.zeros(6)
    theta[0] = np.pi / 3
    for method in ("param_shift", "finite_diff"):
        grad = model_gradient(spec, theta, np.array([[0.0]]), method)
        assert grad[0, 0] == pytest.approx(-np.sqrt(3) / 2, abs=1e-6)


def test_method_resolution():
    assert resolve_method(ModelSpec(2, 1, AnsatzKind.C15), "auto") == "param_shift"
    assert resolve_method(ModelSpec(2, 1, AnsatzKind.C18), "auto") == "finite_diff"
    with pytest.raises(ParameterShiftError):
        resolve_method(ModelSpec(2, 1, AnsatzKind.C17), "param_shift")
    with pytest.raises(ValueError):
        resolve_method(ModelSpec(2, 1, AnsatzKind.C15), "adjoint")


def test_loss_gradient_matches_numeric_loss_slope():
    spec = ModelSpec(2, 1, AnsatzKind.HEA)
    dataset = make_dataset(random_target(2, 1, seed=3))
    theta = initial_parameters(spec, 1)
    grad = gradient(spec, theta, dataset)
    h = 1e-6
    for k in (0, 5):
        step = np.zeros_like(theta)
        step[k] = h
        slope = (mse_loss(spec, theta + step, dataset) - mse_loss(spec, theta - step, dataset)) / (2 * h)
        assert grad[k] == pytest.approx(slope, abs=1e-6)


def test_first_adam_step_moves_by_learning_rate():
    state = AdamState.create(3, lr=0.1)
    grad = np.array([2.0, -0.5, 1e-3])
    state, theta = adam_step(state, grad, np.zeros(3))
    np.testing.assert_allclose(theta, -0.1 * np.sign(grad), rtol=1e-4)
    assert state.t == 1


def test_adam_shape_checked():
    state = AdamState.create(3)
    with pytest.raises(DimensionMismatchError):
        adam_step(state, np.zeros(2), np.zeros(3))


def test_training_reduces_loss():
    spec = ModelSpec(1, 1, AnsatzKind.YZY)
    dataset = make_dataset(target_from_coefficients({1: 0.5, -1: 0.5}))
    result = train(spec, dataset, epochs=1000, lr=0.02, model_seed=2)
    assert len(result.history) == 1000
    assert result.final_mse < result.initial_loss
    assert result.final_mse < 1e-4
    assert result.method == "param_shift"


def test_training_is_deterministic():
    spec = ModelSpec(2, 1, AnsatzKind.C18)
    dataset = make_dataset(random_target(2, 1, seed=0))
    first = train(spec, dataset, epochs=5, model_seed=4, data_seed=0)
    second = train(spec, dataset, epochs=5, model_seed=4, data_seed=0)
    assert first.history == second.history
    np.testing.assert_array_equal(first.theta, second.theta)
    assert first.method == "finite_diff"


def test_training_needs_epochs():
    spec = ModelSpec(1, 1, AnsatzKind.YZY)
    with pytest.raises(ValueError):
        train(spec, make_dataset(random_target(1, 1, seed=0)), epochs=0)


@pytest.mark.slow
def test_low_fcc_ansatz_trains_better():
    def mean_final(ansatz):
        spec = ModelSpec(4, 1, ansatz)
        losses = []
        for data_seed in range(3):
            dataset = make_dataset(random_target(spec.max_freq, 1, data_seed))
            for model_seed in range(3):
                losses.append(train(spec, dataset, 1000, 0.01, model_seed).final_mse)
        return np.mean(losses)

    assert mean_final(AnsatzKind.C15) < mean_final(AnsatzKind.C18)


@pytest.mark.parametrize("ansatz", [AnsatzKind.YZY, AnsatzKind.C15])
def test_gradient_vanishes_where_model_fits_exactly(ansatz):
    spec = ModelSpec(2, 1, ansatz)
    theta = initial_parameters(spec, 3)
    xs = np.array([[0.3], [1.9], [4.4]])
    dataset = RegressionDataset(xs, evaluate_batch(spec, theta, xs))
    np.testing.assert_allclose(gradient(spec, theta, dataset), 0.0, atol=1e-12)


def test_training_rarely_ends_above_its_start():
    spec = ModelSpec(3, 1, AnsatzKind.C15)
    improved = 0
    for seed in range(20):
        dataset = make_dataset(random_target(spec.max_freq, 1, seed=seed))
        result = train(spec, dataset, epochs=40, model_seed=seed, data_seed=seed)
        improved += result.final_mse <= result.initial_loss
    assert improved >= 19
