#!/usr/bin/env python3
"""MSE training of model parameters with Adam"""

import logging
from dataclasses import dataclass, field, replace
from typing import List, Optional, Tuple

import numpy as np

from .circuits import ModelSpec, evaluate_batch, uses_controlled_rotations
from .errors import DimensionMismatchError, ParameterShiftError
from .fourier_data import FourierSeriesTarget, RegressionDataset
from .seeding import uniform_parameters
from .spectral import model_coefficients

logger = logging.getLogger("trainer")

FINITE_DIFF_STEP = 1e-5
SHIFT = np.pi / 2
GRADIENT_METHODS = ("auto", "finite_diff", "param_shift")

DEFAULT_LR = 0.01
DEFAULT_EPOCHS = 1000


@dataclass(frozen=True)
class AdamState:
    m: np.ndarray
    v: np.ndarray
    t: int = 0
    lr: float = DEFAULT_LR
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8

    @classmethod
    def create(cls, size: int, lr: float = DEFAULT_LR) -> "AdamState":
        return cls(np.zeros(size), np.zeros(size), 0, lr)


def adam_step(
    state: AdamState, grad: np.ndarray, theta: np.ndarray
) -> Tuple[AdamState, np.ndarray]:
    """One bias-corrected Adam update; returns the new state and parameters"""
    grad = np.asarray(grad, dtype=np.float64)
    if grad.shape != state.m.shape or np.shape(theta) != state.m.shape:
        raise DimensionMismatchError(
            f"Adam state of size {state.m.shape[0]} got gradient {grad.shape} "
            f"and parameters {np.shape(theta)}"
        )
    t = state.t + 1
    m = state.beta1 * state.m + (1.0 - state.beta1) * grad
    v = state.beta2 * state.v + (1.0 - state.beta2) * grad**2
    m_hat = m / (1.0 - state.beta1**t)
    v_hat = v / (1.0 - state.beta2**t)
    theta = np.asarray(theta, dtype=np.float64) - state.lr * m_hat / (np.sqrt(v_hat) + state.eps)
    return replace(state, m=m, v=v, t=t), theta


def _check_dataset(dataset: RegressionDataset) -> None:
    if len(dataset) == 0:
        raise ValueError("Dataset is empty")


def mse_loss(spec: ModelSpec, theta: np.ndarray, dataset: RegressionDataset) -> float:
    """Mean of |f(x, θ) - y|² over the dataset"""
    _check_dataset(dataset)
    predictions = evaluate_batch(spec, theta, dataset.inputs)
    return float(np.mean(np.abs(predictions - dataset.targets) ** 2))


def coefficient_loss(spec: ModelSpec, theta: np.ndarray, target: FourierSeriesTarget) -> float:
    """Σ_ω |c_ω(θ) - ĉ_ω|², equal to the MSE on the Nyquist grid"""
    nL = max(spec.max_freq, target.nL)
    model = model_coefficients(spec, theta, 2 * nL + 1).values
    padded = np.zeros_like(model)
    offset = nL - target.nL
    window = tuple(slice(offset, offset + 2 * target.nL + 1) for _ in range(target.D))
    padded[window] = target.coefficients.values
    return float(np.sum(np.abs(model - padded) ** 2))


def resolve_method(spec: ModelSpec, method: str) -> str:
    if method not in GRADIENT_METHODS:
        raise ValueError(f"Unknown gradient method: {method}")
    controlled = uses_controlled_rotations(spec.ansatz)
    if method == "auto":
        return "finite_diff" if controlled else "param_shift"
    if method == "param_shift" and controlled:
        raise ParameterShiftError(
            f"Two-term parameter shift does not hold for {spec.ansatz.value}, "
            "whose controlled rotations have a three-eigenvalue generator"
        )
    return method


def model_gradient(
    spec: ModelSpec, theta: np.ndarray, xs: np.ndarray, method: str = "finite_diff"
) -> np.ndarray:
    """∂f(x_b, θ)/∂θ_k as a (B, P) array; all 2P shifted models run in one batch"""
    method = resolve_method(spec, method)
    theta = np.asarray(theta, dtype=np.float64)
    xs = np.atleast_2d(np.asarray(xs, dtype=np.float64))
    P = spec.param_count
    B = xs.shape[0]
    step = FINITE_DIFF_STEP if method == "finite_diff" else SHIFT
    shifts = step * np.eye(P)
    thetas = np.concatenate([theta + shifts, theta - shifts], axis=0)
    rows = np.repeat(thetas, B, axis=0)
    points = np.tile(xs, (2 * P, 1))
    values = evaluate_batch(spec, rows, points).reshape(2 * P, B)
    diff = values[:P] - values[P:]
    scale = 2.0 * FINITE_DIFF_STEP if method == "finite_diff" else 2.0
    return (diff / scale).T


def gradient(
    spec: ModelSpec, theta: np.ndarray, dataset: RegressionDataset, method: str = "auto"
) -> np.ndarray:
    """∇θ of the MSE loss"""
    _check_dataset(dataset)
    predictions = evaluate_batch(spec, theta, dataset.inputs)
    jacobian = model_gradient(spec, theta, dataset.inputs, method)
    residual = predictions - np.real(dataset.targets)
    return 2.0 * residual @ jacobian / len(dataset)


@dataclass
class TrainResult:
    history: List[float]
    theta: np.ndarray
    final_mse: float
    model_seed: int
    data_seed: Optional[int] = None
    method: str = "finite_diff"
    extra: dict = field(default_factory=dict)

    @property
    def initial_loss(self) -> float:
        return self.history[0]


def initial_parameters(spec: ModelSpec, model_seed: int) -> np.ndarray:
    return uniform_parameters(model_seed, "model_init", np.array([0]), spec.param_count)[0]


def train(
    spec: ModelSpec,
    dataset: RegressionDataset,
    epochs: int = DEFAULT_EPOCHS,
    lr: float = DEFAULT_LR,
    model_seed: int = 0,
    method: str = "auto",
    data_seed: Optional[int] = None,
) -> TrainResult:
    """Full-batch Adam from θ ~ U[0, 2π) drawn with model_seed"""
    if epochs < 1:
        raise ValueError(f"Epoch count must be at least 1, got {epochs}")
    _check_dataset(dataset)
    method = resolve_method(spec, method)
    theta = initial_parameters(spec, model_seed)
    state = AdamState.create(spec.param_count, lr)
    history = []
    for epoch in range(epochs):
        predictions = evaluate_batch(spec, theta, dataset.inputs)
        residual = predictions - dataset.targets
        history.append(float(np.mean(np.abs(residual) ** 2)))
        jacobian = model_gradient(spec, theta, dataset.inputs, method)
        grad = 2.0 * np.real(residual) @ jacobian / len(dataset)
        state, theta = adam_step(state, grad, theta)
        if epoch % 100 == 0:
            logger.debug(f"{spec.label()} epoch {epoch}: loss {history[-1]:.6g}")
    final = mse_loss(spec, theta, dataset)
    logger.info(
        f"Trained {spec.label()} (model seed {model_seed}, data seed {data_seed}): "
        f"MSE {history[0]:.4g} -> {final:.4g}"
    )
    return TrainResult(history, theta, final, model_seed, data_seed, method)
