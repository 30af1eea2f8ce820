#!/usr/bin/env python3
"""Exact statevector simulation.

Conventions: R_P(θ) = exp(-iθP/2) for P in {X, Y, Z}; controlled rotations act
on the |1> subspace of the control; qubit 0 is the most significant bit of a
basis-state label (top wire of a circuit drawing).

Amplitudes are handled as (batch, 2**n) arrays so a whole input grid, or a
whole block of parameter samples, runs through one pass over the gate list.
A gate angle may be a scalar or an array with one angle per batch row.
"""

from dataclasses import dataclass
from enum import Enum
from functools import lru_cache
from typing import Iterable, Optional, Sequence, Union

import numpy as np

from .errors import DimensionMismatchError, InvalidGateError

MAX_QUBITS = 16

Angle = Union[float, np.ndarray]


class GateKind(str, Enum):
    RX = "RX"
    RY = "RY"
    RZ = "RZ"
    CNOT = "CNOT"
    CRX = "CRX"
    CRZ = "CRZ"

    @property
    def controlled(self) -> bool:
        return self in (GateKind.CNOT, GateKind.CRX, GateKind.CRZ)

    @property
    def axis(self) -> str:
        """Pauli axis of the (possibly controlled) single-qubit operation"""
        return {"RX": "X", "RY": "Y", "RZ": "Z", "CNOT": "X", "CRX": "X", "CRZ": "Z"}[
            self.value
        ]


@dataclass(frozen=True, eq=False)
class GateOp:
    kind: GateKind
    target: int
    control: Optional[int] = None
    angle: Optional[Angle] = None

    def validate(self, n: int) -> None:
        if not 0 <= self.target < n:
            raise InvalidGateError(f"Target {self.target} out of range for {n} qubits")
        if self.kind.controlled:
            if self.control is None:
                raise InvalidGateError(f"{self.kind.value} needs a control qubit")
            if not 0 <= self.control < n:
                raise InvalidGateError(
                    f"Control {self.control} out of range for {n} qubits"
                )
            if self.control == self.target:
                raise InvalidGateError(f"Control equals target ({self.target})")
        elif self.control is not None:
            raise InvalidGateError(f"{self.kind.value} takes no control qubit")
        if self.kind is not GateKind.CNOT and self.angle is None:
            raise InvalidGateError(f"{self.kind.value} needs an angle")

    def inverse(self) -> "GateOp":
        if self.kind is GateKind.CNOT:
            return self
        return GateOp(self.kind, self.target, self.control, -np.asarray(self.angle))

    def __repr__(self) -> str:
        ctrl = f", control={self.control}" if self.control is not None else ""
        angle = "" if self.angle is None else f", angle={self.angle}"
        return f"GateOp({self.kind.value}, target={self.target}{ctrl}{angle})"


def rotation_matrix(axis: str, angle: Angle) -> np.ndarray:
    """exp(-i angle P/2); shape (2, 2) for a scalar angle, (B, 2, 2) for B angles"""
    a = np.asarray(angle, dtype=np.float64)
    c = np.cos(a / 2)
    s = np.sin(a / 2)
    m = np.zeros(a.shape + (2, 2), dtype=np.complex128)
    if axis == "X":
        m[..., 0, 0] = c
        m[..., 1, 1] = c
        m[..., 0, 1] = -1j * s
        m[..., 1, 0] = -1j * s
    elif axis == "Y":
        m[..., 0, 0] = c
        m[..., 1, 1] = c
        m[..., 0, 1] = -s
        m[..., 1, 0] = s
    elif axis == "Z":
        m[..., 0, 0] = np.exp(-0.5j * a)
        m[..., 1, 1] = np.exp(0.5j * a)
    else:
        raise InvalidGateError(f"Unknown rotation axis: {axis}")
    return m


_PAULI_X = np.array([[0, 1], [1, 0]], dtype=np.complex128)


def gate_matrix(gate: GateOp) -> np.ndarray:
    """Single-qubit part of a gate (the operation applied to the target)"""
    if gate.kind is GateKind.CNOT:
        return _PAULI_X
    return rotation_matrix(gate.kind.axis, gate.angle)


def _apply_axis(tensor: np.ndarray, mat: np.ndarray, axis: int) -> np.ndarray:
    batch = tensor.shape[0]
    moved = np.moveaxis(tensor, axis, -1)
    shape = moved.shape
    flat = moved.reshape(batch, -1, 2)
    out = flat @ np.swapaxes(mat, -1, -2)
    return np.moveaxis(out.reshape(shape), -1, axis)


def _apply(psi: np.ndarray, gate: GateOp, n: int) -> np.ndarray:
    batch = psi.shape[0]
    mat = gate_matrix(gate)
    if mat.ndim == 3 and mat.shape[0] != batch:
        raise DimensionMismatchError(
            f"{mat.shape[0]} per-row angles for a batch of {batch} states"
        )
    tensor = psi.reshape((batch,) + (2,) * n)
    if gate.control is None:
        out = _apply_axis(tensor, mat, 1 + gate.target)
    else:
        out = tensor.copy()
        index = [slice(None)] * (n + 1)
        index[1 + gate.control] = 1
        index = tuple(index)
        axis = 1 + gate.target - (1 if gate.target > gate.control else 0)
        out[index] = _apply_axis(tensor[index], mat, axis)
    return out.reshape(batch, 2**n)


def evolve(psi: np.ndarray, gates: Iterable[GateOp], n: int) -> np.ndarray:
    """Apply a gate sequence to a (batch, 2**n) amplitude array"""
    psi = np.asarray(psi, dtype=np.complex128)
    if psi.ndim != 2 or psi.shape[1] != 2**n:
        raise DimensionMismatchError(f"Expected shape (batch, {2**n}), got {psi.shape}")
    for gate in gates:
        gate.validate(n)
        psi = _apply(psi, gate, n)
    return psi


def simulate(n: int, gates: Sequence[GateOp], batch: int = 1) -> np.ndarray:
    """Amplitudes of U|0...0> for every batch row"""
    if not 1 <= n <= MAX_QUBITS:
        raise ValueError(f"Qubit count must be 1-{MAX_QUBITS}, got {n}")
    psi = np.zeros((batch, 2**n), dtype=np.complex128)
    psi[:, 0] = 1.0
    return evolve(psi, gates, n)


class StateVector:
    """Unit-norm amplitude vector of an n-qubit register.

    Instances are never modified in place; gate application returns a new state.
    """

    __slots__ = ("_amplitudes", "n")

    def __init__(self, amplitudes: np.ndarray, n: Optional[int] = None):
        amps = np.array(amplitudes, dtype=np.complex128).reshape(-1)
        size = amps.shape[0]
        if n is None:
            n = size.bit_length() - 1
        if size != 2**n:
            raise DimensionMismatchError(f"Length {size} is not 2**{n}")
        amps.setflags(write=False)
        self._amplitudes = amps
        self.n = n

    @classmethod
    def zero(cls, n: int) -> "StateVector":
        return cls(simulate(n, [])[0], n)

    @property
    def amplitudes(self) -> np.ndarray:
        return self._amplitudes

    @property
    def probabilities(self) -> np.ndarray:
        return np.abs(self._amplitudes) ** 2

    def norm(self) -> float:
        return float(np.sqrt(self.probabilities.sum()))

    def with_global_phase(self, phase: float) -> "StateVector":
        return StateVector(self._amplitudes * np.exp(1j * phase), self.n)

    def __repr__(self) -> str:
        return f"StateVector(n={self.n})"


def apply_gate(state: StateVector, gate: GateOp) -> StateVector:
    """Return the state after one gate"""
    gate.validate(state.n)
    return StateVector(_apply(state.amplitudes[None, :], gate, state.n)[0], state.n)


def apply_gates(state: StateVector, gates: Iterable[GateOp]) -> StateVector:
    return StateVector(evolve(state.amplitudes[None, :], gates, state.n)[0], state.n)


@lru_cache(maxsize=None)
def mean_z_weights(n: int) -> np.ndarray:
    """(1/n) Σ_i z_i for every basis index, z_i = +1 for bit 0 and -1 for bit 1"""
    index = np.arange(2**n)[:, None]
    bits = (index >> (n - 1 - np.arange(n))[None, :]) & 1
    weights = 1.0 - 2.0 * bits.mean(axis=1)
    weights.setflags(write=False)
    return weights


def expectation_mean_z_batch(psi: np.ndarray) -> np.ndarray:
    n = psi.shape[-1].bit_length() - 1
    return (np.abs(psi) ** 2) @ mean_z_weights(n)


def expectation_mean_z(state: StateVector) -> float:
    """⟨(1/n) Σ σ_z^i⟩"""
    return float(state.probabilities @ mean_z_weights(state.n))


def fidelity(a: StateVector, b: StateVector) -> float:
    """|⟨a|b⟩|²"""
    if a.n != b.n:
        raise DimensionMismatchError(f"Fidelity of {a.n}- and {b.n}-qubit states")
    return float(min(1.0, abs(np.vdot(a.amplitudes, b.amplitudes)) ** 2))


def fidelity_batch(psi_a: np.ndarray, psi_b: np.ndarray) -> np.ndarray:
    if psi_a.shape != psi_b.shape:
        raise DimensionMismatchError(f"Shapes {psi_a.shape} and {psi_b.shape} differ")
    overlap = np.sum(np.conj(psi_a) * psi_b, axis=-1)
    return np.clip(np.abs(overlap) ** 2, 0.0, 1.0)


def _sample_from_probabilities(
    probs: np.ndarray, shots: int, rng: np.random.Generator
) -> float:
    cdf = np.cumsum(probs)
    cdf /= cdf[-1]
    outcomes = np.searchsorted(cdf, rng.random(shots), side="right")
    outcomes = np.minimum(outcomes, probs.shape[0] - 1)
    n = probs.shape[0].bit_length() - 1
    return float(mean_z_weights(n)[outcomes].mean())


def sample_mean_z(state: StateVector, shots: int, rng_seed: int) -> float:
    """Shot estimate of the mean magnetization from sampled bitstrings"""
    if shots < 1:
        raise ValueError(f"Shot count must be at least 1, got {shots}")
    rng = np.random.default_rng(rng_seed)
    return _sample_from_probabilities(state.probabilities, shots, rng)


def sample_mean_z_batch(
    psi: np.ndarray, shots: int, rng: np.random.Generator
) -> np.ndarray:
    if shots < 1:
        raise ValueError(f"Shot count must be at least 1, got {shots}")
    probs = np.abs(psi) ** 2
    return np.array([_sample_from_probabilities(p, shots, rng) for p in probs])
