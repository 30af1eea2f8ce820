#!/usr/bin/env python3
"""Ansatz zoo, Pauli feature maps and the layered model

    U(x, θ) = W^(L+1) S(x) W^(L) ... W^(2) S(x) W^(1)


evaluated as f(x, θ) = ⟨0|U† M U|0⟩ with M the mean magnetization.

Parameters may be given as one vector (P,) or as a batch (B, P); inputs as one
point (D,) or a batch (B, D). Batched arguments turn into per-row gate angles.
"""

import json
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Dict, List, Tuple

import numpy as np

from .errors import DimensionMismatchError
from .statevec import (
    MAX_QUBITS,
    GateKind,
    GateOp,
    expectation_mean_z_batch,
    simulate,
)


class AnsatzKind(str, Enum):
    YZY = "YZY"
    YZY_ENTANGLING = "YZY_ENTANGLING"
    HEA = "HEA"
    C15 = "C15"
    C16 = "C16"
    C17 = "C17"
    C18 = "C18"
    C19 = "C19"

    @classmethod
    def parse(cls, name: str) -> "AnsatzKind":
        key = name.strip().upper().replace("-", "_")
        aliases = {"CIRCUIT_15": "C15", "CIRCUIT_16": "C16", "CIRCUIT_17": "C17",
                   "CIRCUIT_18": "C18", "CIRCUIT_19": "C19",
                   "HARDWARE_EFFICIENT": "HEA", "YZY_ENT": "YZY_ENTANGLING"}
        key = aliases.get(key, key)
        try:
            return cls(key)
        except ValueError:
            known = ", ".join(k.value for k in cls)
            raise ValueError(f"Unknown ansatz '{name}' (known: {known})") from None


class Observable(str, Enum):
    MEAN_Z = "mean_z"


_BLOCK_PARAMS: Dict[AnsatzKind, Callable[[int], int]] = {
    AnsatzKind.YZY: lambda n: 3 * n,
    AnsatzKind.YZY_ENTANGLING: lambda n: 3 * n,
    AnsatzKind.HEA: lambda n: 3 * n,
    AnsatzKind.C15: lambda n: 2 * n,
    AnsatzKind.C16: lambda n: 3 * n - 1,
    AnsatzKind.C17: lambda n: 3 * n - 1,
    AnsatzKind.C18: lambda n: 3 * n,
    AnsatzKind.C19: lambda n: 3 * n,
}

CONTROLLED_ROTATION_KINDS = frozenset(
    {AnsatzKind.C16, AnsatzKind.C17, AnsatzKind.C18, AnsatzKind.C19}
)


def min_qubits(ansatz: AnsatzKind) -> int:
    return 1 if ansatz is AnsatzKind.YZY else 2


def uses_controlled_rotations(ansatz: AnsatzKind) -> bool:
    return ansatz in CONTROLLED_ROTATION_KINDS


def block_param_count(ansatz: AnsatzKind, n: int) -> int:
    if n < min_qubits(ansatz):
        raise ValueError(
            f"{ansatz.value} needs at least {min_qubits(ansatz)} qubits, got {n}"
        )
    return _BLOCK_PARAMS[ansatz](n)


def param_count(ansatz: AnsatzKind, n: int, L: int) -> int:
    """Parameters of the L+1 independent ansatz blocks"""
    if L < 1:
        raise ValueError(f"Layer count must be at least 1, got {L}")
    return (L + 1) * block_param_count(ansatz, n)


@dataclass(frozen=True)
class FeatureMapSpec:
    """One Pauli axis per input dimension, applied to every qubit"""

    axes: Tuple[str, ...] = ("Y",)

    def __post_init__(self):
        axes = tuple(a.strip().upper() for a in self.axes)
        if not axes:
            raise ValueError("Feature map needs at least one axis")
        for axis in axes:
            if axis not in ("X", "Y", "Z"):
                raise ValueError(f"Unknown Pauli axis '{axis}'")
        object.__setattr__(self, "axes", axes)

    @property
    def dims(self) -> int:
        return len(self.axes)


@dataclass(frozen=True)
class ModelSpec:
    n: int
    layers: int
    ansatz: AnsatzKind
    fm: FeatureMapSpec = field(default_factory=FeatureMapSpec)
    observable: Observable = Observable.MEAN_Z

    def __post_init__(self):
        if not 1 <= self.n <= MAX_QUBITS:
            raise ValueError(f"Qubit count must be 1-{MAX_QUBITS}, got {self.n}")
        if self.layers < 1:
            raise ValueError(f"Layer count must be at least 1, got {self.layers}")
        if not isinstance(self.ansatz, AnsatzKind):
            object.__setattr__(self, "ansatz", AnsatzKind.parse(str(self.ansatz)))
        block_param_count(self.ansatz, self.n)

    @property
    def dims(self) -> int:
        return self.fm.dims

    @property
    def max_freq(self) -> int:
        """nL: the band is [-nL, nL]^D"""
        return self.n * self.layers

    @property
    def block_params(self) -> int:
        return block_param_count(self.ansatz, self.n)

    @property
    def param_count(self) -> int:
        return param_count(self.ansatz, self.n, self.layers)

    def to_dict(self) -> Dict:
        return {
            "n": self.n,
            "layers": self.layers,
            "ansatz": self.ansatz.value,
            "axes": list(self.fm.axes),
            "observable": self.observable.value,
        }

    @classmethod
    def from_dict(cls, data: Dict) -> "ModelSpec":
        return cls(
            n=int(data["n"]),
            layers=int(data["layers"]),
            ansatz=AnsatzKind.parse(data["ansatz"]),
            fm=FeatureMapSpec(tuple(data.get("axes", ["Y"]))),
            observable=Observable(data.get("observable", Observable.MEAN_Z.value)),
        )

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "ModelSpec":
        return cls.from_dict(json.loads(text))

    def label(self) -> str:
        return f"{self.ansatz.value}_n{self.n}_L{self.layers}_{''.join(self.fm.axes)}"


def _rot(kind: GateKind, q: int, angle) -> GateOp:
    return GateOp(kind, q, angle=angle)


def _ctrl(kind: GateKind, control: int, target: int, angle=None) -> GateOp:
    return GateOp(kind, target, control=control, angle=angle)


def _yzy_columns(n: int, w) -> List[GateOp]:
    gates = []
    for q in range(n):
        gates.append(_rot(GateKind.RY, q, w[3 * q]))
        gates.append(_rot(GateKind.RZ, q, w[3 * q + 1]))
        gates.append(_rot(GateKind.RY, q, w[3 * q + 2]))
    return gates


def _xz_columns(n: int, w) -> List[GateOp]:
    gates = []
    for q in range(n):
        gates.append(_rot(GateKind.RX, q, w[2 * q]))
        gates.append(_rot(GateKind.RZ, q, w[2 * q + 1]))
    return gates


def _ring(n: int) -> List[Tuple[int, int]]:
    """(control, target) pairs (n-1 -> 0), (n-2 -> n-1), ..., (0 -> 1)"""
    return [(n - q - 1, (n - q) % n) for q in range(n)]


def _pairwise(n: int) -> List[Tuple[int, int]]:
    """(1 -> 0), (3 -> 2), ... then (2 -> 1), (4 -> 3), ..."""
    first = [(2 * q + 1, 2 * q) for q in range(n // 2)]
    second = [(2 * q + 2, 2 * q + 1) for q in range((n - 1) // 2)]
    return first + second


def _block_yzy(n, w):
    return _yzy_columns(n, w)


def _block_yzy_entangling(n, w):
    gates = _yzy_columns(n, w)
    for i in range(n):
        for j in range(i + 1, n):
            gates.append(_ctrl(GateKind.CNOT, i, j))
    return gates


def _block_hea(n, w):
    gates = _yzy_columns(n, w)
    for q in range(n // 2):
        gates.append(_ctrl(GateKind.CNOT, 2 * q, 2 * q + 1))
    for q in range((n - 1) // 2):
        gates.append(_ctrl(GateKind.CNOT, 2 * q + 1, 2 * q + 2))
    # the wrap gate closes the ring; for n = 2 it is 1 -> 0 after 0 -> 1
    gates.append(_ctrl(GateKind.CNOT, n - 1, 0))
    return gates


def _block_c15(n, w):
    gates = [_rot(GateKind.RY, q, w[q]) for q in range(n)]
    gates += [_ctrl(GateKind.CNOT, c, t) for c, t in _ring(n)]
    gates += [_rot(GateKind.RY, q, w[n + q]) for q in range(n)]
    gates += [_ctrl(GateKind.CNOT, (q - 1) % n, (q - 2) % n) for q in range(n)]
    return gates


def _controlled_block(kind: GateKind, pairs_fn):
    def build(n, w):
        gates = _xz_columns(n, w)
        for k, (c, t) in enumerate(pairs_fn(n)):
            gates.append(_ctrl(kind, c, t, w[2 * n + k]))
        return gates

    return build


_BUILDERS = {
    AnsatzKind.YZY: _block_yzy,
    AnsatzKind.YZY_ENTANGLING: _block_yzy_entangling,
    AnsatzKind.HEA: _block_hea,
    AnsatzKind.C15: _block_c15,
    AnsatzKind.C16: _controlled_block(GateKind.CRZ, _pairwise),
    AnsatzKind.C17: _controlled_block(GateKind.CRX, _pairwise),
    AnsatzKind.C18: _controlled_block(GateKind.CRZ, _ring),
    AnsatzKind.C19: _controlled_block(GateKind.CRX, _ring),
}


def build_ansatz_block(
    ansatz: AnsatzKind, n: int, block_params: np.ndarray
) -> List[GateOp]:
    """Gate list of one trainable block W(θ)"""
    params = np.asarray(block_params, dtype=np.float64)
    expected = block_param_count(ansatz, n)
    if params.shape[-1] != expected:
        raise DimensionMismatchError(
            f"{ansatz.value} on {n} qubits takes {expected} parameters, "
            f"got {params.shape[-1]}"
        )
    columns = [params[..., k] for k in range(expected)]
    return _BUILDERS[ansatz](n, columns)


def _check_theta(spec: ModelSpec, theta: np.ndarray) -> np.ndarray:
    theta = np.asarray(theta, dtype=np.float64)
    if theta.shape[-1] != spec.param_count:
        raise DimensionMismatchError(
            f"Model {spec.label()} takes {spec.param_count} parameters, "
            f"got {theta.shape[-1]}"
        )
    return theta


def encoding_layer(spec: ModelSpec, x: np.ndarray) -> List[GateOp]:
    """S(x): R_axis_d(x_d) on every qubit, dimension by dimension"""
    x = np.asarray(x, dtype=np.float64)
    if x.shape[-1] != spec.dims:
        raise DimensionMismatchError(
            f"Feature map expects {spec.dims}-dimensional input, got {x.shape[-1]}"
        )
    gates = []
    for d, axis in enumerate(spec.fm.axes):
        kind = GateKind("R" + axis)
        for q in range(spec.n):
            gates.append(_rot(kind, q, x[..., d]))
    return gates


def _blocks(spec: ModelSpec, theta: np.ndarray) -> List[List[GateOp]]:
    size = spec.block_params
    return [
        build_ansatz_block(spec.ansatz, spec.n, theta[..., l * size:(l + 1) * size])
        for l in range(spec.layers + 1)
    ]


def build_model_circuit(spec: ModelSpec, theta: np.ndarray, x: np.ndarray) -> List[GateOp]:
    """block_1, S(x), block_2, ..., S(x), block_(L+1)"""
    theta = _check_theta(spec, theta)
    encoding = encoding_layer(spec, x)
    blocks = _blocks(spec, theta)
    gates = list(blocks[0])
    for block in blocks[1:]:
        gates.extend(encoding)
        gates.extend(block)
    return gates


def ansatz_circuit(spec: ModelSpec, theta: np.ndarray) -> List[GateOp]:
    """All L+1 blocks composed, without encoding gates"""
    theta = _check_theta(spec, theta)
    return [gate for block in _blocks(spec, theta) for gate in block]


def _batch_size(*arrays: np.ndarray) -> int:
    sizes = {a.shape[0] for a in arrays if a.ndim == 2}
    if len(sizes) > 1:
        raise DimensionMismatchError(f"Inconsistent batch sizes: {sorted(sizes)}")
    return sizes.pop() if sizes else 1


def evaluate_batch(spec: ModelSpec, theta: np.ndarray, xs: np.ndarray) -> np.ndarray:
    """f(x, θ) for every row; θ and xs broadcast over the batch"""
    theta = _check_theta(spec, theta)
    xs = np.asarray(xs, dtype=np.float64)
    batch = _batch_size(theta, xs)
    psi = simulate(spec.n, build_model_circuit(spec, theta, xs), batch)
    return expectation_mean_z_batch(psi)


def evaluate(spec: ModelSpec, theta: np.ndarray, x: np.ndarray) -> float:
    """f(x, θ) ∈ [-1, 1]"""
    x = np.atleast_1d(np.asarray(x, dtype=np.float64))
    return float(evaluate_batch(spec, np.asarray(theta, dtype=np.float64), x)[0])


def random_parameters(spec: ModelSpec, rng: np.random.Generator) -> np.ndarray:
    return rng.uniform(0.0, 2.0 * np.pi, spec.param_count)
