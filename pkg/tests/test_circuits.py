from functools import reduce

import numpy as np
import pytest
from scipy.linalg import expm

from qfm_fingerprint.circuits import (
    AnsatzKind,
    FeatureMapSpec,
    ModelSpec,
    build_ansatz_block,
    build_model_circuit,
    evaluate,
    evaluate_batch,
    param_count,
)
from qfm_fingerprint.errors import DimensionMismatchError
from qfm_fingerprint.statevec import GateKind, evolve, mean_z_weights

PAULI = {
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}


def dense_unitary(gates, n):
    """Brute-force 2^n x 2^n product of Kronecker-expanded gates"""
    eye = np.eye(2, dtype=complex)
    p0 = np.diag([1, 0]).astype(complex)
    p1 = np.diag([0, 1]).astype(complex)
    U = np.eye(2**n, dtype=complex)
    for gate in gates:
        if gate.kind is GateKind.CNOT:
            single = PAULI["X"]
        else:
            single = expm(-0.5j * float(gate.angle) * PAULI[gate.kind.axis])
        if gate.control is None:
            factors = [single if q == gate.target else eye for q in range(n)]
            full = reduce(np.kron, factors)
        else:
            idle = [p0 if q == gate.control else eye for q in range(n)]
            active = [
                p1 if q == gate.control else single if q == gate.target else eye
                for q in range(n)
            ]
            full = reduce(np.kron, idle) + reduce(np.kron, active)
        U = full @ U
    return U


@pytest.mark.parametrize(
    "ansatz, expected",
    [(AnsatzKind.C15, 16), (AnsatzKind.HEA, 24), (AnsatzKind.C16, 22), (AnsatzKind.C18, 24)],
)
def test_param_count(ansatz, expected):
    assert param_count(ansatz, 4, 1) == expected


def test_yzy_block_layout():
    gates = build_ansatz_block(AnsatzKind.YZY, 2, np.arange(6.0))
    assert [(g.kind, g.target, float(g.angle)) for g in gates] == [
        (GateKind.RY, 0, 0.0),
        (GateKind.RZ, 0, 1.0),
        (GateKind.RY, 0, 2.0),
        (GateKind.RY, 1, 3.0),
        (GateKind.RZ, 1, 4.0),
        (GateKind.RY, 1, 5.0),
    ]


def test_c18_block_wiring():
    gates = build_ansatz_block(AnsatzKind.C18, 4, np.arange(12.0))
    rotations = gates[:8]
    assert [g.kind for g in rotations] == [GateKind.RX, GateKind.RZ] * 4
    assert [g.target for g in rotations] == [0, 0, 1, 1, 2, 2, 3, 3]
    entanglers = [(g.kind, g.control, g.target, float(g.angle)) for g in gates[8:]]
    assert entanglers == [
        (GateKind.CRZ, 3, 0, 8.0),
        (GateKind.CRZ, 2, 3, 9.0),
        (GateKind.CRZ, 1, 2, 10.0),
        (GateKind.CRZ, 0, 1, 11.0),
    ]


@pytest.mark.parametrize("ansatz", list(AnsatzKind))
def test_block_times_inverse_is_identity(ansatz):
    n = 3
    rng = np.random.default_rng(11)
    block = build_ansatz_block(ansatz, n, rng.uniform(0, 2 * np.pi, param_count(ansatz, n, 1) // 2))
    inverse = [g.inverse() for g in reversed(block)]
    result = evolve(np.eye(2**n), block + inverse, n)
    np.testing.assert_allclose(result, np.eye(2**n), atol=1e-10)


def test_block_rejects_wrong_parameter_count():
    with pytest.raises(DimensionMismatchError):
        build_ansatz_block(AnsatzKind.C15, 4, np.zeros(7))


def test_model_circuit_structure_one_layer():
    spec = ModelSpec(3, 1, AnsatzKind.C15)
    gates = build_model_circuit(spec, np.zeros(spec.param_count), np.array([0.4]))
    block = 4 * spec.n  # two RY columns and two CNOT rings
    assert len(gates) == 2 * block + spec.n
    encoding = gates[block:block + spec.n]
    assert all(g.kind is GateKind.RY and float(g.angle) == 0.4 for g in encoding)


def test_model_circuit_structure_two_layers():
    spec = ModelSpec(2, 2, AnsatzKind.YZY)
    gates = build_model_circuit(spec, np.zeros(spec.param_count), np.array([0.3]))
    assert len(gates) == 3 * 6 + 2 * 2


def test_two_dimensional_encoding_order():
    spec = ModelSpec(2, 1, AnsatzKind.YZY, FeatureMapSpec(("X", "Y")))
    gates = build_model_circuit(spec, np.zeros(spec.param_count), np.array([0.1, 0.2]))
    encoding = gates[6:10]
    assert [(g.kind, g.target, float(g.angle)) for g in encoding] == [
        (GateKind.RX, 0, 0.1),
        (GateKind.RX, 1, 0.1),
        (GateKind.RY, 0, 0.2),
        (GateKind.RY, 1, 0.2),
    ]


def test_single_qubit_model_is_cosine():
    spec = ModelSpec(1, 1, AnsatzKind.YZY)
    for x in np.linspace(0, 2 * np.pi, 7):
        assert evaluate(spec, np.zeros(6), x) == pytest.approx(np.cos(x), abs=1e-12)


@pytest.mark.parametrize("ansatz", list(AnsatzKind))
def test_output_bounded(ansatz):
    spec = ModelSpec(3, 1, ansatz)
    rng = np.random.default_rng(0)
    thetas = rng.uniform(0, 2 * np.pi, (1000, spec.param_count))
    xs = rng.uniform(0, 2 * np.pi, (1000, 1))
    values = evaluate_batch(spec, thetas, xs)
    assert np.all(np.abs(values) <= 1.0 + 1e-12)


@pytest.mark.parametrize("ansatz", [AnsatzKind.C15, AnsatzKind.C17, AnsatzKind.HEA])
def test_matches_dense_oracle(ansatz):
    n = 3
    spec = ModelSpec(n, 1, ansatz)
    rng = np.random.default_rng(42)
    theta = rng.uniform(0, 2 * np.pi, spec.param_count)
    for x in rng.uniform(0, 2 * np.pi, 5):
        U = dense_unitary(build_model_circuit(spec, theta, np.array([x])), n)
        psi = U[:, 0]
        oracle = float(np.real(np.conj(psi) @ (mean_z_weights(n) * psi)))
        assert evaluate(spec, theta, x) == pytest.approx(oracle, abs=1e-10)


def test_theta_length_checked():
    spec = ModelSpec(2, 1, AnsatzKind.C15)
    with pytest.raises(DimensionMismatchError):
        evaluate(spec, np.zeros(spec.param_count + 1), 0.0)


def test_input_dimension_checked():
    spec = ModelSpec(2, 1, AnsatzKind.C15, FeatureMapSpec(("X", "Y")))
    with pytest.raises(DimensionMismatchError):
        evaluate(spec, np.zeros(spec.param_count), np.array([0.1]))


def test_entangling_ansatz_needs_two_qubits():
    with pytest.raises(ValueError):
        ModelSpec(1, 1, AnsatzKind.HEA)


def test_parse_aliases():
    assert AnsatzKind.parse("circuit-15") is AnsatzKind.C15
    assert AnsatzKind.parse(" hea ") is AnsatzKind.HEA
    with pytest.raises(ValueError):
        AnsatzKind.parse("C20")


def test_spec_json_and_label():
    spec = ModelSpec(4, 2, AnsatzKind.C19, FeatureMapSpec(("x", "y")))
    assert ModelSpec.from_json(spec.to_json()) == spec
    assert spec.label() == "C19_n4_L2_XY"
    assert spec.max_freq == 8


@pytest.mark.parametrize("ansatz", list(AnsatzKind))
def test_model_periodic_in_input(ansatz):
    spec = ModelSpec(3, 2, ansatz)
    rng = np.random.default_rng(5)
    theta = rng.uniform(0, 2 * np.pi, spec.param_count)
    for x in rng.uniform(0, 2 * np.pi, 4):
        assert evaluate(spec, theta, x + 2 * np.pi) == pytest.approx(evaluate(spec, theta, x), abs=1e-10)


@pytest.mark.parametrize("ansatz", list(AnsatzKind))
def test_parameters_periodic_under_four_pi(ansatz):
    spec = ModelSpec(3, 1, ansatz)
    rng = np.random.default_rng(6)
    theta = rng.uniform(0, 2 * np.pi, spec.param_count)
    x = 0.7
    shifted = np.tile(theta, (spec.param_count, 1)) + 4 * np.pi * np.eye(spec.param_count)
    values = evaluate_batch(spec, shifted, np.full((spec.param_count, 1), x))
    np.testing.assert_allclose(values, evaluate(spec, theta, x), rtol=0, atol=1e-10)
