import numpy as np
import pytest

from qfm_fingerprint.errors import DimensionMismatchError, InvalidGateError
from qfm_fingerprint.statevec import (
    GateKind,
    GateOp,
    StateVector,
    apply_gate,
    apply_gates,
    evolve,
    expectation_mean_z,
    fidelity,
    mean_z_weights,
    sample_mean_z,
    sample_mean_z_batch,
    simulate,
)


def basis_state(n, index):
    amps = np.zeros(2**n)
    amps[index] = 1.0
    return StateVector(amps, n)


def plus_state():
    return StateVector(np.array([1.0, 1.0]) / np.sqrt(2))


def test_ry_pi_flips_zero():
    state = apply_gate(StateVector.zero(1), GateOp(GateKind.RY, 0, angle=np.pi))
    np.testing.assert_allclose(state.amplitudes, [0.0, 1.0], atol=1e-12)


def test_cnot_on_10_gives_11():
    # qubit 0 is the most significant bit: |10> is index 2
    state = apply_gate(basis_state(2, 2), GateOp(GateKind.CNOT, 1, control=0))
    np.testing.assert_allclose(state.amplitudes, [0, 0, 0, 1], atol=1e-12)


def test_cnot_leaves_control_zero_untouched():
    state = apply_gate(basis_state(2, 1), GateOp(GateKind.CNOT, 1, control=0))
    np.testing.assert_allclose(state.amplitudes, [0, 1, 0, 0], atol=1e-12)


def test_rz_is_phase_only_on_zero():
    theta = 0.7
    state = apply_gate(StateVector.zero(1), GateOp(GateKind.RZ, 0, angle=theta))
    np.testing.assert_allclose(state.amplitudes, [np.exp(-0.5j * theta), 0.0], atol=1e-12)


def test_controlled_rotation_needs_control_set():
    gate = GateOp(GateKind.CRX, 1, control=0, angle=np.pi)
    untouched = apply_gate(basis_state(2, 0), gate)
    np.testing.assert_allclose(untouched.amplitudes, [1, 0, 0, 0], atol=1e-12)
    flipped = apply_gate(basis_state(2, 2), gate)
    np.testing.assert_allclose(np.abs(flipped.amplitudes), [0, 0, 0, 1], atol=1e-12)


def test_norm_preserved_through_random_gates():
    rng = np.random.default_rng(3)
    n = 3
    kinds = list(GateKind)
    gates = []
    for _ in range(40):
        kind = kinds[int(rng.integers(len(kinds)))]
        target = int(rng.integers(n))
        if kind.controlled:
            control = int((target + rng.integers(1, n)) % n)
            angle = None if kind is GateKind.CNOT else rng.uniform(0, 2 * np.pi)
            gates.append(GateOp(kind, target, control=control, angle=angle))
        else:
            gates.append(GateOp(kind, target, angle=rng.uniform(0, 2 * np.pi)))
    state = StateVector.zero(n)
    for gate in gates:
        state = apply_gate(state, gate)
        assert state.norm() == pytest.approx(1.0, abs=1e-12)
        assert state.amplitudes.shape == (2**n,)


def test_invalid_gates_rejected():
    state = StateVector.zero(2)
    with pytest.raises(InvalidGateError):
        apply_gate(state, GateOp(GateKind.CNOT, 1, control=1))
    with pytest.raises(InvalidGateError):
        apply_gate(state, GateOp(GateKind.RX, 2, angle=0.1))
    with pytest.raises(InvalidGateError):
        apply_gate(state, GateOp(GateKind.CRZ, 0, control=5, angle=0.1))
    with pytest.raises(InvalidGateError):
        apply_gate(state, GateOp(GateKind.RY, 0))


def test_state_is_immutable():
    state = StateVector.zero(1)
    with pytest.raises(ValueError):
        state.amplitudes[0] = 0.0


def test_wrong_length_rejected():
    with pytest.raises(DimensionMismatchError):
        StateVector(np.ones(3), 2)
    with pytest.raises(DimensionMismatchError):
        evolve(np.ones((1, 3)), [], 2)


def test_per_row_angles_match_single_runs():
    angles = np.array([0.1, 1.2, 2.9])
    gates = [GateOp(GateKind.RY, 0, angle=angles), GateOp(GateKind.CRZ, 1, control=0, angle=2 * angles)]
    batch = simulate(2, gates, batch=3)
    for row, a in enumerate(angles):
        single = apply_gates(
            StateVector.zero(2),
            [GateOp(GateKind.RY, 0, angle=a), GateOp(GateKind.CRZ, 1, control=0, angle=2 * a)],
        )
        np.testing.assert_allclose(batch[row], single.amplitudes, atol=1e-14)


def test_mean_z_examples():
    assert expectation_mean_z(StateVector.zero(3)) == pytest.approx(1.0)
    assert expectation_mean_z(basis_state(3, 7)) == pytest.approx(-1.0)
    assert expectation_mean_z(plus_state()) == pytest.approx(0.0, abs=1e-12)
    assert expectation_mean_z(basis_state(2, 1)) == pytest.approx(0.0)


def test_fidelity_examples():
    zero = StateVector.zero(1)
    assert fidelity(zero, zero) == pytest.approx(1.0)
    assert fidelity(zero, basis_state(1, 1)) == pytest.approx(0.0)
    half = apply_gate(zero, GateOp(GateKind.RY, 0, angle=np.pi / 2))
    assert fidelity(zero, half) == pytest.approx(0.5)
    assert fidelity(half, half.with_global_phase(1.3)) == pytest.approx(1.0)


def test_fidelity_qubit_mismatch():
    with pytest.raises(DimensionMismatchError):
        fidelity(StateVector.zero(1), StateVector.zero(2))


def test_sampled_mean_z_deterministic_outcome():
    assert sample_mean_z(StateVector.zero(4), 17, rng_seed=5) == 1.0


def test_sampled_mean_z_plus_state():
    estimate = sample_mean_z(plus_state(), 10**6, rng_seed=1)
    assert abs(estimate) < 3e-3


def test_sampled_mean_z_seeded():
    state = plus_state()
    assert sample_mean_z(state, 100, 9) == sample_mean_z(state, 100, 9)


def test_sampled_mean_z_needs_shots():
    with pytest.raises(ValueError):
        sample_mean_z(plus_state(), 0, 0)


def test_shot_estimates_centre_on_exact_expectation():
    rng = np.random.default_rng(11)
    amps = rng.normal(size=8) + 1j * rng.normal(size=8)
    state = StateVector(amps / np.linalg.norm(amps), 3)
    shots, trials = 256, 10_000
    estimates = sample_mean_z_batch(np.tile(state.amplitudes, (trials, 1)), shots, rng)
    weights = mean_z_weights(3)
    exact = expectation_mean_z(state)
    per_shot = state.probabilities @ weights**2 - exact**2
    stderr = np.sqrt(per_shot / shots / trials)
    assert abs(estimates.mean() - exact) < 5 * stderr
    assert estimates.std() == pytest.approx(np.sqrt(per_shot / shots), rel=0.05)
