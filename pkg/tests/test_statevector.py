import math

import numpy as np
import pytest

from tfimvqe.statevector import (
    Gate,
    GateKind,
    PauliString,
    StateVector,
    apply_gate,
    apply_pauli_string,
    basis_state,
    expectation_pauli_string,
    inner_product,
    parity_signs,
    zero_state,
)

from conftest import circuit_matrix, dense_pauli_string, gate_matrix

RTOL0 = dict(rtol=0.0, atol=1e-12)


def random_state(n, rng):
    v = rng.standard_normal(1 << n) + 1j * rng.standard_normal(1 << n)
    return StateVector(n, v / np.linalg.norm(v))


def test_zero_and_basis_states():
    assert np.array_equal(zero_state(1).amps, [1, 0])
    assert np.array_equal(zero_state(2).amps, [1, 0, 0, 0])
    z4 = zero_state(4)
    assert z4.amps[0] == 1 and np.count_nonzero(z4.amps) == 1

    assert np.array_equal(basis_state(2, 3).amps, [0, 0, 0, 1])
    assert np.array_equal(basis_state(3, 0).amps, [1, 0, 0, 0, 0, 0, 0, 0])
    # little-endian: bits=1 sets qubit 0
    assert np.array_equal(basis_state(2, 1).amps, [0, 1, 0, 0])


def test_state_validation():
    with pytest.raises(ValueError):
        zero_state(0)
    with pytest.raises(ValueError):
        zero_state(21)
    with pytest.raises(ValueError):
        basis_state(2, 4)
    with pytest.raises(ValueError):
        StateVector(2, np.zeros(3, dtype=complex))


def test_gate_validation():
    with pytest.raises(ValueError):
        Gate(GateKind.RX, (0, 1), angle=0.1)  # 1-qubit gate, 2 qubits
    with pytest.raises(ValueError):
        Gate(GateKind.CX, (1, 1))  # duplicate qubits
    with pytest.raises(ValueError):
        Gate(GateKind.RY, (0,))  # rotation without angle or slot
    with pytest.raises(ValueError):
        Gate(GateKind.RY, (0,), angle=0.3, param=1)  # both
    with pytest.raises(ValueError):
        Gate(GateKind.H, (0,), angle=0.3)  # fixed gate with angle
    with pytest.raises(ValueError):
        Gate(GateKind.RX, (0,), angle=math.inf)
    with pytest.raises(ValueError):
        apply_gate(zero_state(2), Gate(GateKind.RX, (5,), angle=0.1))


def test_ry_half_pi_makes_plus():
    st = apply_gate(zero_state(1), Gate(GateKind.RY, (0,), angle=math.pi / 2))
    np.testing.assert_allclose(st.amps, [1 / math.sqrt(2), 1 / math.sqrt(2)], **RTOL0)


def test_rx_pi_is_minus_i_x():
    st = apply_gate(zero_state(1), Gate(GateKind.RX, (0,), angle=math.pi))
    np.testing.assert_allclose(st.amps, [0, -1j], **RTOL0)


def test_rzz_phase_on_antialigned():
    theta = 0.7
    st = apply_gate(basis_state(2, 1), Gate(GateKind.RZZ, (0, 1), angle=theta))
    # |01> (qubit0=1, qubit1=0) is a ZZ=-1 eigenstate
    np.testing.assert_allclose(st.amps[1], np.exp(0.5j * theta), **RTOL0)
    st2 = apply_gate(basis_state(2, 3), Gate(GateKind.RZZ, (0, 1), angle=theta))
    np.testing.assert_allclose(st2.amps[3], np.exp(-0.5j * theta), **RTOL0)


def test_cx_truth_table():
    # control=0 set -> flips target 1
    st = apply_gate(basis_state(2, 1), Gate(GateKind.CX, (0, 1)))
    assert np.array_equal(st.amps, basis_state(2, 3).amps)
    # control clear -> identity
    st = apply_gate(basis_state(2, 2), Gate(GateKind.CX, (0, 1)))
    assert np.array_equal(st.amps, basis_state(2, 2).amps)
    # reversed orientation
    st = apply_gate(basis_state(2, 2), Gate(GateKind.CX, (1, 0)))
    assert np.array_equal(st.amps, basis_state(2, 3).amps)


def test_inner_product_basics():
    z = zero_state(1)
    one = basis_state(1, 1)
    plus = apply_gate(zero_state(1), Gate(GateKind.RY, (0,), angle=math.pi / 2))
    assert inner_product(z, z) == pytest.approx(1)
    assert inner_product(z, one) == 0
    assert inner_product(plus, z).real == pytest.approx(1 / math.sqrt(2))
    with pytest.raises(ValueError):
        inner_product(zero_state(1), zero_state(2))


def test_inner_product_conjugate_linear_in_first():
    rng = np.random.default_rng(5)
    a, b = random_state(3, rng), random_state(3, rng)
    assert inner_product(a, b) == pytest.approx(np.conj(inner_product(b, a)))


@pytest.mark.parametrize("kind,qubits", [
    (GateKind.RX, (0,)), (GateKind.RY, (1,)), (GateKind.RZ, (2,)),
    (GateKind.RZZ, (0, 2)), (GateKind.RZZ, (3, 1)),
    (GateKind.CX, (1, 3)), (GateKind.CX, (3, 0)),
    (GateKind.H, (2,)), (GateKind.X, (0,)),
])
def test_gates_match_dense_oracle(kind, qubits):
    rng = np.random.default_rng(42)
    theta = 0.937
    n = 4
    st = random_state(n, rng)
    expected = gate_matrix(n, kind.value, qubits, theta) @ st.amps
    gate = (Gate(kind, qubits, angle=theta) if kind.name.startswith("R")
            else Gate(kind, qubits))
    got = apply_gate(st.copy(), gate)
    np.testing.assert_allclose(got.amps, expected, **RTOL0)


def test_random_circuit_matches_dense_oracle():
    rng = np.random.default_rng(9)
    n = 4
    kinds = ["rx", "ry", "rz", "rzz", "cx", "h", "x"]
    for _ in range(20):
        ops = []
        for _ in range(12):
            kind = kinds[rng.integers(len(kinds))]
            if kind in ("rzz", "cx"):
                qubits = tuple(rng.choice(n, size=2, replace=False))
            else:
                qubits = (int(rng.integers(n)),)
            theta = float(rng.uniform(-np.pi, np.pi)) if kind.startswith("r") else None
            ops.append((kind, qubits, theta))
        st = zero_state(n)
        for kind, qubits, theta in ops:
            k = GateKind(kind)
            gate = Gate(k, qubits, angle=theta) if theta is not None else Gate(k, qubits)
            apply_gate(st, gate)
        expected = circuit_matrix(n, ops) @ zero_state(n).amps
        np.testing.assert_allclose(st.amps, expected, rtol=0.0, atol=1e-11)
        assert abs(st.norm() - 1.0) < 1e-10


def test_rotation_composition():
    rng = np.random.default_rng(3)
    for kind in (GateKind.RX, GateKind.RY, GateKind.RZ, GateKind.RZZ):
        qubits = (1,) if kind is not GateKind.RZZ else (0, 1)
        t1, t2 = rng.uniform(-3, 3, 2)
        st = random_state(2, rng)
        a = apply_gate(
            apply_gate(st.copy(), Gate(kind, qubits, angle=t1)),
            Gate(kind, qubits, angle=t2),
        )
        b = apply_gate(st.copy(), Gate(kind, qubits, angle=t1 + t2))
        np.testing.assert_allclose(a.amps, b.amps, **RTOL0)


def test_unitarity_preserves_inner_products():
    rng = np.random.default_rng(17)
    n = 5
    a, b = random_state(n, rng), random_state(n, rng)
    before = inner_product(a, b)
    gates = [
        Gate(GateKind.RY, (0,), angle=0.3),
        Gate(GateKind.CX, (0, 4)),
        Gate(GateKind.RZZ, (1, 3), angle=-1.2),
        Gate(GateKind.H, (2,)),
        Gate(GateKind.RZ, (4,), angle=2.2),
    ]
    for g in gates:
        apply_gate(a, g)
        apply_gate(b, g)
    assert inner_product(a, b) == pytest.approx(before, abs=1e-10)


def test_pauli_string_validation():
    with pytest.raises(ValueError):
        PauliString(())
    with pytest.raises(ValueError):
        PauliString(((0, "X"), (0, "Z")))
    with pytest.raises(ValueError):
        PauliString(((0, "Q"),))
    with pytest.raises(ValueError):
        PauliString(((-1, "X"),))
    p = PauliString(((2, "x"), (0, "z")))
    assert p.factors == ((0, "Z"), (2, "X"))
    assert p.max_site == 2


def test_apply_pauli_string_matches_dense():
    rng = np.random.default_rng(23)
    n = 4
    cases = [{0: "X"}, {1: "Y"}, {3: "Z"}, {0: "Z", 2: "Z"},
             {0: "X", 1: "Y", 2: "Z"}, {0: "Y", 1: "Y", 2: "Y", 3: "Y"}]
    for factors in cases:
        st = random_state(n, rng)
        expected = dense_pauli_string(n, factors) @ st.amps
        got = apply_pauli_string(st, PauliString.from_map(factors))
        np.testing.assert_allclose(got.amps, expected, **RTOL0)
        # input untouched
        assert st.norm() == pytest.approx(1.0)


def test_expectation_examples():
    z = zero_state(1)
    assert expectation_pauli_string(z, PauliString.from_map({0: "Z"})) == pytest.approx(1)
    plus = apply_gate(zero_state(1), Gate(GateKind.RY, (0,), angle=math.pi / 2))
    assert expectation_pauli_string(plus, PauliString.from_map({0: "X"})) == pytest.approx(1)
    zz = PauliString.from_map({0: "Z", 1: "Z"})
    assert expectation_pauli_string(zero_state(2), zz) == pytest.approx(1)
    assert expectation_pauli_string(basis_state(2, 1), zz) == pytest.approx(-1)


def test_expectation_real_and_matches_dense():
    rng = np.random.default_rng(31)
    n = 3
    for factors in ({0: "Y"}, {0: "X", 2: "Y"}, {1: "Z", 2: "X"}):
        st = random_state(n, rng)
        dense = dense_pauli_string(n, factors)
        expected = float(np.real(np.vdot(st.amps, dense @ st.amps)))
        got = expectation_pauli_string(st, PauliString.from_map(factors))
        assert got == pytest.approx(expected, abs=1e-12)


def test_parity_signs():
    signs = parity_signs(3, 0b101)
    expected = [(-1.0) ** (bin(b & 0b101).count("1")) for b in range(8)]
    assert np.array_equal(signs, expected)
    assert np.array_equal(parity_signs(2, 0), np.ones(4))
