from functools import reduce

import numpy as np
import pytest

from qcut.circuit import Circuit, CircuitBuilder, Gate, random_circuit
from qcut.simulator import (
    CapacityError,
    VariantOutcome,
    apply_gate,
    gate_matrix,
    pack_binary,
    probabilities,
    read_binary,
    run_variant,
    simulate_density,
    simulate_statevector,
    unpack_binary,
    write_binary,
)

ALL_KINDS = ["H", "X", "Y", "Z", "S", "Sdg", "T", "Tdg", "SX", "SY", "RX", "RY", "RZ", "CZ", "CX"]


def full_unitary(circuit: Circuit) -> np.ndarray:
    """Explicit 2**n x 2**n matrix product, qubit 0 most significant."""
    n = circuit.n_qubits
    eye = np.eye(2, dtype=complex)
    total = np.eye(2**n, dtype=complex)
    for g in circuit.gates:
        m = gate_matrix(g)
        if len(g.qubits) == 1:
            ops = [m if q == g.qubits[0] else eye for q in range(n)]
            u = reduce(np.kron, ops)
        else:
            u = np.zeros((2**n, 2**n), dtype=complex)
            a, b = g.qubits
            for col in range(2**n):
                bits = [(col >> (n - 1 - q)) & 1 for q in range(n)]
                sub_in = 2 * bits[a] + bits[b]
                for sub_out in range(4):
                    amp = m[sub_out, sub_in]
                    if amp == 0:
                        continue
                    out = list(bits)
                    out[a], out[b] = sub_out >> 1, sub_out & 1
                    row = sum(bit << (n - 1 - q) for q, bit in enumerate(out))
                    u[row, col] += amp
        total = u @ total
    return total


def random_state(n, rng):
    v = rng.normal(size=2**n) + 1j * rng.normal(size=2**n)
    return (v / np.linalg.norm(v)).reshape((2,) * n)


def test_hadamard():
    amp = simulate_statevector(CircuitBuilder(1).h(0).build())
    assert np.allclose(amp, [2**-0.5, 2**-0.5], atol=1e-12)
    assert np.allclose(probabilities(CircuitBuilder(1).h(0).build()), [0.5, 0.5])


def test_empty_circuit():
    amp = simulate_statevector(Circuit(3, ()))
    assert amp[0] == 1 and np.count_nonzero(amp) == 1


def test_qubit_zero_is_most_significant():
    p = probabilities(CircuitBuilder(3).x(0).build())
    assert p[0b100] == 1.0


@pytest.mark.parametrize("seed", range(10))
def test_matches_full_unitary(seed):
    rng = np.random.default_rng(seed)
    c = random_circuit(6, 40, rng)
    expected = full_unitary(c)[:, 0]
    assert np.abs(simulate_statevector(c) - expected).max() < 1e-10


def test_norm_preserved_each_gate(rng):
    c = random_circuit(5, 60, rng)
    psi = random_state(5, rng)
    for g in c.gates:
        psi = apply_gate(psi, g)
        assert abs(np.linalg.norm(psi) - 1) < 1e-10


@pytest.mark.parametrize("kind", ALL_KINDS)
def test_gate_unitarity(kind, rng):
    arity = 2 if kind in ("CZ", "CX") else 1
    params = (float(rng.uniform(-3, 3)),) if kind.startswith("R") else ()
    g = Gate(kind, (2, 0) if arity == 2 else (1,), params)
    m = gate_matrix(g)
    assert np.allclose(m @ m.conj().T, np.eye(len(m)), atol=1e-12)
    psi = random_state(3, rng)
    moved = apply_gate(psi, g).reshape(-1)
    u = full_unitary(Circuit(3, (g,)))
    assert np.abs(u.conj().T @ moved - psi.reshape(-1)).max() < 1e-10


def test_x_basis_measurement_formula(rng):
    for _ in range(20):
        theta, phi = rng.uniform(0, np.pi), rng.uniform(0, 2 * np.pi)
        c = CircuitBuilder(1).ry(theta, 0).rz(phi, 0).h(0).build()
        a = np.cos(theta / 2) * np.exp(-1j * phi / 2)
        b = np.sin(theta / 2) * np.exp(1j * phi / 2)
        plus = abs(a + b) ** 2 / 2
        assert probabilities(c)[0] == pytest.approx(plus, abs=1e-12)


def test_y_basis_measurement_formula(rng):
    for _ in range(20):
        theta, phi = rng.uniform(0, np.pi), rng.uniform(0, 2 * np.pi)
        c = CircuitBuilder(1).ry(theta, 0).rz(phi, 0).sdg(0).h(0).build()
        a = np.cos(theta / 2) * np.exp(-1j * phi / 2)
        b = np.sin(theta / 2) * np.exp(1j * phi / 2)
        plus_i = abs(a - 1j * b) ** 2 / 2
        assert probabilities(c)[0] == pytest.approx(plus_i, abs=1e-12)


def test_z_phase_invariance(rng):
    c = random_circuit(4, 30, rng)
    tail = CircuitBuilder(4).z(0).z(2).s(3).t(1).build()
    assert np.allclose(probabilities(c), probabilities(c.append(*tail.gates)), atol=1e-12)


def test_capacity(monkeypatch):
    with pytest.raises(CapacityError):
        simulate_statevector(Circuit(5, ()), cap=4)
    monkeypatch.setenv("QCUT_ORACLE_CAP", "3")
    with pytest.raises(CapacityError):
        probabilities(Circuit(4, ()))


def test_exact_mode_equals_probabilities(rng):
    c = random_circuit(4, 20, rng)
    out = run_variant(c)
    assert np.array_equal(out.probabilities, probabilities(c))
    assert out.probabilities.sum() == pytest.approx(1.0, abs=1e-10)


def test_shots_concentration():
    c = CircuitBuilder(1).h(0).build()
    out = run_variant(c, "shots", 8192, seed=3)
    assert out.counts.sum() == 8192
    sigma = np.sqrt(8192 * 0.25)
    assert abs(out.counts[0] - 4096) <= 4 * sigma


def test_shots_deterministic_per_seed(rng):
    c = random_circuit(3, 15, rng)
    a = run_variant(c, "shots", 1000, seed=9, stream=(1, 2))
    b = run_variant(c, "shots", 1000, seed=9, stream=(1, 2))
    other = run_variant(c, "shots", 1000, seed=9, stream=(1, 3))
    assert np.array_equal(a.counts, b.counts)
    assert not np.array_equal(a.counts, other.counts)


def test_shot_errors():
    c = CircuitBuilder(1).h(0).build()
    with pytest.raises(ValueError):
        run_variant(c, "shots", 0)
    with pytest.raises(ValueError):
        run_variant(c, "sampled")


def test_noiseless_density_matches_statevector(rng):
    c = random_circuit(3, 20, rng)
    assert np.allclose(simulate_density(c, 0.0), probabilities(c), atol=1e-12)


def test_full_depolarizing_single_qubit():
    # error 3/4 on one qubit is the completely depolarizing channel
    p = simulate_density(CircuitBuilder(1).x(0).build(), 0.75)
    assert np.allclose(p, [0.5, 0.5], atol=1e-12)


def test_depolarizing_blurs(rng):
    c = CircuitBuilder(2).h(0).cx(0, 1).build()
    p = simulate_density(c, 0.05)
    assert p.sum() == pytest.approx(1.0)
    assert p[0b01] > 0 and p[0b10] > 0


def test_binary_round_trip(tmp_path, rng):
    v = rng.normal(size=16)
    path = tmp_path / "p.bin"
    write_binary(path, v)
    raw = path.read_bytes()
    assert raw[:8] == b"QCUTPRB1" and len(raw) == 8 + 16 * 8
    assert np.array_equal(read_binary(path), v)
    assert np.array_equal(unpack_binary(pack_binary(v)), v)
    with pytest.raises(ValueError):
        unpack_binary(b"NOTMAGIC" + raw[8:])


def test_outcome_json_round_trip(rng):
    c = random_circuit(2, 5, rng)
    out = run_variant(c, "shots", 64, seed=1)
    back = VariantOutcome.from_json(out.to_json())
    assert back.mode == "shots" and back.shots == 64
    assert np.array_equal(back.counts, out.counts)
    assert np.allclose(back.probabilities, out.probabilities)
