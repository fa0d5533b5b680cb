"""Dense statevector simulator, used both as the uncut-circuit oracle and as
the stand-in small device that runs subcircuit variants.

Amplitudes are stored as an ``(2,) * n`` tensor with qubit ``i`` on axis
``i``; flattening in C order puts qubit 0 in the most significant bit.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field
from typing import Any

import numpy as np

from .circuit import Circuit, Gate

DEFAULT_CAPACITY = 26
BINARY_MAGIC = b"QCUTPRB1"

_S2 = 1 / np.sqrt(2)
_FIXED = {
    "H": np.array([[_S2, _S2], [_S2, -_S2]], dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
    "S": np.array([[1, 0], [0, 1j]], dtype=complex),
    "Sdg": np.array([[1, 0], [0, -1j]], dtype=complex),
    "T": np.array([[1, 0], [0, np.exp(1j * np.pi / 4)]], dtype=complex),
    "Tdg": np.array([[1, 0], [0, np.exp(-1j * np.pi / 4)]], dtype=complex),
    "SX": 0.5 * np.array([[1 + 1j, 1 - 1j], [1 - 1j, 1 + 1j]], dtype=complex),
    "SY": 0.5 * np.array([[1 + 1j, -1 - 1j], [1 + 1j, 1 + 1j]], dtype=complex),
}


class CapacityError(RuntimeError):
    """The circuit is wider than the simulator is allowed to allocate."""


def capacity() -> int:
    return int(os.environ.get("QCUT_ORACLE_CAP", DEFAULT_CAPACITY))


def _check_capacity(n: int, cap: int | None):
    # an explicit cap (a device size) can only tighten the global limit
    cap = capacity() if cap is None else min(cap, capacity())
    if n > cap:
        raise CapacityError(f"{n} qubits exceeds simulator capacity of {cap}")


def gate_matrix(gate: Gate) -> np.ndarray:
    """Unitary of ``gate``; two-qubit matrices use (first qubit, second qubit) order."""
    kind = gate.kind
    if kind in _FIXED:
        return _FIXED[kind]
    if kind in ("RX", "RY", "RZ"):
        t = gate.params[0] / 2
        c, s = np.cos(t), np.sin(t)
        if kind == "RX":
            return np.array([[c, -1j * s], [-1j * s, c]], dtype=complex)
        if kind == "RY":
            return np.array([[c, -s], [s, c]], dtype=complex)
        return np.array([[np.exp(-1j * t), 0], [0, np.exp(1j * t)]], dtype=complex)
    if kind == "CZ":
        return np.diag([1, 1, 1, -1]).astype(complex)
    if kind == "CX":
        return np.array(
            [[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]], dtype=complex
        )
    raise ValueError(kind)


def _apply_1q(psi: np.ndarray, m: np.ndarray, q: int) -> np.ndarray:
    out = np.tensordot(m, psi, axes=([1], [q]))
    return np.moveaxis(out, 0, q)


def _index(n: int, fixed: dict[int, int]) -> tuple:
    idx: list[Any] = [slice(None)] * n
    for q, b in fixed.items():
        idx[q] = b
    return tuple(idx)


def apply_gate(psi: np.ndarray, gate: Gate) -> np.ndarray:
    """Apply ``gate`` to a ``(2,)*n`` tensor, returning a new tensor."""
    n = psi.ndim
    if not gate.is_two_qubit:
        return _apply_1q(psi, gate_matrix(gate), gate.qubits[0])
    a, b = gate.qubits
    out = psi.copy()
    if gate.kind == "CZ":
        out[_index(n, {a: 1, b: 1})] *= -1
    else:
        out[_index(n, {a: 1, b: 0})] = psi[_index(n, {a: 1, b: 1})]
        out[_index(n, {a: 1, b: 1})] = psi[_index(n, {a: 1, b: 0})]
    return out


def simulate_statevector(circuit: Circuit, cap: int | None = None) -> np.ndarray:
    """Final state of ``circuit`` applied to ``|0...0>`` as a flat vector."""
    n = circuit.n_qubits
    _check_capacity(n, cap)
    psi = np.zeros((2,) * n, dtype=complex)
    psi[(0,) * n] = 1.0
    for g in circuit.gates:
        psi = apply_gate(psi, g)
    return psi.reshape(-1)


def probabilities(circuit: Circuit, cap: int | None = None) -> np.ndarray:
    amp = simulate_statevector(circuit, cap)
    p = amp.real**2 + amp.imag**2
    return p


# ---------------------------------------------------------------------------
# depolarizing noise (density matrix)


def _depolarize(rho: np.ndarray, qubits: tuple[int, ...], p: float, n: int) -> np.ndarray:
    # sum over all Paulis P on S of P rho P equals 2^k Tr_S(rho) (x) I_S, so
    # (1-p) rho + p/(4^k-1) sum_{P != I} P rho P needs only one partial trace
    k = len(qubits)
    d = 4**k
    traced = rho
    for q in sorted(qubits, reverse=True):
        traced = np.trace(traced, axis1=q, axis2=q + traced.ndim // 2)
    mixed = np.zeros_like(rho)
    for bits in np.ndindex(*(2,) * k):
        idx: list[Any] = [slice(None)] * (2 * n)
        for q, b in zip(qubits, bits):
            idx[q] = idx[n + q] = b
        mixed[tuple(idx)] = traced / 2**k
    return (1 - p - p / (d - 1)) * rho + (p * d / (d - 1)) * mixed


def simulate_density(circuit: Circuit, error: float, cap: int | None = None) -> np.ndarray:
    """Probabilities of ``circuit`` with a depolarizing channel after every gate."""
    n = circuit.n_qubits
    _check_capacity(n, cap)
    _check_capacity(2 * n, None)  # the density matrix costs as much as 2n qubits
    rho = np.zeros((2,) * (2 * n), dtype=complex)
    rho[(0,) * (2 * n)] = 1.0
    for g in circuit.gates:
        u = gate_matrix(g)
        if g.is_two_qubit:
            u = u.reshape(2, 2, 2, 2)
            a, b = g.qubits
            for axes, mat in (((a, b), u), ((n + a, n + b), u.conj())):
                rho = np.tensordot(mat, rho, axes=([2, 3], list(axes)))
                rho = np.moveaxis(rho, [0, 1], list(axes))
        else:
            q = g.qubits[0]
            rho = _apply_1q(rho, u, q)
            rho = _apply_1q(rho, u.conj(), n + q)
        if error > 0:
            rho = _depolarize(rho, g.qubits, error, n)
    diag = np.einsum("ii->i", rho.reshape(2**n, 2**n)).real
    return np.clip(diag, 0.0, None) / diag.sum()


# ---------------------------------------------------------------------------
# device stand-in


def sample_counts(p: np.ndarray, shots: int, rng: np.random.Generator) -> np.ndarray:
    """Histogram of ``shots`` draws from ``p`` by inverse-CDF sampling."""
    if shots < 1:
        raise ValueError("shots must be >= 1")
    cdf = np.cumsum(p)
    cdf /= cdf[-1]
    draws = np.searchsorted(cdf, rng.random(shots), side="right")
    return np.bincount(np.minimum(draws, len(p) - 1), minlength=len(p))


def variant_rng(seed: int, *key: int) -> np.random.Generator:
    """Independent named stream for one variant, stable across schedules."""
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=tuple(key)))


@dataclass
class VariantOutcome:
    probabilities: np.ndarray
    mode: str = "exact"
    shots: int | None = None
    counts: np.ndarray | None = None
    variant: Any = None
    meta: dict = field(default_factory=dict)

    @property
    def n_qubits(self) -> int:
        return int(np.log2(len(self.probabilities)))

    def to_json(self) -> str:
        data = {
            "mode": self.mode,
            "shots": self.shots,
            "variant": getattr(self.variant, "label", self.variant),
            "probabilities": self.probabilities.tolist(),
        }
        if self.counts is not None:
            data["counts"] = self.counts.tolist()
        return json.dumps(data)

    @classmethod
    def from_json(cls, text: str) -> VariantOutcome:
        data = json.loads(text)
        counts = data.get("counts")
        return cls(
            np.asarray(data["probabilities"], dtype=float),
            data["mode"],
            data.get("shots"),
            None if counts is None else np.asarray(counts, dtype=np.int64),
            data.get("variant"),
        )


def run_variant(
    circuit: Circuit,
    mode: str = "exact",
    shots: int | None = None,
    seed: int = 0,
    stream: tuple[int, ...] = (),
    noise: float = 0.0,
    variant: Any = None,
    cap: int | None = None,
) -> VariantOutcome:
    """Execute one variant circuit.

    ``mode="exact"`` returns the noiseless (or noisy, with ``noise > 0``)
    distribution; ``mode="shots"`` draws a seeded histogram from it using the
    stream ``(seed, *stream)``.
    """
    if noise > 0:
        p = simulate_density(circuit, noise, cap)
    else:
        p = probabilities(circuit, cap)
    if mode == "exact":
        return VariantOutcome(p, "exact", variant=variant)
    if mode != "shots":
        raise ValueError(f"unknown mode {mode!r}")
    if shots is None or shots < 1:
        raise ValueError("shots mode needs shots >= 1")
    counts = sample_counts(p, shots, variant_rng(seed, *stream))
    return VariantOutcome(counts / shots, "shots", shots, counts, variant)


# ---------------------------------------------------------------------------
# QCUTPRB1 flat binary


def write_binary(path, values: np.ndarray) -> None:
    data = np.asarray(values, dtype="<f8")
    with open(path, "wb") as fh:
        fh.write(BINARY_MAGIC)
        fh.write(data.tobytes())


def read_binary(path) -> np.ndarray:
    with open(path, "rb") as fh:
        head = fh.read(len(BINARY_MAGIC))
        if head != BINARY_MAGIC:
            raise ValueError(f"{path}: not a QCUTPRB1 file")
        return np.frombuffer(fh.read(), dtype="<f8").copy()


def pack_binary(values: np.ndarray) -> bytes:
    return BINARY_MAGIC + np.asarray(values, dtype="<f8").tobytes()


def unpack_binary(blob: bytes) -> np.ndarray:
    if blob[:8] != BINARY_MAGIC:
        raise ValueError("not a QCUTPRB1 blob")
    return np.frombuffer(blob[8:], dtype="<f8").copy()

