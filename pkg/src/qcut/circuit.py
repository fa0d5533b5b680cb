"""Gate-level circuit model, the ``.qc`` text format and the cut-search DAG.

Qubit 0 is always the most significant bit of a basis-state index, so the
state ``|q0 q1 ... q_{n-1}>`` has index ``q0 * 2**(n-1) + ... + q_{n-1}``.
"""

from __future__ import annotations

import json
import math
from collections import deque
from dataclasses import dataclass, field
from typing import Sequence

SINGLE_QUBIT_KINDS = ("H", "X", "Y", "Z", "S", "Sdg", "T", "Tdg", "SX", "SY", "RX", "RY", "RZ")
TWO_QUBIT_KINDS = ("CZ", "CX")
ROTATION_KINDS = ("RX", "RY", "RZ")
GATE_KINDS = SINGLE_QUBIT_KINDS + TWO_QUBIT_KINDS

_BY_LOWER = {k.lower(): k for k in GATE_KINDS}


class CircuitError(ValueError):
    """Raised for malformed circuits or circuit files."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


@dataclass(frozen=True)
class Gate:
    kind: str
    qubits: tuple[int, ...]
    params: tuple[float, ...] = ()

    def __post_init__(self):
        kind = _BY_LOWER.get(str(self.kind).lower())
        if kind is None:
            raise CircuitError(f"unknown gate kind {self.kind!r}")
        object.__setattr__(self, "kind", kind)
        object.__setattr__(self, "qubits", tuple(int(q) for q in self.qubits))
        object.__setattr__(self, "params", tuple(float(p) for p in self.params))
        arity = 2 if kind in TWO_QUBIT_KINDS else 1
        if len(self.qubits) != arity:
            raise CircuitError(f"{kind} acts on {arity} qubit(s), got {len(self.qubits)}")
        if len(set(self.qubits)) != len(self.qubits):
            raise CircuitError(f"{kind} has repeated qubit indices {self.qubits}")
        if any(q < 0 for q in self.qubits):
            raise CircuitError(f"negative qubit index in {self.qubits}")
        n_params = 1 if kind in ROTATION_KINDS else 0
        if len(self.params) != n_params:
            raise CircuitError(f"{kind} takes {n_params} angle(s), got {len(self.params)}")
        if not all(math.isfinite(p) for p in self.params):
            raise CircuitError(f"{kind} angle must be finite")

    @property
    def is_two_qubit(self) -> bool:
        return self.kind in TWO_QUBIT_KINDS

    def on(self, *qubits: int) -> Gate:
        """Same gate acting on different qubits."""
        return Gate(self.kind, qubits, self.params)


@dataclass(frozen=True)
class Circuit:
    n_qubits: int
    gates: tuple[Gate, ...] = ()
    name: str = ""

    def __post_init__(self):
        object.__setattr__(self, "gates", tuple(self.gates))
        if int(self.n_qubits) < 1:
            raise CircuitError("a circuit needs at least one qubit")
        for g in self.gates:
            bad = [q for q in g.qubits if q >= self.n_qubits]
            if bad:
                raise CircuitError(f"qubit {bad[0]} out of range for {self.n_qubits}-qubit circuit")

    def __eq__(self, other):
        # the name is a free-form label and does not take part in equality
        if not isinstance(other, Circuit):
            return NotImplemented
        return self.n_qubits == other.n_qubits and self.gates == other.gates

    def __hash__(self):
        return hash((self.n_qubits, self.gates))

    def __len__(self):
        return len(self.gates)

    @property
    def two_qubit_gates(self) -> list[int]:
        return [i for i, g in enumerate(self.gates) if g.is_two_qubit]

    def append(self, *gates: Gate) -> Circuit:
        return Circuit(self.n_qubits, self.gates + tuple(gates), self.name)


class CircuitBuilder:
    """Mutable helper used by the benchmark generators."""

    def __init__(self, n_qubits: int, name: str = ""):
        self.n_qubits = n_qubits
        self.name = name
        self.gates: list[Gate] = []

    def add(self, kind: str, *qubits: int, angle: float | None = None) -> CircuitBuilder:
        params = () if angle is None else (angle,)
        self.gates.append(Gate(kind, qubits, params))
        return self

    def __getattr__(self, attr):
        kind = _BY_LOWER.get(attr)
        if kind is None:
            raise AttributeError(attr)
        if kind in ROTATION_KINDS:
            return lambda angle, q: self.add(kind, q, angle=angle)
        return lambda *qubits: self.add(kind, *qubits)

    def build(self) -> Circuit:
        return Circuit(self.n_qubits, tuple(self.gates), self.name)


# ---------------------------------------------------------------------------
# text / JSON formats


def parse_circuit(text: str) -> Circuit:
    """Parse ``.qc`` text, or its JSON mirror when the text starts with ``{``."""
    if text.lstrip().startswith("{"):
        return circuit_from_json(text)

    n_qubits = None
    gates = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        tokens = line.split()
        if n_qubits is None:
            if tokens[0].lower() != "qubits" or len(tokens) != 2:
                raise CircuitError("expected header 'qubits <n>'", lineno)
            try:
                n_qubits = int(tokens[1])
            except ValueError:
                raise CircuitError(f"bad qubit count {tokens[1]!r}", lineno) from None
            if n_qubits < 1:
                raise CircuitError("qubit count must be positive", lineno)
            continue

        kind = _BY_LOWER.get(tokens[0].lower())
        if kind is None:
            raise CircuitError(f"unknown gate kind {tokens[0]!r}", lineno)
        arity = 2 if kind in TWO_QUBIT_KINDS else 1
        n_params = 1 if kind in ROTATION_KINDS else 0
        if len(tokens) != 1 + arity + n_params:
            raise CircuitError(
                f"{tokens[0]} expects {arity} qubit(s) and {n_params} angle(s)", lineno
            )
        try:
            qubits = tuple(int(t) for t in tokens[1 : 1 + arity])
            params = tuple(float(t) for t in tokens[1 + arity :])
        except ValueError as exc:
            raise CircuitError(str(exc), lineno) from None
        for q in qubits:
            if not 0 <= q < n_qubits:
                raise CircuitError(f"qubit {q} out of range", lineno)
        try:
            gates.append(Gate(kind, qubits, params))
        except CircuitError as exc:
            raise CircuitError(str(exc), lineno) from None

    if n_qubits is None:
        raise CircuitError("missing 'qubits <n>' header", 1)
    return Circuit(n_qubits, tuple(gates))


def serialize_circuit(circuit: Circuit) -> str:
    lines = [f"qubits {circuit.n_qubits}"]
    for g in circuit.gates:
        parts = [g.kind.lower(), *map(str, g.qubits), *map(repr, g.params)]
        lines.append(" ".join(parts))
    return "\n".join(lines) + "\n"


def circuit_to_dict(circuit: Circuit) -> dict:
    return {
        "n_qubits": circuit.n_qubits,
        "gates": [
            {"kind": g.kind.lower(), "qubits": list(g.qubits), "params": list(g.params)}
            for g in circuit.gates
        ],
    }


def circuit_from_dict(data: dict) -> Circuit:
    try:
        n = int(data["n_qubits"])
        gates = tuple(
            Gate(g["kind"], tuple(g["qubits"]), tuple(g.get("params", ())))
            for g in data["gates"]
        )
    except (KeyError, TypeError) as exc:
        raise CircuitError(f"malformed circuit JSON: {exc}") from None
    return Circuit(n, gates, data.get("name", ""))


def circuit_to_json(circuit: Circuit) -> str:
    return json.dumps(circuit_to_dict(circuit))


def circuit_from_json(text: str) -> Circuit:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise CircuitError(f"invalid JSON: {exc.msg}", exc.lineno) from None
    return circuit_from_dict(data)


# ---------------------------------------------------------------------------
# DAG over two-qubit gates


@dataclass(frozen=True)
class DagEdge:
    tail: int  # upstream vertex
    head: int  # downstream vertex
    qubit: int


@dataclass(frozen=True)
class CircuitDag:
    """Two-qubit gates as vertices, wire segments between them as edges.

    ``vertices[i]`` is the index into ``circuit.gates`` of vertex ``i``.
    ``weights[i]`` counts the input qubits whose first two-qubit gate is
    vertex ``i``.
    """

    n_qubits: int
    vertices: tuple[int, ...]
    edges: tuple[DagEdge, ...]
    weights: tuple[int, ...]
    vertex_qubits: tuple[tuple[int, int], ...] = field(default=())

    @property
    def n_vertices(self) -> int:
        return len(self.vertices)

    def in_edges(self) -> list[list[int]]:
        out: list[list[int]] = [[] for _ in self.vertices]
        for k, e in enumerate(self.edges):
            out[e.head].append(k)
        return out

    def touched_qubits(self) -> set[int]:
        return {q for qs in self.vertex_qubits for q in qs}

    def is_connected(self) -> bool:
        """True when every qubit meets a two-qubit gate and the graph is one component."""
        if not self.vertices or len(self.touched_qubits()) != self.n_qubits:
            return False
        adj: list[list[int]] = [[] for _ in self.vertices]
        for e in self.edges:
            adj[e.tail].append(e.head)
            adj[e.head].append(e.tail)
        seen = {0}
        todo = deque([0])
        while todo:
            v = todo.popleft()
            for u in adj[v]:
                if u not in seen:
                    seen.add(u)
                    todo.append(u)
        return len(seen) == len(self.vertices)


def build_dag(circuit: Circuit) -> CircuitDag:
    vertices: list[int] = []
    vqubits: list[tuple[int, int]] = []
    weights: list[int] = []
    edges: list[DagEdge] = []
    last: dict[int, int] = {}
    for gi, g in enumerate(circuit.gates):
        if not g.is_two_qubit:
            continue
        v = len(vertices)
        w = 0
        for q in g.qubits:
            if q in last:
                edges.append(DagEdge(last[q], v, q))
            else:
                w += 1
            last[q] = v
        vertices.append(gi)
        vqubits.append(g.qubits)
        weights.append(w)
    return CircuitDag(circuit.n_qubits, tuple(vertices), tuple(edges), tuple(weights), tuple(vqubits))


def random_circuit(
    n_qubits: int,
    n_gates: int,
    rng,
    two_qubit_fraction: float = 0.4,
    kinds: Sequence[str] | None = None,
) -> Circuit:
    """Random circuit over the full gate set; ``rng`` is a numpy Generator."""
    kinds = list(kinds or GATE_KINDS)
    one_q = [k for k in kinds if k not in TWO_QUBIT_KINDS]
    two_q = [k for k in kinds if k in TWO_QUBIT_KINDS]
    gates = []
    for _ in range(n_gates):
        if n_qubits >= 2 and two_q and rng.random() < two_qubit_fraction:
            kind = two_q[rng.integers(len(two_q))]
            a, b = rng.choice(n_qubits, size=2, replace=False)
            gates.append(Gate(kind, (int(a), int(b))))
        else:
            kind = one_q[rng.integers(len(one_q))]
            params = (float(rng.uniform(-math.pi, math.pi)),) if kind in ROTATION_KINDS else ()
            gates.append(Gate(kind, (int(rng.integers(n_qubits)),), params))
    return Circuit(n_qubits, tuple(gates), "random")

