"""Deterministic generators for the benchmark circuit families.

Every generator emits only the native gate set of :mod:`qcut.circuit`;
controlled-phase and Toffoli gates are decomposed into CX plus single-qubit
rotations so that the cut searcher sees the real two-qubit structure.

Concrete choices worth knowing:

* ``SupremacyGrid``: cycle 0 is a Hadamard layer.  Cycle ``t >= 1`` applies
  CZ gates on the ``(t - 1) % 8`` edge pattern of a staggered 8-pattern
  schedule, and every qubit that sat in a CZ during cycle ``t - 1`` but is
  idle in cycle ``t`` receives a random gate from {T, SX, SY}, never the one
  it received last.
* ``AQFT`` keeps the controlled-phase of angle ``pi / 2**k`` only for
  ``k <= degree`` (default degree 2) and omits the final swap network.  A
  seeded product state of RY/RZ rotations is prepared first, since the
  transform of ``|0...0>`` is flat.
* ``Adder`` is the one-ancilla ripple-carry layout
  ``[c0, b0, a0, b1, a1, ..., z]``; after the circuit the ``b`` register
  holds ``a + b`` and ``z`` the carry out.
* ``BV`` uses the last qubit as the ancilla, so the solution state is the
  hidden string followed by a 1.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .circuit import Circuit, CircuitBuilder

FAMILIES = ("BV", "AQFT", "Adder", "HWEA", "SupremacyGrid")


@dataclass(frozen=True)
class BenchmarkSpec:
    family: str
    n_qubits: int | None = None
    dims: tuple[int, int] | None = None
    hidden: str | None = None
    degree: int = 2
    depth: int = 10
    layers: int = 2
    a: int | None = None
    b: int | None = None
    zero_angles: bool = False
    seed: int = 0

    def validate(self) -> None:
        fam = self.family
        if fam not in FAMILIES:
            raise ValueError(f"unknown benchmark family {fam!r}")
        if fam == "SupremacyGrid":
            if self.dims is None:
                raise ValueError("SupremacyGrid needs dims")
            r, c = self.dims
            if r < 1 or c < 1 or r * c < 2:
                raise ValueError(f"bad grid {self.dims}")
            if abs(r - c) > 2:
                raise ValueError("grid dimensions may differ by at most 2")
            if self.depth < 1:
                raise ValueError("depth must be >= 1")
            return
        n = self.n_qubits
        if n is None or n < 2:
            raise ValueError(f"{fam} needs n_qubits >= 2")
        if fam == "Adder":
            if n % 2 or n < 4:
                raise ValueError("Adder needs an even qubit count >= 4")
            width = (n - 2) // 2
            for val in (self.a, self.b):
                if val is not None and not 0 <= val < 2**width:
                    raise ValueError(f"operand {val} does not fit {width} bits")
        if fam == "BV" and self.hidden is not None:
            if len(self.hidden) != n - 1 or set(self.hidden) - {"0", "1"}:
                raise ValueError(f"hidden string must be {n - 1} binary digits")
        if fam == "AQFT" and self.degree < 1:
            raise ValueError("AQFT degree must be >= 1")
        if fam == "HWEA" and self.layers < 1:
            raise ValueError("HWEA needs at least one layer")

    @property
    def width(self) -> int:
        if self.family == "SupremacyGrid":
            return self.dims[0] * self.dims[1]
        return self.n_qubits


def generate_benchmark(spec: BenchmarkSpec) -> Circuit:
    spec.validate()
    return _GENERATORS[spec.family](spec)


def bv(n: int, hidden: str | None = None) -> Circuit:
    return generate_benchmark(BenchmarkSpec("BV", n, hidden=hidden))


def _bv(spec: BenchmarkSpec) -> Circuit:
    n = spec.n_qubits
    hidden = spec.hidden or "1" * (n - 1)
    anc = n - 1
    cb = CircuitBuilder(n, f"bv_{n}")
    for q in range(n - 1):
        cb.h(q)
    cb.x(anc).h(anc)
    for q, bit in enumerate(hidden):
        if bit == "1":
            cb.cx(q, anc)
    for q in range(n):
        cb.h(q)
    return cb.build()


def _controlled_phase(cb: CircuitBuilder, theta: float, control: int, target: int):
    # equal to diag(1, 1, 1, e^{i theta}) up to a global phase
    cb.rz(theta / 2, control)
    cb.cx(control, target)
    cb.rz(-theta / 2, target)
    cb.cx(control, target)
    cb.rz(theta / 2, target)


def _aqft(spec: BenchmarkSpec) -> Circuit:
    n = spec.n_qubits
    rng = np.random.default_rng(spec.seed)
    cb = CircuitBuilder(n, f"aqft_{n}")
    for q in range(n):
        cb.ry(float(rng.uniform(0, math.pi)), q)
        cb.rz(float(rng.uniform(0, 2 * math.pi)), q)
    for j in range(n):
        cb.h(j)
        for k in range(j + 1, n):
            if k - j > spec.degree:
                break
            _controlled_phase(cb, math.pi / 2 ** (k - j), k, j)
    return cb.build()


def _toffoli(cb: CircuitBuilder, x: int, y: int, t: int):
    cb.h(t)
    cb.cx(y, t).tdg(t)
    cb.cx(x, t).t(t)
    cb.cx(y, t).tdg(t)
    cb.cx(x, t)
    cb.t(y).t(t).h(t)
    cb.cx(x, y)
    cb.t(x).tdg(y)
    cb.cx(x, y)


def _adder(spec: BenchmarkSpec) -> Circuit:
    n = spec.n_qubits
    width = (n - 2) // 2
    rng = np.random.default_rng(spec.seed)
    a = spec.a if spec.a is not None else int(rng.integers(2**width))
    b = spec.b if spec.b is not None else int(rng.integers(2**width))
    c0, z = 0, n - 1
    bq = [1 + 2 * i for i in range(width)]
    aq = [2 + 2 * i for i in range(width)]
    cb = CircuitBuilder(n, f"adder_{n}")
    for i in range(width):
        if (a >> i) & 1:
            cb.x(aq[i])
        if (b >> i) & 1:
            cb.x(bq[i])

    def maj(c, bb, aa):
        cb.cx(aa, bb)
        cb.cx(aa, c)
        _toffoli(cb, c, bb, aa)

    def uma(c, bb, aa):
        _toffoli(cb, c, bb, aa)
        cb.cx(aa, c)
        cb.cx(c, bb)

    carry_in = [c0] + aq[:-1]
    for i in range(width):
        maj(carry_in[i], bq[i], aq[i])
    cb.cx(aq[-1], z)
    for i in reversed(range(width)):
        uma(carry_in[i], bq[i], aq[i])
    return cb.build()


def adder_layout(n: int) -> dict[str, list[int]]:
    width = (n - 2) // 2
    return {
        "a": [2 + 2 * i for i in range(width)],
        "b": [1 + 2 * i for i in range(width)],
        "carry_in": [0],
        "carry_out": [n - 1],
    }


def _hwea(spec: BenchmarkSpec) -> Circuit:
    n = spec.n_qubits
    rng = np.random.default_rng(spec.seed)
    cb = CircuitBuilder(n, f"hwea_{n}")

    def rotations():
        for q in range(n):
            ty, tz = (0.0, 0.0) if spec.zero_angles else rng.uniform(0, 2 * math.pi, 2)
            cb.ry(float(ty), q)
            cb.rz(float(tz), q)

    for _ in range(spec.layers):
        rotations()
        for q in range(n - 1):
            cb.cx(q, q + 1)
    rotations()
    return cb.build()


def _grid_patterns(rows: int, cols: int) -> list[list[tuple[int, int]]]:
    def qi(r, c):
        return r * cols + c

    def horizontal(c_par, r_par):
        return [
            (qi(r, c), qi(r, c + 1))
            for r in range(rows)
            for c in range(cols - 1)
            if c % 2 == c_par and r % 2 == r_par
        ]

    def vertical(r_par, c_par):
        return [
            (qi(r, c), qi(r + 1, c))
            for r in range(rows - 1)
            for c in range(cols)
            if r % 2 == r_par and c % 2 == c_par
        ]

    return [
        horizontal(0, 0),
        vertical(0, 1),
        horizontal(1, 1),
        vertical(1, 0),
        horizontal(0, 1),
        vertical(0, 0),
        horizontal(1, 0),
        vertical(1, 1),
    ]


def _supremacy(spec: BenchmarkSpec) -> Circuit:
    rows, cols = spec.dims
    n = rows * cols
    rng = np.random.default_rng(spec.seed)
    patterns = _grid_patterns(rows, cols)
    cb = CircuitBuilder(n, f"supremacy_{rows}x{cols}")
    for q in range(n):
        cb.h(q)
    last_gate: dict[int, str] = {}
    busy_before: set[int] = set()
    for cycle in range(1, spec.depth + 1):
        pairs = patterns[(cycle - 1) % 8]
        busy = {q for pair in pairs for q in pair}
        for q in range(n):
            if q in busy_before and q not in busy:
                options = [k for k in ("T", "SX", "SY") if k != last_gate.get(q)]
                kind = options[rng.integers(len(options))]
                cb.add(kind, q)
                last_gate[q] = kind
        for a, b in pairs:
            cb.cz(a, b)
        busy_before = busy
    return cb.build()


_GENERATORS = {
    "BV": _bv,
    "AQFT": _aqft,
    "Adder": _adder,
    "HWEA": _hwea,
    "SupremacyGrid": _supremacy,
}


def five_qubit_example() -> Circuit:
    """Five-qubit CZ ladder that one cut on wire 2 splits into two 3-qubit halves.

    The wire of qubit 2 runs between the first two CZ gates it meets; cutting
    there leaves qubits {0, 1, 2} upstream and {2, 3, 4} downstream.
    """
    cb = CircuitBuilder(5, "five_qubit_example")
    for q in range(5):
        cb.h(q)
    cb.cz(0, 1)
    cb.t(1)
    cb.cz(1, 2)
    cb.rx(0.7, 2)
    cb.t(0)
    cb.cz(2, 3)
    cb.ry(1.1, 3)
    cb.cz(3, 4)
    cb.h(2).sx(3).ry(0.4, 4).sy(1)
    return cb.build()
