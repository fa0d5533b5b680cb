"""Circuits, the .qc text format and the two-qubit-gate DAG.

Run: python docs/examples/01_circuits_and_dag.py
"""

from qcut import BenchmarkSpec, CircuitBuilder, build_dag, generate_benchmark, parse_circuit, serialize_circuit
from qcut.simulator import probabilities

# A circuit can be written by hand in the text format...
text = """qubits 3
h 0
cx 0 1   # entangle
rz 1 0.25
cx 1 2
"""
circuit = parse_circuit(text)
print("parsed:", [(g.kind, g.qubits, g.params) for g in circuit.gates])

# ...or built in code; both serialize to the same canonical text.
built = CircuitBuilder(3).h(0).cx(0, 1).rz(0.25, 1).cx(1, 2).build()
assert built == circuit
print(serialize_circuit(built))

# Only two-qubit gates become DAG vertices; edges are wire segments between them.
dag = build_dag(circuit)
print("vertices (gate indices):", dag.vertices)
print("edges (tail, head, qubit):", [(e.tail, e.head, e.qubit) for e in dag.edges])
print("input-qubit weights:", dag.weights)

# Qubit 0 is the most significant bit of a state index.
p = probabilities(circuit)
print("nonzero states:", {format(i, "03b"): round(x, 4) for i, x in enumerate(p) if x > 1e-12})

# The benchmark families are deterministic for a given BenchmarkSpec.
for spec in [
    BenchmarkSpec("BV", 6, hidden="10110"),
    BenchmarkSpec("AQFT", 6),
    BenchmarkSpec("Adder", 6, a=1, b=2),
    BenchmarkSpec("HWEA", 6),
    BenchmarkSpec("SupremacyGrid", dims=(2, 3)),
]:
    c = generate_benchmark(spec)
    d = build_dag(c)
    print(f"{spec.family:>13}: {len(c.gates):3d} gates, {d.n_vertices:2d} vertices, {len(d.edges):2d} edges")

bv = probabilities(generate_benchmark(BenchmarkSpec("BV", 6, hidden="10110")))
print("BV solution state:", format(int(bv.argmax()), "06b"), "with p =", round(bv.max(), 12))
