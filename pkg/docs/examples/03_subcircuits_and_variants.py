"""From a cut solution to runnable subcircuits and their physical variants."""

import tempfile
from pathlib import Path

from qcut import SearchConfig, build_dag, enumerate_variants, extract_subcircuits, find_cuts, five_qubit_example, reassemble
from qcut.circuit import serialize_circuit
from qcut.cutter import write_bundle

circuit = five_qubit_example()
sol = find_cuts(build_dag(circuit), SearchConfig(3, 2))
subs, points = extract_subcircuits(circuit, sol)

for sub in subs:
    print(f"subcircuit {sub.index}: alpha={sub.alpha} rho={sub.rho} O={sub.O} f={sub.f}")
    for local, role in enumerate(sub.roles):
        print(f"  local q{local} <- original q{role.qubit}: {role.origin} -> {role.fate}")
print("cut points:", points)

# Every gate lands in exactly one subcircuit; putting them back gives the original.
assert reassemble(subs, circuit.n_qubits) == circuit

# Measured-out qubits need 3 bases (I and Z share a circuit); initialized ones need 4 states.
for sub in subs:
    for spec, variant in enumerate_variants(sub):
        extra = len(variant.gates) - len(sub.circuit.gates)
        print(f"  sub{sub.index} {spec.label:>8}: {extra} extra gate(s)")

print("\nupstream variant measured in Y:")
print(serialize_circuit(enumerate_variants(subs[0])[2][1]))

with tempfile.TemporaryDirectory() as tmp:
    write_bundle(subs, points, tmp)
    print("bundle files:", sorted(p.name for p in Path(tmp).iterdir()))
