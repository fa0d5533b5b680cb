"""Finding the cheapest wire cuts for a device of D qubits.

The searcher minimizes the reconstruction cost L = 4^K * sum_c prod_{i<=c} 2^f_i
exactly, with a branch and bound over vertex-to-subcircuit assignments.
"""

import time

from qcut import BenchmarkSpec, SearchConfig, build_dag, find_cuts, five_qubit_example, generate_benchmark, validate_solution
from qcut.search import Infeasible

circuit = five_qubit_example()
dag = build_dag(circuit)
cfg = SearchConfig(max_qubits=3, max_subcircuits=2)
sol = find_cuts(dag, cfg)
print("five-qubit example on a 3-qubit device")
print(sol.to_json())
print("violations:", validate_solution(dag, sol, cfg))

# When the circuit fits the device there is nothing to cut.
print("D=5:", "no cut needed" if find_cuts(dag, SearchConfig(5)).no_cut_needed else "cut")

# Smaller devices need more cuts and cost more to reconstruct.
for family in ("BV", "AQFT", "Adder", "HWEA"):
    c = generate_benchmark(BenchmarkSpec(family, 10))
    for D in (4, 5, 6):
        t0 = time.perf_counter()
        try:
            s = find_cuts(build_dag(c), SearchConfig(D))
            found = f"n_C={s.n_subcircuits} K={s.K} f={s.f} L={s.L}"
        except Infeasible:
            found = "infeasible"
        print(f"{family:>6} n=10 D={D}: {found}  ({time.perf_counter() - t0:.2f}s)")
