"""Dynamic definition: binned reconstruction that zooms into likely states."""

from qcut import BenchmarkSpec, SearchConfig, build_dag, bv, extract_subcircuits, find_cuts, generate_benchmark
from qcut.dynamic import DDConfig, dd_query, expand_bins
from qcut.harness import chi_squared, evaluate_subcircuits
from qcut.reconstruct import attribute_all
from qcut.simulator import probabilities


def attributed(circuit, D):
    sol = find_cuts(build_dag(circuit), SearchConfig(D))
    subs, _ = extract_subcircuits(circuit, sol)
    return sol, attribute_all(subs, evaluate_subcircuits(subs))


# DFS on Bernstein-Vazirani: one active qubit per recursion walks to the answer.
sol, att = attributed(bv(4), 3)
res = dd_query(att, sol.K, DDConfig(max_active=1, max_recursions=10, strategy="dfs"))
for b in res.trace:
    print(f"recursion {b.recursion_index}: labels={b.labeling.labels} bins={b.bins.round(6).tolist()}")
print("solution:", "".join(map(str, res.solution)), "p =", res.solution_probability)

# BFS on a random-circuit landscape: each recursion refines the most likely bin left.
c = generate_benchmark(BenchmarkSpec("SupremacyGrid", dims=(2, 4), depth=12))
truth = probabilities(c)
sol, att = attributed(c, 6)
for r in range(1, 9):
    res = dd_query(att, sol.K, DDConfig(max_active=2, max_recursions=r, strategy="bfs"))
    approx = expand_bins(res.trace, c.n_qubits)
    print(f"{r} recursion(s): chi2 vs truth = {chi_squared(approx, truth):.4f}")
print(res.trace_json()[:400], "...")
