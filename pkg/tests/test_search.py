import itertools

import numpy as np
import pytest

from qcut.benchmarks import five_qubit_example, generate_benchmark, BenchmarkSpec
from qcut.circuit import CircuitBuilder, build_dag, random_circuit
from qcut.search import (
    CutSolution,
    Infeasible,
    SearchConfig,
    evaluate_objective,
    find_cuts,
    objective,
    solution_from_assignment,
    uncut_solution,
    validate_solution,
)


def brute_force(dag, cfg):
    """Scan every map vertex -> subcircuit for every n_C, no symmetry shortcut."""
    best = None
    for n_c in range(2, cfg.max_subcircuits + 1):
        for y in itertools.product(range(n_c), repeat=dag.n_vertices):
            if len(set(y)) != n_c:
                continue
            alpha = [0] * n_c
            rho = [0] * n_c
            out = [0] * n_c
            for v, c in enumerate(y):
                alpha[c] += dag.weights[v]
            K = 0
            for e in dag.edges:
                if y[e.tail] != y[e.head]:
                    K += 1
                    out[y[e.tail]] += 1
                    rho[y[e.head]] += 1
            if K > cfg.max_cuts or any(a + r > cfg.max_qubits for a, r in zip(alpha, rho)):
                continue
            # relabel so vertex k sits in a subcircuit <= k: first appearance order
            order = list(dict.fromkeys(y))
            f = [alpha[c] + rho[c] - out[c] for c in order]
            L = 4**K * sum(2 ** sum(f[: c + 1]) for c in range(1, n_c))
            best = L if best is None else min(best, L)
    return best


def random_dag(rng, max_vertices=8):
    while True:
        n = int(rng.integers(3, 6))
        c = random_circuit(n, int(rng.integers(n, 3 * n)), rng, two_qubit_fraction=0.5)
        dag = build_dag(c)
        if 2 <= dag.n_vertices <= max_vertices and dag.is_connected():
            return dag


def test_five_qubit_example():
    dag = build_dag(five_qubit_example())
    sol = find_cuts(dag, SearchConfig(3, 2, 10))
    assert sol.K == 1 and sol.n_subcircuits == 2
    assert sol.d == (3, 3)
    assert sol.f == (2, 3)
    assert sol.L == 128 == evaluate_objective(sol)
    assert validate_solution(dag, sol, SearchConfig(3, 2, 10)) == []
    e = dag.edges[sol.cut_edges[0]]
    assert (e.tail, e.head, e.qubit) == (1, 2, 2)


def test_objective_examples():
    assert objective(1, (2, 3)) == 128
    assert objective(0, (5,)) == 0
    assert objective(10, (64, 64)) == 4**10 * 2**128  # exact big-integer arithmetic


def test_uncut_when_device_fits():
    dag = build_dag(five_qubit_example())
    sol = find_cuts(dag, SearchConfig(5, 5, 10))
    assert sol.no_cut_needed and sol.K == 0 and sol.L == 0
    assert sol == uncut_solution(dag)


@pytest.mark.parametrize("seed", range(20))
def test_matches_brute_force(seed):
    rng = np.random.default_rng(seed)
    dag = random_dag(rng)
    cfg = SearchConfig(int(rng.integers(2, 5)), int(rng.integers(2, 4)), int(rng.integers(1, 6)))
    expected = brute_force(dag, cfg)
    if expected is None:
        with pytest.raises(Infeasible):
            find_cuts(dag, cfg, allow_single=False)
        return
    sol = find_cuts(dag, cfg, allow_single=False)
    assert sol.L == expected
    assert validate_solution(dag, sol, cfg) == []


def test_invariants_on_benchmarks():
    for fam in ("BV", "AQFT", "HWEA"):
        c = generate_benchmark(BenchmarkSpec(fam, 9))
        dag = build_dag(c)
        sol = find_cuts(dag, SearchConfig(5, 5, 10))
        assert sum(sol.rho) == sum(sol.O) == sol.K == len(sol.cut_edges)
        assert sum(sol.f) == c.n_qubits
        assert sum(sol.alpha) == c.n_qubits
        assert all(d <= 5 for d in sol.d)
        assert solution_from_assignment(dag, sol.assignment, sol.n_subcircuits) == sol


def test_infeasible():
    c = generate_benchmark(BenchmarkSpec("SupremacyGrid", dims=(3, 4)))
    with pytest.raises(Infeasible):
        find_cuts(build_dag(c), SearchConfig(4, 5, 10))


def test_disconnected_rejected():
    c = CircuitBuilder(4).cx(0, 1).cx(2, 3).build()
    with pytest.raises(ValueError):
        find_cuts(build_dag(c), SearchConfig(2, 5, 10))


def test_tie_break_prefers_fewer_cuts_then_small_assignment():
    dag = build_dag(generate_benchmark(BenchmarkSpec("HWEA", 6, layers=1)))
    sol = find_cuts(dag, SearchConfig(4, 5, 10))
    # among optimal assignments the returned one is the lexicographically smallest
    cfg = SearchConfig(4, 5, 10)
    best = []
    for n_c in range(2, 6):
        for y in itertools.product(range(n_c), repeat=dag.n_vertices):
            cand = solution_from_assignment(dag, y, n_c)
            if not validate_solution(dag, cand, cfg):
                best.append((cand.L, cand.K, y))
    assert (sol.L, sol.K, sol.assignment) == min(best)


def test_validate_reports_double_assignment():
    dag = build_dag(five_qubit_example())
    sol = find_cuts(dag, SearchConfig(3, 2, 10))
    broken = CutSolution(2, ({0, 1},) + sol.assignment[1:], sol.cut_edges, sol.alpha, sol.rho, sol.O, sol.K, sol.L)
    problems = validate_solution(dag, broken)
    assert problems and problems[0].startswith("assignment")


def test_validate_reports_capacity():
    dag = build_dag(five_qubit_example())
    sol = find_cuts(dag, SearchConfig(3, 2, 10))
    problems = validate_solution(dag, sol, SearchConfig(2, 2, 10))
    assert any(p.startswith("capacity") for p in problems)


def test_validate_reports_symmetry_and_cuts():
    dag = build_dag(five_qubit_example())
    flipped = solution_from_assignment(dag, (1, 1, 0, 0), 2)
    assert any(p.startswith("symmetry") for p in validate_solution(dag, flipped))
    sol = find_cuts(dag, SearchConfig(3, 2, 10))
    wrong = CutSolution(2, sol.assignment, (), sol.alpha, sol.rho, sol.O, sol.K, sol.L)
    assert any(p.startswith("cut") for p in validate_solution(dag, wrong))


@pytest.mark.parametrize("seed", range(10))
def test_relabeling_restores_symmetry(seed):
    """Any feasible assignment has a relabeled twin obeying the symmetry rule with the same cuts."""
    rng = np.random.default_rng(100 + seed)
    dag = random_dag(rng)
    n_c = int(rng.integers(2, 4))
    y = tuple(int(v) for v in rng.integers(n_c, size=dag.n_vertices))
    if len(set(y)) != n_c:
        return
    first_seen = {c: i for i, c in enumerate(dict.fromkeys(y))}
    relabeled = tuple(first_seen[c] for c in y)
    a = solution_from_assignment(dag, y, n_c)
    b = solution_from_assignment(dag, relabeled, n_c)
    assert not any(p.startswith("symmetry") for p in validate_solution(dag, b))
    assert a.K == b.K and sorted(a.d) == sorted(b.d) and sorted(a.f) == sorted(b.f)


def test_json_round_trip():
    dag = build_dag(five_qubit_example())
    sol = find_cuts(dag, SearchConfig(3, 2, 10))
    data = sol.to_dict()
    assert set(data) == {"n_C", "assignment", "cut_edges", "subcircuits", "K", "L"}
    assert data["cut_edges"][0]["qubit"] == 2
    assert CutSolution.from_dict(data) == sol


def test_config_validation():
    with pytest.raises(ValueError):
        SearchConfig(1)
    with pytest.raises(ValueError):
        SearchConfig(3, 1)
