import json

import numpy as np
import pytest

from qcut.benchmarks import BenchmarkSpec, bv, generate_benchmark
from qcut.circuit import build_dag, random_circuit
from qcut.cutter import extract_subcircuits
from qcut.dynamic import (
    BinDistribution,
    DDConfig,
    QubitLabeling,
    dd_query,
    dd_recursion,
    expand_bins,
    marginalize,
)
from qcut.harness import chi_squared, evaluate_subcircuits
from qcut.reconstruct import attribute_all, reconstruct_fd
from qcut.search import Infeasible, SearchConfig, find_cuts
from qcut.simulator import probabilities


def prepare(circuit, D):
    sol = find_cuts(build_dag(circuit), SearchConfig(D, 5, 10), allow_single=False)
    subs, _ = extract_subcircuits(circuit, sol)
    return sol, attribute_all(subs, evaluate_subcircuits(subs))


def test_bv4_first_recursion():
    sol, att = prepare(bv(4), 3)
    lab = QubitLabeling.initial(4, [0])
    bins = dd_recursion(att, sol.K, lab).bins
    assert np.allclose(bins, [0.0, 1.0], atol=1e-12)


def test_bv4_dfs_trace():
    sol, att = prepare(bv(4), 3)
    res = dd_query(att, sol.K, DDConfig(max_active=1, max_recursions=10, strategy="dfs"))
    assert len(res.trace) == 4
    assert res.solution == (1, 1, 1, 1)
    assert res.solution_probability == pytest.approx(1.0, abs=1e-8)
    assert [b.chosen_bin for b in res.trace] == [1, 1, 1, None]


@pytest.mark.parametrize("n, max_active", [(6, 2), (7, 3), (8, 8)])
def test_dfs_recursion_count(n, max_active):
    sol, att = prepare(bv(n), 4)
    res = dd_query(att, sol.K, DDConfig(max_active=max_active, max_recursions=50))
    assert len(res.trace) == -(-n // max_active)
    assert res.solution == (1,) * n


def test_all_active_equals_fd():
    c = generate_benchmark(BenchmarkSpec("AQFT", 8))
    sol, att = prepare(c, 5)
    fd = reconstruct_fd(att, sol.K).probabilities
    bins = dd_recursion(att, sol.K, QubitLabeling(("active",) * 8)).bins
    assert np.abs(bins - fd).max() < 1e-12


@pytest.mark.parametrize("seed", range(15))
def test_random_labelings_match_marginalized_fd(seed):
    rng = np.random.default_rng(seed)
    while True:
        n = int(rng.integers(4, 9))
        c = random_circuit(n, 4 * n, rng, two_qubit_fraction=0.4)
        if not build_dag(c).is_connected():
            continue
        try:
            sol, att = prepare(c, max(3, n - 2))
            break
        except Infeasible:
            continue
    fd = reconstruct_fd(att, sol.K).probabilities
    assert np.abs(fd - probabilities(c)).max() < 1e-10
    labels = [("active", "merged", 0, 1)[int(k)] for k in rng.integers(4, size=n)]
    labels[int(rng.integers(n))] = "active"
    lab = QubitLabeling(tuple(labels))
    b = dd_recursion(att, sol.K, lab)
    assert np.abs(b.bins - marginalize(fd, lab)).max() < 1e-10
    assert b.max_partial == 2 ** len(lab.active)


def test_marginalize_by_hand():
    p = np.arange(8, dtype=float)  # q0 q1 q2
    lab = QubitLabeling(("merged", "active", 1))
    # states x?1: bin 0 -> 001 + 101 = 1 + 5, bin 1 -> 011 + 111 = 3 + 7
    assert marginalize(p, lab).tolist() == [6.0, 10.0]


def test_bfs_conservation_and_consistency():
    c = generate_benchmark(BenchmarkSpec("SupremacyGrid", dims=(2, 4), depth=8))
    sol, att = prepare(c, 6)
    res = dd_query(att, sol.K, DDConfig(max_active=2, max_recursions=6, strategy="bfs"))
    assert len(res.trace) == 6
    seen = set()
    for b in res.trace:
        assert abs(b.bins.sum() - b.probability) < 1e-8
        if b.parent is not None:
            assert b.parent not in seen  # each bin expanded at most once
            seen.add(b.parent)
            parent = res.trace[b.parent[0]]
            assert b.probability == pytest.approx(parent.bins[b.parent[1]], abs=1e-12)
            # merging the new active qubits reproduces the parent bin
            assert b.bins.sum() == pytest.approx(parent.bins[b.parent[1]], abs=1e-8)


def test_bfs_chi2_non_increasing_on_supremacy():
    c = generate_benchmark(BenchmarkSpec("SupremacyGrid", dims=(2, 2), depth=8))
    truth = probabilities(c)
    sol, att = prepare(c, 3)
    chis = []
    for r in range(1, 6):
        res = dd_query(att, sol.K, DDConfig(max_active=1, max_recursions=r, strategy="bfs"))
        chis.append(chi_squared(expand_bins(res.trace, 4), truth))
    assert all(b <= a + 1e-12 for a, b in zip(chis, chis[1:]))


def test_expand_single_recursion():
    b = BinDistribution(QubitLabeling.initial(4, [0]), np.array([0.0, 1.0]), 0)
    out = expand_bins([b], 4)
    assert np.allclose(out[:8], 0) and np.allclose(out[8:], 1 / 8)


def test_expand_fully_zoomed_equals_fd():
    c = generate_benchmark(BenchmarkSpec("HWEA", 6))
    sol, att = prepare(c, 4)
    fd = reconstruct_fd(att, sol.K).probabilities
    res = dd_query(att, sol.K, DDConfig(max_active=6))
    assert np.abs(expand_bins(res.trace, 6) - fd).max() < 1e-12


def test_expand_random_trace_sums_to_one():
    c = generate_benchmark(BenchmarkSpec("HWEA", 6))
    sol, att = prepare(c, 4)
    fd = reconstruct_fd(att, sol.K).probabilities
    res = dd_query(att, sol.K, DDConfig(max_active=2, max_recursions=5, strategy="bfs"))
    out = expand_bins(res.trace, 6)
    assert out.sum() == pytest.approx(1.0, abs=1e-8)
    for b in res.trace:
        if not b.labeling.merged:
            zoom = b.labeling.zoomed
            idx = [i for i in range(64) if all(((i >> (5 - q)) & 1) == v for q, v in zoom.items())]
            assert np.abs(out[idx] - fd[idx]).max() < 1e-12


def test_expand_cap():
    b = BinDistribution(QubitLabeling.initial(4, [0]), np.array([0.0, 1.0]), 0)
    with pytest.raises(ValueError):
        expand_bins([b], 4, cap=3)


def test_zoom_path_and_trace_json():
    sol, att = prepare(bv(4), 3)
    res = dd_query(att, sol.K, DDConfig(max_active=1, max_recursions=4, zoom_path=[0, 1, 1]))
    assert res.trace[1].probability == pytest.approx(0.0, abs=1e-12)
    data = json.loads(res.trace_json())
    assert [r["chosen_bin"] for r in data["recursions"]] == [0, 1, 1, None]
    assert data["recursions"][1]["labeling"] == [0, "active", "merged", "merged"]


def test_tie_break_lowest_bin():
    c = generate_benchmark(BenchmarkSpec("HWEA", 4, zero_angles=True))
    # all-zero state: the pair of empty bins tie, and zooming picks bin 0 which holds everything
    sol, att = prepare(c, 3)
    res = dd_query(att, sol.K, DDConfig(max_active=1, max_recursions=4))
    assert res.solution == (0, 0, 0, 0)


def test_config_validation():
    with pytest.raises(ValueError):
        DDConfig(max_active=0)
    with pytest.raises(ValueError):
        DDConfig(max_recursions=0)
    with pytest.raises(ValueError):
        DDConfig(strategy="greedy")
    with pytest.raises(ValueError):
        QubitLabeling(("active", 2))
