"""Acceptance suite shared by ``qcut bench`` and ``tests/test_acceptance.py``.

Each criterion returns a :class:`CriterionResult`; nothing here loosens a
tolerance to make a check pass.  Expected values come from independent
oracles: the uncut statevector, an exhaustive cut enumeration, and
marginalization of the full reconstruction.
"""

from __future__ import annotations

import functools
import itertools
import os
import time
from dataclasses import asdict, dataclass, field

import numpy as np

from .benchmarks import BenchmarkSpec, bv, five_qubit_example, generate_benchmark
from .circuit import build_dag, random_circuit
from .cutter import enumerate_variants, extract_subcircuits, variant_count
from .dynamic import DDConfig, QubitLabeling, dd_query, dd_recursion, marginalize
from .harness import chi_squared, direct_noisy, evaluate_subcircuits, run_pipeline, total_variation
from .reconstruct import attribute_all, reconstruct_fd
from .search import Infeasible, SearchConfig, SearchTimeout, find_cuts, validate_solution
from .simulator import probabilities


@dataclass
class CriterionResult:
    number: int
    name: str
    passed: bool
    detail: str
    data: dict = field(default_factory=dict)

    def __post_init__(self):
        self.passed = bool(self.passed)

    def line(self) -> str:
        return f"{'PASS' if self.passed else 'FAIL'} criterion {self.number:>2} {self.name}: {self.detail}"

    def to_dict(self) -> dict:
        return asdict(self)


# ---------------------------------------------------------------------------
# shared instances

FAMILY_SIZES = {
    "BV": [8, 10, 12],
    "AQFT": [8, 10, 12],
    "Adder": [8, 10, 12],
    "HWEA": [8, 10, 12],
    "SupremacyGrid": [(2, 4), (3, 3), (3, 4)],
}
DEVICES = (4, 5, 6)


def _spec(family, size) -> BenchmarkSpec:
    if family == "SupremacyGrid":
        return BenchmarkSpec(family, dims=size)
    return BenchmarkSpec(family, size)


@functools.lru_cache(maxsize=None)
def fd_case(family: str, size, D: int):
    """``(circuit, solution, attributed, oracle)`` or ``None`` when infeasible."""
    circuit = generate_benchmark(_spec(family, size))
    try:
        sol = find_cuts(build_dag(circuit), SearchConfig(D, 5, 10), allow_single=False)
    except Infeasible:
        return None
    subs, _ = extract_subcircuits(circuit, sol)
    attributed = attribute_all(subs, evaluate_subcircuits(subs, cap=D))
    return circuit, sol, attributed, probabilities(circuit)


def _case_name(family, size, D) -> str:
    size = f"{size[0]}x{size[1]}" if isinstance(size, tuple) else size
    return f"{family}-{size}@D{D}"


def fd_cases():
    for family, sizes in FAMILY_SIZES.items():
        for size in sizes:
            for D in DEVICES:
                yield family, size, D


# ---------------------------------------------------------------------------
# criteria


def criterion_1() -> CriterionResult:
    worst_inf = worst_chi = 0.0
    feasible: dict[str, int] = {f: 0 for f in FAMILY_SIZES}
    infeasible = []
    failures = []
    for family, size, D in fd_cases():
        case = fd_case(family, size, D)
        if case is None:
            infeasible.append(_case_name(family, size, D))
            continue
        circuit, sol, att, truth = case
        res = reconstruct_fd(att, sol.K, n_qubits=circuit.n_qubits)
        err = float(np.abs(res.probabilities - truth).max())
        chi = chi_squared(res.probabilities, truth)
        worst_inf, worst_chi = max(worst_inf, err), max(worst_chi, chi)
        feasible[family] += 1
        if not (err < 1e-8 and chi < 1e-12):
            failures.append(_case_name(family, size, D))
    every_family = all(v > 0 for v in feasible.values())
    ok = not failures and every_family
    detail = (
        f"{sum(feasible.values())} feasible cases, max|err|={worst_inf:.2e}, max chi2={worst_chi:.2e}; "
        f"infeasible within 5 subcircuits/10 cuts: {', '.join(infeasible) or 'none'}"
    )
    if failures:
        detail += f"; failing: {', '.join(failures)}"
    return CriterionResult(1, "fd-oracle-equivalence", ok, detail, {"infeasible": infeasible})


def criterion_2() -> CriterionResult:
    circuit = five_qubit_example()
    sol = find_cuts(build_dag(circuit), SearchConfig(3, 5, 10))
    subs, _ = extract_subcircuits(circuit, sol)
    counts = [variant_count(s) for s in subs]
    widths = [s.circuit.n_qubits for s in subs]
    up, down = sorted(subs, key=lambda s: s.O, reverse=True)
    # independent arithmetic on raw variant outputs for |01010>
    raw_up = {dict(spec.settings)[0]: probabilities(c) for spec, c in enumerate_variants(up)}
    raw_dn = {dict(spec.settings)[0]: probabilities(c) for spec, c in enumerate_variants(down)}
    # upstream locals (q0, q1, q2 measured): q0q1 = 01
    i0, i1 = 0b010, 0b011
    p1 = [
        2 * raw_up["I"][i0],
        2 * raw_up["I"][i1],
        raw_up["X"][i0] - raw_up["X"][i1],
        raw_up["Y"][i0] - raw_up["Y"][i1],
    ]
    # downstream locals (q2, q3, q4): 010
    j = 0b010
    p2 = [
        raw_dn["0"][j],
        raw_dn["1"][j],
        2 * raw_dn["+"][j] - raw_dn["0"][j] - raw_dn["1"][j],
        2 * raw_dn["+i"][j] - raw_dn["0"][j] - raw_dn["1"][j],
    ]
    value = 0.5 * sum(a * b for a, b in zip(p1, p2))
    truth = probabilities(circuit)[0b01010]
    att = attribute_all(subs, [evaluate_subcircuits([s])[0] for s in subs])
    full = reconstruct_fd(att, sol.K, n_qubits=5).probabilities[0b01010]
    ok = (
        sol.K == 1
        and widths == [3, 3]
        and sorted(counts) == [3, 4]
        and abs(value - truth) < 1e-10
        and abs(full - truth) < 1e-10
    )
    detail = (
        f"K={sol.K}, widths={widths}, variants={counts}, "
        f"p(01010) by hand={value:.12f}, engine={full:.12f}, oracle={truth:.12f}"
    )
    return CriterionResult(2, "five-qubit-example", ok, detail)


TERM_COUNT_CASES = {1: ("BV", 8, 5), 2: ("BV", 8, 4), 3: ("BV", 12, 4), 4: ("AQFT", 8, 4)}


def criterion_3() -> CriterionResult:
    parts = []
    ok = True
    for want, (family, size, D) in TERM_COUNT_CASES.items():
        case = fd_case(family, size, D)
        if case is None:
            ok = False
            parts.append(f"K={want}: {family}{size}@D{D} infeasible")
            continue
        circuit, sol, att, truth = case
        res = reconstruct_fd(att, sol.K, n_qubits=circuit.n_qubits)
        total = res.term_count + res.terms_skipped
        ok &= sol.K == want and total == 4**sol.K
        parts.append(f"K={sol.K}: {res.term_count}+{res.terms_skipped}={total}")
    return CriterionResult(3, "term-count-law", ok, "; ".join(parts))


def brute_force_cut(dag, cfg: SearchConfig) -> int | None:
    """Minimum objective over every feasible assignment, or ``None``.

    Independent of the searcher: assignments obeying the symmetry rule
    (vertex ``k`` in a subcircuit ``<= k``) are enumerated in bulk and the
    model quantities are recomputed from the edge list.
    """
    V = dag.n_vertices
    w = np.asarray(dag.weights)
    tails = np.asarray([e.tail for e in dag.edges], dtype=int)
    heads = np.asarray([e.head for e in dag.edges], dtype=int)
    best = None
    for nC in range(2, cfg.max_subcircuits + 1):
        radix = np.minimum(np.arange(V) + 1, nC)
        total = int(np.prod(radix))
        idx = np.arange(total)
        Y = np.empty((total, V), dtype=np.int64)
        for v in range(V - 1, -1, -1):
            Y[:, v] = idx % radix[v]
            idx //= radix[v]
        cut = Y[:, tails] != Y[:, heads] if len(tails) else np.zeros((total, 0), bool)
        K = cut.sum(axis=1)
        ok = K <= cfg.max_cuts
        f_all = []
        for c in range(nC):
            member = Y == c
            ok &= member.any(axis=1)
            alpha = (member * w).sum(axis=1)
            rho = (cut & (Y[:, heads] == c)).sum(axis=1)
            O = (cut & (Y[:, tails] == c)).sum(axis=1)
            ok &= alpha + rho <= cfg.max_qubits
            f_all.append(alpha + rho - O)
        if not ok.any():
            continue
        f = np.stack(f_all, axis=1)[ok]
        prefix = np.cumsum(f, axis=1)
        L = (4 ** K[ok]).astype(object) * sum(
            (2 ** prefix[:, c]).astype(object) for c in range(1, nC)
        )
        m = min(L)
        best = m if best is None else min(best, m)
    return best


def criterion_4(n_dags: int = 50, seed: int = 2024) -> CriterionResult:
    rng = np.random.default_rng(seed)
    matched = violations = checked = 0
    mismatches = []
    while checked < n_dags:
        n = int(rng.integers(3, 7))
        circuit = random_circuit(n, int(rng.integers(n, 3 * n)), rng, two_qubit_fraction=0.5)
        dag = build_dag(circuit)
        if not 2 <= dag.n_vertices <= 10 or not dag.is_connected():
            continue
        cfg = SearchConfig(int(rng.integers(2, n + 1)), int(rng.integers(2, 6)), 10)
        expected = brute_force_cut(dag, cfg)
        try:
            sol = find_cuts(dag, cfg, allow_single=False)
            got = sol.L
            violations += len(validate_solution(dag, sol, cfg))
        except Infeasible:
            got = None
        checked += 1
        if got == expected:
            matched += 1
        else:
            mismatches.append((checked, expected, got))
    ok = matched == n_dags and violations == 0
    detail = f"{matched}/{n_dags} objectives match exhaustive enumeration, {violations} constraint violations"
    if mismatches:
        detail += f"; first mismatch (case, expected, found) {mismatches[0]}"
    return CriterionResult(4, "cut-search-optimality", ok, detail)


BV_DEVICES = {4: 3, 8: 5, 12: 5}


def criterion_5() -> CriterionResult:
    parts = []
    ok = True
    for n, D in BV_DEVICES.items():
        circuit = bv(n)
        truth = probabilities(circuit)
        target = int(np.argmax(truth))
        sol = find_cuts(build_dag(circuit), SearchConfig(D, 5, 10), allow_single=False)
        subs, _ = extract_subcircuits(circuit, sol)
        att = attribute_all(subs, evaluate_subcircuits(subs, cap=D))
        res = dd_query(att, sol.K, DDConfig(max_active=1, max_recursions=10 * n, strategy="dfs"))
        state = None if res.solution is None else int("".join(map(str, res.solution)), 2)
        good = (
            len(res.trace) == n
            and state == target
            and abs(res.solution_probability - 1.0) < 1e-8
        )
        ok &= good
        parts.append(
            f"n={n}: {len(res.trace)} recursions, state={''.join(map(str, res.solution or ()))}, "
            f"p={res.solution_probability:.10f}"
        )
    return CriterionResult(5, "dd-solution-location", ok, "; ".join(parts))


def _random_labeling(n: int, rng) -> QubitLabeling:
    while True:
        labels = []
        for _ in range(n):
            r = rng.random()
            labels.append("active" if r < 0.4 else "merged" if r < 0.7 else int(rng.integers(2)))
        if "active" in labels:
            return QubitLabeling(tuple(labels))


def criterion_6(n_pairs: int = 100, seed: int = 7) -> CriterionResult:
    rng = np.random.default_rng(seed)
    worst_match = worst_cons = 0.0
    done = 0
    trace_cons = 0.0
    while done < n_pairs:
        n = int(rng.integers(4, 11))
        circuit = random_circuit(n, int(rng.integers(2 * n, 4 * n)), rng, two_qubit_fraction=0.4)
        dag = build_dag(circuit)
        if not dag.is_connected():
            continue
        D = int(rng.integers(max(2, (n + 1) // 2), n))
        try:
            sol = find_cuts(dag, SearchConfig(D, 4, 6, time_limit=5.0), allow_single=False)
        except (Infeasible, SearchTimeout):
            continue
        subs, _ = extract_subcircuits(circuit, sol)
        att = attribute_all(subs, evaluate_subcircuits(subs, cap=D))
        fd = reconstruct_fd(att, sol.K, n_qubits=n).probabilities
        lab = _random_labeling(n, rng)
        bins = dd_recursion(att, sol.K, lab).bins
        worst_match = max(worst_match, float(np.abs(bins - marginalize(fd, lab)).max()))
        zoomed = QubitLabeling(tuple("merged" if x == "active" else x for x in lab.labels))
        region = float(marginalize(fd, zoomed).sum())
        worst_cons = max(worst_cons, abs(float(bins.sum()) - region))
        # a short BFS trace: children must sum to the parent bin they refine
        trace = dd_query(att, sol.K, DDConfig(max_active=max(1, n // 3), max_recursions=3, strategy="bfs")).trace
        for b in trace:
            trace_cons = max(trace_cons, abs(float(b.bins.sum()) - b.probability))
        done += 1
    worst = max(worst_cons, trace_cons)
    ok = worst_match < 1e-8 and worst < 1e-8
    detail = (
        f"{done} pairs: max|dd - marginalized fd|={worst_match:.2e}, "
        f"max conservation error={worst:.2e}"
    )
    return CriterionResult(6, "dd-conservation-consistency", ok, detail)


def criterion_7() -> CriterionResult:
    worst = 0.0
    n_cases = 0
    for family, size, D in fd_cases():
        case = fd_case(family, size, D)
        if case is None:
            continue
        circuit, sol, att, _ = case
        base = reconstruct_fd(att, sol.K, n_qubits=circuit.n_qubits).probabilities
        for greedy, early, threads in itertools.product((False, True), (False, True), (1, 2, 8)):
            p = reconstruct_fd(
                att, sol.K, n_qubits=circuit.n_qubits, greedy=greedy,
                early_termination=early, threads=threads,
            ).probabilities
            worst = max(worst, float(np.abs(p - base).max()))
        n_cases += 1
    ok = worst < 1e-9
    return CriterionResult(
        7, "optimization-neutrality", ok,
        f"{n_cases} cases x 12 settings, max deviation {worst:.2e}",
    )


def criterion_8(seeds=range(5)) -> CriterionResult:
    circuit = bv(8)
    means = {}
    negatives = {}
    for shots in (256, 8192):
        tv = []
        neg = 0
        for s in seeds:
            r = run_pipeline(circuit, 5, mode="shots", shots=shots, seed=s)
            tv.append(total_variation(r.probabilities, r.oracle))
            neg += r.report.negative_entries
        means[shots] = float(np.mean(tv))
        negatives[shots] = neg
    ok = means[8192] < means[256]
    detail = (
        f"mean TV 256 shots={means[256]:.4f}, 8192 shots={means[8192]:.4f}; "
        f"negative entries reported: {negatives[256]} (256), {negatives[8192]} (8192)"
    )
    return CriterionResult(8, "shots-convergence", ok, detail, {"tv": means, "negatives": negatives})


def scaling_instance():
    circuit = generate_benchmark(BenchmarkSpec("HWEA", 20, layers=1))
    sol = find_cuts(build_dag(circuit), SearchConfig(5, 5, 10))
    subs, _ = extract_subcircuits(circuit, sol)
    att = attribute_all(subs, evaluate_subcircuits(subs, cap=5))
    return circuit, sol, att


def criterion_9(repeats: int = 3) -> CriterionResult:
    circuit, sol, att = scaling_instance()
    n = circuit.n_qubits

    def best(threads):
        times = []
        for _ in range(repeats):
            t0 = time.perf_counter()
            reconstruct_fd(att, sol.K, n_qubits=n, threads=threads)
            times.append(time.perf_counter() - t0)
        return min(times)

    t1, t8 = best(1), best(8)
    ratio = t8 / t1
    ok = 4**sol.K >= 256 and n >= 20 and ratio <= 0.5
    cpus = len(os.sched_getaffinity(0)) if hasattr(os, "sched_getaffinity") else os.cpu_count()
    detail = (
        f"{4**sol.K} terms, 2^{n} outputs: t1={t1:.3f}s, t8={t8:.3f}s, ratio={ratio:.2f} "
        f"(limit 0.5) on {cpus} available CPU(s)"
    )
    return CriterionResult(9, "parallel-scaling", ok, detail, {"ratio": ratio, "cpus": cpus})


def criterion_10(seeds=range(5), noise: float = 0.01, shots: int = 8192) -> CriterionResult:
    circuit = bv(10)
    cut_chi, direct_chi = [], []
    for s in seeds:
        r = run_pipeline(circuit, 5, mode="shots", shots=shots, seed=s, noise=noise)
        cut_chi.append(r.report.chi2)
        direct_chi.append(chi_squared(direct_noisy(circuit, noise, shots, s), r.oracle))
    a, b = float(np.mean(cut_chi)), float(np.mean(direct_chi))
    ok = a < b
    detail = f"mean chi2 cut={a:.4f}, direct={b:.4f} (per-gate depolarizing {noise}, {shots} shots)"
    return CriterionResult(10, "noisy-cut-vs-direct", ok, detail)


CRITERIA = {
    1: criterion_1,
    2: criterion_2,
    3: criterion_3,
    4: criterion_4,
    5: criterion_5,
    6: criterion_6,
    7: criterion_7,
    8: criterion_8,
    9: criterion_9,
    10: criterion_10,
}


def run_criteria(numbers=None, echo: bool = False) -> list[CriterionResult]:
    results = []
    for k in numbers or sorted(CRITERIA):
        res = CRITERIA[k]()
        if echo:
            print(res.line(), flush=True)
        results.append(res)
    return results
