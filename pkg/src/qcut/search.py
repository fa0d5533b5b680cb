"""Exact cut search over the two-qubit-gate DAG.

The model: every vertex goes to exactly one subcircuit; a subcircuit needs
``alpha`` original input qubits plus ``rho`` initialization qubits (one per
cut edge entering it) and must fit the device (``alpha + rho <= D``); it
measures out ``O`` qubits (one per cut edge leaving it) and so contributes
``f = alpha + rho - O`` qubits to the final output.  The cost of a solution
with ``K`` cut edges and subcircuit output widths ``f_1..f_nC`` is::

    L = 4**K * sum_{c=2..nC} prod_{i=1..c} 2**f_i

which counts the multiplications of the Kronecker build.  Vertex ``k`` may
only sit in a subcircuit with index ``<= k`` (symmetry breaking).

The search is a depth-first branch and bound over vertex partitions in
canonical (first-occurrence) form, with iterative deepening on the cut
budget.  Because ``L`` depends on the order of the ``f`` values, each
complete partition is scored under every labeling that satisfies the
symmetry-breaking rule and the best one is kept.
"""

from __future__ import annotations

import itertools
import json
import time
from dataclasses import dataclass, field

from .circuit import CircuitDag


class Infeasible(Exception):
    """No assignment fits the device size, subcircuit cap and cut cap."""


class SearchTimeout(RuntimeError):
    pass


@dataclass(frozen=True)
class SearchConfig:
    max_qubits: int
    max_subcircuits: int = 5
    max_cuts: int = 10
    time_limit: float | None = None

    def __post_init__(self):
        if self.max_qubits < 2:
            raise ValueError("device size D must be >= 2")
        if self.max_subcircuits < 2:
            raise ValueError("max_subcircuits must be >= 2")
        if self.max_cuts < 1:
            raise ValueError("max_cuts must be >= 1")


@dataclass(frozen=True)
class CutSolution:
    n_subcircuits: int
    assignment: tuple[int, ...]
    cut_edges: tuple[int, ...]  # indices into dag.edges, ascending
    alpha: tuple[int, ...]
    rho: tuple[int, ...]
    O: tuple[int, ...]
    K: int
    L: int
    edge_list: tuple[tuple[int, int, int], ...] = field(default=(), compare=False)

    @property
    def d(self) -> tuple[int, ...]:
        return tuple(a + r for a, r in zip(self.alpha, self.rho))

    @property
    def f(self) -> tuple[int, ...]:
        return tuple(a + r - o for a, r, o in zip(self.alpha, self.rho, self.O))

    @property
    def no_cut_needed(self) -> bool:
        return self.n_subcircuits == 1

    def to_dict(self) -> dict:
        return {
            "n_C": self.n_subcircuits,
            "assignment": list(self.assignment),
            "cut_edges": [
                {"edge": k, "from_vertex": t, "to_vertex": h, "qubit": q}
                for k, (t, h, q) in zip(self.cut_edges, self.edge_list)
            ],
            "subcircuits": [
                {"alpha": a, "rho": r, "O": o, "d": a + r, "f": a + r - o}
                for a, r, o in zip(self.alpha, self.rho, self.O)
            ],
            "K": self.K,
            "L": self.L,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)

    @classmethod
    def from_dict(cls, data: dict) -> CutSolution:
        subs = data["subcircuits"]
        cuts = data["cut_edges"]
        return cls(
            data["n_C"],
            tuple(data["assignment"]),
            tuple(c["edge"] for c in cuts),
            tuple(s["alpha"] for s in subs),
            tuple(s["rho"] for s in subs),
            tuple(s["O"] for s in subs),
            data["K"],
            data["L"],
            tuple((c["from_vertex"], c["to_vertex"], c["qubit"]) for c in cuts),
        )


def objective(K: int, f) -> int:
    """``4**K * sum_{c>=2} prod_{i<=c} 2**f_i`` in exact integer arithmetic."""
    total = 0
    prefix = 0
    for c, fc in enumerate(f):
        prefix += fc
        if c >= 1:
            total += 1 << prefix
    return (4**K) * total


def evaluate_objective(sol: CutSolution) -> int:
    return objective(sol.K, sol.f)


def solution_from_assignment(dag: CircuitDag, assignment, n_subcircuits: int | None = None) -> CutSolution:
    """Derive cut edges and per-subcircuit counts from a vertex assignment."""
    assignment = tuple(int(a) for a in assignment)
    n_c = n_subcircuits if n_subcircuits is not None else (max(assignment) + 1 if assignment else 1)
    alpha = [0] * n_c
    rho = [0] * n_c
    out = [0] * n_c
    for v, c in enumerate(assignment):
        alpha[c] += dag.weights[v]
    cuts = []
    for k, e in enumerate(dag.edges):
        a, b = assignment[e.tail], assignment[e.head]
        if a != b:
            cuts.append(k)
            out[a] += 1
            rho[b] += 1
    f = [x + r - o for x, r, o in zip(alpha, rho, out)]
    K = len(cuts)
    L = objective(K, f) if n_c > 1 else 0
    edge_list = tuple((dag.edges[k].tail, dag.edges[k].head, dag.edges[k].qubit) for k in cuts)
    return CutSolution(n_c, assignment, tuple(cuts), tuple(alpha), tuple(rho), tuple(out), K, L, edge_list)


def uncut_solution(dag: CircuitDag) -> CutSolution:
    return CutSolution(1, (0,) * dag.n_vertices, (), (dag.n_qubits,), (0,), (0,), 0, 0)


def validate_solution(dag: CircuitDag, sol: CutSolution, cfg: SearchConfig | None = None) -> list[str]:
    """List every constraint the solution breaks; empty when feasible.

    Each message starts with the violated constraint: ``assignment`` (one
    subcircuit per vertex, none empty), ``capacity`` (``d <= D``), ``cut``
    (cut edges are exactly the edges whose endpoints differ), ``symmetry``
    (vertex ``k`` in a subcircuit ``<= k``), ``cut-cap``, ``counts`` or
    ``objective``.

    ``sol.assignment`` entries may also be collections of subcircuit indices,
    which lets a (broken) multi-assignment be described and rejected.
    """
    problems: list[str] = []
    n_c = sol.n_subcircuits
    members: list[set[int]] = []
    for v in range(dag.n_vertices):
        entry = sol.assignment[v] if v < len(sol.assignment) else ()
        s = {int(entry)} if isinstance(entry, int) else {int(x) for x in entry}
        members.append(s)
        if len(s) != 1 or not all(0 <= c < n_c for c in s):
            problems.append(f"assignment: vertex {v} assigned to subcircuits {sorted(s)}, need exactly one of 0..{n_c - 1}")
    if len(sol.assignment) != dag.n_vertices:
        problems.append(f"assignment: covers {len(sol.assignment)} of {dag.n_vertices} vertices")
    if problems:
        return problems

    y = [next(iter(s)) for s in members]
    ref = solution_from_assignment(dag, y, n_c)
    for c in range(n_c):
        if not any(a == c for a in y) and n_c > 1:
            problems.append(f"assignment: subcircuit {c} is empty")
    if cfg is not None:
        for c, dc in enumerate(ref.d):
            if dc > cfg.max_qubits:
                problems.append(f"capacity: subcircuit {c} needs d={dc} > D={cfg.max_qubits}")
        if ref.K > cfg.max_cuts:
            problems.append(f"cut-cap: K={ref.K} exceeds max_cuts={cfg.max_cuts}")
    if set(sol.cut_edges) != set(ref.cut_edges):
        extra = sorted(set(sol.cut_edges) - set(ref.cut_edges))
        missing = sorted(set(ref.cut_edges) - set(sol.cut_edges))
        problems.append(f"cut: cut edges disagree with the assignment (extra {extra}, missing {missing})")
    if sol.K != ref.K:
        problems.append(f"cut: K={sol.K} but the assignment cuts {ref.K} edges")
    for v, c in enumerate(y):
        if c > v:
            problems.append(f"symmetry: vertex {v} sits in subcircuit {c} > {v}")
    for name in ("alpha", "rho", "O"):
        if tuple(getattr(sol, name)) != tuple(getattr(ref, name)):
            problems.append(f"counts: stored {name}={getattr(sol, name)} but derived {getattr(ref, name)}")
    if n_c > 1 and sol.L != ref.L:
        problems.append(f"objective: stored L={sol.L} but derived {ref.L}")
    return problems


# ---------------------------------------------------------------------------
# branch and bound


class _Search:
    def __init__(self, dag: CircuitDag, cfg: SearchConfig):
        self.dag = dag
        self.cfg = cfg
        self.n = dag.n_qubits
        self.nv = dag.n_vertices
        self.D = cfg.max_qubits
        self.max_blocks = min(cfg.max_subcircuits, self.nv)
        self.w = list(dag.weights)
        self.preds: list[list[int]] = [[] for _ in range(self.nv)]
        for e in dag.edges:
            self.preds[e.head].append(e.tail)
        # remaining original inputs after vertex v is placed
        self.w_after = [0] * (self.nv + 1)
        for v in reversed(range(self.nv)):
            self.w_after[v] = self.w_after[v + 1] + self.w[v]

        # frontier[v]: unplaced vertices with a placed predecessor once
        # vertices < v are placed, with those predecessors
        self.frontier: list[list[tuple[int, list[int]]]] = []
        for v in range(self.nv + 1):
            row = []
            for s in range(v, self.nv):
                known = [p for p in self.preds[s] if p < v]
                if known:
                    row.append((s, known))
            self.frontier.append(row)

        self.assign = [-1] * self.nv
        self.d = [0] * self.max_blocks
        self.nb = 0
        self.K = 0
        self.best = None  # (L, K, y)
        self.nodes = 0
        self.deadline = None if cfg.time_limit is None else time.monotonic() + cfg.time_limit

    # lower bound on cuts still to come, given vertices < v placed
    def _future_cuts(self, v: int) -> int:
        assign, d, D, w = self.assign, self.d, self.D, self.w
        lb = 0
        for s, known_preds in self.frontier[v]:
            known = [assign[p] for p in known_preds]
            best = len(known)
            for b in set(known):
                miss = sum(1 for k in known if k != b)
                if miss < best and d[b] + w[s] + miss <= D:
                    best = miss
            lb += best
        # inputs not yet placed must fit the free room of existing or new
        # blocks, and a connected DAG in b blocks has >= b - 1 cut edges
        remaining = self.w_after[v]
        free = 0
        for b in range(self.nb):
            free += D - d[b]
        if remaining > free:
            extra = -(-(remaining - free) // D)
            if self.nb + extra > self.max_blocks:
                return 10**9
            lb = max(lb, self.nb + extra - 1 - self.K)
        return lb

    def run(self, cap: int):
        self.cap = cap
        self._dfs(0)

    def _dfs(self, v: int):
        self.nodes += 1
        if self.deadline is not None and self.nodes % 4096 == 0 and time.monotonic() > self.deadline:
            raise SearchTimeout(f"cut search exceeded {self.cfg.time_limit}s")
        if v == self.nv:
            if self.nb >= 2:
                self._leaf()
            return
        assign, d, w = self.assign, self.d, self.w
        preds = self.preds[v]
        nb = self.nb
        top = nb + 1 if nb < self.max_blocks else nb
        # the symmetry rule holds here by construction: a new block gets label nb <= v
        for b in range(top):
            cuts = 0
            for p in preds:
                if assign[p] != b:
                    cuts += 1
            if self.K + cuts > self.cap:
                continue
            base = d[b] if b < nb else 0
            nd = base + w[v] + cuts
            if nd > self.D:
                continue
            assign[v] = b
            old_d = d[b]
            d[b] = nd
            if b == nb:
                self.nb += 1
            self.K += cuts
            if self.K + self._future_cuts(v + 1) <= self.cap:
                self._dfs(v + 1)
            self.K -= cuts
            if b == nb:
                self.nb -= 1
            d[b] = old_d if b < nb else 0
            assign[v] = -1

    def _leaf(self):
        y = list(self.assign)
        nb = self.nb
        sol = solution_from_assignment(self.dag, y, nb)
        if self.best is not None and (4**sol.K) * (1 << self.n) > self.best[0]:
            return
        first = [0] * nb
        seen = set()
        for v, b in enumerate(y):
            if b not in seen:
                seen.add(b)
                first[b] = v
        f = sol.f
        for perm in itertools.permutations(range(nb)):
            if any(perm[b] > first[b] for b in range(nb)):
                continue
            f_seq = [0] * nb
            for b in range(nb):
                f_seq[perm[b]] = f[b]
            L = objective(sol.K, f_seq)
            key = (L, sol.K, tuple(perm[b] for b in y))
            if self.best is None or key < self.best:
                self.best = key


def _initial_cut_bound(dag: CircuitDag, cfg: SearchConfig) -> int:
    # a connected DAG split into b blocks needs >= b - 1 cut edges, and
    # b blocks of <= D qubits host n + K qubits in total
    n, D = dag.n_qubits, cfg.max_qubits
    k = 1
    while k <= cfg.max_cuts:
        blocks = -(-(n + k) // D)
        if blocks <= cfg.max_subcircuits and k >= blocks - 1:
            return k
        k += 1
    return cfg.max_cuts + 1


def find_cuts(dag: CircuitDag, cfg: SearchConfig, allow_single: bool = True) -> CutSolution:
    """Minimum-``L`` cut solution; ties go to fewer cuts, then the smallest assignment.

    When the whole circuit fits the device and ``allow_single`` is set, the
    single-subcircuit solution (``K = 0``, ``L = 0``) is returned.
    """
    if dag.n_vertices == 0 or not dag.is_connected():
        raise ValueError("cut search needs a connected circuit (every qubit in a two-qubit gate)")
    if allow_single and dag.n_qubits <= cfg.max_qubits:
        return uncut_solution(dag)

    search = _Search(dag, cfg)
    n = dag.n_qubits
    for cap in range(_initial_cut_bound(dag, cfg), cfg.max_cuts + 1):
        if search.best is not None and (4**cap) * (1 << n) > search.best[0]:
            break
        search.run(cap)
    if search.best is None:
        raise Infeasible(
            f"no partition into <= {cfg.max_subcircuits} subcircuits of <= {cfg.max_qubits} "
            f"qubits with <= {cfg.max_cuts} cuts"
        )
    L, K, y = search.best
    sol = solution_from_assignment(dag, y, max(y) + 1)
    assert sol.L == L and sol.K == K
    return sol
