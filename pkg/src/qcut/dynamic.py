"""Dynamic-definition query: binned reconstruction that zooms into likely regions.

Each recursion labels every qubit as active, merged or zoomed to a bit.
Attributed subcircuit vectors are collapsed over their merged and zoomed
qubits before the Kronecker build, which is valid because attribution is
linear, so one recursion only ever builds ``2**#active`` entries.
"""

from __future__ import annotations

import heapq
import json
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .reconstruct import (
    AttributedSubcircuit,
    ReconstructionError,
    _check_alignment,
    _term_rows,
    kron_sum,
    plan_order,
    to_original_order,
)
from .simulator import capacity

ACTIVE = "active"
MERGED = "merged"


@dataclass(frozen=True)
class QubitLabeling:
    """One label per qubit: ``"active"``, ``"merged"`` or a zoomed bit 0/1."""

    labels: tuple

    def __post_init__(self):
        for lab in self.labels:
            if lab not in (ACTIVE, MERGED, 0, 1):
                raise ValueError(f"bad qubit label {lab!r}")

    @classmethod
    def initial(cls, n: int, active: Sequence[int]) -> QubitLabeling:
        labels = [MERGED] * n
        for q in active:
            labels[q] = ACTIVE
        return cls(tuple(labels))

    @property
    def n_qubits(self) -> int:
        return len(self.labels)

    @property
    def active(self) -> list[int]:
        return [q for q, lab in enumerate(self.labels) if lab == ACTIVE]

    @property
    def merged(self) -> list[int]:
        return [q for q, lab in enumerate(self.labels) if lab == MERGED]

    @property
    def zoomed(self) -> dict[int, int]:
        return {q: lab for q, lab in enumerate(self.labels) if lab in (0, 1)}

    def zoom(self, bin_index: int, promote: Sequence[int]) -> QubitLabeling:
        """Fix the active qubits to the bits of ``bin_index`` and activate ``promote``."""
        active = self.active
        labels = list(self.labels)
        for pos, q in enumerate(active):
            labels[q] = (bin_index >> (len(active) - 1 - pos)) & 1
        for q in promote:
            if labels[q] != MERGED:
                raise ValueError(f"qubit {q} is not merged")
            labels[q] = ACTIVE
        return QubitLabeling(tuple(labels))

    def to_json(self) -> list:
        return list(self.labels)


@dataclass
class BinDistribution:
    labeling: QubitLabeling
    bins: np.ndarray
    recursion_index: int
    parent: tuple[int, int] | None = None  # (recursion, bin) this one zooms into
    probability: float = 1.0  # probability of the enclosing region
    chosen_bin: int | None = None
    terms_skipped: int = 0
    max_partial: int = 0  # widest Kronecker partial product built, in entries

    def to_dict(self) -> dict:
        return {
            "recursion": self.recursion_index,
            "labeling": self.labeling.to_json(),
            "bins": self.bins.tolist(),
            "chosen_bin": self.chosen_bin,
            "probability": self.probability,
            "parent": None if self.parent is None else list(self.parent),
        }


@dataclass
class DDConfig:
    max_active: int = 10
    max_recursions: int = 1
    strategy: str = "dfs"
    active_order: Sequence[int] | None = None
    zoom_path: Sequence[int] | None = None
    epsilon: float = 1e-6
    threads: int = 1

    def __post_init__(self):
        self.strategy = self.strategy.lower()
        if self.max_active < 1:
            raise ValueError("max_active must be >= 1")
        if self.max_recursions < 1:
            raise ValueError("max_recursions must be >= 1")
        if self.strategy not in ("dfs", "bfs"):
            raise ValueError(f"strategy must be dfs or bfs, not {self.strategy!r}")


@dataclass
class DDResult:
    trace: list[BinDistribution]
    solution: tuple[int, ...] | None = None  # fully resolved bitstring (DFS)
    solution_probability: float | None = None
    extra: dict = field(default_factory=dict)

    def trace_json(self) -> str:
        data = {"recursions": [b.to_dict() for b in self.trace]}
        if self.solution is not None:
            data["solution"] = "".join(map(str, self.solution))
            data["solution_probability"] = self.solution_probability
        return json.dumps(data, indent=2)


def _collapse(a: AttributedSubcircuit, labeling: QubitLabeling) -> tuple[np.ndarray, list[int]]:
    rows = a.vectors.shape[0]
    t = a.vectors.reshape(rows, *(2,) * a.f)
    kept = []
    index: list = [slice(None)]
    sum_axes = []
    axis = 1
    for q in a.output_qubits:
        lab = labeling.labels[q]
        if lab in (0, 1):
            index.append(lab)
            continue
        index.append(slice(None))
        if lab == MERGED:
            sum_axes.append(axis)
        else:
            kept.append(q)
        axis += 1
    t = t[tuple(index)]
    if sum_axes:
        t = t.sum(axis=tuple(sum_axes))
    return np.ascontiguousarray(t).reshape(rows, 2 ** len(kept)), kept


def dd_recursion(
    attributed: Sequence[AttributedSubcircuit],
    K: int,
    labeling: QubitLabeling,
    recursion_index: int = 0,
    early_termination: bool = True,
    threads: int = 1,
) -> BinDistribution:
    """Bins over ``labeling.active`` (ascending qubit order, first qubit most significant)."""
    n = sum(a.f for a in attributed)
    if labeling.n_qubits != n:
        raise ReconstructionError(f"labeling covers {labeling.n_qubits} qubits, solution has {n}")
    _check_alignment(attributed, K, n)
    collapsed = [_collapse(a, labeling) for a in attributed]
    vectors = [v for v, _ in collapsed]
    rows = _term_rows(attributed, K)
    keep = np.ones(4**K, dtype=bool)
    if early_termination:
        for v, r in zip(vectors, rows):
            keep &= np.any(v != 0, axis=1)[r]
    order = plan_order([len(kept) for _, kept in collapsed])
    acc = kron_sum(vectors, rows, order, keep, threads)
    acc *= 0.5**K
    qubits = [q for c in order for q in collapsed[c][1]]
    bins = to_original_order(acc, qubits)
    return BinDistribution(
        labeling,
        bins,
        recursion_index,
        terms_skipped=int(4**K - keep.sum()),
        max_partial=len(bins),
    )


def _largest(bins: np.ndarray) -> int:
    # argmax returns the first maximum, i.e. the lowest bin index on ties
    return int(np.argmax(bins))


def dd_query(
    attributed: Sequence[AttributedSubcircuit],
    K: int,
    cfg: DDConfig,
) -> DDResult:
    n = sum(a.f for a in attributed)
    order = list(cfg.active_order) if cfg.active_order is not None else list(range(n))
    if sorted(order) != list(range(n)):
        raise ValueError(f"active_order must be a permutation of 0..{n - 1}")

    def promote_after(lab: QubitLabeling) -> list[int]:
        merged = set(lab.merged)
        return [q for q in order if q in merged][: cfg.max_active]

    def run(lab: QubitLabeling, r: int, parent, prob) -> BinDistribution:
        b = dd_recursion(attributed, K, lab, r, threads=cfg.threads)
        b.parent = parent
        b.probability = prob
        return b

    first = QubitLabeling.initial(n, order[: cfg.max_active])
    trace = [run(first, 0, None, 1.0)]
    path = list(cfg.zoom_path or [])

    if cfg.strategy == "dfs":
        while len(trace) < cfg.max_recursions:
            cur = trace[-1]
            promote = promote_after(cur.labeling)
            if not promote:
                break
            r = len(trace)
            chosen = path[r - 1] if r - 1 < len(path) else _largest(cur.bins)
            if not 0 <= chosen < len(cur.bins):
                raise ValueError(f"zoom bin {chosen} out of range for recursion {r - 1}")
            cur.chosen_bin = chosen
            trace.append(run(cur.labeling.zoom(chosen, promote), r, (r - 1, chosen), float(cur.bins[chosen])))
        result = DDResult(trace)
        last = trace[-1]
        if not last.labeling.merged:
            best = _largest(last.bins)
            lab = last.labeling.zoom(best, [])
            result.solution = tuple(lab.labels)
            result.solution_probability = float(last.bins[best])
        return result

    # BFS: expand the globally largest bin not yet expanded, each bin at most once
    heap: list = []

    def push(b: BinDistribution):
        if not b.labeling.merged:
            return
        for i, p in enumerate(b.bins):
            heapq.heappush(heap, (-float(p), b.recursion_index, i))

    push(trace[0])
    while len(trace) < cfg.max_recursions and heap:
        r = len(trace)
        if r - 1 < len(path):
            src = trace[-1]
            chosen = path[r - 1]
            heap = [h for h in heap if not (h[1] == src.recursion_index and h[2] == chosen)]
            heapq.heapify(heap)
        else:
            _, rec, chosen = heapq.heappop(heap)
            src = trace[rec]
        src.chosen_bin = chosen if src.chosen_bin is None else src.chosen_bin
        promote = promote_after(src.labeling)
        child = run(src.labeling.zoom(chosen, promote), r, (src.recursion_index, chosen), float(src.bins[chosen]))
        trace.append(child)
        push(child)
    return DDResult(trace)


def expand_bins(trace: Sequence[BinDistribution], n: int, cap: int | None = None) -> np.ndarray:
    """Full ``2**n`` approximation: each bin spread evenly, finer recursions overwrite coarser ones."""
    cap = capacity() if cap is None else cap
    if n > cap:
        raise ValueError(f"cannot materialize 2**{n} entries (cap {cap})")
    out = np.zeros((2,) * n)
    for b in sorted(trace, key=lambda b: len(b.labeling.zoomed)):
        lab = b.labeling
        index = tuple(lab.labels[q] if lab.labels[q] in (0, 1) else slice(None) for q in range(n))
        view = out[index] if n else out
        shape = [2 if lab.labels[q] == ACTIVE else 1 for q in range(n) if lab.labels[q] not in (0, 1)]
        spread = 2 ** len(lab.merged)
        view[...] = b.bins.reshape(shape) / spread
    return out.reshape(-1)


def marginalize(p: np.ndarray, labeling: QubitLabeling) -> np.ndarray:
    """Filter-then-sum reference: bins of a full distribution under ``labeling``."""
    n = labeling.n_qubits
    t = p.reshape((2,) * n)
    index = tuple(lab if lab in (0, 1) else slice(None) for lab in labeling.labels)
    t = t[index]
    rest = [q for q in range(n) if labeling.labels[q] not in (0, 1)]
    sum_axes = tuple(i for i, q in enumerate(rest) if labeling.labels[q] == MERGED)
    if sum_axes:
        t = t.sum(axis=sum_axes)
    return np.asarray(t).reshape(-1)
