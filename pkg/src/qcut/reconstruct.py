"""Full-definition reconstruction of the uncut distribution.

A wire cut replaces the wire by four signed terms.  With ``p`` the outcome
of the upstream (measured) side and the downstream side initialized as
noted, the terms are::

    term 0: measure I+Z  -> weights (2, 0) on the cut qubit outcome ; init |0>
    term 1: measure I-Z  -> weights (0, 2)                          ; init |1>
    term 2: measure X    -> weights (1, -1)                         ; 2|+>  - |0> - |1>
    term 3: measure Y    -> weights (1, -1)                         ; 2|+i> - |0> - |1>

and the uncut distribution is ``2**-K`` times the sum over all ``4**K``
joint term choices of the Kronecker product of the subcircuit vectors.
"""

from __future__ import annotations

import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Iterator, Mapping, Sequence

import numpy as np

from .cutter import INIT_STATES, MEASURE_BASES, Subcircuit, VariantSpec, variant_count
from .simulator import VariantOutcome

# measurement side: [term, physical basis, outcome]
_MEASURE_WEIGHTS = np.zeros((4, len(MEASURE_BASES), 2))
_MEASURE_WEIGHTS[0, 0] = (2, 0)
_MEASURE_WEIGHTS[1, 0] = (0, 2)
_MEASURE_WEIGHTS[2, 1] = (1, -1)
_MEASURE_WEIGHTS[3, 2] = (1, -1)

# initialization side: [term, prepared state]
_INIT_WEIGHTS = np.array(
    [
        [1, 0, 0, 0],
        [0, 1, 0, 0],
        [-1, -1, 2, 0],
        [-1, -1, 0, 2],
    ],
    dtype=float,
)

SNAP = 1e-15
CHUNK_ELEMENTS = 1 << 22


class ReconstructionError(ValueError):
    pass


@dataclass(frozen=True)
class AttributedVector:
    subcircuit: int
    terms: tuple[tuple[int, int], ...]  # (cut id, term 0..3)
    vector: np.ndarray


@dataclass
class AttributedSubcircuit:
    """All ``4**m`` attributed vectors of one subcircuit with ``m`` incident cuts.

    Row ``r`` of ``vectors`` holds the term choice whose base-4 digits,
    most significant first, follow ``cuts``.
    """

    index: int
    cuts: tuple[int, ...]
    kinds: tuple[str, ...]
    output_qubits: tuple[int, ...]
    vectors: np.ndarray

    @property
    def f(self) -> int:
        return len(self.output_qubits)

    def row(self, terms: Mapping[int, int]) -> int:
        r = 0
        for k in self.cuts:
            r = 4 * r + terms[k]
        return r

    def vector(self, terms: Mapping[int, int]) -> np.ndarray:
        return self.vectors[self.row(terms)]

    def items(self) -> Iterator[AttributedVector]:
        for r, vec in enumerate(self.vectors):
            digits = []
            for _ in self.cuts:
                digits.append(r % 4)
                r //= 4
            yield AttributedVector(self.index, tuple(zip(self.cuts, reversed(digits))), vec)


def _outcome_matrix(sub: Subcircuit, outcomes) -> np.ndarray:
    expected = variant_count(sub)
    if isinstance(outcomes, Mapping):
        from .cutter import enumerate_variants

        specs = [spec for spec, _ in enumerate_variants(sub)]
        try:
            outcomes = [outcomes[s.label] if s.label in outcomes else outcomes[s] for s in specs]
        except KeyError as exc:
            raise ReconstructionError(f"subcircuit {sub.index}: missing variant {exc}") from None
    outcomes = list(outcomes)
    if len(outcomes) != expected:
        raise ReconstructionError(
            f"subcircuit {sub.index}: expected {expected} variant outcomes, got {len(outcomes)}"
        )
    rows = []
    width = 2**sub.circuit.n_qubits
    for out in outcomes:
        p = out.probabilities if isinstance(out, VariantOutcome) else np.asarray(out, dtype=float)
        if len(p) != width:
            raise ReconstructionError(
                f"subcircuit {sub.index}: outcome length {len(p)} != 2**{sub.circuit.n_qubits}"
            )
        rows.append(p)
    return np.asarray(rows, dtype=float)


def attribute(sub: Subcircuit, outcomes, snap: float = SNAP) -> AttributedSubcircuit:
    """Fold variant outcomes into the ``4**m`` signed vectors over final outputs.

    ``outcomes`` lists one probability vector (or :class:`VariantOutcome`)
    per physical variant in :func:`enumerate_variants` order, or maps
    variant labels to them.  Entries with magnitude below ``snap`` are set
    to exactly zero so that vanishing terms can be recognised.
    """
    cuts = sub.incident_cuts
    m = len(cuts)
    d = sub.circuit.n_qubits
    P = _outcome_matrix(sub, outcomes)
    shape = [len(MEASURE_BASES) if kind == "measure" else len(INIT_STATES) for _, kind, _ in cuts]
    P = P.reshape(*shape, *(2,) * d)

    # einsum labels: variant axes 0..m-1, qubit axes m..m+d-1, term axes after
    var_ax = list(range(m))
    qub_ax = list(range(m, m + d))
    term_ax = list(range(m + d, 2 * m + d))
    operands: list = [P, var_ax + qub_ax]
    for j, (_, kind, q) in enumerate(cuts):
        if kind == "measure":
            operands += [_MEASURE_WEIGHTS, [term_ax[j], var_ax[j], qub_ax[q]]]
        else:
            operands += [_INIT_WEIGHTS, [term_ax[j], var_ax[j]]]
    out_ax = term_ax + [qub_ax[q] for q in sub.output_locals]
    vectors = np.einsum(*operands, out_ax, optimize=True) if m else P.copy()
    vectors = np.ascontiguousarray(vectors).reshape(4**m, 2**sub.f)
    if snap:
        vectors[np.abs(vectors) < snap] = 0.0
    return AttributedSubcircuit(
        sub.index,
        tuple(k for k, _, _ in cuts),
        tuple(kind for _, kind, _ in cuts),
        tuple(sub.output_qubits),
        vectors,
    )


def attribute_all(subs: Sequence[Subcircuit], outcomes: Sequence, snap: float = SNAP) -> list[AttributedSubcircuit]:
    return [attribute(s, o, snap) for s, o in zip(subs, outcomes)]


def plan_order(f: Sequence[int]) -> list[int]:
    """Subcircuit indices by ascending output width, ties by index."""
    return sorted(range(len(f)), key=lambda c: (f[c], c))


def early_termination_check(components: Sequence[np.ndarray]) -> bool:
    """True when some component is identically zero, so the term vanishes."""
    return any(not np.any(v) for v in components)


def build_multiplications(widths: Sequence[int]) -> int:
    """Multiplications of one Kronecker term built left to right over ``widths`` (log2 sizes)."""
    total = 0
    prefix = 0
    for i, w in enumerate(widths):
        prefix += w
        if i >= 1:
            total += 1 << prefix
    return total


@dataclass
class ReconstructionResult:
    probabilities: np.ndarray
    term_count: int
    terms_skipped: int
    wall_time: float
    multiplications: int = 0
    order: tuple[int, ...] = ()
    extra: dict = field(default_factory=dict)

    @property
    def multiplications_with_scaling(self) -> int:
        return self.multiplications + len(self.probabilities)


def _term_rows(attributed: Sequence[AttributedSubcircuit], K: int) -> list[np.ndarray]:
    """Row index into each subcircuit's vectors for every joint term, term 0 first."""
    t = np.arange(4**K, dtype=np.int64)
    digits = [(t >> (2 * (K - 1 - k))) & 3 for k in range(K)]
    rows = []
    for a in attributed:
        r = np.zeros_like(t)
        for k in a.cuts:
            r = 4 * r + digits[k]
        rows.append(r)
    return rows


def _check_alignment(attributed: Sequence[AttributedSubcircuit], K: int, n_qubits: int | None):
    seen: dict[int, list[str]] = {}
    for a in attributed:
        for k, kind in zip(a.cuts, a.kinds):
            if not 0 <= k < K:
                raise ReconstructionError(f"cut id {k} outside 0..{K - 1}")
            seen.setdefault(k, []).append(kind)
    for k in range(K):
        if sorted(seen.get(k, [])) != ["init", "measure"]:
            raise ReconstructionError(f"cut {k} needs one measured and one initialized side, got {seen.get(k, [])}")
    total = sum(a.f for a in attributed)
    if n_qubits is not None and total != n_qubits:
        raise ReconstructionError(f"subcircuit outputs cover {total} qubits, expected {n_qubits}")


def kron_sum(
    vectors: Sequence[np.ndarray],
    rows: Sequence[np.ndarray],
    order: Sequence[int],
    keep: np.ndarray,
    threads: int = 1,
    chunk_terms: int | None = None,
) -> np.ndarray:
    """``sum_t kron(vectors[order[0]][rows[order[0]][t]], ...)`` over terms with ``keep[t]``.

    Terms are cut into fixed chunks in term order; each chunk is built as a
    running Kronecker product whose last factor is folded in with one
    matrix product, and chunk partials are added in chunk order, so the
    result does not depend on ``threads``.
    """
    terms = np.flatnonzero(keep)
    sizes = [vectors[c].shape[1] for c in order]
    total = int(np.prod(sizes))
    if len(terms) == 0:
        return np.zeros(total)
    head = total // sizes[-1]
    if chunk_terms is None:
        per_chunk = max(1, CHUNK_ELEMENTS // max(head, sizes[-1]))
        # enough chunks to spread over workers, independent of the worker count
        per_chunk = min(per_chunk, max(1, -(-len(terms) // 64)))
    else:
        per_chunk = chunk_terms
    chunks = [terms[i : i + per_chunk] for i in range(0, len(terms), per_chunk)]

    def work(idx: np.ndarray) -> np.ndarray:
        first = order[0]
        carry = vectors[first][rows[first][idx]]
        if len(order) == 1:
            return carry.sum(axis=0)
        for c in order[1:-1]:
            nxt = vectors[c][rows[c][idx]]
            carry = (carry[:, :, None] * nxt[:, None, :]).reshape(len(idx), -1)
        last = order[-1]
        return (carry.T @ vectors[last][rows[last][idx]]).reshape(-1)

    acc = np.zeros(total)
    if threads <= 1 or len(chunks) == 1:
        for ch in chunks:
            acc += work(ch)
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            for part in pool.map(work, chunks):
                acc += part
    return acc


def to_original_order(vec: np.ndarray, qubit_order: Sequence[int]) -> np.ndarray:
    """Reorder a vector whose axes follow ``qubit_order`` into ascending qubit order."""
    n = len(qubit_order)
    if n == 0:
        return vec
    perm = np.argsort(np.asarray(qubit_order))
    if np.all(perm == np.arange(n)):
        return vec
    return np.ascontiguousarray(vec.reshape((2,) * n).transpose(perm)).reshape(-1)


def reconstruct_fd(
    attributed: Sequence[AttributedSubcircuit],
    K: int | None = None,
    *,
    n_qubits: int | None = None,
    greedy: bool = True,
    order: Sequence[int] | None = None,
    early_termination: bool = True,
    threads: int = 1,
    chunk_terms: int | None = None,
) -> ReconstructionResult:
    """Rebuild the uncut ``2**n`` distribution from attributed subcircuit vectors."""
    start = time.perf_counter()
    if K is None:
        K = len({k for a in attributed for k in a.cuts})
    _check_alignment(attributed, K, n_qubits)
    f = [a.f for a in attributed]
    if order is None:
        order = plan_order(f) if greedy else list(range(len(attributed)))
    order = list(order)
    if sorted(order) != list(range(len(attributed))):
        raise ReconstructionError(f"order {order} is not a permutation of the subcircuits")

    rows = _term_rows(attributed, K)
    keep = np.ones(4**K, dtype=bool)
    if early_termination:
        for a, r in zip(attributed, rows):
            nonzero = np.any(a.vectors != 0, axis=1)
            keep &= nonzero[r]
    evaluated = int(keep.sum())
    vectors = [a.vectors for a in attributed]
    acc = kron_sum(vectors, rows, order, keep, threads, chunk_terms)
    acc *= 0.5**K
    qubits = [q for c in order for q in attributed[c].output_qubits]
    probs = to_original_order(acc, qubits)
    per_term = build_multiplications([f[c] for c in order])
    return ReconstructionResult(
        probs,
        evaluated,
        4**K - evaluated,
        time.perf_counter() - start,
        per_term * evaluated,
        tuple(order),
    )


def reconstruct_terms(
    attributed: Sequence[AttributedSubcircuit],
    K: int,
    order: Sequence[int] | None = None,
    early_termination: bool = True,
) -> ReconstructionResult:
    """Term-by-term reference path: one ``np.kron`` chain per joint term."""
    start = time.perf_counter()
    order = list(order if order is not None else plan_order([a.f for a in attributed]))
    n = sum(a.f for a in attributed)
    acc = np.zeros(2**n)
    evaluated = skipped = 0
    for t in range(4**K):
        terms = {k: (t >> (2 * (K - 1 - k))) & 3 for k in range(K)}
        comps = [attributed[c].vector(terms) for c in order]
        if early_termination and early_termination_check(comps):
            skipped += 1
            continue
        evaluated += 1
        v = comps[0]
        for nxt in comps[1:]:
            v = np.kron(v, nxt)
        acc += v
    acc *= 0.5**K
    qubits = [q for c in order for q in attributed[c].output_qubits]
    per_term = build_multiplications([attributed[c].f for c in order])
    return ReconstructionResult(
        to_original_order(acc, qubits), evaluated, skipped, time.perf_counter() - start,
        per_term * evaluated, tuple(order),
    )


def clip_renormalize(p: np.ndarray) -> np.ndarray:
    q = np.clip(p, 0.0, None)
    s = q.sum()
    return q / s if s > 0 else q


def variant_labels(specs: Sequence[VariantSpec]) -> list[str]:
    return [s.label for s in specs]
