"""Turn a cut solution into executable subcircuits and their variants.

Each wire is split into segments at its cut edges; the cut position sits
immediately after the upstream two-qubit gate, so single-qubit gates between
the two endpoints of a cut run downstream.  A segment becomes one local
qubit of the subcircuit that owns its two-qubit gates.  Local qubits are
ordered by (original qubit, segment).
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass
from pathlib import Path

from .circuit import Circuit, CircuitBuilder, Gate, build_dag, parse_circuit, serialize_circuit
from .search import CutSolution

MEASURE_BASES = ("I", "X", "Y")  # I and Z share one physical circuit
INIT_STATES = ("0", "1", "+", "+i")


@dataclass(frozen=True)
class QubitRole:
    qubit: int  # original qubit index
    segment: int
    origin: str  # "input" or "init"
    origin_cut: int | None
    fate: str  # "output" or "measure"
    fate_cut: int | None


@dataclass(frozen=True)
class CutPoint:
    cut_id: int
    qubit: int
    upstream: tuple[int, int]  # (subcircuit, local qubit) measured out
    downstream: tuple[int, int]  # (subcircuit, local qubit) initialized


@dataclass(frozen=True)
class Subcircuit:
    index: int
    circuit: Circuit
    roles: tuple[QubitRole, ...]
    source_gates: tuple[int, ...]  # original gate index of each local gate

    @property
    def alpha(self) -> int:
        return sum(r.origin == "input" for r in self.roles)

    @property
    def rho(self) -> int:
        return sum(r.origin == "init" for r in self.roles)

    @property
    def O(self) -> int:
        return sum(r.fate == "measure" for r in self.roles)

    @property
    def f(self) -> int:
        return sum(r.fate == "output" for r in self.roles)

    @property
    def output_locals(self) -> list[int]:
        return [i for i, r in enumerate(self.roles) if r.fate == "output"]

    @property
    def output_qubits(self) -> list[int]:
        """Original indices of the final-output qubits, in local order."""
        return [r.qubit for r in self.roles if r.fate == "output"]

    @property
    def incident_cuts(self) -> list[tuple[int, str, int]]:
        """``(cut id, "measure" | "init", local qubit)`` sorted by cut id."""
        out = []
        for i, r in enumerate(self.roles):
            if r.fate == "measure":
                out.append((r.fate_cut, "measure", i))
            if r.origin == "init":
                out.append((r.origin_cut, "init", i))
        return sorted(out)


@dataclass(frozen=True)
class VariantSpec:
    subcircuit: int
    settings: tuple[tuple[int, str], ...]  # (cut id, basis or state) per incident cut

    @property
    def label(self) -> str:
        if not self.settings:
            return "plain"
        return ",".join(f"c{k}:{s}" for k, s in self.settings)


def extract_subcircuits(circuit: Circuit, sol: CutSolution) -> tuple[list[Subcircuit], list[CutPoint]]:
    dag = build_dag(circuit)
    if sol.n_subcircuits == 1:
        roles = tuple(QubitRole(q, 0, "input", None, "output", None) for q in range(circuit.n_qubits))
        sub = Subcircuit(0, circuit, roles, tuple(range(len(circuit.gates))))
        return [sub], []

    y = sol.assignment
    wire: list[list[int]] = [[] for _ in range(circuit.n_qubits)]
    for v, gi in enumerate(dag.vertices):
        for q in circuit.gates[gi].qubits:
            wire[q].append(v)
    missing = [q for q in range(circuit.n_qubits) if not wire[q]]
    if missing:
        raise ValueError(f"qubits {missing} meet no two-qubit gate; cannot cut a disconnected circuit")

    # cut ids follow the ascending order of the cut edge indices
    cut_id: dict[tuple[int, int], int] = {}  # (tail vertex, qubit) -> id
    for k, e_idx in enumerate(sorted(sol.cut_edges)):
        e = dag.edges[e_idx]
        cut_id[(e.tail, e.qubit)] = k

    # segment s of wire q starts at seg_first[s]; boundary[q][s] is the cut closing it
    owner: list[list[int]] = []
    boundary: list[list[int]] = []
    for q in range(circuit.n_qubits):
        seg_first = [wire[q][0]]
        bnd = []
        for i, v in enumerate(wire[q][:-1]):
            k = cut_id.get((v, q))
            if k is not None:
                bnd.append(k)
                seg_first.append(wire[q][i + 1])
        owner.append([y[v] for v in seg_first])
        boundary.append(bnd)

    local: dict[tuple[int, int], tuple[int, int]] = {}
    per_sub: list[list[tuple[int, int]]] = [[] for _ in range(sol.n_subcircuits)]
    for q in range(circuit.n_qubits):
        for s, c in enumerate(owner[q]):
            per_sub[c].append((q, s))
    for c, segs in enumerate(per_sub):
        segs.sort()
        for i, qs in enumerate(segs):
            local[qs] = (c, i)

    gates: list[list[Gate]] = [[] for _ in range(sol.n_subcircuits)]
    sources: list[list[int]] = [[] for _ in range(sol.n_subcircuits)]
    seg = [0] * circuit.n_qubits
    vertex_of = {gi: v for v, gi in enumerate(dag.vertices)}
    for gi, g in enumerate(circuit.gates):
        targets = [local[(q, seg[q])] for q in g.qubits]
        c = targets[0][0]
        if any(t[0] != c for t in targets):
            raise ValueError(f"gate {gi} straddles subcircuits {targets}; the solution is inconsistent")
        gates[c].append(g.on(*(t[1] for t in targets)))
        sources[c].append(gi)
        if g.is_two_qubit:
            v = vertex_of[gi]
            for q in g.qubits:
                if (v, q) in cut_id:
                    seg[q] += 1

    subs = []
    for c, segs in enumerate(per_sub):
        roles = []
        for q, s in segs:
            last = s == len(owner[q]) - 1
            roles.append(
                QubitRole(
                    q,
                    s,
                    "input" if s == 0 else "init",
                    None if s == 0 else boundary[q][s - 1],
                    "output" if last else "measure",
                    None if last else boundary[q][s],
                )
            )
        circ = Circuit(len(segs), tuple(gates[c]), f"{circuit.name}_sub{c}")
        subs.append(Subcircuit(c, circ, tuple(roles), tuple(sources[c])))

    points = []
    for (v, q), k in sorted(cut_id.items(), key=lambda item: item[1]):
        s = boundary[q].index(k)
        points.append(CutPoint(k, q, local[(q, s)], local[(q, s + 1)]))
    return subs, points


def reassemble(subs: list[Subcircuit], n_qubits: int) -> Circuit:
    """Merge subcircuit gates back onto the original wires, in source order."""
    placed = []
    for sub in subs:
        for g, src in zip(sub.circuit.gates, sub.source_gates):
            placed.append((src, g.on(*(sub.roles[q].qubit for q in g.qubits))))
    placed.sort(key=lambda item: item[0])
    return Circuit(n_qubits, tuple(g for _, g in placed))


def enumerate_variants(sub: Subcircuit) -> list[tuple[VariantSpec, Circuit]]:
    """All physical variants, first incident cut varying slowest."""
    cuts = sub.incident_cuts
    options = [MEASURE_BASES if kind == "measure" else INIT_STATES for _, kind, _ in cuts]
    out = []
    for choice in itertools.product(*options):
        cb = CircuitBuilder(sub.circuit.n_qubits, sub.circuit.name)
        for (k, kind, q), setting in zip(cuts, choice):
            if kind != "init":
                continue
            if setting == "1":
                cb.x(q)
            elif setting == "+":
                cb.h(q)
            elif setting == "+i":
                cb.h(q).s(q)
        cb.gates.extend(sub.circuit.gates)
        for (k, kind, q), setting in zip(cuts, choice):
            if kind != "measure":
                continue
            if setting == "X":
                cb.h(q)
            elif setting == "Y":
                cb.sdg(q).h(q)
        spec = VariantSpec(sub.index, tuple((k, s) for (k, _, _), s in zip(cuts, choice)))
        out.append((spec, cb.build()))
    return out


def variant_count(sub: Subcircuit) -> int:
    return 3**sub.O * 4**sub.rho


# ---------------------------------------------------------------------------
# bundle directory


def write_bundle(subs: list[Subcircuit], points: list[CutPoint], out_dir) -> Path:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    manifest = {"subcircuits": [], "cut_points": []}
    for sub in subs:
        variants = []
        for i, (spec, circ) in enumerate(enumerate_variants(sub)):
            name = f"sub{sub.index}_v{i}.qc"
            (out / name).write_text(serialize_circuit(circ))
            variants.append({"file": name, "settings": [list(s) for s in spec.settings]})
        manifest["subcircuits"].append(
            {
                "index": sub.index,
                "circuit": serialize_circuit(sub.circuit),
                "source_gates": list(sub.source_gates),
                "roles": [
                    {
                        "qubit": r.qubit,
                        "segment": r.segment,
                        "origin": r.origin,
                        "origin_cut": r.origin_cut,
                        "fate": r.fate,
                        "fate_cut": r.fate_cut,
                    }
                    for r in sub.roles
                ],
                "variants": variants,
            }
        )
    for p in points:
        manifest["cut_points"].append(
            {"cut_id": p.cut_id, "qubit": p.qubit, "upstream": list(p.upstream), "downstream": list(p.downstream)}
        )
    (out / "manifest.json").write_text(json.dumps(manifest, indent=2))
    return out


def read_bundle(path) -> tuple[list[Subcircuit], list[CutPoint]]:
    root = Path(path)
    manifest = json.loads((root / "manifest.json").read_text())
    subs = []
    for entry in manifest["subcircuits"]:
        roles = tuple(QubitRole(**r) for r in entry["roles"])
        circ = parse_circuit(entry["circuit"])
        subs.append(Subcircuit(entry["index"], circ, roles, tuple(entry["source_gates"])))
    points = [
        CutPoint(p["cut_id"], p["qubit"], tuple(p["upstream"]), tuple(p["downstream"]))
        for p in manifest["cut_points"]
    ]
    return subs, points
