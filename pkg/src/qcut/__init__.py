"""Wire cutting for quantum circuits: cut search, subcircuit evaluation and reconstruction."""

from .benchmarks import BenchmarkSpec, bv, five_qubit_example, generate_benchmark
from .circuit import Circuit, CircuitBuilder, CircuitError, Gate, build_dag, parse_circuit, serialize_circuit
from .cutter import enumerate_variants, extract_subcircuits, reassemble
from .reconstruct import attribute, clip_renormalize, reconstruct_fd
from .search import CutSolution, Infeasible, SearchConfig, find_cuts, validate_solution
from .simulator import probabilities, run_variant, simulate_density

__all__ = [
    "BenchmarkSpec",
    "Circuit",
    "CircuitBuilder",
    "CircuitError",
    "CutSolution",
    "Gate",
    "Infeasible",
    "SearchConfig",
    "attribute",
    "build_dag",
    "bv",
    "clip_renormalize",
    "enumerate_variants",
    "extract_subcircuits",
    "find_cuts",
    "five_qubit_example",
    "generate_benchmark",
    "parse_circuit",
    "probabilities",
    "reassemble",
    "reconstruct_fd",
    "run_variant",
    "serialize_circuit",
    "simulate_density",
    "validate_solution",
]
