"""``qcut`` command line: cut, run, dd, verify and bench."""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from .benchmarks import BenchmarkSpec, generate_benchmark
from .circuit import CircuitError, build_dag, parse_circuit
from .dynamic import DDConfig
from .harness import (
    DEFAULT_SEEDS,
    EXIT_CAPACITY,
    EXIT_INFEASIBLE,
    EXIT_INPUT,
    EXIT_OK,
    EXIT_VERIFY,
    VerificationError,
    compare_report,
    run_pipeline,
    write_outputs,
)
from .search import Infeasible, SearchConfig, SearchTimeout, find_cuts
from .simulator import CapacityError

BENCH_NAMES = {
    "bv": "BV",
    "aqft": "AQFT",
    "adder": "Adder",
    "hwea": "HWEA",
    "supremacy": "SupremacyGrid",
    "supremacygrid": "SupremacyGrid",
}


def _dims(text: str) -> tuple[int, int]:
    try:
        r, c = text.lower().split("x")
        return int(r), int(c)
    except ValueError:
        raise argparse.ArgumentTypeError(f"dims must look like 3x4, not {text!r}") from None


def _zoom_path(text: str) -> list[int]:
    return [int(x) for x in text.replace(",", " ").split()]


def _add_source(p: argparse.ArgumentParser):
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--bench", choices=sorted(BENCH_NAMES), help="benchmark family")
    src.add_argument("--circuit", type=Path, help="circuit file (.qc text or JSON)")
    p.add_argument("--n", type=int, help="qubit count for --bench")
    p.add_argument("--dims", type=_dims, help="grid size RxC for --bench supremacy")
    p.add_argument("--depth", type=int, default=10, help="supremacy cycles")
    p.add_argument("--hidden", help="BV hidden string")
    p.add_argument("--seed", type=int, default=0, help="root seed for benchmarks and shots")


def _add_search(p: argparse.ArgumentParser):
    p.add_argument("--device", type=int, required=True, help="device size D in qubits")
    p.add_argument("--max-subcircuits", type=int, default=5)
    p.add_argument("--max-cuts", type=int, default=10)
    p.add_argument("--time-limit", type=float, default=None, help="cut search time limit (s)")


def _add_run(p: argparse.ArgumentParser, dd_default: bool = False):
    p.add_argument("--mode", choices=("exact", "shots"), default="exact")
    p.add_argument("--shots", type=int, default=None)
    p.add_argument("--noise", type=float, default=0.0, help="depolarizing error per gate")
    p.add_argument("--threads", type=int, default=1)
    p.add_argument("--out", type=Path, default=None, help="directory for result files")
    p.add_argument("--format", choices=("json", "bin"), default="json")
    p.add_argument("--verify", action="store_true", help="fail with exit code 5 on oracle mismatch")
    p.add_argument("--count-flops", action="store_true", help="print the multiplication count next to L")
    p.add_argument("--clip-renormalize", action="store_true", help="clip negatives and renormalize")
    p.add_argument("--no-greedy", action="store_true", help="build in subcircuit index order")
    p.add_argument("--no-early-termination", action="store_true")
    if not dd_default:
        p.add_argument("--dd", action="store_true", help="dynamic-definition query instead of full")
    p.add_argument("--strategy", choices=("dfs", "bfs"), default="dfs")
    p.add_argument("--max-active", type=int, default=10)
    p.add_argument("--recursions", type=int, default=1)
    p.add_argument("--zoom-path", type=_zoom_path, default=None, help="explicit bin indices, e.g. 1,0,3")


def load_circuit(args):
    if args.circuit is not None:
        return parse_circuit(args.circuit.read_text())
    family = BENCH_NAMES[args.bench]
    if family == "SupremacyGrid":
        if args.dims is None:
            raise CircuitError("--bench supremacy needs --dims RxC")
        spec = BenchmarkSpec(family, dims=args.dims, depth=args.depth, seed=args.seed)
    else:
        if args.n is None:
            raise CircuitError(f"--bench {args.bench} needs --n")
        spec = BenchmarkSpec(family, args.n, hidden=args.hidden, seed=args.seed)
    return generate_benchmark(spec)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="qcut", description="Cut, run and reconstruct quantum circuits.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("cut", help="search for cuts and print the solution JSON")
    _add_source(p)
    _add_search(p)
    p.add_argument("--out", type=Path, default=None)

    p = sub.add_parser("run", help="full pipeline")
    _add_source(p)
    _add_search(p)
    _add_run(p)

    p = sub.add_parser("dd", help="pipeline with the dynamic-definition query")
    _add_source(p)
    _add_search(p)
    _add_run(p, dd_default=True)

    p = sub.add_parser("verify", help="run and print the pass/fail verdict")
    _add_source(p)
    _add_search(p)
    _add_run(p)
    p.add_argument("--seeds", type=int, default=DEFAULT_SEEDS, help="seeds averaged in shots mode")

    p = sub.add_parser("bench", help="run the acceptance suite")
    p.add_argument("--only", type=int, nargs="*", help="criterion numbers to run")
    p.add_argument("--out", type=Path, default=None, help="write the results as JSON")
    return parser


def _pipeline(args, dd: bool, verify: bool, seed=None):
    circuit = load_circuit(args)
    cfg = None
    if dd:
        cfg = DDConfig(args.max_active, args.recursions, args.strategy, zoom_path=args.zoom_path)
    return run_pipeline(
        circuit,
        args.device,
        max_subcircuits=args.max_subcircuits,
        max_cuts=args.max_cuts,
        mode=args.mode,
        shots=args.shots,
        seed=args.seed if seed is None else seed,
        noise=args.noise,
        threads=args.threads,
        dd=cfg,
        verify=verify,
        clip=args.clip_renormalize,
        greedy=not args.no_greedy,
        early_termination=not args.no_early_termination,
        time_limit=args.time_limit,
        benchmark=args.bench or str(args.circuit),
    )


def _cmd_cut(args) -> int:
    circuit = load_circuit(args)
    cfg = SearchConfig(args.device, args.max_subcircuits, args.max_cuts, args.time_limit)
    sol = find_cuts(build_dag(circuit), cfg)
    text = sol.to_json()
    if args.out:
        args.out.mkdir(parents=True, exist_ok=True)
        (args.out / "solution.json").write_text(text)
    print(text)
    return EXIT_OK


def _cmd_run(args, dd: bool) -> int:
    try:
        result = _pipeline(args, dd, args.verify)
    except VerificationError as exc:
        if exc.report is not None:
            print(exc.report.to_json())
        print(f"verification failed: {exc}", file=sys.stderr)
        return EXIT_VERIFY
    report = result.report
    if args.out:
        write_outputs(result, args.out, args.format)
    print(report.to_json())
    if report.no_cut_needed:
        print("no cut needed: the circuit fits the device", file=sys.stderr)
    if args.count_flops and report.multiplications is not None:
        print(
            f"multiplications: {report.multiplications} "
            f"(with scaling pass: {report.multiplications_with_scaling}); L estimate: {report.L}",
            file=sys.stderr,
        )
    return EXIT_OK


def _cmd_verify(args) -> int:
    if args.mode == "shots":
        seeds = [args.seed + i for i in range(args.seeds)]
        results = [_pipeline(args, args.dd, False, seed=s) for s in seeds]
        report = results[0].report.to_dict()
        chis = [r.report.chi2 for r in results if r.report.chi2 is not None]
        report["chi2"] = float(np.mean(chis)) if chis else None
        report["seeds"] = seeds
        verdict = compare_report(report)
    else:
        verdict = compare_report(_pipeline(args, args.dd, False).report)
    print(json.dumps(verdict, indent=2))
    return EXIT_VERIFY if verdict["verdict"] == "fail" else EXIT_OK


def _cmd_bench(args) -> int:
    from .acceptance import CRITERIA, run_criteria

    numbers = args.only or sorted(CRITERIA)
    results = run_criteria(numbers, echo=True)
    if args.out:
        args.out.write_text(json.dumps([r.to_dict() for r in results], indent=2))
    return EXIT_OK if all(r.passed for r in results) else EXIT_VERIFY


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "cut":
            return _cmd_cut(args)
        if args.command == "run":
            return _cmd_run(args, args.dd)
        if args.command == "dd":
            return _cmd_run(args, True)
        if args.command == "verify":
            return _cmd_verify(args)
        return _cmd_bench(args)
    except (Infeasible, SearchTimeout) as exc:
        print(f"infeasible: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except CapacityError as exc:
        print(f"capacity: {exc}", file=sys.stderr)
        return EXIT_CAPACITY
    except (CircuitError, ValueError, OSError) as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
