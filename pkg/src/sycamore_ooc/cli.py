"""Command-line front end.

Exit codes: 0 success, 2 usage, 3 plan validation failure, 4 I/O or
malformed input, 5 verification mismatch, 6 state too large to verify.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from importlib import resources
from pathlib import Path
from typing import Optional, Sequence

from . import __version__
from .circuit import (
    Circuit,
    CircuitError,
    LayoutError,
    UnmergeableGateError,
    generate_sycamore,
    load_circuit,
    load_layout,
    merge_single_qubit_gates,
    save_circuit,
)
from .costmodel import CostModelError, depth_sweep, estimate, load_profile, read_depth_rows, sweep_csv
from .engine import PlanExecutionError, run_plan, store_for_plan
from .engine.slices import LocalityError
from .oracle import MAX_ORACLE_QUBITS, compare_states, dense_simulate
from .plan import ParseError, PlanSummary, emit_plan, summarize_plan, validate_plan
from .storage import SliceStore, StorageError, load_state

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_INVALID = 3
EXIT_IO = 4
EXIT_MISMATCH = 5
EXIT_UNVERIFIABLE = 6

STORAGE_ENV = "SYCAMORE_OOC_STORAGE"
TOLERANCE = {"double": 1e-10, "single": 1e-4}


class CliError(Exception):
    def __init__(self, message: str, code: int):
        super().__init__(message)
        self.code = code


def _shipped(kind: str, name: str, suffix: str) -> Optional[str]:
    ref = resources.files("sycamore_ooc") / "data" / kind / f"{name}{suffix}"
    return ref.read_text() if ref.is_file() else None


def _read(source: str, kind: str, suffix: str) -> str:
    """Contents of a file path, or of a shipped data file given by bare name."""
    path = Path(source)
    if path.exists():
        try:
            return path.read_text()
        except OSError as exc:
            raise CliError(f"cannot read {path}: {exc}", EXIT_IO) from exc
    text = _shipped(kind, source, suffix)
    if text is None:
        raise CliError(f"no such file or shipped {kind[:-1]}: {source}", EXIT_IO)
    return text


def _plan(source: str):
    from .plan import parse_plan

    try:
        return parse_plan(_read(source, "plans", ".plan"))
    except ParseError as exc:
        raise CliError(f"plan does not parse: {exc}", EXIT_INVALID) from exc


def _circuit(path: str, merge: bool = True) -> Circuit:
    try:
        circuit = load_circuit(path)
    except (OSError, CircuitError) as exc:
        raise CliError(str(exc), EXIT_IO) from exc
    if not merge or circuit.is_two_qubit_only():
        return circuit
    try:
        return merge_single_qubit_gates(circuit)
    except UnmergeableGateError as exc:
        raise CliError(f"cannot merge: {exc}", EXIT_INVALID) from exc


def _storage_root(args) -> Path:
    root = args.storage_root or os.environ.get(STORAGE_ENV)
    if not root:
        raise CliError(f"no storage root: pass --storage-root or set {STORAGE_ENV}", EXIT_USAGE)
    return Path(root)


def _emit(text: str, out: Optional[str]):
    if out:
        try:
            Path(out).write_text(text)
        except OSError as exc:
            raise CliError(f"cannot write {out}: {exc}", EXIT_IO) from exc
    else:
        sys.stdout.write(text)


def _report_violations(violations) -> None:
    for v in violations:
        print(v, file=sys.stderr)


def cmd_gen_circuit(args) -> int:
    if args.cycles < 1:
        raise CliError("--cycles must be at least 1", EXIT_USAGE)
    try:
        layout = load_layout(args.layout)
    except LayoutError as exc:
        raise CliError(str(exc), EXIT_IO) from exc
    circuit = generate_sycamore(layout, args.cycles, args.seed)
    if args.merged:
        try:
            circuit = merge_single_qubit_gates(circuit)
        except UnmergeableGateError as exc:
            raise CliError(f"cannot merge: {exc}", EXIT_INVALID) from exc
    try:
        save_circuit(circuit, args.out)
    except OSError as exc:
        raise CliError(f"cannot write {args.out}: {exc}", EXIT_IO) from exc
    print(f"{circuit.n_qubits} qubits, {circuit.depth} layers -> {args.out}")
    return EXIT_OK


def cmd_estimate(args) -> int:
    try:
        profile = load_profile(args.profile)
        if args.sweep:
            rows = read_depth_rows(_read(args.sweep, "sweeps", ".csv"))
            result = depth_sweep(rows, profile)
            if args.csv:
                text = sweep_csv(result)
            else:
                text = "".join(f"{n} qubits  {c:3d} cycles  {d:9.6f} days\n" for n, c, d in result)
            _emit(text, args.out)
            return EXIT_OK
        if args.summary:
            summary = PlanSummary.from_dict(json.loads(_read(args.summary, "summaries", ".json")))
        elif args.plan:
            plan = _plan(args.plan)
            violations = validate_plan(plan)
            if violations:
                _report_violations(violations)
                return EXIT_INVALID
            summary = summarize_plan(plan)
        else:
            raise CliError("estimate needs --plan, --summary or --sweep", EXIT_USAGE)
        report = estimate(summary, profile, summary.n_qubits, summary.slice_count)
    except (CostModelError, KeyError, TypeError, json.JSONDecodeError) as exc:
        raise CliError(f"malformed input: {exc}", EXIT_IO) from exc
    _emit(report.to_csv() if args.csv else report.to_text(), args.out)
    return EXIT_OK


def _simulate(circuit: Circuit, plan, root: Path, precision: str):
    violations = validate_plan(plan, circuit)
    if violations:
        _report_violations(violations)
        raise CliError(f"plan is invalid for this circuit ({len(violations)} violations)", EXIT_INVALID)
    try:
        store = store_for_plan(plan, root, precision)
        trace = run_plan(plan, circuit, store, check_norm=True)
        trace.save(root / "trace.json")
    except (PlanExecutionError, LocalityError) as exc:
        raise CliError(f"execution failed: {exc}", EXIT_INVALID) from exc
    except (StorageError, OSError) as exc:
        raise CliError(f"storage failure: {exc}", EXIT_IO) from exc
    return trace


def cmd_simulate(args) -> int:
    root = _storage_root(args)
    circuit = _circuit(args.circuit)
    trace = _simulate(circuit, _plan(args.plan), root, args.precision)
    print(f"kernels/slice {trace.kernels:g}  all2alls/slice {trace.all2alls:.6f}  "
          f"transfers/slice {trace.disk_transfers:g}  swaps {trace.swaps}  "
          f"write cycles {trace.write_cycles}  read cycles {trace.read_cycles}")
    print(f"trace -> {root / 'trace.json'}")
    return EXIT_OK


def cmd_verify(args) -> int:
    root = _storage_root(args)
    raw = _circuit(args.circuit, merge=False)
    if raw.n_qubits > MAX_ORACLE_QUBITS:
        print(f"unverifiable at this size: {raw.n_qubits} qubits exceeds the oracle cap of {MAX_ORACLE_QUBITS}")
        return EXIT_UNVERIFIABLE
    circuit = _circuit(args.circuit)
    if args.plan:
        _simulate(circuit, _plan(args.plan), root, args.precision)
    try:
        store = SliceStore.open(root)
        got = load_state(store)
    except (StorageError, OSError, KeyError) as exc:
        raise CliError(f"cannot load stored state: {exc}", EXIT_IO) from exc
    if got.size != 2**circuit.n_qubits:
        raise CliError(f"stored state has {got.size} amplitudes, circuit needs {2 ** circuit.n_qubits}", EXIT_MISMATCH)
    diff, fidelity = compare_states(dense_simulate(circuit), got)
    tol = args.tol if args.tol is not None else TOLERANCE[store.precision]
    ok = diff <= tol
    print(f"max_abs_diff {diff:.3e}  fidelity {fidelity:.12f}  tolerance {tol:.1e}  "
          f"({store.precision} store): {'match' if ok else 'MISMATCH'}")
    return EXIT_OK if ok else EXIT_MISMATCH


def cmd_build_plan(args) -> int:
    from .plan.builder import PlanBuildError, build_plan

    circuit = _circuit(args.circuit)
    first = None if args.first_half is None else [int(q) for q in args.first_half.split(",")]
    try:
        plan = build_plan(circuit, first_half=first, defer_layers=args.defer_layers)
    except PlanBuildError as exc:
        raise CliError(f"cannot build a plan: {exc}", EXIT_INVALID) from exc
    _emit(emit_plan(plan), args.out)
    return EXIT_OK


def cmd_skeleton_plan(args) -> int:
    from .plan.skeleton import skeleton_plan

    try:
        plan = skeleton_plan(args.qubits, args.cycles)
    except ValueError as exc:
        raise CliError(str(exc), EXIT_USAGE) from exc
    _emit(emit_plan(plan), args.out)
    return EXIT_OK


def cmd_validate(args) -> int:
    plan = _plan(args.plan)
    circuit = _circuit(args.circuit) if args.circuit else None
    violations = validate_plan(plan, circuit)
    _report_violations(violations)
    if violations:
        return EXIT_INVALID
    print("plan is valid")
    return EXIT_OK


def cmd_summarize(args) -> int:
    plan = _plan(args.plan)
    violations = validate_plan(plan)
    if violations:
        _report_violations(violations)
        return EXIT_INVALID
    _emit(json.dumps(summarize_plan(plan).to_dict(), indent=1) + "\n", args.out)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="sycamore-ooc", description="Out-of-core sliced circuit simulation and costing.")
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True)

    g = sub.add_parser("gen-circuit", help="generate a random ABCDCDAB circuit")
    g.add_argument("--layout", required=True, help="layout file or shipped name (sycamore53, grid4x4, ...)")
    g.add_argument("--cycles", type=int, required=True)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--merged", action="store_true", help="fold single-qubit gates into two-qubit gates")
    g.add_argument("--out", required=True)
    g.set_defaults(func=cmd_gen_circuit)

    e = sub.add_parser("estimate", help="run-time estimate for a plan, summary or depth sweep")
    src = e.add_mutually_exclusive_group()
    src.add_argument("--plan", help="plan file or shipped name (sycamore53_c20, ...)")
    src.add_argument("--summary", help="phase-summary JSON or shipped name")
    src.add_argument("--sweep", help="depth-row CSV or shipped name (sycamore53, sycamore54)")
    e.add_argument("--profile", default="summit")
    e.add_argument("--csv", action="store_true")
    e.add_argument("--out")
    e.set_defaults(func=cmd_estimate)

    for name, func, helptext in [
        ("simulate", cmd_simulate, "execute a plan out of core"),
        ("verify", cmd_verify, "compare stored amplitudes with the dense oracle"),
    ]:
        s = sub.add_parser(name, help=helptext)
        s.add_argument("--circuit", required=True)
        s.add_argument("--plan", required=(name == "simulate"))
        s.add_argument("--storage-root", help=f"defaults to ${STORAGE_ENV}")
        s.add_argument("--precision", choices=sorted(TOLERANCE), default="single")
        if name == "verify":
            s.add_argument("--tol", type=float, help="override the precision-based tolerance")
        s.set_defaults(func=func)

    b = sub.add_parser("build-plan", help="derive an executable plan for a small circuit")
    b.add_argument("--circuit", required=True)
    b.add_argument("--defer-layers", type=int, default=2)
    b.add_argument("--first-half", help="comma-separated qubits of the first prelude tensor")
    b.add_argument("--out")
    b.set_defaults(func=cmd_build_plan)

    pp = sub.add_parser("skeleton-plan", help="emit a skeleton 53/54-qubit plan")
    pp.add_argument("--qubits", type=int, choices=(53, 54), required=True)
    pp.add_argument("--cycles", type=int, default=20)
    pp.add_argument("--out")
    pp.set_defaults(func=cmd_skeleton_plan)

    v = sub.add_parser("validate", help="check a plan, optionally against a circuit")
    v.add_argument("--plan", required=True)
    v.add_argument("--circuit")
    v.set_defaults(func=cmd_validate)

    sm = sub.add_parser("summarize", help="per-phase counters of a plan as JSON")
    sm.add_argument("--plan", required=True)
    sm.add_argument("--out")
    sm.set_defaults(func=cmd_summarize)
    return p


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.code


if __name__ == "__main__":
    sys.exit(main())
