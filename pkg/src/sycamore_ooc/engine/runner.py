"""Plan execution against an on-disk slice store.

Per-phase counters are kept per disk slice: prelude work happens once,
loop work is divided by the number of loop iterations, and every write or
read step is one transfer. Contraction FLOPs are totals over all slices.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

from .._tensorops import axes_view, e2q_expand, ei_expand, flatten_axes, swap_operands
from ..circuit import Circuit
from ..plan.listing import SimulationPlan
from ..plan.structure import PlanLayout, layout_plan
from ..plan.validate import GateTracker, validate_plan
from ..storage import SliceStore, file_id, scheme_for
from .aggregate import kernel_unitary
from .slices import (
    Kernel,
    LocalityError,
    StateSlice,
    apply_deferred_contraction,
    apply_kernel,
    assemble,
    contraction_flops,
    family_norm_sq,
    global_local_swap,
    restrict,
    split,
    zero_family,
)

NORM_TOL = 1e-10


class PlanExecutionError(RuntimeError):
    def __init__(self, message: str, step: Optional[int] = None):
        self.step = step
        super().__init__(message if step is None else f"step {step}: {message}")


@dataclass
class PhaseCounters:
    name: str
    kind: str
    kernels: float = 0
    gates: float = 0
    disk_transfers: float = 0
    all2alls: float = 0.0
    contraction_flops: float = 0.0


@dataclass
class Trace:
    n_qubits: int
    slice_count: int
    phases: list[PhaseCounters] = field(default_factory=list)
    swaps: int = 0
    write_cycles: int = 0
    read_cycles: int = 0
    dry_run: bool = False

    @property
    def kernels(self) -> float:
        return sum(p.kernels for p in self.phases)

    @property
    def disk_transfers(self) -> float:
        return sum(p.disk_transfers for p in self.phases)

    @property
    def all2alls(self) -> float:
        return sum(p.all2alls for p in self.phases)

    def phase(self, name: str) -> PhaseCounters:
        return next(p for p in self.phases if p.name == name)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["totals"] = {"kernels": self.kernels, "disk_transfers": self.disk_transfers, "all2alls": self.all2alls}
        return d

    def save(self, path: str | Path) -> None:
        Path(path).write_text(json.dumps(self.to_dict(), indent=1) + "\n")


def store_for_plan(plan: SimulationPlan, root: str | Path, precision: str = "single") -> SliceStore:
    return SliceStore(scheme_for(plan.n_qubits, plan.disk_qubits, root), precision)


class _Runner:
    def __init__(self, plan: SimulationPlan, circuit: Optional[Circuit], store: Optional[SliceStore],
                 check_norm: bool, dry_run: bool):
        self.plan = plan
        self.lay: PlanLayout = layout_plan(plan)
        if self.lay.problems:
            i, kind, msg = self.lay.problems[0]
            raise PlanExecutionError(f"[{kind}] {msg}", i)
        if not dry_run:
            # reject disk misuse up front rather than corrupt the store
            for v in validate_plan(plan):
                if v.kind == "discipline":
                    raise PlanExecutionError(f"[discipline] {v.message}", v.step)
        self.n = plan.n_qubits
        self.circuit = circuit
        self.store = store
        self.check_norm = check_norm
        self.dry = dry_run
        self.trace = Trace(self.n, self.lay.slice_count, dry_run=dry_run)
        self.counters = {}
        for ph in self.lay.phases:
            c = PhaseCounters(ph.name, ph.kind)
            self.counters[id(ph)] = c
            self.trace.phases.append(c)
        self.kernels: dict[int, Kernel] = {}
        self.deferred: dict[int, np.ndarray] = {}
        if not dry_run:
            if circuit is None or store is None:
                raise ValueError("a circuit and a store are required unless dry_run is set")
            if circuit.n_qubits != self.n:
                raise PlanExecutionError(f"plan has {self.n} qubits, circuit has {circuit.n_qubits}")
            if not circuit.is_two_qubit_only():
                raise PlanExecutionError("circuit has single-qubit gates; merge them first")
            if tuple(store.scheme.index_qubits) != tuple(plan.disk_qubits):
                raise PlanExecutionError("store index qubits differ from the plan's disk qubits")
            self._compile()

    # -- compilation: map gate lines onto circuit gates once -----------------

    def _compile(self):
        tracker = GateTracker(self.circuit)
        steps = self.plan.steps
        cache_at: Optional[int] = None
        members: list = []

        def close():
            if cache_at is not None:
                qs = tuple(steps[cache_at].args[1:])
                self.kernels[cache_at] = Kernel(qs, kernel_unitary(qs, [g for _, g in members]), [gid for gid, _ in members])

        for i, step in enumerate(steps):
            if i < 2:
                continue
            try:
                if step.mode == "gate":
                    if cache_at is None or not set(step.args) <= set(steps[cache_at].args[1:]):
                        raise PlanExecutionError(f"gate on {tuple(step.args)} outside an enclosing cache", i)
                    gid = tracker.take_pair(*step.args)
                    members.append((gid, tracker.gates[gid]))
                    continue
                close()
                cache_at, members = (i, []) if step.mode == "new" and step.gate_tag == "cache" else (None, [])
                if step.mode == "entgl" and step.gate_tag in ("EI", "E2Q"):
                    a, b = step.args[:2]
                    mine, other = (a, b) if step.gate_tag == "EI" else (b, a)
                    gate = tracker.gates[tracker.take_half(mine, other)]
                    self.deferred[i] = gate.unitary if gate.operands == (a, b) else swap_operands(gate.unitary)
            except ValueError as exc:
                raise PlanExecutionError(str(exc), i) from exc
        close()
        if tracker.remaining():
            raise PlanExecutionError(f"plan leaves {tracker.remaining()} gate slots unapplied")

    # -- helpers -------------------------------------------------------------

    def _count(self, i: int, **inc):
        c = self.counters[id(self.lay.step_phase[i])]
        for k, v in inc.items():
            setattr(c, k, getattr(c, k) + v)

    def _norm_guard(self, before: float, family, i: int, what: str):
        if self.check_norm:
            after = family_norm_sq(family)
            if abs(after - before) > NORM_TOL * max(1.0, before):
                raise PlanExecutionError(f"{what} changed the norm from {before:.15g} to {after:.15g}", i)

    def _apply_cache(self, i: int, family):
        if self.dry:
            return family
        kernel = self.kernels[i]
        before = family_norm_sq(family) if self.check_norm else 0.0
        out = [apply_kernel(sl, kernel, i) for sl in family]
        self._norm_guard(before, out, i, "kernel")
        return out

    def _swap(self, i: int, family, new_global):
        self.trace.swaps += 1
        if self.dry:
            return family
        before = family_norm_sq(family) if self.check_norm else 0.0
        out = global_local_swap(family, new_global)
        self._norm_guard(before, out, i, "swap")
        return out

    def _gates_after(self, i: int) -> int:
        n = 0
        for step in self.plan.steps[i + 1:]:
            if step.mode != "gate":
                break
            n += 1
        return n

    # -- prelude -------------------------------------------------------------

    def _run_tensor(self, t):
        physical_local = [q for q in t.locals if q >= 0]
        family = None if self.dry else zero_family(physical_local + list(t.globals), t.globals)
        steps = self.plan.steps
        for i in t.steps:
            step = steps[i]
            if step.mode == "new":
                family = self._apply_cache(i, family)
                self._count(i, kernels=1, gates=self._gates_after(i))
            elif step.mode == "entgl":
                if not self.dry:
                    family = self._defer(i, family)
            elif step.mode == "all2all":
                self._count(i, all2alls=2.0 ** (step.args[0] - self.n))
                family = self._swap(i, family, step.args[1:])
        return family

    def _defer(self, i: int, family):
        step = self.plan.steps[i]
        a, b, l1, l2 = step.args
        q = a if step.gate_tag == "EI" else b
        out = []
        for sl in family:
            if q not in sl.local_order:
                raise LocalityError(f"{step.gate_tag} on non-local qubit {q}", i)
            t = axes_view(sl.amps, len(sl.local_order))
            axis = sl.local_order.index(q)
            new = ei_expand(t, axis) if step.gate_tag == "EI" else e2q_expand(t, axis, self.deferred[i])
            out.append(StateSlice(dict(sl.fixed), sl.local_order + (l1, l2), flatten_axes(new)))
        return out

    def _initial(self, tensors, assignment: dict[int, int]) -> tuple[StateSlice, int]:
        """Product of the prelude tensors for one assignment, entanglement summed out."""
        covered = {q for t in self.lay.tensors for q in t.qubits}
        rest = [q for q in range(self.n) if q not in covered]
        parts = [restrict(fam, {q: v for q, v in assignment.items() if q in t.qubits})
                 for t, fam in zip(self.lay.tensors, tensors)]
        if rest or not parts:
            zero = zero_family(rest)
            parts.append(restrict(zero, {q: v for q, v in assignment.items() if q in rest}))
        acc = [assemble(parts[0])]
        flops = 0
        for nxt in parts[1:]:
            nxt_labels = {q for sl in nxt for q in sl.local_order if q < 0}
            shared = tuple(sorted(q for q in acc[0].local_order if q < 0 and q in nxt_labels))
            combined, f = apply_deferred_contraction(acc, nxt, shared)
            if shared:
                flops += f
            acc = [combined]
        leftover = [q for q in acc[0].local_order if q < 0]
        if leftover:
            raise PlanExecutionError(f"entanglement labels {leftover} never eliminated")
        return acc[0], flops

    # -- disk loops ------------------------------------------------------------

    def _file_parts(self, sl: StateSlice, rest):
        scheme = self.store.scheme
        for part in split(sl, rest, scheme.local_qubits):
            yield file_id(scheme, {q: part.fixed[q] for q in scheme.index_qubits}), part.amps

    def _write(self, family, fixed):
        whole = assemble(family)
        rest = [q for q in self.plan.disk_qubits if q not in fixed]
        for fid, amps in self._file_parts(whole, rest):
            self.store.write_slice(fid, amps)

    def _read(self, assignment, rest) -> StateSlice:
        scheme = self.store.scheme
        parts = []
        for pos in range(2 ** len(rest)):
            full = dict(assignment)
            full.update({q: (pos >> j) & 1 for j, q in enumerate(rest)})
            fid = file_id(scheme, {q: full[q] for q in scheme.index_qubits})
            parts.append(StateSlice(full, scheme.local_qubits, self.store.read_slice(fid)))
        return assemble(parts)

    def _run_loop(self, loop, tensors):
        steps = self.plan.steps
        fixed = loop.fixed
        rest = [q for q in self.plan.disk_qubits if q not in fixed]
        iterations = 1 if self.dry else 2 ** len(fixed)
        counts: dict[int, dict] = {}
        contraction_total = 0

        def bump(i, **inc):
            slot = counts.setdefault(i, {})
            for k, v in inc.items():
                slot[k] = slot.get(k, 0) + v

        for pos in range(iterations):
            assignment = {q: (pos >> j) & 1 for j, q in enumerate(fixed)}
            family = None
            if loop.kind == "read":
                bump(loop.opener, disk_transfers=1, all2alls=1)
                if not self.dry:
                    family = [self._read(assignment, rest)]
            elif not self.dry:
                sl, flops = self._initial(tensors, assignment)
                contraction_total += flops
                family = [sl]
            for j, i in enumerate(loop.body):
                step = steps[i]
                if step.mode == "all2all":
                    if j > 0:
                        bump(i, all2alls=1)
                    family = self._swap(i, family, step.args)
                elif step.mode == "new":
                    family = self._apply_cache(i, family)
                    bump(i, kernels=1, gates=self._gates_after(i))
            if loop.write is not None:
                bump(loop.write, disk_transfers=1, all2alls=1)
            if not self.dry:
                self._write(family, assignment)
        for i, inc in counts.items():
            self._count(i, **{k: v / iterations for k, v in inc.items()})
        if self.lay.contraction is not None and loop.ordinal == 0:
            labels = len(self.plan.steps[self.lay.contraction].args)
            total = contraction_flops(self.n, labels) if self.dry else contraction_total
            self._count(self.lay.contraction, contraction_flops=float(total))

    def run(self) -> Trace:
        tensors = [self._run_tensor(t) for t in self.lay.tensors]
        if self.lay.loops:
            for loop in self.lay.loops:
                self._run_loop(loop, tensors)
        elif not self.dry:
            sl, flops = self._initial(tensors, {})
            if self.lay.contraction is not None:
                self._count(self.lay.contraction, contraction_flops=float(flops))
            self._write([sl], {})
        elif self.lay.contraction is not None:
            labels = len(self.plan.steps[self.lay.contraction].args)
            self._count(self.lay.contraction, contraction_flops=float(contraction_flops(self.n, labels)))
        if self.store is not None:
            self.trace.write_cycles = self.store.write_cycles
            self.trace.read_cycles = self.store.read_cycles
        return self.trace


def run_plan(plan: SimulationPlan, circuit: Circuit, store: SliceStore, check_norm: bool = False) -> Trace:
    """Execute ``plan`` on the merged ``circuit``, leaving the final state in ``store``."""
    return _Runner(plan, circuit, store, check_norm, dry_run=False).run()


def trace_plan(plan: SimulationPlan) -> Trace:
    """Walk a plan without amplitudes, one iteration per disk loop."""
    return _Runner(plan, None, None, False, dry_run=True).run()
