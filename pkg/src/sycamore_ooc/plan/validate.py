"""Static checks of a plan, optionally against the circuit it should run."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

from ..circuit import Circuit, Gate
from .listing import SimulationPlan
from .structure import PlanLayout, layout_plan


@dataclass(frozen=True)
class Violation:
    step: int
    line: int
    kind: str
    message: str

    def __str__(self):
        return f"step {self.step} (line {self.line}) [{self.kind}]: {self.message}"


class TrackingError(ValueError):
    pass


class GateTracker:
    """Walks each qubit's gate sequence so plan gate lines map onto circuit gates."""

    def __init__(self, circuit: Circuit):
        self.gates: list[Gate] = list(circuit.gates())
        self.per_qubit: list[list[int]] = [[] for _ in range(circuit.n_qubits)]
        for gid, g in enumerate(self.gates):
            for q in g.operands:
                self.per_qubit[q].append(gid)
        self.pos = [0] * circuit.n_qubits

    def next_on(self, q: int) -> Optional[int]:
        seq = self.per_qubit[q]
        return seq[self.pos[q]] if self.pos[q] < len(seq) else None

    def _check_range(self, *qs):
        for q in qs:
            if not 0 <= q < len(self.per_qubit):
                raise TrackingError(f"qubit {q} out of range")

    def take_pair(self, a: int, b: int) -> int:
        self._check_range(a, b)
        ga, gb = self.next_on(a), self.next_on(b)
        if ga is None or ga != gb or set(self.gates[ga].operands) != {a, b}:
            raise TrackingError(f"next gates on qubits {a} and {b} are not one gate on ({a}, {b})")
        self.pos[a] += 1
        self.pos[b] += 1
        return ga

    def take_half(self, q: int, other: int) -> int:
        self._check_range(q, other)
        g = self.next_on(q)
        if g is None or set(self.gates[g].operands) != {q, other}:
            raise TrackingError(f"next gate on qubit {q} is not a gate on ({q}, {other})")
        self.pos[q] += 1
        return g

    def remaining(self) -> int:
        return sum(len(seq) - p for seq, p in zip(self.per_qubit, self.pos))


def validate_plan(plan: SimulationPlan, circuit: Optional[Circuit] = None) -> list[Violation]:
    lay = layout_plan(plan)
    found: list[Violation] = []

    def add(i, kind, msg):
        found.append(Violation(i, plan.steps[i].line, kind, msg))

    n = plan.n_qubits
    disk = plan.disk_qubits
    if circuit is not None:
        if circuit.n_qubits != n:
            add(0, "header", f"plan has {n} qubits, circuit has {circuit.n_qubits}")
            return found
        if not circuit.is_two_qubit_only():
            add(0, "header", "circuit still has single-qubit gates; merge them first")
            return found
    if len(set(disk)) != len(disk) or any(not 0 <= q < n for q in disk):
        add(1, "header", "disk index qubits must be distinct and in range")
    for i, kind, msg in lay.problems:
        add(i, kind, msg)

    tracker = GateTracker(circuit) if circuit is not None else None
    _check_prelude(plan, lay, tracker, add)
    _check_loops(plan, lay, tracker, add)
    if tracker is not None and not found and tracker.remaining():
        add(len(plan.steps) - 1, "coverage", f"{tracker.remaining()} gate slots of the circuit are never applied")
    return sorted(found, key=lambda v: v.step)


def _in_range(qs, n):
    return all(0 <= q < n for q in qs) and len(set(qs)) == len(qs)


def _check_prelude(plan, lay: PlanLayout, tracker, add):
    n = plan.n_qubits
    owner: dict[int, int] = {}
    introduced: dict[tuple[int, int], dict[str, tuple]] = {}
    for t in lay.tensors:
        if not _in_range(list(t.qubits), n) or len(set(t.labels)) != len(t.labels):
            add(t.step, "structure", "tensor indices must be distinct and in range")
        if any(q < 0 for q in t.globals):
            add(t.step, "entanglement", "entanglement labels must be local")
        for q in t.qubits:
            if q in owner:
                add(t.step, "structure", f"qubit {q} already belongs to tensor {owner[q] + 1}")
            owner[q] = t.ordinal
        local, glob = set(t.locals), set(t.globals)
        cache: Optional[set[int]] = None
        for i in t.steps:
            step = plan.steps[i]
            mode, tag, args = step.mode, step.gate_tag, step.args
            if mode == "new" and tag == "cache":
                cache = set(args[1:])
                bad = cache - local
                if bad:
                    add(i, "locality", f"cache qubits {sorted(bad)} are not local to tensor {t.ordinal + 1}")
            elif mode == "gate":
                if cache is None or not set(args) <= cache:
                    add(i, "structure", f"gate on {tuple(args)} outside an enclosing cache")
                bad = set(args) - local
                if bad:
                    add(i, "locality", f"gate on {tuple(args)} touches non-local qubits {sorted(bad)}")
                if tracker is not None:
                    try:
                        tracker.take_pair(*args)
                    except TrackingError as exc:
                        add(i, "order", str(exc))
            elif mode == "entgl":
                cache = None
                a, b, l1, l2 = args
                mine = a if tag == "EI" else b
                if mine not in local:
                    add(i, "locality", f"{tag} qubit {mine} is not local to tensor {t.ordinal + 1}")
                if l1 not in local or l2 not in local:
                    add(i, "entanglement", f"labels {l1}, {l2} are not declared local in tensor {t.ordinal + 1}")
                slot = introduced.setdefault((l1, l2), {})
                if tag in slot:
                    add(i, "entanglement", f"labels ({l1}, {l2}) introduced twice by {tag}")
                gid = None
                if tracker is not None:
                    try:
                        gid = tracker.take_half(mine, b if tag == "EI" else a)
                    except TrackingError as exc:
                        add(i, "order", str(exc))
                slot[tag] = (a, b, t.ordinal, gid, i)
            elif mode == "all2all":
                cache = None
                new = set(args[1:])
                if new == glob:
                    add(i, "locality", "all2all leaves the global set unchanged")
                if not new <= set(t.qubits) or len(new) != len(args) - 1:
                    add(i, "locality", f"all2all globals {sorted(new)} are not physical qubits of the tensor")
                whole = local | glob
                glob = new
                local = whole - new
            else:
                add(i, "structure", f"{mode} {tag} is not allowed inside a tensor")

    labels_needed = set()
    for (l1, l2), slot in introduced.items():
        labels_needed |= {l1, l2}
        if set(slot) != {"EI", "E2Q"}:
            i = next(iter(slot.values()))[4]
            add(i, "entanglement", f"labels ({l1}, {l2}) lack a matching {'E2Q' if 'EI' in slot else 'EI'}")
            continue
        ei, e2 = slot["EI"], slot["E2Q"]
        if ei[:2] != e2[:2] or ei[2] == e2[2] or (ei[3] is not None and ei[3] != e2[3]):
            add(e2[4], "entanglement", f"E2Q for labels ({l1}, {l2}) does not match its EI")
    flat = [x for p in introduced for x in p]
    if len(set(flat)) != len(flat):
        add(lay.tensors[0].step if lay.tensors else 1, "entanglement", "an entanglement label is reused across pairs")
    if lay.contraction is not None:
        listed = set(plan.steps[lay.contraction].args)
        if listed != labels_needed:
            add(lay.contraction, "entanglement",
                f"contraction labels {sorted(listed)} differ from introduced labels {sorted(labels_needed)}")
        if not lay.tensors:
            add(lay.contraction, "structure", "contraction without tensors")
    elif labels_needed or len(lay.tensors) > 1:
        i = lay.tensors[-1].step if lay.tensors else 1
        add(i, "entanglement", "prelude tensors are never contracted")


def _check_loops(plan, lay: PlanLayout, tracker, add):
    n = plan.n_qubits
    disk = set(plan.disk_qubits)
    written = False
    for loop in lay.loops:
        fixed = set(loop.fixed)
        if not _in_range(list(loop.fixed), n):
            add(loop.opener, "structure", "sliced qubits must be distinct and in range")
        if not fixed <= disk:
            add(loop.opener, "discipline", f"sliced qubits {sorted(fixed - disk)} are not disk index qubits")
        if loop.kind == "read" and not written:
            add(loop.opener, "discipline", "read of a slice set that was never written")
        if loop.kind == "slice" and loop.ordinal > 0:
            add(loop.opener, "discipline", "slice after the first disk loop would discard stored amplitudes")
        glob: set[int] = set()
        cache: Optional[set[int]] = None
        for i in loop.body:
            step = plan.steps[i]
            mode, args = step.mode, step.args
            if mode == "all2all":
                cache = None
                new = set(args)
                if not _in_range(args, n):
                    add(i, "structure", "all2all qubits must be distinct and in range")
                if new == glob:
                    add(i, "locality", "all2all leaves the global set unchanged")
                if new & fixed:
                    add(i, "locality", f"all2all globals {sorted(new & fixed)} are sliced by the disk loop")
                glob = new
            elif mode == "new":
                cache = set(args[1:])
                bad = cache & (fixed | glob)
                if bad or not _in_range(args[1:], n):
                    add(i, "locality", f"cache qubits {sorted(bad)} are not local")
            elif mode == "gate":
                if cache is None or not set(args) <= cache:
                    add(i, "structure", f"gate on {tuple(args)} outside an enclosing cache")
                bad = set(args) & (fixed | glob)
                if bad:
                    add(i, "locality", f"gate on {tuple(args)} touches non-local qubits {sorted(bad)}")
                if tracker is not None:
                    try:
                        tracker.take_pair(*args)
                    except TrackingError as exc:
                        add(i, "order", str(exc))
        if loop.write is not None:
            if set(plan.steps[loop.write].args) != disk or len(plan.steps[loop.write].args) != len(disk):
                add(loop.write, "discipline", "write must name exactly the disk index qubits")
            written = True
