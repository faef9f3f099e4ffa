"""Build executable plans for desk-scale circuits.

The circuit is split into two qubit halves. Gates in the first
``defer_layers`` layers form two prelude tensors; gates crossing the halves
there are deferred. The remaining gates run in disk loops that alternately
slice ``s_a`` and ``s_b``, each loop stepping through the inner global sets.

No gate can stall forever when ``s_a`` and ``s_b`` are disjoint and not
coupled to each other, and the inner sets are disjoint from both, from each
other, and not coupled to each other: every gate is then local in some
(loop, inner set) combination.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

from ..circuit import Circuit, Gate
from ..engine.aggregate import K_MAX, aggregate
from .listing import PlanStep, SimulationPlan


class PlanBuildError(ValueError):
    pass


@dataclass(frozen=True)
class Partition:
    s_a: tuple[int, ...]
    s_b: tuple[int, ...]
    inner: tuple[tuple[int, ...], ...]

    @property
    def disk(self) -> tuple[int, ...]:
        return self.s_a + self.s_b


def coupling_graph(circuit: Circuit) -> dict[int, set[int]]:
    adj: dict[int, set[int]] = {q: set() for q in range(circuit.n_qubits)}
    for g in circuit.gates():
        if len(g.operands) == 2:
            a, b = g.operands
            adj[a].add(b)
            adj[b].add(a)
    return adj


def check_partition(circuit: Circuit, part: Partition) -> None:
    adj = coupling_graph(circuit)
    n = circuit.n_qubits

    def touches(x, y):
        return any(adj[q] & set(y) for q in x)

    sets = [part.s_a, part.s_b, *part.inner]
    flat = [q for s in sets for q in s]
    if len(set(flat)) != len(flat) or any(not 0 <= q < n for q in flat):
        raise PlanBuildError("partition sets must be disjoint and in range")
    if touches(part.s_a, part.s_b):
        raise PlanBuildError("the two sliced sets must not share a coupling")
    if len(part.inner) < 2:
        raise PlanBuildError("at least two inner global sets are needed")
    for i, x in enumerate(part.inner):
        for y in part.inner[i + 1:]:
            if touches(x, y):
                raise PlanBuildError("inner global sets must not share a coupling")


def choose_partition(circuit: Circuit, n_slice: int = 2, n_inner: int = 2) -> Partition:
    """Low-index qubits for ``s_a``, high-index for ``s_b``, inner sets in between."""
    adj = coupling_graph(circuit)
    n = circuit.n_qubits
    s_a = tuple(range(n_slice))
    near_a = set().union(*(adj[q] for q in s_a)) if s_a else set()
    s_b = tuple(sorted([q for q in range(n - 1, -1, -1) if q not in s_a and q not in near_a][:n_slice]))
    if len(s_b) < n_slice:
        raise PlanBuildError("cannot find two uncoupled sliced sets")
    free = [q for q in range(n) if q not in s_a + s_b]
    g1 = tuple(free[:n_inner])
    near_g1 = set().union(*(adj[q] for q in g1)) if g1 else set()
    g2 = tuple([q for q in free if q not in g1 and q not in near_g1][:n_inner])
    if len(g1) < n_inner or len(g2) < n_inner:
        raise PlanBuildError("cannot find two uncoupled inner global sets")
    part = Partition(s_a, s_b, (g1, g2))
    check_partition(circuit, part)
    return part


def _emit_kernels(steps: list[PlanStep], gates: Sequence[Gate], k_max: int):
    for kernel in aggregate(gates, k_max):
        steps.append(PlanStep("new", "cache", [kernel.k, *kernel.qubits]))
        for m in kernel.members:
            steps.append(PlanStep("gate", "2Q", list(gates[m].operands)))


def _tensor_steps(ordinal, qubits, items, labels, k_max):
    steps = [PlanStep("new", "tensor", [len(qubits) + len(labels), 0, *qubits, *labels],
                      comments=[f"# tensor {ordinal}"])]
    segment: list[Gate] = []
    for item in items:
        if isinstance(item, Gate):
            segment.append(item)
            continue
        _emit_kernels(steps, segment, k_max)
        segment = []
        steps.append(item)
    _emit_kernels(steps, segment, k_max)
    return steps


def build_plan(
    circuit: Circuit,
    partition: Optional[Partition] = None,
    first_half: Optional[Sequence[int]] = None,
    defer_layers: int = 2,
    k_max: int = K_MAX,
    min_disk_phases: int = 2,
) -> SimulationPlan:
    """Plan for a merged (two-qubit only) circuit."""
    if not circuit.is_two_qubit_only():
        raise PlanBuildError("merge single-qubit gates before planning")
    n = circuit.n_qubits
    part = partition or choose_partition(circuit)
    check_partition(circuit, part)
    q1 = set(range(n // 2) if first_half is None else first_half)
    q2 = set(range(n)) - q1
    if not q1 or not q2:
        raise PlanBuildError("both tensor halves must be nonempty")

    steps = [PlanStep("define", None, [n]), PlanStep("define", None, list(part.disk))]
    prelude = [g for layer in circuit.layers[:defer_layers] for g in layer]
    rest = [g for layer in circuit.layers[defer_layers:] for g in layer]

    if prelude:
        items1, items2, labels1, labels2 = [], [], [], []
        for g in prelude:
            a, b = g.operands
            if {a, b} <= q1:
                items1.append(g)
            elif {a, b} <= q2:
                items2.append(g)
            else:
                ea, eb = (a, b) if a in q1 else (b, a)
                l1, l2 = -(len(labels1) + 1), -(len(labels1) + 2)
                labels1 += [l1, l2]
                labels2 += [l1, l2]
                items1.append(PlanStep("entgl", "EI", [ea, eb, l1, l2]))
                items2.append(PlanStep("entgl", "E2Q", [ea, eb, l1, l2]))
        steps += _tensor_steps(1, sorted(q1), items1, labels1, k_max)
        steps += _tensor_steps(2, sorted(q2), items2, labels2, k_max)
        steps.append(PlanStep("entgl", "tensor", labels1))

    loops = 0
    stalled = 0
    while rest or loops < min_disk_phases:
        fixed = part.s_a if loops % 2 == 0 else part.s_b
        opener = "slice" if loops == 0 else "read"
        steps.append(PlanStep(opener, None, list(fixed), comments=[f"# disk loop {loops + 1}"]))
        before = len(rest)
        for inner in part.inner:
            steps.append(PlanStep("all2all", None, list(inner)))
            blocked: set[int] = set()
            run, left = [], []
            for g in rest:
                qs = set(g.operands)
                if qs & blocked or qs & set(fixed) or qs & set(inner):
                    blocked |= qs
                    left.append(g)
                else:
                    run.append(g)
            _emit_kernels(steps, run, k_max)
            rest = left
        steps.append(PlanStep("write", None, list(part.disk)))
        loops += 1
        stalled = stalled + 1 if len(rest) == before and rest else 0
        if stalled >= 2:
            raise PlanBuildError("no progress in two consecutive disk loops")
    return SimulationPlan(steps)
