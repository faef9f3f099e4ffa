"""Skeleton plans for full-size 53- and 54-qubit circuits.

These plans carry the phase structure, global sets and kernel/gate counts
of a reference schedule, but their gate lines are placeholders: every
cache is one coupling local to its phase, with gates repeated on it. They
are meant for ``summarize_plan`` and the cost model, not for execution.
"""

from __future__ import annotations

from dataclasses import dataclass

from ..circuit import CYCLE_PATTERN, QubitLayout, load_layout
from .listing import PlanStep, SimulationPlan

DEPTHS = (10, 14, 20, 24, 28, 32, 36)
# sub-phases in each successive disk loop
SUBPHASES = (3, 2, 2, 3, 2, 3, 3)


def _r(a, b):
    return tuple(range(a, b + 1))


@dataclass(frozen=True)
class ChipSchedule:
    n_qubits: int
    tensor1: tuple[int, ...]
    tensor2: tuple[int, ...]
    globals1: tuple[tuple[int, ...], tuple[int, ...]]  # before / after the prelude all2all
    globals2: tuple[tuple[int, ...], tuple[int, ...]]
    m: int
    n_deferred: int
    s1: tuple[int, ...]
    s2: tuple[int, ...]
    pool1: tuple[tuple[int, ...], ...]
    pool2: tuple[tuple[int, ...], ...]
    t1: tuple[int, int]  # kernels, gates
    t2: tuple[int, int]
    ref_loops: tuple[tuple[tuple[tuple[int, ...], int, int], ...], ...]  # (globals, kernels, gates)
    large: dict

    @property
    def disk(self) -> tuple[int, ...]:
        return tuple(sorted(self.s1 + self.s2))


SCHEDULES = {
    53: ChipSchedule(
        53, _r(0, 26), _r(27, 52), (_r(14, 26), _r(0, 12)), (_r(27, 39), _r(40, 52)), 43, 7,
        _r(0, 3) + _r(49, 52), _r(23, 30),
        (_r(4, 10) + _r(43, 48), _r(4, 16), _r(36, 48)), (_r(40, 52), _r(0, 12), _r(36, 48)),
        (28, 84), (25, 84),
        (
            ((_r(4, 10) + _r(43, 48), 16, 63), (_r(4, 16), 6, 23), (_r(36, 48), 8, 26)),
            ((_r(40, 52), 11, 49), (_r(0, 12), 10, 45)),
            ((_r(36, 48), 9, 35), (_r(4, 16), 7, 21)),
        ),
        dict(zip(DEPTHS, (12, 36, 67, 88, 109, 129, 153))),
    ),
    54: ChipSchedule(
        54, _r(0, 26), _r(27, 53), (_r(14, 26), _r(0, 12)), (_r(27, 39), _r(41, 53)), 45, 8,
        _r(0, 4) + _r(50, 53), _r(23, 31),
        (_r(5, 10) + _r(43, 49), _r(5, 17), _r(37, 49)), (_r(41, 53), _r(0, 12), _r(37, 49)),
        (28, 84), (26, 87),
        (
            ((_r(5, 10) + _r(43, 49), 15, 59), (_r(5, 17), 8, 31), (_r(37, 49), 8, 27)),
            ((_r(41, 53), 11, 49), (_r(0, 12), 10, 45)),
            ((_r(37, 49), 9, 37), (_r(5, 17), 7, 21)),
        ),
        dict(zip(DEPTHS, (12, 36, 68, 90, 112, 133, 157))),
    ),
}


def _spread(total: int, parts: int) -> list[int]:
    base, extra = divmod(total, parts)
    return [base + (i < extra) for i in range(parts)]


def _pairs(layout: QubitLayout, allowed) -> list[tuple[int, int]]:
    allowed = set(allowed)
    out = sorted((a, b) for a, b, _ in layout.couplings if a in allowed and b in allowed)
    if not out:
        raise ValueError("no coupling is local to the phase")
    return out


def _kernels(steps, pairs, kernels: int, gates: int):
    if gates < kernels:
        raise ValueError("every kernel needs at least one gate")
    for i, g in enumerate(_spread(gates, kernels)):
        a, b = pairs[i % len(pairs)]
        steps.append(PlanStep("new", "cache", [2, a, b]))
        steps += [PlanStep("gate", "2Q", [a, b]) for _ in range(g)]


def _two_qubit_gates(layout: QubitLayout, cycles: int) -> int:
    return sum(len(layout.pattern(CYCLE_PATTERN[k % len(CYCLE_PATTERN)])) for k in range(cycles))


def _loops(sch: ChipSchedule, layout: QubitLayout, cycles: int):
    if cycles == 20:
        return sch.ref_loops
    n_loops = DEPTHS.index(cycles) + 1
    counts = SUBPHASES[:n_loops]
    large = _spread(sch.large[cycles], sum(counts))
    deferred = sch.n_deferred
    loop_gates = _two_qubit_gates(layout, cycles) - sch.t1[1] - sch.t2[1] - deferred
    gates = _spread(loop_gates, sum(counts))
    loops, k = [], 0
    for j, c in enumerate(counts):
        pool = sch.pool1 if j % 2 == 0 else sch.pool2
        loops.append(tuple((pool[i], large[k + i], max(gates[k + i], large[k + i])) for i in range(c)))
        k += c
    return tuple(loops)


def skeleton_plan(n_qubits: int, cycles: int = 20) -> SimulationPlan:
    """Skeleton plan for the 53- or 54-qubit chip at one of ``DEPTHS``."""
    if n_qubits not in SCHEDULES:
        raise ValueError(f"no schedule for {n_qubits} qubits; choose 53 or 54")
    if cycles not in DEPTHS:
        raise ValueError(f"no schedule for {cycles} cycles; choose one of {DEPTHS}")
    sch = SCHEDULES[n_qubits]
    layout = load_layout(f"sycamore{n_qubits}")
    n = n_qubits
    steps = [PlanStep("define", None, [n]), PlanStep("define", None, list(sch.disk))]

    cross = [(a, b) if a in sch.tensor1 else (b, a)
             for a, b, _ in layout.couplings if (a in sch.tensor1) != (b in sch.tensor1)]
    cross = sorted(cross)[:sch.n_deferred]
    labels = [-(i + 1) for i in range(2 * sch.n_deferred)]

    for ordinal, (qubits, (g0, g1), (kernels, gates)) in enumerate(
        [(sch.tensor1, sch.globals1, sch.t1), (sch.tensor2, sch.globals2, sch.t2)]
    ):
        local0 = [q for q in qubits if q not in g0]
        steps.append(PlanStep("new", "tensor", [len(local0) + len(labels), len(g0), *local0, *labels, *g0],
                              comments=[f"# tensor {ordinal + 1}"]))
        k0, k1 = _spread(kernels, 2)
        gs0, gs1 = _spread(gates, 2)
        _kernels(steps, _pairs(layout, local0), k0, gs0)
        steps.append(PlanStep("all2all", "tensor", [sch.m, *g1]))
        tag = "EI" if ordinal == 0 else "E2Q"
        for i, (a, b) in enumerate(cross):
            steps.append(PlanStep("entgl", tag, [a, b, labels[2 * i], labels[2 * i + 1]]))
        _kernels(steps, _pairs(layout, set(qubits) - set(g1)), k1, gs1)
    steps.append(PlanStep("entgl", "tensor", labels))

    for j, subphases in enumerate(_loops(sch, layout, cycles)):
        fixed = sch.s1 if j % 2 == 0 else sch.s2
        steps.append(PlanStep("slice" if j == 0 else "read", None, list(fixed), comments=[f"# disk loop {j + 1}"]))
        for glob, kernels, gates in subphases:
            steps.append(PlanStep("all2all", None, list(glob)))
            _kernels(steps, _pairs(layout, set(range(n)) - set(fixed) - set(glob)), kernels, gates)
        steps.append(PlanStep("write", None, list(sch.disk)))
    return SimulationPlan(steps)
