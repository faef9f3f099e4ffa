"""Sectioning of a plan into prelude tensors, contraction, and disk loops.

Phases are the rows the cost model consumes. Prelude tensors are named by
ordinal ("1", "2"); disk loop ``j`` contributes sub-phases ``"{s}.{s+k}"``
with ``s = n_tensors + 1 + j``, a new one starting at every counted
all2all. An all2all opening a loop body only sets the initial distribution
and is not counted, since it rides on the contraction or on the disk read
that opens the loop.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

from .listing import SimulationPlan

PRELUDE_RATE = "30q"
LOOP_RATE = "45q"


@dataclass
class TensorSection:
    ordinal: int
    step: int
    locals: tuple[int, ...]
    globals: tuple[int, ...]
    steps: list[int] = field(default_factory=list)

    @property
    def qubits(self) -> tuple[int, ...]:
        return tuple(q for q in self.locals + self.globals if q >= 0)

    @property
    def labels(self) -> tuple[int, ...]:
        return tuple(q for q in self.locals + self.globals if q < 0)


@dataclass
class LoopSection:
    ordinal: int
    opener: int
    kind: str  # "slice" or "read"
    fixed: tuple[int, ...]
    body: list[int] = field(default_factory=list)
    write: Optional[int] = None


@dataclass
class Phase:
    name: str
    kind: str  # "tensor", "contraction", "loop", "disk read", "disk write"
    steps: list[int] = field(default_factory=list)
    rate_class: Optional[str] = None
    all2alls: float = 0.0
    transfers: int = 0
    rank: Optional[int] = None
    tensor_size: Optional[int] = None
    labels: tuple[int, ...] = ()
    loop: Optional[int] = None


@dataclass
class PlanLayout:
    n_qubits: int
    disk_qubits: tuple[int, ...]
    tensors: list[TensorSection] = field(default_factory=list)
    contraction: Optional[int] = None
    loops: list[LoopSection] = field(default_factory=list)
    phases: list[Phase] = field(default_factory=list)
    problems: list[tuple[int, str, str]] = field(default_factory=list)
    step_phase: dict[int, Phase] = field(default_factory=dict)

    @property
    def slice_count(self) -> int:
        return 2 ** len(self.loops[0].fixed) if self.loops else 1


def layout_plan(plan: SimulationPlan) -> PlanLayout:
    n = plan.n_qubits
    lay = PlanLayout(n, plan.disk_qubits)
    tensor: Optional[TensorSection] = None
    loop: Optional[LoopSection] = None
    closed = False  # a loop was closed; only openers may follow

    def problem(i, kind, msg):
        lay.problems.append((i, kind, msg))

    for i, step in enumerate(plan.steps):
        if i < 2:
            continue
        mode, tag = step.mode, step.gate_tag
        if mode in ("slice", "read"):
            if loop is not None and loop.write is None:
                problem(i, "structure", "previous disk loop ends without a write")
            loop = LoopSection(len(lay.loops), i, mode, tuple(step.args))
            lay.loops.append(loop)
            tensor, closed = None, False
            continue
        if mode == "define":
            problem(i, "structure", "define outside the header")
            continue
        if loop is not None:
            if closed or loop.write is not None:
                problem(i, "structure", f"{mode} step after a write, outside any disk loop")
                continue
            if mode == "write":
                loop.write = i
                closed = True
            elif mode == "gate" or (mode == "all2all" and tag is None) or (mode == "new" and tag == "cache"):
                loop.body.append(i)
            else:
                problem(i, "structure", f"{mode} {tag} is not allowed inside a disk loop")
            continue
        # prelude
        if mode == "new" and tag == "tensor":
            if lay.contraction is not None:
                problem(i, "structure", "new tensor after the contraction step")
            nl, _ng = step.args[0], step.args[1]
            tensor = TensorSection(len(lay.tensors), i, tuple(step.args[2:2 + nl]), tuple(step.args[2 + nl:]))
            lay.tensors.append(tensor)
        elif mode == "entgl" and tag == "tensor":
            if lay.contraction is not None:
                problem(i, "structure", "second contraction step")
            lay.contraction = i
            tensor = None
        elif mode == "write":
            problem(i, "discipline", "write outside a disk loop")
        elif tensor is None:
            problem(i, "structure", f"{mode} step outside any tensor or disk loop")
        else:
            tensor.steps.append(i)

    _assign_phases(plan, lay)
    return lay


def _assign_phases(plan: SimulationPlan, lay: PlanLayout) -> None:
    n = lay.n_qubits
    for t in lay.tensors:
        ph = Phase(
            str(t.ordinal + 1), "tensor", [t.step] + t.steps, PRELUDE_RATE,
            rank=len(t.locals), tensor_size=len(t.locals) + len(t.globals),
        )
        for i in t.steps:
            step = plan.steps[i]
            if step.mode == "all2all" and step.gate_tag == "tensor":
                ph.all2alls += 2.0 ** (step.args[0] - n)
        lay.phases.append(ph)
    if lay.contraction is not None:
        labels = tuple(plan.steps[lay.contraction].args)
        lay.phases.append(Phase("contraction", "contraction", [lay.contraction], labels=labels))

    base = len(lay.tensors) + 1
    for loop in lay.loops:
        s = base + loop.ordinal
        if loop.kind == "read":
            lay.phases.append(Phase("disk read", "disk read", [loop.opener], all2alls=1.0, transfers=1, loop=loop.ordinal))
        k = 0
        globals_: tuple[int, ...] = ()
        current = _loop_phase(s, k, n, loop, globals_)
        if loop.kind == "slice":
            current.steps.append(loop.opener)
        lay.phases.append(current)
        for i in loop.body:
            step = plan.steps[i]
            if step.mode == "all2all":
                globals_ = tuple(step.args)
                if i == loop.body[0]:
                    current.steps.append(i)
                    current.rank = n - len(loop.fixed) - len(globals_)
                    continue
                k += 1
                current = _loop_phase(s, k, n, loop, globals_)
                current.all2alls = 1.0
                lay.phases.append(current)
            current.steps.append(i)
        if loop.write is not None:
            lay.phases.append(Phase("disk write", "disk write", [loop.write], all2alls=1.0, transfers=1, loop=loop.ordinal))
    for ph in lay.phases:
        for i in ph.steps:
            lay.step_phase[i] = ph


def _loop_phase(s: int, k: int, n: int, loop: LoopSection, globals_) -> Phase:
    return Phase(
        f"{s}.{s + k}", "loop", [], LOOP_RATE,
        rank=n - len(loop.fixed) - len(globals_), tensor_size=n - len(loop.fixed), loop=loop.ordinal,
    )
