"""Per-phase counters of a plan, in the units the cost model consumes."""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Optional

from .listing import SimulationPlan
from .structure import layout_plan

# a 4x4 complex matrix on 4 amplitudes: 16 multiplies (6 flops) + 12 adds (2 flops)
GATE_FLOPS_PER_AMP = (16 * 6 + 12 * 2) / 4


@dataclass
class PhaseSummary:
    name: str
    kind: str
    rate_class: Optional[str] = None
    kernels: int = 0
    gates: int = 0
    disk_transfers: int = 0
    all2alls: float = 0.0
    rank: Optional[int] = None
    entanglement_bits: int = 0
    gate_flops: float = 0.0


@dataclass
class PlanSummary:
    n_qubits: int
    slice_count: int
    phases: list[PhaseSummary] = field(default_factory=list)

    def __iter__(self):
        return iter(self.phases)

    def __len__(self):
        return len(self.phases)

    @property
    def kernels(self) -> int:
        return sum(p.kernels for p in self.phases)

    @property
    def gates(self) -> int:
        return sum(p.gates for p in self.phases)

    @property
    def disk_transfers(self) -> int:
        return sum(p.disk_transfers for p in self.phases)

    @property
    def all2alls(self) -> float:
        return sum(p.all2alls for p in self.phases)

    def to_dict(self) -> dict:
        return {"n_qubits": self.n_qubits, "slice_count": self.slice_count, "phases": [asdict(p) for p in self.phases]}

    @classmethod
    def from_dict(cls, data: dict) -> "PlanSummary":
        return cls(int(data["n_qubits"]), int(data["slice_count"]), [PhaseSummary(**p) for p in data["phases"]])


def save_summary(summary: PlanSummary, path: str | Path) -> None:
    Path(path).write_text(json.dumps(summary.to_dict(), indent=1) + "\n")


def load_summary(path: str | Path) -> PlanSummary:
    return PlanSummary.from_dict(json.loads(Path(path).read_text()))


def summarize_plan(plan: SimulationPlan) -> PlanSummary:
    lay = layout_plan(plan)
    n = lay.n_qubits
    out = PlanSummary(n, lay.slice_count)
    for ph in lay.phases:
        s = PhaseSummary(ph.name, ph.kind, ph.rate_class, all2alls=ph.all2alls,
                         disk_transfers=ph.transfers, rank=ph.rank, entanglement_bits=len(ph.labels))
        for i in ph.steps:
            step = plan.steps[i]
            if step.mode == "new" and step.gate_tag == "cache":
                s.kernels += 1
            elif step.mode == "gate":
                s.gates += 1
        if ph.kind == "contraction":
            s.gate_flops = 8.0 * 2.0**n * 2.0**s.entanglement_bits
        elif ph.tensor_size is not None:
            reps = out.slice_count if ph.kind == "loop" else 1
            s.gate_flops = GATE_FLOPS_PER_AMP * s.gates * 2.0**ph.tensor_size * reps
        out.phases.append(s)
    return out
