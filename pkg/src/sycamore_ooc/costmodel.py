"""Runtime model for sliced out-of-core simulation on a large machine.

Gate phases cost kernels x per-kernel time x disk slices, contractions cost
FLOPs / aggregate rate, every all2all moves the whole in-memory state
through the injection links, and every disk transfer moves the whole
on-disk state through the file system.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import asdict, dataclass, field
from importlib import resources
from pathlib import Path
from typing import Iterable, Optional, Sequence

SECONDS_PER_DAY = 86400.0


class CostModelError(ValueError):
    pass


@dataclass(frozen=True)
class MachineProfile:
    name: str
    sockets: int
    t_gate_45q: float
    t_gate_30q: float
    contraction_rate: float
    injection_rate: float
    disk_rate: float
    disk_bytes_per_amp: int = 8
    mem_bytes_per_amp: int = 16
    hpl: float = 1.0

    def __post_init__(self):
        for k, v in asdict(self).items():
            if k != "name" and not (isinstance(v, (int, float)) and v > 0 and math.isfinite(v)):
                raise CostModelError(f"profile field {k} must be positive, got {v!r}")

    def gate_time(self, rate_class: str) -> float:
        try:
            return {"45q": self.t_gate_45q, "30q": self.t_gate_30q}[rate_class]
        except KeyError:
            raise CostModelError(f"unknown rate class {rate_class!r}") from None

    def to_dict(self) -> dict:
        return asdict(self)


def load_profile(source: str | Path = "summit") -> MachineProfile:
    """Load a profile from a JSON file or a shipped profile name."""
    path = Path(source)
    if path.suffix != ".json" and not path.exists():
        ref = resources.files("sycamore_ooc") / "data" / "profiles" / f"{source}.json"
        if not ref.is_file():
            raise CostModelError(f"no such profile: {source}")
        text = ref.read_text()
    else:
        try:
            text = path.read_text()
        except OSError as exc:
            raise CostModelError(f"cannot read profile {path}: {exc}") from exc
    try:
        return MachineProfile(**json.loads(text))
    except (TypeError, json.JSONDecodeError) as exc:
        raise CostModelError(f"malformed profile: {exc}") from exc


def scale_gate_time(t_source: float, hpl_source: float, hpl_target: float) -> float:
    if min(t_source, hpl_source, hpl_target) <= 0:
        raise CostModelError("gate time and HPL figures must be positive")
    return t_source * (hpl_source / hpl_target)


def contraction_flops(n_qubits: int, e_bits: int) -> int:
    """Real FLOPs to sum ``2**e`` products into ``2**n`` amplitudes."""
    if n_qubits < 0 or e_bits < 0:
        raise CostModelError("qubit and entanglement counts must be nonnegative")
    return 8 * 2**n_qubits * 2**e_bits


def all2all_time(n_qubits: int, count: float, profile: MachineProfile) -> float:
    if count < 0:
        raise CostModelError("all2all count must be nonnegative")
    per_socket = profile.mem_bytes_per_amp * 2.0**n_qubits / profile.sockets
    return count * per_socket / profile.injection_rate


def disk_time(n_qubits: int, transfers: float, profile: MachineProfile) -> float:
    if transfers < 0:
        raise CostModelError("transfer count must be nonnegative")
    return transfers * profile.disk_bytes_per_amp * 2.0**n_qubits / profile.disk_rate


def disk_footprint(n_qubits: int, profile: MachineProfile) -> int:
    if n_qubits < 1:
        raise CostModelError("need at least one qubit")
    return 2**n_qubits * profile.disk_bytes_per_amp


@dataclass
class CostRow:
    name: str
    kind: str
    disk_transfers: float = 0
    all2alls: float = 0.0
    kernels: int = 0
    rank: Optional[int] = None
    gates: int = 0
    contraction_flops: float = 0.0
    seconds: float = 0.0
    percent: float = 0.0
    pflops: Optional[float] = None

    @property
    def days(self) -> float:
        return self.seconds / SECONDS_PER_DAY


@dataclass
class CostReport:
    n_qubits: int
    slice_count: int
    rows: list[CostRow] = field(default_factory=list)
    compute_seconds: float = 0.0
    all2all_seconds: float = 0.0
    disk_seconds: float = 0.0
    compute_pflops: Optional[float] = None

    @property
    def total_seconds(self) -> float:
        return self.compute_seconds + self.all2all_seconds + self.disk_seconds

    @property
    def compute_days(self) -> float:
        return self.compute_seconds / SECONDS_PER_DAY

    @property
    def all2all_days(self) -> float:
        return self.all2all_seconds / SECONDS_PER_DAY

    @property
    def disk_days(self) -> float:
        return self.disk_seconds / SECONDS_PER_DAY

    @property
    def total_days(self) -> float:
        return self.total_seconds / SECONDS_PER_DAY

    @property
    def kernels(self) -> int:
        return sum(r.kernels for r in self.rows)

    @property
    def disk_transfers(self) -> float:
        return sum(r.disk_transfers for r in self.rows)

    @property
    def all2alls(self) -> float:
        return sum(r.all2alls for r in self.rows)

    @property
    def gates(self) -> int:
        return sum(r.gates for r in self.rows)

    def _pct(self, seconds: float) -> float:
        return 100.0 * seconds / self.total_seconds if self.total_seconds else 0.0

    def subtotals(self) -> list[tuple[str, float, float]]:
        """(label, days, percent) for compute, all2alls, disk I/O and total."""
        return [
            ("Compute", self.compute_days, self._pct(self.compute_seconds)),
            ("All-to-alls", self.all2all_days, self._pct(self.all2all_seconds)),
            ("Disk I/O", self.disk_days, self._pct(self.disk_seconds)),
            ("Total", self.total_days, 100.0 if self.total_seconds else 0.0),
        ]

    def table(self) -> list[list[str]]:
        def num(x, fmt):
            return "" if x in (None, 0, 0.0) else format(x, fmt)

        head = ["Tensor", "Disk xfers", "All-to-alls", "Kernels", "Rank", "Gates",
                "Contraction FLOPs", "Compute (days)", "% of total", "PFLOPS"]
        out = [head]
        for r in self.rows:
            timed = r.kind in ("tensor", "loop", "contraction")
            out.append([
                r.name, num(r.disk_transfers, "g"), num(r.all2alls, ".6g"), num(r.kernels, "d"),
                "" if r.rank is None else str(r.rank), num(r.gates, "d"), num(r.contraction_flops, ".4g"),
                f"{r.days:.6f}" if timed else "", f"{r.percent:.2f}%" if timed else "",
                "" if r.pflops is None else f"{r.pflops:.4f}",
            ])
        flops = sum(r.contraction_flops for r in self.rows)
        (cl, cd, cp), (al, ad, ap), (dl, dd, dp), (tl, td, tp) = self.subtotals()
        pf = "" if self.compute_pflops is None else f"{self.compute_pflops:.4f}"
        out.append([cl, "", "", str(self.kernels), "", "", num(flops, ".4g"), f"{cd:.6f}", f"{cp:.2f}%", pf])
        out.append([al, "", f"{self.all2alls:.6f}", "", "", "", "", f"{ad:.6f}", f"{ap:.2f}%", ""])
        out.append([dl, f"{self.disk_transfers:g}", "", "", "", "", "", f"{dd:.6f}", f"{dp:.2f}%", ""])
        out.append([tl, f"{self.disk_transfers:g}", f"{self.all2alls:.6f}", str(self.kernels), "",
                    str(self.gates), "", f"{td:.6f}", f"{tp:.2f}%", pf])
        return out

    def to_text(self) -> str:
        rows = self.table()
        widths = [max(len(r[i]) for r in rows) for i in range(len(rows[0]))]
        lines = ["  ".join(c.rjust(w) if i else c.ljust(w) for i, (c, w) in enumerate(zip(r, widths))) for r in rows]
        lines.insert(1, "-" * len(lines[0]))
        lines.insert(len(lines) - 4, "-" * len(lines[0]))
        return "\n".join(line.rstrip() for line in lines) + "\n"

    def to_csv(self) -> str:
        buf = io.StringIO()
        csv.writer(buf, lineterminator="\n").writerows(self.table())
        return buf.getvalue()


def estimate(phases: Iterable, profile: MachineProfile, n_qubits: int, slice_count: int) -> CostReport:
    """Cost a sequence of phase summaries (see :class:`sycamore_ooc.plan.PhaseSummary`)."""
    report = CostReport(n_qubits, slice_count)
    flops_total = 0.0
    have_flops = False
    for ph in phases:
        row = CostRow(ph.name, ph.kind, ph.disk_transfers, ph.all2alls, ph.kernels, ph.rank, ph.gates)
        if ph.kind == "contraction":
            row.contraction_flops = float(contraction_flops(n_qubits, ph.entanglement_bits))
            row.seconds = row.contraction_flops / profile.contraction_rate
            flops = row.contraction_flops
        elif ph.kernels or ph.rate_class is not None:
            rate_class = ph.rate_class
            if rate_class is None:
                raise CostModelError(f"phase {ph.name} has kernels but no rate class")
            row.seconds = ph.kernels * profile.gate_time(rate_class) * slice_count
            flops = ph.gate_flops or 0.0
        else:
            flops = 0.0
        if flops and row.seconds:
            row.pflops = flops / row.seconds / 1e15
            have_flops = True
        flops_total += flops
        report.compute_seconds += row.seconds
        report.all2all_seconds += all2all_time(n_qubits, ph.all2alls, profile)
        report.disk_seconds += disk_time(n_qubits, ph.disk_transfers, profile)
        report.rows.append(row)
    for row in report.rows:
        row.percent = report._pct(row.seconds)
    if have_flops and report.compute_seconds:
        report.compute_pflops = flops_total / report.compute_seconds / 1e15
    return report


@dataclass
class DepthRow:
    n_qubits: int
    cycles: int
    disk_transfers: float
    all2alls: float
    kernels: int
    kernels_30q: int
    entanglement_bits: int
    slice_count: int

    def seconds(self, profile: MachineProfile) -> float:
        gates = (self.kernels_30q * profile.t_gate_30q + (self.kernels - self.kernels_30q) * profile.t_gate_45q)
        return (
            gates * self.slice_count
            + contraction_flops(self.n_qubits, self.entanglement_bits) / profile.contraction_rate
            + all2all_time(self.n_qubits, self.all2alls, profile)
            + disk_time(self.n_qubits, self.disk_transfers, profile)
        )


DEPTH_COLUMNS = ["n_qubits", "cycles", "disk_transfers", "all2alls", "kernels",
                 "kernels_30q", "entanglement_bits", "slice_count"]


def read_depth_rows(text: str) -> list[DepthRow]:
    rows = []
    reader = csv.DictReader(io.StringIO(text))
    missing = set(DEPTH_COLUMNS) - set(reader.fieldnames or [])
    if missing:
        raise CostModelError(f"sweep file lacks columns {sorted(missing)}")
    for rec in reader:
        try:
            rows.append(DepthRow(
                int(rec["n_qubits"]), int(rec["cycles"]), float(rec["disk_transfers"]), float(rec["all2alls"]),
                int(rec["kernels"]), int(rec["kernels_30q"]), int(rec["entanglement_bits"]), int(rec["slice_count"]),
            ))
        except ValueError as exc:
            raise CostModelError(f"bad sweep row {rec}: {exc}") from exc
    return rows


def depth_sweep(rows: Sequence[DepthRow], profile: MachineProfile) -> list[tuple[int, int, float]]:
    """(n_qubits, cycles, days) for each depth row."""
    return [(r.n_qubits, r.cycles, r.seconds(profile) / SECONDS_PER_DAY) for r in rows]


def sweep_csv(results: Sequence[tuple[int, int, float]]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["n_qubits", "cycles", "days"])
    for n, c, d in results:
        w.writerow([n, c, f"{d:.6f}"])
    return buf.getvalue()


def depth_row(summary, cycles: int) -> DepthRow:
    """Collapse a plan summary into one depth-sweep row."""
    small = sum(p.kernels for p in summary.phases if p.rate_class == "30q")
    e = sum(p.entanglement_bits for p in summary.phases if p.kind == "contraction")
    return DepthRow(summary.n_qubits, cycles, summary.disk_transfers, summary.all2alls,
                    summary.kernels, small, e, summary.slice_count)


def write_depth_rows(rows: Sequence[DepthRow]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(DEPTH_COLUMNS)
    for r in rows:
        w.writerow([r.n_qubits, r.cycles, f"{r.disk_transfers:g}", repr(float(r.all2alls)), r.kernels,
                    r.kernels_30q, r.entanglement_bits, r.slice_count])
    return buf.getvalue()
