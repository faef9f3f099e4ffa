"""Regenerate shipped plans, phase summaries, depth sweeps and the Summit profile."""

import json
from pathlib import Path

from sycamore_ooc.costmodel import depth_row, scale_gate_time, write_depth_rows
from sycamore_ooc.plan import save_plan, save_summary, summarize_plan
from sycamore_ooc.plan.skeleton import DEPTHS, skeleton_plan

DATA = Path(__file__).resolve().parents[1] / "src" / "sycamore_ooc" / "data"

SUMMIT = {
    "name": "summit",
    "sockets": 8192,
    # per-gate time measured on a 14014.70 TF machine, scaled by HPL
    "t_gate_45q": round(scale_gate_time(2.38380, 14014.70, 148600.0), 5),
    "t_gate_30q": 0.025097,
    "contraction_rate": 116.73e15,
    "injection_rate": 3.5 * 2**30,
    "disk_rate": 2.0 * 2**40,
    "disk_bytes_per_amp": 8,
    "mem_bytes_per_amp": 16,
    "hpl": 148600.0,
}


def main():
    for sub in ("plans", "summaries", "sweeps", "profiles"):
        (DATA / sub).mkdir(parents=True, exist_ok=True)
    (DATA / "profiles" / "summit.json").write_text(json.dumps(SUMMIT, indent=1) + "\n")
    for n in (53, 54):
        rows = []
        for cycles in DEPTHS:
            plan = skeleton_plan(n, cycles)
            name = f"sycamore{n}_c{cycles}"
            save_plan(plan, DATA / "plans" / f"{name}.plan")
            summary = summarize_plan(plan)
            save_summary(summary, DATA / "summaries" / f"{name}.json")
            rows.append(depth_row(summary, cycles))
        (DATA / "sweeps" / f"sycamore{n}.csv").write_text(write_depth_rows(rows))


if __name__ == "__main__":
    main()
