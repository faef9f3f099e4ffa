"""Simulation plans: listing format, validation, per-phase summaries."""

from .listing import ParseError, PlanStep, SimulationPlan, emit_plan, load_plan, parse_plan, save_plan
from .summary import PhaseSummary, PlanSummary, load_summary, save_summary, summarize_plan
from .validate import GateTracker, Violation, validate_plan

__all__ = [
    "ParseError", "PlanStep", "SimulationPlan", "emit_plan", "load_plan", "parse_plan", "save_plan",
    "PhaseSummary", "PlanSummary", "load_summary", "save_summary", "summarize_plan",
    "GateTracker", "Violation", "validate_plan",
]
