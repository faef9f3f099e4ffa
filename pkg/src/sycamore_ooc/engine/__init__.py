"""Sliced state evolution: kernels, slice families, plan execution."""

from .aggregate import AggregationError, aggregate, kernel_unitary
from .runner import PlanExecutionError, Trace, run_plan, store_for_plan, trace_plan
from .slices import (
    FamilyError,
    Kernel,
    LocalityError,
    StateSlice,
    apply_deferred_contraction,
    apply_kernel,
    assemble,
    global_local_swap,
    split,
)

__all__ = [
    "AggregationError", "aggregate", "kernel_unitary",
    "PlanExecutionError", "Trace", "run_plan", "store_for_plan", "trace_plan",
    "FamilyError", "Kernel", "LocalityError", "StateSlice", "apply_deferred_contraction",
    "apply_kernel", "assemble", "global_local_swap", "split",
]
