"""State slices and the operations that move amplitudes between them.

Slice labels are qubit indices (>= 0) or entanglement labels (< 0). A slice
family is a list of slices sharing one local order whose fixed labels either
vary over every assignment (the family's globals) or hold one value
throughout (carried along untouched).
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence

import numpy as np

from .._tensorops import apply_matrix, axes_view, flatten_axes


class LocalityError(RuntimeError):
    """An operation touched a label that is not local to the slice."""

    def __init__(self, message: str, step: Optional[int] = None):
        self.step = step
        super().__init__(message if step is None else f"step {step}: {message}")


class FamilyError(ValueError):
    pass


@dataclass
class StateSlice:
    fixed: dict[int, int]
    local_order: tuple[int, ...]
    amps: np.ndarray

    def __post_init__(self):
        self.local_order = tuple(self.local_order)
        if self.amps.shape != (2 ** len(self.local_order),):
            raise FamilyError(f"{self.amps.size} amplitudes do not fit {len(self.local_order)} local labels")
        if set(self.fixed) & set(self.local_order):
            raise FamilyError("a label is both fixed and local")

    def norm_sq(self) -> float:
        return float(np.vdot(self.amps, self.amps).real)


@dataclass
class Kernel:
    qubits: tuple[int, ...]
    unitary: np.ndarray
    members: list[int] = field(default_factory=list)

    @property
    def k(self) -> int:
        return len(self.qubits)


def apply_kernel(sl: StateSlice, kernel: Kernel, step: Optional[int] = None) -> StateSlice:
    """Multiply the kernel into every sub-vector over its qubits."""
    missing = [q for q in kernel.qubits if q not in sl.local_order]
    if missing:
        raise LocalityError(f"kernel on {kernel.qubits} touches non-local qubits {missing}", step)
    t = axes_view(sl.amps, len(sl.local_order))
    axes = [sl.local_order.index(q) for q in kernel.qubits]
    out = apply_matrix(t, kernel.unitary, axes)
    return StateSlice(dict(sl.fixed), sl.local_order, flatten_axes(out))


def family_globals(slices: Sequence[StateSlice]) -> tuple[tuple[int, ...], dict[int, int]]:
    """Split fixed labels into varying globals and constants; check completeness."""
    if not slices:
        raise FamilyError("empty slice family")
    keys = set(slices[0].fixed)
    order = slices[0].local_order
    for sl in slices:
        if set(sl.fixed) != keys:
            raise FamilyError("slices fix different label sets")
        if sl.local_order != order:
            raise FamilyError("slices disagree on local order")
    varying = tuple(sorted(q for q in keys if len({sl.fixed[q] for sl in slices}) > 1))
    const = {q: slices[0].fixed[q] for q in keys if q not in varying}
    seen = {tuple(sl.fixed[q] for q in varying) for sl in slices}
    if len(seen) != len(slices) or len(slices) != 2 ** len(varying):
        raise FamilyError(f"incomplete slice family: {len(slices)} slices over {len(varying)} varying labels")
    return varying, const


def assemble(slices: Sequence[StateSlice]) -> StateSlice:
    """Merge a complete family into one slice; varying globals become local."""
    varying, const = family_globals(slices)
    order = slices[0].local_order + varying
    width = 2 ** len(slices[0].local_order)
    amps = np.empty(width * len(slices), dtype=np.result_type(*[s.amps for s in slices]))
    for sl in slices:
        pos = sum(sl.fixed[q] << j for j, q in enumerate(varying))
        amps[pos * width:(pos + 1) * width] = sl.amps
    return StateSlice(const, order, amps)


def split(sl: StateSlice, new_global: Iterable[int], local_order: Optional[Sequence[int]] = None) -> list[StateSlice]:
    """Fix ``new_global`` labels, yielding one slice per assignment."""
    new_global = tuple(new_global)
    missing = [q for q in new_global if q not in sl.local_order]
    if missing:
        raise LocalityError(f"cannot fix labels {missing}: not local")
    keep = tuple(q for q in sl.local_order if q not in new_global) if local_order is None else tuple(local_order)
    if sorted(keep + new_global) != sorted(sl.local_order):
        raise FamilyError("new local order does not match the remaining labels")
    order = keep + new_global
    t = axes_view(sl.amps, len(sl.local_order)).transpose([sl.local_order.index(q) for q in order])
    flat = flatten_axes(t)
    width = 2 ** len(keep)
    out = []
    for pos in range(2 ** len(new_global)):
        fixed = dict(sl.fixed)
        fixed.update({q: (pos >> j) & 1 for j, q in enumerate(new_global)})
        out.append(StateSlice(fixed, keep, flat[pos * width:(pos + 1) * width].copy()))
    return out


def global_local_swap(slices: Sequence[StateSlice], new_global: Iterable[int]) -> list[StateSlice]:
    """Re-bucket a complete family so that ``new_global`` are its varying globals."""
    new_global = tuple(sorted(new_global))
    varying, _ = family_globals(slices)
    if new_global == varying:
        return [StateSlice(dict(s.fixed), s.local_order, s.amps.copy()) for s in slices]
    whole = assemble(slices)
    return split(whole, new_global)


def family_norm_sq(slices: Sequence[StateSlice]) -> float:
    return sum(s.norm_sq() for s in slices)


def restrict(slices: Sequence[StateSlice], assignment: dict[int, int]) -> list[StateSlice]:
    """Keep the part of a family consistent with ``assignment``.

    Labels in ``assignment`` that are local get fixed by slicing; those that
    are globals select matching slices.
    """
    out = []
    for sl in slices:
        if any(q in sl.fixed and sl.fixed[q] != v for q, v in assignment.items()):
            continue
        local = [q for q in assignment if q in sl.local_order]
        if not local:
            out.append(sl)
            continue
        for part in split(sl, local):
            if all(part.fixed[q] == assignment[q] for q in local):
                out.append(part)
    return out


def contraction_flops(n_out: int, e: int) -> int:
    return 8 * 2**n_out * 2**e


def apply_deferred_contraction(
    first: Sequence[StateSlice],
    second: Sequence[StateSlice],
    labels: Sequence[int],
) -> tuple[StateSlice, int]:
    """Sum the product of two factor families over shared entanglement labels.

    Returns one slice over the remaining labels of both factors plus the
    real FLOP count ``8 * 2**n_out * 2**e``.
    """
    a = assemble(first)
    b = assemble(second)
    labels = tuple(labels)
    for lab in labels:
        if lab not in a.local_order or lab not in b.local_order:
            raise FamilyError(f"entanglement label {lab} missing from a factor")
    stray = [q for q in set(a.local_order) & set(b.local_order) if q not in labels]
    if stray:
        raise FamilyError(f"mismatched entanglement pairing: labels {sorted(set(stray))}")
    clash = {q for q in set(a.fixed) & set(b.fixed) if a.fixed[q] != b.fixed[q]}
    if clash:
        raise FamilyError(f"factors fix labels {sorted(clash)} to different values")
    rest_a = tuple(q for q in a.local_order if q not in labels)
    rest_b = tuple(q for q in b.local_order if q not in labels)
    ta = axes_view(a.amps, len(a.local_order)).transpose([a.local_order.index(q) for q in rest_a + labels])
    tb = axes_view(b.amps, len(b.local_order)).transpose([b.local_order.index(q) for q in labels + rest_b])
    e = len(labels)
    prod = ta.reshape(2 ** len(rest_a), 2**e) @ tb.reshape(2**e, 2 ** len(rest_b))
    order = rest_a + rest_b
    amps = flatten_axes(prod.reshape((2,) * len(order)))
    fixed = {**a.fixed, **b.fixed}
    return StateSlice(fixed, order, amps), contraction_flops(len(order), e)


def zero_family(labels: Sequence[int], global_labels: Sequence[int] = ()) -> list[StateSlice]:
    """|0...0> over ``labels`` (first is LSB), sliced on ``global_labels``."""
    local = tuple(q for q in labels if q not in set(global_labels))
    out = []
    for bits in itertools.product((0, 1), repeat=len(global_labels)):
        amps = np.zeros(2 ** len(local), dtype=complex)
        if not any(bits):
            amps[0] = 1.0
        out.append(StateSlice(dict(zip(global_labels, bits)), local, amps))
    return out
