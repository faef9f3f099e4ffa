"""Greedy fusion of consecutive gates into kernels of at most ``k_max`` qubits."""

from __future__ import annotations

from typing import Sequence

import numpy as np

from .._tensorops import apply_matrix
from ..circuit import Gate
from .slices import Kernel

K_MAX = 5


class AggregationError(ValueError):
    pass


def kernel_unitary(qubits: Sequence[int], gates: Sequence[Gate]) -> np.ndarray:
    """Ordered product of ``gates`` embedded on ``qubits`` (``qubits[0]`` is the MSB)."""
    k = len(qubits)
    pos = {q: j for j, q in enumerate(qubits)}
    m = np.eye(2**k, dtype=complex).reshape((2,) * k + (2**k,))
    for g in gates:
        m = apply_matrix(m, g.unitary, [pos[q] for q in g.operands])
    return np.ascontiguousarray(m).reshape(2**k, 2**k)


def aggregate(gates: Sequence[Gate], k_max: int = K_MAX) -> list[Kernel]:
    """Group gates in order; a gate may jump ahead only past gates on other qubits.

    Each pass fills one kernel. A gate that does not fit is left behind and
    blocks its qubits, so later gates sharing a qubit with it stay behind too.
    """
    if k_max < 2:
        raise AggregationError("k_max must be at least 2")
    for i, g in enumerate(gates):
        if len(g.operands) > k_max:
            raise AggregationError(f"gate {i} acts on {len(g.operands)} qubits > k_max={k_max}")
    remaining = list(enumerate(gates))
    kernels = []
    while remaining:
        support: list[int] = []
        members: list[tuple[int, Gate]] = []
        blocked: set[int] = set()
        left = []
        for i, g in remaining:
            qs = set(g.operands)
            if qs & blocked:
                left.append((i, g))
                blocked |= qs
                continue
            new = [q for q in g.operands if q not in support]
            if len(support) + len(new) <= k_max:
                support.extend(new)
                members.append((i, g))
            else:
                left.append((i, g))
                blocked |= qs
        kernels.append(Kernel(tuple(support), kernel_unitary(support, [g for _, g in members]), [i for i, _ in members]))
        remaining = left
    return kernels
