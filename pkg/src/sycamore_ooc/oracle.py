"""Dense full-state reference simulator."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ._tensorops import apply_matrix, axes_view, flatten_axes
from .circuit import Circuit

MAX_ORACLE_QUBITS = 26


class QubitBudgetError(ValueError):
    pass


@dataclass
class DenseState:
    n_qubits: int
    amps: np.ndarray

    def norm(self) -> float:
        return float(np.linalg.norm(self.amps))


def basis_state(n_qubits: int, index: int = 0) -> DenseState:
    amps = np.zeros(2**n_qubits, dtype=complex)
    amps[index] = 1.0
    return DenseState(n_qubits, amps)


def dense_simulate(circuit: Circuit, max_qubits: int = MAX_ORACLE_QUBITS) -> DenseState:
    """Evolve |0...0> gate by gate; qubit 0 is the least significant bit."""
    n = circuit.n_qubits
    if n > max_qubits:
        raise QubitBudgetError(f"{n} qubits exceeds the oracle cap of {max_qubits}")
    state = basis_state(n)
    t = axes_view(state.amps, n)
    for gate in circuit.gates():
        t = apply_matrix(t, gate.unitary, gate.operands)
    return DenseState(n, flatten_axes(t))


def compare_states(a: DenseState | np.ndarray, b: DenseState | np.ndarray) -> tuple[float, float]:
    """Return ``(max_abs_diff, fidelity)`` with fidelity ``|<a|b>|^2``."""
    va = a.amps if isinstance(a, DenseState) else np.asarray(a)
    vb = b.amps if isinstance(b, DenseState) else np.asarray(b)
    if va.shape != vb.shape:
        raise ValueError(f"state size mismatch: {va.shape} vs {vb.shape}")
    diff = float(np.max(np.abs(va - vb))) if va.size else 0.0
    return diff, float(abs(np.vdot(va, vb)) ** 2)
