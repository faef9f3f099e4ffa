import numpy as np
import pytest

from sycamore_ooc.circuit import Circuit, generate_sycamore, grid_layout, merge_single_qubit_gates


def embed(u: np.ndarray, operands, n: int) -> np.ndarray:
    """Full 2^n operator for ``u`` on ``operands`` (operands[0] = matrix MSB, qubit 0 = state LSB).

    Built entry by entry from bit manipulation, independent of the package's
    axis helpers.
    """
    k = len(operands)
    dim = 2**n
    full = np.zeros((dim, dim), dtype=complex)
    for col in range(dim):
        sub_in = sum(((col >> q) & 1) << (k - 1 - j) for j, q in enumerate(operands))
        for sub_out in range(2**k):
            row = col
            for j, q in enumerate(operands):
                bit = (sub_out >> (k - 1 - j)) & 1
                row = (row & ~(1 << q)) | (bit << q)
            full[row, col] += u[sub_out, sub_in]
    return full


def matrix_oracle(circuit: Circuit) -> np.ndarray:
    """Final state by multiplying full operators; for n <= 10."""
    n = circuit.n_qubits
    psi = np.zeros(2**n, dtype=complex)
    psi[0] = 1.0
    for g in circuit.gates():
        psi = embed(g.unitary, g.operands, n) @ psi
    return psi


def random_unitary(rng: np.random.Generator, dim: int) -> np.ndarray:
    z = (rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))) / np.sqrt(2)
    q, r = np.linalg.qr(z)
    return q * (np.diag(r) / np.abs(np.diag(r)))


def random_state(rng: np.random.Generator, n: int) -> np.ndarray:
    v = rng.normal(size=2**n) + 1j * rng.normal(size=2**n)
    return v / np.linalg.norm(v)


def staircase_half(rows: int, cols: int, step: int = 2) -> list[int]:
    """Rows 0-1 plus columns >= ``step`` of the lower rows.

    With the grid's A/B/C/D patterns, the first two merged layers then carry
    exactly ``step`` gates across the cut.
    """
    return [r * cols + c for r in range(rows) for c in range(cols) if r < 2 or c >= step]


def small_circuit(rows: int, cols: int, cycles: int, seed: int, merged: bool = True) -> Circuit:
    c = generate_sycamore(grid_layout(rows, cols), cycles, seed)
    return merge_single_qubit_gates(c) if merged else c


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)
