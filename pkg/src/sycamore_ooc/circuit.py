"""Sycamore-class random circuits: layouts, fsim gates, cycle patterns, merging."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Iterator, Optional

import numpy as np

from ._tensorops import is_unitary

PATTERN_LABELS = ("A", "B", "C", "D")
CYCLE_PATTERN = "ABCDCDAB"

NOMINAL_THETA = math.pi / 2
NOMINAL_PHI = math.pi / 6


class LayoutError(ValueError):
    pass


class CircuitError(ValueError):
    pass


class UnmergeableGateError(CircuitError):
    """A qubit carries single-qubit gates but no two-qubit gate to absorb them."""


@dataclass(frozen=True)
class QubitLayout:
    n_qubits: int
    couplings: tuple[tuple[int, int, str], ...]
    coords: Optional[tuple[tuple[int, int], ...]] = None

    def __post_init__(self):
        if self.n_qubits < 1:
            raise LayoutError("layout has no qubits")
        seen: dict[str, set[int]] = {label: set() for label in PATTERN_LABELS}
        for a, b, label in self.couplings:
            if label not in seen:
                raise LayoutError(f"unknown pattern label {label!r}")
            if not (0 <= a < self.n_qubits and 0 <= b < self.n_qubits):
                raise LayoutError(f"coupling ({a}, {b}) out of range")
            if a == b:
                raise LayoutError(f"coupling ({a}, {b}) is a self-loop")
            if a in seen[label] or b in seen[label]:
                raise LayoutError(f"pattern {label} is not a matching at ({a}, {b})")
            seen[label].update((a, b))
        if self.coords is not None and len(self.coords) != self.n_qubits:
            raise LayoutError("coords length does not match n_qubits")

    def pattern(self, label: str) -> list[tuple[int, int]]:
        return [(a, b) for a, b, lab in self.couplings if lab == label]

    def to_dict(self) -> dict:
        return {
            "n_qubits": self.n_qubits,
            "coords": None if self.coords is None else [list(c) for c in self.coords],
            "patterns": {lab: [[a, b] for a, b in self.pattern(lab)] for lab in PATTERN_LABELS},
        }

    @classmethod
    def from_dict(cls, data: dict) -> "QubitLayout":
        try:
            n = int(data["n_qubits"])
            patterns = data["patterns"]
        except (KeyError, TypeError) as exc:
            raise LayoutError(f"malformed layout: {exc}") from exc
        couplings = []
        for label in PATTERN_LABELS:
            for pair in patterns.get(label, []):
                if len(pair) != 2:
                    raise LayoutError(f"pattern {label}: coupling {pair!r} is not a pair")
                couplings.append((int(pair[0]), int(pair[1]), label))
        unknown = set(patterns) - set(PATTERN_LABELS)
        if unknown:
            raise LayoutError(f"unknown pattern labels {sorted(unknown)}")
        coords = data.get("coords")
        if coords is not None:
            coords = tuple((int(r), int(c)) for r, c in coords)
        return cls(n, tuple(couplings), coords)


def load_layout(source: str | Path) -> QubitLayout:
    """Load a layout from a JSON file, or a shipped layout by name (e.g. ``grid4x4``)."""
    path = Path(source)
    if path.suffix != ".json" and not path.exists():
        ref = resources.files("sycamore_ooc") / "data" / "layouts" / f"{source}.json"
        if not ref.is_file():
            raise LayoutError(f"no such layout: {source}")
        return QubitLayout.from_dict(json.loads(ref.read_text()))
    try:
        data = json.loads(path.read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise LayoutError(f"cannot read layout {path}: {exc}") from exc
    return QubitLayout.from_dict(data)


def save_layout(layout: QubitLayout, path: str | Path) -> None:
    Path(path).write_text(json.dumps(layout.to_dict(), indent=1) + "\n")


def grid_layout(rows: int, cols: int) -> QubitLayout:
    """Square grid, row-major numbering.

    A/B take vertical couplings from even/odd rows, C/D horizontal couplings
    from even/odd columns.
    """
    def q(r, c):
        return r * cols + c

    couplings = []
    for r in range(rows - 1):
        for c in range(cols):
            couplings.append((q(r, c), q(r + 1, c), "A" if r % 2 == 0 else "B"))
    for r in range(rows):
        for c in range(cols - 1):
            couplings.append((q(r, c), q(r, c + 1), "C" if c % 2 == 0 else "D"))
    coords = tuple((r, c) for r in range(rows) for c in range(cols))
    return QubitLayout(rows * cols, tuple(couplings), coords)


@dataclass(frozen=True)
class GateParams:
    theta: float = NOMINAL_THETA
    phi: float = NOMINAL_PHI
    delta_plus: float = 0.0
    delta_minus: float = 0.0
    delta_minus_off: float = 0.0

    def __post_init__(self):
        for name in ("theta", "phi", "delta_plus", "delta_minus", "delta_minus_off"):
            if not math.isfinite(getattr(self, name)):
                raise ValueError(f"{name} must be finite")


def fsim_unitary(params: GateParams) -> np.ndarray:
    """Two-qubit Sycamore gate; first operand is the more significant bit."""
    t, p = params.theta, params.phi
    dp, dm, dmo = params.delta_plus, params.delta_minus, params.delta_minus_off
    u = np.zeros((4, 4), dtype=complex)
    u[0, 0] = 1.0
    u[1, 1] = np.exp(1j * (dp + dm)) * math.cos(t)
    u[1, 2] = -1j * np.exp(1j * (dp - dmo)) * math.sin(t)
    u[2, 1] = -1j * np.exp(1j * (dp + dmo)) * math.sin(t)
    u[2, 2] = np.exp(1j * (dp - dm)) * math.cos(t)
    u[3, 3] = np.exp(1j * (2 * dp - p))
    return u


PAULI_X = np.array([[0, 1], [1, 0]], dtype=complex)
PAULI_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
PAULI_W = (PAULI_X + PAULI_Y) / math.sqrt(2)


def sqrt_gate(kind: str) -> np.ndarray:
    """Principal square root of X, Y or W = (X + Y)/sqrt(2).

    For an involution P the principal root is ((1+i) I + (1-i) P) / 2.
    """
    paulis = {"X": PAULI_X, "Y": PAULI_Y, "W": PAULI_W}
    try:
        p = paulis[kind]
    except KeyError:
        raise ValueError(f"unknown single-qubit gate kind {kind!r}") from None
    return ((1 + 1j) * np.eye(2) + (1 - 1j) * p) / 2


@dataclass
class Gate:
    operands: tuple[int, ...]
    unitary: np.ndarray
    layer: int = 0

    def __post_init__(self):
        self.operands = tuple(int(q) for q in self.operands)
        self.unitary = np.asarray(self.unitary, dtype=complex)
        k = len(self.operands)
        if k not in (1, 2):
            raise CircuitError(f"gate must act on 1 or 2 qubits, got {k}")
        if len(set(self.operands)) != k:
            raise CircuitError(f"gate operands not distinct: {self.operands}")
        if self.unitary.shape != (2**k, 2**k):
            raise CircuitError(f"unitary shape {self.unitary.shape} does not fit {k} operands")


@dataclass
class Circuit:
    n_qubits: int
    layers: list[list[Gate]] = field(default_factory=list)
    coords: Optional[tuple[tuple[int, int], ...]] = None

    def __post_init__(self):
        for i, layer in enumerate(self.layers):
            used: set[int] = set()
            for g in layer:
                if any(q < 0 or q >= self.n_qubits for q in g.operands):
                    raise CircuitError(f"layer {i}: gate on {g.operands} outside {self.n_qubits} qubits")
                if used.intersection(g.operands):
                    raise CircuitError(f"layer {i}: overlapping gates on {g.operands}")
                used.update(g.operands)

    def gates(self) -> Iterator[Gate]:
        for layer in self.layers:
            yield from layer

    @property
    def depth(self) -> int:
        return len(self.layers)

    def is_two_qubit_only(self) -> bool:
        return all(len(g.operands) == 2 for g in self.gates())

    def to_dict(self) -> dict:
        def mat(u):
            return [[float(z.real), float(z.imag)] for z in u.reshape(-1)]

        return {
            "n_qubits": self.n_qubits,
            "coords": None if self.coords is None else [list(c) for c in self.coords],
            "layers": [
                [{"qubits": list(g.operands), "unitary": mat(g.unitary)} for g in layer]
                for layer in self.layers
            ],
        }

    @classmethod
    def from_dict(cls, data: dict) -> "Circuit":
        layers = []
        for i, layer in enumerate(data["layers"]):
            gates = []
            for g in layer:
                k = len(g["qubits"])
                flat = np.array([complex(re, im) for re, im in g["unitary"]])
                gates.append(Gate(tuple(g["qubits"]), flat.reshape(2**k, 2**k), i))
            layers.append(gates)
        coords = data.get("coords")
        if coords is not None:
            coords = tuple((int(r), int(c)) for r, c in coords)
        return cls(int(data["n_qubits"]), layers, coords)


def save_circuit(circuit: Circuit, path: str | Path) -> None:
    Path(path).write_text(json.dumps(circuit.to_dict(), separators=(",", ":")) + "\n")


def load_circuit(path: str | Path) -> Circuit:
    try:
        return Circuit.from_dict(json.loads(Path(path).read_text()))
    except (KeyError, TypeError, ValueError) as exc:
        raise CircuitError(f"malformed circuit file {path}: {exc}") from exc


def generate_sycamore(
    layout: QubitLayout,
    cycles: int,
    seed: int,
    detuning: tuple[float, float] = (-0.1, 0.1),
    theta: float = NOMINAL_THETA,
    phi: float = NOMINAL_PHI,
) -> Circuit:
    """Random ABCDCDAB circuit: ``cycles`` x (1q layer, 2q layer) + final 1q layer."""
    if layout.n_qubits < 1 or not layout.couplings:
        raise CircuitError("empty layout")
    if cycles < 1:
        raise CircuitError("cycles must be >= 1")
    rng = np.random.default_rng(seed)
    roots = [sqrt_gate(k) for k in "XYW"]
    n = layout.n_qubits
    layers: list[list[Gate]] = []

    def single_layer():
        kinds = rng.integers(0, 3, size=n)
        return [Gate((q,), roots[kinds[q]], len(layers)) for q in range(n)]

    lo, hi = detuning
    for k in range(1, cycles + 1):
        layers.append(single_layer())
        label = CYCLE_PATTERN[(k - 1) % len(CYCLE_PATTERN)]
        twoq = []
        for a, b in layout.pattern(label):
            dp, dm, dmo = rng.uniform(lo, hi, size=3)
            params = GateParams(theta, phi, float(dp), float(dm), float(dmo))
            twoq.append(Gate((a, b), fsim_unitary(params), len(layers)))
        layers.append(twoq)
    layers.append(single_layer())
    return Circuit(n, layers, layout.coords)


def _orientation(coords, a: int, b: int) -> int:
    # 0 for pairs stacked in one column of the drawing, 1 otherwise
    return 0 if coords[a][1] == coords[b][1] else 1


def merge_single_qubit_gates(circuit: Circuit) -> Circuit:
    """Fold every single-qubit gate into a neighbouring two-qubit gate.

    Pending single-qubit gates are absorbed into the next two-qubit gate on
    their qubit; trailing ones into the previous. When the circuit carries
    drawing coordinates, each two-qubit layer is split into its vertical and
    its remaining pairs.
    """
    n = circuit.n_qubits
    pending: list[Optional[np.ndarray]] = [None] * n
    merged: list[list[Gate]] = []
    last: dict[int, Gate] = {}
    eye = np.eye(2, dtype=complex)

    for layer in circuit.layers:
        twoq = []
        for g in layer:
            if len(g.operands) == 1:
                q = g.operands[0]
                pending[q] = g.unitary if pending[q] is None else g.unitary @ pending[q]
                continue
            a, b = g.operands
            pa = eye if pending[a] is None else pending[a]
            pb = eye if pending[b] is None else pending[b]
            pending[a] = pending[b] = None
            new = Gate((a, b), g.unitary @ np.kron(pa, pb))
            last[a] = last[b] = new
            twoq.append(new)
        if not twoq:
            continue
        if circuit.coords is None:
            groups = [twoq]
        else:
            groups = [[g for g in twoq if _orientation(circuit.coords, *g.operands) == o] for o in (0, 1)]
        for grp in groups:
            if grp:
                for g in grp:
                    g.layer = len(merged)
                merged.append(grp)

    for q in range(n):
        if pending[q] is None:
            continue
        if q not in last:
            raise UnmergeableGateError(f"qubit {q} has single-qubit gates but no two-qubit gate")
        g = last[q]
        lift = np.kron(pending[q], eye) if g.operands[0] == q else np.kron(eye, pending[q])
        g.unitary = lift @ g.unitary
    return Circuit(n, merged, circuit.coords)


def check_gate_unitarity(circuit: Circuit, atol: float = 1e-12) -> bool:
    return all(is_unitary(g.unitary, atol) for g in circuit.gates())

