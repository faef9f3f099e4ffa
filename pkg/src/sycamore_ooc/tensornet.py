"""Hypergraph tensor networks with generalized and deferred contraction.

Every index is binary. A hyperedge is an index shared by any number of
tensors; contracting a node subset sums the indices whose incident tensors
all lie inside the subset (and that are not open) and keeps the rest.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence

import numpy as np

from ._tensorops import e2q_expand, ei_expand, swap_operands
from .circuit import Circuit, Gate

OPEN = "open"
INTERNAL = "internal"
ENTANGLEMENT = "entanglement"

MAX_SEPARABLE_RANK = 3


class NetworkError(ValueError):
    pass


class SearchCapacityError(NetworkError):
    pass


@dataclass(frozen=True)
class IndexId:
    id: int
    kind: str = INTERNAL
    qubit: Optional[int] = None
    pair: Optional[int] = None  # shared tag of the (a', a) entanglement pair


@dataclass(frozen=True)
class Tensor:
    indices: tuple[IndexId, ...]
    data: np.ndarray  # shape (2,) * len(indices), axis j <-> indices[j]

    def __post_init__(self):
        if len(set(self.indices)) != len(self.indices):
            raise NetworkError("tensor indices are not distinct")
        if self.data.shape != (2,) * len(self.indices):
            raise NetworkError(f"data shape {self.data.shape} does not match rank {len(self.indices)}")

    @property
    def rank(self) -> int:
        return len(self.indices)

    def axis(self, index: IndexId) -> int:
        return self.indices.index(index)

    def transposed(self, order: Sequence[IndexId]) -> "Tensor":
        perm = [self.axis(i) for i in order]
        return Tensor(tuple(order), self.data.transpose(perm))


def gate_tensor(gate: Gate, outs: Sequence[IndexId], ins: Sequence[IndexId]) -> Tensor:
    k = len(gate.operands)
    return Tensor(tuple(outs) + tuple(ins), gate.unitary.reshape((2,) * (2 * k)))


@dataclass
class TensorNetwork:
    tensors: dict[int, Tensor] = field(default_factory=dict)
    open_indices: list[IndexId] = field(default_factory=list)
    _next_node: int = 0

    def add(self, tensor: Tensor) -> int:
        node = self._next_node
        self._next_node += 1
        self.tensors[node] = tensor
        return node

    @property
    def hyperedges(self) -> dict[IndexId, set[int]]:
        edges: dict[IndexId, set[int]] = {}
        for node, t in self.tensors.items():
            for idx in t.indices:
                edges.setdefault(idx, set()).add(node)
        return edges

    def contract(self, nodes: Iterable[int]) -> Tensor:
        return contract(self, nodes)

    def contract_all(self) -> np.ndarray:
        """Contract everything and return the open-index state, qubit 0 as LSB."""
        if len(self.tensors) > 1:
            contract(self, list(self.tensors))
        (t,) = self.tensors.values()
        order = sorted(self.open_indices, key=lambda i: i.qubit, reverse=True)
        return np.ascontiguousarray(t.transposed(order).data).reshape(-1)


def network_from_circuit(circuit: Circuit, hyperedges: bool = False) -> TensorNetwork:
    """One |0> tensor per qubit plus one rank-2k tensor per k-qubit gate.

    With ``hyperedges=True``, gates that are diagonal up to a permutation of
    wires are stored as their diagonal core attached to the input indices, so
    the qubit line continues on a shared hyperedge.
    """
    counter = itertools.count()
    current: list[int] = []
    pending: list[tuple[list[int], np.ndarray]] = []
    qubit_of: dict[int, int] = {}

    for q in range(circuit.n_qubits):
        i = next(counter)
        qubit_of[i] = q
        current.append(i)
        pending.append(([i], np.array([1.0, 0.0], dtype=complex)))

    for gate in circuit.gates():
        k = len(gate.operands)
        ins = [current[q] for q in gate.operands]
        if hyperedges:
            core = _wire_permuted_core(gate)
            if core is not None:
                perm, diag = core
                pending.append((ins, diag))
                for pos, q in enumerate(gate.operands):
                    current[q] = ins[perm[pos]]
                continue
        outs = []
        for q in gate.operands:
            i = next(counter)
            qubit_of[i] = q
            current[q] = i
            outs.append(i)
        pending.append((outs + ins, gate.unitary.reshape((2,) * (2 * k))))

    # wire-permuting gates can move a line to another qubit; open ids follow their final qubit
    final = {i: q for q, i in enumerate(current)}
    ids: dict[int, IndexId] = {}
    for i, q in qubit_of.items():
        ids[i] = IndexId(i, OPEN, qubit=final[i]) if i in final else IndexId(i, INTERNAL, qubit=q)
    net = TensorNetwork(open_indices=[ids[current[q]] for q in range(circuit.n_qubits)])
    for idx, data in pending:
        net.add(Tensor(tuple(ids[i] for i in idx), np.asarray(data, dtype=complex)))
    return net


def _wire_permuted_core(gate: Gate):
    k = len(gate.operands)
    outs = [IndexId(j) for j in range(k)]
    ins = [IndexId(k + j) for j in range(k)]
    t = gate_tensor(gate, outs, ins)
    maps = is_separable(t, list(zip(outs, ins)))
    if maps is None:
        return None
    perm = []
    for table in maps:
        src = _projection_source(table, k)
        if src is None:
            return None
        perm.append(src)
    if sorted(perm) != list(range(k)):
        return None
    # core over inputs: A[f(j), j]
    core = np.empty((2,) * k, dtype=complex)
    for j in itertools.product((0, 1), repeat=k):
        i = tuple(j[p] for p in perm)
        core[j] = t.data[i + j]
    return perm, core


def _projection_source(table: tuple[int, ...], m: int) -> Optional[int]:
    for src in range(m):
        if all(table[j] == (j >> (m - 1 - src)) & 1 for j in range(2**m)):
            return src
    return None


def _check_pairing(tensor: Tensor, pairing) -> None:
    flat = [i for pair in pairing for i in pair]
    if len(flat) != tensor.rank or set(flat) != set(tensor.indices) or len(set(flat)) != len(flat):
        raise NetworkError("pairing must cover every tensor index exactly once")


def is_diagonal(tensor: Tensor, pairing: Sequence[tuple[IndexId, IndexId]], atol: float = 1e-14) -> bool:
    """True iff the tensor vanishes whenever some paired indices differ."""
    _check_pairing(tensor, pairing)
    m = len(pairing)
    t = tensor.transposed([p[0] for p in pairing] + [p[1] for p in pairing])
    mat = t.data.reshape(2**m, 2**m)
    off = mat - np.diag(np.diag(mat))
    return bool(np.all(np.abs(off) <= atol))


def is_separable(tensor: Tensor, pairing: Sequence[tuple[IndexId, IndexId]], atol: float = 1e-14):
    """Search for output-bit functions making the tensor diagonal.

    Returns one truth table per output index (entry ``j`` is the output bit
    for input assignment ``j``, first input as MSB), or ``None``. Projection
    functions are tried before the remaining truth tables, so diagonal
    tensors report identity maps.
    """
    _check_pairing(tensor, pairing)
    m = len(pairing)
    if m > MAX_SEPARABLE_RANK:
        raise SearchCapacityError(f"separability search limited to {MAX_SEPARABLE_RANK} index pairs, got {m}")
    t = tensor.transposed([p[0] for p in pairing] + [p[1] for p in pairing])
    mat = t.data.reshape(2**m, 2**m)
    support = np.abs(mat) > atol  # support[i, j]

    width = 2**m
    projections = [tuple((j >> (m - 1 - s)) & 1 for j in range(width)) for s in range(m)]
    candidates = projections + [
        tuple(bits) for bits in itertools.product((0, 1), repeat=width) if tuple(bits) not in projections
    ]
    maps = []
    for k in range(m):
        shift = m - 1 - k
        for table in candidates:
            if all(
                ((i >> shift) & 1) == table[j]
                for i, j in zip(*np.nonzero(support))
            ):
                maps.append(table)
                break
        else:
            return None
    # per-bit consistency is joint consistency: i is pinned by its bits
    return maps


def apply_output_maps(maps, j: int) -> int:
    m = len(maps)
    return sum(maps[k][j] << (m - 1 - k) for k in range(m))


def _einsum_pair(a: Tensor, b: Tensor, keep: set[IndexId]) -> Tensor:
    labels = {idx: n for n, idx in enumerate(dict.fromkeys(a.indices + b.indices))}
    out = [idx for idx in dict.fromkeys(a.indices + b.indices) if idx in keep]
    data = np.einsum(
        a.data, [labels[i] for i in a.indices],
        b.data, [labels[i] for i in b.indices],
        [labels[i] for i in out],
    )
    return Tensor(tuple(out), data)


def contract(network: TensorNetwork, nodes: Iterable[int]) -> Tensor:
    """Contract a node subset in place and return the merged tensor.

    Merges go pairwise: the connected pair with the smallest result rank
    first, outer products only between disconnected pieces. An index is
    summed only once all its incident tensors have been merged and it is
    not open.
    """
    nodes = list(dict.fromkeys(nodes))
    if not nodes:
        raise NetworkError("empty contraction subset")
    missing = [n for n in nodes if n not in network.tensors]
    if missing:
        raise NetworkError(f"nodes not in network: {missing}")
    edges = network.hyperedges
    open_set = set(network.open_indices)
    outside = {n for n in network.tensors if n not in nodes}

    def needed_outside(idx: IndexId, merged_nodes: set[int]) -> bool:
        return idx in open_set or bool(edges[idx] - merged_nodes)

    groups = [(network.tensors[n], {n}) for n in nodes]
    while len(groups) > 1:
        best = None
        for x, y in itertools.combinations(range(len(groups)), 2):
            (ta, na), (tb, nb) = groups[x], groups[y]
            if set(ta.indices).isdisjoint(tb.indices):
                continue
            merged = na | nb
            keep = {i for i in ta.indices + tb.indices if needed_outside(i, merged)}
            key = (len(keep), ta.rank + tb.rank)
            if best is None or key < best[0]:
                best = (key, x, y, keep)
        if best is None:
            # nothing shares an index: outer product of the two smallest
            groups.sort(key=lambda g: g[0].rank)
            x, y = 0, 1
            keep = set(groups[0][0].indices + groups[1][0].indices)
        else:
            _, x, y, keep = best
        (ta, na), (tb, nb) = groups[x], groups[y]
        rest = [g for k, g in enumerate(groups) if k not in (x, y)]
        groups = [(_einsum_pair(ta, tb, keep), na | nb)] + rest
    result, merged = groups[0]
    if len(nodes) == 1:
        # a lone tensor may still carry a self-contained (summable) index
        keep = {i for i in result.indices if needed_outside(i, merged)}
        if len(keep) != result.rank:
            labels = {idx: n for n, idx in enumerate(result.indices)}
            out = [i for i in result.indices if i in keep]
            result = Tensor(tuple(out), np.einsum(result.data, list(range(result.rank)), [labels[i] for i in out]))
    for n in nodes:
        del network.tensors[n]
    network.add(result)
    assert outside.isdisjoint(nodes)
    return result


def _fresh_labels(*tensors: Tensor) -> tuple[int, int]:
    low = min([0] + [i.id for t in tensors for i in t.indices if i.id < 0])
    return low - 1, low - 2


def defer_gate(
    gate: Gate,
    phi: Tensor,
    chi: Tensor,
    labels: Optional[tuple[int, int]] = None,
) -> tuple[Tensor, Tensor, tuple[IndexId, IndexId]]:
    """Split a bridging two-qubit gate into its EI and E2Q halves.

    ``phi`` must hold the qubit line of one operand and ``chi`` the other.
    Returns ``(phi', chi', (a', a))`` where both primed tensors carry the two
    new entanglement indices as trailing axes.
    """
    if len(gate.operands) != 2:
        raise NetworkError("only two-qubit gates can be deferred")
    qa, qb = gate.operands
    u = gate.unitary
    phi_q = {i.qubit: i for i in phi.indices if i.kind != ENTANGLEMENT and i.qubit is not None}
    chi_q = {i.qubit: i for i in chi.indices if i.kind != ENTANGLEMENT and i.qubit is not None}
    if qa in chi_q and qb in phi_q and not (qa in phi_q and qb in chi_q):
        qa, qb = qb, qa
        u = swap_operands(u)
    if qa not in phi_q or qb not in chi_q:
        raise NetworkError(f"gate on {gate.operands} does not bridge the two tensors")
    l1, l2 = labels if labels is not None else _fresh_labels(phi, chi)
    tag = min(l1, l2)
    a_prime = IndexId(l1, ENTANGLEMENT, pair=tag)
    a_ent = IndexId(l2, ENTANGLEMENT, pair=tag)
    ia, ib = phi_q[qa], chi_q[qb]
    new_phi = ei_expand(phi.data, phi.axis(ia))
    new_chi = e2q_expand(chi.data, chi.axis(ib), u)
    phi_p = Tensor(phi.indices + (a_prime, a_ent), new_phi)
    chi_p = Tensor(chi.indices + (a_prime, a_ent), new_chi)
    return phi_p, chi_p, (a_prime, a_ent)


def eliminate_entanglement(phi: Tensor, chi: Tensor) -> Tensor:
    """Sum over every entanglement index shared by the two tensors."""
    ents_phi = {i for i in phi.indices if i.kind == ENTANGLEMENT}
    ents_chi = {i for i in chi.indices if i.kind == ENTANGLEMENT}
    if ents_phi != ents_chi:
        raise NetworkError(f"unpaired entanglement indices: {sorted(i.id for i in ents_phi ^ ents_chi)}")
    tags: dict[int, int] = {}
    for i in ents_phi:
        tags[i.pair] = tags.get(i.pair, 0) + 1
    if any(c != 2 for c in tags.values()):
        raise NetworkError("entanglement indices must come in (a', a) pairs")
    shared_other = (set(phi.indices) & set(chi.indices)) - ents_phi
    if shared_other:
        raise NetworkError("tensors share non-entanglement indices")
    keep = {i for i in phi.indices + chi.indices if i.kind != ENTANGLEMENT}
    return _einsum_pair(phi, chi, keep)


def state_tensor(amps: np.ndarray, qubits: Sequence[int], start_id: int = 0) -> Tensor:
    """Wrap a state vector over ``qubits`` (first listed = LSB) as a Tensor."""
    from ._tensorops import axes_view

    k = len(qubits)
    idx = tuple(IndexId(start_id + j, OPEN, qubit=q) for j, q in enumerate(qubits))
    return Tensor(idx, np.ascontiguousarray(axes_view(np.asarray(amps, dtype=complex), k)))


def tensor_state(t: Tensor, qubits: Sequence[int]) -> np.ndarray:
    """Flatten a tensor holding one index per qubit into a vector (first = LSB)."""
    from ._tensorops import flatten_axes

    by_q = {i.qubit: i for i in t.indices}
    if set(by_q) != set(qubits) or len(by_q) != t.rank:
        raise NetworkError("tensor indices do not match the requested qubits")
    return flatten_axes(t.transposed([by_q[q] for q in qubits]).data)
