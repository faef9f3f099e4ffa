import itertools
import math

import numpy as np
import pytest

from conftest import embed, matrix_oracle, random_state, random_unitary, small_circuit
from sycamore_ooc.circuit import Circuit, Gate, GateParams, fsim_unitary
from sycamore_ooc.tensornet import (
    ENTANGLEMENT,
    OPEN,
    IndexId,
    NetworkError,
    SearchCapacityError,
    Tensor,
    TensorNetwork,
    apply_output_maps,
    contract,
    defer_gate,
    eliminate_entanglement,
    gate_tensor,
    is_diagonal,
    is_separable,
    network_from_circuit,
    state_tensor,
    tensor_state,
)

H = np.array([[1, 1], [1, -1]], dtype=complex) / math.sqrt(2)
CZ = np.diag([1, 1, 1, -1]).astype(complex)
SWAP = np.array([[1, 0, 0, 0], [0, 0, 1, 0], [0, 1, 0, 0], [0, 0, 0, 1]], dtype=complex)


def two_qubit_tensor(u):
    outs, ins = [IndexId(0), IndexId(1)], [IndexId(2), IndexId(3)]
    return gate_tensor(Gate((0, 1), u), outs, ins), list(zip(outs, ins))


def test_network_single_gate_counts():
    net = network_from_circuit(Circuit(1, [[Gate((0,), H)]]))
    assert len(net.tensors) == 2
    assert len(net.hyperedges) == 2
    assert len(net.open_indices) == 1 and net.open_indices[0].kind == OPEN


def test_network_two_qubit_gate_counts():
    net = network_from_circuit(Circuit(2, [[Gate((0, 1), CZ)]]))
    assert len(net.tensors) == 3
    assert len(net.hyperedges) == 4
    assert len(net.open_indices) == 2


@pytest.mark.parametrize("seed", [0, 1])
def test_full_contraction_matches_oracle(seed):
    c = small_circuit(2, 3, 5, seed, merged=False)
    got = network_from_circuit(c).contract_all()
    assert np.max(np.abs(got - matrix_oracle(c))) <= 1e-12


def test_full_contraction_order_independent(rng):
    c = small_circuit(2, 4, 4, 9)
    ref = matrix_oracle(c)
    for _ in range(3):
        net = network_from_circuit(c)
        nodes = list(net.tensors)
        rng.shuffle(nodes)
        # contract random disjoint groups first, then everything
        for chunk in np.array_split(nodes, 4):
            if len(chunk) > 1:
                contract(net, [int(x) for x in chunk])
        assert np.max(np.abs(net.contract_all() - ref)) <= 1e-12


def test_is_diagonal_identity_and_cz():
    t, pairing = two_qubit_tensor(np.eye(4))
    assert is_diagonal(t, pairing)
    t, pairing = two_qubit_tensor(CZ)
    assert is_diagonal(t, pairing)


def test_is_diagonal_entrywise_cz():
    # enumerate all 16 entries independently
    t, pairing = two_qubit_tensor(CZ)
    for o0, o1, i0, i1 in itertools.product((0, 1), repeat=4):
        if (o0, o1) != (i0, i1):
            assert t.data[o0, o1, i0, i1] == 0


def test_is_diagonal_fsim_false():
    t, pairing = two_qubit_tensor(fsim_unitary(GateParams(math.pi / 2, math.pi / 6)))
    assert not is_diagonal(t, pairing)


def test_is_diagonal_malformed_pairing():
    t, pairing = two_qubit_tensor(CZ)
    with pytest.raises(NetworkError):
        is_diagonal(t, pairing[:1])


def _separable_by_brute_force(t, pairing, maps):
    m = len(pairing)
    tt = t.transposed([p[0] for p in pairing] + [p[1] for p in pairing]).data.reshape(2**m, 2**m)
    for j in range(2**m):
        for i in range(2**m):
            if i != apply_output_maps(maps, j) and abs(tt[i, j]) > 1e-14:
                return False
    return True


def test_is_separable_swap():
    t, pairing = two_qubit_tensor(SWAP)
    maps = is_separable(t, pairing)
    # f1(j1, j2) = j2 and f2(j1, j2) = j1, inputs (j1, j2) enumerated j1-major
    assert maps == [(0, 1, 0, 1), (0, 0, 1, 1)]
    assert _separable_by_brute_force(t, pairing, maps)


def test_is_separable_diagonal_gives_identity():
    d = np.diag(np.exp(1j * np.arange(4)))
    t, pairing = two_qubit_tensor(d)
    assert is_separable(t, pairing) == [(0, 0, 1, 1), (0, 1, 0, 1)]


def test_is_separable_cnot_is_permutation():
    cnot = np.eye(4, dtype=complex)[[0, 1, 3, 2]]
    t, pairing = two_qubit_tensor(cnot)
    maps = is_separable(t, pairing)
    assert maps is not None and _separable_by_brute_force(t, pairing, maps)


def test_is_separable_fsim_partial_swap_none():
    t, pairing = two_qubit_tensor(fsim_unitary(GateParams(math.pi / 3, math.pi / 6, 0.03, -0.07, 0.02)))
    assert is_separable(t, pairing) is None


def test_is_separable_fsim_full_swap_angle():
    # at 90 degrees the gate is a phased swap, hence a wire permutation
    t, pairing = two_qubit_tensor(fsim_unitary(GateParams(math.pi / 2, math.pi / 6, 0.03, -0.07, 0.02)))
    maps = is_separable(t, pairing)
    assert maps == [(0, 1, 0, 1), (0, 0, 1, 1)]
    assert _separable_by_brute_force(t, pairing, maps)


def test_is_separable_capacity():
    ids = [IndexId(i) for i in range(8)]
    t = Tensor(tuple(ids), np.zeros((2,) * 8, dtype=complex))
    with pytest.raises(SearchCapacityError):
        is_separable(t, list(zip(ids[:4], ids[4:])))


def test_contract_matrix_product(rng):
    i, j, k = IndexId(0), IndexId(1), IndexId(2)
    a, b = rng.normal(size=(2, 2)), rng.normal(size=(2, 2))
    net = TensorNetwork(open_indices=[i, k])
    na = net.add(Tensor((i, j), a.astype(complex)))
    nb = net.add(Tensor((j, k), b.astype(complex)))
    out = contract(net, [na, nb])
    assert np.allclose(out.transposed([i, k]).data, a @ b, atol=1e-14)
    assert len(net.tensors) == 1


def test_contract_outer_product(rng):
    idx = [IndexId(n) for n in range(3)]
    a, b = rng.normal(size=(2,)), rng.normal(size=(2, 2))
    net = TensorNetwork(open_indices=idx)
    na = net.add(Tensor((idx[0],), a.astype(complex)))
    nb = net.add(Tensor((idx[1], idx[2]), b.astype(complex)))
    out = contract(net, [na, nb])
    assert out.rank == 3
    assert np.allclose(out.transposed(idx).data, np.multiply.outer(a, b), atol=1e-14)


def test_contract_three_way_hyperedge(rng):
    i = IndexId(0)
    vecs = [rng.normal(size=2) + 1j * rng.normal(size=2) for _ in range(3)]
    net = TensorNetwork()
    nodes = [net.add(Tensor((i,), v)) for v in vecs]
    out = contract(net, nodes)
    expect = 0
    for x in range(2):
        expect += vecs[0][x] * vecs[1][x] * vecs[2][x]
    assert out.rank == 0 and abs(complex(out.data) - expect) <= 1e-14


def test_contract_partial_hyperedge_kept(rng):
    # index shared by three tensors, only two contracted: it must survive
    i, j = IndexId(0), IndexId(1)
    net = TensorNetwork(open_indices=[j])
    n1 = net.add(Tensor((i,), rng.normal(size=2).astype(complex)))
    n2 = net.add(Tensor((i,), rng.normal(size=2).astype(complex)))
    net.add(Tensor((i, j), rng.normal(size=(2, 2)).astype(complex)))
    out = contract(net, [n1, n2])
    assert out.indices == (i,)


def test_contract_unknown_nodes():
    net = TensorNetwork()
    with pytest.raises(NetworkError):
        contract(net, [5])


def test_hyperedge_representation_matches_dense():
    c = Circuit(3, [
        [Gate((0, 1), CZ)],
        [Gate((1, 2), SWAP)],
        [Gate((0, 2), np.diag(np.exp(1j * np.array([0.1, 0.2, 0.3, 0.4]))))],
        [Gate((0,), H), Gate((2,), H)],
        [Gate((1, 2), CZ)],
    ])
    dense = network_from_circuit(c).contract_all()
    hyper_net = network_from_circuit(c, hyperedges=True)
    # separable gates no longer add output indices
    assert len(hyper_net.hyperedges) < len(network_from_circuit(c).hyperedges)
    assert np.max(np.abs(hyper_net.contract_all() - dense)) <= 1e-15
    assert np.max(np.abs(dense - matrix_oracle(c))) <= 1e-12


def _product_check(u, phi_amps, chi_amps):
    phi = state_tensor(phi_amps, [0], start_id=0)
    chi = state_tensor(chi_amps, [1], start_id=1)
    p2, c2, (a1, a2) = defer_gate(Gate((0, 1), u), phi, chi)
    assert a1.kind == a2.kind == ENTANGLEMENT and a1.id < 0 and a2.id < 0
    got = tensor_state(eliminate_entanglement(p2, c2), [0, 1])
    direct = embed(u, (0, 1), 2) @ np.kron(chi_amps, phi_amps)
    return got, direct


def test_defer_identity_gives_outer_product(rng):
    phi, chi = random_state(rng, 1), random_state(rng, 1)
    got, _ = _product_check(np.eye(4), phi, chi)
    assert np.max(np.abs(got - np.kron(chi, phi))) <= 1e-15


def test_defer_cz_on_plus_states():
    plus = np.array([1, 1], dtype=complex) / math.sqrt(2)
    got, direct = _product_check(CZ, plus, plus)
    assert np.max(np.abs(got - direct)) <= 1e-14
    assert np.allclose(direct, [0.5, 0.5, 0.5, -0.5])


def test_defer_random_unitaries(rng):
    for _ in range(100):
        got, direct = _product_check(random_unitary(rng, 4), random_state(rng, 1), random_state(rng, 1))
        assert np.max(np.abs(got - direct)) <= 1e-12


def test_defer_reversed_operands(rng):
    u = random_unitary(rng, 4)
    phi_amps, chi_amps = random_state(rng, 1), random_state(rng, 1)
    phi = state_tensor(phi_amps, [0], start_id=0)
    chi = state_tensor(chi_amps, [1], start_id=1)
    p2, c2, _ = defer_gate(Gate((1, 0), u), phi, chi)
    got = tensor_state(eliminate_entanglement(p2, c2), [0, 1])
    assert np.max(np.abs(got - embed(u, (1, 0), 2) @ np.kron(chi_amps, phi_amps))) <= 1e-12


def test_defer_rejects_non_bridging_gate(rng):
    phi = state_tensor(random_state(rng, 2), [0, 1], start_id=0)
    chi = state_tensor(random_state(rng, 1), [2], start_id=2)
    with pytest.raises(NetworkError):
        defer_gate(Gate((0, 1), np.eye(4)), phi, chi)


def test_single_deferral_sums_four_terms(rng):
    phi = state_tensor(random_state(rng, 1), [0], start_id=0)
    chi = state_tensor(random_state(rng, 1), [1], start_id=1)
    p2, c2, pair = defer_gate(Gate((0, 1), random_unitary(rng, 4)), phi, chi)
    shared = [i for i in p2.indices if i in c2.indices]
    assert sorted(i.id for i in shared) == sorted(i.id for i in pair)
    assert 2 ** len(shared) == 4


def test_zero_deferrals_outer_product(rng):
    a, b = random_state(rng, 2), random_state(rng, 1)
    t = eliminate_entanglement(state_tensor(a, [0, 1]), state_tensor(b, [2], start_id=2))
    assert np.max(np.abs(tensor_state(t, [0, 1, 2]) - np.kron(b, a))) <= 1e-15


@pytest.mark.parametrize("k", [1, 2, 3])
def test_k_deferrals_between_three_qubit_tensors(rng, k):
    a_amps, b_amps = random_state(rng, 3), random_state(rng, 3)
    phi = state_tensor(a_amps, [0, 1, 2], start_id=0)
    chi = state_tensor(b_amps, [3, 4, 5], start_id=3)
    direct = np.kron(b_amps, a_amps)
    for _ in range(k):
        qa, qb = int(rng.integers(0, 3)), int(rng.integers(3, 6))
        u = random_unitary(rng, 4)
        phi, chi, _ = defer_gate(Gate((qa, qb), u), phi, chi)
        direct = embed(u, (qa, qb), 6) @ direct
    ents = [i for i in phi.indices if i.kind == ENTANGLEMENT]
    assert len(ents) == 2 * k
    got = tensor_state(eliminate_entanglement(phi, chi), list(range(6)))
    assert np.max(np.abs(got - direct)) <= 1e-12


def test_eliminate_rejects_unpaired(rng):
    phi = state_tensor(random_state(rng, 1), [0], start_id=0)
    chi = state_tensor(random_state(rng, 1), [1], start_id=1)
    p2, c2, _ = defer_gate(Gate((0, 1), np.eye(4)), phi, chi)
    with pytest.raises(NetworkError):
        eliminate_entanglement(p2, chi)
