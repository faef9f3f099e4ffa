import math

import numpy as np
import pytest

from conftest import embed, matrix_oracle, random_state, random_unitary, small_circuit, staircase_half
from sycamore_ooc.circuit import Circuit, Gate
from sycamore_ooc.engine import (
    AggregationError,
    Kernel,
    LocalityError,
    PlanExecutionError,
    StateSlice,
    aggregate,
    apply_deferred_contraction,
    apply_kernel,
    assemble,
    global_local_swap,
    run_plan,
    split,
    store_for_plan,
    trace_plan,
)
from sycamore_ooc.engine.slices import contraction_flops, family_norm_sq
from sycamore_ooc.oracle import dense_simulate
from sycamore_ooc.plan import parse_plan, summarize_plan
from sycamore_ooc.plan.builder import build_plan
from sycamore_ooc.plan.skeleton import skeleton_plan
from sycamore_ooc.storage import load_state

X = np.array([[0, 1], [1, 0]], dtype=complex)
H = np.array([[1, 1], [1, -1]], dtype=complex) / math.sqrt(2)


def full_slice(amps):
    n = int(np.log2(amps.size))
    return StateSlice({}, tuple(range(n)), np.asarray(amps, dtype=complex))


def family(amps, globals_):
    return split(full_slice(amps), globals_)


def test_aggregate_single_gate(rng):
    g = Gate((0, 1), random_unitary(rng, 4))
    (k,) = aggregate([g])
    assert k.k == 2 and np.allclose(k.unitary, g.unitary, atol=1e-15)


def test_aggregate_chain_matches_dense_product(rng):
    g1, g2 = Gate((0, 1), random_unitary(rng, 4)), Gate((1, 2), random_unitary(rng, 4))
    (k,) = aggregate([g1, g2], k_max=5)
    assert k.k == 3
    # kernel qubits[0] is the matrix MSB; embed on a 3-qubit register with that order
    pos = {q: 2 - j for j, q in enumerate(k.qubits)}
    want = embed(g2.unitary, [pos[q] for q in g2.operands], 3) @ embed(g1.unitary, [pos[q] for q in g1.operands], 3)
    assert np.max(np.abs(k.unitary - want)) <= 1e-12


def test_aggregate_same_support_multiplies_in_order(rng):
    us = [random_unitary(rng, 4) for _ in range(3)]
    (k,) = aggregate([Gate((0, 1), u) for u in us])
    assert np.max(np.abs(k.unitary - us[2] @ us[1] @ us[0])) <= 1e-12


def test_aggregate_respects_k_max(rng):
    gates = [Gate((i, i + 1), random_unitary(rng, 4)) for i in range(6)]
    ks = aggregate(gates, k_max=3)
    assert all(k.k <= 3 for k in ks)
    assert sorted(i for k in ks for i in k.members) == list(range(6))
    with pytest.raises(AggregationError):
        aggregate(gates, k_max=1)


@pytest.mark.parametrize("seed", range(3))
def test_aggregation_equals_gate_by_gate(seed):
    c = small_circuit(2, 4, 6, seed)
    n = c.n_qubits
    psi = np.zeros(2**n, complex)
    psi[0] = 1
    for k in aggregate(list(c.gates())):
        assert np.max(np.abs(k.unitary.conj().T @ k.unitary - np.eye(2**k.k))) <= 1e-12
        psi = apply_kernel(full_slice(psi), k).amps
    assert np.max(np.abs(psi - matrix_oracle(c))) <= 1e-12


def test_x_kernel_on_qubit_zero():
    out = apply_kernel(full_slice(np.eye(8)[0]), Kernel((0,), X))
    assert np.array_equal(out.amps, np.eye(8)[1])


def test_hh_kernel_gives_uniform():
    out = apply_kernel(full_slice(np.eye(4)[0]), Kernel((0, 1), np.kron(H, H)))
    assert np.max(np.abs(out.amps - 0.5)) <= 1e-15


def test_kernel_matches_embedded_operator(rng):
    u = random_unitary(rng, 8)
    psi = random_state(rng, 6)
    out = apply_kernel(full_slice(psi), Kernel((4, 1, 3), u))
    assert np.max(np.abs(out.amps - embed(u, (4, 1, 3), 6) @ psi)) <= 1e-12


def test_kernel_on_large_slice_keeps_norm(rng):
    psi = random_state(rng, 20)
    out = apply_kernel(full_slice(psi), Kernel((3, 7, 11, 15, 19), random_unitary(rng, 32)))
    assert abs(out.norm_sq() - 1) <= 1e-12


def test_kernel_on_global_raises():
    sl = family(np.eye(8)[0], [2])[0]
    with pytest.raises(LocalityError):
        apply_kernel(sl, Kernel((2,), X))


def test_swap_same_globals_is_identity(rng):
    fam = family(random_state(rng, 5), [1, 3])
    out = global_local_swap(fam, [1, 3])
    assert all(a.fixed == b.fixed and np.array_equal(a.amps, b.amps) for a, b in zip(fam, out))


def test_swap_keeps_basis_amplitude(rng):
    psi = random_state(rng, 4)
    out = global_local_swap(family(psi, [3]), [0])
    idx = 0b1011
    sl = next(s for s in out if s.fixed[0] == idx & 1)
    local = sum(((idx >> q) & 1) << j for j, q in enumerate(sl.local_order))
    assert sl.amps[local] == psi[idx]


def test_swap_every_amplitude_exact(rng):
    psi = random_state(rng, 7)
    back = assemble(global_local_swap(family(psi, [0, 6]), [2, 4]))
    for idx in range(2**7):
        local = sum(((idx >> q) & 1) << j for j, q in enumerate(back.local_order))
        assert back.amps[local] == psi[idx]


def as_vector(slices):
    """Amplitudes by basis index; pure re-indexing, no arithmetic."""
    whole = assemble(slices)
    n = len(whole.local_order)
    out = np.empty(2**n, complex)
    for local in range(2**n):
        idx = sum(((local >> j) & 1) << q for j, q in enumerate(whole.local_order))
        out[idx] = whole.amps[local]
    return out


def test_swap_round_trip_bitwise(rng):
    psi = random_state(rng, 12)
    fam = family(psi, [0, 5, 9])
    there = global_local_swap(fam, list(rng.choice(12, size=3, replace=False)))
    back = global_local_swap(there, [0, 5, 9])
    assert sorted(tuple(sorted(s.fixed.items())) for s in back) == sorted(tuple(sorted(s.fixed.items())) for s in fam)
    assert np.array_equal(as_vector(back), psi)
    assert np.array_equal(as_vector(there), psi)
    assert abs(family_norm_sq(there) - 1) <= 1e-10


def test_deferred_contraction_without_labels_is_outer_product(rng):
    a, b = random_state(rng, 3), random_state(rng, 2)
    out, flops = apply_deferred_contraction(
        [StateSlice({}, (0, 1, 2), a)], [StateSlice({}, (3, 4), b)], [])
    assert out.local_order == (0, 1, 2, 3, 4)
    assert np.max(np.abs(out.amps - np.kron(b, a))) <= 1e-15
    assert flops == 8 * 2**5


def test_deferred_contraction_one_gate_matches_oracle(rng):
    # qubits 0-2 and 3-5 evolve separately; one gate on (2, 3) is deferred
    u1, u2, cross = random_unitary(rng, 8), random_unitary(rng, 8), random_unitary(rng, 4)
    ua, ub = (u1, (2, 1, 0)), (u2, (5, 4, 3))
    psi = np.zeros(64, complex)
    psi[0] = 1
    psi = embed(cross, (2, 3), 6) @ embed(*ub, 6) @ embed(*ua, 6) @ psi

    t = cross.reshape(2, 2, 2, 2).transpose(0, 2, 1, 3).reshape(4, 4)
    w, s, vh = np.linalg.svd(t)
    # cross[(o2 o3), (i2 i3)] = sum_r A_r[o2, i2] B_r[o3, i3], r indexes labels (-1, -2)
    A = [(w[:, r] * s[r]).reshape(2, 2) for r in range(4)]
    B = [vh[r].reshape(2, 2) for r in range(4)]
    left = (u1 @ np.eye(8)[0])
    right = (u2 @ np.eye(8)[0])
    fa = np.zeros((4, 8), complex)
    fb = np.zeros((4, 8), complex)
    for r in range(4):
        fa[r] = embed(A[r], (2,), 3) @ left
        fb[r] = embed(B[r], (0,), 3) @ right
    # label -1 is the low bit of r, label -2 the high bit
    ta = StateSlice({}, (0, 1, 2, -1, -2), fa.reshape(-1))
    tb = StateSlice({}, (-1, -2, 3, 4, 5), fb.T.reshape(-1))
    out, flops = apply_deferred_contraction([ta], [tb], [-1, -2])
    assert out.local_order == (0, 1, 2, 3, 4, 5)
    assert np.max(np.abs(out.amps - psi)) <= 1e-12
    assert flops == 8 * 2**6 * 2**2


def test_deferred_contraction_mismatched_labels():
    a = StateSlice({}, (0, -1), np.ones(4, complex))
    b = StateSlice({}, (-2, 1), np.ones(4, complex))
    from sycamore_ooc.engine import FamilyError
    with pytest.raises(FamilyError):
        apply_deferred_contraction([a], [b], [-1])


def test_contraction_flops_full_scale():
    assert contraction_flops(53, 14) == 2**70
    assert f"{float(2**70):.3e}" == "1.181e+21"


def test_empty_plan_leaves_basis_state(tmp_path):
    plan = parse_plan("define - 3\ndefine - 0\n")
    store = store_for_plan(plan, tmp_path, "double")
    run_plan(plan, Circuit(3, []), store)
    assert np.array_equal(load_state(store), np.eye(8)[0])


@pytest.fixture(scope="module")
def sixteen():
    c = small_circuit(4, 4, 8, 11)
    return c, build_plan(c, first_half=staircase_half(4, 4), defer_layers=2)


@pytest.mark.parametrize("precision,tol", [("double", 1e-10), ("single", 1e-4)])
def test_run_plan_sixteen_qubits(tmp_path, sixteen, precision, tol):
    c, plan = sixteen
    store = store_for_plan(plan, tmp_path, precision)
    trace = run_plan(plan, c, store, check_norm=True)
    got = load_state(store)
    assert np.max(np.abs(got - dense_simulate(c).amps)) <= tol
    assert trace.write_cycles >= 2 and trace.swaps >= 2


def test_trace_counters_equal_summary(tmp_path, sixteen):
    c, plan = sixteen
    trace = run_plan(plan, c, store_for_plan(plan, tmp_path))
    summary = summarize_plan(plan)
    assert trace.kernels == summary.kernels
    assert trace.disk_transfers == summary.disk_transfers
    assert trace.all2alls == pytest.approx(summary.all2alls, abs=1e-12)
    dry = trace_plan(plan)
    assert (dry.kernels, dry.disk_transfers, dry.all2alls) == (trace.kernels, trace.disk_transfers, trace.all2alls)


def test_trace_full_scale_plan():
    t = trace_plan(skeleton_plan(53))
    assert t.disk_transfers == 5 and t.kernels == 120
    assert t.phase("contraction").contraction_flops == 2.0**70


def test_run_plan_rejects_gate_on_global(tmp_path, sixteen):
    c, plan = sixteen
    text = "\n".join(s.text() for s in plan.steps)
    bad = parse_plan(text)
    i = next(i for i, s in enumerate(bad.steps) if s.mode == "slice")
    q = bad.steps[i].args[0]
    j = next(j for j in range(i, len(bad.steps)) if bad.steps[j].mode == "new")
    bad.steps[j].args = [2, q, bad.steps[j].args[2]]
    with pytest.raises((LocalityError, PlanExecutionError)):
        run_plan(bad, c, store_for_plan(bad, tmp_path))
