from importlib import resources

import pytest

from conftest import small_circuit, staircase_half
from sycamore_ooc.plan import (
    ParseError,
    PlanStep,
    emit_plan,
    load_summary,
    parse_plan,
    save_summary,
    summarize_plan,
    validate_plan,
)
from sycamore_ooc.plan.builder import Partition, PlanBuildError, build_plan, check_partition, choose_partition
from sycamore_ooc.plan.skeleton import DEPTHS, skeleton_plan

PLANS = resources.files("sycamore_ooc") / "data" / "plans"


def shipped(n, cycles=20):
    return (PLANS / f"sycamore{n}_c{cycles}.plan").read_text()


@pytest.fixture
def built():
    c = small_circuit(3, 4, 6, 0)
    return c, build_plan(c, first_half=staircase_half(3, 4), defer_layers=2)


def kinds(plan, circuit=None):
    return {v.kind for v in validate_plan(plan, circuit)}


def test_parse_minimal_plan():
    p = parse_plan("define - 4\ndefine - 0 3\nslice - 0\nall2all - 1\nnew cache 2 2 3\ngate 2Q 2 3\nwrite - 0 3\n")
    assert p.n_qubits == 4 and p.disk_qubits == (0, 3)
    assert [s.mode for s in p.body] == ["slice", "all2all", "new", "gate", "write"]
    assert p.steps[4].gate_tag == "cache" and p.steps[4].args == [2, 2, 3]


def test_parse_accepts_dash_variants_and_comments():
    text = "# header\ndefine \u2014 2\ndefine - 0\nslice - 0  # first loop\n"
    p = parse_plan(text)
    assert p.steps[0].gate_tag is None and p.steps[0].comments == ["# header"]
    assert p.steps[2].trailing == "# first loop"


@pytest.mark.parametrize("text,line", [
    ("define - 4\ndefine - 0\nfly - 1\n", 3),
    ("define - 4\ndefine - 0\ngate 2Q 1\n", 3),
    ("define - 4\ndefine - 0\ngate XX 1 2\n", 3),
    ("define - 4\ndefine - 0\nnew cache 3 1 2\n", 3),
    ("define - 4\ndefine - 0\nnew cache 6 0 1 2 3 4 5\n", 3),
    ("define - 4\ndefine - 0\nentgl EI 1 2 3 -4\n", 3),
    ("define - 4\ndefine - 0\nnew tensor 2 1 0 1\n", 3),
    ("define - 4\ndefine - 0\nread - x\n", 3),
    ("slice - 0\n", 1),
    ("define - 4\n", 1),
    ("define - 4\ndefine - 0\ndefine - 1\n", 3),
])
def test_parse_errors_report_line(text, line):
    with pytest.raises(ParseError) as err:
        parse_plan(text)
    assert err.value.line == line


@pytest.mark.parametrize("n", [53, 54])
def test_shipped_plan_round_trip_identity(n):
    text = shipped(n)
    assert emit_plan(parse_plan(text)) == text


def test_emit_then_parse_preserves_steps(built):
    _, plan = built
    again = parse_plan(emit_plan(plan))
    assert [(s.mode, s.gate_tag, s.args) for s in again.steps] == [(s.mode, s.gate_tag, s.args) for s in plan.steps]


def test_built_plan_is_valid(built):
    c, plan = built
    assert validate_plan(plan, c) == []


def test_cache_on_global_qubit_is_locality_violation(built):
    c, plan = built
    i = next(i for i, s in enumerate(plan.steps) if s.mode == "all2all" and s.gate_tag is None)
    g = plan.steps[i].args[0]
    j = next(j for j in range(i, len(plan.steps)) if plan.steps[j].mode == "new")
    plan.steps[j].args = [2, g, plan.steps[j].args[2]]
    assert "locality" in kinds(plan)


def test_gate_on_sliced_qubit_is_locality_violation(built):
    _, plan = built
    i = next(i for i, s in enumerate(plan.steps) if s.mode == "slice")
    q = plan.steps[i].args[0]
    plan.steps.insert(i + 2, PlanStep("new", "cache", [2, q, 5]))
    plan.steps.insert(i + 3, PlanStep("gate", "2Q", [q, 5]))
    assert "locality" in kinds(plan)


def test_read_before_any_write_is_discipline_violation(built):
    _, plan = built
    i = next(i for i, s in enumerate(plan.steps) if s.mode == "slice")
    plan.steps[i] = PlanStep("read", None, plan.steps[i].args)
    assert "discipline" in kinds(plan)


def test_second_slice_is_discipline_violation(built):
    _, plan = built
    i = next(i for i, s in enumerate(plan.steps) if s.mode == "read")
    plan.steps[i] = PlanStep("slice", None, plan.steps[i].args)
    assert "discipline" in kinds(plan)


def test_partial_write_is_discipline_violation(built):
    _, plan = built
    i = next(i for i, s in enumerate(plan.steps) if s.mode == "write")
    plan.steps[i].args = plan.steps[i].args[:-1]
    assert "discipline" in kinds(plan)


def test_gate_out_of_order_is_detected(built):
    c, plan = built
    a, b = next((i, i + 1) for i, s in enumerate(plan.steps[:-1])
                if s.mode == "gate" == plan.steps[i + 1].mode and set(s.args) & set(plan.steps[i + 1].args))
    plan.steps[a], plan.steps[b] = plan.steps[b], plan.steps[a]
    assert "order" in kinds(plan, c)


def test_gate_outside_cache_is_structure_violation(built):
    _, plan = built
    i = next(i for i, s in enumerate(plan.steps) if s.mode == "all2all" and s.gate_tag is None)
    plan.steps.insert(i + 1, PlanStep("gate", "2Q", [4, 5]))
    assert "structure" in kinds(plan)


def test_unmatched_entanglement_pair(built):
    _, plan = built
    i = next(i for i, s in enumerate(plan.steps) if s.gate_tag == "E2Q")
    del plan.steps[i]
    assert "entanglement" in kinds(plan)


@pytest.mark.parametrize("n,cycles", [(n, d) for n in (53, 54) for d in DEPTHS])
def test_skeleton_plans_validate(n, cycles):
    assert validate_plan(skeleton_plan(n, cycles)) == []


def test_summary_53_qubits_20_cycles():
    s = summarize_plan(parse_plan(shipped(53)))
    assert s.slice_count == 256 and s.disk_transfers == 5 and s.kernels == 120 and s.gates == 430
    assert s.all2alls == pytest.approx(9 + 2 * 2.0 ** (43 - 53), abs=1e-12)
    rows = {p.name: p for p in s}
    assert (rows["1"].kernels, rows["1"].gates, rows["2"].kernels, rows["2"].gates) == (28, 84, 25, 84)
    assert (rows["3.3"].kernels, rows["3.3"].gates, rows["5.6"].kernels, rows["5.6"].gates) == (16, 63, 7, 21)
    assert rows["contraction"].entanglement_bits == 14
    assert rows["contraction"].gate_flops == 2.0**70


def test_summary_54_qubits_20_cycles():
    s = summarize_plan(parse_plan(shipped(54)))
    assert s.slice_count == 512 and s.disk_transfers == 5 and s.kernels == 122
    assert {p.name: p for p in s}["contraction"].entanglement_bits == 16


def test_summary_depth_10_has_one_disk_loop():
    s = summarize_plan(skeleton_plan(53, 10))
    assert s.disk_transfers == 1 and s.all2alls == pytest.approx(3.002, abs=1e-3) and s.kernels == 65


def test_summary_counts_nondecreasing_in_depth():
    for n in (53, 54):
        sums = [summarize_plan(skeleton_plan(n, d)) for d in DEPTHS]
        for a, b in zip(sums, sums[1:]):
            assert a.kernels <= b.kernels and a.disk_transfers <= b.disk_transfers and a.all2alls <= b.all2alls


def test_summary_file_round_trip(tmp_path):
    s = summarize_plan(skeleton_plan(53))
    save_summary(s, tmp_path / "s.json")
    assert load_summary(tmp_path / "s.json") == s


def test_skeleton_plan_rejects_unknown_sizes():
    with pytest.raises(ValueError):
        skeleton_plan(52)
    with pytest.raises(ValueError):
        skeleton_plan(53, 12)


def test_choose_partition_is_uncoupled():
    c = small_circuit(4, 4, 8, 0)
    part = choose_partition(c)
    check_partition(c, part)
    assert len(part.disk) == 4


def test_check_partition_rejects_coupled_slices():
    c = small_circuit(3, 4, 6, 0)
    with pytest.raises(PlanBuildError):
        check_partition(c, Partition((0,), (1,), ((5,), (10,))))


def test_build_plan_needs_merged_circuit():
    with pytest.raises(PlanBuildError):
        build_plan(small_circuit(3, 4, 4, 0, merged=False))


def test_build_plan_deferral_count(built):
    _, plan = built
    ei = [s for s in plan.steps if s.gate_tag == "EI"]
    contraction = next(s for s in plan.steps if s.mode == "entgl" and s.gate_tag == "tensor")
    assert len(contraction.args) == 2 * len(ei) == 4
