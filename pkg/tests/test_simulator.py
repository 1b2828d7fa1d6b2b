import copy

import numpy as np
import pytest

from tetracomm import steiner
from tetracomm.cli import fixtures_dir
from tetracomm.partition import build_partition, vector_layout
from tetracomm.simulator import compute_report, simulate, verify_run
from tetracomm.tensor_core import random_symmetric, random_vector, sttsv_symmetric, ternary_count


@pytest.fixture(scope="module")
def setup_q2():
    part = build_partition(steiner.construct_spherical(2))
    return part, vector_layout(30, part)


@pytest.fixture(scope="module")
def setup_q3():
    part = build_partition(steiner.construct_spherical(3))
    return part, vector_layout(120, part)


@pytest.fixture(scope="module")
def setup_appendix():
    part = build_partition(steiner.load(fixtures_dir() / "steiner_8_4_3.txt"))
    return part, vector_layout(56, part)


# ---------------------------------------------------------------------------
# output correctness
# ---------------------------------------------------------------------------


def test_q2_p2p_matches_sequential(setup_q2):
    part, layout = setup_q2
    tensor = random_symmetric(30, 11)
    x = random_vector(30, 12)
    y, report = simulate(tensor, x, part, layout, "p2p")
    ref = sttsv_symmetric(tensor, x)
    assert np.linalg.norm(y - ref) <= 1e-12 * np.linalg.norm(ref)
    assert all(report.verdicts.values())


def test_q2_exact_volumes_and_steps(setup_q2):
    part, layout = setup_q2
    tensor = random_symmetric(30, 11)
    x = random_vector(30, 12)
    _, report = simulate(tensor, x, part, layout, "p2p")
    for c in report.per_proc:
        assert c.sent_x == 15 and c.sent_y == 15
        assert c.words_sent == 30
        assert c.received_x == 15 and c.received_y == 15
    assert report.steps_per_vector == 9
    assert report.max_volume == 30


def test_q3_exact_volumes_and_steps(setup_q3):
    part, layout = setup_q3
    tensor = random_symmetric(120, 5)
    x = random_vector(120, 6)
    y, report = simulate(tensor, x, part, layout, "p2p")
    ref = sttsv_symmetric(tensor, x)
    assert np.linalg.norm(y - ref) <= 1e-12 * np.linalg.norm(ref)
    assert report.steps_per_vector == 26
    for c in report.per_proc:
        assert c.sent_x == 44 and c.sent_y == 44
    assert report.total_ternary == ternary_count(120) == 871200


def test_alltoall_volumes(setup_q2):
    part, layout = setup_q2
    tensor = random_symmetric(30, 3)
    x = random_vector(30, 4)
    y, report = simulate(tensor, x, part, layout, "alltoall")
    ref = sttsv_symmetric(tensor, x)
    assert np.linalg.norm(y - ref) <= 1e-12 * np.linalg.norm(ref)
    assert report.steps_per_vector == part.P - 1
    for c in report.per_proc:
        assert c.sent_x == 18 and c.sent_y == 18


def test_appendix_design_simulates_correctly(setup_appendix):
    part, layout = setup_appendix
    tensor = random_symmetric(56, 8)
    x = random_vector(56, 9)
    verdict = verify_run(tensor, x, part, layout, "p2p")
    assert verdict.all_passed, [c.name for c in verdict.checks if not c.passed]
    assert verdict.report.steps_per_vector == 12


def test_chunk_two_layout(setup_q2):
    part, _ = setup_q2
    layout = vector_layout(60, part)
    assert layout.chunk == 2
    tensor = random_symmetric(60, 13)
    x = random_vector(60, 14)
    verdict = verify_run(tensor, x, part, layout, "p2p")
    assert verdict.all_passed
    for c in verdict.report.per_proc:
        assert c.sent_x == 30  # 15 shared chunks of 2 words


def test_larger_dimension_chunked(setup_q2):
    part, _ = setup_q2
    layout = vector_layout(180, part)
    assert layout.chunk == 6
    tensor = random_symmetric(180, 31)
    x = random_vector(180, 32)
    y, report = simulate(tensor, x, part, layout, "p2p")
    ref = sttsv_symmetric(tensor, x)
    assert np.linalg.norm(y - ref) <= 1e-12 * np.linalg.norm(ref)
    assert report.total_ternary == ternary_count(180)
    for c in report.per_proc:
        assert c.sent_x == 15 * 6  # shared chunk count times chunk words


def test_conservation(setup_q2):
    part, layout = setup_q2
    _, report = simulate(random_symmetric(30, 1), random_vector(30, 2), part, layout, "p2p")
    assert report.total_sent == report.total_received
    assert report.verdicts["conservation"]


def test_simulate_input_validation(setup_q2):
    part, layout = setup_q2
    tensor = random_symmetric(30, 1)
    with pytest.raises(ValueError):
        simulate(tensor, random_vector(30, 2), part, layout, "broadcast")
    with pytest.raises(ValueError):
        simulate(random_symmetric(25, 1), random_vector(30, 2), part, layout, "p2p")
    with pytest.raises(ValueError):
        simulate(tensor, random_vector(25, 2), part, layout, "p2p")


# ---------------------------------------------------------------------------
# predicted costs
# ---------------------------------------------------------------------------


def test_predicted_ternary_counts_q3(setup_q3):
    part, layout = setup_q3
    pred = compute_report(part, layout)
    # b = 12: per-block counts evaluated directly from the per-kind formulas
    b = 12
    t_off = 3 * b**3
    t_nc = 3 * b * b * (b - 1) // 2 + 2 * b * b
    t_ce = b * (b - 1) * (b - 2) // 2 + 2 * b * (b - 1) + b
    assert 4 * t_off + 3 * t_nc + t_ce == 29664
    assert 4 * t_off + 3 * t_nc == 28728
    for c in pred.per_proc:
        expected = 29664 if part.D[c.p - 1] else 28728
        assert c.ternary_mults == expected
    assert pred.total_ternary == ternary_count(120)


def test_predicted_ternary_counts_q2(setup_q2):
    part, layout = setup_q2
    pred = compute_report(part, layout)
    for c in pred.per_proc:
        expected = 1458 if part.D[c.p - 1] else 1332
        assert c.ternary_mults == expected
    assert pred.total_ternary == ternary_count(30) == 13950


def test_predicted_volumes_match_closed_form(setup_q3):
    part, layout = setup_q3
    pred = compute_report(part, layout)
    q, P, n = part.q, part.P, layout.n
    expected = n * (q + 1) // (q * q + 1) - n // P
    assert all(c.send_words_per_vector == expected == 44 for c in pred.per_proc)
    assert pred.alltoall_per_vector == 58


def test_measured_equals_predicted_everywhere(setup_q3):
    part, layout = setup_q3
    tensor = random_symmetric(120, 17)
    x = random_vector(120, 18)
    _, report = simulate(tensor, x, part, layout, "p2p")
    pred = compute_report(part, layout)
    for c, pc in zip(report.per_proc, pred.per_proc):
        assert c.ternary_mults == pc.ternary_mults
        assert c.tensor_elems == pc.tensor_elems
        assert c.sent_x == pc.send_words_per_vector


# ---------------------------------------------------------------------------
# verification driver
# ---------------------------------------------------------------------------


@pytest.mark.parametrize("mode", ["p2p", "alltoall"])
def test_verify_run_passes(setup_q2, mode):
    part, layout = setup_q2
    verdict = verify_run(random_symmetric(30, 11), random_vector(30, 12), part, layout, mode)
    assert verdict.all_passed, [c.name for c in verdict.checks if not c.passed]


def test_verify_run_detects_moved_block(setup_q2):
    part, layout = setup_q2
    bad = copy.deepcopy(part)
    moved = bad.N[0].pop()
    bad.N[1].append(moved)
    verdict = verify_run(random_symmetric(30, 11), random_vector(30, 12), bad, layout)
    assert not verdict.all_passed
    assert not verdict.check("partition_invariants").passed


def test_verify_run_detects_duplicated_block(setup_q2):
    part, layout = setup_q2
    bad = copy.deepcopy(part)
    bad.N[0].append(bad.N[1][0])
    verdict = verify_run(random_symmetric(30, 11), random_vector(30, 12), bad, layout)
    assert not verdict.all_passed


def test_report_json_schema(setup_q2):
    part, layout = setup_q2
    _, report = simulate(random_symmetric(30, 1), random_vector(30, 2), part, layout, "p2p")
    obj = report.to_json_obj()
    assert set(obj) == {"per_processor", "global"}
    row = obj["per_processor"][0]
    assert set(row) == {"id", "words_sent", "words_received", "ternary_mults", "tensor_elems"}
    assert {"max_volume", "steps_per_vector", "mode", "verdicts"} <= set(obj["global"])


def test_reduction_deterministic(setup_q2):
    part, layout = setup_q2
    tensor = random_symmetric(30, 7)
    x = random_vector(30, 8)
    y1, _ = simulate(tensor, x, part, layout, "p2p")
    y2, _ = simulate(tensor, x, part, layout, "p2p")
    assert np.array_equal(y1, y2)
