from collections import Counter
from math import comb

import pytest

from tetracomm import steiner
from tetracomm.cli import fixtures_dir
from tetracomm.partition import (
    BlockIndex,
    all_lower_blocks,
    build_partition,
    noncentral_blocks,
    pad_dimension,
    storage_count,
    tb3,
    validate_partition,
    vector_layout,
)


@pytest.fixture(scope="module")
def part_q2():
    return build_partition(steiner.construct_spherical(2))


@pytest.fixture(scope="module")
def part_q3():
    return build_partition(steiner.construct_spherical(3))


@pytest.fixture(scope="module")
def part_fixture_10():
    return build_partition(steiner.load(fixtures_dir() / "steiner_10_4_3.txt"))


@pytest.fixture(scope="module")
def part_fixture_8():
    return build_partition(steiner.load(fixtures_dir() / "steiner_8_4_3.txt"))


# ---------------------------------------------------------------------------
# tetrahedral blocks
# ---------------------------------------------------------------------------


def test_tb3_example_four_indices():
    assert tb3({1, 4, 6, 8}) == {
        BlockIndex(6, 4, 1),
        BlockIndex(8, 4, 1),
        BlockIndex(8, 6, 1),
        BlockIndex(8, 6, 4),
    }


def test_tb3_single_triple():
    assert tb3({1, 2, 3}) == {BlockIndex(3, 2, 1)}


def test_tb3_second_example():
    assert tb3({1, 2, 6, 10}) == {
        BlockIndex(6, 2, 1),
        BlockIndex(10, 2, 1),
        BlockIndex(10, 6, 1),
        BlockIndex(10, 6, 2),
    }


def test_tb3_size_is_binomial():
    assert len(tb3(range(1, 8))) == comb(7, 3)


def test_block_kinds():
    assert BlockIndex(3, 2, 1).kind == "off"
    assert BlockIndex(3, 3, 1).kind == "noncentral"
    assert BlockIndex(3, 1, 1).kind == "noncentral"
    assert BlockIndex(2, 2, 2).kind == "central"


def test_block_census():
    m = 10
    blocks = list(all_lower_blocks(m))
    assert len(blocks) == m * (m + 1) * (m + 2) // 6
    kinds = Counter(b.kind for b in blocks)
    assert kinds["off"] == comb(m, 3)
    assert kinds["noncentral"] == m * (m - 1)
    assert kinds["central"] == m
    assert len(noncentral_blocks(m)) == m * (m - 1)


# ---------------------------------------------------------------------------
# partition construction
# ---------------------------------------------------------------------------


def exact_partition_ok(part):
    counts = Counter()
    for p in range(1, part.P + 1):
        counts.update(tb3(part.R[p - 1]))
        counts.update(part.N[p - 1])
        counts.update(part.D[p - 1])
    return counts == Counter(all_lower_blocks(part.m))


def locality_ok(part):
    for p in range(1, part.P + 1):
        owned = set(part.R[p - 1])
        for blk in list(part.N[p - 1]) + list(part.D[p - 1]):
            if not set(blk) <= owned:
                return False
    return True


@pytest.mark.parametrize("fixture_name", ["part_q2", "part_q3", "part_fixture_8"])
def test_partition_exact_and_local(fixture_name, request):
    part = request.getfixturevalue(fixture_name)
    assert exact_partition_ok(part)
    assert locality_ok(part)
    assert validate_partition(part) == []


def test_q3_shape(part_q3):
    assert part_q3.P == 30 and part_q3.m == 10 and part_q3.q == 3
    assert all(len(tb3(r)) == 4 for r in part_q3.R)
    assert all(len(n) == 3 for n in part_q3.N)
    assert sum(1 for d in part_q3.D if d) == 10


def test_q2_shape(part_q2):
    assert part_q2.P == 10 and part_q2.q == 2
    assert all(len(tb3(r)) == 1 for r in part_q2.R)
    assert all(len(n) == 2 for n in part_q2.N)
    assert sum(1 for d in part_q2.D if d) == 5


def test_fixture_8_shape(part_fixture_8):
    assert part_fixture_8.P == 14 and part_fixture_8.q is None
    assert all(len(n) == 4 for n in part_fixture_8.N)
    assert sum(1 for d in part_fixture_8.D if d) == 8


def test_fixture_10_row_block_sets(part_fixture_10):
    assert part_fixture_10.Q[2] == (1, 5, 6, 7, 13, 14, 15, 21, 22, 23, 24, 25)
    assert all(len(q) == 12 for q in part_fixture_10.Q)


def test_group_size_matches_counting_rule(part_q3, part_fixture_8):
    for part in (part_q3, part_fixture_8):
        m, r = part.m, part.r
        assert part.group_size == (m - 1) * (m - 2) // ((r - 1) * (r - 2))


def test_build_deterministic():
    system = steiner.construct_spherical(2)
    a = build_partition(system)
    b = build_partition(system)
    assert a.N == b.N and a.D == b.D and a.Q == b.Q


def test_validate_detects_corruption(part_q3):
    import copy

    bad = copy.deepcopy(part_q3)
    moved = bad.N[0].pop()
    bad.N[1].append(moved)
    problems = validate_partition(bad)
    assert problems  # locality and/or balance violations reported


# ---------------------------------------------------------------------------
# vector layout and padding
# ---------------------------------------------------------------------------


def test_layout_q2_n30(part_q2):
    lay = vector_layout(30, part_q2)
    assert (lay.b, lay.chunk) == (6, 1)
    for p in range(1, 11):
        owned = sum(
            hi - lo for (i, pp), (lo, hi) in lay.ranges.items() if pp == p
        )
        assert owned == 3  # n / P


def test_layout_q3_values(part_q3):
    assert vector_layout(120, part_q3).chunk == 1
    assert vector_layout(120, part_q3).b == 12
    assert vector_layout(240, part_q3).chunk == 2


def test_layout_chunks_tile_each_row_block(part_q3):
    lay = vector_layout(120, part_q3)
    for i in range(1, 11):
        spans = sorted(lay.chunk_range(i, p) for p in part_q3.Q[i - 1])
        assert spans[0][0] == (i - 1) * lay.b
        assert spans[-1][1] == i * lay.b
        for (lo1, hi1), (lo2, _) in zip(spans, spans[1:]):
            assert hi1 == lo2


def test_layout_divisibility_error_names_padding(part_q3):
    with pytest.raises(ValueError) as err:
        vector_layout(100, part_q3)
    assert "120" in str(err.value)


@pytest.mark.parametrize(
    "n,fixture_name,expected",
    [(100, "part_q3", 120), (120, "part_q3", 120), (29, "part_q2", 30), (1, "part_q2", 30)],
)
def test_pad_dimension(n, fixture_name, expected, request):
    assert pad_dimension(n, request.getfixturevalue(fixture_name)) == expected


# ---------------------------------------------------------------------------
# storage counts
# ---------------------------------------------------------------------------


def test_storage_counts_q3(part_q3):
    # direct evaluation of the per-block-kind element counts at b = 12
    with_central = 4 * 12**3 + 3 * (144 * 13 // 2) + (12 * 13 * 14 // 6)
    without_central = 4 * 12**3 + 3 * (144 * 13 // 2)
    assert with_central == 10084 and without_central == 9720
    for p in range(1, 31):
        expected = with_central if part_q3.D[p - 1] else without_central
        assert storage_count(part_q3, 120, p) == expected


def test_storage_counts_q2(part_q2):
    for p in range(1, 11):
        expected = 524 if part_q2.D[p - 1] else 468
        assert storage_count(part_q2, 30, p) == expected


@pytest.mark.parametrize(
    "fixture_name,n",
    [("part_q2", 30), ("part_q3", 120), ("part_fixture_8", 56)],
)
def test_storage_sums_to_total_lower_tetrahedron(fixture_name, n, request):
    part = request.getfixturevalue(fixture_name)
    total = sum(storage_count(part, n, p) for p in range(1, part.P + 1))
    assert total == n * (n + 1) * (n + 2) // 6
