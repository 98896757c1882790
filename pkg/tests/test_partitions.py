import itertools

import pytest
from hypothesis import given, strategies as st

from ceef.partitions import (
    InvalidOrderError,
    MultiGraph,
    Partition,
    RejectedPartitionError,
    admissible_assignments,
    bell_number,
    check_order,
    enumerate_partitions,
    has_self_loop,
    induce_multigraph,
    normalize_rgs,
)

from oracles import induced_weights, set_partitions

# Bell numbers B_1..B_10 and restricted counts (A000296) for m = 2..12
BELL = [1, 2, 5, 15, 52, 203, 877, 4140, 21147, 115975]
ADMISSIBLE = {2: 1, 3: 1, 4: 4, 5: 11, 6: 41, 7: 162, 8: 715, 9: 3425, 10: 17722}


@pytest.mark.parametrize("m", range(1, 11))
def test_enumeration_count_is_bell(m):
    parts = list(enumerate_partitions(m))
    assert len(parts) == BELL[m - 1] == bell_number(m)
    assert len({p.assignment for p in parts}) == len(parts)


def test_enumeration_order_is_lexicographic():
    seq = [p.assignment for p in enumerate_partitions(5)]
    assert seq == sorted(seq)
    assert seq[0] == (0, 0, 0, 0, 0)
    assert seq[-1] == (0, 1, 2, 3, 4)


def test_single_vertex():
    (p,) = enumerate_partitions(1)
    assert p.blocks == [[1]]


@pytest.mark.parametrize("m", [0, -3])
def test_bad_order(m):
    with pytest.raises(InvalidOrderError):
        list(enumerate_partitions(m))


def test_check_order_bounds():
    check_order(12, minimum=3, maximum=12)
    with pytest.raises(InvalidOrderError):
        check_order(13, minimum=3, maximum=12)
    with pytest.raises(InvalidOrderError):
        check_order(2, minimum=3)


def test_blocks_round_trip():
    p = Partition.from_blocks(5, [[2, 4], [1], [3, 5]])
    assert p.assignment == (0, 1, 2, 1, 2)
    assert p.blocks == [[1], [2, 4], [3, 5]]
    assert p.block_sizes() == [1, 2, 2]
    assert str(p) == "{{1}, {2,4}, {3,5}}"


@pytest.mark.parametrize("bad", [(1, 0), (0, 2, 1), (0, -1)])
def test_partition_rejects_non_rgs(bad):
    with pytest.raises(ValueError):
        Partition(len(bad), bad)


@pytest.mark.parametrize("m", range(2, 9))
def test_self_loop_matches_cycle_adjacency(m):
    for p in enumerate_partitions(m):
        a = p.assignment
        loop = any(a[i] == a[(i + 1) % m] for i in range(m))
        assert has_self_loop(p) == loop


@pytest.mark.parametrize("m", range(2, 11))
def test_admissible_stream_matches_filter(m):
    got = list(admissible_assignments(m))
    assert len(got) == ADMISSIBLE[m]
    if m <= 8:
        want = [p.assignment for p in enumerate_partitions(m) if not has_self_loop(p)]
        assert got == want


def test_admissible_counts_m12():
    assert sum(1 for _ in admissible_assignments(12)) == 580317


def test_induce_four_cycle():
    g = induce_multigraph(Partition(4, (0, 1, 2, 3)))
    assert g.weights == ((0, 1, 0, 1), (1, 0, 1, 0), (0, 1, 0, 1), (1, 0, 1, 0))
    assert g.m == 4


def test_induce_path_with_double_edges():
    g = induce_multigraph(Partition.from_blocks(4, [[1], [2, 4], [3]]))
    assert g.weights == ((0, 2, 0), (2, 0, 2), (0, 2, 0))
    assert g.block_sizes == (1, 2, 1)


def test_induce_single_quadruple_edge():
    g = induce_multigraph(Partition.from_blocks(4, [[1, 3], [2, 4]]))
    assert g.weights == ((0, 4), (4, 0))
    assert g.to_string() == "{4 [1,2]}"


def test_induce_rejects_loop():
    with pytest.raises(RejectedPartitionError):
        induce_multigraph(Partition.from_blocks(4, [[1, 2], [3], [4]]))


@pytest.mark.parametrize("m", range(3, 8))
def test_induced_graph_against_oracle(m):
    for blocks in set_partitions(range(1, m + 1)):
        w = induced_weights(blocks, m)
        p = Partition.from_blocks(m, blocks)
        if w is None:
            assert has_self_loop(p)
            continue
        g = induce_multigraph(p)
        # from_blocks reorders blocks by first element
        order = sorted(range(len(blocks)), key=lambda b: min(blocks[b]))
        assert g.weights == tuple(tuple(w[a][b] for b in order) for a in order)
        assert g.degrees() == [2 * len(blocks[b]) for b in order]


def test_multigraph_validation():
    with pytest.raises(ValueError):
        MultiGraph(((0, 1), (2, 0)))
    with pytest.raises(ValueError):
        MultiGraph(((1, 1), (1, 0)))


@given(st.lists(st.integers(0, 6), min_size=1, max_size=10))
def test_normalize_rgs_is_rgs_and_idempotent(labels):
    a = normalize_rgs(labels)
    Partition(len(a), a)
    assert normalize_rgs(a) == a
    # same blocks
    for i, j in itertools.combinations(range(len(labels)), 2):
        assert (labels[i] == labels[j]) == (a[i] == a[j])
