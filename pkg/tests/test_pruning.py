import numpy as np
import pytest

from ceef.catalog import build_catalog
from ceef.expr import A, ONES, Diag, hadamard, hadamard_v, matmul, matvec
from ceef.partitions import MultiGraph
from ceef.pruning import (
    LMG,
    TYPE_I,
    TYPE_II,
    PruneContractError,
    check_terminal,
    default_lmg,
    find_pendant,
    ifs_factors,
    prune_step,
    prune_to_completion,
    prune_type1,
    prune_type2,
    random_policy,
)

from oracles import graph_full_sum, lmg_full_sum, random_sym

AA = hadamard(A, A)


def _path3():
    # three nodes, double edges 0-1 and 1-2
    return LMG({0: ONES, 1: ONES, 2: ONES}, [(0, 1, A), (0, 1, A), (1, 2, A), (1, 2, A)])


def test_path_prunes_to_squared_hadamard():
    g = prune_type1(_path3(), 2)
    assert g.labels[1] == matvec(AA, ONES)
    g = prune_type1(g, 1)
    assert list(g.labels) == [0]
    assert g.labels[0] == matvec(AA, matvec(AA, ONES))


def test_type1_combines_with_existing_label():
    g = LMG({0: matvec(A, ONES), 1: ONES}, [(0, 1, A)])
    out = prune_type1(g, 1)
    assert out.labels[0] == hadamard_v(matvec(A, ONES), matvec(A, ONES))


def test_type2_plain_and_with_node_label():
    g = LMG({0: ONES, 1: ONES, 2: ONES}, [(0, 1, A), (1, 2, A), (1, 2, A)])
    out = prune_type2(g, 1)
    assert out.edges == [(0, 2, matmul(A, AA))]
    y = matvec(A, ONES)
    g = LMG({0: ONES, 1: y, 2: ONES}, [(0, 1, A), (1, 2, A)])
    out = prune_type2(g, 1)
    assert out.edges == [(0, 2, matmul(A, Diag(y), A))]


def test_type2_respects_orientation():
    # existing oriented edge stored as (2, 1): consumed transposed
    q = matmul(A, AA)
    g = LMG({0: ONES, 1: ONES, 2: ONES}, [(0, 1, A), (2, 1, q)])
    out = prune_type2(g, 1)
    assert out.edges == [(0, 2, matmul(A, AA, A))]
    A5 = random_sym(5, np.random.default_rng(0))
    assert np.isclose(lmg_full_sum(out, A5), lmg_full_sum(g, A5))


def test_contract_violations():
    with pytest.raises(PruneContractError):
        prune_type1(_path3(), 1)
    with pytest.raises(PruneContractError):
        prune_type2(_path3(), 0)
    with pytest.raises(ValueError):
        prune_step(_path3(), 0, 3)


def test_lmg_rejects_self_loop():
    with pytest.raises(ValueError):
        LMG({0: ONES}, [(0, 0, A)])


def test_policy_prefers_type1_then_highest_id():
    assert find_pendant(_path3()) == (2, TYPE_I)
    square = LMG({i: ONES for i in range(4)}, [(0, 1, A), (1, 2, A), (2, 3, A), (0, 3, A)])
    assert find_pendant(square) == (3, TYPE_II)
    k4 = LMG({i: ONES for i in range(4)}, [(i, j, A) for i in range(4) for j in range(i + 1, 4)])
    assert find_pendant(k4) is None


@pytest.mark.parametrize("m", range(3, 9))
def test_every_step_preserves_full_sum(m):
    rng = np.random.default_rng(m)
    A5 = random_sym(5, rng)
    for c in build_catalog(m):
        res = prune_to_completion(c.representative, keep_history=True)
        ref = lmg_full_sum(res.history[0], A5)
        for g in res.history[1:]:
            assert abs(lmg_full_sum(g, A5) - ref) <= 1e-10 * max(1.0, abs(ref))


def test_history_start_is_graph_full_sum():
    A4 = random_sym(4, np.random.default_rng(1))
    w = ((0, 2, 0), (2, 0, 2), (0, 2, 0))
    assert np.isclose(lmg_full_sum(default_lmg(MultiGraph(w)), A4), graph_full_sum(w, A4))


@pytest.mark.parametrize("m", [6, 7, 8])
def test_random_policies_agree_in_value(m):
    A5 = random_sym(5, np.random.default_rng(11))
    for c in build_catalog(m):
        ref = lmg_full_sum(default_lmg(c.representative), A5)
        for seed in range(3):
            res = prune_to_completion(c.representative, random_policy(seed))
            g = res.ifs_graph if not res.is_sea else LMG({0: res.sea_vector}, [])
            assert abs(lmg_full_sum(g, A5) - ref) <= 1e-9 * max(1.0, abs(ref))


@pytest.mark.parametrize("m", range(3, 10))
def test_steps_count_and_terminal_shape(m):
    for c in build_catalog(m):
        res = prune_to_completion(c.representative)
        assert res.steps == c.k - res.layers
        assert check_terminal(res, m) == []


def test_m8_has_one_ifs_term():
    kinds = [prune_to_completion(c.representative) for c in build_catalog(8)]
    ifs = [r for r in kinds if not r.is_sea]
    assert len(ifs) == 1
    layers, nodes, factors = ifs_factors(ifs[0].ifs_graph)
    assert layers == 4 and nodes == ()
    assert [(f.p, f.q, f.expr) for f in factors] == [
        (1, 2, AA), (1, 3, A), (1, 4, A), (2, 3, A), (2, 4, A), (3, 4, AA)
    ]


def test_check_terminal_flags_bad_results():
    res = prune_to_completion(MultiGraph(((0, 1, 1), (1, 0, 1), (1, 1, 0))), policy=lambda g: None)
    assert not res.is_sea
    assert check_terminal(res, 3)
