import numpy as np
import pytest
from oracles import random_pair_dict

from callnet import DIRECTED, MUTUAL, CallNetwork, PairStats, build_dcn, build_mcn, unreciprocated_fraction


def test_dcn_from_example(toy_stats):
    dcn = build_dcn(PairStats.from_dict({("A", "B"): (2, 90), ("B", "A"): (1, 10)}))
    assert dcn.kind == DIRECTED and dcn.n_nodes == 2 and dcn.n_edges == 2


def test_dcn_single_edge():
    dcn = build_dcn(PairStats.from_dict({("A", "B"): (5, 100)}))
    assert dcn.edge_dict() == {("A", "B"): (5, 100)}


def test_dcn_empty():
    dcn = build_dcn(PairStats.empty())
    assert dcn.n_nodes == 0 and dcn.n_edges == 0


def test_mcn_reciprocity_rule(toy_stats):
    mcn = build_mcn(toy_stats)
    assert mcn.kind == MUTUAL
    assert list(mcn.labels) == ["A", "B"]
    assert mcn.edge_dict() == {("A", "B"): (2, 1, 90, 10)}
    assert mcn.w_number.tolist() == [3] and mcn.w_duration.tolist() == [100]


def test_mcn_empty_without_reciprocity():
    mcn = build_mcn(PairStats.from_dict({("A", "B"): (1, 1), ("C", "A"): (1, 1)}))
    assert mcn.n_edges == 0 and mcn.n_nodes == 0


@pytest.mark.parametrize("seed", range(5))
def test_against_enumeration(seed):
    d = random_pair_dict(np.random.default_rng(seed), 80, 300)
    stats = PairStats.from_dict(d)
    dcn, mcn = build_dcn(stats), build_mcn(stats)
    assert dcn.n_edges == len(d)
    assert dcn.edge_dict() == d
    mutual = {}
    for (i, j), (c, t) in d.items():
        if i < j and (j, i) in d:
            c2, t2 = d[(j, i)]
            mutual[(i, j)] = (c, c2, t, t2)
    assert mcn.edge_dict() == mutual
    assert set(mcn.labels) == {x for e in mutual for x in e}
    lacking = sum(1 for (i, j) in d if (j, i) not in d)
    assert unreciprocated_fraction(stats) == lacking / len(d)


def test_undirected_view_merges_reciprocal(toy_stats):
    dcn = build_dcn(toy_stats)
    u, v, wn, wd = dcn.undirected
    lab = dcn.labels
    got = {(lab[a], lab[b]): (int(x), int(y)) for a, b, x, y in zip(u, v, wn, wd)}
    assert got == {("A", "B"): (3, 100), ("A", "C"): (4, 50)}
    adj = dcn.adjacency("number").toarray()
    assert np.array_equal(adj, adj.T) and adj[0, 1] == 3


def test_subnetworks(toy_stats):
    dcn = build_dcn(toy_stats)
    sub = dcn.edge_subnetwork(dcn.src == dcn.index_of("A"))
    assert sub.edge_dict() == {("A", "B"): (2, 90), ("A", "C"): (4, 50)}
    ind = dcn.induced_subnetwork(np.array([True, False, True]))
    assert list(ind.labels) == ["A", "C"] and ind.n_edges == 1


def test_network_invariants_checked():
    z = np.array([0])
    with pytest.raises(ValueError):
        CallNetwork(MUTUAL, np.array(["a", "b"], dtype=object), np.array([1]), z, z + 1, z, z + 1, z)
