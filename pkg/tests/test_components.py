import numpy as np
import pytest
from conftest import random_networks
from oracles import ball_sizes
from oracles import components as bfs_components

from callnet import (
    PairStats, build_dcn, build_mcn, component_size_distribution, connected_components, ego_ball,
    giant_component, snowball_growth, union_find_roots,
)
from callnet.components import ComponentPartition


def undirected(edges, kind="mutual"):
    d = {}
    for a, b in edges:
        d[(a, b)] = (1, 1)
        if kind == "mutual":
            d[(b, a)] = (1, 1)
    stats = PairStats.from_dict(d)
    return build_mcn(stats) if kind == "mutual" else build_dcn(stats)


def test_two_triangles():
    net = undirected([("a", "b"), ("b", "c"), ("c", "a"), ("x", "y"), ("y", "z"), ("z", "x")])
    part = connected_components(net)
    assert part.n_components == 2 and sorted(part.sizes.tolist()) == [3, 3]
    assert part.giant_id == 0  # tie broken towards the smallest node index


def test_empty_network():
    net = build_dcn(PairStats.empty())
    part = connected_components(net)
    assert part.n_components == 0
    with pytest.raises(ValueError):
        giant_component(net)


def test_giant_of_5_3_2():
    edges = [("a", "b"), ("b", "c"), ("c", "d"), ("d", "e"), ("f", "g"), ("g", "h"), ("i", "j")]
    gc = giant_component(undirected(edges, "directed"))
    assert gc.n_nodes == 5 and list(gc.labels) == ["a", "b", "c", "d", "e"]


def test_size_histogram():
    part = ComponentPartition(np.zeros(13, dtype=np.int64), np.array([5, 3, 3, 2]))
    assert component_size_distribution(part) == {2: 1, 3: 2}
    assert component_size_distribution(part, exclude_giant=False) == {2: 1, 3: 2, 5: 1}


def test_union_find_matches_bfs_on_random_graphs():
    rng = np.random.default_rng(0)
    for _ in range(20):
        n = int(rng.integers(1, 300))
        m = int(rng.integers(0, n))
        u, v = rng.integers(0, n, m), rng.integers(0, n, m)
        roots = union_find_roots(n, u, v)
        from collections import defaultdict
        nb = defaultdict(set)
        for a, b in zip(u, v):
            nb[a].add(b)
            nb[b].add(a)
        seen = {}
        for s in range(n):
            if s in seen:
                continue
            stack, comp = [s], [s]
            seen[s] = s
            while stack:
                x = stack.pop()
                for y in nb[x]:
                    if y not in seen:
                        seen[y] = s
                        stack.append(y)
                        comp.append(y)
        assert [seen[i] for i in range(n)] == roots.tolist()


@pytest.mark.parametrize("seed", range(6))
def test_partition_matches_oracle(seed):
    _, dcn, mcn = random_networks(seed, 200, 180)
    for net in (dcn, mcn):
        part = connected_components(net)
        got = sorted(sorted(part.members(c).tolist()) for c in range(part.n_components))
        ref = sorted(sorted(c) for c in bfs_components(net))
        assert got == ref
        assert part.sizes.sum() == net.n_nodes


def test_mcn_has_no_singletons():
    _, _, mcn = random_networks(3, 200, 200)
    assert min(component_size_distribution(connected_components(mcn), False)) >= 2


def test_ego_ball_path():
    net = undirected([("A", "B"), ("B", "C")])
    counts, sub = ego_ball(net, "B", 1)
    assert counts.tolist() == [1, 3] and sub.n_nodes == 3
    counts, sub = ego_ball(net, "A", 0)
    assert counts.tolist() == [1] and list(sub.labels) == ["A"]
    with pytest.raises(ValueError):
        ego_ball(net, "Z", 1)


@pytest.mark.parametrize("seed", range(4))
def test_ego_ball_matches_oracle_and_saturates(seed):
    _, dcn, _ = random_networks(seed, 150, 300)
    part = connected_components(dcn)
    for s in range(0, dcn.n_nodes, 17):
        counts, sub = ego_ball(dcn, dcn.labels[s], 25)
        assert counts.tolist() == ball_sizes(dcn, s, 25)
        assert counts[-1] == part.sizes[part.assignment[s]]
        assert sub.n_nodes == counts[-1]


def test_snowball_single_source_equals_ego_ball():
    _, dcn, _ = random_networks(5, 150, 300)
    gc = giant_component(dcn)
    sb = snowball_growth(gc, 1, 8, seed=11)
    counts, _ = ego_ball(gc, sb.sources[0], 8)
    assert sb.curves[0].tolist() == counts.tolist()
    assert snowball_growth(gc, 1, 8, seed=11).sources == sb.sources
    with pytest.raises(ValueError):
        snowball_growth(gc, gc.n_nodes + 1, 3)


def test_snowball_geometric_growth_then_saturation():
    rng = np.random.default_rng(2)
    n = 5000
    d = {}
    for i in range(n):  # ring lattice plus random shortcuts
        for j in (i + 1, i + 2):
            d[(f"v{i:05d}", f"v{j % n:05d}")] = (1, 1)
    for _ in range(n):
        i, j = rng.integers(0, n, 2)
        if i != j:
            d[(f"v{i:05d}", f"v{j:05d}")] = (1, 1)
    net = build_dcn(PairStats.from_dict(d))
    sb = snowball_growth(net, 5, 20, seed=0)
    m = sb.mean
    assert all(m[l + 1] >= 2 * m[l] for l in range(4))
    assert np.all(np.diff(sb.curves, axis=1) >= 0)
    assert np.all(sb.curves[:, -1] == n)
