"""Connected components, giant component and ego-network growth.

Connectivity ignores edge direction. Labelling uses a vectorised union-find:
every round hooks the larger root of each edge under the smaller one and then
compresses paths by pointer jumping until each node points at its root. The
root of a component ends up being its smallest node index, which gives a
canonical, partition-independent labelling.
"""
from __future__ import annotations

from collections import Counter
from dataclasses import dataclass

import numpy as np

from .netbuild import CallNetwork

__all__ = [
    "ComponentPartition",
    "union_find_roots",
    "connected_components",
    "giant_component",
    "component_size_distribution",
    "ego_ball",
    "snowball_growth",
]


def union_find_roots(n: int, u, v) -> np.ndarray:
    """Root (smallest member) of each node's component for edges ``u[k]-v[k]``."""
    parent = np.arange(n, dtype=np.int64)
    u = np.asarray(u, dtype=np.int64)
    v = np.asarray(v, dtype=np.int64)
    while True:
        pu, pv = parent[u], parent[v]
        diff = pu != pv
        if not diff.any():
            break
        lo = np.minimum(pu[diff], pv[diff])
        hi = np.maximum(pu[diff], pv[diff])
        # hi is a root after the previous compression; hook it under its smallest partner
        np.minimum.at(parent, hi, lo)
        while True:
            grand = parent[parent]
            if np.array_equal(grand, parent):
                break
            parent = grand
        u, v = u[diff], v[diff]
    return parent


@dataclass
class ComponentPartition:
    """Component id per node plus component sizes.

    Ids are ordered by each component's smallest node index.
    """

    assignment: np.ndarray
    sizes: np.ndarray

    @property
    def n_components(self) -> int:
        return len(self.sizes)

    @property
    def giant_id(self) -> int:
        if len(self.sizes) == 0:
            raise ValueError("empty partition has no giant component")
        return int(np.argmax(self.sizes))  # first maximum: smallest id wins ties

    def members(self, cid: int) -> np.ndarray:
        return np.flatnonzero(self.assignment == cid)


def connected_components(net: CallNetwork) -> ComponentPartition:
    """Weakly connected components of ``net``."""
    roots = union_find_roots(net.n_nodes, net.src, net.dst)
    uniq, assignment = np.unique(roots, return_inverse=True)
    sizes = np.bincount(assignment, minlength=len(uniq))
    return ComponentPartition(assignment.astype(np.int64), sizes)


def giant_component(net: CallNetwork, partition: ComponentPartition | None = None) -> CallNetwork:
    """Subnetwork induced by the largest component (kind and weights preserved)."""
    if net.n_nodes == 0:
        raise ValueError("empty network has no giant component")
    partition = partition or connected_components(net)
    return net.induced_subnetwork(partition.assignment == partition.giant_id)


def component_size_distribution(partition: ComponentPartition, exclude_giant: bool = True) -> dict:
    """``{size: number of components}``, sorted by size.

    The giant component is left out by default.
    """
    sizes = partition.sizes
    if exclude_giant and len(sizes):
        sizes = np.delete(sizes, partition.giant_id)
    return dict(sorted(Counter(int(s) for s in sizes).items()))


def _bfs_layers(adj, source: int, max_distance: int):
    n = adj.shape[0]
    dist = np.full(n, -1, dtype=np.int64)
    dist[source] = 0
    frontier = np.array([source], dtype=np.int64)
    counts = [1]
    indptr, indices = adj.indptr, adj.indices
    for level in range(1, max_distance + 1):
        if frontier.size:
            starts, ends = indptr[frontier], indptr[frontier + 1]
            lens = ends - starts
            idx = np.repeat(starts - np.r_[0, np.cumsum(lens)[:-1]], lens) + np.arange(lens.sum())
            nbrs = np.unique(indices[idx])
            nbrs = nbrs[dist[nbrs] < 0]
            dist[nbrs] = level
            frontier = nbrs
        counts.append(counts[-1] + int(frontier.size))
    return np.array(counts, dtype=np.int64), dist


def ego_ball(net: CallNetwork, source, max_distance: int):
    """Nodes within ``max_distance`` hops of ``source``, direction ignored.

    ``source`` is a node label. Returns ``(counts, subnetwork)`` where
    ``counts[l]`` is the number of nodes at distance at most ``l`` for
    ``l = 0..max_distance``, and ``subnetwork`` is the induced ego network.
    """
    try:
        s = net.index_of(source)
    except KeyError:
        raise ValueError(f"unknown source node {source!r}") from None
    if max_distance < 0:
        raise ValueError("max_distance must be >= 0")
    counts, dist = _bfs_layers(net.adjacency(), s, max_distance)
    return counts, net.induced_subnetwork(dist >= 0)


@dataclass
class SnowballCurves:
    sources: list
    curves: np.ndarray  # one row per source, column l = distance

    @property
    def mean(self) -> np.ndarray:
        return self.curves.mean(axis=0)


def snowball_growth(net: CallNetwork, n_sources: int, max_distance: int,
                    seed: int = 0) -> SnowballCurves:
    """Ego-ball sizes for sources drawn without replacement from the giant component."""
    if n_sources < 1:
        raise ValueError("n_sources must be >= 1")
    part = connected_components(net)
    giant = part.members(part.giant_id)
    if n_sources > len(giant):
        raise ValueError("more sources requested than nodes in the giant component")
    rng = np.random.default_rng(seed)
    chosen = rng.choice(giant, size=n_sources, replace=False)
    adj = net.adjacency()
    curves = np.vstack([_bfs_layers(adj, int(s), max_distance)[0] for s in chosen])
    return SnowballCurves([net.labels[s] for s in chosen], curves)
