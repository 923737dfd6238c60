"""Directed and mutual calling networks.

A :class:`CallNetwork` stores nodes as a sorted label array and edges as
parallel integer arrays indexing into it. Edges are kept sorted by
(source, target) code, which is also lexicographic label order.

* directed: edge ``i -> j`` with call count ``a`` and total duration ``d``.
* mutual: edge ``{i, j}`` with ``i < j`` and both directional breakdowns
  ``a_ij, a_ji, d_ij, d_ji`` (each ``a >= 1``).
"""
from __future__ import annotations

from functools import cached_property

import numpy as np
import scipy.sparse as sp

from .ingest import PairStats

__all__ = ["CallNetwork", "build_dcn", "build_mcn", "DIRECTED", "MUTUAL"]

DIRECTED = "directed"
MUTUAL = "mutual"


class CallNetwork:
    """Immutable calling network; see the module docstring for the layout."""

    def __init__(self, kind, labels, src, dst, a, d, a_rev=None, d_rev=None):
        if kind not in (DIRECTED, MUTUAL):
            raise ValueError(f"unknown network kind {kind!r}")
        self.kind = kind
        self.labels = np.asarray(labels, dtype=object)
        self.src = np.asarray(src, dtype=np.int64)
        self.dst = np.asarray(dst, dtype=np.int64)
        self.a = np.asarray(a, dtype=np.int64)
        self.d = np.asarray(d, dtype=np.int64)
        if kind == MUTUAL:
            if a_rev is None or d_rev is None:
                raise ValueError("mutual networks need both directional breakdowns")
            self.a_rev = np.asarray(a_rev, dtype=np.int64)
            self.d_rev = np.asarray(d_rev, dtype=np.int64)
            if np.any(self.src >= self.dst):
                raise ValueError("mutual edges must be stored with src < dst")
            if np.any(self.a < 1) or np.any(self.a_rev < 1):
                raise ValueError("mutual edges need calls in both directions")
        else:
            self.a_rev = self.d_rev = None
            if np.any(self.src == self.dst):
                raise ValueError("self-loops are not allowed")
        for arr in (self.src, self.dst):
            if len(arr) and (arr.min() < 0 or arr.max() >= len(self.labels)):
                raise ValueError("edge endpoint outside the node set")

    # -- sizes -----------------------------------------------------------
    @property
    def n_nodes(self) -> int:
        return len(self.labels)

    @property
    def n_edges(self) -> int:
        return len(self.src)

    @property
    def directed(self) -> bool:
        return self.kind == DIRECTED

    def __repr__(self):
        return f"CallNetwork({self.kind}, {self.n_nodes} nodes, {self.n_edges} edges)"

    def __eq__(self, other):
        if not isinstance(other, CallNetwork):
            return NotImplemented
        same = (self.kind == other.kind and np.array_equal(self.labels, other.labels)
                and all(np.array_equal(x, y) for x, y in
                        zip(self._arrays(), other._arrays())))
        return same

    def _arrays(self):
        base = [self.src, self.dst, self.a, self.d]
        if self.kind == MUTUAL:
            base += [self.a_rev, self.d_rev]
        return base

    # -- weights ---------------------------------------------------------
    @property
    def w_number(self) -> np.ndarray:
        """Per-edge call count (both directions summed for mutual edges)."""
        return self.a + self.a_rev if self.kind == MUTUAL else self.a

    @property
    def w_duration(self) -> np.ndarray:
        return self.d + self.d_rev if self.kind == MUTUAL else self.d

    @property
    def total_calls(self) -> int:
        return int(self.w_number.sum())

    def edge_dict(self) -> dict:
        """``{(i, j): weights}`` keyed by labels; handy for small graphs and tests."""
        lab = self.labels
        if self.kind == DIRECTED:
            return {(lab[s], lab[t]): (int(a), int(d))
                    for s, t, a, d in zip(self.src, self.dst, self.a, self.d)}
        return {(lab[s], lab[t]): (int(a), int(b), int(c), int(e))
                for s, t, a, b, c, e in zip(self.src, self.dst, self.a, self.a_rev,
                                            self.d, self.d_rev)}

    # -- undirected view ---------------------------------------------------
    @cached_property
    def undirected(self):
        """Simple undirected view ``(u, v, w_number, w_duration)`` with ``u < v``.

        Reciprocal directed edges merge into one, their weights summed.
        """
        if self.kind == MUTUAL:
            return self.src, self.dst, self.w_number, self.w_duration
        n = self.n_nodes
        u = np.minimum(self.src, self.dst)
        v = np.maximum(self.src, self.dst)
        keys = u * n + v
        order = np.argsort(keys, kind="stable")
        keys = keys[order]
        if len(keys) == 0:
            z = np.zeros(0, dtype=np.int64)
            return z, z, z, z
        starts = np.flatnonzero(np.r_[True, keys[1:] != keys[:-1]])
        uk = keys[starts]
        wn = np.add.reduceat(self.a[order], starts)
        wd = np.add.reduceat(self.d[order], starts)
        return uk // n, uk % n, wn, wd

    @property
    def n_undirected_edges(self) -> int:
        return len(self.undirected[0])

    def adjacency(self, weight: str | None = None) -> sp.csr_matrix:
        """Symmetric CSR adjacency of the undirected view.

        ``weight`` is None (0/1 entries), ``"number"`` or ``"duration"``.
        """
        u, v, wn, wd = self.undirected
        if weight is None:
            w = np.ones(len(u), dtype=np.float64)
        elif weight == "number":
            w = wn.astype(np.float64)
        elif weight == "duration":
            w = wd.astype(np.float64)
        else:
            raise ValueError(f"unknown weight kind {weight!r}")
        n = self.n_nodes
        m = sp.coo_matrix((np.r_[w, w], (np.r_[u, v], np.r_[v, u])), shape=(n, n))
        m = m.tocsr()
        m.sort_indices()
        return m

    @cached_property
    def _csr_structure(self):
        return self.adjacency()

    def neighbors(self, node: int) -> np.ndarray:
        m = self._csr_structure
        return m.indices[m.indptr[node]:m.indptr[node + 1]]

    def index_of(self, label) -> int:
        k = int(np.searchsorted(self.labels, label))
        if k >= self.n_nodes or self.labels[k] != label:
            raise KeyError(label)
        return k

    # -- subgraphs -------------------------------------------------------
    def _rebuild(self, edge_mask, node_keep=None):
        """Keep edges in ``edge_mask``; keep ``node_keep`` nodes, or drop isolates."""
        src, dst = self.src[edge_mask], self.dst[edge_mask]
        if node_keep is None:
            node_keep = np.zeros(self.n_nodes, dtype=bool)
            node_keep[src] = True
            node_keep[dst] = True
        remap = np.cumsum(node_keep) - 1
        extra = {}
        if self.kind == MUTUAL:
            extra = dict(a_rev=self.a_rev[edge_mask], d_rev=self.d_rev[edge_mask])
        return CallNetwork(self.kind, self.labels[node_keep], remap[src], remap[dst],
                           self.a[edge_mask], self.d[edge_mask], **extra)

    def edge_subnetwork(self, edge_mask) -> "CallNetwork":
        """Subnetwork on the selected edges; nodes left isolated are dropped."""
        return self._rebuild(np.asarray(edge_mask, dtype=bool))

    def induced_subnetwork(self, node_mask) -> "CallNetwork":
        """Subnetwork induced by the selected nodes (all kept, even if isolated)."""
        node_mask = np.asarray(node_mask, dtype=bool)
        edge_mask = node_mask[self.src] & node_mask[self.dst]
        return self._rebuild(edge_mask, node_mask)


def build_dcn(stats: PairStats) -> CallNetwork:
    """Directed calling network: one edge per ordered pair that exchanged a call."""
    return CallNetwork(DIRECTED, stats.labels, stats.src, stats.dst,
                       stats.count, stats.duration)


def build_mcn(stats: PairStats) -> CallNetwork:
    """Mutual calling network: ``{i, j}`` iff both i -> j and j -> i happened.

    Users without any reciprocated pair are not part of the result.
    """
    n = len(stats.labels)
    fwd = stats.src < stats.dst
    keys_fwd = stats.src[fwd] * n + stats.dst[fwd]
    back = ~fwd
    keys_back = stats.dst[back] * n + stats.src[back]  # stored as (min, max)
    common, i_f, i_b = np.intersect1d(keys_fwd, keys_back, assume_unique=True,
                                      return_indices=True)
    fwd_idx = np.flatnonzero(fwd)[i_f]
    back_idx = np.flatnonzero(back)[i_b]
    u = stats.src[fwd_idx]
    v = stats.dst[fwd_idx]
    keep = np.zeros(n, dtype=bool)
    keep[u] = True
    keep[v] = True
    remap = np.cumsum(keep) - 1
    return CallNetwork(MUTUAL, stats.labels[keep], remap[u], remap[v],
                       stats.count[fwd_idx], stats.duration[fwd_idx],
                       a_rev=stats.count[back_idx], d_rev=stats.duration[back_idx])


def unreciprocated_fraction(stats: PairStats) -> float:
    """Share of ordered pairs whose reverse pair never called."""
    if len(stats) == 0:
        return 0.0
    n = len(stats.labels)
    keys = stats.src * n + stats.dst
    rev = stats.dst * n + stats.src
    lacking = int(np.count_nonzero(~np.isin(rev, keys, assume_unique=True)))
    return lacking / len(stats)
