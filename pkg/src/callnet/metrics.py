"""Node and edge statistics of calling networks.

Everything here works on the undirected view of a network: for directed
networks reciprocal edges are merged and their weights summed. Per-node
quantities come back as arrays indexed like ``net.labels``; per-edge ones are
aligned with ``net.undirected``.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
from scipy.stats import rankdata

from .netbuild import DIRECTED, CallNetwork

logger = logging.getLogger(__name__)

__all__ = [
    "BinnedCurve",
    "degree_sequences",
    "node_strengths",
    "knn",
    "weighted_knn",
    "avg_nearest_neighbor_degree",
    "weighted_ann_degree",
    "clustering_coefficient",
    "weighted_clustering",
    "edge_overlap",
    "conditional_average",
    "log_bin_edges",
    "pearson",
    "spearman",
    "strength_nn",
    "cumulative_rank",
]


@dataclass
class BinnedCurve:
    """Conditional mean and spread of y per bin of x.

    ``edges`` is None for per-integer conditioning, in which case each bin is
    one distinct x value.
    """

    edges: np.ndarray | None
    x_mean: np.ndarray
    y_mean: np.ndarray
    y_std: np.ndarray
    count: np.ndarray
    n_excluded: int = 0

    def __len__(self):
        return len(self.count)

    def occupied(self) -> "BinnedCurve":
        keep = self.count > 0
        return BinnedCurve(self.edges, self.x_mean[keep], self.y_mean[keep],
                           self.y_std[keep], self.count[keep], self.n_excluded)


# -- degrees and strengths -------------------------------------------------

def degree_sequences(net: CallNetwork) -> dict:
    """Degrees per node: ``k`` always, plus ``k_in``/``k_out`` for directed nets."""
    n = net.n_nodes
    u, v, _, _ = net.undirected
    out = {"k": np.bincount(u, minlength=n) + np.bincount(v, minlength=n)}
    if net.kind == DIRECTED:
        out["k_out"] = np.bincount(net.src, minlength=n)
        out["k_in"] = np.bincount(net.dst, minlength=n)
    return out


def _weight_arrays(net: CallNetwork, weight: str):
    if weight == "number":
        fwd, rev = net.a, net.a_rev
    elif weight == "duration":
        fwd, rev = net.d, net.d_rev
    else:
        raise ValueError(f"unknown weight kind {weight!r}")
    return fwd, rev


def node_strengths(net: CallNetwork, weight: str = "number", direction: str = "all") -> np.ndarray:
    """Sum of incident edge weights; ``direction`` picks outgoing, incoming or all calls."""
    n = net.n_nodes
    fwd, rev = _weight_arrays(net, weight)
    if net.kind == DIRECTED:
        s_out = np.bincount(net.src, weights=fwd, minlength=n)
        s_in = np.bincount(net.dst, weights=fwd, minlength=n)
    else:
        # a is src->dst, a_rev is dst->src
        s_out = np.bincount(net.src, weights=fwd, minlength=n) + np.bincount(net.dst, weights=rev, minlength=n)
        s_in = np.bincount(net.dst, weights=fwd, minlength=n) + np.bincount(net.src, weights=rev, minlength=n)
    if direction == "out":
        s = s_out
    elif direction == "in":
        s = s_in
    elif direction == "all":
        s = s_out + s_in
    else:
        raise ValueError(f"unknown direction {direction!r}")
    return np.rint(s).astype(np.int64)


# -- nearest-neighbour correlations ----------------------------------------

def knn(net: CallNetwork) -> np.ndarray:
    """Average degree of each node's neighbours (nan for isolated nodes)."""
    k = degree_sequences(net)["k"].astype(np.float64)
    adj = net.adjacency()
    with np.errstate(invalid="ignore", divide="ignore"):
        return (adj @ k) / k


def weighted_knn(net: CallNetwork, weight: str = "number") -> np.ndarray:
    """Neighbour degree averaged with edge weights: sum_j k_j w_ij / s_i."""
    k = degree_sequences(net)["k"].astype(np.float64)
    w = net.adjacency(weight)
    s = np.asarray(w.sum(axis=1)).ravel()
    with np.errstate(invalid="ignore", divide="ignore"):
        return (w @ k) / s


def avg_nearest_neighbor_degree(net: CallNetwork) -> BinnedCurve:
    """<k_nn | k> for each observed degree k."""
    k = degree_sequences(net)["k"]
    return conditional_average(k, knn(net), bins="integer")


def weighted_ann_degree(net: CallNetwork, weight: str = "number") -> BinnedCurve:
    k = degree_sequences(net)["k"]
    return conditional_average(k, weighted_knn(net, weight), bins="integer")


def strength_nn(net: CallNetwork, weight: str = "number"):
    """Mean strength of each node's neighbours, and its log-binned curve against s."""
    s = node_strengths(net, weight).astype(np.float64)
    k = degree_sequences(net)["k"].astype(np.float64)
    with np.errstate(invalid="ignore", divide="ignore"):
        snn = (net.adjacency() @ s) / k
    return snn, conditional_average(s, snn, bins="log")


# -- clustering and overlap ------------------------------------------------

@dataclass
class Clustering:
    values: np.ndarray
    mean: float
    zero_fraction: float


def _triangles(adj: sp.csr_matrix) -> np.ndarray:
    return np.asarray((adj @ adj).multiply(adj).sum(axis=1)).ravel() / 2.0


def clustering_coefficient(net: CallNetwork) -> Clustering:
    """C_i = 2 t_i / (k_i (k_i - 1)); nodes with k < 2 get 0."""
    adj = net.adjacency()
    k = np.diff(adj.indptr).astype(np.float64)
    t = _triangles(adj)
    with np.errstate(invalid="ignore", divide="ignore"):
        c = np.where(k >= 2, 2.0 * t / (k * (k - 1.0)), 0.0)
    mean = float(c.mean()) if len(c) else float("nan")
    zero = float((c == 0).mean()) if len(c) else float("nan")
    return Clustering(c, mean, zero)


def weighted_clustering(net: CallNetwork, weight: str = "number") -> np.ndarray:
    """Geometric-mean weighted clustering.

    C~_i = 1/(k_i (k_i - 1)) * sum over ordered neighbour pairs (j, h) of
    (w_ij w_jh w_hi)^(1/3), weights scaled by the network maximum. Equal
    weights give back the unweighted coefficient.
    """
    if net.n_edges == 0:
        raise ValueError("weighted clustering needs at least one edge")
    w = net.adjacency(weight)
    wmax = w.data.max()
    y = w.copy()
    y.data = np.cbrt(y.data / wmax)
    k = np.diff(w.indptr).astype(np.float64)
    cyc = np.asarray((y @ y).multiply(y).sum(axis=1)).ravel()
    with np.errstate(invalid="ignore", divide="ignore"):
        return np.where(k >= 2, cyc / (k * (k - 1.0)), 0.0)


@dataclass
class EdgeOverlap:
    """Overlap per undirected edge; ``nan`` where k_i + k_j - 2 - n_ij = 0."""

    u: np.ndarray
    v: np.ndarray
    common: np.ndarray
    overlap: np.ndarray

    @property
    def defined(self) -> np.ndarray:
        return ~np.isnan(self.overlap)

    @property
    def n_undefined(self) -> int:
        return int(np.isnan(self.overlap).sum())


def edge_overlap(net: CallNetwork) -> EdgeOverlap:
    """O_ij = n_ij / (k_i + k_j - 2 - n_ij) for each undirected edge."""
    u, v, _, _ = net.undirected
    adj = net.adjacency()
    k = np.diff(adj.indptr)
    common_m = (adj @ adj).multiply(adj).tocsr()
    common = np.asarray(common_m[u, v]).ravel().astype(np.int64) if len(u) else np.zeros(0, np.int64)
    denom = k[u] + k[v] - 2 - common
    with np.errstate(invalid="ignore", divide="ignore"):
        o = np.where(denom > 0, common / np.where(denom > 0, denom, 1), np.nan)
    return EdgeOverlap(u, v, common, o)


# -- binning and correlations ----------------------------------------------

def log_bin_edges(xmin: float, xmax: float, n_bins: int = 30) -> np.ndarray:
    """``n_bins`` logarithmic bins spanning [xmin, xmax]; one bin if xmin == xmax."""
    if xmin <= 0:
        raise ValueError("log bins need a positive lower bound")
    if xmax == xmin:
        return np.array([xmin, xmax], dtype=np.float64)
    edges = xmin * (xmax / xmin) ** (np.arange(n_bins + 1) / n_bins)
    edges[0], edges[-1] = xmin, xmax
    return edges


def log_bin_index(x: np.ndarray, xmin: float, xmax: float, n_bins: int) -> np.ndarray:
    """Bin of each x; computed from x/xmin so rescaling data never moves a point."""
    if xmax == xmin:
        return np.zeros(len(x), dtype=np.int64)
    idx = np.floor(np.log(x / xmin) / np.log(xmax / xmin) * n_bins).astype(np.int64)
    return np.clip(idx, 0, n_bins - 1)


def conditional_average(x, y, bins: str = "log", n_bins: int = 30) -> BinnedCurve:
    """Mean and standard deviation of ``y`` within bins of ``x``.

    ``bins="log"`` splits [min x, max x] into ``n_bins`` logarithmic bins
    (items with x <= 0 are dropped and counted); ``bins="integer"`` conditions
    on each distinct x value. Items where y is nan are ignored. Empty log bins
    are kept with count 0.
    """
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if x.shape != y.shape:
        raise ValueError("x and y must be index-aligned")
    ok = ~np.isnan(y) & ~np.isnan(x)
    excluded = 0
    if bins == "log":
        pos = x > 0
        excluded = int((ok & ~pos).sum())
        if excluded:
            logger.warning("conditional_average: %d items with x <= 0 excluded", excluded)
        ok &= pos
    x, y = x[ok], y[ok]
    if bins == "log":
        if len(x) == 0:
            z = np.zeros(0)
            return BinnedCurve(np.zeros(0), z, z, z, np.zeros(0, np.int64), excluded)
        lo, hi = x.min(), x.max()
        edges = log_bin_edges(lo, hi, n_bins)
        idx = log_bin_index(x, lo, hi, n_bins)
        nb = len(edges) - 1
    elif bins == "integer":
        edges = None
        keys, idx = np.unique(x, return_inverse=True)
        nb = len(keys)
    else:
        raise ValueError(f"unknown binning {bins!r}")
    cnt = np.bincount(idx, minlength=nb)
    sx = np.bincount(idx, weights=x, minlength=nb)
    sy = np.bincount(idx, weights=y, minlength=nb)
    with np.errstate(invalid="ignore", divide="ignore"):
        xm = sx / cnt
        ym = sy / cnt
        # second pass: correct the mean, then take deviations around it
        ym += np.bincount(idx, weights=y - ym[idx], minlength=nb) / cnt
        dev = np.bincount(idx, weights=(y - ym[idx]) ** 2, minlength=nb)
        ys = np.sqrt(dev / cnt)
    # bins holding a single repeated value report it exactly
    ymin = np.full(nb, np.inf)
    ymax = np.full(nb, -np.inf)
    np.minimum.at(ymin, idx, y)
    np.maximum.at(ymax, idx, y)
    flat = (cnt > 0) & (ymin == ymax)
    ym[flat], ys[flat] = ymin[flat], 0.0
    if edges is None:
        xm = keys.astype(np.float64)
    return BinnedCurve(edges, xm, ym, ys, cnt.astype(np.int64), excluded)


def pearson(x, y) -> float:
    """Pearson linear correlation; nan when either input has zero variance."""
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if len(x) != len(y) or len(x) < 2:
        raise ValueError("need two aligned samples with at least 2 items")
    dx = x - x.mean()
    dy = y - y.mean()
    sxx = np.dot(dx, dx)
    syy = np.dot(dy, dy)
    if sxx == 0 or syy == 0:
        return float("nan")
    return float(np.clip(np.dot(dx, dy) / np.sqrt(sxx * syy), -1.0, 1.0))


def spearman(x, y) -> float:
    """Spearman rank correlation: Pearson on ranks, ties averaged."""
    return pearson(rankdata(x), rankdata(y))


def cumulative_rank(w) -> np.ndarray:
    """Empirical cumulative rank P_c(w) = rank(w) / count, ties sharing the mean rank."""
    w = np.asarray(w)
    return rankdata(w) / len(w) if len(w) else np.zeros(0)


def endpoint_products(net: CallNetwork, values: np.ndarray) -> np.ndarray:
    """values[i] * values[j] for every undirected edge (i, j)."""
    u, v, _, _ = net.undirected
    values = np.asarray(values, dtype=np.float64)
    return values[u] * values[v]
