"""Statistical validation of calling-network links.

Each directed link ``i -> j`` carrying ``X`` calls is tested against random
matching of callers and receivers: given that ``i`` placed ``N_ic`` calls,
``j`` received ``N_jr`` and the network holds ``N`` calls, ``X`` is
hypergeometric. Links whose upper-tail p-value falls strictly below the
Bonferroni threshold are kept.

For a mutual network both directions of an edge are tested and the edge
survives only when both pass.
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .hypergeom import pvalues_over
from .netbuild import DIRECTED, MUTUAL, CallNetwork

__all__ = [
    "ThresholdPolicy",
    "ValidationReport",
    "bonferroni_threshold",
    "threshold_for",
    "validate_dcn",
    "validate_mcn",
    "edge_pvalues",
]

MODES = ("per_test", "per_pair", "fixed")


@dataclass(frozen=True)
class ThresholdPolicy:
    """Significance level and how it is corrected for multiple tests.

    ``per_test`` divides by the number of tests, ``per_pair`` by the number of
    user pairs (pairs with any call for directed networks, mutual pairs for
    mutual ones), ``fixed`` uses ``alpha`` as is.
    """

    alpha: float = 0.01
    mode: str = "per_test"

    def __post_init__(self):
        mode = self.mode.replace("-", "_")
        object.__setattr__(self, "mode", mode)
        if mode not in MODES:
            raise ValueError(f"unknown correction mode {self.mode!r}")
        if not 0.0 < self.alpha < 1.0:
            raise ValueError("alpha must lie in (0, 1)")


def bonferroni_threshold(policy: ThresholdPolicy, kind: str, n_edges: int,
                         n_pairs: int | None = None) -> tuple[float, int]:
    """Return ``(p_b, n_tests)`` for a network of ``n_edges`` edges.

    A directed network runs one test per edge, a mutual one two per edge.
    ``n_pairs`` is only consulted in ``per_pair`` mode; for directed
    networks it must count unordered pairs with at least one call.
    """
    n_tests = n_edges if kind == DIRECTED else 2 * n_edges
    if policy.mode == "fixed":
        return policy.alpha, n_tests
    if policy.mode == "per_test":
        divisor = n_tests
    else:
        if n_pairs is None:
            if kind == DIRECTED:
                raise ValueError("per_pair mode on a directed network needs n_pairs")
            n_pairs = n_edges
        divisor = n_pairs
    return (policy.alpha / divisor if divisor else policy.alpha), n_tests


def threshold_for(policy: ThresholdPolicy, net: CallNetwork) -> tuple[float, int]:
    pairs = net.n_undirected_edges if net.kind == DIRECTED else net.n_edges
    return bonferroni_threshold(policy, net.kind, net.n_edges, pairs)


@dataclass
class ValidationReport:
    """Outcome of every test on one network.

    Row ``k`` describes the directed link ``labels[src[k]] -> labels[dst[k]]``.
    Rows are ordered by (src, dst).
    """

    kind: str
    labels: np.ndarray
    src: np.ndarray
    dst: np.ndarray
    x_obs: np.ndarray
    n_ic: np.ndarray
    n_jr: np.ndarray
    p_value: np.ndarray
    n_total: int
    n_tests: int
    alpha: float
    mode: str
    p_b: float
    n_scope: str = "self"

    @property
    def validated(self) -> np.ndarray:
        return self.p_value < self.p_b

    @property
    def n_validated(self) -> int:
        return int(self.validated.sum())

    def __len__(self):
        return len(self.src)

    def lookup(self, i, j) -> int:
        """Row index of link ``i -> j`` (labels)."""
        a = np.searchsorted(self.labels, i)
        b = np.searchsorted(self.labels, j)
        hit = np.flatnonzero((self.src == a) & (self.dst == b))
        if len(hit) == 0 or self.labels[a] != i or self.labels[b] != j:
            raise KeyError((i, j))
        return int(hit[0])


def edge_pvalues(x, n_total, n_ic, n_jr, threads: int = 1, chunk: int = 1 << 18):
    """P-values for many links; splitting into chunks never changes the values."""
    x = np.asarray(x, dtype=np.int64)
    if len(x) == 0:
        return np.zeros(0)
    if np.any(n_ic[x > 0] == 0) or np.any(n_jr[x > 0] == 0):
        raise ValueError("a link with calls has a caller or receiver without calls")
    bounds = list(range(0, len(x), chunk)) + [len(x)]
    parts = [(bounds[k], bounds[k + 1]) for k in range(len(bounds) - 1)]

    def run(part):
        lo, hi = part
        return pvalues_over(x[lo:hi], n_total, n_ic[lo:hi], n_jr[lo:hi])

    if threads > 1 and len(parts) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            out = list(pool.map(run, parts))
    else:
        out = [run(p) for p in parts]
    return np.concatenate(out)


def validate_dcn(dcn: CallNetwork, policy: ThresholdPolicy = ThresholdPolicy(),
                 threads: int = 1) -> tuple[CallNetwork, ValidationReport]:
    """Test every directed edge; return the validated subnetwork and the report.

    ``N`` is the number of calls in ``dcn``; ``N_ic``/``N_jr`` are out- and
    in-call totals per user.
    """
    if dcn.kind != DIRECTED:
        raise ValueError("validate_dcn needs a directed network")
    n = dcn.n_nodes
    n_total = dcn.total_calls
    out_calls = np.bincount(dcn.src, weights=dcn.a, minlength=n).astype(np.int64)
    in_calls = np.bincount(dcn.dst, weights=dcn.a, minlength=n).astype(np.int64)
    n_ic = out_calls[dcn.src]
    n_jr = in_calls[dcn.dst]
    pv = edge_pvalues(dcn.a, max(n_total, 1), n_ic, n_jr, threads)
    p_b, n_tests = threshold_for(policy, dcn)
    report = ValidationReport(DIRECTED, dcn.labels, dcn.src, dcn.dst, dcn.a, n_ic, n_jr,
                              pv, n_total, n_tests, policy.alpha, policy.mode, p_b)
    return dcn.edge_subnetwork(report.validated), report


def validate_mcn(mcn: CallNetwork, policy: ThresholdPolicy = ThresholdPolicy(),
                 n_scope: str = "mcn", dcn: CallNetwork | None = None,
                 threads: int = 1) -> tuple[CallNetwork, ValidationReport]:
    """Test both directions of every mutual edge; keep edges passing both.

    With ``n_scope="mcn"`` the call totals count only calls exchanged along
    mutual edges. ``n_scope="dcn"`` takes them from ``dcn`` instead, which must
    be the directed network built from the same records.
    """
    if mcn.kind != MUTUAL:
        raise ValueError("validate_mcn needs a mutual network")
    n = mcn.n_nodes
    if n_scope == "mcn":
        n_total = mcn.total_calls
        out_calls = (np.bincount(mcn.src, weights=mcn.a, minlength=n)
                     + np.bincount(mcn.dst, weights=mcn.a_rev, minlength=n)).astype(np.int64)
        in_calls = (np.bincount(mcn.dst, weights=mcn.a, minlength=n)
                    + np.bincount(mcn.src, weights=mcn.a_rev, minlength=n)).astype(np.int64)
    elif n_scope == "dcn":
        if dcn is None or dcn.kind != DIRECTED:
            raise ValueError("n_scope='dcn' needs the directed network")
        n_total = dcn.total_calls
        pos = np.searchsorted(dcn.labels, mcn.labels)
        if len(pos) and (pos.max() >= dcn.n_nodes or np.any(dcn.labels[pos] != mcn.labels)):
            raise ValueError("mutual network nodes missing from the directed network")
        m = dcn.n_nodes
        out_calls = np.bincount(dcn.src, weights=dcn.a, minlength=m).astype(np.int64)[pos]
        in_calls = np.bincount(dcn.dst, weights=dcn.a, minlength=m).astype(np.int64)[pos]
    else:
        raise ValueError(f"unknown n_scope {n_scope!r}")

    src = np.r_[mcn.src, mcn.dst]
    dst = np.r_[mcn.dst, mcn.src]
    x = np.r_[mcn.a, mcn.a_rev]
    n_ic = out_calls[src]
    n_jr = in_calls[dst]
    pv = edge_pvalues(x, max(n_total, 1), n_ic, n_jr, threads)
    p_b, n_tests = threshold_for(policy, mcn)

    m = mcn.n_edges
    keep = (pv[:m] < p_b) & (pv[m:] < p_b)
    order = np.lexsort((dst, src))
    report = ValidationReport(MUTUAL, mcn.labels, src[order], dst[order], x[order],
                              n_ic[order], n_jr[order], pv[order], n_total, n_tests,
                              policy.alpha, policy.mode, p_b, n_scope)
    return mcn.edge_subnetwork(keep), report


def expected_false_positives(report: ValidationReport) -> float:
    """Upper bound on expected false positives under the null: ``n_tests * p_b``."""
    return report.n_tests * report.p_b if math.isfinite(report.p_b) else math.nan
