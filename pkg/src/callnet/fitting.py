"""Log-binned densities and least-squares fits of heavy-tailed forms.

All fits minimise squared residuals of log density over occupied bins. By
default each bin is weighted by the square root of its count: the variance of
a log density estimate is about 1/count, so sparse tail bins would otherwise
dominate. ``weighting="uniform"`` gives plain least squares.

* truncated power law  p(x) = a x^-gamma exp(-x / x_c)  (nonlinear, multi-start)
* power-law tail       p(x) ~ x^-(1 + alpha)             (linear in log-log)
* bi-power law         p(x) ~ x^-alpha1 below a break, x^-alpha2 above
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import least_squares

from .metrics import log_bin_edges, log_bin_index

__all__ = [
    "EmpiricalPdf",
    "FitResult",
    "FitError",
    "empirical_pdf",
    "fit_truncated_powerlaw",
    "fit_powerlaw_tail",
    "fit_bipowerlaw",
]

# half-width (in decades) of the single bin used when all samples coincide
_DEGENERATE_HALF_DECADES = 0.05


class FitError(ValueError):
    """A fit could not be carried out (too little data or no convergence)."""


@dataclass
class EmpiricalPdf:
    """Log-binned density estimate.

    ``x`` is the geometric centre of each bin, ``density`` is count divided by
    (total count * bin width). Empty bins stay in the arrays with count 0.
    """

    edges: np.ndarray
    x: np.ndarray
    density: np.ndarray
    count: np.ndarray
    discrete: bool = False

    @property
    def n_samples(self) -> int:
        return int(self.count.sum())

    @property
    def widths(self) -> np.ndarray:
        return np.diff(self.edges)

    @property
    def occupied(self) -> np.ndarray:
        return self.count > 0

    def integral(self) -> float:
        return float(np.sum(self.density * self.widths))


def empirical_pdf(samples, n_bins: int = 30, discrete: bool = False) -> EmpiricalPdf:
    """Density of positive ``samples`` on ``n_bins`` logarithmic bins.

    With ``discrete=True`` the samples must be integers; bin edges are snapped
    to integers (bins are half-open ``[lo, hi)``) and the width of a bin is the
    number of integers it covers, so small-value bins never straddle zero
    integers.
    """
    x = np.asarray(samples, dtype=np.float64).ravel()
    if len(x) == 0:
        raise FitError("cannot estimate a density from no samples")
    if np.any(x <= 0) or np.any(~np.isfinite(x)):
        raise FitError("samples must be positive and finite")
    if n_bins < 2:
        raise FitError("need at least 2 bins")
    lo, hi = x.min(), x.max()
    if discrete:
        if np.any(x != np.floor(x)):
            raise FitError("discrete binning needs integer samples")
        raw = np.floor(log_bin_edges(lo, hi + 1.0, n_bins)) if hi > lo else np.array([lo, lo + 1.0])
        edges = np.unique(np.r_[raw[:-1], hi + 1.0])
        edges[0] = lo
        idx = np.searchsorted(edges, x, side="right") - 1
        centres = np.sqrt(edges[:-1] * (edges[1:] - 1.0))
    else:
        if hi == lo:
            f = 10.0 ** _DEGENERATE_HALF_DECADES
            edges = np.array([lo / f, lo * f])
            idx = np.zeros(len(x), dtype=np.int64)
        else:
            edges = log_bin_edges(lo, hi, n_bins)
            idx = log_bin_index(x, lo, hi, n_bins)
        centres = np.sqrt(edges[:-1] * edges[1:])
    count = np.bincount(idx, minlength=len(edges) - 1)
    density = count / (len(x) * np.diff(edges))
    return EmpiricalPdf(edges, centres, density, count.astype(np.int64), discrete)


@dataclass
class FitResult:
    """Outcome of one fit.

    ``rss`` is the (weighted) residual sum of squares of natural-log density over the
    ``n_bins`` bins used; ``fit_range`` is the [low, high] x interval fitted.
    """

    model: str
    params: dict
    stderr: dict
    rss: float
    fit_range: tuple
    n_bins: int
    extra: dict = field(default_factory=dict)

    def __getitem__(self, name):
        return self.params[name]

    def to_text(self) -> str:
        out = [f"model={self.model}"]
        for k, v in self.params.items():
            out.append(f"param.{k}={v:.10g}")
        for k, v in self.stderr.items():
            out.append(f"stderr.{k}={v:.6g}")
        out.append(f"rss={self.rss:.10g}")
        out.append(f"fit_range={self.fit_range[0]:.10g}:{self.fit_range[1]:.10g}")
        out.append(f"n_bins={self.n_bins}")
        for k, v in self.extra.items():
            out.append(f"{k}={v}")
        return "\n".join(out) + "\n"


def _select(pdf: EmpiricalPdf, fit_range):
    lo, hi = (-np.inf, np.inf) if fit_range is None else fit_range
    lo = -np.inf if lo is None else lo
    hi = np.inf if hi is None else hi
    keep = pdf.occupied & (pdf.x >= lo) & (pdf.x <= hi)
    return keep


def _weighted_median_x(pdf: EmpiricalPdf) -> float:
    c = np.cumsum(pdf.count)
    return float(pdf.x[np.searchsorted(c, c[-1] / 2.0)])


def _linear_fit(lx, ly, w=None):
    """Least squares ly = b0 + b1 lx; returns (b0, b1), stderrs, rss."""
    A = np.column_stack([np.ones_like(lx), lx])
    if w is not None:
        A = A * w[:, None]
        ly = ly * w
    coef, *_ = np.linalg.lstsq(A, ly, rcond=None)
    resid = ly - A @ coef
    rss = float(resid @ resid)
    dof = len(lx) - 2
    if dof > 0:
        cov = np.linalg.inv(A.T @ A) * (rss / dof)
        se = np.sqrt(np.clip(np.diag(cov), 0, None))
    else:
        se = np.full(2, np.nan)
    return coef, se, rss


def _weights(pdf: EmpiricalPdf, keep, weighting: str):
    if weighting == "uniform":
        return np.ones(int(keep.sum()))
    if weighting == "count":
        return np.sqrt(pdf.count[keep].astype(np.float64))
    raise ValueError(f"unknown weighting {weighting!r}")


def fit_truncated_powerlaw(pdf: EmpiricalPdf, fit_range=None, weighting: str = "count",
                           max_nfev: int = 500) -> FitResult:
    """Fit ``a x^-gamma exp(-x/x_c)`` to the occupied bins in ``fit_range``.

    Starts from every (gamma, x_c) on a fixed grid and keeps the converged
    solution with the smallest residual (earliest start wins ties).
    """
    keep = _select(pdf, fit_range)
    if keep.sum() < 4:
        raise FitError(f"truncated power law needs >= 4 occupied bins, got {int(keep.sum())}")
    x = pdf.x[keep]
    ly = np.log(pdf.density[keep])
    lx = np.log(x)
    w = _weights(pdf, keep, weighting)

    def resid(theta):
        log_a, gamma, log_xc = theta
        return w * (ly - (log_a - gamma * lx - x * np.exp(-log_xc)))

    med = _weighted_median_x(pdf)
    starts = [(g, xc) for g in (0.5, 1.0, 1.5, 2.0, 3.0)
              for xc in (med, 3.0 * med, x.max() / 3.0)]
    best = None
    failures = []
    for g0, xc0 in starts:
        la0 = float(np.average(ly + g0 * lx + x / xc0, weights=w ** 2))
        try:
            res = least_squares(resid, [la0, g0, math.log(xc0)], method="lm",
                                xtol=1e-8, ftol=1e-12, gtol=1e-12, max_nfev=max_nfev)
        except (ValueError, FloatingPointError) as exc:
            failures.append(f"start gamma={g0}, x_c={xc0:.4g}: {exc}")
            continue
        if res.status <= 0 or not np.all(np.isfinite(res.x)):
            failures.append(f"start gamma={g0}, x_c={xc0:.4g}: {res.message}")
            continue
        if best is None or res.cost < best.cost:
            best = res
    if best is None:
        raise FitError("truncated power-law fit did not converge:\n" + "\n".join(failures))

    log_a, gamma, log_xc = best.x
    rss = float(2.0 * best.cost)
    dof = len(x) - 3
    J = best.jac
    se = np.full(3, np.nan)
    if dof > 0:
        try:
            cov = np.linalg.inv(J.T @ J) * (rss / dof)
            se = np.sqrt(np.clip(np.diag(cov), 0, None))
        except np.linalg.LinAlgError:
            pass
    x_c = math.exp(log_xc)
    return FitResult(
        "truncated_powerlaw",
        {"a": math.exp(log_a), "gamma": float(gamma), "x_c": x_c},
        {"log_a": float(se[0]), "gamma": float(se[1]), "x_c": float(x_c * se[2])},
        rss, (float(x.min()), float(x.max())), int(len(x)),
        {"weighting": weighting, "nfev": int(best.nfev)},
    )


def fit_powerlaw_tail(pdf: EmpiricalPdf, x_min: float, weighting: str = "count") -> FitResult:
    """Straight-line fit of log p against log x for bins with x >= ``x_min``.

    The slope is reported as -(1 + alpha).
    """
    keep = _select(pdf, (x_min, None))
    if keep.sum() < 3:
        raise FitError(f"power-law tail needs >= 3 occupied bins above x_min, got {int(keep.sum())}")
    x = pdf.x[keep]
    coef, se, rss = _linear_fit(np.log(x), np.log(pdf.density[keep]), _weights(pdf, keep, weighting))
    slope = coef[1]
    return FitResult(
        "powerlaw_tail",
        {"alpha": float(-slope - 1.0), "exponent": float(-slope), "log_a": float(coef[0])},
        {"alpha": float(se[1]), "log_a": float(se[0])},
        rss, (float(x.min()), float(x.max())), int(len(x)),
        {"weighting": weighting},
    )


def fit_bipowerlaw(pdf: EmpiricalPdf, breakpoint_hint: float, search_factor: float = 3.0,
                   min_bins: int = 2, degenerate_tol: float = 0.1, weighting: str = "count") -> FitResult:
    """Two straight log-log segments joined at a bin edge near ``breakpoint_hint``.

    Every bin edge within a factor ``search_factor`` of the hint is tried as
    the break; each side gets its own linear fit, and the break with the
    lowest total residual wins. The fit is flagged degenerate when the two
    exponents differ by less than ``degenerate_tol``.
    """
    edges = pdf.edges
    if not edges[0] < breakpoint_hint < edges[-1]:
        raise FitError("breakpoint hint lies outside the data support")
    occ = pdf.occupied
    lx_all = np.log(np.where(occ, pdf.x, 1.0))
    ly_all = np.log(np.where(occ, pdf.density, 1.0))
    w_all = np.zeros(len(occ))
    w_all[occ] = _weights(pdf, occ, weighting)
    cands = [k for k in range(1, len(edges) - 1)
             if breakpoint_hint / search_factor <= edges[k] <= breakpoint_hint * search_factor]
    best = None
    for k in cands:
        left = occ.copy()
        left[k:] = False
        right = occ.copy()
        right[:k] = False
        if left.sum() < min_bins or right.sum() < min_bins:
            continue
        cl, sl, rl = _linear_fit(lx_all[left], ly_all[left], w_all[left])
        cr, sr, rr = _linear_fit(lx_all[right], ly_all[right], w_all[right])
        total = rl + rr
        if best is None or total < best[0]:
            best = (total, k, cl, sl, cr, sr, int(left.sum() + right.sum()))
    if best is None:
        raise FitError("no candidate breakpoint leaves enough occupied bins on both sides")
    total, k, cl, sl, cr, sr, nb = best
    a1, a2 = float(-cl[1]), float(-cr[1])
    used = pdf.x[occ]
    return FitResult(
        "bipowerlaw",
        {"alpha1": a1, "alpha2": a2, "breakpoint": float(edges[k])},
        {"alpha1": float(sl[1]), "alpha2": float(sr[1])},
        float(total), (float(used.min()), float(used.max())), nb,
        {"degenerate": abs(a1 - a2) < degenerate_tol, "break_bin": k, "weighting": weighting},
    )
