"""Hypergeometric probabilities for the random-matching null model.

A caller ``i`` with ``n_ic`` outgoing calls and a receiver ``j`` with ``n_jr``
incoming calls, inside a network carrying ``n`` calls in total, share ``X``
calls. Under random matching ``X`` is hypergeometric.

Probabilities are evaluated in log space with the saddle-point expansion of
Loader (2000): each log-binomial term is written as a Stirling remainder plus a
deviance term, so no large log-factorials are ever subtracted from each other.
This keeps ~1e-14 relative accuracy for ``n`` up to 1e9, where naive
``lgamma`` differences lose 7-8 digits.

The p-value is the upper tail ``P(X >= x_obs)``, summed directly. Terms are
accumulated relative to the largest term of the tail, and summation stops once
the remaining geometric bound falls below double precision.
"""
from __future__ import annotations

import math

import numpy as np

__all__ = [
    "log_hypergeom_pmf",
    "hypergeom_pmf",
    "pvalue_over",
    "pvalues_over",
    "log_pvalues_over",
    "support",
]

_LN_SQRT_2PI = 0.5 * math.log(2.0 * math.pi)
_LN_2PI = math.log(2.0 * math.pi)

# Stirling remainder for 0..15; above that the asymptotic series is exact to
# double precision.
_STIRLERR_SMALL = np.array(
    [0.0] + [math.lgamma(k + 1.0) - (k + 0.5) * math.log(k) + k - _LN_SQRT_2PI
             for k in range(1, 16)]
)
_S0 = 1.0 / 12
_S1 = 1.0 / 360
_S2 = 1.0 / 1260
_S3 = 1.0 / 1680
_S4 = 1.0 / 1188

_TAIL_TOL = 1e-17


def _stirlerr(n):
    """log(n!) - log(sqrt(2 pi n) (n/e)^n) for integer-valued n >= 0."""
    n = np.asarray(n, dtype=np.float64)
    out = np.empty_like(n)
    small = n <= 15
    out[small] = _STIRLERR_SMALL[n[small].astype(np.int64)]
    big = ~small
    nb = n[big]
    nn = nb * nb
    out[big] = (_S0 - (_S1 - (_S2 - (_S3 - _S4 / nn) / nn) / nn) / nn) / nb
    return out


def _bd0(x, m):
    """Deviance x log(x/m) + m - x, accurate when x is close to m."""
    x = np.asarray(x, dtype=np.float64)
    m = np.asarray(m, dtype=np.float64)
    x, m = np.broadcast_arrays(x, m)
    out = np.empty(x.shape)
    close = np.abs(x - m) < 0.1 * (x + m)
    xc, mc = x[close], m[close]
    v = (xc - mc) / (xc + mc)
    s = (xc - mc) * v
    ej = 2.0 * xc * v
    v2 = v * v
    # |v| < 0.1, so 12 terms put the truncation below 1e-24 relative.
    for j in range(1, 13):
        ej = ej * v2
        s = s + ej / (2 * j + 1)
    out[close] = s
    far = ~close
    xf, mf = x[far], m[far]
    with np.errstate(divide="ignore", invalid="ignore"):
        out[far] = np.where(xf > 0, xf * np.log(xf / mf) + mf - xf, mf)
    return out


def _log_dbinom_raw(x, n, p, q):
    """Log binomial probability of x successes out of n, success prob p = 1 - q."""
    x, n, p, q = np.broadcast_arrays(
        np.asarray(x, dtype=np.float64), np.asarray(n, dtype=np.float64),
        np.asarray(p, dtype=np.float64), np.asarray(q, dtype=np.float64),
    )
    out = np.full(x.shape, -np.inf)

    zero = x == 0
    full = (x == n) & ~zero
    inner = (x > 0) & (x < n)

    with np.errstate(divide="ignore", invalid="ignore"):
        # x == 0
        nz, pz, qz = n[zero], p[zero], q[zero]
        lz = np.where(pz < 0.1, -_bd0(nz, nz * qz) - nz * pz, nz * np.log(qz))
        out[zero] = np.where(nz == 0, 0.0, lz)

        # x == n > 0
        nf, pf, qf = n[full], p[full], q[full]
        out[full] = np.where(qf < 0.1, -_bd0(nf, nf * pf) - nf * qf, nf * np.log(pf))

        xi, ni, pi, qi = x[inner], n[inner], p[inner], q[inner]
        lc = (_stirlerr(ni) - _stirlerr(xi) - _stirlerr(ni - xi)
              - _bd0(xi, ni * pi) - _bd0(ni - xi, ni * qi))
        lf = _LN_2PI + np.log(xi) + np.log1p(-xi / ni)
        out[inner] = lc - 0.5 * lf
    # p == 0 or q == 0 can yield nan from 0*log(0); those are exact limits.
    bad = np.isnan(out)
    if bad.any():
        out[bad & (x == 0) & (p == 0)] = 0.0
        out[bad & (x == n) & (q == 0)] = 0.0
        out[np.isnan(out)] = -np.inf
    return out


def _check(x, n, n_ic, n_jr):
    if np.any(n < 1):
        raise ValueError("total number of calls must be >= 1")
    if np.any(n_ic < 0) or np.any(n_jr < 0):
        raise ValueError("call counts must be non-negative")
    if np.any(n_ic > n) or np.any(n_jr > n):
        raise ValueError("caller/receiver totals cannot exceed the network total")
    if np.any(x < 0):
        raise ValueError("observed co-occurrences must be non-negative")


def _as_int_arrays(*args):
    arrs = [np.asarray(a) for a in args]
    for a in arrs:
        if a.dtype.kind == "f" and np.any(a != np.floor(a)):
            raise ValueError("hypergeometric arguments must be integers")
    return [a.astype(np.int64) for a in np.broadcast_arrays(*arrs)]


def support(n, n_ic, n_jr):
    """Lowest and highest attainable X for the given marginals."""
    n, n_ic, n_jr = _as_int_arrays(n, n_ic, n_jr)
    return np.maximum(0, n_ic + n_jr - n), np.minimum(n_ic, n_jr)


def _log_pmf_unchecked(x, n, n_ic, n_jr):
    x = x.astype(np.float64)
    n = n.astype(np.float64)
    k = n_ic.astype(np.float64)
    d = n_jr.astype(np.float64)
    out = np.full(x.shape, -np.inf)
    ok = (x >= np.maximum(0.0, k + d - n)) & (x <= np.minimum(k, d))
    if ok.any():
        xo, no, ko, do = x[ok], n[ok], k[ok], d[ok]
        p = do / no
        q = (no - do) / no
        out[ok] = (_log_dbinom_raw(xo, ko, p, q)
                   + _log_dbinom_raw(do - xo, no - ko, p, q)
                   - _log_dbinom_raw(do, no, p, q))
    return np.minimum(out, 0.0)


def log_hypergeom_pmf(x, n, n_ic, n_jr):
    """Vectorised log P(X = x) for X ~ Hypergeometric(n, n_ic, n_jr).

    Values of ``x`` outside the support give ``-inf``.
    """
    x, n, n_ic, n_jr = _as_int_arrays(x, n, n_ic, n_jr)
    _check(x, n, n_ic, n_jr)
    return _log_pmf_unchecked(x, n, n_ic, n_jr)


def hypergeom_pmf(x, n, n_ic, n_jr):
    """Probability of observing ``x`` shared calls under random matching.

    Equal to ``C(n_ic, x) C(n - n_ic, n_jr - x) / C(n, n_jr)``; zero outside
    the support. Scalars in, float out; arrays broadcast.

    >>> round(hypergeom_pmf(0, 10, 2, 2), 10)
    0.6222222222
    """
    out = np.exp(log_hypergeom_pmf(x, n, n_ic, n_jr))
    return float(out) if out.ndim == 0 else out


def _ratio_up(x, n, k, d):
    # H(x + 1) / H(x)
    return (k - x) * (d - x) / ((x + 1.0) * (n - k - d + x + 1.0))


@np.errstate(divide="ignore", invalid="ignore")
def _sum_relative(start, stop, n, k, d, upward):
    """Sum of H(x)/H(start) walking from ``start`` toward ``stop`` (inclusive).

    The walk is over a monotonically decreasing run of terms, so once the
    geometric bound on what is left drops under the tolerance the remainder
    cannot matter.
    """
    total = np.ones(start.shape)
    term = np.ones(start.shape)
    x = start.astype(np.float64).copy()
    stop = stop.astype(np.float64)
    active = np.nonzero(x != stop)[0]
    while active.size:
        xa = x[active]
        na, ka, da = n[active], k[active], d[active]
        if upward:
            r = _ratio_up(xa, na, ka, da)
            x[active] = xa + 1.0
        else:
            r = 1.0 / _ratio_up(xa - 1.0, na, ka, da)
            x[active] = xa - 1.0
        t = term[active] * r
        term[active] = t
        s = total[active] + t
        total[active] = s
        if upward:
            r_next = _ratio_up(xa + 1.0, na, ka, da)
        else:
            with np.errstate(divide="ignore"):
                r_next = 1.0 / _ratio_up(xa - 2.0, na, ka, da)
        with np.errstate(divide="ignore", invalid="ignore"):
            bound = np.where(r_next < 1.0, t * r_next / (1.0 - r_next), np.inf)
        done = (x[active] == stop[active]) | (bound <= _TAIL_TOL * s) | (t == 0.0)
        active = active[~done]
    return total


def log_pvalues_over(x_obs, n, n_ic, n_jr):
    """Vectorised log P(X >= x_obs), summed over the upper tail directly."""
    x_obs, n, n_ic, n_jr = _as_int_arrays(x_obs, n, n_ic, n_jr)
    _check(x_obs, n, n_ic, n_jr)
    shape = x_obs.shape
    x_obs, n, n_ic, n_jr = (a.ravel() for a in (x_obs, n, n_ic, n_jr))
    lo = np.maximum(0, n_ic + n_jr - n)
    hi = np.minimum(n_ic, n_jr)
    out = np.zeros(x_obs.shape)
    out[x_obs > hi] = -np.inf

    idx = np.nonzero((x_obs > lo) & (x_obs <= hi))[0]
    if idx.size:
        xo, ni, ki, di = x_obs[idx], n[idx], n_ic[idx], n_jr[idx]
        lo_i, hi_i = lo[idx], hi[idx]
        mode = np.clip((ki + 1) * (di + 1) // (ni + 2), lo_i, hi_i)
        anchor = np.maximum(xo, mode)
        log_anchor = _log_pmf_unchecked(anchor, ni, ki, di)
        nf, kf, df = (a.astype(np.float64) for a in (ni, ki, di))
        rel = _sum_relative(anchor, hi_i, nf, kf, df, upward=True)
        below = np.nonzero(xo < anchor)[0]
        if below.size:
            down = _sum_relative(anchor[below], xo[below], nf[below], kf[below],
                                 df[below], upward=False)
            rel[below] += down - 1.0  # anchor term counted once
        out[idx] = np.minimum(log_anchor + np.log(rel), 0.0)
    return out.reshape(shape)


def pvalues_over(x_obs, n, n_ic, n_jr):
    """Vectorised P(X >= x_obs) under the random-matching null."""
    return np.exp(log_pvalues_over(x_obs, n, n_ic, n_jr))


def pvalue_over(x_obs, n, n_ic, n_jr):
    """P-value of observing at least ``x_obs`` calls from i to j.

    ``x_obs = 0`` (or any value at the bottom of the support) gives exactly 1.

    >>> round(pvalue_over(1, 10, 2, 2), 10)
    0.3777777778
    """
    out = pvalues_over(x_obs, n, n_ic, n_jr)
    return float(out) if np.ndim(out) == 0 else out
