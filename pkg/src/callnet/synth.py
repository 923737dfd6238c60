"""Synthetic call records with known ground truth.

* null traffic: each call's caller follows an activity distribution and the
  receiver is any other user, uniformly;
* planted ties: reciprocal bursts between chosen pairs;
* hot lines: users placing many calls to distinct random users, almost never
  called back;
* robots: users receiving calls from many distinct random users.

Users are named ``u`` plus a zero-padded index so that label order equals
index order. All randomness flows from one ``numpy.random.Generator``.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .ingest import CallTable

__all__ = [
    "SynthConfig",
    "generate_null_cdr",
    "generate_social_cdr",
    "plant_random_ties",
    "sample_truncated_powerlaw",
    "sample_bipowerlaw",
    "sample_discrete_powerlaw",
    "user_labels",
]

DEFAULT_T0 = 1277654400  # 2010-06-28 00:00 +08:00
DEFAULT_WINDOW = 27 * 86400


@dataclass
class SynthConfig:
    """Generator settings.

    ``activity`` is ``"uniform"`` or ``("truncated_powerlaw", gamma, x_c)``.
    ``ties`` lists ``(i, j, calls_each_direction)`` with user indices.
    ``hotlines``/``robots`` are ``(count, calls)`` tuples; a hot line places
    ``calls`` out-calls and receives ``hotline_in_calls`` calls, a robot
    receives ``calls`` calls.
    """

    n_users: int = 10_000
    n_calls: int = 100_000
    activity: object = "uniform"
    ties: list = field(default_factory=list)
    hotlines: tuple = (0, 0)
    hotline_in_calls: int = 2
    robots: tuple = (0, 0)
    duration_mu: float = 4.5
    duration_sigma: float = 1.0
    t0: int = DEFAULT_T0
    window: int = DEFAULT_WINDOW

    def validate(self):
        if self.n_users < 2:
            raise ValueError("need at least 2 users")
        if self.n_calls < 0:
            raise ValueError("call volume must be non-negative")
        for i, j, c in self.ties:
            if i == j:
                raise ValueError("planted tie endpoints must differ")
            if not (0 <= i < self.n_users and 0 <= j < self.n_users):
                raise ValueError("planted tie endpoint out of range")
            if c < 0:
                raise ValueError("planted tie volume must be non-negative")
        for count, calls in (self.hotlines, self.robots):
            if count < 0 or calls < 0:
                raise ValueError("hotline/robot specs must be non-negative")
        if self.hotlines[0] + self.robots[0] > self.n_users:
            raise ValueError("more special users than users")
        if self.hotline_in_calls < 0:
            raise ValueError("hotline in-calls must be non-negative")
        if self.window < 1:
            raise ValueError("window must be positive")
        if isinstance(self.activity, str):
            if self.activity != "uniform":
                raise ValueError(f"unknown activity spec {self.activity!r}")
        else:
            kind, gamma, x_c = self.activity
            if kind != "truncated_powerlaw" or gamma < 0 or x_c <= 0:
                raise ValueError(f"bad activity spec {self.activity!r}")
        return self


def user_labels(n_users: int) -> np.ndarray:
    width = len(str(n_users - 1))
    out = np.empty(n_users, dtype=object)
    out[:] = [f"u{i:0{width}d}" for i in range(n_users)]
    return out


def _activity_weights(config: SynthConfig, rng) -> np.ndarray:
    if isinstance(config.activity, str):
        return np.full(config.n_users, 1.0 / config.n_users)
    _, gamma, x_c = config.activity
    w = sample_truncated_powerlaw(gamma, x_c, config.n_users, rng)
    return w / w.sum()


def _uniform_other(rng, n_users: int, exclude: np.ndarray) -> np.ndarray:
    r = rng.integers(0, n_users - 1, size=len(exclude))
    return r + (r >= exclude)


def _durations(config, rng, n):
    return np.rint(rng.lognormal(config.duration_mu, config.duration_sigma, n)).astype(np.int64)


def _null_columns(config: SynthConfig, rng):
    p = _activity_weights(config, rng)
    callers = rng.choice(config.n_users, size=config.n_calls, p=p)
    callees = _uniform_other(rng, config.n_users, callers)
    return callers, callees


def _assemble(config, rng, callers, callees) -> CallTable:
    n = len(callers)
    times = config.t0 + rng.integers(0, config.window, size=n)
    durs = _durations(config, rng, n)
    order = np.lexsort((callees, callers, times))
    return CallTable(user_labels(config.n_users), callers[order], callees[order],
                     times[order], durs[order], np.ones(n, dtype=np.int64)).compact()


def generate_null_cdr(config: SynthConfig, seed: int = 0) -> CallTable:
    """Random-matching traffic: ``n_calls`` successful calls, no self-calls.

    Records come out sorted by start time.
    """
    config.validate()
    rng = np.random.default_rng(seed)
    callers, callees = _null_columns(config, rng)
    return _assemble(config, rng, callers, callees)


def generate_social_cdr(config: SynthConfig, seed: int = 0):
    """Null background plus planted ties, hot lines and robots.

    Returns ``(records, truth)`` where ``truth`` is the list of planted
    unordered pairs as ``(label_i, label_j)`` with ``label_i < label_j``.
    Hot lines and robots are drawn from users not on a planted tie.
    """
    config.validate()
    rng = np.random.default_rng(seed)
    callers, callees = _null_columns(config, rng)
    parts_c, parts_r = [callers], [callees]

    for i, j, c in config.ties:
        parts_c += [np.full(c, i), np.full(c, j)]
        parts_r += [np.full(c, j), np.full(c, i)]

    tied = {i for i, _, _ in config.ties} | {j for _, j, _ in config.ties}
    pool = np.array([u for u in range(config.n_users) if u not in tied])
    n_hot, hot_calls = config.hotlines
    n_rob, rob_calls = config.robots
    if n_hot + n_rob > len(pool):
        raise ValueError("not enough untied users for hot lines and robots")
    special = rng.choice(pool, size=n_hot + n_rob, replace=False)
    for h in special[:n_hot]:
        hs = np.full(hot_calls, h)
        parts_c.append(hs)
        parts_r.append(_uniform_other(rng, config.n_users, hs))
        hin = np.full(config.hotline_in_calls, h)
        parts_c.append(_uniform_other(rng, config.n_users, hin))
        parts_r.append(hin)
    for b in special[n_hot:]:
        bs = np.full(rob_calls, b)
        parts_c.append(_uniform_other(rng, config.n_users, bs))
        parts_r.append(bs)

    callers = np.concatenate(parts_c).astype(np.int64)
    callees = np.concatenate(parts_r).astype(np.int64)
    labels = user_labels(config.n_users)
    truth = sorted({tuple(sorted((labels[i], labels[j]))) for i, j, _ in config.ties})
    return _assemble(config, rng, callers, callees), truth


def plant_random_ties(n_users: int, n_ties: int, calls: int, seed: int = 0) -> list:
    """``n_ties`` node-disjoint random pairs, each with ``calls`` per direction."""
    if 2 * n_ties > n_users:
        raise ValueError("not enough users for disjoint ties")
    rng = np.random.default_rng(seed)
    nodes = rng.choice(n_users, size=2 * n_ties, replace=False)
    return [(int(nodes[2 * k]), int(nodes[2 * k + 1]), calls) for k in range(n_ties)]


# -- distribution samplers ---------------------------------------------------

_GRID = 20001


def _truncated_powerlaw_table(gamma: float, x_c: float, x_min: float):
    """Log-spaced grid and normalised CDF of x^-gamma exp(-x/x_c) on [x_min, inf)."""
    hi = x_c * 60.0 + x_min
    lo = x_min if x_min > 0 else x_c * 1e-12
    u = np.linspace(np.log(lo), np.log(hi), _GRID)
    x = np.exp(u)
    # integrate in u = log x, where the integrand x^(1-gamma) e^(-x/x_c) is smooth
    f = np.exp((1.0 - gamma) * u - x / x_c)
    h = u[1] - u[0]
    # cumulative Simpson on pairs of intervals, trapezoid-corrected in between
    seg = h / 12.0 * (5 * f[:-2] + 8 * f[1:-1] - f[2:])
    seg = np.r_[seg, h / 12.0 * (-f[-3] + 8 * f[-2] + 5 * f[-1])]
    cdf = np.r_[0.0, np.cumsum(seg)]
    if x_min == 0:
        # mass on (0, lo] where exp(-x/x_c) ~ 1
        head = lo ** (1.0 - gamma) / (1.0 - gamma)
        cdf = np.r_[0.0, head + cdf]
        x = np.r_[0.0, x]
    return x, cdf / cdf[-1]


def sample_truncated_powerlaw(gamma: float, x_c: float, n: int, seed=0,
                              x_min: float | None = None) -> np.ndarray:
    """Draw ``n`` values with density proportional to x^-gamma exp(-x/x_c).

    The support starts at ``x_min``, by default 0 when gamma < 1 (where the
    density is integrable there) and 1 otherwise. Inversion uses a tabulated
    CDF on a log grid, interpolated in log x.
    """
    if gamma < 0 or x_c <= 0 or n < 1:
        raise ValueError("need gamma >= 0, x_c > 0 and n >= 1")
    if x_min is None:
        x_min = 0.0 if gamma < 1 else 1.0
    if x_min < 0 or (x_min == 0 and gamma >= 1):
        raise ValueError("x_min must be positive when gamma >= 1")
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    x, cdf = _truncated_powerlaw_table(gamma, x_c, x_min)
    u = rng.random(n)
    if x_min == 0:
        # below the first grid point the CDF is a pure power: invert exactly
        head = u < cdf[1]
        out = np.empty(n)
        out[head] = x[1] * (u[head] / cdf[1]) ** (1.0 / (1.0 - gamma))
        rest = ~head
        out[rest] = np.exp(np.interp(u[rest], cdf[1:], np.log(x[1:])))
        return out
    return np.exp(np.interp(u, cdf, np.log(x)))


def sample_bipowerlaw(alpha1: float, alpha2: float, breakpoint: float, n: int, seed=0,
                      x_min: float = 1.0) -> np.ndarray:
    """Continuous density ~ x^-alpha1 on [x_min, b) and ~ x^-alpha2 beyond, joined at b."""
    if alpha2 <= 1 or not x_min < breakpoint:
        raise ValueError("need alpha2 > 1 and x_min < breakpoint")
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)

    def seg_mass(a, lo, hi):
        if a == 1:
            return np.log(hi / lo)
        return (hi ** (1 - a) - lo ** (1 - a)) / (1 - a)

    m1 = seg_mass(alpha1, x_min, breakpoint)
    # right piece scaled by b^(alpha2 - alpha1) for continuity
    m2 = breakpoint ** (alpha2 - alpha1) * breakpoint ** (1 - alpha2) / (alpha2 - 1)
    u = rng.random(n) * (m1 + m2)
    out = np.empty(n)
    left = u < m1
    ul = u[left]
    if alpha1 == 1:
        out[left] = x_min * np.exp(ul)
    else:
        out[left] = (x_min ** (1 - alpha1) + (1 - alpha1) * ul) ** (1 / (1 - alpha1))
    ur = (u[~left] - m1) / breakpoint ** (alpha2 - alpha1)
    out[~left] = (breakpoint ** (1 - alpha2) - (alpha2 - 1) * ur) ** (1 / (1 - alpha2))
    return out


def sample_discrete_powerlaw(exponent: float, s_min: int, n: int, seed=0,
                             s_max: int = 10**6) -> np.ndarray:
    """Integers in [s_min, s_max] with P(s) proportional to s^-exponent."""
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    s = np.arange(s_min, s_max + 1, dtype=np.float64)
    cdf = np.cumsum(s ** -exponent)
    cdf /= cdf[-1]
    return (np.searchsorted(cdf, rng.random(n), side="right") + s_min).astype(np.int64)
