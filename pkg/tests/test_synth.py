import numpy as np
import pytest

from callnet import (
    SynthConfig, aggregate_pairs, build_dcn, degree_sequences, filter_valid, generate_null_cdr,
    generate_social_cdr, plant_random_ties, sample_truncated_powerlaw, empirical_pdf, fit_powerlaw_tail,
)
from callnet.synth import sample_bipowerlaw, sample_discrete_powerlaw


def test_null_volume_and_status():
    t = generate_null_cdr(SynthConfig(n_users=10_000, n_calls=100_000), 7)
    assert len(t) == 100_000 and np.all(t.status == 1)
    assert np.all(t.caller != t.callee)
    assert np.all(np.diff(t.start_time) >= 0)


def test_null_conservation_through_pipeline():
    t = generate_null_cdr(SynthConfig(n_users=1000, n_calls=10**6), 0)
    stats = aggregate_pairs(filter_valid(t))
    assert stats.total_calls == 10**6
    assert build_dcn(stats).n_edges == len(stats)


def test_same_seed_same_output():
    cfg = SynthConfig(n_users=500, n_calls=5000, activity=("truncated_powerlaw", 1.2, 30))
    assert generate_null_cdr(cfg, 3) == generate_null_cdr(cfg, 3)
    assert not generate_null_cdr(cfg, 3) == generate_null_cdr(cfg, 4)


def test_social_truth_lists_planted_pairs():
    ties = plant_random_ties(10_000, 20, 40, seed=1)
    cfg = SynthConfig(n_users=10_000, n_calls=100_000, ties=ties)
    t, truth = generate_social_cdr(cfg, 1)
    assert len(t) == 100_000 + 20 * 80
    assert len(truth) == 20 and all(a < b for a, b in truth)
    stats = aggregate_pairs(t)
    for a, b in truth:
        assert stats[(a, b)][0] >= 40 and stats[(b, a)][0] >= 40


def test_hotline_shape():
    cfg = SynthConfig(n_users=5000, n_calls=50_000, hotlines=(1, 5000), hotline_in_calls=3)
    t, _ = generate_social_cdr(cfg, 2)
    dcn = build_dcn(aggregate_pairs(t))
    d = degree_sequences(dcn)
    h = int(np.argmax(d["k_out"]))
    assert d["k_out"][h] > 3000 and d["k_in"][h] <= 5 + 30


def test_robot_shape():
    cfg = SynthConfig(n_users=5000, n_calls=50_000, robots=(2, 3000))
    t, _ = generate_social_cdr(cfg, 2)
    d = degree_sequences(build_dcn(aggregate_pairs(t)))
    assert np.sort(d["k_in"])[-2] > 2000


@pytest.mark.parametrize("bad", [
    dict(n_users=1), dict(n_calls=-1), dict(ties=[(1, 1, 5)]), dict(ties=[(0, 99999, 5)]),
    dict(activity="zipf"), dict(activity=("truncated_powerlaw", -1, 5)), dict(hotlines=(-1, 5)),
])
def test_invalid_config(bad):
    with pytest.raises(ValueError):
        generate_null_cdr(SynthConfig(**{"n_users": 100, "n_calls": 10, **bad}))


def test_exponential_mean():
    x = sample_truncated_powerlaw(0.0, 40, 10**6, seed=0)
    assert abs(x.mean() - 40) <= 0.02 * 40 and np.all(x > 0)


def test_powerlaw_slope_without_cutoff():
    x = sample_truncated_powerlaw(2.5, 1e9, 10**6, seed=2)
    r = fit_powerlaw_tail(empirical_pdf(x), 1)
    assert abs(r["exponent"] - 2.5) <= 0.1


def test_single_draw_and_bad_params():
    x = sample_truncated_powerlaw(1.5, 40, 1, seed=0)
    assert x.shape == (1,) and x[0] > 0
    for args in [(-0.5, 40, 10), (1.5, 0, 10), (1.5, 40, 0)]:
        with pytest.raises(ValueError):
            sample_truncated_powerlaw(*args)


def test_truncated_powerlaw_cdf_against_quadrature():
    from scipy.integrate import quad
    g, xc = 1.5, 40.0
    x = sample_truncated_powerlaw(g, xc, 400_000, seed=9)
    f = lambda t: t ** -g * np.exp(-t / xc)
    z = quad(f, 1, np.inf)[0]
    for q in (2.0, 10.0, 60.0):
        assert abs((x <= q).mean() - quad(f, 1, q)[0] / z) < 0.004


def test_bipowerlaw_sampler_support_and_mass():
    x = sample_bipowerlaw(1.8, 3.0, 120, 200_000, seed=0)
    assert x.min() >= 1
    m1 = (120 ** -0.8 - 1) / -0.8
    m2 = 120 ** 1.2 * 120 ** -2.0 / 2.0
    assert abs((x < 120).mean() - m1 / (m1 + m2)) < 0.005


def test_discrete_powerlaw_sampler():
    s = sample_discrete_powerlaw(2.5, 1, 200_000, seed=0, s_max=1000)
    p1 = 1.0 / np.sum(np.arange(1, 1001, dtype=float) ** -2.5)
    assert s.min() >= 1 and s.max() <= 1000
    assert abs((s == 1).mean() - p1) < 0.005
