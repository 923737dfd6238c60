import numpy as np
import pytest

from callnet import (
    FitError, empirical_pdf, fit_bipowerlaw, fit_powerlaw_tail, fit_truncated_powerlaw, sample_bipowerlaw,
    sample_discrete_powerlaw, sample_truncated_powerlaw,
)
from callnet.fitting import EmpiricalPdf


def test_identical_samples_single_bin():
    pdf = empirical_pdf(np.full(10, 7.0))
    assert pdf.occupied.sum() == 1
    assert pdf.density[0] == pytest.approx(1.0 / pdf.widths[0], rel=1e-15)


def test_uniform_density():
    x = np.random.default_rng(0).uniform(1, 2, 100_000)
    pdf = empirical_pdf(x, n_bins=10)
    assert np.all(np.abs(pdf.density - 1.0) < 0.05)
    assert pdf.integral() == pytest.approx(1.0, rel=1e-12)


def test_pdf_errors():
    with pytest.raises(FitError):
        empirical_pdf([])
    with pytest.raises(FitError):
        empirical_pdf([1.0, -2.0])
    with pytest.raises(FitError):
        empirical_pdf([1.0, 2.0], n_bins=1)
    with pytest.raises(FitError):
        empirical_pdf([1.5, 2.0], discrete=True)


def test_discrete_bins_cover_integers():
    s = np.array([1, 1, 2, 3, 7, 50, 900])
    pdf = empirical_pdf(s, discrete=True)
    assert np.all(pdf.edges == np.floor(pdf.edges)) and np.all(np.diff(pdf.edges) >= 1)
    assert pdf.count.sum() == len(s)
    assert pdf.integral() == pytest.approx(1.0, rel=1e-12)


def test_truncated_powerlaw_closure():
    x = sample_truncated_powerlaw(1.5, 40, 10**6, seed=0)
    r = fit_truncated_powerlaw(empirical_pdf(x))
    assert 1.4 <= r["gamma"] <= 1.6 and 32 <= r["x_c"] <= 48


def test_exponential_closure():
    x = sample_truncated_powerlaw(0.0, 40, 10**6, seed=1)
    r = fit_truncated_powerlaw(empirical_pdf(x))
    assert -0.1 <= r["gamma"] <= 0.1


def test_truncated_powerlaw_needs_four_bins():
    pdf = empirical_pdf(np.array([1.0, 2.0, 4.0]), n_bins=3)
    with pytest.raises(FitError):
        fit_truncated_powerlaw(pdf)


def test_tail_exponent_closure():
    s = sample_discrete_powerlaw(3.89, 1, 10**6, seed=5)
    r = fit_powerlaw_tail(empirical_pdf(s, discrete=True), 1)
    assert abs(r["alpha"] - 2.89) <= 0.15


def test_tail_exact_line():
    edges = np.geomspace(1, 1000, 11)
    x = np.sqrt(edges[:-1] * edges[1:])
    pdf = EmpiricalPdf(edges, x, 3.0 * x ** -2.5, np.ones(10, dtype=np.int64))
    r = fit_powerlaw_tail(pdf, 1)
    assert r["exponent"] == pytest.approx(2.5, abs=1e-12) and r.rss < 1e-20


def test_tail_xmin_above_data():
    pdf = empirical_pdf(np.arange(1, 100, dtype=float))
    with pytest.raises(FitError):
        fit_powerlaw_tail(pdf, 1000)


def test_bipowerlaw_closure():
    x = sample_bipowerlaw(1.8, 3.0, 120, 10**6, seed=3)
    pdf = empirical_pdf(x)
    r = fit_bipowerlaw(pdf, 120)
    true_bin = np.searchsorted(pdf.edges, 120) - 1  # bin containing the true break
    nearest_edge = int(np.argmin(np.abs(np.log(pdf.edges / 120))))
    assert abs(r.extra["break_bin"] - nearest_edge) <= 1 and true_bin <= r.extra["break_bin"] <= true_bin + 1
    assert abs(r["alpha1"] - 1.8) <= 0.2 and abs(r["alpha2"] - 3.0) <= 0.2
    assert not r.extra["degenerate"]


def test_bipowerlaw_single_regime_flagged():
    x = sample_bipowerlaw(2.0, 2.0, 120, 10**6, seed=4)
    r = fit_bipowerlaw(empirical_pdf(x), 120)
    assert abs(r["alpha1"] - r["alpha2"]) <= 0.1 and r.extra["degenerate"]


def test_bipowerlaw_hint_outside():
    pdf = empirical_pdf(sample_bipowerlaw(1.8, 3.0, 120, 1000, seed=0))
    with pytest.raises(FitError):
        fit_bipowerlaw(pdf, 1e9)


def test_component_ensemble_tail():
    sizes = sample_discrete_powerlaw(3.75, 2, 10**6, seed=6)
    r = fit_powerlaw_tail(empirical_pdf(sizes, discrete=True), 2)
    assert abs(r["alpha"] - 2.75) <= 0.15


def test_fit_is_deterministic_and_text():
    x = sample_truncated_powerlaw(1.5, 40, 10**5, seed=2)
    a = fit_truncated_powerlaw(empirical_pdf(x))
    b = fit_truncated_powerlaw(empirical_pdf(x))
    assert a.to_text() == b.to_text() and "param.gamma=" in a.to_text()


def test_fit_range_respected():
    x = sample_truncated_powerlaw(1.5, 40, 10**5, seed=2)
    r = fit_truncated_powerlaw(empirical_pdf(x), fit_range=(2, 200))
    assert r.fit_range[0] >= 2 and r.fit_range[1] <= 200


@pytest.mark.parametrize("seed", range(10))
def test_bipowerlaw_closure_across_seeds(seed):
    x = sample_bipowerlaw(1.8, 3.0, 120, 10**6, seed=100 + seed)
    pdf = empirical_pdf(x)
    r = fit_bipowerlaw(pdf, 120)
    k = np.searchsorted(pdf.edges, 120)
    ratio = pdf.edges[k] / pdf.edges[k - 1]
    assert 120 / ratio <= r["breakpoint"] <= 120 * ratio
    assert abs(r["alpha1"] - 1.8) <= 0.2 and abs(r["alpha2"] - 3.0) <= 0.2


@pytest.mark.parametrize("seed", range(5))
def test_tail_closure_across_seeds(seed):
    s = sample_discrete_powerlaw(3.89, 1, 10**6, seed=200 + seed)
    assert abs(fit_powerlaw_tail(empirical_pdf(s, discrete=True), 1)["alpha"] - 2.89) <= 0.15


def test_uniform_weighting_option():
    x = sample_truncated_powerlaw(1.5, 40, 10**5, seed=2)
    pdf = empirical_pdf(x)
    assert fit_truncated_powerlaw(pdf, weighting="uniform").extra["weighting"] == "uniform"
    with pytest.raises(ValueError):
        fit_powerlaw_tail(pdf, 1, weighting="poisson")
