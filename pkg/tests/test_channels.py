import math
import warnings

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

import oracles
from mdsearch._quad import QuadratureError, integrate
from mdsearch.channels import (
    ChannelError,
    ChannelModel,
    MonotonicityWarning,
    crossover_prob,
    divergence_c1,
    log_likelihood,
    sample_output,
)


def test_crossover_examples(fig3):
    assert crossover_prob(fig3, 0.0) == pytest.approx(0.1, abs=1e-15)
    assert crossover_prob(fig3, 0.5) == pytest.approx(0.45, abs=1e-15)
    assert crossover_prob(ChannelModel.linear_bsc(0, 0.2), 0.3) == 0.2


def test_crossover_rejects_bad_domain(fig3):
    with pytest.raises(ChannelError):
        crossover_prob(fig3, 0.6)  # 0.52 >= 1/2
    with pytest.raises(ValueError):
        crossover_prob(fig3, -0.1)
    with pytest.raises(ChannelError):
        crossover_prob(ChannelModel.gaussian_pair(1.0), 0.1)


@pytest.mark.parametrize("a,b", [(-0.1, 0.1), (0.0, 0.5), (0.4, 0.3), (0.2, -0.01)])
def test_linear_bsc_invalid(a, b):
    with pytest.raises(ChannelError):
        ChannelModel.linear_bsc(a, b)


def test_gaussian_invalid():
    with pytest.raises(ChannelError):
        ChannelModel.gaussian_pair(1.0, a_var=2.0, b_var=1.0)
    with pytest.raises(ChannelError):
        ChannelModel.gaussian_pair(1.0, a_var=-1.5, b_var=-1.0)


def test_non_monotone_gaussian_rejected_or_warned():
    # a strongly shrinking miss variance makes the channel better for large q
    with pytest.raises(ChannelError):
        ChannelModel.gaussian_pair(1.0, a_var=-0.9, b_var=-0.9)
    with pytest.warns(MonotonicityWarning):
        m = ChannelModel.gaussian_pair(1.0, a_var=-0.9, b_var=-0.9, require_monotone=False)
    assert m.monotone is False


def test_model_dict_roundtrip(fig3):
    g = ChannelModel.gaussian_pair(0.5, 0.5, 0.5)
    for m in (fig3, g):
        assert ChannelModel.from_dict(m.to_dict()) == m
    with pytest.raises(ChannelError):
        ChannelModel.from_dict({"variant": "linear_bsc", "a": 0.1, "mu": 1})


def test_clean_channel_sampling():
    m = ChannelModel.linear_bsc(0, 0)
    rng = np.random.default_rng(0)
    assert np.all(sample_output(m, np.ones(1000, np.int8), 0.3, rng) == 1)


def test_flip_frequency(fig3):
    n = 10**6
    rng = np.random.default_rng(1)
    y = sample_output(fig3, np.zeros(n, np.int8), 0.5, rng)
    sd = math.sqrt(0.45 * 0.55 / n)
    assert abs(y.mean() - 0.45) < 3 * sd


def test_gaussian_sample_mean():
    m = ChannelModel.gaussian_pair(0.1)
    y = sample_output(m, np.ones(10**6, np.int8), 0.0, np.random.default_rng(2))
    assert abs(y.mean() - 0.1) < 3e-3
    assert abs(y.var() - 1.0) < 1e-2
    y0 = sample_output(m, np.zeros(10**6, np.int8), 0.0, np.random.default_rng(3))
    assert abs(y0.var() - 2.0) < 2e-2


def test_log_likelihood_examples(bsc01):
    assert log_likelihood(bsc01, 1, 1, 0.3) == pytest.approx(math.log2(0.9), abs=1e-12)
    assert log_likelihood(bsc01, 0, 1, 0.3) == pytest.approx(-3.32193, abs=1e-5)
    g = ChannelModel.gaussian_pair(0.7)
    assert log_likelihood(g, 0.7, 1, 0.0) == pytest.approx(math.log2(1 / math.sqrt(2 * math.pi)))


@pytest.mark.parametrize("q", [0.0, 0.13, 0.5, 1.0])
def test_likelihood_normalises(q):
    m = ChannelModel.linear_bsc(0.3, 0.05)
    for x in (0, 1):
        tot = sum(2.0 ** log_likelihood(m, y, x, q) for y in (0, 1))
        assert tot == pytest.approx(1.0, abs=1e-12)
    g = ChannelModel.gaussian_pair(1.3, 0.5, 2.0)
    for x in (0, 1):
        val = integrate(lambda y: 2.0 ** log_likelihood(g, y, x, q), -60.0, 60.0, tol=1e-11)
        assert float(val) == pytest.approx(1.0, abs=1e-9)


def test_c1_examples(fig3):
    assert divergence_c1(fig3, 0.0) == pytest.approx(2.53594000, abs=1e-6)
    assert divergence_c1(ChannelModel.gaussian_pair(0.0), 0.0) == pytest.approx(0.1393262398, abs=1e-9)
    # p(q) = 1/2 exactly only at the edge of validity; check the limit instead
    m = ChannelModel.linear_bsc(0.0, 0.4999999)
    assert divergence_c1(m, 0.2) < 1e-10


def test_c1_matches_numeric_kl():
    g = ChannelModel.gaussian_pair(0.8, 0.5, 1.5)
    q = 0.3
    m1, v1, v0 = 0.8, 1.15, 2.45

    def f(y):
        p = oracles.npdf(y, m1, v1)
        return p * math.log2(p / oracles.npdf(y, 0.0, v0))

    from scipy import integrate as si

    ref = si.quad(f, -40, 40, limit=300)[0]
    assert divergence_c1(g, q) == pytest.approx(ref, abs=1e-9)


@given(a=st.floats(0, 0.6), b=st.floats(0, 0.19))
def test_bsc_c1_monotone_nonnegative(a, b):
    m = ChannelModel.linear_bsc(a, b)
    c = divergence_c1(m, np.linspace(0, 0.5, 50))
    assert np.all(c >= 0)
    finite = c[np.isfinite(c)]
    assert np.all(np.diff(finite) <= 1e-12)


def test_quadrature_reports_failure():
    with pytest.raises(QuadratureError) as info:
        integrate(lambda y: np.sin(1e4 * y), 0.0, 10.0, tol=1e-12, max_panels=8)
    assert info.value.achieved > 1e-12
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        assert float(integrate(lambda y: y * y, 0.0, 1.0)) == pytest.approx(1 / 3, abs=1e-12)
