import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy import stats

from qdh.channel import (
    DARK_COUNT_PROB,
    ChannelParams,
    gauss_hermite_rule,
    gauss_marginalize,
    sample_phase,
    sigma_phi,
    transmissivity,
)
from qdh.errors import ConfigError
from qdh.protocol import event_probs


def riemann_gauss(f, sigma, n=200_001):
    """Dense midpoint rule over [-8 sigma, 8 sigma]."""
    h = 16 * sigma / n
    phi = -8 * sigma + h * (np.arange(n) + 0.5)
    dens = np.exp(-(phi**2) / (2 * sigma**2)) / (sigma * math.sqrt(2 * math.pi))
    return float(np.sum(f(phi) * dens) * h)


@pytest.mark.parametrize("length,eta", [(0, 1.0), (50, 0.1), (100, 0.01)])
def test_transmissivity_examples(length, eta):
    assert transmissivity(ChannelParams(length_km=length)) == pytest.approx(eta, rel=1e-14)


@given(l1=st.floats(0, 300), l2=st.floats(0, 300))
def test_transmissivity_multiplicative(l1, l2):
    lhs = transmissivity(ChannelParams(length_km=l1 + l2))
    rhs = transmissivity(ChannelParams(length_km=l1)) * transmissivity(ChannelParams(length_km=l2))
    assert abs(lhs - rhs) <= 1e-12


@pytest.mark.parametrize("length,sigma", [(0, 0.0), (100, 0.31622776601683794), (250, 0.5)])
def test_sigma_examples(length, sigma):
    p = ChannelParams(length_km=length)
    assert sigma_phi(p) == pytest.approx(sigma, abs=1e-15)
    assert p.sigma_phi == sigma_phi(p)


def test_params_validation():
    with pytest.raises(ConfigError):
        ChannelParams(length_km=-1)
    with pytest.raises(ConfigError):
        ChannelParams(eta_d=0.0)
    with pytest.raises(ConfigError):
        ChannelParams(eta_d=1.5)
    with pytest.raises(ConfigError):
        ChannelParams(diffusion=-1e-3)
    with pytest.raises(ConfigError):
        ChannelParams(length_km=math.nan)


def test_eta_in_unit_interval():
    for length in (0, 1, 500, 5000):
        assert 0 < ChannelParams(length_km=length).eta <= 1


def test_dark_counts_off():
    assert DARK_COUNT_PROB == 0.0


# -- sample_phase ------------------------------------------------------------


def test_sample_phase_zero_width(rng):
    p = ChannelParams(length_km=0)
    assert sample_phase(p, rng) == 0.0
    assert np.all(sample_phase(p, rng, 10) == 0.0)


def test_sample_phase_moments_and_ks(rng):
    # sigma = 0.3 -> D L = 0.09
    p = ChannelParams(length_km=90.0, diffusion=1e-3)
    assert p.sigma_phi == pytest.approx(0.3)
    x = sample_phase(p, rng, 10**6)
    assert abs(x.mean()) <= 4 * 0.3 / 1000
    assert abs(x.std() - 0.3) <= 0.003
    assert stats.kstest(x, stats.norm(scale=0.3).cdf).statistic < 0.002


# -- quadrature --------------------------------------------------------------


def test_rule_weights_and_moments():
    rule = gauss_hermite_rule()
    assert len(rule.nodes) == 101
    assert abs(rule.weights.sum() - 1) <= 1e-10
    assert abs(np.dot(rule.weights, rule.nodes**2) - 1) <= 1e-10
    assert abs(np.dot(rule.weights, rule.nodes**4) - 3) <= 1e-9


def test_marginalize_constant():
    assert gauss_marginalize(lambda phi: np.full_like(phi, 0.37), 0.4) == pytest.approx(0.37, abs=1e-14)


def test_marginalize_zero_width_evaluates_at_origin():
    assert gauss_marginalize(lambda phi: np.cos(phi) + 2, 0.0) == 3.0


@pytest.mark.parametrize("sigma", [0.05, 0.3, 1.0, 3.0, 4 * math.pi - 1e-9])
def test_marginalize_cosine_characteristic_function(sigma):
    assert abs(gauss_marginalize(np.cos, sigma) - math.exp(-(sigma**2) / 2)) <= 1e-9


def test_marginalize_reference_example():
    assert gauss_marginalize(np.cos, 0.3) == pytest.approx(0.95600, abs=1e-5)


def test_marginalize_wide_drift_washes_out():
    assert abs(gauss_marginalize(np.cos, 10.0)) < 1e-10
    assert abs(gauss_marginalize(np.cos, 100.0)) < 1e-10


def test_marginalize_rejects_bad_sigma():
    with pytest.raises(ConfigError):
        gauss_marginalize(np.cos, -0.1)


@pytest.mark.parametrize("sigma", [0.1, 0.5, 1.0, 2.0])
@pytest.mark.parametrize("eta", [1.0, 0.1, 0.01])
def test_marginalize_matches_riemann_on_click_integrands(sigma, eta):
    for s in (0, 1):
        for field in ("click_d0", "click_d1", "no_click", "double_click"):

            def f(phi, s=s, field=field):
                return getattr(event_probs(s, phi, eta, 0.5, 0.5), field)

            assert abs(gauss_marginalize(f, sigma) - riemann_gauss(f, sigma)) <= 1e-8
