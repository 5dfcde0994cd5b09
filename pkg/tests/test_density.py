import math

import numpy as np
import pytest
from scipy import stats as sps

from divkit import density
from divkit.errors import DomainError


def test_examples():
    g = density.gaussian(1.0)
    assert density.log_density(g, 0.0, 0.0) == pytest.approx(-0.5 * math.log(2 * math.pi), rel=1e-15)
    assert density.density(density.poisson(), 0, 2.0) == pytest.approx(math.exp(-2), rel=1e-14)
    model, mu = density.parse_model("gamma:a=2,b=2")
    assert mu == 1.0
    assert density.density(model, 1.0, mu) == pytest.approx(4 * math.exp(-2), rel=1e-14)


@pytest.mark.parametrize("sigma2, mu", [(1.0, 0.0), (2.0, 1.0), (0.3, -4.0)])
def test_gaussian_matches_scipy(sigma2, mu):
    xs = np.linspace(mu - 5, mu + 5, 41)
    ref = sps.norm(mu, math.sqrt(sigma2)).pdf(xs)
    assert np.allclose(density.density(density.gaussian(sigma2), xs, mu), ref, rtol=1e-10, atol=0)


@pytest.mark.parametrize("mu", [0.3, 2.0, 17.5])
def test_poisson_matches_scipy(mu):
    ks = np.arange(0, 40)
    ref = sps.poisson(mu).pmf(ks)
    assert np.allclose(density.density(density.poisson(), ks, mu), ref, rtol=1e-10, atol=0)


@pytest.mark.parametrize("a, mu", [(0.5, 1.0), (2.0, 1.0), (7.0, 3.5)])
def test_gamma_matches_scipy(a, mu):
    xs = np.linspace(0.05, 10, 40)
    ref = sps.gamma(a, scale=mu / a).pdf(xs)
    assert np.allclose(density.density(density.gamma(a), xs, mu), ref, rtol=1e-10, atol=0)


def test_printed_poisson_sign_does_not_normalize():
    # with exp(+x) in the base measure the mass is far from one
    ks = np.arange(0, 60)
    plus = np.exp(density._poisson_log_g(ks) + 2 * ks - density.poisson().beta(ks, 3.0))
    assert abs(plus.sum() - 1) > 1
    assert density.normalization_check(density.poisson(), 3.0, cap=60).passed


def test_normalization_examples():
    r = density.normalization_check(density.poisson(), 3.0, cap=60, tol=1e-12)
    assert r.passed, r
    sd = math.sqrt(2.0)
    r = density.normalization_check(density.gaussian(2.0), 1.0, bounds=(1 - 12 * sd, 1 + 12 * sd), tol=1e-10)
    assert r.passed, r
    r = density.normalization_check(density.gamma(3.0), 3.0, bounds=(1e-10, 60), tol=1e-8)
    assert r.passed, r


@pytest.mark.parametrize("a, mu", [(0.2, 1.0), (0.5, 3.0), (5.0, 2.0), (50.0, 0.1)])
def test_gamma_normalization_default_bounds(a, mu):
    assert density.normalization_check(density.gamma(a), mu).passed


def test_g_from_h():
    assert density.g_from_h(1.0, 0.0, 3.0) == 1.0
    sigma2, x = 2.5, 1.3
    h = math.exp(-x * x / (2 * sigma2)) / math.sqrt(2 * math.pi * sigma2)
    assert density.g_from_h(h, x * x / 2, sigma2) == pytest.approx((2 * math.pi * sigma2) ** -0.5)
    x = 4.0
    g = density.g_from_h(1 / math.factorial(4), x * math.log(x) - x, 1.0)
    assert g == pytest.approx(x**x * math.exp(-x) / math.factorial(4))
    assert density.log_g_from_h(0.0, 1.0, 2.0) == 0.5


def test_support_and_parse_errors():
    with pytest.raises(DomainError) as info:
        density.log_density(density.poisson(), 1.5, 2.0)
    assert info.value.argument == "x"
    with pytest.raises(DomainError):
        density.log_density(density.gamma(2.0), -1.0, 2.0)
    with pytest.raises(DomainError):
        density.log_density(density.gamma(2.0), 1.0, -2.0)
    for text in ("weibull", "gamma", "poisson:mu=2", "gaussian:s=1"):
        with pytest.raises(ValueError):
            density.parse_model(text)
