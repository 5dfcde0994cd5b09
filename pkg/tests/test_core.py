import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from divkit import core
from divkit.core import Method
from divkit.errors import ConvergenceError, DomainError
from divkit.quadrature import QuadratureSpec
from divkit.varfun import Bernoulli, Custom, ExponentialVF, HyperbolicSecant, NegativeBinomial, TweediePower

LN2 = math.log(2.0)
FAMILIES = [
    TweediePower(0),
    TweediePower(1),
    TweediePower(1.5),
    TweediePower(2),
    TweediePower(3),
    Bernoulli(),
    NegativeBinomial(),
    HyperbolicSecant(),
    ExponentialVF(2.0),
    Custom("1 + mu + mu^2"),
]


def test_cumulant_examples():
    assert core.canonical_theta("tweedie:p=1", math.e, 1.0) == pytest.approx(1.0)
    assert core.canonical_theta("tweedie:p=0", 5.0, 1.0) == pytest.approx(4.0)
    assert core.cumulant_psi("tweedie:p=2", math.e, 1.0) == pytest.approx(1.0)
    assert core.cumulant_psi("tweedie:p=0", 3.0, 1.0) == pytest.approx(4.0)
    assert core.dual_cumulant_phi("tweedie:p=0", 3.0, 1.0) == pytest.approx(2.0)
    assert core.dual_cumulant_phi("tweedie:p=1", 1.0, 1.0) == 0.0
    assert core.dual_cumulant_phi("bernoulli", 0.25, 0.5) == pytest.approx(0.13081203594113697, rel=1e-12)


@pytest.mark.parametrize("vf", FAMILIES, ids=lambda v: v.token)
def test_empty_interval_is_zero(vf):
    base = vf.default_base
    for method in ("auto", "quad"):
        assert core.canonical_theta(vf, base, method=method) == 0.0
        assert core.cumulant_psi(vf, base, method=method) == 0.0
        assert core.beta_divergence(vf, base, base, method=method).value == 0.0


def test_divergence_examples():
    assert core.beta_divergence("tweedie:p=0", 3, 1).value == 2.0
    assert core.beta_divergence("tweedie:p=1", 2, 1).value == pytest.approx(2 * LN2 - 1, rel=1e-14)
    assert core.beta_divergence("sech", 1, 0).value == pytest.approx(0.4388245731174757, rel=1e-12)
    assert core.beta_divergence("negbin", 2, 1).value == pytest.approx(0.1698990367953972, rel=1e-12)
    assert core.alpha_divergence("tweedie:p=0", 3, 2).value == pytest.approx(0.25)
    assert core.alpha_divergence("tweedie:p=1", 2, 1).value == pytest.approx(2 * LN2 - 1)
    assert core.unit_deviance("tweedie:p=0", 3, 1) == 4.0
    assert core.unit_deviance("tweedie:p=1", 2, 1) == pytest.approx(2 * (2 * LN2 - 1))


def test_custom_uses_quadrature():
    res = core.beta_divergence('custom:"1+mu^2"', 1, 0)
    assert res.method is Method.QUADRATURE
    assert res.value == pytest.approx(math.pi / 4 + 0.5 * math.log(0.5), rel=1e-10)
    with pytest.raises(ValueError):
        core.beta_divergence(Custom("1+mu^2"), 1, 0, method="closed")


def test_alpha_routes_agree():
    for vf, x, mu in [(TweediePower(0), 3, 2), (TweediePower(1), 2, 1), (NegativeBinomial(), 2, 1)]:
        direct = core.alpha_divergence(vf, x, mu, method="quad").value
        nested = core.alpha_divergence_via_cumulant(vf, x, mu).value
        assert nested == pytest.approx(direct, rel=1e-7)
    assert core.alpha_divergence_via_cumulant("tweedie:p=1", 3, 3).value == 0.0


def test_alpha_requires_unit_in_domain():
    with pytest.raises(DomainError):
        core.alpha_divergence(Bernoulli(), 0.3, 0.5)
    with pytest.raises(DomainError):
        core.alpha_divergence("sech", 1.0, -1.0)


def test_quasi_log_likelihood():
    assert core.quasi_log_likelihood("tweedie:p=1", 2, 2, 1).value == pytest.approx(2 * LN2 - 1)
    assert core.quasi_log_likelihood("tweedie:p=1", 2, 1, 1).value == 0.0
    assert core.quasi_log_likelihood("tweedie:p=0", 3, 2, 0).value == pytest.approx(4.0)
    # a zero count is allowed
    assert core.quasi_log_likelihood("tweedie:p=1", 0, 2, 1).value == pytest.approx(-1.0)


def test_domain_errors_name_argument():
    with pytest.raises(DomainError) as info:
        core.beta_divergence("tweedie:p=2", 1.0, -2.0)
    assert info.value.argument == "mu"
    with pytest.raises(DomainError) as info:
        core.beta_divergence("bernoulli", 1.5, 0.5)
    assert info.value.argument == "x"


def test_nonconvergence_raises():
    tight = QuadratureSpec(rel_tol=1e-15, abs_tol=1e-300, max_subdivisions=1)
    with pytest.raises(ConvergenceError):
        core.beta_divergence(Custom("1 + mu^2"), 9.0, -9.0, spec=tight)


@pytest.mark.parametrize("vf", FAMILIES, ids=lambda v: v.token)
def test_duality_and_bregman(vf):
    rng = np.random.default_rng(3)
    for x, mu in zip(vf.domain.sample(rng, 5), vf.domain.sample(rng, 5)):
        pair = core.cumulant_pair(vf, mu)
        assert pair.duality_residual(mu) == pytest.approx(0.0, abs=1e-10 * max(1.0, abs(pair.phi)))
        rhs = core.dual_cumulant_phi(vf, x) - pair.phi - (x - mu) * pair.theta
        assert core.beta_divergence(vf, x, mu).value == pytest.approx(rhs, rel=1e-8, abs=1e-11)


@pytest.mark.parametrize("vf", FAMILIES, ids=lambda v: v.token)
def test_derivatives(vf):
    rng = np.random.default_rng(5)
    for mu in vf.domain.sample(rng, 4):
        h = 1e-5 * max(1.0, abs(mu))
        dphi = (core.dual_cumulant_phi(vf, mu + h) - core.dual_cumulant_phi(vf, mu - h)) / (2 * h)
        dtheta = (core.canonical_theta(vf, mu + h) - core.canonical_theta(vf, mu - h)) / (2 * h)
        assert dphi == pytest.approx(core.canonical_theta(vf, mu), rel=1e-5, abs=1e-7)
        assert dtheta == pytest.approx(1.0 / vf(mu), rel=1e-5)


@settings(max_examples=40, deadline=None)
@given(st.sampled_from(FAMILIES[:8]), st.data())
def test_beta_nonnegative_and_zero_on_diagonal(vf, data):
    lo, hi = vf.domain.typical_range()
    x = data.draw(st.floats(lo, hi))
    mu = data.draw(st.floats(lo, hi))
    d = core.beta_divergence(vf, x, mu).value
    assert d >= 0.0
    assert core.beta_divergence(vf, mu, mu).value == 0.0


def test_evaluate_dispatch():
    ev = core.evaluate("deviance", "tweedie:p=1", 2, 1)
    assert ev.value == pytest.approx(2 * (2 * LN2 - 1))
    assert ev.method is Method.CLOSED_FORM
    assert core.evaluate("theta", "tweedie:p=1", mu=math.e).value == pytest.approx(1.0)
    with pytest.raises(ValueError):
        core.evaluate("gamma", "tweedie:p=1", 1, 1)
