"""Expected beta divergence, the Jensen-gap identity and entropy.

Monte Carlo estimates are built from fixed-size blocks, each drawn from its
own Philox stream keyed by ``(seed, block index)``.  Block statistics are
merged in block order, so the result does not depend on how many worker
threads produced the blocks.
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.special import digamma, xlogy

from . import closed, core
from .density import DispersionModel
from .errors import SamplerDriftError, UnsupportedError
from .report import PropertyReport
from .varfun import TweediePower, make_variance_function

__all__ = [
    "MonteCarloSpec",
    "Estimate",
    "Sampler",
    "gaussian_sampler",
    "poisson_sampler",
    "gamma_sampler",
    "constant_sampler",
    "sampler_for",
    "mc_mean",
    "mc_means",
    "expected_beta_tweedie",
    "expected_beta_mc",
    "jensen_gap_check",
    "entropy_via_divergence",
    "entropy_via_divergence_mc",
    "score_identity_checks",
    "expected_qll_check",
]

BLOCK_SIZE = 1 << 16
SE_MULTIPLIER = 4.0
DRIFT_MULTIPLIER = 5.0


@dataclass(frozen=True)
class MonteCarloSpec:
    sample_count: int = 1_000_000
    seed: int = 8675309
    workers: int = 1

    def __post_init__(self):
        if self.sample_count < 1000:
            raise ValueError("sample_count must be at least 1000")
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must fit in 64 unsigned bits")
        if self.workers < 1:
            raise ValueError("workers must be at least 1")


@dataclass(frozen=True)
class Estimate:
    """Sample mean with its standard error."""

    value: float
    std_error: float
    n: int

    def __float__(self):
        return float(self.value)


@dataclass(frozen=True)
class Sampler:
    """Draws ``x`` with known mean; ``draw(rng, n)`` returns an array."""

    name: str
    mean: float
    draw: Callable[[np.random.Generator, int], np.ndarray]
    model: DispersionModel | None = None


def gaussian_sampler(mu, sigma2=1.0):
    from .density import gaussian

    sd = math.sqrt(sigma2)
    return Sampler("gaussian", float(mu), lambda rng, n: rng.normal(mu, sd, n), gaussian(sigma2))


def poisson_sampler(mu):
    from .density import poisson

    return Sampler("poisson", float(mu), lambda rng, n: rng.poisson(mu, n).astype(float), poisson())


def gamma_sampler(a, b):
    """Gamma with shape ``a`` and rate ``b``; mean ``a/b``."""
    from .density import gamma

    return Sampler("gamma", a / b, lambda rng, n: rng.gamma(a, 1.0 / b, n), gamma(a))


def constant_sampler(value):
    return Sampler("constant", float(value), lambda rng, n: np.full(n, float(value)))


def sampler_for(model: DispersionModel, mu):
    if model.name == "gaussian":
        return gaussian_sampler(mu, model.dispersion)
    if model.name == "poisson":
        return poisson_sampler(mu)
    if model.name == "gamma":
        a = model.params["a"]
        return gamma_sampler(a, a / mu)
    raise UnsupportedError(f"no sampler for the {model.name} model")


def _block_rng(seed, index):
    return np.random.Generator(np.random.Philox(key=[seed, index]))


def _block_stats(fns, sampler, seed, index, n):
    x = sampler.draw(_block_rng(seed, index), n)
    out = []
    for fn in fns:
        y = np.asarray(fn(x), dtype=float)
        m = float(y.mean())
        out.append((n, m, float(((y - m) ** 2).sum())))
    return out


def _merge(a, b):
    # Chan et al. pairwise update of (count, mean, M2)
    na, ma, sa = a
    nb, mb, sb = b
    n = na + nb
    d = mb - ma
    return n, ma + d * nb / n, sa + sb + d * d * na * nb / n


def mc_means(fns, sampler: Sampler, spec: MonteCarloSpec = MonteCarloSpec()) -> list[Estimate]:
    """Estimate ``E[fn(x)]`` for each vectorised ``fn`` on one shared sample."""
    sizes = [BLOCK_SIZE] * (spec.sample_count // BLOCK_SIZE)
    if spec.sample_count % BLOCK_SIZE:
        sizes.append(spec.sample_count % BLOCK_SIZE)
    jobs = [(i, n) for i, n in enumerate(sizes)]
    if spec.workers > 1:
        with ThreadPoolExecutor(spec.workers) as pool:
            blocks = list(pool.map(lambda job: _block_stats(fns, sampler, spec.seed, *job), jobs))
    else:
        blocks = [_block_stats(fns, sampler, spec.seed, *job) for job in jobs]
    estimates = []
    for k in range(len(fns)):
        acc = blocks[0][k]
        for block in blocks[1:]:
            acc = _merge(acc, block[k])
        n, mean, m2 = acc
        var = m2 / (n - 1)
        estimates.append(Estimate(mean, math.sqrt(var / n), n))
    return estimates


def mc_mean(fn, sampler: Sampler, spec: MonteCarloSpec = MonteCarloSpec()) -> Estimate:
    return mc_means([fn], sampler, spec)[0]


def _check_drift(sampler, spec, mean_est=None):
    est = mean_est or mc_mean(lambda x: x, sampler, spec)
    if abs(est.value - sampler.mean) > DRIFT_MULTIPLIER * est.std_error + 1e-12 * max(1.0, abs(sampler.mean)):
        raise SamplerDriftError(
            f"{sampler.name} sampler mean {est.value:.6g} is more than {DRIFT_MULTIPLIER:g} "
            f"standard errors ({est.std_error:.3g}) from the declared mean {sampler.mean:.6g}"
        )
    return est


def expected_beta_tweedie(p, *, sigma2=None, mu=None, a=None, b=None, cap=None) -> float:
    """Expected Tweedie beta divergence under the matching model.

    * ``p = 0`` (Gaussian, ``sigma2``): ``sigma2 / 2``.
    * ``p = 1`` (Poisson, ``mu``): ``E[x log x] - mu log mu``; no closed form
      exists, so the expectation is summed over the pmf up to ``cap``.
    * ``p = 2`` (gamma, shape ``a``, rate ``b``): ``log(a/b) - E[log x]`` with
      ``E[log x] = digamma(a) - log b``.

    Other powers raise :class:`UnsupportedError`; use
    :func:`expected_beta_mc`.
    """
    if p == 0:
        if sigma2 is None:
            raise ValueError("p=0 needs sigma2")
        return 0.5 * float(sigma2)
    if p == 1:
        if mu is None:
            raise ValueError("p=1 needs mu")
        if cap is None:
            cap = int(math.ceil(mu + 40 * math.sqrt(mu) + 40))
        k = np.arange(cap + 1, dtype=float)
        log_pmf = xlogy(k, mu) - mu - np.vectorize(math.lgamma)(k + 1.0)
        return math.fsum(np.exp(log_pmf) * xlogy(k, k)) - mu * math.log(mu)
    if p == 2:
        if a is None or b is None:
            raise ValueError("p=2 needs shape a and rate b")
        return math.log(a / b) - (float(digamma(a)) - math.log(b))
    raise UnsupportedError(f"no analytic expected beta divergence for p={p}; use expected_beta_mc")


def _beta_vectorised(vf):
    if isinstance(vf, TweediePower) or closed.has_closed_form(vf, "beta"):
        return lambda x, mu: closed.beta(vf, x, mu)
    fn = np.vectorize(lambda x, mu: core.beta_divergence(vf, x, mu).value)
    return fn


def _phi_vectorised(vf):
    """Convex generator used for the Jensen gap: ``phi1`` for Tweedie."""
    if isinstance(vf, TweediePower):
        return lambda x: closed.tweedie_phi1(vf.p, x)
    base = vf.default_base
    if closed.has_closed_form(vf, "phi"):
        return lambda x: closed.phi(vf, x, base)
    return np.vectorize(lambda x: core.dual_cumulant_phi(vf, x, base))


def expected_beta_mc(vf, sampler: Sampler, spec: MonteCarloSpec = MonteCarloSpec()) -> Estimate:
    vf = make_variance_function(vf)
    mu = sampler.mean
    d = _beta_vectorised(vf)
    return mc_mean(lambda x: d(x, mu), sampler, spec)


def jensen_gap_check(vf, sampler: Sampler, mu=None, spec: MonteCarloSpec = MonteCarloSpec()) -> PropertyReport:
    """``E[d_beta(x, mu)]`` against ``E[phi1(x)] - phi1(mu)`` on one sample.

    Passes when the two estimates differ by at most four combined standard
    errors.  Raises :class:`SamplerDriftError` when the sample mean is more
    than five standard errors from ``mu``.
    """
    vf = make_variance_function(vf)
    mu = sampler.mean if mu is None else float(mu)
    if mu != sampler.mean:
        raise SamplerDriftError(f"sampler mean {sampler.mean} differs from mu={mu}")
    d = _beta_vectorised(vf)
    phi1 = _phi_vectorised(vf)
    mean_est, lhs, gap = mc_means([lambda x: x, lambda x: d(x, mu), phi1], sampler, spec)
    _check_drift(sampler, spec, mean_est)
    rhs = gap.value - float(phi1(mu))
    tol = SE_MULTIPLIER * math.hypot(lhs.std_error, gap.std_error)
    return PropertyReport(
        f"jensen gap {vf.token} {sampler.name} mu={mu:g}", lhs.value, rhs, rtol=0.0, atol=tol + 1e-12 * abs(rhs)
    )


def entropy_via_divergence(model: DispersionModel, mu) -> float:
    """Entropy as ``-E[log g] + E[d_beta] / phi`` with closed expectations.

    Available for the Gaussian and gamma models; the Poisson model has no
    closed expectations, see :func:`entropy_via_divergence_mc`.
    """
    model.vf.check_domain(mu, argument="mu")
    if model.name == "gaussian":
        sigma2 = model.dispersion
        e_log_g = -0.5 * math.log(2 * math.pi * sigma2)
        e_beta = expected_beta_tweedie(0, sigma2=sigma2)
    elif model.name == "gamma":
        a = model.params["a"]
        b = a / mu
        e_log_x = float(digamma(a)) - math.log(b)
        e_log_g = -e_log_x + a * math.log(a) - a - math.lgamma(a)
        e_beta = expected_beta_tweedie(2, a=a, b=b)
    else:
        raise UnsupportedError(f"no closed expectations for the {model.name} model")
    return -e_log_g + e_beta / model.dispersion


def entropy_via_divergence_mc(model: DispersionModel, mu, spec: MonteCarloSpec = MonteCarloSpec()) -> Estimate:
    """Same identity with both expectations estimated on one sample."""
    sampler = sampler_for(model, mu)
    phi = model.dispersion
    return mc_mean(lambda x: -model.log_g(x) + model.beta(x, mu) / phi, sampler, spec)


def _v_prime(vf, mu, h=1e-6):
    h = h * max(1.0, abs(mu))
    return (vf(mu + h) - vf(mu - h)) / (2 * h)


def score_identity_checks(vf, sampler: Sampler, spec: MonteCarloSpec = MonteCarloSpec()) -> list[PropertyReport]:
    """Expected first and second ``mu``-derivatives of ``L(x|mu)``.

    ``dL/dmu = (x - mu)/v(mu)`` has mean 0 and
    ``d2L/dmu2 = -1/v(mu) - (x - mu) v'(mu)/v(mu)**2`` has mean ``-1/v(mu)``.
    Each passes within four standard errors.
    """
    vf = make_variance_function(vf)
    mu = sampler.mean
    v = vf(mu)
    dv = _v_prime(vf, mu)
    first, second = mc_means(
        [lambda x: (x - mu) / v, lambda x: -1.0 / v - (x - mu) * dv / v**2], sampler, spec
    )
    floor = 1e-12
    return [
        PropertyReport(
            f"E[dL/dmu] {sampler.name} mu={mu:g}", first.value, 0.0, rtol=0.0,
            atol=SE_MULTIPLIER * first.std_error + floor,
        ),
        PropertyReport(
            f"E[d2L/dmu2] {sampler.name} mu={mu:g}", second.value, -1.0 / v, rtol=0.0,
            atol=SE_MULTIPLIER * second.std_error + floor / v,
        ),
    ]


def expected_qll_check(vf, sampler: Sampler, base=None, spec: MonteCarloSpec = MonteCarloSpec()) -> PropertyReport:
    """``E[L(x|mu)]`` against ``phi(mu)`` using the same base on both sides."""
    vf = make_variance_function(vf)
    mu = sampler.mean
    base = vf.default_base if base is None else float(base)
    pair = core.cumulant_pair(vf, mu, base)
    # L(x|mu) = theta(mu) * x - psi(theta(mu)) is affine in x
    est = mc_mean(lambda x: pair.theta * x - pair.psi, sampler, spec)
    return PropertyReport(
        f"E[L(x|mu)] {sampler.name} mu={mu:g} base={base:g}", est.value, pair.phi, rtol=0.0,
        atol=SE_MULTIPLIER * est.std_error + 1e-12 * max(1.0, abs(pair.phi)),
    )
