"""Dispersion-model densities written through the beta divergence.

``p(x; mu, phi) = g(x, phi) * exp(-d_beta(x, mu) / phi)``

Only the Gaussian, Poisson and gamma models are provided, since those are
the families with a known base measure ``g``.  Everything is computed in log
space.

The Poisson base measure is ``g(x) = x**x * exp(-x) / x!``.  It follows from
``g = h * exp(phi(x) / dispersion)`` with ``h = 1/x!`` and
``phi(x) = x log x - x``, and it is the sign for which the pmf sums to one.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np
from scipy.special import gammaln, xlogy

from . import closed
from .errors import DomainError
from .quadrature import QuadratureSpec, integrate
from .report import PropertyReport
from .varfun import TweediePower, VarianceFunction

__all__ = [
    "DispersionModel",
    "gaussian",
    "poisson",
    "gamma",
    "parse_model",
    "log_density",
    "density",
    "g_from_h",
    "log_g_from_h",
    "normalization_check",
]


@dataclass(frozen=True)
class DispersionModel:
    """Variance function plus dispersion and log base measure.

    ``log_g(x)`` is the log of ``g(x, dispersion)`` for this model's fixed
    dispersion.  ``support`` is ``"continuous"`` (with ``interval``) or
    ``"counting"`` (the non-negative integers).
    """

    name: str
    vf: VarianceFunction
    dispersion: float
    log_g: Callable
    support: str
    interval: tuple = (-math.inf, math.inf)
    params: Optional[dict] = None

    def __post_init__(self):
        if not self.dispersion > 0:
            raise ValueError(f"dispersion must be positive, got {self.dispersion}")
        if self.name == "poisson" and self.dispersion != 1:
            raise ValueError("the Poisson model has dispersion 1")

    def beta(self, x, mu):
        """Vectorised beta divergence for this model's variance function."""
        return closed.tweedie_beta(self.vf.p, x, mu)

    def check_support(self, x):
        x = np.asarray(x, dtype=float)
        if self.support == "counting":
            ok = (x >= 0) & (x == np.floor(x))
        else:
            lo, hi = self.interval
            ok = (x > lo) & (x < hi)
        if not np.all(ok):
            raise DomainError(f"x={x} is outside the support of the {self.name} model", argument="x", value=x)
        return x


def gaussian(sigma2: float = 1.0) -> DispersionModel:
    if not sigma2 > 0:
        raise ValueError(f"sigma2 must be positive, got {sigma2}")
    log_g0 = -0.5 * math.log(2.0 * math.pi * sigma2)
    return DispersionModel(
        "gaussian",
        TweediePower(0),
        float(sigma2),
        lambda x: np.full(np.shape(x), log_g0) if np.ndim(x) else log_g0,
        "continuous",
        params={"sigma2": float(sigma2)},
    )


def _poisson_log_g(x):
    x = np.asarray(x, dtype=float)
    out = xlogy(x, x) - x - gammaln(x + 1.0)
    return float(out) if out.ndim == 0 else out


def poisson() -> DispersionModel:
    return DispersionModel("poisson", TweediePower(1), 1.0, _poisson_log_g, "counting", (0.0, math.inf))


def gamma(a: float) -> DispersionModel:
    """Gamma model with shape ``a``; the dispersion is ``1/a``.

    ``g(x) = x**-1 * a**a * exp(-a) / Gamma(a)``.
    """
    if not a > 0:
        raise ValueError(f"shape a must be positive, got {a}")
    a = float(a)
    const = a * math.log(a) - a - math.lgamma(a)

    def log_g(x):
        out = const - np.log(x)
        return float(out) if np.ndim(out) == 0 else out

    return DispersionModel("gamma", TweediePower(2), 1.0 / a, log_g, "continuous", (0.0, math.inf), {"a": a})


def parse_model(text: str):
    """Parse ``gaussian:sigma2=1``, ``poisson`` or ``gamma:a=2,b=2``.

    Returns ``(model, implied_mu)``; ``implied_mu`` is ``a/b`` when a gamma
    rate is given and ``None`` otherwise.
    """
    name, _, rest = text.strip().partition(":")
    params = {}
    for item in filter(None, rest.split(",")):
        key, sep, value = item.partition("=")
        if not sep:
            raise ValueError(f"bad model parameter {item!r}")
        params[key.strip()] = float(value)
    name = name.lower()
    if name == "gaussian":
        unknown = set(params) - {"sigma2"}
        if unknown:
            raise ValueError(f"unknown gaussian parameter(s) {sorted(unknown)}")
        return gaussian(params.get("sigma2", 1.0)), None
    if name == "poisson":
        if params:
            raise ValueError("the poisson model takes no parameters")
        return poisson(), None
    if name == "gamma":
        unknown = set(params) - {"a", "b"}
        if unknown or "a" not in params:
            raise ValueError("gamma model needs a=<shape> and optionally b=<rate>")
        mu = params["a"] / params["b"] if "b" in params else None
        return gamma(params["a"]), mu
    raise ValueError(f"unknown model {text!r}; expected gaussian, poisson or gamma")


def log_density(model: DispersionModel, x, mu):
    """``log g(x, phi) - d_beta(x, mu) / phi``."""
    model.vf.check_domain(mu, argument="mu")
    x = model.check_support(x)
    out = model.log_g(x) - model.beta(x, mu) / model.dispersion
    return float(out) if np.ndim(out) == 0 else out


def density(model: DispersionModel, x, mu):
    return np.exp(log_density(model, x, mu)) if np.ndim(x) else math.exp(log_density(model, x, mu))


def log_g_from_h(log_h, phi_x, dispersion):
    """Log-space form of :func:`g_from_h`."""
    if not dispersion > 0:
        raise ValueError(f"dispersion must be positive, got {dispersion}")
    return log_h + phi_x / dispersion


def g_from_h(h_value, phi_x, dispersion):
    """``g = h * exp(phi(x) / dispersion)``."""
    if not dispersion > 0:
        raise ValueError(f"dispersion must be positive, got {dispersion}")
    return h_value * math.exp(phi_x / dispersion)


def _default_bounds(model, mu):
    if model.name == "gamma":
        # right tail beyond this point is below exp(-60)
        a = model.params["a"]
        return 0.0, mu * (1.0 + 60.0 / a + 12.0 / math.sqrt(a))
    sd = math.sqrt(model.dispersion * model.vf(mu))
    return mu - 12.0 * sd, mu + 12.0 * sd


def normalization_check(
    model: DispersionModel, mu, bounds=None, cap=None, *, tol=1e-8, spec: QuadratureSpec | None = None
) -> PropertyReport:
    """Total mass of the beta-form density; passes when ``|total - 1| <= tol``.

    Counting models sum ``x = 0..cap`` (default ``60 * max(1, mu)``);
    continuous models integrate over ``bounds`` (default: ``mu +- 12 sd`` for
    the Gaussian, ``[0, mu * (1 + 60/a + 12/sqrt(a))]`` for the gamma).
    """
    if model.support == "counting":
        if cap is None:
            cap = int(math.ceil(60 * max(1.0, mu)))
        ks = np.arange(cap + 1, dtype=float)
        total = math.fsum(np.exp(log_density(model, ks, mu)))
        name = f"{model.name} mass mu={mu:g} cap={cap}"
    else:
        if bounds is None:
            bounds = _default_bounds(model, mu)
        spec = spec or QuadratureSpec(rel_tol=1e-12, abs_tol=1e-14)
        f = lambda t: math.exp(log_density(model, t, mu))  # noqa: E731
        lo, hi = bounds
        if model.name == "gamma" and lo == 0.0 and hi > mu:
            # x = s**(1/a) on [0, mu] removes the x**(a-1) endpoint singularity
            a = model.params["a"]
            head = integrate(
                lambda s: f(s ** (1.0 / a)) * s ** (1.0 / a - 1.0) / a if s > 0 else 0.0, 0.0, mu**a, spec
            )
            total = head.value + integrate(f, mu, hi, spec).value
        else:
            total = integrate(f, lo, hi, spec).value
        name = f"{model.name} mass mu={mu:g} on [{bounds[0]:g}, {bounds[1]:g}]"
    return PropertyReport(name, total, 1.0, rtol=0.0, atol=tol)
