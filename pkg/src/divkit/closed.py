"""Closed-form divergences and cumulants for the named families.

All functions accept scalars or numpy arrays.  Tweedie limits at
``p == 1`` and ``p == 2`` are selected on exact equality of the stored
power; nearby powers use the general formula, which is written in the
ratio form ``mu**q * (expm1(q*log r) - q*(r - 1)) / (q*(q - 1))`` with
``q = 2 - p`` and ``r = x/mu`` to limit cancellation near ``x == mu``.
"""
from __future__ import annotations

from enum import Enum

import numpy as np
from scipy.special import xlogy

from .errors import DomainError, InfiniteResultError
from .varfun import Bernoulli, HyperbolicSecant, NegativeBinomial, TweediePower, VarianceFunction

__all__ = [
    "TweedieBranch",
    "tweedie_branch",
    "tweedie_beta",
    "tweedie_alpha",
    "tweedie_theta",
    "tweedie_psi",
    "tweedie_phi_parts",
    "tweedie_phi1",
    "family_beta",
    "has_closed_form",
    "beta",
    "alpha",
    "theta",
    "psi",
    "phi",
]


class TweedieBranch(str, Enum):
    GENERAL = "general"
    P_EQ_1 = "p_eq_1"
    P_EQ_2 = "p_eq_2"


def tweedie_branch(p) -> TweedieBranch:
    if p == 1:
        return TweedieBranch.P_EQ_1
    if p == 2:
        return TweedieBranch.P_EQ_2
    return TweedieBranch.GENERAL


def _out(value):
    return float(value) if np.ndim(value) == 0 else value


def _require(cond, message, argument, value):
    if not np.all(cond):
        raise DomainError(message, argument=argument, value=value)


def _ratio_kernel(q, x, mu):
    """``(r**q - 1 - q*(r - 1)) / (q*(q - 1))`` with ``r = x/mu``, ``q`` not 0 or 1."""
    with np.errstate(divide="ignore", invalid="ignore"):
        r = x / mu
        u = (x - mu) / mu
        rq1 = np.where(r > 0, np.expm1(q * np.log(np.where(r > 0, r, 1.0))), -1.0)
    return (rq1 - q * u) / (q * (q - 1.0))


def _itakura_saito(x, mu):
    """``r - 1 - log r`` with ``r = x/mu``; log1p form near ``r == 1``."""
    u = (x - mu) / mu
    r = x / mu
    with np.errstate(divide="ignore", invalid="ignore"):
        near = u - np.log1p(u)
        far = r - 1.0 - np.log(r)
    return np.where(np.abs(u) < 0.5, near, far)


def _check_tweedie_args(p, x, mu, allow_negative_x=False):
    x = np.asarray(x, dtype=float)
    mu = np.asarray(mu, dtype=float)
    if p == 0 and allow_negative_x:
        return x, mu
    _require(mu > 0, f"mu must be positive for tweedie p={p}", "mu", mu)
    _require(x >= 0, f"x must be non-negative for tweedie p={p}", "x", x)
    if p >= 2 and np.any(x == 0):
        raise InfiniteResultError(f"divergence is infinite at x=0 for tweedie p={p}")
    return x, mu


def tweedie_beta(p: float, x, mu):
    """Beta divergence for ``v(mu) = mu**p``.

    ``p == 0`` gives half the squared error, ``p == 1`` the generalised
    Kullback-Leibler divergence, ``p == 2`` the Itakura-Saito divergence.

    >>> round(tweedie_beta(3, 2.0, 1.0), 12)
    0.25
    """
    if p == 0:
        x = np.asarray(x, dtype=float)
        mu = np.asarray(mu, dtype=float)
        return _out(0.5 * (x - mu) ** 2)
    x, mu = _check_tweedie_args(p, x, mu)
    branch = tweedie_branch(p)
    if branch is TweedieBranch.P_EQ_1:
        return _out(xlogy(x, x / mu) - x + mu)
    if branch is TweedieBranch.P_EQ_2:
        return _out(_itakura_saito(x, mu))
    q = 2.0 - p
    return _out(mu**q * _ratio_kernel(q, x, mu))


def tweedie_alpha(p: float, x, mu):
    """Alpha divergence in the Tweedie index.

    ``x**(2-p) * mu**(p-1) / ((1-p)(2-p)) - x/(1-p) + mu/(2-p)``, with the
    l'Hopital limits ``x log(x/mu) - x + mu`` at ``p == 1`` and
    ``mu log(mu/x) + x - mu`` at ``p == 2``.  For ``p == 0`` any real ``x`` is
    allowed as long as ``mu > 0``.
    """
    x = np.asarray(x, dtype=float)
    mu = np.asarray(mu, dtype=float)
    _require(mu > 0, "mu must be positive for the alpha divergence", "mu", mu)
    if p == 0:
        return _out((x - mu) ** 2 / (2.0 * mu))
    x, mu = _check_tweedie_args(p, x, mu)
    branch = tweedie_branch(p)
    if branch is TweedieBranch.P_EQ_1:
        return _out(xlogy(x, x / mu) - x + mu)
    if branch is TweedieBranch.P_EQ_2:
        return _out(mu * _itakura_saito(x, mu))
    q = 2.0 - p
    return _out(mu * _ratio_kernel(q, x, mu))


def tweedie_theta(p, mu, base=1.0):
    mu = np.asarray(mu, dtype=float)
    if p == 0:
        return _out(mu - base)
    _require(mu > 0, f"mu must be positive for tweedie p={p}", "mu", mu)
    _require(np.asarray(base) > 0, f"base must be positive for tweedie p={p}", "base", base)
    if p == 1:
        return _out(np.log(mu / base))
    q = 1.0 - p
    return _out((mu**q - base**q) / q)


def tweedie_psi(p, mu, base=1.0):
    mu = np.asarray(mu, dtype=float)
    if p == 0:
        return _out(0.5 * (mu - base) * (mu + base))
    _require(mu > 0, f"mu must be positive for tweedie p={p}", "mu", mu)
    _require(np.asarray(base) > 0, f"base must be positive for tweedie p={p}", "base", base)
    if p == 2:
        return _out(np.log(mu / base))
    q = 2.0 - p
    return _out((mu**q - base**q) / q)


def tweedie_phi1(p, mu):
    """Non-linear part of the Tweedie dual cumulant.

    ``mu**(2-p) / ((1-p)(2-p))`` in general; ``mu**2/2``, ``mu log mu`` and
    ``-log mu`` at ``p`` = 0, 1, 2.
    """
    mu = np.asarray(mu, dtype=float)
    if p == 0:
        return _out(0.5 * mu * mu)
    if p == 1:
        return _out(xlogy(mu, mu))
    if p == 2:
        with np.errstate(divide="ignore"):
            return _out(-np.log(mu))
    return _out(mu ** (2.0 - p) / ((1.0 - p) * (2.0 - p)))


def tweedie_phi_parts(p, mu, base=1.0):
    """Split the dual cumulant ``phi = phi1 + phi0``.

    ``phi1`` is :func:`tweedie_phi1`; ``phi0`` is linear in ``mu`` and holds
    every base-dependent term, so the sum equals the definite integral
    ``int_base^mu (mu - t)/t**p dt``.
    """
    mu = np.asarray(mu, dtype=float)
    base = float(base)
    phi1 = tweedie_phi1(p, mu)
    if p == 1:
        phi0 = -mu * (np.log(base) + 1.0) + base
    elif p == 2:
        phi0 = mu / base + np.log(base) - 1.0
    else:
        phi0 = -mu * base ** (1.0 - p) / (1.0 - p) + base ** (2.0 - p) / (2.0 - p)
    return phi1, _out(phi0)


def _bernoulli_beta(x, mu):
    x = np.asarray(x, dtype=float)
    mu = np.asarray(mu, dtype=float)
    _require((mu > 0) & (mu < 1), "mu must lie in (0, 1) for bernoulli", "mu", mu)
    _require((x >= 0) & (x <= 1), "x must lie in [0, 1] for bernoulli", "x", x)
    return _out(xlogy(x, x / mu) + xlogy(1.0 - x, (1.0 - x) / (1.0 - mu)))


def _negbin_beta(x, mu):
    x = np.asarray(x, dtype=float)
    mu = np.asarray(mu, dtype=float)
    _require(mu > 0, "mu must be positive for negbin", "mu", mu)
    _require(x >= 0, "x must be non-negative for negbin", "x", x)
    return _out(xlogy(x, x * (1.0 + mu) / (mu * (1.0 + x))) + np.log((1.0 + mu) / (1.0 + x)))


def _sech_beta(x, mu):
    x = np.asarray(x, dtype=float)
    mu = np.asarray(mu, dtype=float)
    return _out(
        x * (np.arctan(x) - np.arctan(mu)) + 0.5 * np.log((1.0 + mu * mu) / (1.0 + x * x))
    )


_FAMILY_BETA = {
    "bernoulli": _bernoulli_beta,
    "negbin": _negbin_beta,
    "sech": _sech_beta,
}


def family_beta(family, x, mu):
    """Beta divergence for the non-Tweedie named families.

    ``family`` is ``"bernoulli"``, ``"negbin"``, ``"sech"`` or the matching
    variance-function instance.  Bernoulli accepts ``x`` in {0, 1} and
    negbin accepts ``x = 0`` through the ``0 log 0 = 0`` convention.
    """
    key = family.token if isinstance(family, VarianceFunction) else str(family)
    try:
        fn = _FAMILY_BETA[key]
    except KeyError:
        raise ValueError(f"no closed-form beta divergence for {key!r}") from None
    return fn(x, mu)


# Registry dispatch on variance-function type.


def has_closed_form(vf: VarianceFunction, kind: str) -> bool:
    if isinstance(vf, TweediePower):
        return kind in ("beta", "alpha", "theta", "psi", "phi")
    if isinstance(vf, (Bernoulli, NegativeBinomial, HyperbolicSecant)):
        return kind in ("beta", "theta", "psi", "phi")
    return False


def beta(vf, x, mu):
    if isinstance(vf, TweediePower):
        return tweedie_beta(vf.p, x, mu)
    return family_beta(vf, x, mu)


def alpha(vf, x, mu):
    if not isinstance(vf, TweediePower):
        raise ValueError(f"no closed-form alpha divergence for {vf.token}")
    return tweedie_alpha(vf.p, x, mu)


def theta(vf, mu, base):
    mu = np.asarray(mu, dtype=float)
    if isinstance(vf, TweediePower):
        return tweedie_theta(vf.p, mu, base)
    if isinstance(vf, Bernoulli):
        return _out(np.log(mu / (1.0 - mu)) - np.log(base / (1.0 - base)))
    if isinstance(vf, NegativeBinomial):
        return _out(np.log(mu / (1.0 + mu)) - np.log(base / (1.0 + base)))
    if isinstance(vf, HyperbolicSecant):
        return _out(np.arctan(mu) - np.arctan(base))
    raise ValueError(f"no closed-form canonical parameter for {vf.token}")


def psi(vf, mu, base):
    mu = np.asarray(mu, dtype=float)
    if isinstance(vf, TweediePower):
        return tweedie_psi(vf.p, mu, base)
    if isinstance(vf, Bernoulli):
        return _out(np.log((1.0 - base) / (1.0 - mu)))
    if isinstance(vf, NegativeBinomial):
        return _out(np.log((1.0 + mu) / (1.0 + base)))
    if isinstance(vf, HyperbolicSecant):
        return _out(0.5 * np.log((1.0 + mu * mu) / (1.0 + base * base)))
    raise ValueError(f"no closed-form cumulant for {vf.token}")


def phi(vf, mu, base):
    """Dual cumulant with base ``base``; equals the beta divergence of ``mu`` from ``base``."""
    return beta(vf, mu, base)
