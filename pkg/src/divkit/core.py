"""Integral-form quantities induced by a variance function.

=====================  =================================================
canonical parameter    ``theta(mu) = int_base^mu 1/v(t) dt``
cumulant               ``psi(theta(mu)) = int_base^mu t/v(t) dt``
dual cumulant          ``phi(mu) = int_base^mu (mu - t)/v(t) dt``
beta divergence        ``d_beta(x, mu) = int_mu^x (x - t)/v(t) dt``
alpha divergence       ``d_alpha(x, mu) = mu * int_1^(x/mu) (x/mu - t)/v(t) dt``
quasi-log-likelihood   ``L(x|mu) = int_base^mu (x - t)/v(t) dt``
unit deviance          ``2 * d_beta(x, mu)``
=====================  =================================================

Every function takes ``method``: ``"auto"`` uses the closed form when the
family registry has one and quadrature otherwise; ``"closed"`` and
``"quadrature"`` force a path.  Divergences report which path ran.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass
from enum import Enum

from . import closed
from .errors import ConvergenceError, DomainError
from .quadrature import DEFAULT_SPEC, QuadratureSpec, integrate
from .varfun import make_variance_function

__all__ = [
    "Method",
    "DivergenceResult",
    "LikelihoodValue",
    "CumulantPair",
    "Evaluation",
    "canonical_theta",
    "cumulant_psi",
    "dual_cumulant_phi",
    "cumulant_pair",
    "beta_divergence",
    "alpha_divergence",
    "alpha_divergence_via_cumulant",
    "quasi_log_likelihood",
    "unit_deviance",
    "evaluate",
]

log = logging.getLogger(__name__)

ALPHA_BASE = 1.0


class Method(str, Enum):
    CLOSED_FORM = "closed_form"
    QUADRATURE = "quadrature"


@dataclass(frozen=True)
class DivergenceResult:
    """Divergence value with provenance.

    ``raw_value`` keeps the unclamped quadrature value when a tiny negative
    result was clamped to zero.
    """

    value: float
    method: Method
    error_estimate: float = 0.0
    raw_value: float | None = None

    def __float__(self):
        return float(self.value)

    def scaled(self, factor):
        raw = None if self.raw_value is None else self.raw_value * factor
        return DivergenceResult(self.value * factor, self.method, self.error_estimate * abs(factor), raw)


# Same shape as DivergenceResult but without the sign contract.
@dataclass(frozen=True)
class Evaluation:
    value: float
    method: Method
    error_estimate: float = 0.0

    def __float__(self):
        return float(self.value)


@dataclass(frozen=True)
class LikelihoodValue:
    value: float
    base: float

    def __float__(self):
        return float(self.value)


@dataclass(frozen=True)
class CumulantPair:
    theta: float
    psi: float
    phi: float
    base: float

    def duality_residual(self, mu):
        """``phi - (mu*theta - psi)``; zero up to rounding."""
        return self.phi - (mu * self.theta - self.psi)


def _resolve(vf, base=None):
    vf = make_variance_function(vf)
    if base is None:
        base = vf.default_base
    return vf, float(base)


_METHOD_ALIASES = {"closed": Method.CLOSED_FORM, "quad": Method.QUADRATURE}


def _use_closed(vf, kind, method):
    if method == "auto":
        return closed.has_closed_form(vf, kind)
    method = _METHOD_ALIASES.get(method) or Method(method)
    if method is Method.CLOSED_FORM:
        if not closed.has_closed_form(vf, kind):
            raise ValueError(f"no closed form of {kind} for {vf.token}")
        return True
    return False


def _quad(f, a, b, spec):
    res = integrate(f, a, b, spec)
    if not res.converged:
        raise ConvergenceError(
            f"quadrature on [{a}, {b}] did not converge after {res.subdivisions_used} "
            f"panels (error estimate {res.error_estimate:.3g})",
            res,
        )
    return res


def _divergence(value, method, err, spec):
    if value < 0:
        if value >= -max(spec.abs_tol, err):
            return DivergenceResult(0.0, method, err, raw_value=value)
        log.warning("negative divergence %.3g exceeds the quadrature tolerance", value)
    return DivergenceResult(value, method, err)


def _check_interior(vf, **args):
    for name, value in args.items():
        vf.check_domain(value, argument=name)


def _theta_eval(vf, mu, base, method, spec):
    _check_interior(vf, mu=mu, base=base)
    if _use_closed(vf, "theta", method):
        return Evaluation(closed.theta(vf, mu, base), Method.CLOSED_FORM)
    v = vf.raw
    res = _quad(lambda t: 1.0 / v(t), base, mu, spec)
    return Evaluation(res.value, Method.QUADRATURE, res.error_estimate)


def _psi_eval(vf, mu, base, method, spec):
    _check_interior(vf, mu=mu, base=base)
    if _use_closed(vf, "psi", method):
        return Evaluation(closed.psi(vf, mu, base), Method.CLOSED_FORM)
    v = vf.raw
    res = _quad(lambda t: t / v(t), base, mu, spec)
    return Evaluation(res.value, Method.QUADRATURE, res.error_estimate)


def _phi_eval(vf, mu, base, method, spec):
    _check_interior(vf, mu=mu, base=base)
    if _use_closed(vf, "phi", method):
        return Evaluation(closed.phi(vf, mu, base), Method.CLOSED_FORM)
    v = vf.raw
    res = _quad(lambda t: (mu - t) / v(t), base, mu, spec)
    return Evaluation(res.value, Method.QUADRATURE, res.error_estimate)


def canonical_theta(vf, mu, base=None, *, method="auto", spec: QuadratureSpec = DEFAULT_SPEC) -> float:
    """Canonical parameter ``int_base^mu 1/v(t) dt`` (signed)."""
    vf, base = _resolve(vf, base)
    return _theta_eval(vf, float(mu), base, method, spec).value


def cumulant_psi(vf, mu, base=None, *, method="auto", spec: QuadratureSpec = DEFAULT_SPEC) -> float:
    """Cumulant on the mean scale, ``int_base^mu t/v(t) dt``."""
    vf, base = _resolve(vf, base)
    return _psi_eval(vf, float(mu), base, method, spec).value


def dual_cumulant_phi(vf, mu, base=None, *, method="auto", spec: QuadratureSpec = DEFAULT_SPEC) -> float:
    """Dual cumulant ``int_base^mu (mu - t)/v(t) dt``; convex, zero at ``base``."""
    vf, base = _resolve(vf, base)
    return _phi_eval(vf, float(mu), base, method, spec).value


def cumulant_pair(vf, mu, base=None, *, method="auto", spec: QuadratureSpec = DEFAULT_SPEC) -> CumulantPair:
    vf, base = _resolve(vf, base)
    mu = float(mu)
    return CumulantPair(
        theta=_theta_eval(vf, mu, base, method, spec).value,
        psi=_psi_eval(vf, mu, base, method, spec).value,
        phi=_phi_eval(vf, mu, base, method, spec).value,
        base=base,
    )


def beta_divergence(vf, x, mu, *, method="auto", spec: QuadratureSpec = DEFAULT_SPEC) -> DivergenceResult:
    """Beta divergence ``int_mu^x (x - t)/v(t) dt``.

    ``mu`` must lie strictly inside the mean domain.  ``x`` may sit on a
    domain boundary only on the closed-form path, where the limit is known
    analytically (e.g. ``x = 0`` for Poisson gives ``mu``).

    Raises
    ------
    DomainError
        For out-of-domain arguments, or boundary ``x`` on the quadrature path.
    InfiniteResultError
        When the divergence is infinite at a boundary ``x``.
    ConvergenceError
        When quadrature fails to converge.
    """
    vf = make_variance_function(vf)
    x = float(x)
    mu = float(mu)
    vf.check_domain(mu, argument="mu")
    use_closed = _use_closed(vf, "beta", method)
    if not vf.domain.contains(x):
        if not (use_closed and vf.domain.on_boundary(x)):
            vf.check_domain(x, argument="x")
    if use_closed:
        return DivergenceResult(closed.beta(vf, x, mu), Method.CLOSED_FORM)
    v = vf.raw
    res = _quad(lambda t: (x - t) / v(t), mu, x, spec)
    return _divergence(res.value, Method.QUADRATURE, res.error_estimate, spec)


def _check_alpha_args(vf, x, mu, allow_boundary_ratio):
    if not mu > 0:
        raise DomainError(f"alpha divergence needs mu > 0, got {mu}", argument="mu", value=mu)
    vf.check_domain(mu, argument="mu")
    if not vf.domain.contains(ALPHA_BASE):
        raise DomainError(
            f"alpha divergence needs the base point 1 inside the domain {vf.domain} of {vf.token}",
            argument="mu",
            value=mu,
        )
    r = x / mu
    if not vf.domain.contains(r):
        if not (allow_boundary_ratio and vf.domain.on_boundary(r)):
            raise DomainError(
                f"x/mu = {r} is outside the mean domain {vf.domain} of {vf.token}",
                argument="x",
                value=x,
            )
    return r


def alpha_divergence(vf, x, mu, *, method="auto", spec: QuadratureSpec = DEFAULT_SPEC) -> DivergenceResult:
    """Alpha divergence ``mu * phi(x/mu)`` with the dual cumulant based at 1."""
    vf = make_variance_function(vf)
    x = float(x)
    mu = float(mu)
    use_closed = _use_closed(vf, "alpha", method)
    r = _check_alpha_args(vf, x, mu, allow_boundary_ratio=use_closed)
    if use_closed:
        return DivergenceResult(closed.alpha(vf, x, mu), Method.CLOSED_FORM)
    v = vf.raw
    res = _quad(lambda t: (r - t) / v(t), ALPHA_BASE, r, spec)
    return _divergence(mu * res.value, Method.QUADRATURE, mu * res.error_estimate, spec)


def alpha_divergence_via_cumulant(vf, x, mu, *, spec: QuadratureSpec = DEFAULT_SPEC) -> DivergenceResult:
    """Alpha divergence as ``int_mu^x psi(theta(x/t)) dt`` by nested quadrature.

    Always runs quadrature on both levels; it is a cross-check for
    :func:`alpha_divergence`.  The inner cumulant integral uses a tolerance
    ten times looser than ``spec``.
    """
    vf = make_variance_function(vf)
    x = float(x)
    mu = float(mu)
    _check_alpha_args(vf, x, mu, allow_boundary_ratio=False)
    if not x > 0:
        raise DomainError(f"nested alpha form needs x > 0, got {x}", argument="x", value=x)
    v = vf.raw
    inner_spec = spec.relaxed(10.0)
    worst_inner = [0.0]

    def cumulant_at(t):
        res = _quad(lambda z: z / v(z), ALPHA_BASE, x / t, inner_spec)
        worst_inner[0] = max(worst_inner[0], res.error_estimate)
        return res.value

    outer = _quad(cumulant_at, mu, x, spec)
    err = outer.error_estimate + abs(x - mu) * worst_inner[0]
    return _divergence(outer.value, Method.QUADRATURE, err, spec)


def _qll_eval(vf, x, mu, base, method, spec):
    _check_interior(vf, mu=mu, base=base)
    if not vf.domain.in_closure(x):
        vf.check_domain(x, argument="x")
    if _use_closed(vf, "theta", method) and _use_closed(vf, "psi", method):
        value = closed.theta(vf, mu, base) * x - closed.psi(vf, mu, base)
        return Evaluation(value, Method.CLOSED_FORM)
    v = vf.raw
    res = _quad(lambda t: (x - t) / v(t), base, mu, spec)
    return Evaluation(res.value, Method.QUADRATURE, res.error_estimate)


def quasi_log_likelihood(
    vf, x, mu, base=None, *, method="auto", spec: QuadratureSpec = DEFAULT_SPEC
) -> LikelihoodValue:
    """Unit quasi-log-likelihood ``int_base^mu (x - t)/v(t) dt``.

    The observation ``x`` may lie on the closure of the domain (a Poisson
    count of zero, say); ``mu`` and ``base`` must be interior.
    """
    vf, base = _resolve(vf, base)
    value = _qll_eval(vf, float(x), float(mu), base, method, spec).value
    return LikelihoodValue(value, base)


def unit_deviance(vf, x, mu, *, method="auto", spec: QuadratureSpec = DEFAULT_SPEC) -> float:
    """Unit deviance, twice the beta divergence."""
    return 2.0 * beta_divergence(vf, x, mu, method=method, spec=spec).value


KINDS = ("beta", "alpha", "deviance", "qll", "phi", "theta", "psi")


def evaluate(kind, vf, x=None, mu=None, base=None, *, method="auto", spec: QuadratureSpec = DEFAULT_SPEC) -> Evaluation:
    """Single entry point used by the CLI: one quantity with provenance.

    ``theta``, ``psi`` and ``phi`` are functions of ``mu`` alone.
    """
    vf, base = _resolve(vf, base)
    if kind in ("beta", "deviance", "alpha"):
        fn = alpha_divergence if kind == "alpha" else beta_divergence
        res = fn(vf, x, mu, method=method, spec=spec)
        factor = 2.0 if kind == "deviance" else 1.0
        return Evaluation(factor * res.value, res.method, factor * res.error_estimate)
    if kind == "qll":
        return _qll_eval(vf, float(x), float(mu), base, method, spec)
    dispatch = {"theta": _theta_eval, "psi": _psi_eval, "phi": _phi_eval}
    if kind not in dispatch:
        raise ValueError(f"unknown quantity {kind!r}; expected one of {KINDS}")
    return dispatch[kind](vf, float(mu), base, method, spec)
