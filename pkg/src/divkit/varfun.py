"""Variance functions and the registry of named families.

A variance function ``v`` on a mean domain induces every other quantity in
this package: the canonical parameter, the cumulant and its dual, and the
beta/alpha divergences.  Named families carry closed forms (see
:mod:`divkit.closed`); :class:`Custom` families are parsed from text and
handled by quadrature only.

Family tokens accepted by :func:`make_variance_function`::

    tweedie:p=<real>   bernoulli   negbin   sech   expvf:gamma=<real>
    custom:<expr>
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .errors import DomainError, PositivityError
from .expression import Expr, compile_expression, parse_vf_expression, print_expression

__all__ = [
    "MeanDomain",
    "REAL_LINE",
    "POSITIVE_HALF_LINE",
    "UNIT_INTERVAL",
    "VarianceFunction",
    "TweediePower",
    "Bernoulli",
    "NegativeBinomial",
    "HyperbolicSecant",
    "ExponentialVF",
    "Custom",
    "NoDispersionModelWarning",
    "make_variance_function",
    "eval_v",
]

CUSTOM_PROBE_POINTS = 256


class NoDispersionModelWarning(UserWarning):
    """Tweedie power in (0, 1): formulas evaluate but no EDM exists."""


@dataclass(frozen=True)
class MeanDomain:
    """Interval ``(lower, upper)`` with per-endpoint open/closed flags."""

    lower: float
    upper: float
    lower_open: bool = True
    upper_open: bool = True

    def __post_init__(self):
        if not self.lower < self.upper:
            raise ValueError(f"empty domain: lower={self.lower} >= upper={self.upper}")

    def contains(self, t) -> bool:
        """True when ``t`` is strictly inside the interval."""
        return self.lower < t < self.upper

    def in_closure(self, t) -> bool:
        return self.lower <= t <= self.upper

    def on_boundary(self, t) -> bool:
        return t == self.lower or t == self.upper

    def typical_range(self):
        """A finite working box used for random sampling and probes."""
        lo, hi = self.lower, self.upper
        if math.isinf(lo) and math.isinf(hi):
            return -5.0, 5.0
        if math.isinf(hi):
            return lo + 0.1, lo + 10.0
        if math.isinf(lo):
            return hi - 10.0, hi - 0.1
        width = hi - lo
        return lo + 0.05 * width, hi - 0.05 * width

    def probe_points(self, n=CUSTOM_PROBE_POINTS):
        """``n`` interior points, log-spaced towards infinite ends."""
        lo, hi = self.lower, self.upper
        if math.isinf(lo) and math.isinf(hi):
            # zero is always probed; v(0) = 0 is the common failure on the line
            half = np.logspace(-3, 2, n // 2)
            return np.concatenate([-half[::-1], [0.0], half])
        if math.isinf(hi):
            return lo + np.logspace(-3, 2, n)
        if math.isinf(lo):
            return hi - np.logspace(-3, 2, n)[::-1]
        return np.linspace(lo, hi, n + 2)[1:-1]

    def sample(self, rng, size):
        """Random interior points in :meth:`typical_range`.

        Half-lines are sampled log-uniformly from the boundary.
        """
        lo, hi = self.typical_range()
        if math.isinf(self.upper) and not math.isinf(self.lower):
            off = np.exp(rng.uniform(math.log(lo - self.lower), math.log(hi - self.lower), size))
            return self.lower + off
        return rng.uniform(lo, hi, size)

    def __str__(self):
        left = "(" if self.lower_open else "["
        right = ")" if self.upper_open else "]"
        return f"{left}{self.lower}, {self.upper}{right}"


REAL_LINE = MeanDomain(-math.inf, math.inf)
POSITIVE_HALF_LINE = MeanDomain(0.0, math.inf)
UNIT_INTERVAL = MeanDomain(0.0, 1.0)


class VarianceFunction:
    """Base class: a positive function ``v`` on a :class:`MeanDomain`.

    Subclasses are frozen dataclasses and implement :meth:`_v`.  Calling the
    instance checks the domain first.
    """

    domain: MeanDomain
    default_base: float
    token: str

    def _v(self, t: float) -> float:  # pragma: no cover - abstract
        raise NotImplementedError

    def __call__(self, t: float) -> float:
        return eval_v(self, t)

    @property
    def raw(self) -> Callable[[float], float]:
        """Unchecked evaluator, for integrand hot loops."""
        return self._v

    def check_domain(self, t, argument="t"):
        if not self.domain.contains(t):
            raise DomainError(
                f"{argument}={t} is outside the mean domain {self.domain} of {self.token}",
                argument=argument,
                value=t,
            )

    def sample_points(self, rng, size):
        return self.domain.sample(rng, size)


def eval_v(vf: VarianceFunction, t: float) -> float:
    """Evaluate ``v(t)`` for ``t`` strictly inside ``vf.domain``."""
    vf.check_domain(t)
    value = vf._v(float(t))
    if not value > 0:
        raise PositivityError(f"v({t}) = {value} is not positive for {vf.token}", "t", t)
    return value


@dataclass(frozen=True)
class TweediePower(VarianceFunction):
    """Power variance ``v(mu) = mu**p``."""

    p: float
    edm_exists: bool = field(init=False)

    def __post_init__(self):
        p = float(self.p)
        if not math.isfinite(p):
            raise ValueError(f"Tweedie power must be finite, got {self.p}")
        object.__setattr__(self, "p", p)
        object.__setattr__(self, "edm_exists", not (0.0 < p < 1.0))
        if not self.edm_exists:
            warnings.warn(
                f"no exponential dispersion model exists for Tweedie power p={p} in (0, 1)",
                NoDispersionModelWarning,
                stacklevel=3,
            )

    @property
    def domain(self):
        return REAL_LINE if self.p == 0 else POSITIVE_HALF_LINE

    @property
    def default_base(self):
        return 1.0

    @property
    def token(self):
        return f"tweedie:p={self.p:g}"

    def _v(self, t):
        if self.p == 0:
            return 1.0
        return t**self.p


@dataclass(frozen=True)
class Bernoulli(VarianceFunction):
    """``v(mu) = mu - mu**2`` on (0, 1)."""

    domain = UNIT_INTERVAL
    default_base = 0.5
    token = "bernoulli"

    def _v(self, t):
        return t - t * t


@dataclass(frozen=True)
class NegativeBinomial(VarianceFunction):
    """``v(mu) = mu + mu**2`` on (0, inf)."""

    domain = POSITIVE_HALF_LINE
    default_base = 1.0
    token = "negbin"

    def _v(self, t):
        return t + t * t


@dataclass(frozen=True)
class HyperbolicSecant(VarianceFunction):
    """``v(mu) = 1 + mu**2`` on the real line."""

    domain = REAL_LINE
    default_base = 0.0
    token = "sech"

    def _v(self, t):
        return 1.0 + t * t


@dataclass(frozen=True)
class ExponentialVF(VarianceFunction):
    """``v(mu) = gamma**mu`` on the real line.

    No dispersion model is claimed for this family; it exists to exercise
    the translation law.
    """

    gamma: float
    domain = REAL_LINE
    default_base = 0.0

    def __post_init__(self):
        if not (self.gamma > 0 and math.isfinite(self.gamma)):
            raise ValueError(f"gamma must be a positive real, got {self.gamma}")
        object.__setattr__(self, "gamma", float(self.gamma))

    @property
    def token(self):
        return f"expvf:gamma={self.gamma:g}"

    def _v(self, t):
        return self.gamma**t


_CANDIDATE_DOMAINS = (REAL_LINE, POSITIVE_HALF_LINE, UNIT_INTERVAL)


@dataclass(frozen=True, eq=False)
class Custom(VarianceFunction):
    """Variance function given as text, e.g. ``"mu - mu^2"``.

    Without an explicit ``domain`` the widest of the real line, the positive
    half-line and the unit interval on which the expression is positive at
    every probe point is used.
    """

    expression: str
    domain: MeanDomain = None  # type: ignore[assignment]
    default_base: float = None  # type: ignore[assignment]
    ast: Expr = field(init=False, repr=False)
    _fn: Callable = field(init=False, repr=False)

    def __post_init__(self):
        ast = parse_vf_expression(self.expression)
        fn = compile_expression(ast)
        object.__setattr__(self, "ast", ast)
        object.__setattr__(self, "_fn", fn)
        if self.domain is None:
            for candidate in _CANDIDATE_DOMAINS:
                if _positive_on(fn, candidate):
                    object.__setattr__(self, "domain", candidate)
                    break
            else:
                raise PositivityError(
                    f"{self.expression!r} is not positive on any standard domain", "expression"
                )
        elif not _positive_on(fn, self.domain):
            raise PositivityError(
                f"{self.expression!r} is not positive on {self.domain}", "expression"
            )
        if self.default_base is None:
            if self.domain.contains(1.0):
                base = 1.0
            elif math.isfinite(self.domain.lower) and math.isfinite(self.domain.upper):
                base = 0.5 * (self.domain.lower + self.domain.upper)
            else:
                base = self.domain.typical_range()[0]
            object.__setattr__(self, "default_base", base)
        elif not self.domain.contains(self.default_base):
            raise DomainError(
                f"default base {self.default_base} not inside {self.domain}", "base"
            )

    def __eq__(self, other):
        if not isinstance(other, Custom):
            return NotImplemented
        return (self.ast, self.domain, self.default_base) == (
            other.ast,
            other.domain,
            other.default_base,
        )

    def __hash__(self):
        return hash((self.ast, self.domain, self.default_base))

    @property
    def token(self):
        return f"custom:{print_expression(self.ast)}"

    def _v(self, t):
        return self._fn(t)


def _positive_on(fn, domain):
    for t in domain.probe_points():
        try:
            value = fn(float(t))
        except DomainError:
            return False
        if not (value > 0 and math.isfinite(value)):
            return False
    return True


def _parse_params(text, allowed):
    params = {}
    for item in filter(None, text.split(",")):
        key, sep, value = item.partition("=")
        key = key.strip()
        if not sep or key not in allowed:
            raise ValueError(f"bad family parameter {item!r}; expected one of {allowed}")
        params[key] = float(value)
    missing = [k for k in allowed if k not in params]
    if missing:
        raise ValueError(f"missing family parameter(s): {', '.join(missing)}")
    return params


def make_variance_function(family) -> VarianceFunction:
    """Build a variance function from a family token or pass one through.

    >>> make_variance_function("tweedie:p=2")(3.0)
    9.0
    >>> make_variance_function("bernoulli")(0.5)
    0.25
    """
    if isinstance(family, VarianceFunction):
        return family
    text = str(family).strip()
    name, _, rest = text.partition(":")
    name = name.strip().lower()
    if name == "tweedie":
        return TweediePower(_parse_params(rest, ("p",))["p"])
    if name == "expvf":
        return ExponentialVF(_parse_params(rest, ("gamma",))["gamma"])
    if name == "custom":
        expr = rest.strip()
        if len(expr) >= 2 and expr[0] == expr[-1] and expr[0] in "'\"":
            expr = expr[1:-1]
        return Custom(expr)
    simple = {
        "bernoulli": Bernoulli,
        "negbin": NegativeBinomial,
        "sech": HyperbolicSecant,
    }
    if name in simple and not rest:
        return simple[name]()
    raise ValueError(f"unknown variance function family {text!r}")
