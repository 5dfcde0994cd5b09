"""Scaling and translation laws, and the alpha/beta connections.

When ``v(c*t) = f(c) * v(t)`` (multiplicative decomposition)::

    d_beta(x, mu) = c**2 / f(c) * d_beta(x/c, mu/c)
    d_beta(x, mu) = mu / f(mu) * d_alpha(x, mu)

When ``v(t - c) = f(c) * v(t)`` (translative decomposition)::

    d_beta(x, mu) = d_beta(x + c, mu + c) / f(c)

For every variance function ``d_alpha(x, mu) = mu * d_beta(x/mu, 1)``.
Decompositions are detected numerically on an 8 x 8 probe grid so custom
expressions are handled the same way as named families.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Callable, Optional

import numpy as np

from .core import DivergenceResult, alpha_divergence, beta_divergence
from .errors import DomainError, NotDecomposableError
from .report import PropertyReport
from .varfun import ExponentialVF, TweediePower, VarianceFunction, make_variance_function

__all__ = [
    "DecompositionKind",
    "DecompositionWitness",
    "PropertyReport",
    "detect_decomposition",
    "scale_identity_check",
    "translate_identity_check",
    "alpha_from_beta",
    "beta_from_alpha",
    "alpha_symmetry_check",
]

DECOMPOSITION_TOL = 1e-9
SCALE_PROBES = (0.25, 0.5, 0.8, 1.5, 2.0, 3.0, 5.0, 10.0)
SHIFT_PROBES = (-3.0, -1.0, -0.5, -0.1, 0.1, 0.5, 1.0, 3.0)


class DecompositionKind(str, Enum):
    MULTIPLICATIVE = "multiplicative"
    TRANSLATIVE = "translative"
    NONE = "none"


@dataclass(frozen=True)
class DecompositionWitness:
    kind: DecompositionKind
    factor_fn: Optional[Callable[[float], float]]
    test_residual: float

    def __bool__(self):
        return self.kind is not DecompositionKind.NONE

    def f(self, c):
        if self.factor_fn is None:
            raise NotDecomposableError("no decomposition factor: variance function is not decomposable")
        return self.factor_fn(c)


def _probe_ts(vf, n=8):
    lo, hi = vf.domain.typical_range()
    return np.linspace(lo, hi, n)


def _residual(vf, pairs, moved):
    """Max relative misfit of ``v(moved(c, t)) == f(c) * v(t)`` over probes.

    ``f(c)`` is estimated at the first admissible ``t`` for each ``c``.
    Returns ``inf`` when fewer than two probes per factor are admissible.
    """
    v = vf.raw
    worst = 0.0
    checked = 0
    for c, ts in pairs:
        ts = [t for t in ts if vf.domain.contains(moved(c, t))]
        if len(ts) < 2:
            continue
        f_c = v(moved(c, ts[0])) / v(ts[0])
        for t in ts[1:]:
            target = v(moved(c, t))
            worst = max(worst, abs(target - f_c * v(t)) / abs(target))
            checked += 1
    return worst if checked else math.inf


def detect_decomposition(vf, kind) -> DecompositionWitness:
    """Probe ``vf`` for a multiplicative or translative decomposition.

    Tweedie powers report ``f(c) = c**p`` and exponential variance
    functions ``f(c) = gamma**(-c)`` exactly; other decomposable functions get
    a numerical factor ``f(c) = v(c*t0)/v(t0)`` (or ``v(t0 - c)/v(t0)``).
    Non-decomposable inputs yield ``kind=NONE``.
    """
    vf = make_variance_function(vf)
    kind = DecompositionKind(kind)
    ts = _probe_ts(vf)
    if kind is DecompositionKind.MULTIPLICATIVE:
        moved = lambda c, t: c * t  # noqa: E731
        probes = SCALE_PROBES
    elif kind is DecompositionKind.TRANSLATIVE:
        moved = lambda c, t: t - c  # noqa: E731
        probes = SHIFT_PROBES
    else:
        raise ValueError("kind must be multiplicative or translative")
    residual = _residual(vf, [(c, ts) for c in probes], moved)
    if not residual <= DECOMPOSITION_TOL:
        return DecompositionWitness(DecompositionKind.NONE, None, residual)

    if kind is DecompositionKind.MULTIPLICATIVE and isinstance(vf, TweediePower):
        p = vf.p
        factor = lambda c: c**p  # noqa: E731
    elif kind is DecompositionKind.TRANSLATIVE and isinstance(vf, ExponentialVF):
        g = vf.gamma
        factor = lambda c: g ** (-c)  # noqa: E731
    else:
        v = vf.raw
        t0 = float(ts[len(ts) // 2])
        factor = lambda c: v(moved(c, t0)) / v(t0)  # noqa: E731
    return DecompositionWitness(kind, factor, residual)


def _require(vf, kind):
    witness = detect_decomposition(vf, kind)
    if not witness:
        raise NotDecomposableError(
            f"{vf.token} is not {kind.value}ly decomposable "
            f"(probe residual {witness.test_residual:.3g})"
        )
    return witness


def scale_identity_check(vf, x, mu, c, *, rtol=1e-8, method="auto") -> PropertyReport:
    """Check ``d_beta(x, mu) == c**2/f(c) * d_beta(x/c, mu/c)``."""
    vf = make_variance_function(vf)
    if not c > 0:
        raise DomainError(f"scale factor must be positive, got {c}", argument="c", value=c)
    witness = _require(vf, DecompositionKind.MULTIPLICATIVE)
    lhs = beta_divergence(vf, x, mu, method=method).value
    if c == 1:
        rhs = lhs
    else:
        rhs = c * c / witness.f(c) * beta_divergence(vf, x / c, mu / c, method=method).value
    return PropertyReport(f"scaling c={c:g} x={x:g} mu={mu:g}", lhs, rhs, rtol=rtol)


def translate_identity_check(vf, x, mu, c, *, rtol=1e-8, method="auto") -> PropertyReport:
    """Check ``d_beta(x, mu) == d_beta(x + c, mu + c) / f(c)``."""
    vf = make_variance_function(vf)
    witness = _require(vf, DecompositionKind.TRANSLATIVE)
    lhs = beta_divergence(vf, x, mu, method=method).value
    if c == 0:
        rhs = lhs
    else:
        rhs = beta_divergence(vf, x + c, mu + c, method=method).value / witness.f(c)
    return PropertyReport(f"translation c={c:g} x={x:g} mu={mu:g}", lhs, rhs, rtol=rtol)


def alpha_from_beta(vf, x, mu, *, method="auto") -> DivergenceResult:
    """Alpha divergence computed as ``mu * d_beta(x/mu, 1)``."""
    vf = make_variance_function(vf)
    x = float(x)
    mu = float(mu)
    if not mu > 0:
        raise DomainError(f"alpha divergence needs mu > 0, got {mu}", argument="mu", value=mu)
    if not vf.domain.contains(1.0):
        raise DomainError(
            f"alpha divergence needs 1 inside the domain {vf.domain} of {vf.token}", argument="mu", value=mu
        )
    return beta_divergence(vf, x / mu, 1.0, method=method).scaled(mu)


def beta_from_alpha(vf, x, mu, *, method="auto") -> DivergenceResult:
    """Beta divergence computed as ``mu/f(mu) * d_alpha(x, mu)``.

    For Tweedie powers this is ``mu**(1-p) * d_alpha``; for ``v(mu) = k*mu``
    the factor is one and the two divergences coincide.
    """
    vf = make_variance_function(vf)
    witness = _require(vf, DecompositionKind.MULTIPLICATIVE)
    res = alpha_divergence(vf, x, mu, method=method)
    return res.scaled(mu / witness.f(mu))


def alpha_symmetry_check(
    vf, x, mu, *, reverse_vf: VarianceFunction | str | None = None, rtol=1e-8, method="auto"
) -> PropertyReport:
    """Compare ``d_alpha(x, mu)`` with the reversed ``d_alpha(mu, x)``.

    With ``reverse_vf`` the reversed divergence is taken under another
    variance function; Tweedie powers ``p`` and ``3 - p`` pair this way.
    """
    vf = make_variance_function(vf)
    other = vf if reverse_vf is None else make_variance_function(reverse_vf)
    lhs = alpha_divergence(vf, x, mu, method=method).value
    rhs = alpha_divergence(other, mu, x, method=method).value
    return PropertyReport(f"alpha symmetry x={x:g} mu={mu:g} ({vf.token} vs {other.token})", lhs, rhs, rtol=rtol)
