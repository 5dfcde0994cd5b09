"""``divkit`` command line.

Subcommands: ``eval``, ``table``, ``verify``, ``density``, ``entropy``.

Exit codes: 0 success, 1 a verified property failed, 2 domain or input
error, 3 quadrature did not converge, 4 suite or quantity not applicable.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
import warnings

import numpy as np

from . import core, density, stats, transforms
from .errors import (
    ConvergenceError,
    DomainError,
    ExpressionSyntaxError,
    InfiniteResultError,
    IntegrandError,
    NotDecomposableError,
    UnsupportedError,
)
from .report import PropertyReport
from .varfun import NoDispersionModelWarning, TweediePower, make_variance_function

EXIT_OK = 0
EXIT_PROPERTY = 1
EXIT_DOMAIN = 2
EXIT_CONVERGENCE = 3
EXIT_INAPPLICABLE = 4

DEFAULT_SEED = 8675309
SUITES = ("bregman", "scaling", "translation", "alphabeta", "deviance", "mu0", "symmetry")
SUITE_PAIRS = 6
SUITE_RTOL = 1e-8


class Inapplicable(Exception):
    """Suite or quantity does not apply to the chosen variance function."""


def fmt(value) -> str:
    """Nine significant digits; ``-0`` prints as ``0``."""
    value = float(value)
    if math.isnan(value):
        return "nan"
    if value == 0:
        return "0"
    return f"{value:.9g}"


def resolve_seed(seed=None) -> int:
    if seed is not None:
        return int(seed)
    env = os.environ.get("DIVKIT_SEED")
    return int(env) if env else DEFAULT_SEED


# verify suites


def _pairs(vf, rng, n=SUITE_PAIRS, positive=False):
    if positive:
        return rng.uniform(0.2, 5.0, (n, 2))
    return np.stack([vf.domain.sample(rng, n), vf.domain.sample(rng, n)], axis=1)


def _suite_bregman(vf, rng):
    out = []
    for x, mu in _pairs(vf, rng):
        pair = core.cumulant_pair(vf, mu)
        phi_x = core.dual_cumulant_phi(vf, x, pair.base)
        rhs = phi_x - pair.phi - (x - mu) * pair.theta
        lhs = core.beta_divergence(vf, x, mu).value
        out.append(PropertyReport(f"bregman x={x:.6g} mu={mu:.6g}", lhs, rhs, rtol=SUITE_RTOL, atol=1e-12))
    return out


def _suite_scaling(vf, rng):
    if not transforms.detect_decomposition(vf, "multiplicative"):
        raise Inapplicable(f"{vf.token} is not multiplicatively decomposable")
    out = []
    for x, mu in _pairs(vf, rng):
        for c in (0.5, 2.0, 10.0):
            if vf.domain.contains(mu / c) and vf.domain.in_closure(x / c):
                out.append(transforms.scale_identity_check(vf, x, mu, c, rtol=SUITE_RTOL))
    return out


def _suite_translation(vf, rng):
    if not transforms.detect_decomposition(vf, "translative"):
        raise Inapplicable(f"{vf.token} is not translatively decomposable")
    out = []
    for x, mu in _pairs(vf, rng):
        for c in (-10.0, 0.3, 7.0):
            if vf.domain.contains(mu + c) and vf.domain.contains(x + c):
                out.append(transforms.translate_identity_check(vf, x, mu, c, rtol=SUITE_RTOL))
    return out


def _suite_alphabeta(vf, rng):
    # pairs are drawn from [0.2, 5], so x/mu must be allowed up to 25
    if not (vf.domain.contains(1.0) and vf.domain.lower <= 0 and math.isinf(vf.domain.upper)):
        raise Inapplicable(f"the alpha divergence needs 1 inside the domain of {vf.token}")
    multiplicative = bool(transforms.detect_decomposition(vf, "multiplicative"))
    out = []
    for i, (x, mu) in enumerate(_pairs(vf, rng, positive=True)):
        direct = core.alpha_divergence(vf, x, mu).value
        via_beta = transforms.alpha_from_beta(vf, x, mu).value
        out.append(PropertyReport(f"alpha=mu*beta(x/mu,1) x={x:.6g} mu={mu:.6g}", direct, via_beta, rtol=SUITE_RTOL, atol=1e-12))
        if multiplicative:
            beta = core.beta_divergence(vf, x, mu).value
            out.append(
                PropertyReport(
                    f"beta=mu/f(mu)*alpha x={x:.6g} mu={mu:.6g}",
                    beta,
                    transforms.beta_from_alpha(vf, x, mu).value,
                    rtol=SUITE_RTOL,
                    atol=1e-12,
                )
            )
        if i == 0:
            nested = core.alpha_divergence_via_cumulant(vf, x, mu).value
            out.append(PropertyReport(f"alpha nested form x={x:.6g} mu={mu:.6g}", direct, nested, rtol=1e-7, atol=1e-10))
    return out


def _suite_deviance(vf, rng):
    out = []
    for x, mu in _pairs(vf, rng):
        beta = core.beta_divergence(vf, x, mu).value
        out.append(PropertyReport(f"deviance=2*beta x={x:.6g} mu={mu:.6g}", core.unit_deviance(vf, x, mu), 2.0 * beta, rtol=0.0))
        ll = core.quasi_log_likelihood(vf, x, x).value - core.quasi_log_likelihood(vf, x, mu).value
        out.append(PropertyReport(f"L(x|x)-L(x|mu) x={x:.6g} mu={mu:.6g}", ll, beta, rtol=SUITE_RTOL, atol=1e-10))
    return out


def _suite_mu0(vf, rng):
    bases = [vf.default_base, *vf.domain.sample(rng, 2)]
    out = []
    for x, mu in _pairs(vf, rng):
        beta = core.beta_divergence(vf, x, mu).value
        for base in bases:
            ll = core.quasi_log_likelihood(vf, x, x, base).value - core.quasi_log_likelihood(vf, x, mu, base).value
            out.append(
                PropertyReport(f"L(x|x)-L(x|mu) base={base:.6g} x={x:.6g} mu={mu:.6g}", ll, beta, rtol=SUITE_RTOL, atol=1e-10)
            )
    return out


def _suite_symmetry(vf, rng):
    if not isinstance(vf, TweediePower):
        raise Inapplicable("alpha symmetry pairs Tweedie powers p and 3 - p")
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", NoDispersionModelWarning)
        other = TweediePower(3.0 - vf.p)
    return [
        transforms.alpha_symmetry_check(vf, x, mu, reverse_vf=other, rtol=SUITE_RTOL)
        for x, mu in _pairs(vf, rng, positive=True)
    ]


_SUITES = {
    "bregman": _suite_bregman,
    "scaling": _suite_scaling,
    "translation": _suite_translation,
    "alphabeta": _suite_alphabeta,
    "deviance": _suite_deviance,
    "mu0": _suite_mu0,
    "symmetry": _suite_symmetry,
}


def run_suite(suite: str, vf, seed=None) -> list[PropertyReport]:
    """Run one verification suite on seeded random in-domain points.

    Raises :class:`Inapplicable` when the suite does not apply.
    """
    if suite not in _SUITES:
        raise ValueError(f"unknown suite {suite!r}; expected one of {SUITES}")
    vf = make_variance_function(vf)
    rng = np.random.Generator(np.random.Philox(key=resolve_seed(seed)))
    try:
        reports = _SUITES[suite](vf, rng)
    except NotDecomposableError as exc:
        raise Inapplicable(str(exc)) from exc
    if not reports:
        raise Inapplicable(f"no admissible test points for suite {suite} on {vf.token}")
    return reports


# subcommands


def _emit(text, out):
    out.write(text)
    if not text.endswith("\n"):
        out.write("\n")


def cmd_eval(args, out):
    res = core.evaluate(args.kind, args.vf, args.x, args.mu, args.base, method=args.method)
    if args.format == "json":
        payload = {"kind": args.kind, "vf": make_variance_function(args.vf).token, "value": res.value,
                   "method": res.method.value, "err": res.error_estimate}
        _emit(json.dumps(payload), out)
    else:
        _emit(f"{fmt(res.value)} {res.method.value} {fmt(res.error_estimate)}", out)
    return EXIT_OK


def _grid(lo, hi, steps):
    return [lo] if steps == 1 else list(np.linspace(lo, hi, steps))


def cmd_table(args, out):
    vf = make_variance_function(args.vf)
    xs = _grid(*args.x_range, args.x_steps or args.steps)
    mus = _grid(*args.mu_range, args.mu_steps or args.steps)
    rows = []
    for x in xs:
        for mu in mus:
            try:
                res = core.evaluate(args.kind, vf, x, mu, args.base, method=args.method)
                rows.append((x, mu, res.value, res.method.value, fmt(res.error_estimate)))
            except (DomainError, InfiniteResultError):
                rows.append((x, mu, math.nan, "", "domain"))
            except (ConvergenceError, IntegrandError):
                rows.append((x, mu, math.nan, "", "convergence"))
    if args.format == "json":
        _emit(json.dumps([{"x": x, "mu": mu, "value": v, "method": m, "err": e} for x, mu, v, m, e in rows]), out)
        return EXIT_OK
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["x", "mu", "value", "method", "err"])
    for x, mu, v, m, e in rows:
        writer.writerow([fmt(x), fmt(mu), fmt(v), m, e])
    out.write(buf.getvalue())
    return EXIT_OK


def cmd_verify(args, out):
    reports = run_suite(args.suite, args.vf, args.seed)
    if args.format == "json":
        _emit(json.dumps({"suite": args.suite, "cases": [r.to_dict() for r in reports]}, indent=2), out)
    else:
        for r in reports:
            flag = "PASS" if r.passed else "FAIL"
            _emit(f"{flag} {r.name} lhs={fmt(r.lhs)} rhs={fmt(r.rhs)} rel_err={r.rel_err:.3g}", out)
    return EXIT_OK if all(r.passed for r in reports) else EXIT_PROPERTY


def _model_and_mu(args):
    model, implied = density.parse_model(args.model)
    mu = args.mu if args.mu is not None else implied
    if mu is None:
        raise DomainError("--mu is required for this model", argument="mu")
    if args.mu is not None and implied is not None and not math.isclose(args.mu, implied):
        raise DomainError(f"--mu {args.mu} contradicts the model mean {implied}", argument="mu", value=args.mu)
    return model, mu


def cmd_density(args, out):
    model, mu = _model_and_mu(args)
    if args.x is not None:
        value = density.density(model, args.x, mu)
        if args.format == "json":
            _emit(json.dumps({"model": model.name, "x": args.x, "mu": mu, "density": value}), out)
        else:
            _emit(fmt(value), out)
        return EXIT_OK
    if args.x_range is None:
        raise DomainError("give --x or --x-range", argument="x")
    xs = np.asarray(_grid(*args.x_range, args.steps), dtype=float)
    if model.support == "counting":
        xs = np.unique(np.round(xs))
    values = density.density(model, xs, mu)
    if args.format == "json":
        _emit(json.dumps([{"x": float(x), "mu": mu, "density": float(v)} for x, v in zip(xs, values)]), out)
        return EXIT_OK
    lines = ["x,mu,density"] + [f"{fmt(x)},{fmt(mu)},{fmt(v)}" for x, v in zip(xs, values)]
    out.write("\n".join(lines) + "\n")
    return EXIT_OK


def cmd_entropy(args, out):
    model, mu = _model_and_mu(args)
    if args.mc:
        spec = stats.MonteCarloSpec(args.samples, resolve_seed(args.seed))
        est = stats.entropy_via_divergence_mc(model, mu, spec)
        value, se = est.value, est.std_error
    else:
        value, se = stats.entropy_via_divergence(model, mu), 0.0
    if args.format == "json":
        _emit(json.dumps({"model": model.name, "mu": mu, "entropy": value, "std_error": se}), out)
    else:
        _emit(f"{fmt(value)} {fmt(se)}" if args.mc else fmt(value), out)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="divkit", description="Divergences from variance functions.")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, formats=("text", "json"), default="text"):
        p.add_argument("--format", choices=formats, default=default)

    p = sub.add_parser("eval", help="evaluate one quantity")
    p.add_argument("--vf", required=True, help="variance function token, e.g. tweedie:p=1.5")
    p.add_argument("--kind", choices=core.KINDS, default="beta")
    p.add_argument("--x", type=float)
    p.add_argument("--mu", type=float, required=True)
    p.add_argument("--base", type=float)
    p.add_argument("--method", choices=("auto", "closed", "quad"), default="auto")
    common(p)
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("table", help="CSV grid of one quantity")
    p.add_argument("--vf", required=True)
    p.add_argument("--kind", choices=core.KINDS, default="beta")
    p.add_argument("--x-range", type=float, nargs=2, required=True, metavar=("LO", "HI"))
    p.add_argument("--mu-range", type=float, nargs=2, required=True, metavar=("LO", "HI"))
    p.add_argument("--steps", type=int, default=5)
    p.add_argument("--x-steps", type=int)
    p.add_argument("--mu-steps", type=int)
    p.add_argument("--base", type=float)
    p.add_argument("--method", choices=("auto", "closed", "quad"), default="auto")
    common(p, ("csv", "json"), "csv")
    p.set_defaults(func=cmd_table)

    p = sub.add_parser("verify", help="run a property suite")
    p.add_argument("--suite", choices=SUITES, required=True)
    p.add_argument("--vf", required=True)
    p.add_argument("--seed", type=int)
    common(p, ("text", "json"), "json")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("density", help="density through the beta-divergence form")
    p.add_argument("--model", required=True, help="gaussian:sigma2=1, poisson or gamma:a=2[,b=2]")
    p.add_argument("--mu", type=float)
    p.add_argument("--x", type=float)
    p.add_argument("--x-range", type=float, nargs=2, metavar=("LO", "HI"))
    p.add_argument("--steps", type=int, default=11)
    common(p, ("text", "csv", "json"))
    p.set_defaults(func=cmd_density)

    p = sub.add_parser("entropy", help="entropy through the expected divergence")
    p.add_argument("--model", required=True)
    p.add_argument("--mu", type=float)
    p.add_argument("--mc", action="store_true", help="Monte Carlo expectations")
    p.add_argument("--samples", type=int, default=1_000_000)
    p.add_argument("--seed", type=int)
    common(p)
    p.set_defaults(func=cmd_entropy)
    return parser


def main(argv=None, out=None) -> int:
    out = out or sys.stdout
    args = build_parser().parse_args(argv)
    try:
        return args.func(args, out)
    except Inapplicable as exc:
        print(f"divkit: not applicable: {exc}", file=sys.stderr)
        return EXIT_INAPPLICABLE
    except (UnsupportedError, NotDecomposableError) as exc:
        print(f"divkit: not applicable: {exc}", file=sys.stderr)
        return EXIT_INAPPLICABLE
    except (ConvergenceError, IntegrandError) as exc:
        print(f"divkit: no convergence: {exc}", file=sys.stderr)
        return EXIT_CONVERGENCE
    except DomainError as exc:
        arg = f" [{exc.argument}]" if getattr(exc, "argument", None) else ""
        print(f"divkit: domain error{arg}: {exc}", file=sys.stderr)
        return EXIT_DOMAIN
    except (InfiniteResultError, ExpressionSyntaxError, ValueError) as exc:
        print(f"divkit: {exc}", file=sys.stderr)
        return EXIT_DOMAIN


if __name__ == "__main__":
    sys.exit(main())
