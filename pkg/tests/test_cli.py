import io
import json
import subprocess
import sys

import pytest

from divkit.cli import fmt, main, run_suite


def run(*argv):
    out = io.StringIO()
    code = main(list(argv), out)
    return code, out.getvalue()


def test_fmt():
    assert fmt(-0.0) == "0"
    assert fmt(0.38629436111989057) == "0.386294361"
    assert fmt(float("nan")) == "nan"
    assert fmt(1e-20) == "1e-20"


def test_eval():
    code, out = run("eval", "--vf", "tweedie:p=1", "--kind", "beta", "--x", "2", "--mu", "1")
    assert code == 0
    assert out.split() == ["0.386294361", "closed_form", "0"]
    code, out = run("eval", "--vf", "bernoulli", "--kind", "beta", "--x", "0.5", "--mu", "0.5")
    assert out.split()[0] == "0"
    code, out = run("eval", "--vf", 'custom:"1+mu^2"', "--kind", "beta", "--x", "1", "--mu", "0")
    assert out.split()[:2] == ["0.438824573", "quadrature"]
    code, out = run("eval", "--vf", "tweedie:p=1", "--kind", "deviance", "--x", "2", "--mu", "1", "--format", "json")
    assert json.loads(out)["value"] == pytest.approx(0.7725887222397811)


def test_eval_errors(capsys):
    assert run("eval", "--vf", "tweedie:p=2", "--x", "1", "--mu", "-1")[0] == 2
    assert "[mu]" in capsys.readouterr().err
    assert run("eval", "--vf", "custom:mu +", "--x", "1", "--mu", "1")[0] == 2
    assert run("eval", "--vf", "bernoulli", "--kind", "alpha", "--x", "0.2", "--mu", "0.5")[0] == 2


def test_table():
    code, out = run("table", "--vf", "tweedie:p=0", "--x-range", "0", "2", "--mu-range", "0", "2", "--steps", "3")
    lines = out.splitlines()
    assert lines[0] == "x,mu,value,method,err"
    assert len(lines) == 10
    for line in lines[1:]:
        x, mu, value, method, err = line.split(",")
        assert float(value) == 0.5 * (float(x) - float(mu)) ** 2
    code, out = run("table", "--vf", "tweedie:p=0", "--x-range", "1", "1", "--mu-range", "1", "1", "--steps", "1")
    assert out == "x,mu,value,method,err\n1,1,0,closed_form,0\n"
    code, out = run("table", "--vf", "tweedie:p=2", "--x-range", "1", "2", "--mu-range", "-1", "1", "--steps", "3")
    rows = [r.split(",") for r in out.splitlines()[1:]]
    flagged = [r for r in rows if r[4] == "domain"]
    assert len(flagged) == 6 and all(r[2] == "nan" for r in flagged)
    assert code == 0


def test_table_byte_stable():
    args = ("table", "--vf", "tweedie:p=1.5", "--x-range", "0.5", "3", "--mu-range", "0.5", "3")
    assert run(*args) == run(*args)


@pytest.mark.parametrize(
    "suite, vf, code",
    [
        ("deviance", "tweedie:p=1.5", 0),
        ("scaling", "bernoulli", 4),
        ("mu0", "negbin", 0),
        ("translation", "expvf:gamma=2", 0),
        ("translation", "tweedie:p=1", 4),
        ("symmetry", "tweedie:p=1.5", 0),
        ("symmetry", "sech", 4),
        ("alphabeta", "bernoulli", 4),
        ("bregman", "sech", 0),
    ],
)
def test_verify_exit_codes(suite, vf, code):
    rc, out = run("verify", "--suite", suite, "--vf", vf)
    assert rc == code
    if code == 0:
        report = json.loads(out)
        assert report["suite"] == suite
        assert report["cases"] and all(c["pass"] for c in report["cases"])
        assert set(report["cases"][0]) == {"name", "lhs", "rhs", "abs_err", "rel_err", "pass"}


def test_verify_property_failure_exit_code(monkeypatch):
    from divkit import cli
    from divkit.report import PropertyReport

    monkeypatch.setitem(cli._SUITES, "bregman", lambda vf, rng: [PropertyReport("broken", 1.0, 2.0)])
    assert run("verify", "--suite", "bregman", "--vf", "sech")[0] == 1


def test_verify_seed(monkeypatch):
    a = [r.name for r in run_suite("bregman", "sech", seed=1)]
    monkeypatch.setenv("DIVKIT_SEED", "1")
    assert [r.name for r in run_suite("bregman", "sech")] == a
    assert [r.name for r in run_suite("bregman", "sech", seed=2)] != a


def test_density():
    assert run("density", "--model", "poisson", "--mu", "2", "--x", "0")[1].strip() == "0.135335283"
    assert run("density", "--model", "gaussian:sigma2=1", "--mu", "0", "--x", "0")[1].strip() == "0.39894228"
    assert run("density", "--model", "gamma:a=2,b=2", "--x", "1")[1].strip() == "0.541341133"
    assert run("density", "--model", "poisson", "--mu", "2", "--x", "0.5")[0] == 2
    code, out = run("density", "--model", "poisson", "--mu", "2", "--x-range", "0", "4", "--steps", "5")
    assert out.splitlines()[0] == "x,mu,density" and len(out.splitlines()) == 6


def test_entropy():
    assert run("entropy", "--model", "gamma:a=1,b=1")[1].strip() == "1"
    assert run("entropy", "--model", "poisson", "--mu", "3")[0] == 4
    code, out = run("entropy", "--model", "poisson", "--mu", "3", "--mc", "--samples", "20000", "--seed", "3")
    assert code == 0 and len(out.split()) == 2


def test_console_script_module():
    proc = subprocess.run(
        [sys.executable, "-m", "divkit.cli", "eval", "--vf", "tweedie:p=0", "--x", "3", "--mu", "1"],
        capture_output=True, text=True,
    )
    assert proc.returncode == 0
    assert proc.stdout.split()[0] == "2"
